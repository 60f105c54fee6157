#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veridl/artifacts.hpp"
#include "veridl/rng.hpp"
#include "veridl/wire.hpp"

#include <sys/socket.h>
#include <thread>

using namespace veridl;
using num::U256;

namespace {

codec::CodecParams dp() { return codec::CodecParams(20, bn::scalar_field_order()); }

proto::Proof sample_proof(std::uint64_t seed, proto::ProofMode mode) {
    dnn::NetworkConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden = {2, 2};
    cfg.threshold = 2e-3;
    cfg.max_epochs = 60000;
    auto params = dp();
    auto ds = data::make_synthetic(seed, 6, 3, params);
    auto tr = dnn::train_to_convergence(dnn::init_model(cfg, seed), cfg, params, ds);
    return proto::certify(ds, tr.commitment, cfg, params, mode);
}

}  // namespace

TEST_CASE("artifact headers carry magic, version, type") {
    auto keys = group::genkey(128, 3);
    auto pk = io::public_key_bytes({128, keys.public_v});
    CHECK(pk[0] == 'V');
    CHECK(pk[1] == 'D');
    CHECK(pk[2] == 'L');
    CHECK(pk[3] == '1');
    CHECK(pk[4] == io::kFormatVersion);
    CHECK(pk[5] == (std::uint8_t)io::ArtifactType::PublicKey);
    CHECK(io::peek_type(pk) == io::ArtifactType::PublicKey);

    auto truncated = std::vector<std::uint8_t>(pk.begin(), pk.begin() + 10);
    CHECK_THROWS_AS((void)io::public_key_from_bytes(truncated), io::IoError);
    auto wrong = pk;
    wrong[0] = 'X';
    CHECK_THROWS_AS((void)io::peek_type(wrong), io::IoError);
}

TEST_CASE("key and signature artifacts roundtrip") {
    auto keys = group::genkey(128, 9);
    auto pk2 = io::public_key_from_bytes(io::public_key_bytes({128, keys.public_v}));
    CHECK(pk2.security_bits == 128);
    CHECK(pk2.v == keys.public_v);
    auto sk2 = io::secret_key_from_bytes(io::secret_key_bytes({keys.secret}));
    CHECK(sk2.secret == keys.secret);

    auto params = dp();
    auto ds = data::make_synthetic(10, 5, 2, params);
    auto sig = proto::setup(ds, keys, params);
    auto sig2 = io::signature_from_bytes(io::signature_bytes(sig));
    CHECK(bn::point_eq(sig2.gamma.p1, sig.gamma.p1));
}

TEST_CASE("weights artifact roundtrips bit-exactly") {
    rng::SplitMix rng(4);
    proto::WeightSet w;
    w.layers = {{0.1, -0.25, 1e-300, 0.0}, {rng.uniform(), -rng.uniform()}};
    w.output = {0.5, -0.0, 3.14159};
    auto back = io::weights_from_bytes(io::weights_bytes(w));
    CHECK(back.layers == w.layers);
    REQUIRE(back.output.size() == w.output.size());
    for (std::size_t i = 0; i < w.output.size(); ++i) {
        CHECK(back.output[i] == w.output[i]);
        CHECK(std::signbit(back.output[i]) == std::signbit(w.output[i]));
    }
}

TEST_CASE("proof artifact roundtrips and is byte-stable") {
    for (auto mode : {proto::ProofMode::Basic, proto::ProofMode::UniqueValue}) {
        proto::Proof p = sample_proof(21, mode);
        auto bytes = io::proof_bytes(p);
        proto::Proof q = io::proof_from_bytes(bytes);
        CHECK(io::proof_bytes(q) == bytes);
        CHECK(q.mode == p.mode);
        CHECK(q.n_samples == p.n_samples);
        CHECK(q.s1 == p.s1);
        CHECK(q.s2 == p.s2);
        CHECK(q.hidden == p.hidden);
        CHECK(q.witnesses.size() == p.witnesses.size());
        for (std::size_t i = 0; i < p.witnesses.size(); ++i) {
            CHECK(q.witnesses[i].z_splits.size() == p.witnesses[i].z_splits.size());
            CHECK(q.witnesses[i].delta_last == p.witnesses[i].delta_last);
            CHECK(q.witnesses[i].delta_out_commit == p.witnesses[i].delta_out_commit);
        }
        CHECK(q.increments.size() == p.increments.size());
        CHECK(q.digests.feature_commitment_count() == p.digests.feature_commitment_count());
    }
}

TEST_CASE("dataset artifact roundtrips with plaintext reconstruction") {
    auto params = dp();
    auto ds = data::make_synthetic(31, 12, 3, params);
    auto back = io::dataset_from_bytes(io::dataset_bytes(ds), params);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i].features == ds.samples[i].features);
        CHECK(back.samples[i].label == ds.samples[i].label);
        CHECK(back.samples[i].x == ds.samples[i].x);
        CHECK(back.samples[i].y == ds.samples[i].y);
    }
}

TEST_CASE("artifact corruption detected") {
    proto::Proof p = sample_proof(22, proto::ProofMode::Basic);
    auto bytes = io::proof_bytes(p);
    {
        auto bad = bytes;
        bad.resize(bad.size() - 3);
        CHECK_THROWS_AS((void)io::proof_from_bytes(bad), io::IoError);
    }
    {
        auto bad = bytes;
        bad.push_back(0);
        CHECK_THROWS_AS((void)io::proof_from_bytes(bad), io::IoError);
    }
    {
        auto bad = bytes;
        bad[5] = (std::uint8_t)io::ArtifactType::Weights;
        CHECK_THROWS_AS((void)io::proof_from_bytes(bad), io::IoError);
    }
}

TEST_CASE("run config parsing") {
    io::RunConfig cfg = io::parse_run_config(
        "# comment\n"
        "seed = 99\n"
        "eta = 0.2\n"
        "theta = 1e-5\n"
        "hidden = 4,2\n"
        "activation = relu\n"
        "mode = unique-value\n"
        "frac_bits = 18\n"
        "batch_size = 64\n"
        "attack = compress-prune\n"
        "attack_fraction = 0.2\n");
    CHECK(cfg.seed == 99);
    CHECK(cfg.network.learning_rate == 0.2);
    CHECK(cfg.network.threshold == 1e-5);
    CHECK(cfg.network.hidden == std::vector<std::uint32_t>{4, 2});
    CHECK(cfg.network.activation == dnn::Activation::Relu);
    CHECK(cfg.mode == proto::ProofMode::UniqueValue);
    CHECK(cfg.frac_bits == 18);
    CHECK(cfg.network.batch_size == 64);
    REQUIRE(cfg.attack.has_value());
    CHECK(cfg.attack->kind == attack::AttackKind::CompressPrune);
    CHECK(cfg.attack->prune_fraction == 0.2);

    CHECK_THROWS_WITH_AS((void)io::parse_run_config("nope = 1\n"), doctest::Contains("unknown key"),
                         io::IoError);
    CHECK_THROWS_WITH_AS((void)io::parse_run_config("eta = abc\n"), doctest::Contains("line 1"),
                         io::IoError);
    // defaults per the documented run configuration
    io::RunConfig d = io::parse_run_config("");
    CHECK(d.network.learning_rate == 0.1);
    CHECK(d.network.threshold == 1e-4);
    CHECK(d.frac_bits == 20);
    CHECK(d.network.hidden == std::vector<std::uint32_t>{8, 8});
    CHECK(d.network.batch_size == 100);
    CHECK(d.network.activation == dnn::Activation::Sigmoid);
}

TEST_CASE("wire frames over a socketpair") {
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    std::vector<std::uint8_t> payload{1, 2, 3, 250};
    std::thread writer([&] {
        wire::write_frame(fds[0], wire::FrameType::Task, payload);
        wire::write_frame(fds[0], wire::FrameType::Hello, {});
    });
    wire::Frame f1 = wire::read_frame(fds[1]);
    wire::Frame f2 = wire::read_frame(fds[1]);
    writer.join();
    CHECK(f1.type == wire::FrameType::Task);
    CHECK(f1.payload == payload);
    CHECK(f2.type == wire::FrameType::Hello);
    CHECK(f2.payload.empty());
    ::close(fds[0]);
    ::close(fds[1]);
}

TEST_CASE("wire payload codecs") {
    wire::TaskPayload t;
    t.config_text = "eta = 0.1\n";
    t.public_key = {9, 9};
    t.w0 = {1};
    t.dataset = {2, 3, 4};
    auto back = wire::decode_task(wire::encode_task(t));
    CHECK(back.config_text == t.config_text);
    CHECK(back.public_key == t.public_key);
    CHECK(back.w0 == t.w0);
    CHECK(back.dataset == t.dataset);

    wire::ResultPayload r;
    r.updates = {5, 6};
    r.proof = {7};
    auto rb = wire::decode_result(wire::encode_result(r));
    CHECK(rb.updates == r.updates);
    CHECK(rb.proof == r.proof);

    auto bad = wire::encode_task(t);
    bad.pop_back();
    CHECK_THROWS_AS((void)wire::decode_task(bad), io::IoError);
}
