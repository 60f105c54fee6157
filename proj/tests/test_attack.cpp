#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veridl/artifacts.hpp"
#include "veridl/attack.hpp"

#include <cmath>
#include <sstream>

using namespace veridl;
using attack::AttackKind;
using attack::AttackSpec;
using attack::HonestInstance;
using proto::FailedStep;

namespace {

struct Fixture {
    HonestInstance inst;
    group::KeyPair keys;
    proto::DatasetSignature signature;
    proto::Proof honest_proof;
};

Fixture make_fixture(std::uint64_t seed, std::vector<std::uint32_t> hidden = {3},
                     std::uint32_t m = 3, std::size_t n = 8) {
    Fixture f;
    f.inst.config.input_dim = m;
    f.inst.config.hidden = std::move(hidden);
    f.inst.config.threshold = 1e-6;
    f.inst.config.max_epochs = 60000;
    f.inst.params = codec::CodecParams(20, bn::scalar_field_order());
    f.inst.dataset = data::make_synthetic(seed, n, m, f.inst.params);
    f.keys = group::genkey(128, seed ^ 0xFACE);
    f.signature = proto::setup(f.inst.dataset, f.keys, f.inst.params);
    auto training = dnn::train_to_convergence(dnn::init_model(f.inst.config, seed ^ 0x77),
                                              f.inst.config, f.inst.params, f.inst.dataset);
    f.inst.w0 = proto::WeightSet{training.w0_layers, training.w0_output};
    f.inst.delta = proto::WeightSet{training.delta_layers, training.delta_output};
    f.honest_proof = proto::certify(f.inst.dataset, training.commitment, f.inst.config,
                                    f.inst.params, proto::ProofMode::Basic);
    return f;
}

proto::VerificationReport verify_attacked(const Fixture& f, const attack::AttackResult& res) {
    return proto::verify(f.inst.w0, res.delta, res.proof, f.signature, f.keys.public_v,
                         f.inst.config, f.inst.params);
}

}  // namespace

TEST_CASE("every attack kind is rejected at its expected step") {
    Fixture f = make_fixture(2024);
    auto honest = proto::verify(f.inst.w0, f.inst.delta, f.honest_proof, f.signature,
                                f.keys.public_v, f.inst.config, f.inst.params);
    REQUIRE(honest.accepted);

    for (std::size_t k = 0; k < attack::kAttackKindCount; ++k) {
        AttackSpec spec;
        spec.kind = (AttackKind)k;
        spec.seed = 99 + k;
        CAPTURE(attack::attack_name(spec.kind));
        auto res = attack::apply_attack(spec, f.inst);
        auto rep = verify_attacked(f, res);
        CHECK(!rep.accepted);
        CHECK(attack::is_expected_failed_step(spec.kind, rep.failed_step));
    }
}

TEST_CASE("attacks are deterministic byte-for-byte") {
    Fixture f = make_fixture(31337);
    for (AttackKind k : {AttackKind::ByzantineNeurons, AttackKind::CompressPrune,
                         AttackKind::ArbitraryWeights, AttackKind::PoisonCrafted}) {
        AttackSpec spec;
        spec.kind = k;
        spec.seed = 555;
        auto r1 = attack::apply_attack(spec, f.inst);
        auto r2 = attack::apply_attack(spec, f.inst);
        CHECK(io::proof_bytes(r1.proof) == io::proof_bytes(r2.proof));
        CHECK(io::weights_bytes(r1.delta) == io::weights_bytes(r2.delta));
    }
}

TEST_CASE("rebuild-proof variant stays consistent except for the aggregate") {
    Fixture f = make_fixture(808);
    AttackSpec spec;
    spec.kind = AttackKind::WrongE1RebuildProof;
    auto res = attack::apply_attack(spec, f.inst);

    // signature and layer-1 sums still verify
    CHECK(proto::verify_step1(res.proof, f.signature, f.keys.public_v));
    auto st = proto::verify_step2(res.proof, proto::add(f.inst.w0, f.inst.delta), f.inst.config,
                                  f.inst.params);
    CHECK(st.failed == FailedStep::Step2E1);  // only the aggregate is inconsistent

    // the claimed errors still satisfy the convergence condition
    CHECK(dnn::within_threshold(res.proof.s1, res.proof.s2, f.inst.config.threshold,
                                res.proof.n_samples, f.inst.params.frac_bits));
}

TEST_CASE("compression attacks move the first error measurably") {
    Fixture f = make_fixture(6060);
    double grid = std::ldexp(1.0, -2 * (int)f.inst.params.frac_bits);
    for (std::uint32_t bits : {8u, 16u}) {
        AttackSpec spec;
        spec.kind = AttackKind::CompressLowPrec;
        spec.bits = bits;
        spec.seed = 7 + bits;
        auto res = attack::apply_attack(spec, f.inst);
        CHECK(res.e1_delta_post > grid);
        CHECK(verify_attacked(f, res).failed_step == FailedStep::Step2Z);
    }
    AttackSpec spec;
    spec.kind = AttackKind::CompressPrune;
    spec.prune_fraction = 0.25;
    spec.seed = 11;
    auto res = attack::apply_attack(spec, f.inst);
    CHECK(res.e1_delta_post > grid);
}

TEST_CASE("soundness matrix 2 configs x 2 trials") {
    std::vector<attack::MatrixConfig> configs;
    {
        attack::MatrixConfig mc;
        mc.config.input_dim = 2;
        mc.config.hidden = {2};
        mc.config.threshold = 1e-6;
        mc.config.max_epochs = 60000;
        mc.data_seed = 91;
        mc.n_samples = 6;
        configs.push_back(mc);
    }
    {
        attack::MatrixConfig mc;
        mc.config.input_dim = 3;
        mc.config.hidden = {3, 2};
        mc.config.threshold = 1e-6;
        mc.config.max_epochs = 60000;
        mc.data_seed = 92;
        mc.n_samples = 7;
        configs.push_back(mc);
    }
    std::ostringstream csv;
    auto rows = attack::run_soundness_matrix(configs, 2, proto::ProofMode::Basic, &csv);
    REQUIRE(rows.size() == 2 * 2 * (1 + attack::kAttackKindCount));
    for (const auto& row : rows) {
        CAPTURE(row.kind);
        CAPTURE(row.config_id);
        CAPTURE(row.trial);
        if (row.kind == "honest-control") {
            CHECK(row.verdict == "accept");
        } else {
            CHECK(row.verdict == "reject");
            attack::AttackKind kind = attack::attack_from_name(row.kind);
            bool matched = false;
            for (int s = 0; s <= (int)proto::FailedStep::Step4Convergence; ++s)
                if (row.failed_step == proto::failed_step_name((proto::FailedStep)s))
                    matched = attack::is_expected_failed_step(kind, (proto::FailedStep)s);
            CHECK(matched);
        }
    }
    // csv header shape
    std::string first_line = csv.str().substr(0, csv.str().find('\n'));
    CHECK(first_line == "kind,config-id,trial,verdict,failed_step,e1_delta");
}

TEST_CASE("attack parameter validation") {
    AttackSpec spec;
    spec.kind = AttackKind::CompressLowPrec;
    spec.bits = 12;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.kind = AttackKind::CompressPrune;
    spec.bits = 8;
    spec.prune_fraction = 0.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    CHECK_THROWS_AS(attack::attack_from_name("nope"), std::invalid_argument);
}
