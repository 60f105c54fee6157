// veridl: end-to-end driver for the three protocol roles plus benchmarking
// and a socket demo. Exit codes: 0 success/accept, 2 verification reject,
// 1 malformed artifact or protocol violation, 3 I/O failure, 4 config or
// dataset parse failure, 5 internal error, 6 usage error.

#include <CLI11.hpp>

#include "veridl/artifacts.hpp"
#include "veridl/attack.hpp"
#include "veridl/wire.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace veridl;
namespace fs = std::filesystem;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitMalformed = 1;
constexpr int kExitReject = 2;
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;
constexpr int kExitInternal = 5;

double now_ms() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
}

std::uint64_t effective_seed(std::uint64_t configured) {
    if (const char* env = std::getenv("VERIDL_SEED")) return std::strtoull(env, nullptr, 10);
    return configured;
}

data::QuantizedDataset load_dataset(const std::string& path, const codec::CodecParams& params) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".vdl")
        return io::dataset_from_bytes(io::read_file(path), params);
    return data::load_csv(path, params);
}

struct PipelineArgs {
    std::string data_path, pk_path, config_path, out_dir = ".";
    std::string mode;
    std::uint64_t seed = 0;
    bool have_seed = false;
    std::string attack_kind;
    std::uint32_t attack_bits = 8;
    double attack_fraction = 0.15;
    std::uint64_t attack_seed = 1;
};

io::RunConfig resolve_config(const std::string& config_path) {
    io::RunConfig cfg;
    if (!config_path.empty()) cfg = io::load_run_config(config_path);
    return cfg;
}

struct TrainedArtifacts {
    proto::WeightSet w0, delta;
    proto::Proof proof;
    data::QuantizedDataset dataset;
    double train_ms = 0, certify_ms = 0;
};

TrainedArtifacts run_train_certify(io::RunConfig& cfg, const std::string& data_path) {
    codec::CodecParams params = cfg.make_codec();
    TrainedArtifacts out;
    out.dataset = data::cap_to(load_dataset(data_path, params), cfg.network.batch_size);
    cfg.network.input_dim = (std::uint32_t)out.dataset.feature_dim;
    cfg.network.validate();

    dnn::ModelState init = dnn::init_model(cfg.network, cfg.seed);
    double t0 = now_ms();
    dnn::TrainingResult tr = dnn::train_to_convergence(init, cfg.network, params, out.dataset);
    out.train_ms = now_ms() - t0;
    double t1 = now_ms();
    out.proof = proto::certify(out.dataset, tr.commitment, cfg.network, params, cfg.mode);
    out.certify_ms = now_ms() - t1;
    out.w0 = proto::WeightSet{tr.w0_layers, tr.w0_output};
    out.delta = proto::WeightSet{tr.delta_layers, tr.delta_output};
    return out;
}

int cmd_genkey(const std::string& out_dir, std::uint64_t seed, std::uint32_t security) {
    fs::create_directories(out_dir);
    group::KeyPair keys = group::genkey(security, seed);
    io::write_file(out_dir + "/pk.vdl", io::public_key_bytes({security, keys.public_v}));
    io::write_file(out_dir + "/sk.vdl", io::secret_key_bytes({keys.secret}));
    std::cout << "wrote " << out_dir << "/pk.vdl and " << out_dir << "/sk.vdl\n";
    return kExitAccept;
}

int cmd_setup(const std::string& data_path, const std::string& sk_path,
              const std::string& pk_path, const std::string& out_path,
              const std::string& config_path) {
    io::RunConfig cfg = resolve_config(config_path);
    codec::CodecParams params = cfg.make_codec();
    // the signature must cover exactly the samples the server will train on
    auto ds = data::cap_to(load_dataset(data_path, params), cfg.network.batch_size);
    auto sk = io::secret_key_from_bytes(io::read_file(sk_path));
    auto pk = io::public_key_from_bytes(io::read_file(pk_path));
    group::KeyPair keys;
    keys.secret = sk.secret;
    keys.public_v = pk.v;
    proto::DatasetSignature sig = proto::setup(ds, keys, params);
    io::write_file(out_path, io::signature_bytes(sig));
    std::cout << "signed " << ds.samples.size() << " samples (max quantization error "
              << ds.max_quantization_error << "); wrote " << out_path << "\n";
    return kExitAccept;
}

int cmd_train_certify(PipelineArgs& args) {
    io::RunConfig cfg = resolve_config(args.config_path);
    if (!args.mode.empty()) cfg.mode = proto::mode_from_name(args.mode);
    if (args.have_seed) cfg.seed = args.seed;
    cfg.seed = effective_seed(cfg.seed);
    (void)io::public_key_from_bytes(io::read_file(args.pk_path));  // validated, unused

    TrainedArtifacts arts = run_train_certify(cfg, args.data_path);

    if (!args.attack_kind.empty()) {
        attack::AttackSpec spec;
        spec.kind = attack::attack_from_name(args.attack_kind);
        spec.bits = args.attack_bits;
        spec.prune_fraction = args.attack_fraction;
        spec.weight_fraction = args.attack_fraction;
        spec.seed = args.attack_seed;
        attack::HonestInstance inst;
        inst.config = cfg.network;
        inst.params = cfg.make_codec();
        inst.dataset = arts.dataset;
        inst.w0 = arts.w0;
        inst.delta = arts.delta;
        inst.mode = cfg.mode;
        attack::AttackResult res = attack::apply_attack(spec, inst);
        arts.delta = res.delta;
        arts.proof = res.proof;
        std::cout << "applied attack " << args.attack_kind << "\n";
    }

    fs::create_directories(args.out_dir);
    io::write_file(args.out_dir + "/w0.vdl", io::weights_bytes(arts.w0));
    io::write_file(args.out_dir + "/updates.vdl", io::weights_bytes(arts.delta));
    io::write_file(args.out_dir + "/proof.vdl", io::proof_bytes(arts.proof));
    io::write_file(args.out_dir + "/dataset.vdl", io::dataset_bytes(arts.dataset));
    std::cout << "trained " << arts.train_ms << " ms, certified " << arts.certify_ms
              << " ms; artifacts in " << args.out_dir << "\n";
    return kExitAccept;
}

int cmd_verify(const std::string& w0_path, const std::string& upd_path,
               const std::string& proof_path, const std::string& sig_path,
               const std::string& pk_path, const std::string& config_path, bool literal) {
    io::RunConfig cfg = resolve_config(config_path);
    auto w0_raw = io::read_file(w0_path);
    auto upd_raw = io::read_file(upd_path);
    auto proof_raw = io::read_file(proof_path);
    auto sig_raw = io::read_file(sig_path);
    auto pk_raw = io::read_file(pk_path);

    // decode failures are malformed inputs, not I/O errors
    proto::WeightSet w0, delta;
    proto::Proof proof;
    proto::DatasetSignature sig;
    io::PublicKeyFile pk;
    try {
        w0 = io::weights_from_bytes(w0_raw);
        delta = io::weights_from_bytes(upd_raw);
        proof = io::proof_from_bytes(proof_raw);
        sig = io::signature_from_bytes(sig_raw);
        pk = io::public_key_from_bytes(pk_raw);
    } catch (const std::exception& e) {
        throw proto::ProofFormatError(e.what());
    }

    // the proof header fills in what the config left unpinned; pinned values
    // are cross-checked against the proof during validation
    cfg.network.input_dim = proof.input_dim;
    if (!cfg.hidden_set) cfg.network.hidden = proof.hidden;
    if (!cfg.frac_bits_set) cfg.frac_bits = proof.frac_bits;
    cfg.network.validate();
    proto::VerifyOptions opts;
    opts.literal_pairings = literal;
    proto::VerificationReport rep = proto::verify(w0, delta, proof, sig, pk.v, cfg.network,
                                                  cfg.make_codec(), opts);
    if (rep.accepted) {
        std::cout << "accept\n";
        return kExitAccept;
    }
    std::cout << "reject " << proto::failed_step_name(rep.failed_step);
    if (!rep.detail.empty()) std::cout << " (" << rep.detail << ")";
    std::cout << "\n";
    return kExitReject;
}

int cmd_attack(PipelineArgs& args, const std::string& in_dir, bool matrix,
               const std::string& matrix_out, std::uint32_t trials) {
    if (matrix) {
        std::vector<attack::MatrixConfig> configs;
        for (std::uint32_t c = 0; c < 3; ++c) {
            attack::MatrixConfig mc;
            mc.config.input_dim = 3 + c / 2;
            mc.config.hidden = c == 2 ? std::vector<std::uint32_t>{3, 2}
                                      : std::vector<std::uint32_t>{4 - c};
            mc.config.activation = c == 1 ? dnn::Activation::Tanh : dnn::Activation::Sigmoid;
            mc.config.threshold = 1e-6;
            mc.config.max_epochs = 300000;
            mc.data_seed = 101 + c;
            mc.n_samples = 10 + 2 * c;
            configs.push_back(mc);
        }
        std::ofstream csv(matrix_out);
        if (!csv) throw io::IoError("cannot write " + matrix_out);
        auto rows = attack::run_soundness_matrix(configs, trials, proto::ProofMode::Basic, &csv);
        std::size_t rejects = 0, controls = 0;
        for (const auto& row : rows) {
            if (row.kind == "honest-control")
                controls += row.verdict == "accept";
            else
                rejects += row.verdict == "reject";
        }
        std::cout << "matrix: " << rejects << "/" << rows.size() - controls << " attacks rejected, "
                  << controls << " controls accepted; report " << matrix_out << "\n";
        return kExitAccept;
    }

    io::RunConfig cfg = resolve_config(args.config_path);
    codec::CodecParams params = cfg.make_codec();
    attack::HonestInstance inst;
    inst.dataset = load_dataset(args.data_path, params);
    cfg.network.input_dim = (std::uint32_t)inst.dataset.feature_dim;

    inst.w0 = io::weights_from_bytes(io::read_file(in_dir + "/w0.vdl"));
    inst.delta = io::weights_from_bytes(io::read_file(in_dir + "/updates.vdl"));
    proto::Proof honest = io::proof_from_bytes(io::read_file(in_dir + "/proof.vdl"));
    cfg.network.hidden = honest.hidden;
    cfg.network.validate();
    inst.config = cfg.network;
    inst.params = params;
    inst.mode = honest.mode;

    attack::AttackSpec spec;
    spec.kind = attack::attack_from_name(args.attack_kind);
    spec.bits = args.attack_bits;
    spec.prune_fraction = args.attack_fraction;
    spec.weight_fraction = args.attack_fraction;
    spec.seed = args.attack_seed;
    attack::AttackResult res = attack::apply_attack(spec, inst);

    fs::create_directories(args.out_dir);
    io::write_file(args.out_dir + "/w0.vdl", io::weights_bytes(inst.w0));
    io::write_file(args.out_dir + "/updates.vdl", io::weights_bytes(res.delta));
    io::write_file(args.out_dir + "/proof.vdl", io::proof_bytes(res.proof));
    std::cout << "tampered artifacts in " << args.out_dir << " (|E1'-E1| post-retraining "
              << res.e1_delta_post << ", pre " << res.e1_delta_pre << ")\n";
    return kExitAccept;
}

int cmd_bench(const std::string& out_path, const std::string& widths_arg, std::size_t n_samples,
              std::size_t m_features, std::uint64_t seed) {
    std::vector<std::uint32_t> widths;
    {
        std::stringstream ss(widths_arg);
        std::string part;
        while (std::getline(ss, part, ',')) widths.push_back((std::uint32_t)std::stoul(part));
    }
    std::ofstream csv(out_path);
    if (!csv) throw io::IoError("cannot write " + out_path);
    csv << "width,mode,n,m,size_metric,proof_bytes,train_ms,certify_ms,verify_ms\n";

    codec::CodecParams params(20, bn::scalar_field_order());
    for (std::uint32_t width : widths) {
        io::RunConfig cfg;
        cfg.seed = seed;
        cfg.network.hidden = {width, 4};
        cfg.network.threshold = 1e-4;
        auto ds = data::make_synthetic(seed, n_samples, m_features, params);
        cfg.network.input_dim = (std::uint32_t)ds.feature_dim;

        group::KeyPair keys = group::genkey(128, seed);
        proto::DatasetSignature sig = proto::setup(ds, keys, params);
        dnn::ModelState init = dnn::init_model(cfg.network, seed);
        double t0 = now_ms();
        dnn::TrainingResult tr = dnn::train_to_convergence(init, cfg.network, params, ds);
        double train_ms = now_ms() - t0;

        for (proto::ProofMode mode : {proto::ProofMode::Basic, proto::ProofMode::UniqueValue}) {
            double t1 = now_ms();
            proto::Proof proof = proto::certify(ds, tr.commitment, cfg.network, params, mode);
            double certify_ms = now_ms() - t1;
            auto bytes = io::proof_bytes(proof);
            proto::WeightSet w0{tr.w0_layers, tr.w0_output};
            proto::WeightSet delta{tr.delta_layers, tr.delta_output};
            double t2 = now_ms();
            auto rep = proto::verify(w0, delta, proof, sig, keys.public_v, cfg.network, params);
            double verify_ms = now_ms() - t2;
            if (!rep.accepted) throw std::runtime_error("bench instance rejected");
            std::size_t metric = n_samples * (m_features + width) + m_features * width;
            csv << width << "," << proto::mode_name(mode) << "," << n_samples << ","
                << m_features << "," << metric << "," << bytes.size() << "," << train_ms << ","
                << certify_ms << "," << verify_ms << "\n";
        }
    }
    std::cout << "wrote " << out_path << "\n";
    return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"veridl: verifiable outsourced DNN training"};
    app.require_subcommand(1);

    // genkey
    auto* genkey = app.add_subcommand("genkey", "generate a key pair");
    std::string gk_out = ".";
    std::uint64_t gk_seed = 1;
    std::uint32_t gk_sec = 128;
    genkey->add_option("--out-dir", gk_out);
    genkey->add_option("--seed", gk_seed);
    genkey->add_option("--security", gk_sec);

    // setup
    auto* setup = app.add_subcommand("setup", "sign a dataset");
    std::string su_data, su_sk, su_pk, su_out = "signature.vdl", su_cfg;
    setup->add_option("--data", su_data)->required();
    setup->add_option("--secret-key", su_sk)->required();
    setup->add_option("--public-key", su_pk)->required();
    setup->add_option("--out", su_out);
    setup->add_option("--config", su_cfg);

    // train-certify
    auto* tc = app.add_subcommand("train-certify", "train to convergence and build a proof");
    PipelineArgs tc_args;
    tc->add_option("--data", tc_args.data_path)->required();
    tc->add_option("--public-key", tc_args.pk_path)->required();
    tc->add_option("--config", tc_args.config_path);
    tc->add_option("--out-dir", tc_args.out_dir);
    tc->add_option("--mode", tc_args.mode);
    auto* tc_seed = tc->add_option("--seed", tc_args.seed);
    tc->add_option("--attack", tc_args.attack_kind);
    tc->add_option("--attack-bits", tc_args.attack_bits);
    tc->add_option("--attack-fraction", tc_args.attack_fraction);
    tc->add_option("--attack-seed", tc_args.attack_seed);

    // verify
    auto* verify = app.add_subcommand("verify", "verify updates against a proof");
    std::string vf_w0, vf_upd, vf_proof, vf_sig, vf_pk, vf_cfg;
    bool vf_literal = false;
    verify->add_option("--w0", vf_w0)->required();
    verify->add_option("--updates", vf_upd)->required();
    verify->add_option("--proof", vf_proof)->required();
    verify->add_option("--signature", vf_sig)->required();
    verify->add_option("--public-key", vf_pk)->required();
    verify->add_option("--config", vf_cfg);
    verify->add_flag("--literal-pairings", vf_literal);

    // attack
    auto* atk = app.add_subcommand("attack", "tamper with honest artifacts");
    PipelineArgs atk_args;
    std::string atk_in = ".";
    bool atk_matrix = false;
    std::string atk_matrix_out = "matrix.csv";
    std::uint32_t atk_trials = 10;
    atk->add_option("--kind", atk_args.attack_kind);
    atk->add_option("--data", atk_args.data_path);
    atk->add_option("--config", atk_args.config_path);
    atk->add_option("--in-dir", atk_in);
    atk->add_option("--out-dir", atk_args.out_dir);
    atk->add_option("--bits", atk_args.attack_bits);
    atk->add_option("--fraction", atk_args.attack_fraction);
    atk->add_option("--seed", atk_args.attack_seed);
    atk->add_flag("--matrix", atk_matrix);
    atk->add_option("--out", atk_matrix_out);
    atk->add_option("--trials", atk_trials);

    // bench
    auto* bench = app.add_subcommand("bench", "proof size and timing sweep");
    std::string be_out = "bench.csv", be_widths = "4,8,16,32";
    std::size_t be_n = 40, be_m = 4;
    std::uint64_t be_seed = 7;
    bench->add_option("--out", be_out);
    bench->add_option("--widths", be_widths);
    bench->add_option("--samples", be_n);
    bench->add_option("--features", be_m);
    bench->add_option("--seed", be_seed);

    // demo
    auto* serve = app.add_subcommand("demo-serve", "run the training server");
    std::uint16_t sv_port = 9155;
    bool sv_once = false;
    serve->add_option("--port", sv_port);
    serve->add_flag("--once", sv_once);

    auto* demo = app.add_subcommand("demo-run", "owner+verifier driver against a server");
    std::string dm_host = "127.0.0.1", dm_cfg;
    std::uint16_t dm_port = 9155;
    std::uint64_t dm_seed = 1;
    demo->add_option("--host", dm_host);
    demo->add_option("--port", dm_port);
    demo->add_option("--config", dm_cfg);
    demo->add_option("--seed", dm_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (genkey->parsed()) return cmd_genkey(gk_out, effective_seed(gk_seed), gk_sec);
        if (setup->parsed()) return cmd_setup(su_data, su_sk, su_pk, su_out, su_cfg);
        if (tc->parsed()) {
            tc_args.have_seed = tc_seed->count() > 0;
            return cmd_train_certify(tc_args);
        }
        if (verify->parsed())
            return cmd_verify(vf_w0, vf_upd, vf_proof, vf_sig, vf_pk, vf_cfg, vf_literal);
        if (atk->parsed()) return cmd_attack(atk_args, atk_in, atk_matrix, atk_matrix_out, atk_trials);
        if (bench->parsed()) return cmd_bench(be_out, be_widths, be_n, be_m, be_seed);
        if (serve->parsed()) return wire::serve(sv_port, sv_once, std::cout);
        if (demo->parsed()) {
            io::RunConfig cfg = resolve_config(dm_cfg);
            cfg.seed = effective_seed(dm_seed);
            return wire::run_client(dm_host, dm_port, cfg, std::cout);
        }
    } catch (const proto::ProofFormatError& e) {
        std::cerr << "malformed: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const io::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const dnn::NonConvergence& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitInternal;
}
