#pragma once

#include "veridl/protocol.hpp"

#include <iosfwd>
#include <optional>

namespace veridl::attack {

enum class AttackKind : std::uint8_t {
    ByzantineNeurons = 0,
    WrongE1KeepProof,
    WrongE1RebuildProof,
    WrongE2,
    CompressLowPrec,
    CompressPrune,
    ArbitraryWeights,
    PoisonCrafted,
};

const char* attack_name(AttackKind k);
AttackKind attack_from_name(const std::string& name);
constexpr std::size_t kAttackKindCount = 8;

struct AttackSpec {
    AttackKind kind = AttackKind::WrongE1KeepProof;
    std::uint32_t bits = 8;          // compress-lowprec mantissa bits, 8 or 16
    double prune_fraction = 0.15;    // compress-prune, within [0.10, 0.25]
    double neuron_fraction = 0.01;   // byzantine-neurons
    double weight_fraction = 0.2;    // arbitrary-weights: share of touched weights
    double noise_amplitude = 0.5;    // arbitrary-weights: uniform noise bound
    double boost = 10.0;             // poison-crafted magnitude factor
    std::uint64_t seed = 1;

    void validate() const;
};

/** Everything the misbehaving server holds about an honest run. */
struct HonestInstance {
    dnn::NetworkConfig config;
    codec::CodecParams params{20, bn::scalar_field_order()};
    data::QuantizedDataset dataset;
    proto::WeightSet w0;
    proto::WeightSet delta;
    proto::ProofMode mode = proto::ProofMode::Basic;
};

struct AttackResult {
    proto::WeightSet delta;  // the update the server returns
    proto::Proof proof;      // the proof it returns
    // |E1' - E1| measured after the compressed model retrains (primary) and
    // for the compressed initialization under the honest update (recorded).
    double e1_delta_post = 0.0;
    double e1_delta_pre = 0.0;
};

/** The verification step each attack kind is expected to fail at. */
proto::FailedStep expected_failed_step(AttackKind k);

/**
 * Whether a reject at the given step matches the kind. arbitrary-weights
 * admits two outcomes: noise touching the first layer surfaces at the
 * layer-1 sums, noise confined to deeper layers at the first aggregate.
 */
bool is_expected_failed_step(AttackKind k, proto::FailedStep step);

AttackResult apply_attack(const AttackSpec& spec, const HonestInstance& honest);

struct MatrixConfig {
    dnn::NetworkConfig config;
    std::uint64_t data_seed = 1;
    std::size_t n_samples = 10;
};

struct MatrixRow {
    std::string kind;
    std::uint32_t config_id = 0;
    std::uint32_t trial = 0;
    std::string verdict;
    std::string failed_step;
    double e1_delta = 0.0;
};

/**
 * Builds an honest instance per (config, trial), applies every attack kind,
 * verifies, and reports one row each plus an honest control row. When csv
 * is set the rows stream out with the header
 * kind,config-id,trial,verdict,failed_step,e1_delta.
 */
std::vector<MatrixRow> run_soundness_matrix(std::span<const MatrixConfig> configs,
                                            std::uint32_t trials, proto::ProofMode mode,
                                            std::ostream* csv = nullptr);

}  // namespace veridl::attack
