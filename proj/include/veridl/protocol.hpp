#pragma once

#include "veridl/codec.hpp"
#include "veridl/dataset.hpp"
#include "veridl/dnn.hpp"
#include "veridl/group.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace veridl::proto {

using group::Element;
using num::U256;

enum class ProofMode : std::uint8_t { Basic = 0, UniqueValue = 1 };

const char* mode_name(ProofMode m);
ProofMode mode_from_name(const std::string& s);

/**
 * Per-sample dataset digest: one commitment per feature (left-of-pairing
 * form), the label commitment in both group forms, and the sign flags.
 */
struct SampleDigest {
    std::vector<Element> features;
    Element label;
    std::vector<codec::SignFlag> signs;  // m feature flags then the label flag
};

/**
 * The digest section of a proof. Basic mode stores digests per sample; the
 * unique-value mode commits each distinct quantized value once and stores
 * per-sample indices into the dictionary.
 */
struct ProofDigests {
    ProofMode mode = ProofMode::Basic;
    std::vector<SampleDigest> plain;

    std::vector<Element> dict;
    std::vector<std::vector<std::uint32_t>> feature_idx;
    std::vector<std::uint32_t> label_idx;
    std::vector<std::vector<codec::SignFlag>> signs;

    std::size_t sample_count() const {
        return mode == ProofMode::Basic ? plain.size() : feature_idx.size();
    }
    SampleDigest materialize(std::size_t i) const;
    std::size_t feature_commitment_count() const;
};

struct SampleWitness {
    std::vector<codec::SplitSum> z_splits;     // d1 entries, scale 2
    std::vector<codec::SplitSum> zhat_splits;  // d1 entries, scale 2
    Element delta_out_commit;                  // dual; exponent is the scale-2 signal
    std::vector<codec::ScaledInt> delta_last;  // d_L entries, scale 4
};

struct IncrementRecord {
    codec::ScaledInt total;  // A_jk, scale 2; equals split.total
    codec::SplitSum split;
};

struct Proof {
    ProofMode mode = ProofMode::Basic;
    std::uint32_t frac_bits = 0;
    std::uint32_t input_dim = 0;
    std::vector<std::uint32_t> hidden;
    std::uint32_t n_samples = 0;
    codec::ScaledInt s1, s2;  // scale-2 integer error aggregates
    ProofDigests digests;
    std::vector<SampleWitness> witnesses;
    std::vector<IncrementRecord> increments;  // input_dim * d1, index j*d1+k
};

struct DatasetSignature {
    Element gamma;  // aggregate signature, G1 form
};

enum class FailedStep : std::uint8_t {
    None = 0,
    Step1Signature,
    Step2Z,
    Step2E1,
    Step3DeltaO,
    Step3DeltaL,
    Step3DeltaW,
    Step3ZHat,
    Step3E2,
    Step4Convergence,
};

const char* failed_step_name(FailedStep s);

struct VerificationReport {
    bool accepted = false;
    FailedStep failed_step = FailedStep::None;
    std::string detail;
};

/** Structural defect in a proof; distinct from an honest reject verdict. */
struct ProofFormatError : std::runtime_error {
    explicit ProofFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct WeightSet {
    std::vector<std::vector<double>> layers;
    std::vector<double> output;
};

WeightSet add(const WeightSet& a, const WeightSet& b);
dnn::ModelState model_from_weights(const WeightSet& w);

/** Synopsis of a sample: hash over the exact serialized commitment bytes. */
U256 sample_synopsis(const SampleDigest& d);

/** Digest construction shared by the data owner and the certify step. */
SampleDigest build_sample_digest(const data::QuantizedSample& s, const codec::CodecParams& params);

/** Data-owner signing: per-sample signatures tau_i aggregated into gamma. */
DatasetSignature setup(const data::QuantizedDataset& dataset, const group::KeyPair& keys,
                       const codec::CodecParams& params);

/** Server-side proof construction from the commitment-pipeline traces. */
Proof certify(const data::QuantizedDataset& dataset, const dnn::CommitmentRound& round,
              const dnn::NetworkConfig& config, const codec::CodecParams& params, ProofMode mode);

struct VerifyOptions {
    // When set, every check runs as the literal pairing-product equation.
    // The default path moves verifier-known exponents into the source groups,
    // which is equivalent under bilinearity and much faster; the squared
    // residual checks are genuine pairings either way.
    bool literal_pairings = false;
};

/** Step 1: dataset digest authenticity against the aggregate signature. */
bool verify_step1(const Proof& proof, const DatasetSignature& sig, const Element& public_v,
                  const VerifyOptions& opts = {});

struct Step2State {
    std::vector<SampleDigest> digests;      // materialized once, reused by step 3
    std::vector<dnn::PlainForward> forwards;
    std::vector<double> outputs;
    std::vector<Element> q_commit;          // residual commitments, dual
    std::vector<codec::ScaledInt> f_o;      // scale-1 encodings of the outputs
    dnn::ModelState model_used;             // converged weights on the grid
    FailedStep failed = FailedStep::None;
    std::string detail;
};

/** Step 2: first-layer sums and the first error aggregate. */
Step2State verify_step2(const Proof& proof, const WeightSet& w_converged,
                        const dnn::NetworkConfig& config, const codec::CodecParams& params,
                        const VerifyOptions& opts = {});

struct Step3State {
    codec::ScaledInt s2_recomputed;
    dnn::ModelState model_next;
    FailedStep failed = FailedStep::None;
    std::string detail;
};

/** Step 3: backpropagation checks, committed update, second aggregate. */
Step3State verify_step3(const Proof& proof, Step2State& fwd, const dnn::NetworkConfig& config,
                        const codec::CodecParams& params, const VerifyOptions& opts = {});

/**
 * Full verification, steps 1-4 in order; the report carries the first
 * failing step. Throws ProofFormatError for structural defects.
 */
VerificationReport verify(const WeightSet& w0, const WeightSet& delta, const Proof& proof,
                          const DatasetSignature& sig, const Element& public_v,
                          const dnn::NetworkConfig& config, const codec::CodecParams& params,
                          const VerifyOptions& opts = {});

}  // namespace veridl::proto
