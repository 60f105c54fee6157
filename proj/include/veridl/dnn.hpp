#pragma once

#include "veridl/codec.hpp"
#include "veridl/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace veridl::dnn {

enum class Activation : std::uint8_t { Sigmoid = 0, Relu = 1, Tanh = 2 };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);

/**
 * Fully-connected network description: input_dim features, hidden layers of
 * the given widths, and a single scalar output neuron. No bias terms.
 */
struct NetworkConfig {
    std::uint32_t input_dim = 2;
    std::vector<std::uint32_t> hidden{8, 8};
    Activation activation = Activation::Sigmoid;
    double learning_rate = 0.1;
    double threshold = 1e-4;
    std::uint32_t batch_size = 100;
    std::uint64_t max_epochs = 100000;

    std::size_t layer_count() const { return hidden.size(); }
    void validate() const;
};

/**
 * Weights in plain doubles plus the fixed-point mirrors the commitment
 * pipeline works from. layers[l] is row-major (in_dim x out_dim); output
 * holds the weights into the scalar output neuron.
 */
struct ModelState {
    std::vector<std::vector<double>> layers;
    std::vector<double> output;
    std::vector<std::vector<codec::ScaledInt>> layers_q;
    std::vector<codec::ScaledInt> output_q;

    void refresh_quantized(const codec::CodecParams& params);
    // Replace plain weights by their own quantized grid values.
    void snap_to_grid(const codec::CodecParams& params);
};

ModelState init_model(const NetworkConfig& config, std::uint64_t seed);

struct ForwardTrace {
    std::vector<std::vector<double>> z;  // weighted sums per hidden layer
    std::vector<std::vector<double>> a;  // activations per hidden layer
    double z_out = 0.0;
    double o = 0.0;
};

struct BackpropTrace {
    std::vector<double> delta_out;                        // per sample
    std::vector<std::vector<std::vector<double>>> delta;  // [sample][layer][neuron]
    std::vector<std::vector<double>> grad_layers;         // summed dC/dw per weight
    std::vector<double> grad_output;
    std::vector<std::vector<double>> incr_layers;         // -eta/N * grad
    std::vector<double> incr_output;
};

// Deterministic activation kernels; fixed evaluation order, no libm exp.
double det_exp(double x);
double activate(Activation act, double z);
double activate_derivative(Activation act, double z);

ForwardTrace feedforward(const ModelState& model, const NetworkConfig& config,
                         const std::vector<double>& x);

double cost(double o, double y);

double dataset_error(const ModelState& model, const NetworkConfig& config,
                     const data::QuantizedDataset& dataset);

BackpropTrace backprop(const ModelState& model, const NetworkConfig& config,
                       const std::vector<ForwardTrace>& traces,
                       const data::QuantizedDataset& dataset);

void apply_update(ModelState& model, const BackpropTrace& bp,
                  const codec::CodecParams* commitment_params = nullptr);

/** Hook for fault injection: may overwrite a layer's activations in place. */
using PerturbHook =
    std::function<void(std::size_t sample, int round, std::size_t layer, std::vector<double>& act)>;

/**
 * Everything the certify protocol needs about the final two rounds, computed
 * under the commitment pipeline: exact layer-1 integer sums, re-quantized
 * activations at every committed point, and the integer error aggregates.
 */
struct CommitmentRound {
    // convergence-round (z) and post-update-round (zhat) first-layer sums, scale 2
    std::vector<std::vector<codec::SplitSum>> z_splits;
    std::vector<std::vector<codec::SplitSum>> zhat_splits;
    // per sample: residual q = f(y) - f(o), scale 1, both rounds
    std::vector<codec::ScaledInt> q, qhat;
    // per sample: f(sigma'(z_out)) scale 1 and the output error signal, scale 2
    std::vector<codec::ScaledInt> sigp_out;
    std::vector<codec::ScaledInt> delta_out;
    // per sample, per last-hidden neuron: f(w_out_k)*f(sigma'(z_L_k)) scale 2
    // and the last-hidden error signal, scale 4
    std::vector<std::vector<codec::ScaledInt>> w_sigp_last;
    std::vector<std::vector<codec::ScaledInt>> delta_last;
    // per sample, per first-layer neuron: f(eta * delta^1_k), scale 1
    std::vector<std::vector<codec::ScaledInt>> eta_delta1;
    // per first-layer weight (j*d1 + k): A_jk = sum_i f(x_j) f(eta delta^1_k), scale 2
    std::vector<codec::SplitSum> increment_sums;
    // integer error aggregates sum q^2 (scale 2): E = S / (2N * 2^(2*frac_bits))
    codec::ScaledInt s1, s2;
    // per sample: every last-hidden activation is exactly zero (dead relu)
    std::vector<bool> last_hidden_dead;

    ModelState model_used;  // converged model snapped to the quantized grid
    ModelState model_next;  // model after the committed extra round
    double e1 = 0.0, e2 = 0.0;
};

CommitmentRound commitment_round(const ModelState& converged, const NetworkConfig& config,
                                 const codec::CodecParams& params,
                                 const data::QuantizedDataset& dataset,
                                 const PerturbHook& hook = nullptr);

/**
 * Whether the verifier can complete its update from this round: for every
 * sample the output signal is either zero, recoverable from a nonzero
 * last-hidden identity, or moot because the last hidden layer is dead.
 */
bool round_verifier_recoverable(const CommitmentRound& round);

/** Exact rational check |s1 - s2| <= theta * 2N * 2^(2*frac_bits). */
bool within_threshold(const codec::ScaledInt& s1, const codec::ScaledInt& s2, double theta,
                      std::size_t n_samples, std::uint32_t frac_bits);

/** First-layer exact integer sums for one sample. */
std::vector<codec::SplitSum> commitment_layer1_sums(const ModelState& model,
                                                    const NetworkConfig& config,
                                                    const codec::CodecParams& params,
                                                    const data::QuantizedSample& sample);

// --- shared prover/verifier kernels ------------------------------------------
// The verifier re-executes the plaintext parts of the commitment pipeline
// bit-for-bit. Both sides call these exact functions.

struct PlainForward {
    std::vector<std::vector<double>> z, a;
    double z_out = 0.0;
    double o = 0.0;
};

/** Forward pass of layers 2..L and the output, starting from dequantized
 *  first-layer sums. The hook (when set) may corrupt activations. */
PlainForward forward_from_layer1(const ModelState& model, const NetworkConfig& config,
                                 const std::vector<double>& z1, const PerturbHook& hook = nullptr,
                                 std::size_t sample_idx = 0, int round = 1);

/** Error signals for hidden layers 1..L given the dequantized committed
 *  last-hidden signals; result[layer][neuron], layer L-1 equal to the input. */
std::vector<std::vector<double>> delta_chain(const ModelState& model, const NetworkConfig& config,
                                             const PlainForward& fwd,
                                             const std::vector<double>& delta_last_d);

/**
 * The committed weight update: first layer moves by -A/(N*2^(2*frac_bits))
 * per weight, deeper layers and the output by plain gradient descent over
 * the shared activations and error signals; result snapped to the grid.
 */
ModelState apply_committed_update(const ModelState& used, const NetworkConfig& config,
                                  const codec::CodecParams& params,
                                  const std::vector<PlainForward>& forwards,
                                  const std::vector<double>& delta_out_d,
                                  const std::vector<std::vector<std::vector<double>>>& deltas,
                                  const std::vector<codec::ScaledInt>& a_totals);

struct TrainingResult {
    ModelState model;                           // converged weights (plain doubles)
    std::vector<std::vector<double>> w0_layers;  // initial weights
    std::vector<double> w0_output;
    std::vector<std::vector<double>> delta_layers;  // model - w0
    std::vector<double> delta_output;
    std::uint64_t epochs = 0;
    double e1_plain = 0.0, e2_plain = 0.0;
    CommitmentRound commitment;
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

/**
 * Full-batch gradient descent until |E_prev - E_next| <= threshold, then a
 * commitment-pipeline replay of the final two rounds. The replay's exact
 * aggregates must themselves satisfy the threshold or training continues.
 * Throws NonConvergence when max_epochs runs out.
 */
TrainingResult train_to_convergence(const ModelState& initial, const NetworkConfig& config,
                                    const codec::CodecParams& params,
                                    const data::QuantizedDataset& dataset);

// Deterministic double view of a fixed-point value: correctly rounded
// magnitude divided by the exact power-of-two scale.
double dequantize(const codec::ScaledInt& v, std::uint32_t frac_bits);

}  // namespace veridl::dnn
