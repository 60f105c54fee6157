#include "veridl/dnn.hpp"

#include "veridl/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace veridl::dnn {

using codec::CodecParams;
using codec::ScaledInt;
using codec::SplitSum;
using num::SignedBig;
using num::U256;

Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation: " + name);
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

void NetworkConfig::validate() const {
    if (input_dim < 1) throw std::invalid_argument("config: input_dim must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("config: at least one hidden layer");
    for (auto d : hidden)
        if (d < 1) throw std::invalid_argument("config: layer width must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (!(threshold > 0)) throw std::invalid_argument("config: threshold must be > 0");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
}

double det_exp(double x) {
    if (x != x) return x;
    if (x > 710.0) return std::numeric_limits<double>::infinity();
    if (x < -746.0) return 0.0;
    const double ln2 = 0x1.62e42fefa39efp-1;
    const double log2e = 0x1.71547652b82fep+0;
    double k = std::floor(x * log2e + 0.5);
    double r = x - k * ln2;
    // Taylor series with a fixed evaluation order; |r| <= 0.35 keeps the
    // degree-17 truncation far below double precision.
    double term = 1.0, sum = 1.0;
    for (int i = 1; i <= 17; ++i) {
        term = term * r / (double)i;
        sum += term;
    }
    return std::ldexp(sum, (int)k);
}

double activate(Activation act, double z) {
    switch (act) {
        case Activation::Sigmoid: return 1.0 / (1.0 + det_exp(-z));
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return 2.0 / (1.0 + det_exp(-2.0 * z)) - 1.0;
    }
    return 0.0;
}

double activate_derivative(Activation act, double z) {
    switch (act) {
        case Activation::Sigmoid: {
            double a = 1.0 / (1.0 + det_exp(-z));
            return a * (1.0 - a);
        }
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            double a = 2.0 / (1.0 + det_exp(-2.0 * z)) - 1.0;
            return 1.0 - a * a;
        }
    }
    return 0.0;
}

void ModelState::refresh_quantized(const CodecParams& params) {
    layers_q.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers_q[l].resize(layers[l].size());
        for (std::size_t i = 0; i < layers[l].size(); ++i)
            layers_q[l][i] = codec::encode(layers[l][i], params);
    }
    output_q.resize(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) output_q[i] = codec::encode(output[i], params);
}

void ModelState::snap_to_grid(const CodecParams& params) {
    refresh_quantized(params);
    for (std::size_t l = 0; l < layers.size(); ++l)
        for (std::size_t i = 0; i < layers[l].size(); ++i)
            layers[l][i] = codec::decode(layers_q[l][i], params);
    for (std::size_t i = 0; i < output.size(); ++i) output[i] = codec::decode(output_q[i], params);
}

ModelState init_model(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    rng::SplitMix rng(seed ^ 0x1217A11Full);
    ModelState m;
    std::size_t in_dim = config.input_dim;
    for (auto width : config.hidden) {
        std::vector<double> w(in_dim * width);
        for (auto& v : w) v = rng.uniform(-0.5, 0.5);
        m.layers.push_back(std::move(w));
        in_dim = width;
    }
    m.output.resize(in_dim);
    for (auto& v : m.output) v = rng.uniform(-0.5, 0.5);
    return m;
}

ForwardTrace feedforward(const ModelState& model, const NetworkConfig& config,
                         const std::vector<double>& x) {
    if (x.size() != config.input_dim) throw std::invalid_argument("feedforward: bad sample size");
    ForwardTrace t;
    const std::vector<double>* prev = &x;
    std::size_t in_dim = config.input_dim;
    for (std::size_t l = 0; l < config.hidden.size(); ++l) {
        std::size_t width = config.hidden[l];
        std::vector<double> z(width, 0.0), a(width, 0.0);
        for (std::size_t k = 0; k < width; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < in_dim; ++j) s += (*prev)[j] * model.layers[l][j * width + k];
            z[k] = s;
            a[k] = activate(config.activation, s);
        }
        t.z.push_back(std::move(z));
        t.a.push_back(std::move(a));
        prev = &t.a.back();
        in_dim = width;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < in_dim; ++j) s += (*prev)[j] * model.output[j];
    t.z_out = s;
    t.o = activate(config.activation, s);
    return t;
}

double cost(double o, double y) {
    double d = y - o;
    return 0.5 * d * d;
}

double dataset_error(const ModelState& model, const NetworkConfig& config,
                     const data::QuantizedDataset& dataset) {
    if (dataset.samples.empty()) throw std::invalid_argument("dataset_error: empty dataset");
    double sum = 0.0;
    for (const auto& s : dataset.samples) sum += cost(feedforward(model, config, s.x).o, s.y);
    return sum / (double)dataset.samples.size();
}

BackpropTrace backprop(const ModelState& model, const NetworkConfig& config,
                       const std::vector<ForwardTrace>& traces,
                       const data::QuantizedDataset& dataset) {
    std::size_t n = dataset.samples.size();
    if (traces.size() != n) throw std::invalid_argument("backprop: trace count mismatch");
    std::size_t layer_count = config.hidden.size();

    BackpropTrace bp;
    bp.delta_out.resize(n, 0.0);
    bp.delta.resize(n);
    bp.grad_layers.resize(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) bp.grad_layers[l].assign(model.layers[l].size(), 0.0);
    bp.grad_output.assign(model.output.size(), 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const ForwardTrace& t = traces[i];
        double dout = (t.o - dataset.samples[i].y) * activate_derivative(config.activation, t.z_out);
        bp.delta_out[i] = dout;

        std::vector<std::vector<double>> delta(layer_count);
        std::size_t last = layer_count - 1;
        delta[last].resize(config.hidden[last]);
        for (std::size_t k = 0; k < config.hidden[last]; ++k)
            delta[last][k] =
                activate_derivative(config.activation, t.z[last][k]) * model.output[k] * dout;
        for (std::size_t l = last; l-- > 0;) {
            std::size_t width = config.hidden[l], next = config.hidden[l + 1];
            delta[l].resize(width);
            for (std::size_t k = 0; k < width; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < next; ++j)
                    s += model.layers[l + 1][k * next + j] * delta[l + 1][j];
                delta[l][k] = activate_derivative(config.activation, t.z[l][k]) * s;
            }
        }

        for (std::size_t l = 0; l < layer_count; ++l) {
            std::size_t width = config.hidden[l];
            const std::vector<double>& input = l == 0 ? dataset.samples[i].x : t.a[l - 1];
            for (std::size_t j = 0; j < input.size(); ++j)
                for (std::size_t k = 0; k < width; ++k)
                    bp.grad_layers[l][j * width + k] += input[j] * delta[l][k];
        }
        for (std::size_t j = 0; j < model.output.size(); ++j)
            bp.grad_output[j] += t.a[layer_count - 1][j] * dout;
        bp.delta[i] = std::move(delta);
    }

    double scale = -config.learning_rate / (double)n;
    bp.incr_layers.resize(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
        bp.incr_layers[l].resize(bp.grad_layers[l].size());
        for (std::size_t i = 0; i < bp.grad_layers[l].size(); ++i)
            bp.incr_layers[l][i] = scale * bp.grad_layers[l][i];
    }
    bp.incr_output.resize(bp.grad_output.size());
    for (std::size_t i = 0; i < bp.grad_output.size(); ++i)
        bp.incr_output[i] = scale * bp.grad_output[i];
    return bp;
}

void apply_update(ModelState& model, const BackpropTrace& bp, const CodecParams* commitment_params) {
    if (bp.incr_layers.size() != model.layers.size())
        throw std::invalid_argument("apply_update: shape mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        if (bp.incr_layers[l].size() != model.layers[l].size())
            throw std::invalid_argument("apply_update: shape mismatch");
        for (std::size_t i = 0; i < model.layers[l].size(); ++i)
            model.layers[l][i] += bp.incr_layers[l][i];
    }
    for (std::size_t i = 0; i < model.output.size(); ++i) model.output[i] += bp.incr_output[i];
    if (commitment_params) model.refresh_quantized(*commitment_params);
}

double dequantize(const ScaledInt& v, std::uint32_t frac_bits) {
    double d = num::to_double(v.value.mag);
    d = std::ldexp(d, -(int)(v.scale * frac_bits));
    return v.value.is_negative() ? -d : d;
}

PlainForward forward_from_layer1(const ModelState& model, const NetworkConfig& config,
                                 const std::vector<double>& z1, const PerturbHook& hook,
                                 std::size_t sample_idx, int round) {
    PlainForward f;
    std::size_t layer_count = config.hidden.size();
    f.z.resize(layer_count);
    f.a.resize(layer_count);
    f.z[0] = z1;
    f.a[0].resize(z1.size());
    for (std::size_t k = 0; k < z1.size(); ++k) f.a[0][k] = activate(config.activation, z1[k]);
    if (hook) hook(sample_idx, round, 0, f.a[0]);
    for (std::size_t l = 1; l < layer_count; ++l) {
        std::size_t width = config.hidden[l], prev = config.hidden[l - 1];
        f.z[l].assign(width, 0.0);
        f.a[l].assign(width, 0.0);
        for (std::size_t k = 0; k < width; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < prev; ++j) s += f.a[l - 1][j] * model.layers[l][j * width + k];
            f.z[l][k] = s;
            f.a[l][k] = activate(config.activation, s);
        }
        if (hook) hook(sample_idx, round, l, f.a[l]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < config.hidden.back(); ++j) s += f.a[layer_count - 1][j] * model.output[j];
    f.z_out = s;
    f.o = activate(config.activation, s);
    return f;
}

std::vector<std::vector<double>> delta_chain(const ModelState& model, const NetworkConfig& config,
                                             const PlainForward& fwd,
                                             const std::vector<double>& delta_last_d) {
    std::size_t layer_count = config.hidden.size();
    std::vector<std::vector<double>> delta(layer_count);
    delta[layer_count - 1] = delta_last_d;
    for (std::size_t l = layer_count - 1; l-- > 0;) {
        std::size_t width = config.hidden[l], next = config.hidden[l + 1];
        delta[l].resize(width);
        for (std::size_t k = 0; k < width; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < next; ++j)
                s += model.layers[l + 1][k * next + j] * delta[l + 1][j];
            delta[l][k] = activate_derivative(config.activation, fwd.z[l][k]) * s;
        }
    }
    return delta;
}

ModelState apply_committed_update(const ModelState& used, const NetworkConfig& config,
                                  const CodecParams& params,
                                  const std::vector<PlainForward>& forwards,
                                  const std::vector<double>& delta_out_d,
                                  const std::vector<std::vector<std::vector<double>>>& deltas,
                                  const std::vector<ScaledInt>& a_totals) {
    std::size_t n = forwards.size();
    std::size_t d1 = config.hidden[0];
    std::size_t layer_count = config.hidden.size();
    ModelState next = used;

    // first layer: increments carried as exact integer numerators
    if (a_totals.size() != (std::size_t)config.input_dim * d1)
        throw std::invalid_argument("apply_committed_update: increment count mismatch");
    for (std::size_t j = 0; j < config.input_dim; ++j)
        for (std::size_t k = 0; k < d1; ++k) {
            double a = dequantize(a_totals[j * d1 + k], params.frac_bits);  // scale 2
            next.layers[0][j * d1 + k] = used.layers[0][j * d1 + k] - a / (double)n;
        }

    // deeper layers and output: plain gradient descent over shared values
    double scale = -config.learning_rate / (double)n;
    for (std::size_t l = 1; l < layer_count; ++l) {
        std::size_t width = config.hidden[l], prev = config.hidden[l - 1];
        std::vector<double> grad(prev * width, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < prev; ++j)
                for (std::size_t k = 0; k < width; ++k)
                    grad[j * width + k] += forwards[i].a[l - 1][j] * deltas[i][l][k];
        for (std::size_t w = 0; w < grad.size(); ++w)
            next.layers[l][w] = used.layers[l][w] + scale * grad[w];
    }
    {
        std::size_t dl = config.hidden.back();
        std::vector<double> grad(dl, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dl; ++j)
                grad[j] += forwards[i].a[layer_count - 1][j] * delta_out_d[i];
        for (std::size_t j = 0; j < dl; ++j) next.output[j] = used.output[j] + scale * grad[j];
    }
    next.snap_to_grid(params);
    return next;
}

std::vector<SplitSum> commitment_layer1_sums(const ModelState& model, const NetworkConfig& config,
                                             const CodecParams& params,
                                             const data::QuantizedSample& sample) {
    std::size_t d1 = config.hidden[0];
    if (model.layers_q.empty() || model.layers_q[0].size() != sample.features.size() * d1)
        throw std::invalid_argument("commitment_layer1_sums: stale quantized mirrors");
    std::vector<SplitSum> sums;
    sums.reserve(d1);
    std::vector<ScaledInt> column(sample.features.size());
    for (std::size_t k = 0; k < d1; ++k) {
        for (std::size_t j = 0; j < sample.features.size(); ++j)
            column[j] = model.layers_q[0][j * d1 + k];
        sums.push_back(codec::split_dot(sample.features, column, params));
    }
    return sums;
}

namespace {

struct SplitAcc {
    SignedBig pos, neg, total;
    std::uint32_t neg_count = 0;

    void add(const SignedBig& prod, const CodecParams& params) {
        if (prod.is_negative()) {
            neg = neg + prod;
            ++neg_count;
        } else {
            pos = pos + prod;
        }
        total = total + prod;
        if (!(pos.mag < params.field_order) || !(neg.mag < params.field_order) ||
            !(total.mag < params.field_order))
            throw std::overflow_error("increment accumulation leaves field range");
    }
    SplitSum done(std::uint32_t scale) const {
        SplitSum s;
        s.pos_sum = ScaledInt{pos, scale};
        s.neg_sum = ScaledInt{neg, scale};
        s.total = ScaledInt{total, scale};
        s.neg_count = neg_count;
        return s;
    }
};

}  // namespace

CommitmentRound commitment_round(const ModelState& converged, const NetworkConfig& config,
                                 const CodecParams& params, const data::QuantizedDataset& dataset,
                                 const PerturbHook& hook) {
    config.validate();
    std::size_t n = dataset.samples.size();
    if (n == 0) throw std::invalid_argument("commitment_round: empty dataset");
    std::size_t d1 = config.hidden[0];
    std::size_t dl = config.hidden.back();
    std::size_t layer_count = config.hidden.size();

    CommitmentRound out;
    out.model_used = converged;
    out.model_used.snap_to_grid(params);
    const ModelState& used = out.model_used;

    std::vector<PlainForward> forwards(n);
    std::vector<double> delta_out_d(n);
    std::vector<std::vector<std::vector<double>>> chains(n);
    std::vector<SplitAcc> acc(config.input_dim * d1);
    SignedBig s1_acc, s2_acc;

    out.z_splits.resize(n);
    out.q.resize(n);
    out.sigp_out.resize(n);
    out.delta_out.resize(n);
    out.w_sigp_last.resize(n);
    out.delta_last.resize(n);
    out.eta_delta1.resize(n);
    out.last_hidden_dead.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& sample = dataset.samples[i];
        auto splits = commitment_layer1_sums(used, config, params, sample);
        std::vector<double> z1(d1);
        for (std::size_t k = 0; k < d1; ++k) z1[k] = dequantize(splits[k].total, params.frac_bits);
        PlainForward fwd = forward_from_layer1(used, config, z1, hook, i, 1);

        ScaledInt f_o = codec::encode(fwd.o, params);
        ScaledInt q{sample.label.value - f_o.value, 1};
        s1_acc = s1_acc + q.value * q.value;

        ScaledInt sigp = codec::encode(activate_derivative(config.activation, fwd.z_out), params);
        // delta_out = (o - y) * sigma'(z_out) = -q * sigp, scale 2
        ScaledInt dout{q.value.negated() * sigp.value, 2};
        delta_out_d[i] = dequantize(dout, params.frac_bits);

        std::vector<ScaledInt> wsl(dl), dlast(dl);
        std::vector<double> dlast_d(dl);
        for (std::size_t k = 0; k < dl; ++k) {
            ScaledInt sigl =
                codec::encode(activate_derivative(config.activation, fwd.z[layer_count - 1][k]), params);
            wsl[k] = ScaledInt{used.output_q[k].value * sigl.value, 2};
            dlast[k] = ScaledInt{wsl[k].value * dout.value, 4};
            dlast_d[k] = dequantize(dlast[k], params.frac_bits);
        }
        auto chain = delta_chain(used, config, fwd, dlast_d);
        bool dead = true;
        for (double a : fwd.a[layer_count - 1]) dead = dead && a == 0.0;
        out.last_hidden_dead[i] = dead;

        std::vector<ScaledInt> ed1(d1);
        for (std::size_t k = 0; k < d1; ++k)
            ed1[k] = codec::encode(config.learning_rate * chain[0][k], params);
        for (std::size_t j = 0; j < config.input_dim; ++j)
            for (std::size_t k = 0; k < d1; ++k)
                acc[j * d1 + k].add(sample.features[j].value * ed1[k].value, params);

        out.z_splits[i] = std::move(splits);
        out.q[i] = q;
        out.sigp_out[i] = sigp;
        out.delta_out[i] = dout;
        out.w_sigp_last[i] = std::move(wsl);
        out.delta_last[i] = std::move(dlast);
        out.eta_delta1[i] = std::move(ed1);
        forwards[i] = std::move(fwd);
        chains[i] = std::move(chain);
    }
    out.s1 = ScaledInt{s1_acc, 2};

    out.increment_sums.reserve(acc.size());
    std::vector<ScaledInt> a_totals;
    for (const auto& a : acc) {
        out.increment_sums.push_back(a.done(2));
        a_totals.push_back(out.increment_sums.back().total);
    }

    out.model_next =
        apply_committed_update(used, config, params, forwards, delta_out_d, chains, a_totals);

    // extra round: same machinery against the updated model
    out.zhat_splits.resize(n);
    out.qhat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sample = dataset.samples[i];
        auto splits = commitment_layer1_sums(out.model_next, config, params, sample);
        std::vector<double> z1(d1);
        for (std::size_t k = 0; k < d1; ++k) z1[k] = dequantize(splits[k].total, params.frac_bits);
        PlainForward fwd = forward_from_layer1(out.model_next, config, z1, hook, i, 2);
        ScaledInt f_o = codec::encode(fwd.o, params);
        ScaledInt q{sample.label.value - f_o.value, 1};
        s2_acc = s2_acc + q.value * q.value;
        out.zhat_splits[i] = std::move(splits);
        out.qhat[i] = q;
    }
    out.s2 = ScaledInt{s2_acc, 2};

    double denom = 2.0 * (double)n;
    out.e1 = dequantize(out.s1, params.frac_bits) / denom;
    out.e2 = dequantize(out.s2, params.frac_bits) / denom;
    return out;
}

bool round_verifier_recoverable(const CommitmentRound& round) {
    for (std::size_t i = 0; i < round.sigp_out.size(); ++i) {
        if (round.sigp_out[i].value.is_zero()) continue;
        bool any = false;
        for (const auto& w : round.w_sigp_last[i]) any = any || !w.value.is_zero();
        if (any) continue;
        if (!round.last_hidden_dead[i]) return false;
    }
    return true;
}

bool within_threshold(const ScaledInt& s1, const ScaledInt& s2, double theta,
                      std::size_t n_samples, std::uint32_t frac_bits) {
    if (std::isnan(theta)) return false;
    if (std::isinf(theta) && theta > 0) return true;
    if (theta < 0) return false;
    SignedBig diff = s1.value - s2.value;
    U256 d = diff.mag;
    if (theta == 0.0) return d.is_zero();

    int e;
    double m = std::frexp(theta, &e);
    auto mant = (std::uint64_t)std::ldexp(m, 53);  // 53-bit integer
    int t = e - 53 + 2 * (int)frac_bits;
    num::U512 rhs = num::mul_wide(U256(mant), U256((std::uint64_t)(2 * n_samples)));

    if (t >= 0) {
        if (rhs.top_bit() + t > 511) return true;  // threshold beyond any representable diff
        return num::U512::cmp(num::U512::from_u256(d), num::shl(rhs, (unsigned)t)) <= 0;
    }
    if (d.is_zero()) return true;
    if (d.top_bit() + (-t) > 511) return false;
    return num::U512::cmp(num::shl(num::U512::from_u256(d), (unsigned)(-t)), rhs) <= 0;
}

namespace {

// One full-batch epoch: returns the dataset error of the current model and
// fills grads (summed over samples) for the subsequent update.
double epoch_pass(const ModelState& model, const NetworkConfig& config,
                  const data::QuantizedDataset& ds, std::vector<std::vector<double>>& grad_layers,
                  std::vector<double>& grad_output, std::vector<std::vector<double>>& z_buf,
                  std::vector<std::vector<double>>& a_buf, std::vector<std::vector<double>>& d_buf) {
    std::size_t layer_count = config.hidden.size();
    for (std::size_t l = 0; l < layer_count; ++l) {
        grad_layers[l].assign(model.layers[l].size(), 0.0);
        z_buf[l].assign(config.hidden[l], 0.0);
        a_buf[l].assign(config.hidden[l], 0.0);
        d_buf[l].assign(config.hidden[l], 0.0);
    }
    grad_output.assign(model.output.size(), 0.0);

    double err = 0.0;
    for (const auto& sample : ds.samples) {
        const std::vector<double>* prev = &sample.x;
        std::size_t in_dim = config.input_dim;
        for (std::size_t l = 0; l < layer_count; ++l) {
            std::size_t width = config.hidden[l];
            for (std::size_t k = 0; k < width; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < in_dim; ++j)
                    s += (*prev)[j] * model.layers[l][j * width + k];
                z_buf[l][k] = s;
                a_buf[l][k] = activate(config.activation, s);
            }
            prev = &a_buf[l];
            in_dim = width;
        }
        double z_out = 0.0;
        for (std::size_t j = 0; j < in_dim; ++j) z_out += a_buf[layer_count - 1][j] * model.output[j];
        double o = activate(config.activation, z_out);
        err += cost(o, sample.y);

        double dout = (o - sample.y) * activate_derivative(config.activation, z_out);
        std::size_t last = layer_count - 1;
        for (std::size_t k = 0; k < config.hidden[last]; ++k)
            d_buf[last][k] = activate_derivative(config.activation, z_buf[last][k]) *
                             model.output[k] * dout;
        for (std::size_t l = last; l-- > 0;) {
            std::size_t width = config.hidden[l], next = config.hidden[l + 1];
            for (std::size_t k = 0; k < width; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < next; ++j)
                    s += model.layers[l + 1][k * next + j] * d_buf[l + 1][j];
                d_buf[l][k] = activate_derivative(config.activation, z_buf[l][k]) * s;
            }
        }
        for (std::size_t l = 0; l < layer_count; ++l) {
            std::size_t width = config.hidden[l];
            const std::vector<double>& input = l == 0 ? sample.x : a_buf[l - 1];
            for (std::size_t j = 0; j < input.size(); ++j) {
                double xj = input[j];
                if (xj == 0.0) continue;
                for (std::size_t k = 0; k < width; ++k) grad_layers[l][j * width + k] += xj * d_buf[l][k];
            }
        }
        for (std::size_t j = 0; j < model.output.size(); ++j)
            grad_output[j] += a_buf[layer_count - 1][j] * dout;
    }
    return err / (double)ds.samples.size();
}

}  // namespace

TrainingResult train_to_convergence(const ModelState& initial, const NetworkConfig& config,
                                    const CodecParams& params,
                                    const data::QuantizedDataset& dataset) {
    config.validate();
    if (dataset.samples.empty()) throw std::invalid_argument("train: empty dataset");
    data::QuantizedDataset effective = dataset;
    if (effective.samples.size() > config.batch_size) effective.samples.resize(config.batch_size);
    std::size_t n = effective.samples.size();

    std::size_t layer_count = config.hidden.size();
    std::vector<std::vector<double>> grads(layer_count), z_buf(layer_count), a_buf(layer_count),
        d_buf(layer_count);
    std::vector<double> grad_out;

    TrainingResult result;
    result.w0_layers = initial.layers;
    result.w0_output = initial.output;

    ModelState model = initial;
    ModelState prev = initial;
    double e_prev = 0.0;
    double scale = -config.learning_rate / (double)n;

    for (std::uint64_t t = 0;; ++t) {
        if (t > config.max_epochs)
            throw NonConvergence("no convergence within " + std::to_string(config.max_epochs) +
                                 " epochs");
        double e_cur = epoch_pass(model, config, effective, grads, grad_out, z_buf, a_buf, d_buf);
        if (t >= 1 && std::fabs(e_prev - e_cur) <= config.threshold) {
            // candidate: `prev` converged with plain errors (e_prev, e_cur)
            ModelState used = prev;
            for (std::size_t l = 0; l < layer_count; ++l)
                for (std::size_t w = 0; w < used.layers[l].size(); ++w) {
                    double dlt = prev.layers[l][w] - initial.layers[l][w];
                    used.layers[l][w] = initial.layers[l][w] + dlt;
                }
            for (std::size_t w = 0; w < used.output.size(); ++w) {
                double dlt = prev.output[w] - initial.output[w];
                used.output[w] = initial.output[w] + dlt;
            }
            CommitmentRound round = commitment_round(used, config, params, effective);
            if (within_threshold(round.s1, round.s2, config.threshold, n, params.frac_bits)) {
                result.model = prev;
                result.epochs = t;
                result.e1_plain = e_prev;
                result.e2_plain = e_cur;
                result.commitment = std::move(round);
                result.delta_layers.resize(layer_count);
                for (std::size_t l = 0; l < layer_count; ++l) {
                    result.delta_layers[l].resize(prev.layers[l].size());
                    for (std::size_t w = 0; w < prev.layers[l].size(); ++w)
                        result.delta_layers[l][w] = prev.layers[l][w] - initial.layers[l][w];
                }
                result.delta_output.resize(prev.output.size());
                for (std::size_t w = 0; w < prev.output.size(); ++w)
                    result.delta_output[w] = prev.output[w] - initial.output[w];
                return result;
            }
        }
        prev = model;
        e_prev = e_cur;
        for (std::size_t l = 0; l < layer_count; ++l)
            for (std::size_t w = 0; w < model.layers[l].size(); ++w)
                model.layers[l][w] += scale * grads[l][w];
        for (std::size_t w = 0; w < model.output.size(); ++w)
            model.output[w] += scale * grad_out[w];
    }
}

}  // namespace veridl::dnn
