#include "veridl/protocol.hpp"

#include <algorithm>
#include <map>

namespace veridl::proto {

using codec::CodecParams;
using codec::ScaledInt;
using codec::SignFlag;
using codec::SplitSum;
using num::SignedBig;

const char* mode_name(ProofMode m) {
    return m == ProofMode::Basic ? "basic" : "unique-value";
}

ProofMode mode_from_name(const std::string& s) {
    if (s == "basic") return ProofMode::Basic;
    if (s == "unique-value" || s == "unique") return ProofMode::UniqueValue;
    throw std::invalid_argument("unknown proof mode: " + s);
}

const char* failed_step_name(FailedStep s) {
    switch (s) {
        case FailedStep::None: return "none";
        case FailedStep::Step1Signature: return "step1-signature";
        case FailedStep::Step2Z: return "step2-z";
        case FailedStep::Step2E1: return "step2-E1";
        case FailedStep::Step3DeltaO: return "step3-delta-o";
        case FailedStep::Step3DeltaL: return "step3-delta-L";
        case FailedStep::Step3DeltaW: return "step3-deltaw";
        case FailedStep::Step3ZHat: return "step3-zhat";
        case FailedStep::Step3E2: return "step3-E2";
        case FailedStep::Step4Convergence: return "step4-convergence";
    }
    return "?";
}

SampleDigest ProofDigests::materialize(std::size_t i) const {
    if (mode == ProofMode::Basic) return plain.at(i);
    SampleDigest d;
    for (std::uint32_t idx : feature_idx.at(i)) {
        // feature position: left-of-pairing form only, so the synopsis bytes
        // are identical in both proof modes
        d.features.push_back(Element{dict.at(idx).p1, std::nullopt});
    }
    d.label = dict.at(label_idx.at(i));
    d.signs = signs.at(i);
    return d;
}

std::size_t ProofDigests::feature_commitment_count() const {
    if (mode == ProofMode::Basic) {
        std::size_t c = 0;
        for (const auto& d : plain) c += d.features.size();
        return c;
    }
    std::vector<bool> used(dict.size(), false);
    for (const auto& row : feature_idx)
        for (auto idx : row) used.at(idx) = true;
    return (std::size_t)std::count(used.begin(), used.end(), true);
}

WeightSet add(const WeightSet& a, const WeightSet& b) {
    if (a.layers.size() != b.layers.size() || a.output.size() != b.output.size())
        throw std::invalid_argument("weight sets have different shapes");
    WeightSet r = a;
    for (std::size_t l = 0; l < r.layers.size(); ++l) {
        if (a.layers[l].size() != b.layers[l].size())
            throw std::invalid_argument("weight sets have different shapes");
        for (std::size_t w = 0; w < r.layers[l].size(); ++w) r.layers[l][w] += b.layers[l][w];
    }
    for (std::size_t w = 0; w < r.output.size(); ++w) r.output[w] += b.output[w];
    return r;
}

dnn::ModelState model_from_weights(const WeightSet& w) {
    dnn::ModelState m;
    m.layers = w.layers;
    m.output = w.output;
    return m;
}

U256 sample_synopsis(const SampleDigest& d) {
    std::vector<std::uint8_t> buf;
    for (const auto& f : d.features) {
        auto b = group::element_bytes(f);
        buf.insert(buf.end(), b.begin(), b.end());
    }
    auto lb = group::element_bytes(d.label);
    buf.insert(buf.end(), lb.begin(), lb.end());
    return group::hash_to_scalar(buf);
}

SampleDigest build_sample_digest(const data::QuantizedSample& s, const CodecParams& params) {
    (void)params;
    SampleDigest d;
    d.features.reserve(s.features.size());
    for (const auto& f : s.features) d.features.push_back(group::commit(f.value, false));
    d.label = group::commit(s.label.value, true);
    d.signs = s.signs;
    return d;
}

DatasetSignature setup(const data::QuantizedDataset& dataset, const group::KeyPair& keys,
                       const CodecParams& params) {
    if (dataset.samples.empty()) throw std::invalid_argument("setup: empty dataset");
    if (params.field_order != group::params().order)
        throw std::invalid_argument("codec field order must match the group order");
    const U256& order = group::params().order;
    bn::G1 acc = bn::G1::infinity();
    for (const auto& s : dataset.samples) {
        U256 d = sample_synopsis(build_sample_digest(s, params));
        U256 ds = num::mod_mul(d, keys.secret, order);
        acc = bn::point_add(acc, bn::scalar_mul(bn::g1_generator(), ds));
    }
    DatasetSignature sig;
    sig.gamma = Element{acc, std::nullopt};
    return sig;
}

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw ProofFormatError(what);
}

void check_scaled(const ScaledInt& v, std::uint32_t scale, const CodecParams& params,
                  const char* what) {
    require(v.scale == scale, what);
    if (!codec::in_plaintext_range(v.value, params))
        throw ProofFormatError(std::string(what) + ": value out of plaintext range");
}

void check_split(const SplitSum& s, std::uint32_t scale, const CodecParams& params,
                 const char* what) {
    check_scaled(s.pos_sum, scale, params, what);
    check_scaled(s.neg_sum, scale, params, what);
    check_scaled(s.total, scale, params, what);
    require(!s.pos_sum.value.is_negative(), "split: positive part negative");
    require(!(SignedBig(0) < s.neg_sum.value), "split: negative part positive");
}

void validate_proof(const Proof& proof, const dnn::NetworkConfig& config,
                    const CodecParams& params) {
    if (params.field_order != group::params().order)
        throw std::invalid_argument("codec field order must match the group order");
    require(proof.frac_bits == params.frac_bits, "proof: fractional-bit mismatch");
    require(proof.input_dim == config.input_dim, "proof: input dimension mismatch");
    require(proof.hidden.size() == config.hidden.size(), "proof: layer count mismatch");
    for (std::size_t l = 0; l < proof.hidden.size(); ++l)
        require(proof.hidden[l] == config.hidden[l], "proof: layer width mismatch");
    std::size_t n = proof.n_samples;
    require(n >= 1, "proof: empty sample set");
    std::size_t m = config.input_dim, d1 = config.hidden.front(), dl = config.hidden.back();

    check_scaled(proof.s1, 2, params, "proof: s1");
    check_scaled(proof.s2, 2, params, "proof: s2");

    const auto& dg = proof.digests;
    require(dg.mode == proof.mode, "proof: digest mode mismatch");
    require(dg.sample_count() == n, "proof: digest count mismatch");
    if (proof.mode == ProofMode::Basic) {
        for (const auto& d : dg.plain) {
            require(d.features.size() == m, "proof: feature commitment count");
            require(d.signs.size() == m + 1, "proof: sign flag count");
            require(d.label.dual(), "proof: label lacks dual form");
            for (const auto& f : d.features) require(!f.dual(), "proof: feature form not canonical");
        }
    } else {
        require(!dg.dict.empty(), "proof: empty commitment dictionary");
        require(dg.feature_idx.size() == n && dg.label_idx.size() == n && dg.signs.size() == n,
                "proof: digest index shape");
        for (std::size_t i = 0; i < n; ++i) {
            require(dg.feature_idx[i].size() == m, "proof: feature index count");
            require(dg.signs[i].size() == m + 1, "proof: sign flag count");
            for (auto idx : dg.feature_idx[i]) require(idx < dg.dict.size(), "proof: index range");
            require(dg.label_idx[i] < dg.dict.size(), "proof: index range");
            require(dg.dict[dg.label_idx[i]].dual(), "proof: label entry lacks dual form");
        }
    }

    require(proof.witnesses.size() == n, "proof: witness count mismatch");
    for (const auto& w : proof.witnesses) {
        require(w.z_splits.size() == d1 && w.zhat_splits.size() == d1, "proof: z split count");
        for (const auto& s : w.z_splits) check_split(s, 2, params, "proof: z split");
        for (const auto& s : w.zhat_splits) check_split(s, 2, params, "proof: zhat split");
        require(w.delta_out_commit.dual(), "proof: output signal commitment lacks dual form");
        require(w.delta_last.size() == dl, "proof: last-layer signal count");
        for (const auto& v : w.delta_last) check_scaled(v, 4, params, "proof: delta_last");
    }

    require(proof.increments.size() == m * d1, "proof: increment record count");
    for (const auto& rec : proof.increments) {
        check_scaled(rec.total, 2, params, "proof: increment total");
        check_split(rec.split, 2, params, "proof: increment split");
        require(rec.total == rec.split.total, "proof: increment record inconsistent");
    }
}

// sign-split bucket assignment from the flags, matching the prover's
// value-based split everywhere a product is nonzero
bool bucket_negative(SignFlag flag, const SignedBig& other) {
    bool left_neg = flag == SignFlag::Negative;
    return left_neg != other.is_negative();
}

struct CheckContext {
    const CodecParams& params;
    bool literal;

    U256 residue(const SignedBig& v) const { return codec::mod_repr(v, params.field_order); }

    // Does  prod_j bases_j^(exps_j)  equal  g^(claimed)  (in the exponent
    // group, mod the field order)?
    bool exp_product_check(std::span<const bn::G1> bases, std::span<const SignedBig> exps,
                           const SignedBig& claimed) const {
        if (!literal) {
            bn::G1 lhs = group::msm_g1(bases, exps);
            bn::G1 rhs = group::exp_g1_signed(bn::g1_generator(), claimed);
            return bn::point_eq(lhs, rhs);
        }
        std::vector<bn::PairingLeg> legs;
        legs.reserve(bases.size() + 1);
        for (std::size_t j = 0; j < bases.size(); ++j)
            legs.push_back({bn::to_affine(bases[j]),
                            bn::to_affine(group::exp_g2_signed(bn::g2_generator(), exps[j]))});
        legs.push_back({bn::to_affine(group::exp_g1_signed(bn::g1_generator(), claimed.negated())),
                        bn::to_affine(bn::g2_generator())});
        return bn::pairing_product(legs).is_one();
    }

    // Does e(g^(known), rhs) equal e(g, target), i.e. rhs^known == target?
    bool known_exp_pair_check(const SignedBig& known, const bn::G2& rhs, const bn::G2& target) const {
        if (!literal) {
            return bn::point_eq(group::exp_g2_signed(rhs, known), target);
        }
        std::vector<bn::PairingLeg> legs;
        legs.push_back({bn::to_affine(group::exp_g1_signed(bn::g1_generator(), known)),
                        bn::to_affine(rhs)});
        legs.push_back({bn::to_affine(bn::point_neg(bn::g1_generator())), bn::to_affine(target)});
        return bn::pairing_product(legs).is_one();
    }
};

// split check for one verified dot product
bool split_sum_check(const CheckContext& ctx, std::span<const bn::G1> bases,
                     std::span<const SignedBig> exps, std::span<const SignFlag> flags,
                     const SplitSum& claimed) {
    if ((claimed.pos_sum.value + claimed.neg_sum.value) != claimed.total.value) return false;
    std::vector<bn::G1> pos_b, neg_b;
    std::vector<SignedBig> pos_e, neg_e;
    for (std::size_t j = 0; j < bases.size(); ++j) {
        if (bucket_negative(flags[j], exps[j])) {
            neg_b.push_back(bases[j]);
            neg_e.push_back(exps[j]);
        } else {
            pos_b.push_back(bases[j]);
            pos_e.push_back(exps[j]);
        }
    }
    if (!ctx.exp_product_check(pos_b, pos_e, claimed.pos_sum.value)) return false;
    if (!ctx.exp_product_check(neg_b, neg_e, claimed.neg_sum.value)) return false;
    return true;
}

Element residual_commitment(const SampleDigest& digest, const ScaledInt& f_o) {
    // g^(f(y) - f(o)) = label * g^(-f(o)), in both group forms
    Element nego = group::commit(f_o.value.negated(), true);
    return group::mul(digest.label, nego);
}

// aggregate check  prod_i e(q_i, q_i) == e(g,g)^S  as a genuine multi-pairing
bool squared_residual_check(const std::vector<Element>& residuals, const ScaledInt& claimed,
                            const CheckContext& ctx) {
    std::vector<bn::PairingLeg> legs;
    legs.reserve(residuals.size() + 1);
    for (const auto& q : residuals) legs.push_back({bn::to_affine(q.p1), bn::to_affine(*q.p2)});
    legs.push_back(
        {bn::to_affine(group::exp_g1_signed(bn::g1_generator(), claimed.value.negated())),
         bn::to_affine(bn::g2_generator())});
    (void)ctx;
    return bn::pairing_product(legs).is_one();
}

bool exact_divide(const SignedBig& num_v, const SignedBig& den, SignedBig& out) {
    if (den.is_zero()) return false;
    U256 q, r;
    num::divmod_u256(num_v.mag, den.mag, q, r);
    if (!r.is_zero()) return false;
    out = SignedBig::from_parts(num_v.neg != den.neg, q);
    return true;
}

}  // namespace

Proof certify(const data::QuantizedDataset& dataset, const dnn::CommitmentRound& round,
              const dnn::NetworkConfig& config, const CodecParams& params, ProofMode mode) {
    std::size_t n = dataset.samples.size();
    std::size_t m = config.input_dim, d1 = config.hidden.front(), dl = config.hidden.back();
    if (round.z_splits.size() != n || round.zhat_splits.size() != n)
        throw std::invalid_argument("certify: trace does not match dataset");

    Proof proof;
    proof.mode = mode;
    proof.frac_bits = params.frac_bits;
    proof.input_dim = (std::uint32_t)m;
    proof.hidden = config.hidden;
    proof.n_samples = (std::uint32_t)n;
    proof.s1 = round.s1;
    proof.s2 = round.s2;

    proof.digests.mode = mode;
    if (mode == ProofMode::Basic) {
        for (const auto& s : dataset.samples)
            proof.digests.plain.push_back(build_sample_digest(s, params));
    } else {
        // dictionary keyed by the quantized value; an entry carries its G2
        // form as soon as the value ever occurs as a label
        std::map<std::string, std::uint32_t> index;
        auto key_of = [](const ScaledInt& v) { return v.value.to_string(); };
        auto entry_for = [&](const ScaledInt& v, bool as_label) -> std::uint32_t {
            std::string key = key_of(v);
            auto it = index.find(key);
            if (it == index.end()) {
                proof.digests.dict.push_back(group::commit(v.value, as_label));
                index.emplace(key, (std::uint32_t)(proof.digests.dict.size() - 1));
                return (std::uint32_t)(proof.digests.dict.size() - 1);
            }
            std::uint32_t idx = it->second;
            if (as_label && !proof.digests.dict[idx].dual())
                proof.digests.dict[idx] = group::commit(v.value, true);
            return idx;
        };
        for (const auto& s : dataset.samples) {
            std::vector<std::uint32_t> row;
            row.reserve(m);
            for (const auto& f : s.features) row.push_back(entry_for(f, false));
            proof.digests.feature_idx.push_back(std::move(row));
            proof.digests.label_idx.push_back(entry_for(s.label, true));
            proof.digests.signs.push_back(s.signs);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        SampleWitness w;
        w.z_splits = round.z_splits[i];
        w.zhat_splits = round.zhat_splits[i];
        w.delta_out_commit = group::commit(round.delta_out[i].value, true);
        w.delta_last = round.delta_last[i];
        proof.witnesses.push_back(std::move(w));
    }
    for (std::size_t r = 0; r < m * d1; ++r) {
        IncrementRecord rec;
        rec.split = round.increment_sums[r];
        rec.total = rec.split.total;
        proof.increments.push_back(std::move(rec));
    }
    (void)dl;
    validate_proof(proof, config, params);  // certify refuses to emit a malformed proof
    return proof;
}

bool verify_step1(const Proof& proof, const DatasetSignature& sig, const Element& public_v,
                  const VerifyOptions& opts) {
    if (!public_v.dual()) throw ProofFormatError("public key lacks dual form");
    const U256& order = group::params().order;
    if (!opts.literal_pairings) {
        U256 acc(0);
        for (std::size_t i = 0; i < proof.digests.sample_count(); ++i)
            acc = num::mod_add(acc, sample_synopsis(proof.digests.materialize(i)), order);
        return bn::point_eq(bn::scalar_mul(public_v.p1, acc), sig.gamma.p1);
    }
    std::vector<bn::PairingLeg> legs;
    for (std::size_t i = 0; i < proof.digests.sample_count(); ++i) {
        U256 d = sample_synopsis(proof.digests.materialize(i));
        legs.push_back({bn::to_affine(bn::scalar_mul(bn::g1_generator(), d)),
                        bn::to_affine(*public_v.p2)});
    }
    legs.push_back({bn::to_affine(bn::point_neg(sig.gamma.p1)), bn::to_affine(bn::g2_generator())});
    return bn::pairing_product(legs).is_one();
}

Step2State verify_step2(const Proof& proof, const WeightSet& w_converged,
                        const dnn::NetworkConfig& config, const CodecParams& params,
                        const VerifyOptions& opts) {
    validate_proof(proof, config, params);
    CheckContext ctx{params, opts.literal_pairings};
    std::size_t n = proof.n_samples, m = config.input_dim, d1 = config.hidden.front();

    Step2State st;
    st.model_used = model_from_weights(w_converged);
    st.model_used.snap_to_grid(params);

    for (std::size_t i = 0; i < n; ++i) st.digests.push_back(proof.digests.materialize(i));

    std::vector<Element> residuals;
    for (std::size_t i = 0; i < n; ++i) {
        const SampleDigest& digest = st.digests[i];
        std::vector<bn::G1> bases(m);
        for (std::size_t j = 0; j < m; ++j) bases[j] = digest.features[j].p1;

        std::vector<SignedBig> col(m);
        std::vector<double> z1(d1);
        for (std::size_t k = 0; k < d1; ++k) {
            for (std::size_t j = 0; j < m; ++j)
                col[j] = st.model_used.layers_q[0][j * d1 + k].value;
            const SplitSum& claimed = proof.witnesses[i].z_splits[k];
            if (!split_sum_check(ctx, bases, col, std::span(digest.signs).subspan(0, m), claimed)) {
                st.failed = FailedStep::Step2Z;
                st.detail = "sample " + std::to_string(i) + " neuron " + std::to_string(k);
                return st;
            }
            z1[k] = dnn::dequantize(claimed.total, params.frac_bits);
        }
        dnn::PlainForward fwd = dnn::forward_from_layer1(st.model_used, config, z1);
        ScaledInt f_o = codec::encode(fwd.o, params);
        residuals.push_back(residual_commitment(digest, f_o));
        st.outputs.push_back(fwd.o);
        st.f_o.push_back(f_o);
        st.forwards.push_back(std::move(fwd));
    }
    if (!squared_residual_check(residuals, proof.s1, ctx)) {
        st.failed = FailedStep::Step2E1;
        st.detail = "first error aggregate";
        return st;
    }
    st.q_commit = std::move(residuals);
    return st;
}

Step3State verify_step3(const Proof& proof, Step2State& fwd, const dnn::NetworkConfig& config,
                        const CodecParams& params, const VerifyOptions& opts) {
    validate_proof(proof, config, params);
    CheckContext ctx{params, opts.literal_pairings};
    std::size_t n = proof.n_samples, m = config.input_dim;
    std::size_t d1 = config.hidden.front(), dl = config.hidden.back();
    std::size_t layer_count = config.hidden.size();
    const dnn::ModelState& used = fwd.model_used;

    Step3State st;
    std::vector<double> delta_out_d(n);
    std::vector<std::vector<std::vector<double>>> chains(n);
    std::vector<std::vector<ScaledInt>> ed1(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& wit = proof.witnesses[i];
        const auto& f = fwd.forwards[i];

        ScaledInt sigp =
            codec::encode(dnn::activate_derivative(config.activation, f.z_out), params);
        // e(g^(y-o), g^(-sigma')) = e(g, g^(delta_out))
        if (!ctx.known_exp_pair_check(sigp.value.negated(), *fwd.q_commit[i].p2,
                                      *wit.delta_out_commit.p2)) {
            st.failed = FailedStep::Step3DeltaO;
            st.detail = "sample " + std::to_string(i);
            return st;
        }

        std::vector<SignedBig> wsig(dl);
        for (std::size_t k = 0; k < dl; ++k) {
            ScaledInt sigl = codec::encode(
                dnn::activate_derivative(config.activation, f.z[layer_count - 1][k]), params);
            wsig[k] = used.output_q[k].value * sigl.value;
            // e(g^(w_out_k * sigma'_k), g^(delta_out)) = e(g,g)^(delta_last_k)
            bn::G2 target = group::exp_g2_signed(bn::g2_generator(), wit.delta_last[k].value);
            if (!ctx.known_exp_pair_check(wsig[k], *wit.delta_out_commit.p2, target)) {
                st.failed = FailedStep::Step3DeltaL;
                st.detail = "sample " + std::to_string(i) + " neuron " + std::to_string(k);
                return st;
            }
        }

        // recover the output error signal for the output-weight update
        SignedBig delta_out_int;
        bool have = false;
        if (sigp.value.is_zero()) {
            delta_out_int = SignedBig(0);
            have = true;
        } else {
            for (std::size_t k = 0; k < dl && !have; ++k) {
                if (wsig[k].is_zero()) continue;
                if (!exact_divide(wit.delta_last[k].value, wsig[k], delta_out_int)) {
                    st.failed = FailedStep::Step3DeltaL;
                    st.detail = "sample " + std::to_string(i) + ": signal not divisible";
                    return st;
                }
                have = true;
            }
        }
        if (have) {
            delta_out_d[i] = dnn::dequantize(ScaledInt{delta_out_int, 2}, params.frac_bits);
        } else {
            bool all_dead = true;
            for (double a : f.a[layer_count - 1]) all_dead = all_dead && a == 0.0;
            if (!all_dead) {
                // Every last-hidden derivative quantized to zero while its
                // activation is live: the output signal cannot be recovered
                // from the committed identities, so the update that produced
                // the second error cannot be authenticated.
                st.failed = FailedStep::Step3DeltaO;
                st.detail = "sample " + std::to_string(i) + ": output signal unrecoverable";
                return st;
            }
            delta_out_d[i] = 0.0;  // every contribution it scales is zero
        }

        std::vector<double> dlast_d(dl);
        for (std::size_t k = 0; k < dl; ++k)
            dlast_d[k] = dnn::dequantize(wit.delta_last[k], params.frac_bits);
        chains[i] = dnn::delta_chain(used, config, f, dlast_d);
        ed1[i].resize(d1);
        for (std::size_t k = 0; k < d1; ++k)
            ed1[i][k] = codec::encode(config.learning_rate * chains[i][0][k], params);
    }

    // first-layer increment numerators
    std::vector<ScaledInt> a_totals(m * d1);
    {
        std::vector<bn::G1> bases(n);
        std::vector<SignedBig> exps(n);
        std::vector<SignFlag> flags(n);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                bases[i] = fwd.digests[i].features[j].p1;
                flags[i] = fwd.digests[i].signs[j];
            }
            for (std::size_t k = 0; k < d1; ++k) {
                for (std::size_t i = 0; i < n; ++i) exps[i] = ed1[i][k].value;
                const IncrementRecord& rec = proof.increments[j * d1 + k];
                if (!split_sum_check(ctx, bases, exps, flags, rec.split)) {
                    st.failed = FailedStep::Step3DeltaW;
                    st.detail = "weight " + std::to_string(j) + "," + std::to_string(k);
                    return st;
                }
                a_totals[j * d1 + k] = rec.total;
            }
        }
    }

    st.model_next = dnn::apply_committed_update(used, config, params, fwd.forwards, delta_out_d,
                                                chains, a_totals);

    // second round: the step-2 machinery against the updated model
    std::vector<Element> residuals;
    for (std::size_t i = 0; i < n; ++i) {
        const SampleDigest& digest = fwd.digests[i];
        std::vector<bn::G1> bases(m);
        for (std::size_t j = 0; j < m; ++j) bases[j] = digest.features[j].p1;
        std::vector<SignedBig> col(m);
        std::vector<double> z1(d1);
        for (std::size_t k = 0; k < d1; ++k) {
            for (std::size_t j = 0; j < m; ++j)
                col[j] = st.model_next.layers_q[0][j * d1 + k].value;
            const SplitSum& claimed = proof.witnesses[i].zhat_splits[k];
            if (!split_sum_check(ctx, bases, col, std::span(digest.signs).subspan(0, m), claimed)) {
                st.failed = FailedStep::Step3ZHat;
                st.detail = "sample " + std::to_string(i) + " neuron " + std::to_string(k);
                return st;
            }
            z1[k] = dnn::dequantize(claimed.total, params.frac_bits);
        }
        dnn::PlainForward f2 = dnn::forward_from_layer1(st.model_next, config, z1);
        residuals.push_back(residual_commitment(digest, codec::encode(f2.o, params)));
    }
    if (!squared_residual_check(residuals, proof.s2, ctx)) {
        st.failed = FailedStep::Step3E2;
        st.detail = "second error aggregate";
        return st;
    }
    st.s2_recomputed = proof.s2;
    return st;
}

VerificationReport verify(const WeightSet& w0, const WeightSet& delta, const Proof& proof,
                          const DatasetSignature& sig, const Element& public_v,
                          const dnn::NetworkConfig& config, const CodecParams& params,
                          const VerifyOptions& opts) {
    validate_proof(proof, config, params);
    VerificationReport report;

    if (!verify_step1(proof, sig, public_v, opts)) {
        report.failed_step = FailedStep::Step1Signature;
        report.detail = "dataset digest signature";
        return report;
    }
    WeightSet converged = add(w0, delta);
    Step2State s2 = verify_step2(proof, converged, config, params, opts);
    if (s2.failed != FailedStep::None) {
        report.failed_step = s2.failed;
        report.detail = s2.detail;
        return report;
    }
    Step3State s3 = verify_step3(proof, s2, config, params, opts);
    if (s3.failed != FailedStep::None) {
        report.failed_step = s3.failed;
        report.detail = s3.detail;
        return report;
    }
    if (!dnn::within_threshold(proof.s1, proof.s2, config.threshold, proof.n_samples,
                               params.frac_bits)) {
        report.failed_step = FailedStep::Step4Convergence;
        report.detail = "|E1 - E2| exceeds threshold";
        return report;
    }
    report.accepted = true;
    return report;
}

}  // namespace veridl::proto
