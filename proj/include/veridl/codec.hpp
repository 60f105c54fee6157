#pragma once

#include "veridl/u256.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace veridl::codec {

using num::SignedBig;
using num::U256;

/**
 * Parameters of the fixed-point field encoding.
 *
 * frac_bits is the number of bits kept after the binary point; field_order
 * is the (prime) order of the commitment groups. The headroom invariant
 * guarantees that no verified integer sum can wrap modulo the field order:
 *   4*frac_bits + magnitude_bits + ceil(log2(max_terms)) < bits(field_order).
 */
struct CodecParams {
    std::uint32_t frac_bits;   // L_T
    U256 field_order;          // prime group order
    std::uint64_t max_terms;   // bound on summands per verified sum
    std::uint32_t magnitude_bits;  // total plaintext magnitude budget of a scale-4 product

    CodecParams(std::uint32_t frac_bits_, const U256& field_order_,
                std::uint64_t max_terms_ = (1ull << 21), std::uint32_t magnitude_bits_ = 128);

    // Half the field order; plaintext range checks compare against this.
    U256 half_order;

    // Per-factor plaintext magnitude limit, 2^(magnitude_bits/4).
    std::uint32_t per_value_magnitude_bits() const { return magnitude_bits / 4; }

    bool operator==(const CodecParams& o) const {
        return frac_bits == o.frac_bits && field_order == o.field_order &&
               max_terms == o.max_terms && magnitude_bits == o.magnitude_bits;
    }
};

/**
 * A fixed-point integer tagged with its scale: value represents
 * value / 2^(scale * frac_bits). Products of committed quantities raise
 * the scale, so the tag travels with every serialized exponent.
 */
struct ScaledInt {
    SignedBig value;
    std::uint32_t scale = 1;

    ScaledInt() = default;
    ScaledInt(SignedBig v, std::uint32_t s) : value(std::move(v)), scale(s) {}
    static ScaledInt from_int(std::int64_t v, std::uint32_t s) { return {SignedBig(v), s}; }

    bool is_zero() const { return value.is_zero(); }
    bool operator==(const ScaledInt& o) const { return value == o.value && scale == o.scale; }
};

/**
 * Sign-split of a verified dot product: the sum over non-negative products
 * and the sum over negative products, reported separately so the verifier
 * can check each bucket in the exponent and recover the exact total.
 */
struct SplitSum {
    ScaledInt pos_sum;   // >= 0
    ScaledInt neg_sum;   // <= 0
    ScaledInt total;     // pos_sum + neg_sum
    std::uint32_t neg_count = 0;
};

enum class SignFlag : std::uint8_t { Positive = 0, Negative = 1 };

inline SignFlag sign_of(const SignedBig& v) {
    return v.is_negative() ? SignFlag::Negative : SignFlag::Positive;
}

/** Round-half-to-even fixed-point encoding of a decimal: value = x * 2^frac_bits. */
ScaledInt encode(double x, const CodecParams& params);

/** Inverse of encode, dividing by 2^(scale * frac_bits); correctly rounded. */
double decode(const ScaledInt& v, const CodecParams& params);

/** Canonical residue of v.value modulo the field order, in [0, p). */
U256 mod_repr(const ScaledInt& v, const CodecParams& params);
U256 mod_repr(const SignedBig& v, const U256& field_order);

/**
 * Exact integer dot product with sign-split bookkeeping. Inputs must share
 * a common scale per operand vector; the result carries the summed scale.
 * Throws std::overflow_error if any partial sum leaves (-p, p).
 */
SplitSum split_dot(std::span<const ScaledInt> u, std::span<const ScaledInt> w,
                   const CodecParams& params);

/**
 * Test oracle for the modular-representation identity: with z = sum(u_i*w_i),
 * checks that [sum [u_i][w_i]] equals z when z >= 0 and z + p otherwise.
 */
bool lemma_check(std::span<const std::int64_t> u, std::span<const std::int64_t> w,
                 std::int64_t p);

/** True iff |v| < field_order / 2; every plaintext scalar read from a proof must pass. */
bool in_plaintext_range(const SignedBig& v, const CodecParams& params);

}  // namespace veridl::codec
