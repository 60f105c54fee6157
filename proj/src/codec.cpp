#include "veridl/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace veridl::codec {

namespace {

std::uint32_t ceil_log2(std::uint64_t n) {
    std::uint32_t b = 0;
    while ((1ull << b) < n) ++b;
    return b;
}

}  // namespace

CodecParams::CodecParams(std::uint32_t frac_bits_, const U256& field_order_,
                         std::uint64_t max_terms_, std::uint32_t magnitude_bits_)
    : frac_bits(frac_bits_),
      field_order(field_order_),
      max_terms(max_terms_),
      magnitude_bits(magnitude_bits_) {
    if (frac_bits < 1) throw std::invalid_argument("CodecParams: frac_bits must be >= 1");
    if (!field_order.is_odd()) throw std::invalid_argument("CodecParams: field order must be odd");
    int order_bits = field_order.top_bit() + 1;
    std::uint64_t need = 4ull * frac_bits + magnitude_bits + ceil_log2(max_terms);
    if (need >= (std::uint64_t)order_bits)
        throw std::invalid_argument("CodecParams: headroom invariant violated");
    half_order = field_order;
    for (int k = 0; k < 3; ++k) half_order.w[k] = (half_order.w[k] >> 1) | (half_order.w[k + 1] << 63);
    half_order.w[3] >>= 1;
}

ScaledInt encode(double x, const CodecParams& params) {
    if (!std::isfinite(x)) throw std::overflow_error("encode: non-finite input");
    if (x == 0.0) return ScaledInt{SignedBig(), 1};

    bool neg = std::signbit(x);
    int exp = 0;
    double m = std::frexp(std::fabs(x), &exp);  // x = m * 2^exp, m in [0.5, 1)
    // m * 2^53 is an exact 53-bit integer.
    auto mant = (std::uint64_t)std::ldexp(m, 53);
    int shift = exp - 53 + (int)params.frac_bits;  // value = mant * 2^shift

    U256 mag;
    if (shift >= 0) {
        if (shift + 53 > 250) throw std::overflow_error("encode: magnitude too large");
        mag = U256(mant);
        for (int i = 0; i < shift; ++i) mag = num::shl1(mag);
    } else {
        unsigned drop = (unsigned)(-shift);
        if (drop >= 64) return ScaledInt{SignedBig(), 1};  // below half an ulp of the grid
        std::uint64_t q = mant >> drop;
        std::uint64_t round = (mant >> (drop - 1)) & 1;
        std::uint64_t sticky = drop >= 2 ? (mant & ((1ull << (drop - 1)) - 1)) : 0;
        if (round && (sticky || (q & 1))) ++q;
        mag = U256(q);
    }
    if (mag >= params.field_order) throw std::overflow_error("encode: value exceeds field order");
    if (mag.top_bit() >= (int)(params.per_value_magnitude_bits() + params.frac_bits))
        throw std::overflow_error("encode: value exceeds magnitude budget");
    return ScaledInt{SignedBig::from_parts(neg, mag), 1};
}

double decode(const ScaledInt& v, const CodecParams& params) {
    double d = num::to_double(v.value.mag);
    d = std::ldexp(d, -(int)(v.scale * params.frac_bits));
    return v.value.is_negative() ? -d : d;
}

U256 mod_repr(const SignedBig& v, const U256& field_order) {
    if (!(v.mag < field_order)) throw std::overflow_error("mod_repr: |value| >= field order");
    if (!v.is_negative()) return v.mag;
    U256 r;
    num::sub_with_borrow(r, field_order, v.mag);
    return r;
}

U256 mod_repr(const ScaledInt& v, const CodecParams& params) {
    return mod_repr(v.value, params.field_order);
}

SplitSum split_dot(std::span<const ScaledInt> u, std::span<const ScaledInt> w,
                   const CodecParams& params) {
    if (u.size() != w.size()) throw std::invalid_argument("split_dot: length mismatch");
    std::uint32_t scale = 0;
    if (!u.empty()) {
        scale = u.front().scale + w.front().scale;
        if (scale > 4) throw std::invalid_argument("split_dot: result scale exceeds 4");
    }
    SignedBig pos, neg, total;
    std::uint32_t neg_count = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i].scale != u.front().scale || w[i].scale != w.front().scale)
            throw std::invalid_argument("split_dot: mixed scales");
        SignedBig prod = u[i].value * w[i].value;
        if (!(prod.mag < params.field_order))
            throw std::overflow_error("split_dot: product leaves field range");
        if (prod.is_negative()) {
            neg = neg + prod;
            ++neg_count;
            if (!(neg.mag < params.field_order))
                throw std::overflow_error("split_dot: negative partial sum leaves field range");
        } else {
            pos = pos + prod;
            if (!(pos.mag < params.field_order))
                throw std::overflow_error("split_dot: positive partial sum leaves field range");
        }
        total = total + prod;
        if (!(total.mag < params.field_order))
            throw std::overflow_error("split_dot: total leaves field range");
    }
    SplitSum out;
    out.pos_sum = ScaledInt{pos, scale};
    out.neg_sum = ScaledInt{neg, scale};
    out.total = ScaledInt{total, scale};
    out.neg_count = neg_count;
    return out;
}

bool lemma_check(std::span<const std::int64_t> u, std::span<const std::int64_t> w,
                 std::int64_t p) {
    if (u.size() != w.size() || p <= 1) throw std::invalid_argument("lemma_check: bad input");
    auto residue = [p](std::int64_t x) -> __int128 {
        __int128 r = (__int128)x % p;
        if (r < 0) r += p;
        return r;
    };
    __int128 z = 0, lhs = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        z += (__int128)u[i] * w[i];
        lhs += residue(u[i]) * residue(w[i]);
    }
    __int128 reduced = lhs % p;
    __int128 expected = z >= 0 ? z : z + p;
    return reduced == expected;
}

bool in_plaintext_range(const SignedBig& v, const CodecParams& params) {
    return v.mag < params.half_order;
}

}  // namespace veridl::codec
