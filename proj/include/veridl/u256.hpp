#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace veridl::num {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/**
 * Fixed-width 256-bit unsigned integer, little-endian limb order.
 * Arithmetic is plain two's-complement style with explicit carry handling;
 * wider intermediates go through U512.
 */
struct U256 {
    std::array<u64, 4> w{0, 0, 0, 0};

    constexpr U256() = default;
    constexpr U256(u64 lo) : w{lo, 0, 0, 0} {}
    constexpr U256(u64 w0, u64 w1, u64 w2, u64 w3) : w{w0, w1, w2, w3} {}

    bool is_zero() const { return (w[0] | w[1] | w[2] | w[3]) == 0; }
    bool is_odd() const { return w[0] & 1; }

    bool bit(unsigned i) const { return (w[i >> 6] >> (i & 63)) & 1; }

    // Index of the highest set bit, or -1 for zero.
    int top_bit() const {
        for (int i = 3; i >= 0; --i)
            if (w[i]) return i * 64 + 63 - __builtin_clzll(w[i]);
        return -1;
    }

    friend bool operator==(const U256& a, const U256& b) { return a.w == b.w; }
    friend bool operator!=(const U256& a, const U256& b) { return a.w != b.w; }

    static int cmp(const U256& a, const U256& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.w[i] < b.w[i]) return -1;
            if (a.w[i] > b.w[i]) return 1;
        }
        return 0;
    }
    friend bool operator<(const U256& a, const U256& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const U256& a, const U256& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const U256& a, const U256& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const U256& a, const U256& b) { return cmp(a, b) >= 0; }
};

// a + b, returns carry-out.
inline u64 add_with_carry(U256& out, const U256& a, const U256& b) {
    u128 c = 0;
    for (int i = 0; i < 4; ++i) {
        c += (u128)a.w[i] + b.w[i];
        out.w[i] = (u64)c;
        c >>= 64;
    }
    return (u64)c;
}

// a - b, returns borrow-out (1 if a < b).
inline u64 sub_with_borrow(U256& out, const U256& a, const U256& b) {
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 d = (u128)a.w[i] - b.w[i] - borrow;
        out.w[i] = (u64)d;
        borrow = (d >> 64) & 1;
    }
    return (u64)borrow;
}

inline U256 operator+(const U256& a, const U256& b) {
    U256 r;
    if (add_with_carry(r, a, b)) throw std::overflow_error("U256 addition overflow");
    return r;
}

inline U256 operator-(const U256& a, const U256& b) {
    U256 r;
    if (sub_with_borrow(r, a, b)) throw std::overflow_error("U256 subtraction underflow");
    return r;
}

inline U256 shl1(const U256& a) {
    U256 r;
    u64 carry = 0;
    for (int i = 0; i < 4; ++i) {
        r.w[i] = (a.w[i] << 1) | carry;
        carry = a.w[i] >> 63;
    }
    if (carry) throw std::overflow_error("U256 shift overflow");
    return r;
}

/** 512-bit unsigned companion for products and wide reductions. */
struct U512 {
    std::array<u64, 8> w{};

    bool is_zero() const {
        for (auto v : w)
            if (v) return false;
        return true;
    }
    bool bit(unsigned i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    int top_bit() const {
        for (int i = 7; i >= 0; --i)
            if (w[i]) return i * 64 + 63 - __builtin_clzll(w[i]);
        return -1;
    }
    static int cmp(const U512& a, const U512& b) {
        for (int i = 7; i >= 0; --i) {
            if (a.w[i] < b.w[i]) return -1;
            if (a.w[i] > b.w[i]) return 1;
        }
        return 0;
    }
    static U512 from_u256(const U256& a) {
        U512 r;
        for (int i = 0; i < 4; ++i) r.w[i] = a.w[i];
        return r;
    }
    // Truncating; caller must know the value fits.
    U256 lo256() const { return U256(w[0], w[1], w[2], w[3]); }
    bool fits_u256() const { return (w[4] | w[5] | w[6] | w[7]) == 0; }
};

inline void sub_in_place(U512& a, const U512& b) {
    u128 borrow = 0;
    for (int i = 0; i < 8; ++i) {
        u128 d = (u128)a.w[i] - b.w[i] - borrow;
        a.w[i] = (u64)d;
        borrow = (d >> 64) & 1;
    }
}

inline U512 shl(const U512& a, unsigned n) {
    U512 r;
    unsigned limb = n >> 6, off = n & 63;
    for (int i = 7; i >= 0; --i) {
        u64 v = 0;
        int src = i - (int)limb;
        if (src >= 0) v = a.w[src] << off;
        if (off && src - 1 >= 0) v |= a.w[src - 1] >> (64 - off);
        r.w[i] = v;
    }
    return r;
}

inline U512 mul_wide(const U256& a, const U256& b) {
    U512 r;
    for (int i = 0; i < 4; ++i) {
        u64 carry = 0;
        for (int j = 0; j < 4; ++j) {
            u128 t = (u128)a.w[i] * b.w[j] + r.w[i + j] + carry;
            r.w[i + j] = (u64)t;
            carry = (u64)(t >> 64);
        }
        r.w[i + 4] = carry;
    }
    return r;
}

// x mod m via binary long division. Not fast; used for setup paths and oracles.
inline U256 mod_u512(const U512& x, const U256& m) {
    if (m.is_zero()) throw std::invalid_argument("mod_u512: zero modulus");
    U512 rem = x;
    U512 mm = U512::from_u256(m);
    int shift = rem.top_bit() - mm.top_bit();
    if (shift < 0) return rem.lo256();
    U512 d = shl(mm, (unsigned)shift);
    for (int i = shift; i >= 0; --i) {
        if (U512::cmp(rem, d) >= 0) sub_in_place(rem, d);
        // shift d right one bit
        for (int k = 0; k < 7; ++k) d.w[k] = (d.w[k] >> 1) | (d.w[k + 1] << 63);
        d.w[7] >>= 1;
    }
    return rem.lo256();
}

inline U256 mod_mul(const U256& a, const U256& b, const U256& m) {
    return mod_u512(mul_wide(a, b), m);
}

// Binary long division a = q*d + r.
inline void divmod_u256(const U256& a, const U256& d, U256& q, U256& r) {
    if (d.is_zero()) throw std::invalid_argument("divmod_u256: zero divisor");
    q = U256();
    r = U256();
    for (int i = a.top_bit(); i >= 0; --i) {
        r = shl1(r);
        if (a.bit((unsigned)i)) r.w[0] |= 1;
        if (r >= d) {
            U256 t;
            sub_with_borrow(t, r, d);
            r = t;
            q.w[(unsigned)i >> 6] |= 1ull << (i & 63);
        }
    }
}

inline U256 mod_add(const U256& a, const U256& b, const U256& m) {
    U256 r;
    u64 carry = add_with_carry(r, a, b);
    if (carry || r >= m) {
        U256 t;
        sub_with_borrow(t, r, m);
        return t;
    }
    return r;
}

// In-place divide by a small divisor, returns remainder.
inline u64 divmod_small(U256& a, u64 d) {
    u128 rem = 0;
    for (int i = 3; i >= 0; --i) {
        u128 cur = (rem << 64) | a.w[i];
        a.w[i] = (u64)(cur / d);
        rem = cur % d;
    }
    return (u64)rem;
}

inline U256 from_dec_string(std::string_view s) {
    U256 r;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("from_dec_string: bad digit");
        u128 carry = (u128)(c - '0');
        for (int i = 0; i < 4; ++i) {
            u128 t = (u128)r.w[i] * 10 + carry;
            r.w[i] = (u64)t;
            carry = t >> 64;
        }
        if (carry) throw std::overflow_error("from_dec_string: overflow");
    }
    return r;
}

inline std::string to_dec_string(U256 a) {
    if (a.is_zero()) return "0";
    std::string s;
    while (!a.is_zero()) s.push_back(char('0' + divmod_small(a, 10)));
    return std::string(s.rbegin(), s.rend());
}

inline std::string to_hex_string(const U256& a) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (int i = 3; i >= 0; --i)
        for (int nib = 15; nib >= 0; --nib) s.push_back(digits[(a.w[i] >> (nib * 4)) & 0xF]);
    size_t first = s.find_first_not_of('0');
    return first == std::string::npos ? "0" : s.substr(first);
}

// Correctly rounded (nearest-even) conversion.
inline double to_double(const U256& a) {
    int top = a.top_bit();
    if (top < 0) return 0.0;
    if (top < 53) {
        double d = 0.0;
        for (int i = 3; i >= 0; --i) d = d * 18446744073709551616.0 + (double)a.w[i];
        return d;  // exact, <= 53 significant bits
    }
    // Extract top 54 bits (53 + round bit), then sticky from the rest.
    int shift = top - 53;  // number of discarded low bits below the round bit's position
    u64 mant = 0;          // 54-bit value: bits [top .. top-53]
    for (int i = 0; i < 54; ++i) mant = (mant << 1) | (a.bit((unsigned)(top - i)) ? 1u : 0u);
    bool round = mant & 1;
    mant >>= 1;  // 53-bit mantissa
    bool sticky = false;
    for (int i = 0; i < shift && !sticky; ++i) sticky = a.bit((unsigned)i);
    if (round && (sticky || (mant & 1))) mant += 1;  // may carry into 54 bits; ldexp handles it
    return std::ldexp((double)mant, shift + 1);
}

inline void store_be(const U256& a, unsigned char out[32]) {
    for (int i = 0; i < 4; ++i) {
        u64 v = a.w[3 - i];
        for (int b = 0; b < 8; ++b) out[i * 8 + b] = (unsigned char)(v >> (56 - 8 * b));
    }
}

inline U256 load_be(const unsigned char in[32]) {
    U256 r;
    for (int i = 0; i < 4; ++i) {
        u64 v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | in[i * 8 + b];
        r.w[3 - i] = v;
    }
    return r;
}

/**
 * Signed big integer as sign + 256-bit magnitude. The codec keeps every
 * value well below 2^255, so magnitude arithmetic cannot wrap silently:
 * products are formed in 512 bits and checked on the way back down.
 */
struct SignedBig {
    bool neg = false;  // sign bit; zero is always stored non-negative
    U256 mag;

    SignedBig() = default;
    SignedBig(std::int64_t v) {
        if (v < 0) {
            neg = true;
            mag = U256((u64)(-(v + 1)) + 1);
        } else {
            mag = U256((u64)v);
        }
    }
    static SignedBig from_parts(bool negative, const U256& magnitude) {
        SignedBig r;
        r.mag = magnitude;
        r.neg = negative && !magnitude.is_zero();
        return r;
    }

    bool is_zero() const { return mag.is_zero(); }
    bool is_negative() const { return neg; }

    SignedBig negated() const { return from_parts(!neg, mag); }

    friend bool operator==(const SignedBig& a, const SignedBig& b) {
        return a.neg == b.neg && a.mag == b.mag;
    }
    friend bool operator!=(const SignedBig& a, const SignedBig& b) { return !(a == b); }

    friend SignedBig operator+(const SignedBig& a, const SignedBig& b) {
        if (a.neg == b.neg) {
            U256 m;
            if (add_with_carry(m, a.mag, b.mag)) throw std::overflow_error("SignedBig overflow");
            return from_parts(a.neg, m);
        }
        int c = U256::cmp(a.mag, b.mag);
        if (c == 0) return SignedBig();
        U256 m;
        if (c > 0) {
            sub_with_borrow(m, a.mag, b.mag);
            return from_parts(a.neg, m);
        }
        sub_with_borrow(m, b.mag, a.mag);
        return from_parts(b.neg, m);
    }
    friend SignedBig operator-(const SignedBig& a, const SignedBig& b) { return a + b.negated(); }

    friend SignedBig operator*(const SignedBig& a, const SignedBig& b) {
        U512 p = mul_wide(a.mag, b.mag);
        if (!p.fits_u256()) throw std::overflow_error("SignedBig multiplication overflow");
        return from_parts(a.neg != b.neg, p.lo256());
    }

    // -1, 0, 1 comparisons against another value
    static int cmp(const SignedBig& a, const SignedBig& b) {
        if (a.neg != b.neg) return a.neg ? -1 : 1;
        int c = U256::cmp(a.mag, b.mag);
        return a.neg ? -c : c;
    }
    friend bool operator<(const SignedBig& a, const SignedBig& b) { return cmp(a, b) < 0; }

    double to_double() const {
        double d = veridl::num::to_double(mag);
        return neg ? -d : d;
    }
    std::string to_string() const { return (neg ? "-" : "") + to_dec_string(mag); }
};

}  // namespace veridl::num
