#pragma once

#include "veridl/u256.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace veridl::bn {

using num::U256;
using num::U512;
using num::u128;
using num::u64;

/**
 * Montgomery-form prime field with 4x64 limbs. Two instantiations exist:
 * Fp<0> is the curve base field, Fp<1> the scalar field (the group order
 * the protocol encodes values into).
 */
struct FpParams {
    U256 modulus;
    u64 n0;    // -modulus^{-1} mod 2^64
    U256 r1;   // 2^256 mod modulus (Montgomery one)
    U256 r2;   // 2^512 mod modulus
};

FpParams make_fp_params(const U256& modulus);

const U256& base_field_order();    // q
const U256& scalar_field_order();  // r, also the codec field order

template <int ID>
class Fp {
public:
    U256 v;  // Montgomery form

    static const FpParams& P() {
        static const FpParams params =
            make_fp_params(ID == 0 ? base_field_order() : scalar_field_order());
        return params;
    }

    Fp() = default;

    static Fp zero() { return Fp(); }
    static Fp one() { Fp r; r.v = P().r1; return r; }

    static Fp from_u256(const U256& a) { Fp r; r.v = mont_mul(a, P().r2); return r; }
    static Fp from_int(std::uint64_t a) { return from_u256(U256(a)); }
    U256 to_u256() const { return mont_mul(v, U256(1)); }

    bool is_zero() const { return v.is_zero(); }
    friend bool operator==(const Fp& a, const Fp& b) { return a.v == b.v; }
    friend bool operator!=(const Fp& a, const Fp& b) { return !(a.v == b.v); }

    friend Fp operator+(const Fp& a, const Fp& b) {
        Fp r;
        u64 carry = num::add_with_carry(r.v, a.v, b.v);
        if (carry || r.v >= P().modulus) {
            U256 t;
            num::sub_with_borrow(t, r.v, P().modulus);
            r.v = t;
        }
        return r;
    }
    friend Fp operator-(const Fp& a, const Fp& b) {
        Fp r;
        if (num::sub_with_borrow(r.v, a.v, b.v)) {
            U256 t;
            num::add_with_carry(t, r.v, P().modulus);
            r.v = t;
        }
        return r;
    }
    Fp neg() const { return zero() - *this; }
    Fp dbl() const { return *this + *this; }

    friend Fp operator*(const Fp& a, const Fp& b) {
        Fp r;
        r.v = mont_mul(a.v, b.v);
        return r;
    }
    Fp sqr() const { return *this * *this; }

    Fp pow(std::span<const u64> exp_limbs) const {
        Fp result = one(), base = *this;
        int top = -1;
        for (int i = (int)exp_limbs.size() - 1; i >= 0 && top < 0; --i)
            if (exp_limbs[i]) top = i * 64 + 63 - __builtin_clzll(exp_limbs[i]);
        for (int i = top; i >= 0; --i) {
            result = result.sqr();
            if ((exp_limbs[i >> 6] >> (i & 63)) & 1) result = result * base;
        }
        return result;
    }
    Fp pow(const U256& e) const { return pow(std::span<const u64>(e.w.data(), 4)); }

    Fp inv() const {
        // Fermat: a^(p-2)
        U256 e = P().modulus;
        U256 two(2);
        U256 em;
        num::sub_with_borrow(em, e, two);
        return pow(em);
    }

    // CIOS Montgomery multiplication.
    static U256 mont_mul(const U256& a, const U256& b) {
        const FpParams& p = P();
        u64 t[6] = {0, 0, 0, 0, 0, 0};
        for (int i = 0; i < 4; ++i) {
            u128 c = 0;
            for (int j = 0; j < 4; ++j) {
                u128 s = (u128)t[j] + (u128)a.w[j] * b.w[i] + c;
                t[j] = (u64)s;
                c = s >> 64;
            }
            u128 s = (u128)t[4] + c;
            t[4] = (u64)s;
            t[5] = (u64)(s >> 64);

            u64 m = t[0] * p.n0;
            c = ((u128)t[0] + (u128)m * p.modulus.w[0]) >> 64;
            for (int j = 1; j < 4; ++j) {
                u128 s2 = (u128)t[j] + (u128)m * p.modulus.w[j] + c;
                t[j - 1] = (u64)s2;
                c = s2 >> 64;
            }
            s = (u128)t[4] + c;
            t[3] = (u64)s;
            t[4] = t[5] + (u64)(s >> 64);
        }
        U256 r(t[0], t[1], t[2], t[3]);
        if (t[4] || r >= p.modulus) {
            U256 out;
            num::sub_with_borrow(out, r, p.modulus);
            return out;
        }
        return r;
    }
};

using Fq = Fp<0>;
using Fr = Fp<1>;

/** Fq2 = Fq[u] / (u^2 + 1). */
struct Fq2 {
    Fq c0, c1;

    static Fq2 zero() { return {}; }
    static Fq2 one() { return {Fq::one(), Fq::zero()}; }
    static Fq2 from_ints(std::uint64_t a, std::uint64_t b) { return {Fq::from_int(a), Fq::from_int(b)}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    friend bool operator==(const Fq2& a, const Fq2& b) { return a.c0 == b.c0 && a.c1 == b.c1; }
    friend bool operator!=(const Fq2& a, const Fq2& b) { return !(a == b); }

    friend Fq2 operator+(const Fq2& a, const Fq2& b) { return {a.c0 + b.c0, a.c1 + b.c1}; }
    friend Fq2 operator-(const Fq2& a, const Fq2& b) { return {a.c0 - b.c0, a.c1 - b.c1}; }
    Fq2 neg() const { return {c0.neg(), c1.neg()}; }
    Fq2 dbl() const { return {c0.dbl(), c1.dbl()}; }
    Fq2 conj() const { return {c0, c1.neg()}; }

    friend Fq2 operator*(const Fq2& a, const Fq2& b) {
        Fq t0 = a.c0 * b.c0, t1 = a.c1 * b.c1;
        Fq t2 = (a.c0 + a.c1) * (b.c0 + b.c1);
        return {t0 - t1, t2 - t0 - t1};
    }
    Fq2 sqr() const {
        Fq t0 = (c0 + c1) * (c0 - c1);
        Fq t1 = (c0 * c1).dbl();
        return {t0, t1};
    }
    Fq2 mul_fq(const Fq& s) const { return {c0 * s, c1 * s}; }
    Fq2 inv() const {
        Fq d = (c0.sqr() + c1.sqr()).inv();
        return {c0 * d, (c1 * d).neg()};
    }
    // multiply by xi = 9 + u, the sextic non-residue
    Fq2 mul_xi() const {
        Fq nine_c0 = c0.dbl().dbl().dbl() + c0;
        Fq nine_c1 = c1.dbl().dbl().dbl() + c1;
        return {nine_c0 - c1, c0 + nine_c1};
    }
    Fq2 pow(const U256& e) const {
        Fq2 result = one(), base = *this;
        for (int i = e.top_bit(); i >= 0; --i) {
            result = result.sqr();
            if (e.bit((unsigned)i)) result = result * base;
        }
        return result;
    }
};

/** Fq6 = Fq2[v] / (v^3 - xi). */
struct Fq6 {
    Fq2 c0, c1, c2;

    static Fq6 zero() { return {}; }
    static Fq6 one() { return {Fq2::one(), Fq2::zero(), Fq2::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    friend bool operator==(const Fq6& a, const Fq6& b) {
        return a.c0 == b.c0 && a.c1 == b.c1 && a.c2 == b.c2;
    }

    friend Fq6 operator+(const Fq6& a, const Fq6& b) { return {a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2}; }
    friend Fq6 operator-(const Fq6& a, const Fq6& b) { return {a.c0 - b.c0, a.c1 - b.c1, a.c2 - b.c2}; }
    Fq6 neg() const { return {c0.neg(), c1.neg(), c2.neg()}; }

    friend Fq6 operator*(const Fq6& a, const Fq6& b) {
        Fq2 t0 = a.c0 * b.c0, t1 = a.c1 * b.c1, t2 = a.c2 * b.c2;
        Fq2 r0 = t0 + ((a.c1 + a.c2) * (b.c1 + b.c2) - t1 - t2).mul_xi();
        Fq2 r1 = (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1 + t2.mul_xi();
        Fq2 r2 = (a.c0 + a.c2) * (b.c0 + b.c2) - t0 - t2 + t1;
        return {r0, r1, r2};
    }
    Fq6 sqr() const { return *this * *this; }

    // multiply by v
    Fq6 mul_v() const { return {c2.mul_xi(), c0, c1}; }

    Fq6 inv() const {
        Fq2 t0 = c0.sqr() - (c1 * c2).mul_xi();
        Fq2 t1 = c2.sqr().mul_xi() - c0 * c1;
        Fq2 t2 = c1.sqr() - c0 * c2;
        Fq2 f = (c0 * t0 + (c2 * t1 + c1 * t2).mul_xi()).inv();
        return {t0 * f, t1 * f, t2 * f};
    }
};

/** Fq12 = Fq6[w] / (w^2 - v); the pairing target group lives here. */
struct Fq12 {
    Fq6 c0, c1;

    static Fq12 zero() { return {}; }
    static Fq12 one() { return {Fq6::one(), Fq6::zero()}; }
    bool is_one() const { return *this == one(); }
    friend bool operator==(const Fq12& a, const Fq12& b) { return a.c0 == b.c0 && a.c1 == b.c1; }
    friend bool operator!=(const Fq12& a, const Fq12& b) { return !(a == b); }

    friend Fq12 operator*(const Fq12& a, const Fq12& b) {
        Fq6 t0 = a.c0 * b.c0, t1 = a.c1 * b.c1;
        Fq6 r0 = t0 + t1.mul_v();
        Fq6 r1 = (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1;
        return {r0, r1};
    }
    Fq12 sqr() const {
        Fq6 t = c0 * c1;
        Fq6 a = (c0 + c1) * (c0 + c1.mul_v()) - t - t.mul_v();
        return {a, t + t};
    }
    Fq12 conj() const { return {c0, c1.neg()}; }
    Fq12 inv() const {
        Fq6 d = (c0.sqr() - c1.sqr().mul_v()).inv();
        return {c0 * d, (c1 * d).neg()};
    }
    Fq12 pow(std::span<const u64> exp_limbs) const;
    Fq12 pow(const U256& e) const { return pow(std::span<const u64>(e.w.data(), 4)); }
    Fq12 frobenius() const;  // f -> f^q
};

/** Jacobian point over a field F; curve y^2 = x^3 + B with B from the traits. */
template <typename F>
struct Point {
    F X, Y, Z;  // infinity encoded as Z = 0

    static Point infinity() { return {F::one(), F::one(), F::zero()}; }
    bool is_infinity() const { return Z.is_zero(); }
};

using G1 = Point<Fq>;
using G2 = Point<Fq2>;

struct G1Affine {
    Fq x, y;
    bool inf = false;
};
struct G2Affine {
    Fq2 x, y;
    bool inf = false;
};

// --- group operations -------------------------------------------------------

const Fq& g1_b();
const Fq2& g2_b();

template <typename F>
Point<F> point_dbl(const Point<F>& p) {
    if (p.is_infinity() || p.Y.is_zero()) return Point<F>::infinity();
    F A = p.X.sqr();
    F B = p.Y.sqr();
    F C = B.sqr();
    F t = (p.X + B).sqr() - A - C;
    F D = t.dbl();
    F E = A.dbl() + A;
    F Fv = E.sqr();
    F X3 = Fv - D.dbl();
    F C8 = C.dbl().dbl().dbl();
    F Y3 = E * (D - X3) - C8;
    F Z3 = (p.Y * p.Z).dbl();
    return {X3, Y3, Z3};
}

template <typename F>
Point<F> point_add(const Point<F>& a, const Point<F>& b) {
    if (a.is_infinity()) return b;
    if (b.is_infinity()) return a;
    F Z1Z1 = a.Z.sqr(), Z2Z2 = b.Z.sqr();
    F U1 = a.X * Z2Z2, U2 = b.X * Z1Z1;
    F S1 = a.Y * Z2Z2 * b.Z, S2 = b.Y * Z1Z1 * a.Z;
    F H = U2 - U1, R = S2 - S1;
    if (H.is_zero()) {
        if (R.is_zero()) return point_dbl(a);
        return Point<F>::infinity();
    }
    F H2 = H.sqr(), H3 = H2 * H;
    F U1H2 = U1 * H2;
    F X3 = R.sqr() - H3 - U1H2.dbl();
    F Y3 = R * (U1H2 - X3) - S1 * H3;
    F Z3 = a.Z * b.Z * H;
    return {X3, Y3, Z3};
}

template <typename F>
Point<F> point_neg(const Point<F>& p) {
    return {p.X, p.Y.neg(), p.Z};
}

template <typename F>
bool point_eq(const Point<F>& a, const Point<F>& b) {
    if (a.is_infinity() || b.is_infinity()) return a.is_infinity() == b.is_infinity();
    F Z1Z1 = a.Z.sqr(), Z2Z2 = b.Z.sqr();
    if (!(a.X * Z2Z2 == b.X * Z1Z1)) return false;
    return a.Y * Z2Z2 * b.Z == b.Y * Z1Z1 * a.Z;
}

template <typename F>
Point<F> scalar_mul(const Point<F>& p, const U256& k) {
    Point<F> acc = Point<F>::infinity();
    for (int i = k.top_bit(); i >= 0; --i) {
        acc = point_dbl(acc);
        if (k.bit((unsigned)i)) acc = point_add(acc, p);
    }
    return acc;
}

G1Affine to_affine(const G1& p);
G2Affine to_affine(const G2& p);
inline G1 from_affine(const G1Affine& a) {
    return a.inf ? G1::infinity() : G1{a.x, a.y, Fq::one()};
}
inline G2 from_affine(const G2Affine& a) {
    return a.inf ? G2::infinity() : G2{a.x, a.y, Fq2::one()};
}

bool g1_on_curve(const G1Affine& p);
bool g2_on_curve(const G2Affine& p);
bool g2_in_subgroup(const G2Affine& p);

const G1& g1_generator();
const G2& g2_generator();

// Square roots; return false when the input is not a square.
bool fq_sqrt(const Fq& a, Fq& out);
bool fq2_sqrt(const Fq2& a, Fq2& out);

// --- pairing -----------------------------------------------------------------

/** One (G1, G2) leg of a pairing product. */
struct PairingLeg {
    G1Affine p;
    G2Affine q;
};

/** Miller loop over all legs sharing the accumulator squaring; no final exp. */
Fq12 miller_loop(std::span<const PairingLeg> legs);

/** Final exponentiation to the unique coset representative in GT. */
Fq12 final_exponentiation(const Fq12& f);

/** e(P, Q); identity if either input is the point at infinity. */
Fq12 pairing(const G1& p, const G2& q);

/** Product of pairings with one shared Miller loop and final exponentiation. */
Fq12 pairing_product(std::span<const PairingLeg> legs);

/** Runs once; verifies the curve constants and derived generators. */
void self_check();

}  // namespace veridl::bn
