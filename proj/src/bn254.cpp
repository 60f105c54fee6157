#include "veridl/bn254.hpp"

#include <mutex>
#include <stdexcept>

namespace veridl::bn {

namespace {

// BN parameter z; q, r and the Miller loop count all derive from it.
constexpr u64 kCurveParamZ = 4965661367192848881ull;

const char* kBaseFieldDec =
    "21888242871839275222246405745257275088696311157297823662689037894645226208583";
const char* kScalarFieldDec =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";

// Minimal arbitrary-precision helper for one-time constant derivation.
struct BigN {
    std::vector<u64> w;  // little-endian

    void trim() {
        while (!w.empty() && w.back() == 0) w.pop_back();
    }
    bool is_zero() const { return w.empty(); }
    int top_bit() const {
        if (w.empty()) return -1;
        return (int)(w.size() - 1) * 64 + 63 - __builtin_clzll(w.back());
    }
    bool bit(int i) const {
        std::size_t limb = (std::size_t)i >> 6;
        if (limb >= w.size()) return false;
        return (w[limb] >> (i & 63)) & 1;
    }
    static BigN from_u64(u64 v) {
        BigN r;
        if (v) r.w.push_back(v);
        return r;
    }
    static BigN from_u256(const U256& v) {
        BigN r;
        r.w.assign(v.w.begin(), v.w.end());
        r.trim();
        return r;
    }
    static int cmp(const BigN& a, const BigN& b) {
        if (a.w.size() != b.w.size()) return a.w.size() < b.w.size() ? -1 : 1;
        for (int i = (int)a.w.size() - 1; i >= 0; --i) {
            if (a.w[i] != b.w[i]) return a.w[i] < b.w[i] ? -1 : 1;
        }
        return 0;
    }
};

BigN big_add(const BigN& a, const BigN& b) {
    BigN r;
    r.w.resize(std::max(a.w.size(), b.w.size()) + 1, 0);
    u128 c = 0;
    for (std::size_t i = 0; i < r.w.size(); ++i) {
        c += i < a.w.size() ? a.w[i] : 0;
        c += i < b.w.size() ? b.w[i] : 0;
        r.w[i] = (u64)c;
        c >>= 64;
    }
    r.trim();
    return r;
}

BigN big_sub(const BigN& a, const BigN& b) {
    BigN r;
    r.w.resize(a.w.size(), 0);
    u128 borrow = 0;
    for (std::size_t i = 0; i < a.w.size(); ++i) {
        u128 d = (u128)a.w[i] - (i < b.w.size() ? b.w[i] : 0) - borrow;
        r.w[i] = (u64)d;
        borrow = (d >> 64) & 1;
    }
    if (borrow) throw std::logic_error("BigN underflow");
    r.trim();
    return r;
}

BigN big_mul(const BigN& a, const BigN& b) {
    BigN r;
    if (a.is_zero() || b.is_zero()) return r;
    r.w.resize(a.w.size() + b.w.size(), 0);
    for (std::size_t i = 0; i < a.w.size(); ++i) {
        u64 carry = 0;
        for (std::size_t j = 0; j < b.w.size(); ++j) {
            u128 t = (u128)a.w[i] * b.w[j] + r.w[i + j] + carry;
            r.w[i + j] = (u64)t;
            carry = (u64)(t >> 64);
        }
        r.w[i + b.w.size()] += carry;
    }
    r.trim();
    return r;
}

// Binary long division: a = q*d + rem.
void big_divmod(const BigN& a, const BigN& d, BigN& q, BigN& rem) {
    if (d.is_zero()) throw std::logic_error("BigN division by zero");
    q.w.assign(a.w.size(), 0);
    rem = BigN();
    for (int i = a.top_bit(); i >= 0; --i) {
        // rem = rem*2 + bit
        u64 carry = a.bit(i) ? 1 : 0;
        for (std::size_t k = 0; k < rem.w.size(); ++k) {
            u64 hi = rem.w[k] >> 63;
            rem.w[k] = (rem.w[k] << 1) | carry;
            carry = hi;
        }
        if (carry) rem.w.push_back(carry);
        if (BigN::cmp(rem, d) >= 0) {
            rem = big_sub(rem, d);
            q.w[(std::size_t)i >> 6] |= 1ull << (i & 63);
        }
    }
    q.trim();
}

struct PairingConstants {
    U256 miller_count;             // 6z + 2
    std::vector<u64> hard_exp;     // (q^4 - q^2 + 1) / r
    Fq2 frob_gamma[6];             // xi^(k(q-1)/6), k = 0..5
    Fq2 twist_frob_x;              // xi^((q-1)/3)
    Fq2 twist_frob_y;              // xi^((q-1)/2)
    Fq2 xi;
    Fq2 b_twist;
    G1 g1_gen;
    G2 g2_gen;
};

U256 half_even(const U256& a) {  // a/2 for even a
    U256 r = a;
    for (int k = 0; k < 3; ++k) r.w[k] = (r.w[k] >> 1) | (r.w[k + 1] << 63);
    r.w[3] >>= 1;
    return r;
}

U256 div_small(const U256& a, u64 d) {
    U256 r = a;
    num::divmod_small(r, d);
    return r;
}

const PairingConstants& constants();

G2 derive_g2_generator(const Fq2& b_twist) {
    const U256& q = base_field_order();
    const U256& r = scalar_field_order();
    U256 two_q;
    if (num::add_with_carry(two_q, q, q)) throw std::logic_error("2q overflow");
    U256 cofactor;
    num::sub_with_borrow(cofactor, two_q, r);

    for (u64 cnt = 0;; ++cnt) {
        Fq2 x{Fq::from_int(cnt), Fq::one()};
        Fq2 rhs = x.sqr() * x + b_twist;
        Fq2 y;
        if (!fq2_sqrt(rhs, y)) continue;
        // canonical choice: even y.c0 (or even y.c1 when y.c0 == 0)
        U256 yc0 = y.c0.to_u256();
        bool odd = y.c0.is_zero() ? y.c1.to_u256().is_odd() : yc0.is_odd();
        if (odd) y = y.neg();
        G2 cand = scalar_mul(from_affine(G2Affine{x, y, false}), cofactor);
        if (cand.is_infinity()) continue;
        if (!scalar_mul(cand, r).is_infinity())
            throw std::logic_error("twist cofactor check failed");
        // normalize Z to one for a clean canonical generator
        G2Affine aff = to_affine(cand);
        return from_affine(aff);
    }
}

const PairingConstants& constants() {
    static const PairingConstants c = [] {
        // Cross-check the field moduli against their polynomial forms in z.
        BigN z = BigN::from_u64(kCurveParamZ);
        BigN z2 = big_mul(z, z);
        BigN z3 = big_mul(z2, z);
        BigN z4 = big_mul(z2, z2);
        auto scaled = [](const BigN& v, u64 k) { return big_mul(v, BigN::from_u64(k)); };
        BigN q_poly = big_add(big_add(scaled(z4, 36), scaled(z3, 36)),
                              big_add(scaled(z2, 24), big_add(scaled(z, 6), BigN::from_u64(1))));
        BigN r_poly = big_add(big_add(scaled(z4, 36), scaled(z3, 36)),
                              big_add(scaled(z2, 18), big_add(scaled(z, 6), BigN::from_u64(1))));
        U256 q = num::from_dec_string(kBaseFieldDec);
        U256 r = num::from_dec_string(kScalarFieldDec);
        if (BigN::cmp(q_poly, BigN::from_u256(q)) != 0 ||
            BigN::cmp(r_poly, BigN::from_u256(r)) != 0)
            throw std::logic_error("BN254 modulus derivation mismatch");

        PairingConstants k{};
        // 6z + 2 fits in 65 bits
        U256 loop = num::mul_wide(U256(kCurveParamZ), U256(6)).lo256();
        num::add_with_carry(loop, loop, U256(2));
        k.miller_count = loop;

        // hard part exponent (q^4 - q^2 + 1) / r, exact by construction
        BigN qb = BigN::from_u256(q);
        BigN q2 = big_mul(qb, qb);
        BigN q4 = big_mul(q2, q2);
        BigN numer = big_add(big_sub(q4, q2), BigN::from_u64(1));
        BigN quot, rem;
        big_divmod(numer, BigN::from_u256(r), quot, rem);
        if (!rem.is_zero()) throw std::logic_error("hard exponent not divisible by r");
        k.hard_exp = quot.w;

        k.xi = Fq2::from_ints(9, 1);
        k.b_twist = Fq2{Fq::from_int(3), Fq::zero()} * k.xi.inv();

        // Frobenius coefficients, all powers of xi
        U256 qm1;
        num::sub_with_borrow(qm1, q, U256(1));
        U256 e6 = div_small(qm1, 6);
        Fq2 gamma = k.xi.pow(e6);
        k.frob_gamma[0] = Fq2::one();
        for (int i = 1; i < 6; ++i) k.frob_gamma[i] = k.frob_gamma[i - 1] * gamma;
        k.twist_frob_x = k.xi.pow(div_small(qm1, 3));
        k.twist_frob_y = k.xi.pow(half_even(qm1));

        k.g1_gen = G1{Fq::one(), Fq::from_int(2), Fq::one()};
        if (!g1_on_curve(to_affine(k.g1_gen))) throw std::logic_error("G1 generator off curve");
        k.g2_gen = derive_g2_generator(k.b_twist);
        return k;
    }();
    return c;
}

// line value l(P) for the tangent at T; also advances T to 2T
Fq12 doubling_step(G2& t, const G1Affine& p) {
    Fq2 A = t.X.sqr();
    Fq2 B = t.Y.sqr();
    Fq2 C = B.sqr();
    Fq2 D = ((t.X + B).sqr() - A - C).dbl();
    Fq2 E = A.dbl() + A;
    Fq2 F = E.sqr();
    Fq2 Zsq = t.Z.sqr();
    Fq2 X3 = F - D.dbl();
    Fq2 C8 = C.dbl().dbl().dbl();
    Fq2 Y3 = E * (D - X3) - C8;
    Fq2 Z3 = (t.Y * t.Z).dbl();

    // l = -yP*(Z3*Z^2)  +  (E*Z^2)*xP * w  +  (2Y^2 - E*X) * v*w
    Fq12 line = Fq12::zero();
    line.c0.c0 = (Z3 * Zsq).mul_fq(p.y).neg();
    line.c1.c0 = (E * Zsq).mul_fq(p.x);
    line.c1.c1 = B.dbl() - E * t.X;

    t = G2{X3, Y3, Z3};
    return line;
}

// line value l(P) for the chord through T and affine Q; advances T to T + Q
Fq12 addition_step(G2& t, const G2Affine& q, const G1Affine& p) {
    Fq2 Zsq = t.Z.sqr();
    Fq2 U2 = q.x * Zsq;
    Fq2 S2 = q.y * Zsq * t.Z;
    Fq2 H = U2 - t.X;
    Fq2 R = S2 - t.Y;
    Fq2 H2 = H.sqr();
    Fq2 H3 = H2 * H;
    Fq2 U1H2 = t.X * H2;
    Fq2 X3 = R.sqr() - H3 - U1H2.dbl();
    Fq2 Y3 = R * (U1H2 - X3) - t.Y * H3;
    Fq2 Z3 = t.Z * H;

    Fq12 line = Fq12::zero();
    line.c0.c0 = Z3.mul_fq(p.y).neg();
    line.c1.c0 = R.mul_fq(p.x);
    line.c1.c1 = q.y * Z3 - R * q.x;

    t = G2{X3, Y3, Z3};
    return line;
}

G2Affine frobenius_twist(const G2Affine& q) {
    const auto& k = constants();
    return G2Affine{q.x.conj() * k.twist_frob_x, q.y.conj() * k.twist_frob_y, q.inf};
}

}  // namespace

FpParams make_fp_params(const U256& modulus) {
    FpParams p;
    p.modulus = modulus;
    u64 inv = 1;
    for (int i = 0; i < 6; ++i) inv *= 2 - modulus.w[0] * inv;  // Newton mod 2^64
    p.n0 = ~inv + 1;                                            // -modulus^{-1}
    U512 r1;
    r1.w[4] = 1;  // 2^256
    p.r1 = num::mod_u512(r1, modulus);
    p.r2 = num::mod_u512(num::shl(U512::from_u256(p.r1), 256), modulus);
    return p;
}

const U256& base_field_order() {
    static const U256 q = num::from_dec_string(kBaseFieldDec);
    return q;
}
const U256& scalar_field_order() {
    static const U256 r = num::from_dec_string(kScalarFieldDec);
    return r;
}

Fq12 Fq12::pow(std::span<const u64> exp_limbs) const {
    Fq12 result = one(), base = *this;
    int top = -1;
    for (int i = (int)exp_limbs.size() - 1; i >= 0 && top < 0; --i)
        if (exp_limbs[i]) top = i * 64 + 63 - __builtin_clzll(exp_limbs[i]);
    for (int i = top; i >= 0; --i) {
        result = result.sqr();
        if ((exp_limbs[i >> 6] >> (i & 63)) & 1) result = result * base;
    }
    return result;
}

Fq12 Fq12::frobenius() const {
    const auto& g = constants().frob_gamma;
    Fq12 r;
    r.c0.c0 = c0.c0.conj();
    r.c0.c1 = c0.c1.conj() * g[2];
    r.c0.c2 = c0.c2.conj() * g[4];
    r.c1.c0 = c1.c0.conj() * g[1];
    r.c1.c1 = c1.c1.conj() * g[3];
    r.c1.c2 = c1.c2.conj() * g[5];
    return r;
}

const Fq& g1_b() {
    static const Fq b = Fq::from_int(3);
    return b;
}
const Fq2& g2_b() { return constants().b_twist; }

G1Affine to_affine(const G1& p) {
    if (p.is_infinity()) return G1Affine{Fq::zero(), Fq::zero(), true};
    Fq zi = p.Z.inv();
    Fq zi2 = zi.sqr();
    return G1Affine{p.X * zi2, p.Y * zi2 * zi, false};
}

G2Affine to_affine(const G2& p) {
    if (p.is_infinity()) return G2Affine{Fq2::zero(), Fq2::zero(), true};
    Fq2 zi = p.Z.inv();
    Fq2 zi2 = zi.sqr();
    return G2Affine{p.X * zi2, p.Y * zi2 * zi, false};
}

bool g1_on_curve(const G1Affine& p) {
    if (p.inf) return true;
    return p.y.sqr() == p.x.sqr() * p.x + g1_b();
}

bool g2_on_curve(const G2Affine& p) {
    if (p.inf) return true;
    return p.y.sqr() == p.x.sqr() * p.x + g2_b();
}

bool g2_in_subgroup(const G2Affine& p) {
    if (p.inf) return true;
    if (!g2_on_curve(p)) return false;
    return scalar_mul(from_affine(p), scalar_field_order()).is_infinity();
}

const G1& g1_generator() { return constants().g1_gen; }
const G2& g2_generator() { return constants().g2_gen; }

bool fq_sqrt(const Fq& a, Fq& out) {
    if (a.is_zero()) {
        out = Fq::zero();
        return true;
    }
    // q = 3 mod 4: candidate a^((q+1)/4)
    U256 e;
    num::add_with_carry(e, base_field_order(), U256(1));
    for (int k = 0; k < 3; ++k) e.w[k] = (e.w[k] >> 2) | (e.w[k + 1] << 62);
    e.w[3] >>= 2;
    Fq s = a.pow(e);
    if (!(s.sqr() == a)) return false;
    out = s;
    return true;
}

bool fq2_sqrt(const Fq2& a, Fq2& out) {
    if (a.is_zero()) {
        out = Fq2::zero();
        return true;
    }
    static const Fq inv2 = Fq::from_int(2).inv();
    if (a.c1.is_zero()) {
        Fq s;
        if (fq_sqrt(a.c0, s)) {
            out = Fq2{s, Fq::zero()};
            return true;
        }
        if (fq_sqrt(a.c0.neg(), s)) {
            out = Fq2{Fq::zero(), s};
            return true;
        }
        return false;
    }
    Fq norm = a.c0.sqr() + a.c1.sqr();
    Fq alpha;
    if (!fq_sqrt(norm, alpha)) return false;
    Fq delta = (a.c0 + alpha) * inv2;
    Fq x0;
    if (!fq_sqrt(delta, x0)) {
        delta = (a.c0 - alpha) * inv2;
        if (!fq_sqrt(delta, x0)) return false;
    }
    if (x0.is_zero()) return false;
    Fq x1 = a.c1 * (x0.dbl()).inv();
    Fq2 cand{x0, x1};
    if (!(cand.sqr() == a)) return false;
    out = cand;
    return true;
}

Fq12 miller_loop(std::span<const PairingLeg> legs) {
    const auto& k = constants();
    std::vector<G2> ts;
    std::vector<PairingLeg> live;
    for (const auto& leg : legs) {
        if (leg.p.inf || leg.q.inf) continue;  // identity contribution
        live.push_back(leg);
        ts.push_back(from_affine(leg.q));
    }
    Fq12 f = Fq12::one();
    if (live.empty()) return f;

    const U256& s = k.miller_count;
    for (int i = s.top_bit() - 1; i >= 0; --i) {
        f = f.sqr();
        for (std::size_t l = 0; l < live.size(); ++l) f = f * doubling_step(ts[l], live[l].p);
        if (s.bit((unsigned)i)) {
            for (std::size_t l = 0; l < live.size(); ++l)
                f = f * addition_step(ts[l], live[l].q, live[l].p);
        }
    }
    // The two extra Frobenius legs of the BN optimal ate pairing.
    for (std::size_t l = 0; l < live.size(); ++l) {
        G2Affine q1 = frobenius_twist(live[l].q);
        G2Affine q2 = frobenius_twist(q1);
        q2.y = q2.y.neg();
        f = f * addition_step(ts[l], q1, live[l].p);
        f = f * addition_step(ts[l], q2, live[l].p);
    }
    return f;
}

Fq12 final_exponentiation(const Fq12& f) {
    const auto& k = constants();
    // easy part: f^((q^6 - 1)(q^2 + 1))
    Fq12 g = f.conj() * f.inv();
    g = g.frobenius().frobenius() * g;
    // hard part
    return g.pow(std::span<const u64>(k.hard_exp.data(), k.hard_exp.size()));
}

Fq12 pairing_product(std::span<const PairingLeg> legs) {
    return final_exponentiation(miller_loop(legs));
}

Fq12 pairing(const G1& p, const G2& q) {
    PairingLeg leg{to_affine(p), to_affine(q)};
    return pairing_product(std::span<const PairingLeg>(&leg, 1));
}

void self_check() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        const auto& k = constants();
        (void)k;
        G1 g = g1_generator();
        G2 h = g2_generator();
        Fq12 e = pairing(g, h);
        if (e.is_one()) throw std::logic_error("pairing degenerate");
        if (!e.pow(scalar_field_order()).is_one())
            throw std::logic_error("pairing target order check failed");
        Fq12 e2 = pairing(point_dbl(g), h);
        if (!(e2 == e.sqr())) throw std::logic_error("pairing bilinearity check failed");
    });
}

}  // namespace veridl::bn
