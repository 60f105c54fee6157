#include "veridl/group.hpp"

#include "veridl/rng.hpp"
#include "veridl/sha512.hpp"

#include <stdexcept>

namespace veridl::group {

namespace {

constexpr const char* kHashTag = "veridl/hash-to-scalar/v1";

const bn::Fq12& base_pairing() {
    static const bn::Fq12 e = bn::pairing(bn::g1_generator(), bn::g2_generator());
    return e;
}

void put_u256_be(std::vector<std::uint8_t>& out, const U256& v) {
    unsigned char buf[32];
    num::store_be(v, buf);
    out.insert(out.end(), buf, buf + 32);
}

U256 take_u256_be(std::span<const std::uint8_t> in, std::size_t off) {
    if (in.size() < off + 32) throw std::invalid_argument("scalar bytes truncated");
    unsigned char buf[32];
    std::copy(in.begin() + off, in.begin() + off + 32, buf);
    return num::load_be(buf);
}

bool fq2_parity(const bn::Fq2& y) {
    U256 c0 = y.c0.to_u256();
    if (!c0.is_zero()) return c0.is_odd();
    return y.c1.to_u256().is_odd();
}

}  // namespace

bool operator==(const Element& a, const Element& b) {
    if (!bn::point_eq(a.p1, b.p1)) return false;
    if (a.dual() != b.dual()) return false;
    if (a.dual() && !bn::point_eq(*a.p2, *b.p2)) return false;
    return true;
}

const GroupParams& params() {
    static const GroupParams p = [] {
        bn::self_check();
        return GroupParams{bn::scalar_field_order(), 128};
    }();
    return p;
}

KeyPair genkey(std::uint32_t security_bits, std::uint64_t seed) {
    if (security_bits != 128) throw std::invalid_argument("genkey: unsupported security level");
    const auto& p = params();
    rng::HashDrbg drbg("veridl/genkey/v1", seed);
    U256 s;
    do {
        s = drbg.next_scalar(p.order);
    } while (s.is_zero());
    KeyPair kp;
    kp.secret = s;
    kp.public_v = exp_g(s);
    kp.security_bits = security_bits;
    return kp;
}

Element exp_g(const U256& a) {
    Element e;
    e.p1 = bn::scalar_mul(bn::g1_generator(), a);
    e.p2 = bn::scalar_mul(bn::g2_generator(), a);
    return e;
}

Element commit(const SignedBig& value, bool with_g2) {
    Element e;
    e.p1 = exp_g1_signed(bn::g1_generator(), value);
    if (with_g2) e.p2 = exp_g2_signed(bn::g2_generator(), value);
    return e;
}

Element exp_element(const Element& base, const U256& a) {
    Element e;
    e.p1 = bn::scalar_mul(base.p1, a);
    if (base.dual()) e.p2 = bn::scalar_mul(*base.p2, a);
    return e;
}

Element mul(const Element& a, const Element& b) {
    Element e;
    e.p1 = bn::point_add(a.p1, b.p1);
    if (a.dual() && b.dual()) e.p2 = bn::point_add(*a.p2, *b.p2);
    return e;
}

Element inverse(const Element& a) {
    Element e;
    e.p1 = bn::point_neg(a.p1);
    if (a.dual()) e.p2 = bn::point_neg(*a.p2);
    return e;
}

Element aggregate(std::span<const Element> elements) {
    if (elements.empty()) throw std::invalid_argument("aggregate: empty input");
    Element acc = elements.front();
    for (std::size_t i = 1; i < elements.size(); ++i) acc = mul(acc, elements[i]);
    return acc;
}

Gt pair(const Element& a, const Element& b) {
    if (!b.dual()) throw std::invalid_argument("pair: right element lacks its G2 form");
    bn::PairingLeg leg{bn::to_affine(a.p1), bn::to_affine(*b.p2)};
    return bn::pairing_product(std::span<const bn::PairingLeg>(&leg, 1));
}

Gt gt_exp(const U256& a) { return base_pairing().pow(a); }

Gt gt_mul(const Gt& a, const Gt& b) { return a * b; }
Gt gt_identity() { return bn::Fq12::one(); }

U256 hash_to_scalar(std::span<const std::uint8_t> bytes) {
    hash::Sha512 h;
    h.update(kHashTag, std::char_traits<char>::length(kHashTag));
    h.update(bytes.data(), bytes.size());
    auto digest = h.finish();
    num::U512 wide;
    for (int limb = 0; limb < 8; ++limb) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | digest[limb * 8 + b];
        wide.w[7 - limb] = v;
    }
    return num::mod_u512(wide, params().order);
}

bn::G1 msm_g1(std::span<const bn::G1> bases, std::span<const SignedBig> exps) {
    if (bases.size() != exps.size()) throw std::invalid_argument("msm_g1: length mismatch");
    int top = -1;
    for (const auto& e : exps) top = std::max(top, e.mag.top_bit());
    bn::G1 acc = bn::G1::infinity();
    for (int bit = top; bit >= 0; --bit) {
        acc = bn::point_dbl(acc);
        for (std::size_t i = 0; i < bases.size(); ++i) {
            if (exps[i].mag.bit((unsigned)bit))
                acc = bn::point_add(acc, exps[i].neg ? bn::point_neg(bases[i]) : bases[i]);
        }
    }
    return acc;
}

bn::G1 exp_g1_signed(const bn::G1& base, const SignedBig& v) {
    bn::G1 p = bn::scalar_mul(base, v.mag);
    return v.neg ? bn::point_neg(p) : p;
}

bn::G2 exp_g2_signed(const bn::G2& base, const SignedBig& v) {
    bn::G2 p = bn::scalar_mul(base, v.mag);
    return v.neg ? bn::point_neg(p) : p;
}

std::vector<std::uint8_t> g1_bytes(const bn::G1& p) {
    std::vector<std::uint8_t> out;
    out.reserve(33);
    bn::G1Affine a = bn::to_affine(p);
    if (a.inf) {
        out.assign(33, 0);
        return out;
    }
    out.push_back(a.y.to_u256().is_odd() ? 0x03 : 0x02);
    put_u256_be(out, a.x.to_u256());
    return out;
}

bn::G1 g1_from_bytes(std::span<const std::uint8_t> in) {
    if (in.size() != 33) throw std::invalid_argument("G1 encoding must be 33 bytes");
    if (in[0] == 0x00) {
        for (auto b : in)
            if (b) throw std::invalid_argument("bad G1 infinity encoding");
        return bn::G1::infinity();
    }
    if (in[0] != 0x02 && in[0] != 0x03) throw std::invalid_argument("bad G1 tag");
    U256 xv = take_u256_be(in, 1);
    if (!(xv < bn::base_field_order())) throw std::invalid_argument("G1 x out of field");
    bn::Fq x = bn::Fq::from_u256(xv);
    bn::Fq rhs = x.sqr() * x + bn::g1_b();
    bn::Fq y;
    if (!bn::fq_sqrt(rhs, y)) throw std::invalid_argument("G1 x not on curve");
    bool want_odd = in[0] == 0x03;
    if (y.to_u256().is_odd() != want_odd) y = y.neg();
    return bn::from_affine(bn::G1Affine{x, y, false});
}

std::vector<std::uint8_t> g2_bytes(const bn::G2& p) {
    std::vector<std::uint8_t> out;
    out.reserve(65);
    bn::G2Affine a = bn::to_affine(p);
    if (a.inf) {
        out.assign(65, 0);
        return out;
    }
    out.push_back(fq2_parity(a.y) ? 0x0b : 0x0a);
    put_u256_be(out, a.x.c0.to_u256());
    put_u256_be(out, a.x.c1.to_u256());
    return out;
}

bn::G2 g2_from_bytes(std::span<const std::uint8_t> in) {
    if (in.size() != 65) throw std::invalid_argument("G2 encoding must be 65 bytes");
    if (in[0] == 0x00) {
        for (auto b : in)
            if (b) throw std::invalid_argument("bad G2 infinity encoding");
        return bn::G2::infinity();
    }
    if (in[0] != 0x0a && in[0] != 0x0b) throw std::invalid_argument("bad G2 tag");
    U256 x0 = take_u256_be(in, 1), x1 = take_u256_be(in, 33);
    if (!(x0 < bn::base_field_order()) || !(x1 < bn::base_field_order()))
        throw std::invalid_argument("G2 x out of field");
    bn::Fq2 x{bn::Fq::from_u256(x0), bn::Fq::from_u256(x1)};
    bn::Fq2 rhs = x.sqr() * x + bn::g2_b();
    bn::Fq2 y;
    if (!bn::fq2_sqrt(rhs, y)) throw std::invalid_argument("G2 x not on curve");
    bool want_odd = in[0] == 0x0b;
    if (fq2_parity(y) != want_odd) y = y.neg();
    bn::G2Affine aff{x, y, false};
    if (!bn::g2_in_subgroup(aff)) throw std::invalid_argument("G2 point outside prime subgroup");
    return bn::from_affine(aff);
}

std::vector<std::uint8_t> element_bytes(const Element& e) {
    std::vector<std::uint8_t> payload = g1_bytes(e.p1);
    if (e.dual()) {
        auto g2 = g2_bytes(*e.p2);
        payload.insert(payload.end(), g2.begin(), g2.end());
    }
    std::vector<std::uint8_t> out;
    out.reserve(payload.size() + 2);
    out.push_back((std::uint8_t)(payload.size() >> 8));
    out.push_back((std::uint8_t)(payload.size() & 0xFF));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Element element_from_bytes(std::span<const std::uint8_t> in) {
    if (in.size() < 2) throw std::invalid_argument("element bytes truncated");
    std::size_t len = ((std::size_t)in[0] << 8) | in[1];
    if (in.size() != len + 2) throw std::invalid_argument("element length mismatch");
    Element e;
    if (len == 33) {
        e.p1 = g1_from_bytes(in.subspan(2, 33));
    } else if (len == 98) {
        e.p1 = g1_from_bytes(in.subspan(2, 33));
        e.p2 = g2_from_bytes(in.subspan(35, 65));
    } else {
        throw std::invalid_argument("unsupported element length");
    }
    return e;
}

std::vector<std::uint8_t> scalar_bytes(const U256& s) {
    std::vector<std::uint8_t> out;
    put_u256_be(out, s);
    return out;
}

U256 scalar_from_bytes(std::span<const std::uint8_t> in) {
    if (in.size() != 32) throw std::invalid_argument("scalar must be 32 bytes");
    return take_u256_be(in, 0);
}

std::vector<std::uint8_t> gt_bytes(const Gt& t) {
    std::vector<std::uint8_t> out;
    const bn::Fq2* coeffs[6] = {&t.c0.c0, &t.c0.c1, &t.c0.c2, &t.c1.c0, &t.c1.c1, &t.c1.c2};
    for (const auto* c : coeffs) {
        put_u256_be(out, c->c0.to_u256());
        put_u256_be(out, c->c1.to_u256());
    }
    return out;
}

}  // namespace veridl::group
