#pragma once

#include "veridl/bn254.hpp"
#include "veridl/codec.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace veridl::group {

using num::SignedBig;
using num::U256;

using Gt = bn::Fq12;

/**
 * A committed group element. The protocol is written against a symmetric
 * pairing e: G x G -> GT; the backend is an asymmetric curve, so an element
 * carries its G1 form always and a G2 mirror when it ever stands on the
 * right-hand side of a pairing. Serialization covers exactly the forms held.
 */
struct Element {
    bn::G1 p1 = bn::G1::infinity();
    std::optional<bn::G2> p2;

    bool dual() const { return p2.has_value(); }

    friend bool operator==(const Element& a, const Element& b);
};

/** Pairing group descriptor; order matches the codec field order. */
struct GroupParams {
    U256 order;
    std::uint32_t security_bits;
};

const GroupParams& params();

/** Key material: secret exponent plus its public commitment v = g^s. */
struct KeyPair {
    U256 secret;       // in [1, order)
    Element public_v;  // dual form
    std::uint32_t security_bits = 128;
};

/** Seeded key generation; only the 128-bit level is supported. */
KeyPair genkey(std::uint32_t security_bits, std::uint64_t seed);

/** g^a in both source groups; a must be a canonical residue in [0, order). */
Element exp_g(const U256& a);

/** Commitment to a signed fixed-point value via its modular representative. */
Element commit(const SignedBig& value, bool with_g2);

Element exp_element(const Element& base, const U256& a);
Element mul(const Element& a, const Element& b);
Element inverse(const Element& a);

/** Product of all elements; order-independent. Nonempty input required. */
Element aggregate(std::span<const Element> elements);

/** e(A, B); B must carry its G2 mirror. */
Gt pair(const Element& a, const Element& b);

/** e(g, g)^a from a precomputed base pairing. */
Gt gt_exp(const U256& a);

Gt gt_mul(const Gt& a, const Gt& b);
Gt gt_identity();

/** SHA-512(domain tag || input) reduced into [0, order); deterministic. */
U256 hash_to_scalar(std::span<const std::uint8_t> bytes);

// --- multi-scalar helpers (verification fast path) ---------------------------

/** Sum of base_i * exp_i over signed small exponents, shared-doubling ladder. */
bn::G1 msm_g1(std::span<const bn::G1> bases, std::span<const SignedBig> exps);

/** base^|v| with sign folded into a point negation; fast for small |v|. */
bn::G1 exp_g1_signed(const bn::G1& base, const SignedBig& v);
bn::G2 exp_g2_signed(const bn::G2& base, const SignedBig& v);

// --- canonical encodings ------------------------------------------------------

// G1: 33 bytes (tag 0x00 infinity, 0x02/0x03 y-parity + 32-byte BE x)
// G2: 65 bytes (tag 0x00 infinity, 0x0a/0x0b y-parity + 64-byte BE x.c0, x.c1)
// Element: 2-byte BE length prefix, then G1 bytes, then G2 bytes when dual.
std::vector<std::uint8_t> g1_bytes(const bn::G1& p);
std::vector<std::uint8_t> g2_bytes(const bn::G2& p);
bn::G1 g1_from_bytes(std::span<const std::uint8_t> in);
bn::G2 g2_from_bytes(std::span<const std::uint8_t> in);

std::vector<std::uint8_t> element_bytes(const Element& e);
Element element_from_bytes(std::span<const std::uint8_t> in);

std::vector<std::uint8_t> scalar_bytes(const U256& s);
U256 scalar_from_bytes(std::span<const std::uint8_t> in);

/** GT serialization (used only for golden tests and the wire demo). */
std::vector<std::uint8_t> gt_bytes(const Gt& t);

}  // namespace veridl::group
