#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veridl/group.hpp"
#include "veridl/rng.hpp"
#include "veridl/sha512.hpp"

#ifdef VERIDL_HAVE_OPENSSL
#include <openssl/evp.h>
#endif

#include <algorithm>
#include <set>

using namespace veridl;
using group::Element;
using num::U256;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("sha512 standard vectors") {
    auto abc = hash::Sha512::digest("abc");
    CHECK(hash::hex(abc.data(), abc.size()) ==
          "ddaf35a193617abacc417349ae20413112e6fa4e89a97ea20a9eeee64b55d39a"
          "2192992a274fc1a836ba3c23a3feebbd454d4423643ce80e2a9ac94fa54ca49f");
    auto empty = hash::Sha512::digest("", 0);
    CHECK(hash::hex(empty.data(), empty.size()) ==
          "cf83e1357eefb8bdf1542850d66d8007d620e4050b5715dc83f4a921d36ce9ce"
          "47d0d13c5d85f2b0ff8318d2877eec2f63b931bd47417a81a538327af927da3e");
    // split updates agree with one-shot hashing
    std::string two(200, 'x');
    hash::Sha512 h;
    h.update(two.data(), 150);
    h.update(two.data() + 150, 50);
    CHECK(hash::Sha512::digest(two) == h.finish());
}

#ifdef VERIDL_HAVE_OPENSSL
TEST_CASE("sha512 cross-check against openssl") {
    rng::SplitMix rng(99);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint8_t> msg(rng.below(500));
        for (auto& b : msg) b = (std::uint8_t)rng.next();
        auto mine = hash::Sha512::digest(msg.data(), msg.size());
        unsigned char ref[64];
        unsigned int len = 0;
        EVP_Digest(msg.data(), msg.size(), ref, &len, EVP_sha512(), nullptr);
        REQUIRE(len == 64);
        CHECK(std::equal(mine.begin(), mine.end(), ref));
    }
}
#endif

TEST_CASE("generator golden bytes") {
    Element g = group::exp_g(U256(1));
    auto b1 = group::g1_bytes(g.p1);
    CHECK(hash::hex(b1.data(), b1.size()) ==
          "020000000000000000000000000000000000000000000000000000000000000001");
    auto b2 = group::g2_bytes(*g.p2);
    CHECK(hash::hex(b2.data(), b2.size()) ==
          "0b27e9efef6ee113cf734b381e25c4d6456b5ab4424239fe33a652fcaf1c0ee3de"
          "114505f49c022a717f6b6828dd8718d63457999476550c5815e2dc00c315fbaa");
}

TEST_CASE("exp_g identities") {
    CHECK(group::exp_g(U256(0)).p1.is_infinity());
    rng::SplitMix rng(1);
    U256 a(rng.next()), b(rng.next());
    U256 ab = num::mod_add(a, b, group::params().order);
    CHECK(group::mul(group::exp_g(a), group::exp_g(b)) == group::exp_g(ab));
}

TEST_CASE("genkey determinism and key identity") {
    auto k1 = group::genkey(128, 7);
    auto k2 = group::genkey(128, 7);
    CHECK(k1.secret == k2.secret);
    CHECK(k1.public_v == k2.public_v);
    CHECK_THROWS_AS((void)group::genkey(80, 1), std::invalid_argument);

    // e(v, g) = e(g, g)^s
    Element g = group::exp_g(U256(1));
    CHECK(group::pair(k1.public_v, g) == group::gt_exp(k1.secret));

    std::set<std::string> secrets;
    for (std::uint64_t s = 0; s < 100; ++s)
        secrets.insert(num::to_dec_string(group::genkey(128, s).secret));
    CHECK(secrets.size() == 100);
}

TEST_CASE("pairing wrapper and gt identities") {
    Element g = group::exp_g(U256(1));
    CHECK(group::pair(g, group::exp_g(U256(0))) == group::gt_identity());
    CHECK(group::pair(group::exp_g(U256(3)), group::exp_g(U256(5))) == group::gt_exp(U256(15)));
    CHECK(group::gt_exp(U256(0)) == group::gt_identity());
    U256 pm1;
    num::sub_with_borrow(pm1, group::params().order, U256(1));
    CHECK(group::gt_mul(group::gt_exp(pm1), group::gt_exp(U256(1))) == group::gt_identity());
    rng::SplitMix rng(2);
    U256 a(rng.next()), b(rng.next());
    CHECK(group::gt_mul(group::gt_exp(a), group::gt_exp(b)) ==
          group::gt_exp(num::mod_add(a, b, group::params().order)));
}

TEST_CASE("aggregate") {
    rng::SplitMix rng(3);
    std::vector<Element> xs;
    for (int i = 0; i < 9; ++i) xs.push_back(group::exp_g(U256(rng.next())));
    CHECK(group::aggregate(std::span(xs).subspan(0, 1)) == xs[0]);

    Element inv = group::inverse(xs[0]);
    std::vector<Element> pairup{xs[0], inv};
    CHECK(group::aggregate(pairup).p1.is_infinity());

    Element base = group::aggregate(xs);
    for (int shuffle = 0; shuffle < 50; ++shuffle) {
        for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[rng.below(i)]);
        CHECK(group::aggregate(xs) == base);
    }
    std::vector<Element> none;
    CHECK_THROWS_AS((void)group::aggregate(none), std::invalid_argument);
}

TEST_CASE("hash_to_scalar determinism, golden, avalanche") {
    auto a = group::hash_to_scalar(bytes_of("veridl"));
    auto b = group::hash_to_scalar(bytes_of("veridl"));
    CHECK(a == b);
    CHECK(a < group::params().order);

    CHECK(num::to_hex_string(group::hash_to_scalar({})) ==
          "218f273e43827f06014f4485d6fb72d232a5795932ab08361df8862489b4b1d8");

    rng::SplitMix rng(4);
    int distinct = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::uint8_t> msg(16);
        for (auto& c : msg) c = (std::uint8_t)rng.next();
        auto h1 = group::hash_to_scalar(msg);
        msg[rng.below(16)] ^= (std::uint8_t)(1u << rng.below(8));
        auto h2 = group::hash_to_scalar(msg);
        if (h1 != h2) ++distinct;
    }
    CHECK(distinct == 1000);
}

TEST_CASE("serialization roundtrips and canonicality") {
    rng::SplitMix rng(5);
    for (int i = 0; i < 25; ++i) {
        U256 k(rng.next(), rng.next(), 0, 0);
        Element e = group::exp_g(k);
        auto dual = group::element_bytes(e);
        Element back = group::element_from_bytes(dual);
        CHECK(back == e);
        CHECK(group::element_bytes(back) == dual);  // canonical: byte-stable

        Element g1only{e.p1, std::nullopt};
        auto short_form = group::element_bytes(g1only);
        CHECK(short_form.size() == 35);
        CHECK(group::element_from_bytes(short_form) == g1only);

        auto s = group::scalar_bytes(k);
        CHECK(group::scalar_from_bytes(s) == k);
    }
    // infinity
    Element idg = group::exp_g(U256(0));
    CHECK(group::element_from_bytes(group::element_bytes(idg)) == idg);

    // corrupt tag rejected
    auto enc = group::element_bytes(group::exp_g(U256(9)));
    enc[2] = 0x07;
    CHECK_THROWS_AS((void)group::element_from_bytes(enc), std::invalid_argument);
}

TEST_CASE("signed exponent helper matches mod-p exponent") {
    const auto& order = group::params().order;
    num::SignedBig v(-12345);
    U256 residue = codec::mod_repr(v, order);
    Element direct = group::exp_g(residue);
    CHECK(bn::point_eq(group::exp_g1_signed(bn::g1_generator(), v), direct.p1));
    CHECK(bn::point_eq(group::exp_g2_signed(bn::g2_generator(), v), *direct.p2));
}

TEST_CASE("msm matches independent per-term exponentiation") {
    rng::SplitMix rng(6);
    std::vector<bn::G1> bases;
    std::vector<num::SignedBig> exps;
    bn::G1 expect = bn::G1::infinity();
    for (int i = 0; i < 8; ++i) {
        bn::G1 b = bn::scalar_mul(bn::g1_generator(), U256(rng.next()));
        num::SignedBig e((std::int64_t)(rng.next() % 100000) - 50000);
        bases.push_back(b);
        exps.push_back(e);
        expect = bn::point_add(expect, group::exp_g1_signed(b, e));
    }
    CHECK(bn::point_eq(group::msm_g1(bases, exps), expect));
}
