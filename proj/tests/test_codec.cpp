#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veridl/codec.hpp"
#include "veridl/bn254.hpp"
#include "veridl/rng.hpp"

#include <vector>

using namespace veridl;
using codec::CodecParams;
using codec::ScaledInt;
using num::SignedBig;
using num::U256;

namespace {

CodecParams params_lt(std::uint32_t lt) { return CodecParams(lt, bn::scalar_field_order()); }

ScaledInt si(std::int64_t v, std::uint32_t scale = 1) { return ScaledInt::from_int(v, scale); }

}  // namespace

TEST_CASE("u256 basics") {
    U256 a = num::from_dec_string("340282366920938463463374607431768211455");  // 2^128-1
    CHECK(num::to_dec_string(a) == "340282366920938463463374607431768211455");
    U256 b = a + U256(1);
    CHECK(b.top_bit() == 128);
    CHECK(b - U256(1) == a);

    // wide product of 2^128-1 with itself: 2^256 - 2^129 + 1
    num::U512 p = num::mul_wide(a, a);
    CHECK(p.w[0] == 1);
    U256 m = num::mod_u512(p, num::from_dec_string("1000000007"));
    // (2^128-1)^2 mod 1e9+7, cross-checked with an independent 64-bit route
    std::uint64_t r128 = 0;
    {
        // 2^128 mod p via repeated squaring
        std::uint64_t two64 = (0xFFFFFFFFFFFFFFFFull % 1000000007ull + 1) % 1000000007ull;
        r128 = (unsigned __int128)two64 * two64 % 1000000007ull;
    }
    std::uint64_t want = (unsigned __int128)(r128 + 1000000007ull - 1) % 1000000007ull;
    want = (unsigned __int128)want * want % 1000000007ull;
    CHECK(m == U256(want));
}

TEST_CASE("u256 to_double is correctly rounded") {
    CHECK(num::to_double(U256(0)) == 0.0);
    CHECK(num::to_double(U256(1)) == 1.0);
    CHECK(num::to_double(U256(0x20000000000001ull)) == (double)0x20000000000001ull);
    rng::SplitMix rng(7);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t v = rng.next();
        CHECK(num::to_double(U256(v)) == (double)v);
    }
    // 2^64 + 2^11 sits exactly at a half ulp: half-even keeps the even mantissa
    U256 x(0x800ull, 1, 0, 0);
    CHECK(num::to_double(x) == 0x1.0p64);
    U256 y(0x801ull, 1, 0, 0);  // sticky bit set: rounds up
    CHECK(num::to_double(y) == 0x1.0000000000001p64);
}

TEST_CASE("signed big arithmetic") {
    SignedBig a(-5), b(12);
    CHECK((a + b) == SignedBig(7));
    CHECK((a - b) == SignedBig(-17));
    CHECK((a * b) == SignedBig(-60));
    CHECK((a * a) == SignedBig(25));
    CHECK(SignedBig(0).to_string() == "0");
    CHECK((SignedBig(-3) + SignedBig(3)).is_zero());
    CHECK(SignedBig(-7).to_double() == -7.0);
}

TEST_CASE("encode fixed examples") {
    auto p4 = params_lt(4);
    CHECK(codec::encode(0.0, p4).value.is_zero());
    CHECK(codec::encode(0.0, p4).scale == 1);
    CHECK(codec::encode(1.5, p4).value == SignedBig(24));
    CHECK(codec::encode(-0.25, p4).value == SignedBig(-4));

    // round-half-to-even at the grid midpoint: 3/32 -> 1.5 ulp at L_T=4
    CHECK(codec::encode(0.09375, p4).value == SignedBig(2));   // 1.5 rounds to 2
    CHECK(codec::encode(0.15625, p4).value == SignedBig(2));   // 2.5 rounds to 2
    CHECK(codec::encode(-0.09375, p4).value == SignedBig(-2));
}

TEST_CASE("decode fixed examples") {
    auto p4 = params_lt(4);
    CHECK(codec::decode(si(24), p4) == 1.5);
    CHECK(codec::decode(si(64, 2), p4) == 0.25);
    CHECK(codec::decode(si(0, 3), p4) == 0.0);
}

TEST_CASE("roundtrip property") {
    auto p = params_lt(20);
    rng::SplitMix rng(42);
    for (int i = 0; i < 5000; ++i) {
        // decimals with <= 20 fractional bits
        double x = (double)((std::int64_t)rng.next() % (1ll << 40)) * 0x1.0p-20;
        ScaledInt e = codec::encode(x, p);
        CHECK(codec::decode(e, p) == x);
    }
}

TEST_CASE("mod_repr") {
    U256 p97(97);
    CHECK(codec::mod_repr(SignedBig(-5), p97) == U256(92));
    CHECK(codec::mod_repr(SignedBig(12), p97) == U256(12));
    CHECK(codec::mod_repr(SignedBig(-96), p97) == U256(1));
    CHECK_THROWS_AS((void)codec::mod_repr(SignedBig(-97), p97), std::overflow_error);

    auto params = params_lt(20);
    rng::SplitMix rng(3);
    for (int i = 0; i < 1000; ++i) {
        SignedBig v((std::int64_t)(rng.next() >> 1) * ((i & 1) ? -1 : 1));
        U256 r = codec::mod_repr(ScaledInt{v, 1}, params);
        CHECK(r < params.field_order);
        // r - v is 0 or p
        if (!v.is_negative())
            CHECK(r == v.mag);
        else {
            U256 sum;
            num::add_with_carry(sum, r, v.mag);
            CHECK(sum == params.field_order);
        }
    }
}

TEST_CASE("split_dot fixed examples") {
    auto p4 = params_lt(4);
    {
        std::vector<ScaledInt> u{si(24), si(-4)}, w{si(8), si(32)};
        auto s = codec::split_dot(u, w, p4);
        CHECK(s.pos_sum.value == SignedBig(192));
        CHECK(s.neg_sum.value == SignedBig(-128));
        CHECK(s.total.value == SignedBig(64));
        CHECK(s.neg_count == 1);
        CHECK(s.total.scale == 2);
    }
    {
        std::vector<ScaledInt> u{si(0), si(0)}, w{si(5), si(7)};
        auto s = codec::split_dot(u, w, p4);
        CHECK(s.pos_sum.value.is_zero());
        CHECK(s.neg_sum.value.is_zero());
        CHECK(s.total.value.is_zero());
        CHECK(s.neg_count == 0);
    }
    {
        std::vector<ScaledInt> u{si(3), si(-2)}, w{si(4), si(5)};
        auto s = codec::split_dot(u, w, p4);
        CHECK(s.pos_sum.value == SignedBig(12));
        CHECK(s.neg_sum.value == SignedBig(-10));
        CHECK(s.total.value == SignedBig(2));
        CHECK(s.neg_count == 1);
    }
}

TEST_CASE("split_dot consistency property") {
    auto p = params_lt(20);
    rng::SplitMix rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 1 + rng.below(12);
        std::vector<ScaledInt> u, w;
        for (std::size_t i = 0; i < n; ++i) {
            u.push_back(si((std::int64_t)(rng.next() % 100000) - 50000));
            w.push_back(si((std::int64_t)(rng.next() % 100000) - 50000));
        }
        auto s = codec::split_dot(u, w, p);
        CHECK((s.pos_sum.value + s.neg_sum.value) == s.total.value);
        CHECK(!s.pos_sum.value.is_negative());
        CHECK(!(SignedBig(0) < s.neg_sum.value));
        CHECK(s.pos_sum.scale == s.total.scale);
        CHECK(s.neg_sum.scale == s.total.scale);
    }
}

TEST_CASE("split_dot scale rules") {
    auto p = params_lt(20);
    std::vector<ScaledInt> u{si(3, 2)}, w{si(4, 2)};
    CHECK(codec::split_dot(u, w, p).total.scale == 4);
    std::vector<ScaledInt> u2{si(3, 3)}, w2{si(4, 2)};
    CHECK_THROWS_AS((void)codec::split_dot(u2, w2, p), std::invalid_argument);
    std::vector<ScaledInt> u3{si(3, 1)}, w3{si(4, 1), si(1, 1)};
    CHECK_THROWS_AS((void)codec::split_dot(u3, w3, p), std::invalid_argument);
}

TEST_CASE("lemma fixed examples") {
    std::vector<std::int64_t> u1{-1}, w1{1};
    CHECK(codec::lemma_check(u1, w1, 7));
    std::vector<std::int64_t> u2{2, 3}, w2{1, 1};
    CHECK(codec::lemma_check(u2, w2, 11));
}

TEST_CASE("lemma exhaustive enumeration p=101") {
    // all vectors with entries in [-5,5], length <= 3
    for (int len = 1; len <= 3; ++len) {
        std::vector<std::int64_t> u(len), w(len);
        std::size_t combos = 1;
        for (int k = 0; k < 2 * len; ++k) combos *= 11;
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t t = c;
            for (int k = 0; k < len; ++k) {
                u[k] = (std::int64_t)(t % 11) - 5;
                t /= 11;
                w[k] = (std::int64_t)(t % 11) - 5;
                t /= 11;
            }
            REQUIRE(codec::lemma_check(u, w, 101));
        }
    }
}

TEST_CASE("lemma generalized over random vectors, mirrors split_dot") {
    auto p = params_lt(20);
    rng::SplitMix rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng.below(6);
        std::vector<std::int64_t> u(n), w(n);
        std::vector<ScaledInt> us, ws;
        for (std::size_t i = 0; i < n; ++i) {
            // keep |sum u_i*w_i| < p, the lemma's precondition
            u[i] = (std::int64_t)(rng.next() % 801) - 400;
            w[i] = (std::int64_t)(rng.next() % 801) - 400;
            us.push_back(si(u[i]));
            ws.push_back(si(w[i]));
        }
        CHECK(codec::lemma_check(u, w, 1000003));
        // sum of residue products matches the residue of the true total
        auto s = codec::split_dot(us, ws, p);
        U256 lhs(0);
        for (std::size_t i = 0; i < n; ++i) {
            U256 prod = num::mod_mul(codec::mod_repr(us[i], p), codec::mod_repr(ws[i], p),
                                     p.field_order);
            lhs = num::mod_add(lhs, prod, p.field_order);
        }
        CHECK(lhs == codec::mod_repr(s.total, p));
    }
}

TEST_CASE("encode overflow and params validation") {
    CHECK_THROWS_AS(CodecParams(0, bn::scalar_field_order()), std::invalid_argument);
    // headroom invariant: 4*60 + 128 + 21 >= 254
    CHECK_THROWS_AS(CodecParams(60, bn::scalar_field_order()), std::invalid_argument);
    auto p = params_lt(20);
    CHECK_THROWS_AS((void)codec::encode(0x1.0p140, p), std::overflow_error);
    CHECK_THROWS_AS((void)codec::encode(1.0 / 0.0, p), std::overflow_error);
}
