#include "veridl/sha512.hpp"

#include "veridl/u256.hpp"

#include <cstring>

namespace veridl::hash {

namespace {

using veridl::num::U256;
using veridl::num::U512;
using veridl::num::mul_wide;

std::vector<std::uint32_t> first_primes(std::size_t n) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t c = 2; out.size() < n; ++c) {
        bool prime = true;
        for (std::uint32_t d = 2; d * d <= c; ++d)
            if (c % d == 0) {
                prime = false;
                break;
            }
        if (prime) out.push_back(c);
    }
    return out;
}

U512 shifted(std::uint64_t v, unsigned bits) {
    U512 r;
    r.w[bits / 64] = v << (bits % 64);
    if (bits % 64) {
        unsigned hi = bits / 64 + 1;
        if (hi < 8) r.w[hi] = v >> (64 - bits % 64);
    }
    return r;
}

// floor(p^(1/2) * 2^64) mod 2^64: binary search y with y^2 <= p * 2^128.
std::uint64_t frac_sqrt64(std::uint32_t p) {
    U512 target = shifted(p, 128);
    U256 lo(0), hi;
    hi.w[1] = 0xF;  // 2^68 upper bound, generous for p <= 409
    while (true) {
        U256 sum;
        veridl::num::add_with_carry(sum, lo, hi);
        U256 mid = sum;
        // mid = (lo + hi + 1) / 2
        veridl::num::add_with_carry(mid, sum, U256(1));
        for (int k = 0; k < 3; ++k) mid.w[k] = (mid.w[k] >> 1) | (mid.w[k + 1] << 63);
        mid.w[3] >>= 1;
        if (mid == lo) break;
        U512 sq = mul_wide(mid, mid);
        if (U512::cmp(sq, target) <= 0)
            lo = mid;
        else
            sub_with_borrow(hi, mid, U256(1));
    }
    return lo.w[0];
}

// floor(p^(1/3) * 2^64) mod 2^64: binary search y with y^3 <= p * 2^192.
std::uint64_t frac_cbrt64(std::uint32_t p) {
    U512 target = shifted(p, 192);
    U256 lo(0), hi;
    hi.w[1] = 0xFF;  // 2^72 upper bound
    while (true) {
        U256 sum, mid;
        veridl::num::add_with_carry(sum, lo, hi);
        veridl::num::add_with_carry(mid, sum, U256(1));
        for (int k = 0; k < 3; ++k) mid.w[k] = (mid.w[k] >> 1) | (mid.w[k + 1] << 63);
        mid.w[3] >>= 1;
        if (mid == lo) break;
        U256 sq = mul_wide(mid, mid).lo256();  // mid < 2^72 so mid^2 < 2^144
        U512 cube = mul_wide(sq, mid);
        if (U512::cmp(cube, target) <= 0)
            lo = mid;
        else
            sub_with_borrow(hi, mid, U256(1));
    }
    return lo.w[0];
}

struct Tables {
    std::array<std::uint64_t, 8> iv;
    std::array<std::uint64_t, 80> k;
};

const Tables& tables() {
    static const Tables t = [] {
        Tables tb{};
        auto primes = first_primes(80);
        for (int i = 0; i < 8; ++i) tb.iv[i] = frac_sqrt64(primes[i]);
        for (int i = 0; i < 80; ++i) tb.k[i] = frac_cbrt64(primes[i]);
        return tb;
    }();
    return t;
}

inline std::uint64_t rotr(std::uint64_t x, unsigned n) { return (x >> n) | (x << (64 - n)); }

}  // namespace

void Sha512::reset() {
    state_ = tables().iv;
    buf_len_ = 0;
    len_lo_ = len_hi_ = 0;
}

void Sha512::process_block(const std::uint8_t* p) {
    const auto& K = tables().k;
    std::uint64_t w[80];
    for (int i = 0; i < 16; ++i) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | p[i * 8 + b];
        w[i] = v;
    }
    for (int i = 16; i < 80; ++i) {
        std::uint64_t s0 = rotr(w[i - 15], 1) ^ rotr(w[i - 15], 8) ^ (w[i - 15] >> 7);
        std::uint64_t s1 = rotr(w[i - 2], 19) ^ rotr(w[i - 2], 61) ^ (w[i - 2] >> 6);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint64_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint64_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 80; ++i) {
        std::uint64_t S1 = rotr(e, 14) ^ rotr(e, 18) ^ rotr(e, 41);
        std::uint64_t ch = (e & f) ^ (~e & g);
        std::uint64_t t1 = h + S1 + ch + K[i] + w[i];
        std::uint64_t S0 = rotr(a, 28) ^ rotr(a, 34) ^ rotr(a, 39);
        std::uint64_t maj = (a & b) ^ (a & c) ^ (b & c);
        std::uint64_t t2 = S0 + maj;
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
}

void Sha512::update(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t bits = (std::uint64_t)len << 3;
    std::uint64_t old = len_lo_;
    len_lo_ += bits;
    if (len_lo_ < old) ++len_hi_;
    len_hi_ += (std::uint64_t)len >> 61;

    while (len > 0) {
        std::size_t take = std::min(len, sizeof(buf_) - buf_len_);
        std::memcpy(buf_ + buf_len_, p, take);
        buf_len_ += take;
        p += take;
        len -= take;
        if (buf_len_ == sizeof(buf_)) {
            process_block(buf_);
            buf_len_ = 0;
        }
    }
}

std::array<std::uint8_t, 64> Sha512::finish() {
    std::uint64_t lo = len_lo_, hi = len_hi_;
    std::uint8_t pad = 0x80;
    update(&pad, 1);
    std::uint8_t zero = 0;
    while (buf_len_ != 112) update(&zero, 1);
    std::uint8_t lenb[16];
    for (int b = 0; b < 8; ++b) lenb[b] = (std::uint8_t)(hi >> (56 - 8 * b));
    for (int b = 0; b < 8; ++b) lenb[8 + b] = (std::uint8_t)(lo >> (56 - 8 * b));
    update(lenb, 16);

    std::array<std::uint8_t, 64> out{};
    for (int i = 0; i < 8; ++i)
        for (int b = 0; b < 8; ++b) out[i * 8 + b] = (std::uint8_t)(state_[i] >> (56 - 8 * b));
    reset();
    return out;
}

std::string hex(const std::uint8_t* data, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xF]);
    }
    return s;
}

}  // namespace veridl::hash
