#pragma once

#include "veridl/sha512.hpp"
#include "veridl/u256.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace veridl::rng {

/**
 * splitmix64 stream. Used for all non-cryptographic randomness (weight
 * initialization, synthetic data, attack perturbations) so that identical
 * seeds reproduce identical artifacts on every platform. std:: distributions
 * are avoided on purpose: their outputs are implementation-defined.
 */
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits; exact dyadic rational.
    double uniform() { return (double)(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Derive an independent stream for a named sub-purpose.
    SplitMix fork(std::uint64_t salt) {
        SplitMix s(state_ ^ (salt * 0xD1B54A32D192ED03ull + 0x2545F4914F6CDD1Dull));
        s.next();
        return s;
    }

private:
    std::uint64_t state_;
};

/**
 * Deterministic byte generator built on SHA-512 over (seed, counter).
 * Backs key generation: seedable, stable across platforms, and with
 * 512-bit blocks wide enough for rejection-free scalar reduction.
 */
class HashDrbg {
public:
    HashDrbg(const std::string& domain_tag, std::uint64_t seed)
        : tag_(domain_tag), seed_(seed) {}

    std::array<std::uint8_t, 64> next_block() {
        hash::Sha512 h;
        h.update(tag_.data(), tag_.size());
        std::uint8_t buf[16];
        for (int b = 0; b < 8; ++b) buf[b] = (std::uint8_t)(seed_ >> (56 - 8 * b));
        for (int b = 0; b < 8; ++b) buf[8 + b] = (std::uint8_t)(counter_ >> (56 - 8 * b));
        ++counter_;
        h.update(buf, 16);
        return h.finish();
    }

    // Uniform value in [0, modulus) by wide reduction of a 512-bit block.
    num::U256 next_scalar(const num::U256& modulus) {
        auto block = next_block();
        num::U512 wide;
        for (int limb = 0; limb < 8; ++limb) {
            std::uint64_t v = 0;
            for (int b = 0; b < 8; ++b) v = (v << 8) | block[limb * 8 + b];
            wide.w[7 - limb] = v;
        }
        return num::mod_u512(wide, modulus);
    }

private:
    std::string tag_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace veridl::rng
