#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace veridl::hash {

/**
 * SHA-512 (FIPS 180-4). The round constants and initial state are derived
 * at first use from integer square/cube roots of the first primes instead
 * of a pasted table; the standard test vectors pin the result in the tests.
 */
class Sha512 {
public:
    Sha512() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 64> finish();

    static std::array<std::uint8_t, 64> digest(const void* data, std::size_t len) {
        Sha512 h;
        h.update(data, len);
        return h.finish();
    }
    static std::array<std::uint8_t, 64> digest(const std::vector<std::uint8_t>& v) {
        return digest(v.data(), v.size());
    }
    static std::array<std::uint8_t, 64> digest(const std::string& s) {
        return digest(s.data(), s.size());
    }

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint64_t, 8> state_{};
    std::uint8_t buf_[128];
    std::size_t buf_len_ = 0;
    // Message length in bits fits 2^128; low/high split.
    std::uint64_t len_lo_ = 0, len_hi_ = 0;
};

std::string hex(const std::uint8_t* data, std::size_t len);

}  // namespace veridl::hash
