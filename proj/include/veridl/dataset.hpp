#pragma once

#include "veridl/codec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace veridl::data {

/**
 * One training sample after fixed-point ingestion. The plaintext view (x, y)
 * is the dequantized grid value, so training arithmetic and commitment
 * arithmetic describe the same numbers exactly.
 */
struct QuantizedSample {
    std::vector<codec::ScaledInt> features;  // scale 1
    codec::ScaledInt label;                  // scale 1
    std::vector<codec::SignFlag> signs;      // m feature flags then the label flag
    std::vector<double> x;
    double y = 0.0;
};

struct QuantizedDataset {
    std::size_t feature_dim = 0;
    std::vector<QuantizedSample> samples;
    double max_quantization_error = 0.0;

    std::size_t size() const { return samples.size(); }
};

/** Quantize raw decimal rows; records the largest |x - dequant(encode(x))|. */
QuantizedDataset quantize(const std::vector<std::vector<double>>& features,
                          const std::vector<double>& labels, const codec::CodecParams& params);

/**
 * CSV ingestion. Expected header "x0,...,x{m-1},y"; decimal literals;
 * parse failures carry the 1-based line number.
 */
QuantizedDataset load_csv(const std::string& path, const codec::CodecParams& params);

void write_csv(const std::string& path, const QuantizedDataset& ds);

/**
 * Synthetic regression data: features uniform in [-1, 1], labels produced by
 * a random two-layer teacher with mild label noise, ranged to suit the
 * requested activation (sigmoid/tanh labels in (0,1); relu labels >= 0).
 */
QuantizedDataset make_synthetic(std::uint64_t seed, std::size_t n, std::size_t m,
                                const codec::CodecParams& params, bool relu_range = false,
                                double noise = 0.02);

/** Synthetic data whose feature values are drawn from k distinct decimals. */
QuantizedDataset make_few_distinct(std::uint64_t seed, std::size_t n, std::size_t m,
                                   std::size_t k_distinct, const codec::CodecParams& params);

/** First min(cap, n) samples. Signing and certifying must agree on this. */
QuantizedDataset cap_to(const QuantizedDataset& ds, std::size_t cap);

}  // namespace veridl::data
