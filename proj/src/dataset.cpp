#include "veridl/dataset.hpp"

#include "veridl/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace veridl::data {

QuantizedDataset quantize(const std::vector<std::vector<double>>& features,
                          const std::vector<double>& labels, const codec::CodecParams& params) {
    if (features.size() != labels.size())
        throw std::invalid_argument("quantize: feature/label count mismatch");
    if (features.empty()) throw std::invalid_argument("quantize: empty dataset");
    QuantizedDataset ds;
    ds.feature_dim = features.front().size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != ds.feature_dim)
            throw std::invalid_argument("quantize: ragged feature rows");
        QuantizedSample s;
        for (double v : features[i]) {
            codec::ScaledInt e = codec::encode(v, params);
            double back = codec::decode(e, params);
            ds.max_quantization_error = std::max(ds.max_quantization_error, std::fabs(v - back));
            s.signs.push_back(codec::sign_of(e.value));
            s.x.push_back(back);
            s.features.push_back(std::move(e));
        }
        codec::ScaledInt ly = codec::encode(labels[i], params);
        double backy = codec::decode(ly, params);
        ds.max_quantization_error =
            std::max(ds.max_quantization_error, std::fabs(labels[i] - backy));
        s.signs.push_back(codec::sign_of(ly.value));
        s.y = backy;
        s.label = std::move(ly);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

QuantizedDataset load_csv(const std::string& path, const codec::CodecParams& params) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "y")
        throw std::runtime_error("csv header must be x0,...,x{m-1},y");
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        if (header[i] != "x" + std::to_string(i))
            throw std::runtime_error("csv header must be x0,...,x{m-1},y");
    }
    std::size_t m = header.size() - 1;

    std::vector<std::vector<double>> feats;
    std::vector<double> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::runtime_error("csv parse error at line " + std::to_string(lineno));
            }
            if (used != cell.size() || !std::isfinite(v))
                throw std::runtime_error("csv parse error at line " + std::to_string(lineno));
            row.push_back(v);
        }
        if (row.size() != m + 1)
            throw std::runtime_error("csv column count mismatch at line " + std::to_string(lineno));
        labels.push_back(row.back());
        row.pop_back();
        feats.push_back(std::move(row));
    }
    if (feats.empty()) throw std::runtime_error("csv has no data rows: " + path);
    return quantize(feats, labels, params);
}

void write_csv(const std::string& path, const QuantizedDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (std::size_t i = 0; i < ds.feature_dim; ++i) out << "x" << i << ",";
    out << "y\n";
    char buf[64];
    for (const auto& s : ds.samples) {
        for (double v : s.x) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ",";
        }
        std::snprintf(buf, sizeof(buf), "%.17g", s.y);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

QuantizedDataset make_synthetic(std::uint64_t seed, std::size_t n, std::size_t m,
                                const codec::CodecParams& params, bool relu_range, double noise) {
    rng::SplitMix rng(seed ^ 0x5EEDDA7Aull);
    std::size_t width = 2 * m + 2;
    std::vector<double> w1(m * width), w2(width);
    for (auto& w : w1) w = rng.uniform(-1.5, 1.5);
    for (auto& w : w2) w = rng.uniform(-1.5, 1.5);

    std::vector<std::vector<double>> feats;
    std::vector<double> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(m);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        double acc = 0.0;
        for (std::size_t h = 0; h < width; ++h) {
            double z = 0.0;
            for (std::size_t j = 0; j < m; ++j) z += x[j] * w1[j * width + h];
            acc += w2[h] * std::tanh(z);
        }
        double y = acc / std::sqrt((double)width) + rng.uniform(-noise, noise);
        // squash into the output range the network can actually reach
        if (relu_range)
            y = std::fabs(y);
        else
            y = 1.0 / (1.0 + std::exp(-2.0 * y));
        feats.push_back(std::move(x));
        labels.push_back(y);
    }
    return quantize(feats, labels, params);
}

QuantizedDataset make_few_distinct(std::uint64_t seed, std::size_t n, std::size_t m,
                                   std::size_t k_distinct, const codec::CodecParams& params) {
    rng::SplitMix rng(seed ^ 0xD15717C7ull);
    std::vector<double> values;
    for (std::size_t k = 0; k < k_distinct; ++k) values.push_back(rng.uniform(-1.0, 1.0));
    std::vector<double> w(m);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);

    std::vector<std::vector<double>> feats;
    std::vector<double> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(m);
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            x[j] = values[rng.below(values.size())];
            z += x[j] * w[j];
        }
        labels.push_back(1.0 / (1.0 + std::exp(-z)));
        feats.push_back(std::move(x));
    }
    return quantize(feats, labels, params);
}

QuantizedDataset cap_to(const QuantizedDataset& ds, std::size_t cap) {
    QuantizedDataset out = ds;
    if (out.samples.size() > cap) out.samples.resize(cap);
    return out;
}

}  // namespace veridl::data
