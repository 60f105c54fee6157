#include "veridl/artifacts.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace veridl::io {

namespace {

constexpr char kMagic[4] = {'V', 'D', 'L', '1'};

struct Writer {
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u16(std::uint16_t v) {
        buf.push_back((std::uint8_t)(v >> 8));
        buf.push_back((std::uint8_t)v);
    }
    void u32(std::uint32_t v) {
        for (int b = 3; b >= 0; --b) buf.push_back((std::uint8_t)(v >> (8 * b)));
    }
    void u64(std::uint64_t v) {
        for (int b = 7; b >= 0; --b) buf.push_back((std::uint8_t)(v >> (8 * b)));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void scalar(const num::U256& v) {
        unsigned char tmp[32];
        num::store_be(v, tmp);
        buf.insert(buf.end(), tmp, tmp + 32);
    }
    void element(const group::Element& e) {
        auto b = group::element_bytes(e);
        buf.insert(buf.end(), b.begin(), b.end());
    }
    void scaled(const codec::ScaledInt& v) {
        u8((std::uint8_t)v.scale);
        u8(v.value.is_negative() ? 1 : 0);
        scalar(v.value.mag);
    }
    void split(const codec::SplitSum& s) {
        scaled(s.pos_sum);
        scaled(s.neg_sum);
        scaled(s.total);
        u32(s.neg_count);
    }
    void header(ArtifactType t) {
        buf.insert(buf.end(), kMagic, kMagic + 4);
        u8(kFormatVersion);
        u8((std::uint8_t)t);
    }
};

struct Reader {
    std::span<const std::uint8_t> in;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > in.size()) throw IoError("artifact truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = ((std::uint16_t)in[pos] << 8) | in[pos + 1];
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v = (v << 8) | in[pos + b];
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | in[pos + b];
        pos += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    num::U256 scalar() {
        need(32);
        unsigned char tmp[32];
        std::copy(in.begin() + pos, in.begin() + pos + 32, tmp);
        pos += 32;
        return num::load_be(tmp);
    }
    group::Element element() {
        need(2);
        std::size_t len = ((std::size_t)in[pos] << 8) | in[pos + 1];
        need(2 + len);
        group::Element e = group::element_from_bytes(in.subspan(pos, 2 + len));
        pos += 2 + len;
        return e;
    }
    codec::ScaledInt scaled() {
        std::uint8_t scale = u8();
        std::uint8_t sign = u8();
        if (sign > 1) throw IoError("bad sign byte");
        num::U256 mag = scalar();
        return codec::ScaledInt{num::SignedBig::from_parts(sign == 1, mag), scale};
    }
    codec::SplitSum split() {
        codec::SplitSum s;
        s.pos_sum = scaled();
        s.neg_sum = scaled();
        s.total = scaled();
        s.neg_count = u32();
        return s;
    }
    void header(ArtifactType expect) {
        need(6);
        if (std::memcmp(in.data(), kMagic, 4) != 0) throw IoError("bad magic");
        pos = 4;
        if (u8() != kFormatVersion) throw IoError("unsupported format version");
        if (u8() != (std::uint8_t)expect) throw IoError("unexpected artifact type");
    }
    void done() const {
        if (pos != in.size()) throw IoError("trailing bytes in artifact");
    }
};

void write_weightset(Writer& w, const proto::WeightSet& ws) {
    w.u32((std::uint32_t)ws.layers.size());
    std::size_t in_dim = ws.layers.empty() ? 0 : 0;
    (void)in_dim;
    for (const auto& layer : ws.layers) {
        w.u32((std::uint32_t)layer.size());
        for (double v : layer) w.f64(v);
    }
    w.u32((std::uint32_t)ws.output.size());
    for (double v : ws.output) w.f64(v);
}

proto::WeightSet read_weightset(Reader& r) {
    proto::WeightSet ws;
    std::uint32_t layers = r.u32();
    if (layers > 64) throw IoError("implausible layer count");
    for (std::uint32_t l = 0; l < layers; ++l) {
        std::uint32_t n = r.u32();
        if (n > (1u << 24)) throw IoError("implausible layer size");
        std::vector<double> w(n);
        for (auto& v : w) v = r.f64();
        ws.layers.push_back(std::move(w));
    }
    std::uint32_t n = r.u32();
    if (n > (1u << 20)) throw IoError("implausible output size");
    ws.output.resize(n);
    for (auto& v : ws.output) v = r.f64();
    return ws;
}

}  // namespace

std::vector<std::uint8_t> public_key_bytes(const PublicKeyFile& pk) {
    Writer w;
    w.header(ArtifactType::PublicKey);
    w.u32(pk.security_bits);
    w.element(pk.v);
    return std::move(w.buf);
}

PublicKeyFile public_key_from_bytes(std::span<const std::uint8_t> in) {
    Reader r{in};
    r.header(ArtifactType::PublicKey);
    PublicKeyFile pk;
    pk.security_bits = r.u32();
    pk.v = r.element();
    r.done();
    if (!pk.v.dual()) throw IoError("public key must carry both group forms");
    return pk;
}

std::vector<std::uint8_t> secret_key_bytes(const SecretKeyFile& sk) {
    Writer w;
    w.header(ArtifactType::SecretKey);
    w.scalar(sk.secret);
    return std::move(w.buf);
}

SecretKeyFile secret_key_from_bytes(std::span<const std::uint8_t> in) {
    Reader r{in};
    r.header(ArtifactType::SecretKey);
    SecretKeyFile sk;
    sk.secret = r.scalar();
    r.done();
    return sk;
}

std::vector<std::uint8_t> signature_bytes(const proto::DatasetSignature& sig) {
    Writer w;
    w.header(ArtifactType::Signature);
    w.element(sig.gamma);
    return std::move(w.buf);
}

proto::DatasetSignature signature_from_bytes(std::span<const std::uint8_t> in) {
    Reader r{in};
    r.header(ArtifactType::Signature);
    proto::DatasetSignature sig;
    sig.gamma = r.element();
    r.done();
    return sig;
}

std::vector<std::uint8_t> weights_bytes(const proto::WeightSet& w) {
    Writer wr;
    wr.header(ArtifactType::Weights);
    write_weightset(wr, w);
    return std::move(wr.buf);
}

proto::WeightSet weights_from_bytes(std::span<const std::uint8_t> in) {
    Reader r{in};
    r.header(ArtifactType::Weights);
    proto::WeightSet ws = read_weightset(r);
    r.done();
    return ws;
}

std::vector<std::uint8_t> proof_bytes(const proto::Proof& p) {
    Writer w;
    w.header(ArtifactType::Proof);
    w.u8((std::uint8_t)p.mode);
    w.u32(p.frac_bits);
    w.u32(p.n_samples);
    w.u32(p.input_dim);
    w.u32((std::uint32_t)p.hidden.size());
    for (auto h : p.hidden) w.u32(h);

    w.scaled(p.s1);
    w.scaled(p.s2);

    if (p.mode == proto::ProofMode::Basic) {
        for (const auto& d : p.digests.plain) {
            for (const auto& f : d.features) w.element(f);
            w.element(d.label);
            for (auto s : d.signs) w.u8((std::uint8_t)s);
        }
    } else {
        w.u32((std::uint32_t)p.digests.dict.size());
        for (const auto& e : p.digests.dict) w.element(e);
        for (std::size_t i = 0; i < p.n_samples; ++i) {
            for (auto idx : p.digests.feature_idx[i]) w.u32(idx);
            w.u32(p.digests.label_idx[i]);
            for (auto s : p.digests.signs[i]) w.u8((std::uint8_t)s);
        }
    }

    for (const auto& wit : p.witnesses) {
        for (const auto& s : wit.z_splits) w.split(s);
        for (const auto& s : wit.zhat_splits) w.split(s);
        w.element(wit.delta_out_commit);
        for (const auto& v : wit.delta_last) w.scaled(v);
    }
    for (const auto& rec : p.increments) {
        w.scaled(rec.total);
        w.split(rec.split);
    }
    return std::move(w.buf);
}

proto::Proof proof_from_bytes(std::span<const std::uint8_t> in) {
    Reader r{in};
    r.header(ArtifactType::Proof);
    proto::Proof p;
    std::uint8_t mode = r.u8();
    if (mode > 1) throw IoError("bad proof mode byte");
    p.mode = (proto::ProofMode)mode;
    p.frac_bits = r.u32();
    p.n_samples = r.u32();
    p.input_dim = r.u32();
    std::uint32_t layers = r.u32();
    if (layers == 0 || layers > 64) throw IoError("implausible layer count");
    for (std::uint32_t l = 0; l < layers; ++l) p.hidden.push_back(r.u32());
    if (p.n_samples == 0 || p.n_samples > (1u << 20)) throw IoError("implausible sample count");
    if (p.input_dim == 0 || p.input_dim > (1u << 16)) throw IoError("implausible input dim");
    for (auto hsz : p.hidden)
        if (hsz == 0 || hsz > (1u << 16)) throw IoError("implausible hidden width");

    p.s1 = r.scaled();
    p.s2 = r.scaled();

    std::size_t m = p.input_dim;
    p.digests.mode = p.mode;
    if (p.mode == proto::ProofMode::Basic) {
        for (std::uint32_t i = 0; i < p.n_samples; ++i) {
            proto::SampleDigest d;
            for (std::size_t j = 0; j < m; ++j) d.features.push_back(r.element());
            d.label = r.element();
            for (std::size_t j = 0; j <= m; ++j) {
                std::uint8_t s = r.u8();
                if (s > 1) throw IoError("bad sign flag");
                d.signs.push_back((codec::SignFlag)s);
            }
            p.digests.plain.push_back(std::move(d));
        }
    } else {
        std::uint32_t dict = r.u32();
        if (dict == 0 || dict > p.n_samples * (m + 1)) throw IoError("implausible dictionary");
        for (std::uint32_t i = 0; i < dict; ++i) p.digests.dict.push_back(r.element());
        for (std::uint32_t i = 0; i < p.n_samples; ++i) {
            std::vector<std::uint32_t> row(m);
            for (auto& idx : row) idx = r.u32();
            p.digests.feature_idx.push_back(std::move(row));
            p.digests.label_idx.push_back(r.u32());
            std::vector<codec::SignFlag> signs;
            for (std::size_t j = 0; j <= m; ++j) {
                std::uint8_t s = r.u8();
                if (s > 1) throw IoError("bad sign flag");
                signs.push_back((codec::SignFlag)s);
            }
            p.digests.signs.push_back(std::move(signs));
        }
    }

    std::size_t d1 = p.hidden.front(), dl = p.hidden.back();
    for (std::uint32_t i = 0; i < p.n_samples; ++i) {
        proto::SampleWitness wit;
        for (std::size_t k = 0; k < d1; ++k) wit.z_splits.push_back(r.split());
        for (std::size_t k = 0; k < d1; ++k) wit.zhat_splits.push_back(r.split());
        wit.delta_out_commit = r.element();
        for (std::size_t k = 0; k < dl; ++k) wit.delta_last.push_back(r.scaled());
        p.witnesses.push_back(std::move(wit));
    }
    for (std::size_t rec_i = 0; rec_i < m * d1; ++rec_i) {
        proto::IncrementRecord rec;
        rec.total = r.scaled();
        rec.split = r.split();
        p.increments.push_back(std::move(rec));
    }
    r.done();
    return p;
}

std::vector<std::uint8_t> dataset_bytes(const data::QuantizedDataset& ds) {
    Writer w;
    w.header(ArtifactType::Dataset);
    w.u32((std::uint32_t)ds.feature_dim);
    w.u32((std::uint32_t)ds.samples.size());
    for (const auto& s : ds.samples) {
        for (const auto& f : s.features) w.scaled(f);
        w.scaled(s.label);
        for (auto flag : s.signs) w.u8((std::uint8_t)flag);
    }
    return std::move(w.buf);
}

data::QuantizedDataset dataset_from_bytes(std::span<const std::uint8_t> in,
                                          const codec::CodecParams& params) {
    Reader r{in};
    r.header(ArtifactType::Dataset);
    data::QuantizedDataset ds;
    ds.feature_dim = r.u32();
    std::uint32_t n = r.u32();
    if (ds.feature_dim == 0 || ds.feature_dim > (1u << 16)) throw IoError("implausible dims");
    if (n == 0 || n > (1u << 20)) throw IoError("implausible sample count");
    for (std::uint32_t i = 0; i < n; ++i) {
        data::QuantizedSample s;
        for (std::size_t j = 0; j < ds.feature_dim; ++j) {
            s.features.push_back(r.scaled());
            s.x.push_back(dnn::dequantize(s.features.back(), params.frac_bits));
        }
        s.label = r.scaled();
        s.y = dnn::dequantize(s.label, params.frac_bits);
        for (std::size_t j = 0; j <= ds.feature_dim; ++j) {
            std::uint8_t f = r.u8();
            if (f > 1) throw IoError("bad sign flag");
            s.signs.push_back((codec::SignFlag)f);
        }
        ds.samples.push_back(std::move(s));
    }
    r.done();
    return ds;
}

ArtifactType peek_type(std::span<const std::uint8_t> in) {
    if (in.size() < 6 || std::memcmp(in.data(), kMagic, 4) != 0) throw IoError("bad magic");
    if (in[4] != kFormatVersion) throw IoError("unsupported format version");
    return (ArtifactType)in[5];
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write((const char*)bytes.data(), (std::streamsize)bytes.size());
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

codec::CodecParams RunConfig::make_codec() const {
    return codec::CodecParams(frac_bits, bn::scalar_field_order());
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_attack = false;
    attack::AttackSpec aspec;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto eq = line.find('=');
        std::string key, value;
        if (eq == std::string::npos) {
            key = line;
        } else {
            key = line.substr(0, eq);
            value = line.substr(eq + 1);
        }
        auto trim = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.pop_back();
        };
        trim(key);
        trim(value);
        if (key.empty()) continue;
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "frac_bits") {
                cfg.frac_bits = (std::uint32_t)std::stoul(value);
                cfg.frac_bits_set = true;
            }
            else if (key == "eta") cfg.network.learning_rate = std::stod(value);
            else if (key == "theta") cfg.network.threshold = std::stod(value);
            else if (key == "batch_size") cfg.network.batch_size = (std::uint32_t)std::stoul(value);
            else if (key == "max_epochs") cfg.network.max_epochs = std::stoull(value);
            else if (key == "activation") cfg.network.activation = dnn::activation_from_name(value);
            else if (key == "mode") cfg.mode = proto::mode_from_name(value);
            else if (key == "dataset") cfg.dataset_path = value;
            else if (key == "out_dir") cfg.out_dir = value;
            else if (key == "hidden") {
                cfg.network.hidden.clear();
                std::stringstream ss(value);
                std::string part;
                while (std::getline(ss, part, ','))
                    cfg.network.hidden.push_back((std::uint32_t)std::stoul(part));
                cfg.hidden_set = true;
            } else if (key == "attack") {
                aspec.kind = attack::attack_from_name(value);
                have_attack = true;
            } else if (key == "attack_bits") aspec.bits = (std::uint32_t)std::stoul(value);
            else if (key == "attack_fraction") {
                aspec.prune_fraction = std::stod(value);
                aspec.weight_fraction = std::stod(value);
            } else if (key == "attack_seed") aspec.seed = std::stoull(value);
            else throw IoError("config line " + std::to_string(lineno) + ": unknown key " + key);
        } catch (const IoError&) {
            throw;
        } catch (const std::exception&) {
            throw IoError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (have_attack) cfg.attack = aspec;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace veridl::io
