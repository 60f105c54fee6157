#pragma once

#include "veridl/attack.hpp"
#include "veridl/protocol.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace veridl::io {

// Artifact files: magic "VDL1", a format version byte, an artifact type
// byte, then the payload. All integers big-endian; scalars 32 bytes;
// group elements length-prefixed canonical compressed form; sequences
// carry a 4-byte big-endian count.
enum class ArtifactType : std::uint8_t {
    PublicKey = 0x01,
    SecretKey = 0x02,
    Signature = 0x03,
    Weights = 0x04,
    Proof = 0x05,
    Dataset = 0x06,
};

constexpr std::uint8_t kFormatVersion = 1;

struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

struct PublicKeyFile {
    std::uint32_t security_bits = 128;
    group::Element v;  // dual form
};

struct SecretKeyFile {
    num::U256 secret;
};

// --- in-memory encodings -------------------------------------------------------

std::vector<std::uint8_t> public_key_bytes(const PublicKeyFile& pk);
std::vector<std::uint8_t> secret_key_bytes(const SecretKeyFile& sk);
std::vector<std::uint8_t> signature_bytes(const proto::DatasetSignature& sig);
std::vector<std::uint8_t> weights_bytes(const proto::WeightSet& w);
std::vector<std::uint8_t> proof_bytes(const proto::Proof& p);
std::vector<std::uint8_t> dataset_bytes(const data::QuantizedDataset& ds);

PublicKeyFile public_key_from_bytes(std::span<const std::uint8_t> in);
SecretKeyFile secret_key_from_bytes(std::span<const std::uint8_t> in);
proto::DatasetSignature signature_from_bytes(std::span<const std::uint8_t> in);
proto::WeightSet weights_from_bytes(std::span<const std::uint8_t> in);
proto::Proof proof_from_bytes(std::span<const std::uint8_t> in);
data::QuantizedDataset dataset_from_bytes(std::span<const std::uint8_t> in,
                                          const codec::CodecParams& params);

ArtifactType peek_type(std::span<const std::uint8_t> in);

// --- file I/O -------------------------------------------------------------------

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

/**
 * Run configuration, parsed from key = value lines ('#' comments). Keys:
 * seed, frac_bits, eta, theta, batch_size, max_epochs, hidden (comma list),
 * activation, mode, dataset, out_dir, attack, attack_bits, attack_fraction,
 * attack_seed. Unknown keys are errors.
 */
struct RunConfig {
    dnn::NetworkConfig network;                 // input_dim filled from the dataset
    std::uint32_t frac_bits = 20;
    std::uint64_t seed = 1;
    proto::ProofMode mode = proto::ProofMode::Basic;
    std::string dataset_path;
    std::string out_dir = ".";
    std::optional<attack::AttackSpec> attack;
    // whether the file pinned these, as opposed to leaving the defaults;
    // verification only adopts a proof's header values for unpinned fields
    bool hidden_set = false;
    bool frac_bits_set = false;

    codec::CodecParams make_codec() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace veridl::io
