#pragma once

// SRAM-PUF simulation, dump ingestion and token enrollment.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zkmfa/derivation.hpp"
#include "zkmfa/table.hpp"

namespace zkmfa {

/// One power-up read of the device: M bits packed MSB-first (bit i is byte
/// i/8, position 7 - i%8), which is also the raw dump file layout.
class SramRead {
public:
    explicit SramRead(std::uint32_t cell_count = kPufCells);
    /// Throws InvalidInput if `bytes` does not hold exactly cell_count bits.
    SramRead(Bytes bytes, std::uint32_t cell_count);

    std::uint32_t cell_count() const noexcept { return cell_count_; }
    bool bit(std::uint32_t i) const noexcept { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1; }
    void flip(std::uint32_t i) noexcept {
        bytes_[i >> 3] ^= static_cast<std::uint8_t>(0x80u >> (i & 7));
    }
    const Bytes& bytes() const noexcept { return bytes_; }

    friend bool operator==(const SramRead&, const SramRead&) = default;

private:
    std::uint32_t cell_count_;
    Bytes bytes_;
};

enum class NoiseModel { TwoPopulation, Beta };

struct DeviceNoise {
    double flaky_fraction = 0.05;
    double flaky_flip_prob = 0.15;
    NoiseModel model = NoiseModel::TwoPopulation;
    // Beta variant: a flaky cell's flip probability is 0.5 * Beta(beta_a, beta_b).
    double beta_a = 2.0;
    double beta_b = 2.0;
};

class SramDeviceModel {
public:
    struct NoisyCell {
        std::uint32_t index;
        std::uint64_t threshold;  // flip iff next u32 < threshold
    };

    const std::string& device_id() const noexcept { return device_id_; }
    std::uint32_t cell_count() const noexcept { return nominal_.cell_count(); }
    const Bytes& seed() const noexcept { return seed_; }
    const DeviceNoise& noise() const noexcept { return noise_; }
    const SramRead& nominal() const noexcept { return nominal_; }
    double flip_prob(std::uint32_t i) const noexcept { return flip_prob_[i]; }
    /// Cells with non-zero flip probability, ascending by index.
    std::span<const NoisyCell> noisy_cells() const noexcept { return noisy_; }

private:
    friend SramDeviceModel synth_device(ByteView, const DeviceNoise&, std::string, std::uint32_t);

    std::string device_id_;
    Bytes seed_;
    DeviceNoise noise_;
    SramRead nominal_;
    std::vector<double> flip_prob_;
    std::vector<NoisyCell> noisy_;
};

/// Deterministic in (seed, noise, cell_count). Throws InvalidParameters when
/// flaky_fraction is outside [0,1] or a flip probability outside [0,0.5].
SramDeviceModel synth_device(ByteView seed, const DeviceNoise& noise, std::string device_id = {},
                             std::uint32_t cell_count = kPufCells);
SramDeviceModel synth_device(ByteView seed, double flaky_fraction, double flaky_flip_prob);

/// nominal XOR Bernoulli(flip_prob), drawn from a read_seed-derived stream.
SramRead power_cycle_read(const SramDeviceModel& model, ByteView read_seed);

/// Project a read onto the selected cell indices, row-major into a table.
BinaryTable project_read(const SramRead& read, std::span<const std::uint32_t> indices,
                         std::uint32_t rows = kTableSide, std::uint32_t cols = kTableSide);

TernaryTable enroll_token(std::span<const SramRead> reads, std::span<const std::uint32_t> indices);
TernaryTable enroll_token(std::span<const SramRead> reads, const Nonce512& rn1, const Password& pwd);

BinaryTable one_shot_token_table(const SramRead& read, std::span<const std::uint32_t> indices);
BinaryTable one_shot_token_table(const SramRead& read, const Nonce512& rn1, const Password& pwd);

struct DumpSet {
    std::string device_id;
    std::vector<SramRead> reads;
};

/// Reads `read_<k>.bin` files (k ascending), each exactly 131,072 bytes.
DumpSet load_dumps(const std::filesystem::path& directory);
void write_dumps(const std::filesystem::path& directory, std::span<const SramRead> reads);

/// model.json: {device_id, M, seed_hex, flaky_fraction, flaky_flip_prob[, noise_model, beta_a, beta_b]}
void save_device_model(const std::filesystem::path& path, const SramDeviceModel& model);
SramDeviceModel load_device_model(const std::filesystem::path& path);

}  // namespace zkmfa
