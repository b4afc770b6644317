#include "zkmfa/puf.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <map>

#include "sampling.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

namespace zkmfa {

namespace fs = std::filesystem;

SramRead::SramRead(std::uint32_t cell_count) : cell_count_(cell_count) {
    if (cell_count == 0 || cell_count % 8 != 0) {
        throw InvalidParameters("SRAM cell count must be a positive multiple of 8");
    }
    bytes_.assign(cell_count / 8, 0);
}

SramRead::SramRead(Bytes bytes, std::uint32_t cell_count)
    : cell_count_(cell_count), bytes_(std::move(bytes)) {
    if (cell_count == 0 || cell_count % 8 != 0) {
        throw InvalidParameters("SRAM cell count must be a positive multiple of 8");
    }
    if (bytes_.size() != cell_count / 8) {
        throw InvalidInput("SRAM read must be " + std::to_string(cell_count / 8) +
                           " bytes, got " + std::to_string(bytes_.size()));
    }
}

namespace {

std::uint64_t probability_threshold(double p) {
    return static_cast<std::uint64_t>(std::ldexp(p, 32));
}

}  // namespace

SramDeviceModel synth_device(ByteView seed, const DeviceNoise& noise, std::string device_id,
                             std::uint32_t cell_count) {
    if (!(noise.flaky_fraction >= 0.0 && noise.flaky_fraction <= 1.0)) {
        throw InvalidParameters("flaky_fraction must be in [0, 1]");
    }
    if (!(noise.flaky_flip_prob >= 0.0 && noise.flaky_flip_prob <= 0.5)) {
        throw InvalidParameters("flaky_flip_prob must be in [0, 0.5]");
    }
    if (noise.model == NoiseModel::Beta && !(noise.beta_a > 0.0 && noise.beta_b > 0.0)) {
        throw InvalidParameters("beta parameters must be positive");
    }

    SramDeviceModel m;
    m.device_id_ = std::move(device_id);
    m.seed_.assign(seed.begin(), seed.end());
    m.noise_ = noise;

    XofStream nominal{as_bytes("zkmfa/sram/nominal"), seed};
    Bytes raw(cell_count / 8);
    nominal.fill(raw);
    m.nominal_ = SramRead(std::move(raw), cell_count);

    m.flip_prob_.assign(cell_count, 0.0);
    XofStream flaky{as_bytes("zkmfa/sram/flaky"), seed};
    XofStream strength{as_bytes("zkmfa/sram/strength"), seed};
    const std::uint64_t flaky_threshold = probability_threshold(noise.flaky_fraction);
    for (std::uint32_t i = 0; i < cell_count; ++i) {
        if (flaky.next_u32() >= flaky_threshold) {
            continue;
        }
        const double p = noise.model == NoiseModel::Beta
                             ? 0.5 * detail::beta_variate(strength, noise.beta_a, noise.beta_b)
                             : noise.flaky_flip_prob;
        if (p > 0.0) {
            m.flip_prob_[i] = p;
            m.noisy_.push_back({i, probability_threshold(p)});
        }
    }
    return m;
}

SramDeviceModel synth_device(ByteView seed, double flaky_fraction, double flaky_flip_prob) {
    DeviceNoise noise;
    noise.flaky_fraction = flaky_fraction;
    noise.flaky_flip_prob = flaky_flip_prob;
    return synth_device(seed, noise);
}

SramRead power_cycle_read(const SramDeviceModel& model, ByteView read_seed) {
    SramRead read = model.nominal();
    XofStream noise{as_bytes("zkmfa/sram/read"), read_seed};
    for (const auto& cell : model.noisy_cells()) {
        if (noise.next_u32() < cell.threshold) {
            read.flip(cell.index);
        }
    }
    return read;
}

BinaryTable project_read(const SramRead& read, std::span<const std::uint32_t> indices,
                         std::uint32_t rows, std::uint32_t cols) {
    if (indices.size() != static_cast<std::size_t>(rows) * cols) {
        throw InvalidInput("project_read: index count does not match table size");
    }
    std::vector<std::uint8_t> bits(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= read.cell_count()) {
            throw InvalidInput("project_read: cell index out of range");
        }
        bits[i] = read.bit(indices[i]) ? 1 : 0;
    }
    return BinaryTable(rows, cols, std::move(bits));
}

namespace {

void check_reads(std::span<const SramRead> reads) {
    if (reads.empty()) {
        throw InvalidInput("enroll_token: need at least one read");
    }
    for (const auto& r : reads) {
        if (r.cell_count() != kPufCells) {
            throw InvalidInput("malformed read: expected " + std::to_string(kPufCells) +
                               " bits, got " + std::to_string(r.cell_count()));
        }
    }
}

}  // namespace

TernaryTable enroll_token(std::span<const SramRead> reads,
                          std::span<const std::uint32_t> indices) {
    check_reads(reads);
    std::vector<BinaryTable> projected;
    projected.reserve(reads.size());
    for (const auto& r : reads) {
        projected.push_back(project_read(r, indices));
    }
    return superimpose(projected);
}

TernaryTable enroll_token(std::span<const SramRead> reads, const Nonce512& rn1,
                          const Password& pwd) {
    check_reads(reads);
    const auto indices = derive_cell_indices(rn1, pwd, kPufCells, kTableCells);
    return enroll_token(reads, indices);
}

BinaryTable one_shot_token_table(const SramRead& read, std::span<const std::uint32_t> indices) {
    check_reads(std::span<const SramRead>(&read, 1));
    return project_read(read, indices);
}

BinaryTable one_shot_token_table(const SramRead& read, const Nonce512& rn1, const Password& pwd) {
    check_reads(std::span<const SramRead>(&read, 1));
    return project_read(read, derive_cell_indices(rn1, pwd, kPufCells, kTableCells));
}

DumpSet load_dumps(const fs::path& directory) {
    std::error_code ec;
    if (!fs::is_directory(directory, ec)) {
        throw NotFound("dump directory not found: " + directory.string());
    }
    std::map<std::uint64_t, fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string name = entry.path().filename().string();
        if (name.size() <= 9 || !name.starts_with("read_") || !name.ends_with(".bin")) {
            continue;
        }
        const std::string_view digits(name.data() + 5, name.size() - 9);
        std::uint64_t k = 0;
        const auto [ptr, err] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (err != std::errc{} || ptr != digits.data() + digits.size()) {
            continue;
        }
        files.emplace(k, entry.path());
    }
    if (files.empty()) {
        throw NotFound("no read_<k>.bin files in " + directory.string());
    }
    DumpSet set;
    set.device_id = directory.filename().string();
    if (set.device_id.empty()) {
        set.device_id = directory.parent_path().filename().string();
    }
    for (const auto& [k, path] : files) {
        Bytes data = read_file(path);
        if (data.size() != kPufBytes) {
            throw FormatError(path.string() + ": expected " + std::to_string(kPufBytes) +
                              " bytes, got " + std::to_string(data.size()));
        }
        set.reads.emplace_back(std::move(data), kPufCells);
    }
    return set;
}

void write_dumps(const fs::path& directory, std::span<const SramRead> reads) {
    for (std::size_t k = 0; k < reads.size(); ++k) {
        write_file(directory / ("read_" + std::to_string(k) + ".bin"), reads[k].bytes());
    }
}

void save_device_model(const fs::path& path, const SramDeviceModel& model) {
    nlohmann::ordered_json j;
    j["device_id"] = model.device_id();
    j["M"] = model.cell_count();
    j["seed_hex"] = to_hex(model.seed());
    j["flaky_fraction"] = model.noise().flaky_fraction;
    j["flaky_flip_prob"] = model.noise().flaky_flip_prob;
    if (model.noise().model == NoiseModel::Beta) {
        j["noise_model"] = "beta";
        j["beta_a"] = model.noise().beta_a;
        j["beta_b"] = model.noise().beta_b;
    }
    write_text_file(path, j.dump(2) + "\n");
}

SramDeviceModel load_device_model(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
        DeviceNoise noise;
        noise.flaky_fraction = j.at("flaky_fraction").get<double>();
        noise.flaky_flip_prob = j.at("flaky_flip_prob").get<double>();
        const std::string model = j.value("noise_model", std::string("two_population"));
        if (model == "beta") {
            noise.model = NoiseModel::Beta;
            noise.beta_a = j.at("beta_a").get<double>();
            noise.beta_b = j.at("beta_b").get<double>();
        } else if (model != "two_population") {
            throw FormatError(path.string() + ": unknown noise_model '" + model + "'");
        }
        return synth_device(from_hex(j.at("seed_hex").get<std::string>()), noise,
                            j.at("device_id").get<std::string>(), j.at("M").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace zkmfa
