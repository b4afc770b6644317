#pragma once

// Config-driven entry points shared by the command-line tool and the golden
// corpus regeneration, so both produce byte-identical artifacts.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zkmfa/config.hpp"

namespace zkmfa {

/// cfg.rn1 if set, else derived from the seed.
Nonce512 config_rn1(const RunConfig& cfg);
/// Nonce for session `index` of a run.
Nonce512 config_rn2(const RunConfig& cfg, std::uint64_t index);

/// The first enroll_cycles reads of the configured device. Throws InvalidInput if there are fewer.
std::vector<SramRead> config_enroll_reads(const RunConfig& cfg);
/// Read `enroll_cycles + index` from the dump directory when present, else a fresh
/// simulated read from the device's model.json.
SramRead config_probe_read(const RunConfig& cfg, std::uint64_t index);

/// Frames of one person file split into (enrollment moment frames, probe frames of probe_kind).
struct PersonFrames {
    std::string person_id;
    std::vector<LandmarkFrame> enroll;
    std::vector<LandmarkFrame> probes;
};
PersonFrames config_person(const RunConfig& cfg, std::string_view person_id);

TernaryTable config_enroll_token(const RunConfig& cfg, const Password& pwd);
TernaryTable config_enroll_bio(const RunConfig& cfg, const Password& pwd);

/// Server side of a run: enrollment of cfg.person on cfg.device.
ServerSession config_server(const RunConfig& cfg, const Password& pwd);
/// Client inputs: the probe read and cfg.probe_frame of the probe person.
struct ClientInputs {
    SramRead token_read;
    LandmarkFrame frame;
};
ClientInputs config_client_inputs(const RunConfig& cfg, std::uint64_t session_index);

/// Population from persons_dir (every *.json, sorted by name) or synthesized from the seed.
Population config_population(const RunConfig& cfg);
/// Device from devices_dir/<device>/model.json or synthesized from the seed.
SramDeviceModel config_device(const RunConfig& cfg);

SweepResult config_sweep(const RunConfig& cfg);

struct SynthDataOptions {
    std::uint32_t persons = 30;
    std::uint32_t devices = 1;
    std::uint32_t reads = 41;  // enrollment reads plus one probe read
    std::uint32_t enroll_frames = 10;
    std::uint32_t probe_frames = 10;  // moment probes, and as many variation frames
    std::uint64_t seed = 1;
    DeviceNoise noise;
    double moment_sigma = 0.5;
    double variation_sigma = 2.0;
};

/// Writes persons/person_<i>.json and devices/device_<i>/{model.json, read_<k>.bin}.
/// Returns the written files relative to `out`, in write order.
std::vector<std::filesystem::path> synth_data(const SynthDataOptions& opts,
                                              const std::filesystem::path& out);

}  // namespace zkmfa
