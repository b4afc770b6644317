#pragma once

// key=value run configuration shared by the CLI commands.
//
//   # comment
//   seed = 7
//   grid = 7:1:1, 7:2:4
//   device_dir = corpus/devices/device_000

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zkmfa/protocol.hpp"
#include "zkmfa/stats.hpp"

namespace zkmfa {

struct RunConfig {
    SweepConfig sweep;
    SessionParams session;
    CurveConfig curve;
    std::vector<std::pair<int, int>> hist_grid = {{7, 1}};

    std::optional<std::filesystem::path> devices_dir;  // holds <device_id>/model.json, read_*.bin
    std::optional<std::filesystem::path> persons_dir;  // holds *.json landmark files
    std::optional<std::filesystem::path> out_dir;
    std::string device = "device_000";
    std::string person = "person_000";
    std::optional<std::string> probe_person;  // defaults to `person`
    std::uint32_t probe_frame = 0;            // index among the probe-kind frames
    std::optional<Nonce512> rn1;              // else derived from the seed

    std::size_t inject_flips = 0;
    std::string host = "127.0.0.1";
    std::uint16_t port = 47061;
    std::uint32_t sessions = 1;
    int timeout_ms = 30000;

    /// Every key set in the file, in file order, for the run manifest.
    std::vector<std::pair<std::string, std::string>> entries;

    std::filesystem::path device_dir() const;
    std::filesystem::path person_file(std::string_view person_id) const;
};

/// Throws FormatError on syntax errors, unknown or repeated keys and bad values
/// (the message names the line).
RunConfig parse_run_config(std::string_view text);
/// As parse_run_config; relative paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

/// Keys accepted by parse_run_config.
const std::vector<std::string>& run_config_keys();

/// Throws NotFound for a configured input directory that does not exist.
void check_input_paths(const RunConfig& cfg);

}  // namespace zkmfa
