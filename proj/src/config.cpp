#include "zkmfa/config.hpp"

#include <charconv>
#include <functional>
#include <set>

#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

namespace zkmfa {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

template <class T>
T parse_int(std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw InvalidInput("expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_double(std::string_view v) {
    // from_chars for double is missing from older libstdc++; stod is locale-bound
    // but the C locale is never changed here.
    const std::string s(v);
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw InvalidInput("expected a number, got '" + s + "'");
    }
    return d;
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput("expected true/false, got '" + std::string(v) + "'");
}

std::vector<std::uint32_t> parse_u32_list(std::string_view v) {
    std::vector<std::uint32_t> out;
    for (auto item : split(v, ',')) {
        out.push_back(parse_int<std::uint32_t>(item));
    }
    return out;
}

std::vector<GridPoint> parse_grid(std::string_view v) {
    std::vector<GridPoint> out;
    for (auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3) {
            throw InvalidInput("grid entries are g:m:frag_level, got '" + std::string(item) + "'");
        }
        out.push_back({parse_int<int>(parts[0]), parse_int<int>(parts[1]), parse_int<int>(parts[2])});
    }
    return out;
}

std::vector<std::pair<int, int>> parse_gm_list(std::string_view v) {
    std::vector<std::pair<int, int>> out;
    for (auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
            throw InvalidInput("hist_grid entries are g:m, got '" + std::string(item) + "'");
        }
        out.emplace_back(parse_int<int>(parts[0]), parse_int<int>(parts[1]));
    }
    return out;
}

NoiseModel parse_noise_model(std::string_view v) {
    if (v == "two_population") return NoiseModel::TwoPopulation;
    if (v == "beta") return NoiseModel::Beta;
    throw InvalidInput("noise_model must be two_population or beta, got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed",
         [](RunConfig& c, std::string_view v) { c.sweep.seed = c.curve.seed = parse_int<std::uint64_t>(v); }},
        {"workers",
         [](RunConfig& c, std::string_view v) { c.sweep.workers = c.curve.workers = parse_int<unsigned>(v); }},
        {"persons", [](RunConfig& c, std::string_view v) { c.sweep.persons = parse_int<std::uint32_t>(v); }},
        {"enroll_frames",
         [](RunConfig& c, std::string_view v) { c.sweep.enroll_frames = parse_int<std::uint32_t>(v); }},
        {"probe_frames",
         [](RunConfig& c, std::string_view v) { c.sweep.probe_frames = parse_int<std::uint32_t>(v); }},
        {"probe_kind", [](RunConfig& c, std::string_view v) { c.sweep.probe_kind = frame_kind_from_string(v); }},
        {"impostor_probes",
         [](RunConfig& c, std::string_view v) { c.sweep.impostor_probes = parse_int<std::uint32_t>(v); }},
        {"grid", [](RunConfig& c, std::string_view v) { c.sweep.grid = parse_grid(v); }},
        {"enroll_cycles",
         [](RunConfig& c, std::string_view v) { c.sweep.enroll_cycles = parse_int<std::uint32_t>(v); }},
        {"moment_sigma", [](RunConfig& c, std::string_view v) { c.sweep.moment_sigma = parse_double(v); }},
        {"variation_sigma", [](RunConfig& c, std::string_view v) { c.sweep.variation_sigma = parse_double(v); }},
        {"exhaustive_rejects",
         [](RunConfig& c, std::string_view v) { c.sweep.exhaustive_rejects = parse_bool(v); }},
        {"flaky_fraction",
         [](RunConfig& c, std::string_view v) {
             c.sweep.token_noise.flaky_fraction = c.curve.noise.flaky_fraction = parse_double(v);
         }},
        {"flaky_flip_prob",
         [](RunConfig& c, std::string_view v) {
             c.sweep.token_noise.flaky_flip_prob = c.curve.noise.flaky_flip_prob = parse_double(v);
         }},
        {"noise_model",
         [](RunConfig& c, std::string_view v) {
             c.sweep.token_noise.model = c.curve.noise.model = parse_noise_model(v);
         }},
        {"beta_a",
         [](RunConfig& c, std::string_view v) {
             c.sweep.token_noise.beta_a = c.curve.noise.beta_a = parse_double(v);
         }},
        {"beta_b",
         [](RunConfig& c, std::string_view v) {
             c.sweep.token_noise.beta_b = c.curve.noise.beta_b = parse_double(v);
         }},
        {"g", [](RunConfig& c, std::string_view v) { c.session.g = parse_int<int>(v); }},
        {"m", [](RunConfig& c, std::string_view v) { c.session.m = parse_int<int>(v); }},
        {"Q",
         [](RunConfig& c, std::string_view v) {
             c.session.Q = c.sweep.Q = c.curve.Q = parse_int<std::uint16_t>(v);
         }},
        {"L",
         [](RunConfig& c, std::string_view v) {
             c.session.L = c.sweep.L = c.curve.L = parse_int<std::uint16_t>(v);
         }},
        {"frag_level",
         [](RunConfig& c, std::string_view v) { c.session.frag_level = parse_int<std::uint8_t>(v); }},
        {"max_hamming",
         [](RunConfig& c, std::string_view v) {
             c.session.max_hamming = parse_int<std::uint8_t>(v);
             c.sweep.max_hamming = c.session.max_hamming;
         }},
        {"cycles", [](RunConfig& c, std::string_view v) { c.curve.cycles = parse_u32_list(v); }},
        {"trials", [](RunConfig& c, std::string_view v) { c.curve.trials = parse_int<std::uint32_t>(v); }},
        {"hist_grid", [](RunConfig& c, std::string_view v) { c.hist_grid = parse_gm_list(v); }},
        {"devices_dir", [](RunConfig& c, std::string_view v) { c.devices_dir = std::string(v); }},
        {"persons_dir", [](RunConfig& c, std::string_view v) { c.persons_dir = std::string(v); }},
        {"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
        {"device", [](RunConfig& c, std::string_view v) { c.device = std::string(v); }},
        {"person", [](RunConfig& c, std::string_view v) { c.person = std::string(v); }},
        {"probe_person", [](RunConfig& c, std::string_view v) { c.probe_person = std::string(v); }},
        {"probe_frame", [](RunConfig& c, std::string_view v) { c.probe_frame = parse_int<std::uint32_t>(v); }},
        {"rn1_hex", [](RunConfig& c, std::string_view v) { c.rn1 = Nonce512::from_bytes(from_hex(v)); }},
        {"inject_flips", [](RunConfig& c, std::string_view v) { c.inject_flips = parse_int<std::size_t>(v); }},
        {"host", [](RunConfig& c, std::string_view v) { c.host = std::string(v); }},
        {"port", [](RunConfig& c, std::string_view v) { c.port = parse_int<std::uint16_t>(v); }},
        {"sessions", [](RunConfig& c, std::string_view v) { c.sessions = parse_int<std::uint32_t>(v); }},
        {"timeout_ms", [](RunConfig& c, std::string_view v) { c.timeout_ms = parse_int<int>(v); }},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) {
            k.push_back(name);
        }
        return k;
    }();
    return keys;
}

std::filesystem::path RunConfig::device_dir() const {
    if (!devices_dir) {
        throw InvalidInput("devices_dir is not configured");
    }
    return *devices_dir / device;
}

std::filesystem::path RunConfig::person_file(std::string_view person_id) const {
    if (!persons_dir) {
        throw InvalidInput("persons_dir is not configured");
    }
    return *persons_dir / (std::string(person_id) + ".json");
}

RunConfig parse_run_config(std::string_view text) {
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto hash = raw.find('#');
        const auto line = trim(raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(line_no);
        if (eq == std::string_view::npos) {
            throw FormatError(where + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw FormatError(where + ": unknown key '" + std::string(key) + "'");
        }
        if (!seen.insert(std::string(key)).second) {
            throw FormatError(where + ": key '" + std::string(key) + "' set twice");
        }
        if (value.empty()) {
            throw FormatError(where + ": empty value for '" + std::string(key) + "'");
        }
        try {
            it->second(cfg, value);
        } catch (const Error& e) {
            throw FormatError(where + " (" + std::string(key) + "): " + e.what());
        }
        cfg.entries.emplace_back(key, value);
    }
    cfg.sweep.max_hamming = cfg.session.max_hamming;
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig cfg;
    try {
        cfg = parse_run_config(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    for (auto* p : {&cfg.devices_dir, &cfg.persons_dir, &cfg.out_dir}) {
        if (*p && (*p)->is_relative()) {
            *p = base / **p;
        }
    }
    return cfg;
}

void check_input_paths(const RunConfig& cfg) {
    for (const auto* p : {&cfg.devices_dir, &cfg.persons_dir}) {
        if (*p && !std::filesystem::is_directory(**p)) {
            throw NotFound("directory not found: " + (*p)->string());
        }
    }
}

}  // namespace zkmfa
