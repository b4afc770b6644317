#include "zkmfa/corpus.hpp"

#include <nlohmann/json.hpp>
#include <unistd.h>

#include <algorithm>

#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"
#include "zkmfa/runner.hpp"

namespace zkmfa {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kConfig = "golden.conf";

std::string golden_conf(std::uint64_t seed) {
    return "# Golden corpus run configuration (paths relative to this file)\n"
           "seed = " + std::to_string(seed) + "\n"
           "devices_dir = devices\n"
           "persons_dir = persons\n"
           "device = device_000\n"
           "person = person_000\n"
           "enroll_cycles = 3\n"
           "enroll_frames = 3\n"
           "probe_frames = 2\n"
           "impostor_probes = 2\n"
           "grid = 7:1:1, 7:2:4\n"
           "g = 7\n"
           "m = 1\n";
}

class ScratchDir {
public:
    ScratchDir() {
        std::string tmpl = (fs::temp_directory_path() / "zkmfa-golden-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) {
            throw IoError("cannot create scratch directory under " + fs::temp_directory_path().string());
        }
        path_ = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

// Writes everything except the manifest; returns artifacts with their digests.
std::vector<GoldenArtifact> write_corpus(const fs::path& root, std::uint64_t seed) {
    const std::string s = std::to_string(seed);
    std::vector<GoldenArtifact> out;
    auto add = [&](const fs::path& rel, std::string command) {
        out.push_back({rel.generic_string(), file_fingerprint(root / rel), std::move(command)});
    };

    SynthDataOptions opts;
    opts.persons = 3;
    opts.devices = 1;
    opts.reads = 4;
    opts.enroll_frames = 3;
    opts.probe_frames = 2;
    opts.seed = seed;
    const std::string synth_cmd =
        "zkmfa synth-data --persons 3 --devices 1 --reads 4 --enroll-frames 3 --probe-frames 2 --seed " + s +
        " --out corpus";
    for (const auto& rel : synth_data(opts, root)) {
        add(rel, synth_cmd);
    }

    write_text_file(root / kConfig, golden_conf(seed));
    add(kConfig, "(written by zkmfa verify-golden --regenerate)");

    const RunConfig cfg = load_run_config(root / kConfig);
    const Password pwd(kCorpusPassword);
    const std::string env = std::string("ZKMFA_PWD=") + kCorpusPassword + " ";

    write_table_file(root / "golden/token_device_000.tt", config_enroll_token(cfg, pwd));
    add("golden/token_device_000.tt",
        env + "zkmfa enroll --factor token --config corpus/golden.conf --out corpus/golden/token_device_000.tt");

    write_table_file(root / "golden/bio_person_000.tt", config_enroll_bio(cfg, pwd));
    add("golden/bio_person_000.tt",
        env + "zkmfa enroll --factor bio --config corpus/golden.conf --out corpus/golden/bio_person_000.tt");

    RunConfig sweep_cfg = cfg;
    sweep_cfg.sweep.password = kCorpusPassword;
    const SweepResult sweep = config_sweep(sweep_cfg);
    write_text_file(root / "golden/sweep.csv", sweep_csv(sweep.rows));
    add("golden/sweep.csv", env + "zkmfa sweep --config corpus/golden.conf --out corpus/golden");
    return out;
}

std::string describe_difference(const fs::path& a, const fs::path& b) {
    if (!fs::exists(a)) {
        return "missing from corpus";
    }
    if (!fs::exists(b)) {
        return "not produced by regeneration";
    }
    const Bytes x = read_file(a);
    const Bytes y = read_file(b);
    const auto [ia, ib] = std::mismatch(x.begin(), x.end(), y.begin(), y.end());
    std::string msg = "size " + std::to_string(x.size()) + " vs regenerated " + std::to_string(y.size());
    if (ia != x.end() || ib != y.end()) {
        msg += ", first difference at byte " + std::to_string(ia - x.begin());
    }
    return msg;
}

}  // namespace

std::vector<GoldenArtifact> generate_corpus(const fs::path& root, std::uint64_t seed) {
    std::vector<GoldenArtifact> artifacts = write_corpus(root, seed);
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["password"] = kCorpusPassword;
    j["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) {
        j["artifacts"].push_back({{"path", a.path}, {"sha3_256", a.sha3_256}, {"command", a.command}});
    }
    write_text_file(root / kManifest, j.dump(2) + "\n");
    return artifacts;
}

std::vector<GoldenArtifact> load_manifest(const fs::path& root) {
    const fs::path path = root / kManifest;
    if (!fs::exists(path)) {
        throw NotFound("golden corpus manifest not found: " + path.string());
    }
    std::vector<GoldenArtifact> out;
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        for (const auto& a : j.at("artifacts")) {
            out.push_back({a.at("path").get<std::string>(), a.at("sha3_256").get<std::string>(),
                           a.at("command").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return out;
}

GoldenReport verify_golden(const fs::path& root, std::optional<std::uint64_t> seed) {
    const std::vector<GoldenArtifact> manifest = load_manifest(root);
    std::uint64_t use_seed = kCorpusSeed;
    if (seed) {
        use_seed = *seed;
    } else {
        try {
            use_seed = nlohmann::json::parse(read_text_file(root / kManifest)).at("seed").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError((root / kManifest).string() + ": " + e.what());
        }
    }

    ScratchDir scratch;
    write_corpus(scratch.path(), use_seed);

    GoldenReport report;
    for (const auto& a : manifest) {
        ++report.checked;
        const fs::path on_disk = root / a.path;
        const fs::path regen = scratch.path() / a.path;
        const std::string disk_digest = fs::exists(on_disk) ? file_fingerprint(on_disk) : "";
        const std::string regen_digest = fs::exists(regen) ? file_fingerprint(regen) : "";
        if (disk_digest == a.sha3_256 && regen_digest == a.sha3_256) {
            continue;
        }
        std::string summary;
        if (disk_digest != a.sha3_256) {
            summary = "corpus file digest " + (disk_digest.empty() ? std::string("(missing)") : disk_digest) +
                      " != manifest " + a.sha3_256;
        } else {
            summary = "regenerated digest " + (regen_digest.empty() ? std::string("(missing)") : regen_digest) +
                      " != manifest " + a.sha3_256;
        }
        summary += "; " + describe_difference(on_disk, regen);
        report.mismatches.push_back({a.path, std::move(summary)});
    }
    return report;
}

}  // namespace zkmfa
