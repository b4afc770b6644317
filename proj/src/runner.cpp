#include "zkmfa/runner.hpp"

#include <algorithm>
#include <cstdio>

#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

namespace zkmfa {

namespace fs = std::filesystem;

Nonce512 config_rn1(const RunConfig& cfg) {
    return cfg.rn1 ? *cfg.rn1 : seed_nonce(cfg.sweep.seed, "zkmfa/cli/rn1");
}

Nonce512 config_rn2(const RunConfig& cfg, std::uint64_t index) {
    return seed_nonce(cfg.sweep.seed, "zkmfa/cli/rn2", {index});
}

std::vector<SramRead> config_enroll_reads(const RunConfig& cfg) {
    DumpSet dumps = load_dumps(cfg.device_dir());
    const std::size_t need = cfg.sweep.enroll_cycles;
    if (dumps.reads.size() < need) {
        throw InvalidInput(cfg.device_dir().string() + ": enroll_cycles = " + std::to_string(need) +
                           " but only " + std::to_string(dumps.reads.size()) + " reads found");
    }
    dumps.reads.resize(need);
    return std::move(dumps.reads);
}

SramRead config_probe_read(const RunConfig& cfg, std::uint64_t index) {
    const fs::path dir = cfg.device_dir();
    DumpSet dumps = load_dumps(dir);
    const std::size_t k = cfg.sweep.enroll_cycles + index;
    if (k < dumps.reads.size()) {
        return std::move(dumps.reads[k]);
    }
    const SramDeviceModel model = load_device_model(dir / "model.json");
    return power_cycle_read(model, seed_nonce(cfg.sweep.seed, "zkmfa/cli/probe-read", {index}).bytes());
}

PersonFrames config_person(const RunConfig& cfg, std::string_view person_id) {
    const fs::path path = cfg.person_file(person_id);
    std::vector<LandmarkFrame> frames = load_frames(path);
    PersonFrames out;
    out.person_id = frames.empty() ? std::string(person_id) : frames.front().person_id;
    for (auto& f : frames) {
        if (f.kind == FrameKind::Moment && out.enroll.size() < cfg.sweep.enroll_frames) {
            out.enroll.push_back(std::move(f));
        } else if (f.kind == cfg.sweep.probe_kind) {
            out.probes.push_back(std::move(f));
        }
    }
    if (out.enroll.size() < cfg.sweep.enroll_frames) {
        throw InvalidInput(path.string() + ": enroll_frames = " + std::to_string(cfg.sweep.enroll_frames) +
                           " but only " + std::to_string(out.enroll.size()) + " moment frames");
    }
    return out;
}

TernaryTable config_enroll_token(const RunConfig& cfg, const Password& pwd) {
    return enroll_token(config_enroll_reads(cfg), config_rn1(cfg), pwd);
}

TernaryTable config_enroll_bio(const RunConfig& cfg, const Password& pwd) {
    cfg.session.quant().validate();
    return enroll_bio(config_person(cfg, cfg.person).enroll, config_rn1(cfg), pwd, cfg.session.quant());
}

ServerSession config_server(const RunConfig& cfg, const Password& pwd) {
    cfg.session.validate();
    return server_enroll(config_enroll_reads(cfg), config_person(cfg, cfg.person).enroll, pwd,
                         config_rn1(cfg), cfg.session);
}

ClientInputs config_client_inputs(const RunConfig& cfg, std::uint64_t session_index) {
    const std::string who = cfg.probe_person.value_or(cfg.person);
    PersonFrames person = config_person(cfg, who);
    if (cfg.probe_frame >= person.probes.size()) {
        throw InvalidInput("person '" + who + "' has " + std::to_string(person.probes.size()) + " " +
                           to_string(cfg.sweep.probe_kind) + " probe frames; probe_frame = " +
                           std::to_string(cfg.probe_frame));
    }
    return {config_probe_read(cfg, session_index), std::move(person.probes[cfg.probe_frame])};
}

Population config_population(const RunConfig& cfg) {
    if (!cfg.persons_dir) {
        return synth_population(cfg.sweep);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*cfg.persons_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() < 2) {
        throw InvalidInput(cfg.persons_dir->string() + ": need at least 2 person files, found " +
                           std::to_string(files.size()));
    }
    std::vector<std::vector<LandmarkFrame>> persons;
    for (const auto& f : files) {
        persons.push_back(load_frames(f));
    }
    return population_from_frames(persons, cfg.sweep);
}

SramDeviceModel config_device(const RunConfig& cfg) {
    if (!cfg.devices_dir) {
        return synth_harness_device(cfg.sweep.seed, 0, cfg.sweep.token_noise);
    }
    return load_device_model(cfg.device_dir() / "model.json");
}

SweepResult config_sweep(const RunConfig& cfg) {
    cfg.sweep.validate();
    return far_frr_sweep(cfg.sweep, config_population(cfg), config_device(cfg));
}

std::vector<fs::path> synth_data(const SynthDataOptions& opts, const fs::path& out) {
    if (opts.persons < 1 || opts.devices < 1) {
        throw InvalidParameters("synth-data needs at least one person and one device");
    }
    if (opts.enroll_frames < 1) {
        throw InvalidParameters("synth-data needs at least one enrollment frame");
    }
    std::vector<fs::path> written;

    SweepConfig moment;
    moment.persons = opts.persons;
    moment.enroll_frames = opts.enroll_frames;
    moment.probe_frames = opts.probe_frames;
    moment.impostor_probes = 0;
    moment.seed = opts.seed;
    moment.moment_sigma = opts.moment_sigma;
    moment.variation_sigma = opts.variation_sigma;
    SweepConfig variation = moment;
    variation.probe_kind = FrameKind::Variation;
    // Enrollment frames are identical in both populations; only probes differ.
    const Population pm = synth_population(moment);
    const Population pv = synth_population(variation);
    for (std::uint32_t p = 0; p < opts.persons; ++p) {
        std::vector<LandmarkFrame> frames = pm.enroll[p];
        frames.insert(frames.end(), pm.probes[p].begin(), pm.probes[p].end());
        frames.insert(frames.end(), pv.probes[p].begin(), pv.probes[p].end());
        for (auto& f : frames) {
            f.person_id = pm.person_ids[p];
        }
        const fs::path rel = fs::path("persons") / (pm.person_ids[p] + ".json");
        save_frames(out / rel, pm.person_ids[p], frames);
        written.push_back(rel);
    }

    for (std::uint32_t d = 0; d < opts.devices; ++d) {
        const SramDeviceModel model = synth_harness_device(opts.seed, d, opts.noise);
        const fs::path dir = fs::path("devices") / model.device_id();
        save_device_model(out / dir / "model.json", model);
        written.push_back(dir / "model.json");
        for (std::uint32_t k = 0; k < opts.reads; ++k) {
            const SramRead read = harness_enroll_read(model, opts.seed, k);
            const fs::path rel = dir / ("read_" + std::to_string(k) + ".bin");
            write_file(out / rel, read.bytes());
            written.push_back(rel);
        }
    }
    return written;
}

}  // namespace zkmfa
