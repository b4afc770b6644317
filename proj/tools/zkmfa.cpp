// zkmfa: command-line front end.
//
// Exit codes: 0 success/accept, 1 input error, 2 usage error, 3 authentication
// reject, 4 transport error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <termios.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "zkmfa/config.hpp"
#include "zkmfa/corpus.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"
#include "zkmfa/runner.hpp"
#include "zkmfa/transport.hpp"

namespace fs = std::filesystem;
using namespace zkmfa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;
constexpr int kExitTransport = 4;

constexpr const char* kVersion = "0.1.0";

struct Rejected {
    std::string why;
};

// Reads the password from ZKMFA_PWD, else from the terminal with echo off, else
// one line of stdin. Never from argv.
Password read_password() {
    if (const char* env = std::getenv("ZKMFA_PWD"); env != nullptr && *env != '\0') {
        return Password(env);
    }
    std::string line;
    if (::isatty(STDIN_FILENO)) {
        std::cerr << "password: " << std::flush;
        termios old{};
        ::tcgetattr(STDIN_FILENO, &old);
        termios quiet = old;
        quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
        std::getline(std::cin, line);
        ::tcsetattr(STDIN_FILENO, TCSANOW, &old);
        std::cerr << "\n";
    } else {
        std::getline(std::cin, line);
    }
    if (line.empty()) {
        throw InvalidInput("no password: set ZKMFA_PWD or enter one at the prompt");
    }
    return Password(line);
}

// Harness runs use a shared evaluation password; ZKMFA_PWD overrides it.
std::string harness_password(std::string fallback, std::string& source) {
    if (const char* env = std::getenv("ZKMFA_PWD"); env != nullptr && *env != '\0') {
        source = "env:ZKMFA_PWD";
        return env;
    }
    source = "harness default";
    return fallback;
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg = load_run_config(path);
    check_input_paths(cfg);
    return cfg;
}

fs::path resolve_out(const RunConfig& cfg, const std::string& flag) {
    if (!flag.empty()) {
        return flag;
    }
    if (cfg.out_dir) {
        return *cfg.out_dir;
    }
    throw InvalidInput("no output directory: pass --out or set out_dir");
}

void write_manifest(const fs::path& out, const std::string& command, const std::string& config_path,
                    const RunConfig& cfg, const std::vector<fs::path>& outputs,
                    const std::string& password_source) {
    nlohmann::ordered_json j;
    j["tool"] = "zkmfa";
    j["version"] = kVersion;
    j["command"] = command;
    j["config_file"] = config_path;
    j["config_sha3_256"] = file_fingerprint(config_path);
    j["seed"] = cfg.sweep.seed;
    j["workers"] = cfg.sweep.workers;
    nlohmann::ordered_json entries = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.entries) {
        entries[k] = v;
    }
    j["config"] = entries;
    j["password_source"] = password_source;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& p : outputs) {
        j["outputs"].push_back({{"path", p.filename().string()}, {"sha3_256", file_fingerprint(p)}});
    }
    write_text_file(out / "run_manifest.json", j.dump(2) + "\n");
}

void print_verdict(bool accepted, std::size_t corrected, const std::optional<KeyBits>& key) {
    if (accepted) {
        std::cout << "ACCEPT, corrected=" << corrected << "\n";
    } else {
        std::cout << "REJECT\n";
    }
    if (key) {
        std::cout << "key_fingerprint=" << to_hex(key_fingerprint(*key)) << "\n";
    }
}

int cmd_keygen_loopback(const RunConfig& cfg) {
    const Password pwd = read_password();
    ServerSession server = config_server(cfg, pwd);
    const ClientInputs in = config_client_inputs(cfg, 0);
    LoopbackResult r;
    try {
        r = run_loopback(server, config_rn2(cfg, 0), in.token_read, in.frame, pwd, cfg.inject_flips);
    } catch (const InsufficientStableBits& e) {
        throw Rejected{e.what()};
    }
    print_verdict(r.accepted, r.corrected_bits, r.final_key);
    return r.accepted ? kExitOk : kExitReject;
}

int cmd_keygen_serve(const RunConfig& cfg) {
    const Password pwd = read_password();
    TcpListener listener(cfg.host, cfg.port);
    std::cout << "listening on " << cfg.host << ":" << listener.port() << std::endl;
    bool all_accepted = true;
    for (std::uint32_t s = 0; s < cfg.sessions; ++s) {
        ServerSession server = config_server(cfg, pwd);
        FramedSocket sock = listener.accept(cfg.timeout_ms);
        const ChallengeMessage challenge = server_challenge(server, Nonce512::random());
        VerdictMessage verdict;
        verdict.session_id = challenge.session_id;
        std::optional<KeyBits> final_key;
        ResponseMessage response;
        try {
            sock.send_frame(encode(challenge));
            response = decode_response(sock.receive_frame());
        } catch (const Error& e) {
            // A client that aborts or sends garbage only ends its own session.
            std::cout << "session " << s << ": REJECT (" << e.what() << ")" << std::endl;
            all_accepted = false;
            continue;
        }
        try {
            const VerifyOutcome v = server_verify(server, response);
            verdict.accepted = v.accepted;
            verdict.corrected_bits = static_cast<std::uint16_t>(v.reconciliation.corrected_bits);
            if (v.accepted) {
                final_key = v.reconciliation.key;
            }
        } catch (const InsufficientStableBits&) {
            verdict.accepted = false;
        }
        sock.send_frame(encode(verdict));
        std::cout << "session " << s << ": ";
        print_verdict(verdict.accepted, verdict.corrected_bits, final_key);
        std::cout << std::flush;
        all_accepted = all_accepted && verdict.accepted;
    }
    return all_accepted ? kExitOk : kExitReject;
}

int cmd_keygen_connect(const RunConfig& cfg) {
    const Password pwd = read_password();
    const ClientInputs in = config_client_inputs(cfg, 0);
    FramedSocket sock = FramedSocket::connect(cfg.host, cfg.port, cfg.timeout_ms);
    const ChallengeMessage challenge = decode_challenge(sock.receive_frame());
    std::pair<ClientSession, ResponseMessage> client;
    try {
        client = client_keygen(challenge, in.token_read, in.frame, pwd);
    } catch (const InsufficientStableBits& e) {
        // The server is left waiting; closing the socket ends its session.
        throw Rejected{e.what()};
    }
    sock.send_frame(encode(client.second));
    const VerdictMessage verdict = decode_verdict(sock.receive_frame());
    if (verdict.session_id != client.first.session_id) {
        throw TransportError("verdict for a different session");
    }
    print_verdict(verdict.accepted, verdict.corrected_bits,
                  verdict.accepted ? std::optional<KeyBits>(client.first.key) : std::nullopt);
    return verdict.accepted ? kExitOk : kExitReject;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zkmfa: fused SRAM-PUF and facial-landmark ephemeral keys"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SynthDataOptions synth;
    std::string synth_out;
    auto* c_synth = app.add_subcommand("synth-data", "Write synthetic persons and devices");
    c_synth->add_option("--persons", synth.persons, "Number of persons")->required()->check(CLI::PositiveNumber);
    c_synth->add_option("--devices", synth.devices, "Number of devices")->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Run seed")->capture_default_str();
    c_synth->add_option("--reads", synth.reads, "Power-cycle reads per device")->capture_default_str();
    c_synth->add_option("--enroll-frames", synth.enroll_frames, "Moment frames for enrollment")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_synth->add_option("--probe-frames", synth.probe_frames, "Moment and variation probe frames each")
        ->capture_default_str();
    c_synth->add_option("--flaky-fraction", synth.noise.flaky_fraction, "Fraction of flaky SRAM cells")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    c_synth->add_option("--flaky-flip-prob", synth.noise.flaky_flip_prob, "Flip probability of a flaky cell")
        ->check(CLI::Range(0.0, 0.5))->capture_default_str();
    c_synth->add_option("--moment-sigma", synth.moment_sigma, "Landmark jitter of moment frames (px)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_synth->add_option("--variation-sigma", synth.variation_sigma, "Landmark jitter of variation frames (px)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_synth->add_option("--out", synth_out, "Output directory")->required();

    std::string factor;
    std::string config_path;
    std::string out_path;
    auto* c_enroll = app.add_subcommand("enroll", "Enroll one factor into a TT01 table");
    c_enroll->add_option("--factor", factor, "token or bio")->required()->check(CLI::IsMember({"token", "bio"}));
    c_enroll->add_option("--config", config_path, "Run configuration")->required();
    c_enroll->add_option("--out", out_path, "Output .tt file")->required();

    std::string mode;
    auto* c_keygen = app.add_subcommand("keygen", "Run the key-agreement protocol");
    c_keygen->add_option("--mode", mode, "loopback, serve or connect")
        ->required()
        ->check(CLI::IsMember({"loopback", "serve", "connect"}));
    c_keygen->add_option("--config", config_path, "Run configuration")->required();

    std::vector<CLI::App*> stats_cmds;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"sweep", "FAR/FRR sweep over the configured grid"},
             {"curve", "Key errors versus enrollment cycles"},
             {"hist", "Genuine/impostor match-fraction histograms"},
             {"bias-test", "Binomial bias test on harvested keys"}}) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("--config", config_path, "Run configuration")->required();
        c->add_option("--out", out_path, "Output directory (default: out_dir from the config)");
        stats_cmds.push_back(c);
    }

    std::string corpus_dir = "corpus";
    std::optional<std::uint64_t> golden_seed;
    bool regenerate = false;
    auto* c_golden = app.add_subcommand("verify-golden", "Check the golden corpus");
    c_golden->add_option("--corpus", corpus_dir, "Corpus directory")->capture_default_str();
    c_golden->add_option("--seed", golden_seed, "Regenerate with this seed instead of the manifest's");
    c_golden->add_flag("--regenerate", regenerate, "Rewrite the corpus and manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_synth->parsed()) {
            const auto files = synth_data(synth, synth_out);
            std::cout << "wrote " << files.size() << " files under " << synth_out << "\n";
            return kExitOk;
        }
        if (c_enroll->parsed()) {
            const RunConfig cfg = load_config(config_path);
            const Password pwd = read_password();
            const TernaryTable t = factor == "token" ? config_enroll_token(cfg, pwd) : config_enroll_bio(cfg, pwd);
            write_table_file(out_path, t);
            std::printf("x_density=%.6f x_cells=%zu cells=%zu\n", t.x_density(), t.x_count(), t.size());
            return kExitOk;
        }
        if (c_keygen->parsed()) {
            const RunConfig cfg = load_config(config_path);
            if (mode == "loopback") return cmd_keygen_loopback(cfg);
            if (mode == "serve") return cmd_keygen_serve(cfg);
            return cmd_keygen_connect(cfg);
        }
        for (auto* c : stats_cmds) {
            if (!c->parsed()) {
                continue;
            }
            RunConfig cfg = load_config(config_path);
            const fs::path out = resolve_out(cfg, out_path);
            std::string pwd_source;
            cfg.sweep.password = harness_password(cfg.sweep.password, pwd_source);
            cfg.curve.password = cfg.sweep.password;
            std::vector<fs::path> outputs;
            const std::string name = c->get_name();
            if (name == "sweep") {
                const SweepResult r = config_sweep(cfg);
                const std::string csv = sweep_csv(r.rows);
                write_text_file(out / "sweep.csv", csv);
                outputs.push_back(out / "sweep.csv");
                std::cout << csv;
            } else if (name == "curve") {
                const auto pts = cfg.devices_dir ? enrollment_error_curve(cfg.curve, config_device(cfg))
                                                 : enrollment_error_curve(cfg.curve);
                const std::string csv = curve_csv(pts);
                write_text_file(out / "curve.csv", csv);
                outputs.push_back(out / "curve.csv");
                std::cout << csv;
            } else if (name == "hist") {
                cfg.sweep.validate();
                const Population pop = config_population(cfg);
                std::string summary = "g,m,genuine_mean,impostor_mean,standardized_gap\n";
                for (const auto& [g, m] : cfg.hist_grid) {
                    const Histogram h = histogram_emit(cfg.sweep, pop, g, m);
                    const fs::path p = out / ("hist_" + std::to_string(g) + "_" + std::to_string(m) + ".csv");
                    write_text_file(p, histogram_csv(h));
                    outputs.push_back(p);
                    char line[160];
                    std::snprintf(line, sizeof line, "%d,%d,%.6f,%.6f,%.6f\n", g, m, h.genuine_stats.mean,
                                  h.impostor_stats.mean, h.standardized_gap());
                    summary += line;
                }
                write_text_file(out / "hist_summary.csv", summary);
                outputs.push_back(out / "hist_summary.csv");
                std::cout << summary;
            } else {
                const SweepResult r = config_sweep(cfg);
                if (r.client_key_pool.size() == 0) {
                    throw InvalidInput("no accepted genuine trials: nothing to test");
                }
                const std::vector<std::pair<std::string, BiasResult>> pools = {
                    {"client_keys", binomial_bias_test(r.client_key_pool.bits())},
                    {"server_keys", binomial_bias_test(r.server_key_pool.bits())}};
                const std::string csv = bias_csv(pools);
                write_text_file(out / "bias.csv", csv);
                outputs.push_back(out / "bias.csv");
                std::cout << csv;
                std::printf("p_value=%.6f\n", pools.front().second.p_value);
            }
            write_manifest(out, name, config_path, cfg, outputs, pwd_source);
            return kExitOk;
        }
        if (c_golden->parsed()) {
            if (regenerate) {
                const auto arts = generate_corpus(corpus_dir, golden_seed.value_or(kCorpusSeed));
                std::cout << "regenerated " << arts.size() << " artifacts under " << corpus_dir << "\n";
                return kExitOk;
            }
            const GoldenReport report = verify_golden(corpus_dir, golden_seed);
            for (const auto& m : report.mismatches) {
                std::cout << "MISMATCH " << m.path << ": " << m.summary << "\n";
            }
            std::cout << report.checked - report.mismatches.size() << "/" << report.checked
                      << " artifacts match\n";
            return report.ok() ? kExitOk : kExitInput;
        }
    } catch (const Rejected& r) {
        std::cout << "REJECT\n";
        std::cerr << "reject: " << r.why << "\n";
        return kExitReject;
    } catch (const ReconciliationFailure& e) {
        std::cout << "REJECT\n";
        return kExitReject;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
