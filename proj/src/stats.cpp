#include "zkmfa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "parallel.hpp"
#include "zkmfa/errors.hpp"

namespace zkmfa {

namespace {

std::string fmt_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

double percent(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Nonce512 seed_nonce(std::uint64_t seed, std::string_view label,
                    std::initializer_list<std::uint64_t> path) {
    Bytes b;
    b.reserve(8 * (1 + path.size()));
    auto put = [&b](std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) {
            b.push_back(static_cast<std::uint8_t>(v >> s));
        }
    };
    put(seed);
    for (std::uint64_t p : path) {
        put(p);
    }
    return Nonce512::derive(b, label);
}

SramDeviceModel synth_harness_device(std::uint64_t seed, std::uint32_t index,
                                     const DeviceNoise& noise) {
    char id[32];
    std::snprintf(id, sizeof id, "device_%03u", index);
    return synth_device(seed_nonce(seed, "zkmfa/harness/device", {index}).bytes(), noise, id);
}

SramRead harness_enroll_read(const SramDeviceModel& device, std::uint64_t seed, std::uint64_t k) {
    return power_cycle_read(device, seed_nonce(seed, "zkmfa/harness/enroll-read", {k}).bytes());
}

std::vector<GridPoint> default_grid() {
    return {{7, 1, 1}, {7, 2, 1}, {7, 2, 2}, {6, 2, 1}, {7, 2, 4}};
}

void SweepConfig::validate() const {
    if (persons < 2) {
        throw InvalidParameters("sweep needs at least 2 persons");
    }
    if (enroll_frames < 1 || probe_frames < 1) {
        throw InvalidParameters("sweep needs at least one enrollment and one probe frame");
    }
    if (impostor_probes > probe_frames) {
        throw InvalidParameters("impostor_probes cannot exceed probe_frames");
    }
    if (grid.empty()) {
        throw InvalidParameters("sweep grid is empty");
    }
    if (enroll_cycles < 1) {
        throw InvalidParameters("enroll_cycles must be >= 1");
    }
    if (max_hamming < 0 || max_hamming > 255) {
        throw InvalidParameters("max_hamming must be in [0, 255]");
    }
    for (const auto& gp : grid) {
        SessionParams p{gp.g, gp.m, Q, L, static_cast<std::uint8_t>(gp.frag_level),
                        static_cast<std::uint8_t>(max_hamming)};
        if (gp.frag_level < 1 || gp.frag_level > 255) {
            throw InvalidParameters("frag_level must be in [1, 255]");
        }
        p.validate();
    }
    if (!(moment_sigma >= 0.0) || !(variation_sigma >= 0.0)) {
        throw InvalidParameters("jitter sigmas must be non-negative");
    }
    Password check(password);
    (void)check;
}

Population synth_population(const SweepConfig& cfg) {
    Population pop;
    pop.person_ids.resize(cfg.persons);
    pop.enroll.resize(cfg.persons);
    pop.probes.resize(cfg.persons);
    for (std::uint32_t p = 0; p < cfg.persons; ++p) {
        char id[32];
        std::snprintf(id, sizeof id, "person_%03u", p);
        PersonModel model = synth_person(seed_nonce(cfg.seed, "zkmfa/harness/person", {p}).bytes(), id);
        model.moment_sigma = cfg.moment_sigma;
        model.variation_sigma = cfg.variation_sigma;
        pop.person_ids[p] = id;
        for (std::uint32_t f = 0; f < cfg.enroll_frames; ++f) {
            pop.enroll[p].push_back(synth_frame(
                model, FrameKind::Moment,
                seed_nonce(cfg.seed, "zkmfa/harness/enroll-frame", {p, f}).bytes(),
                "enroll_" + std::to_string(f)));
        }
        const bool moment = cfg.probe_kind == FrameKind::Moment;
        for (std::uint32_t f = 0; f < cfg.probe_frames; ++f) {
            pop.probes[p].push_back(synth_frame(
                model, cfg.probe_kind,
                seed_nonce(cfg.seed, moment ? "zkmfa/harness/probe-frame" : "zkmfa/harness/variation-frame",
                           {p, f})
                    .bytes(),
                (moment ? "probe_" : "variation_") + std::to_string(f)));
        }
    }
    return pop;
}

Population population_from_frames(std::span<const std::vector<LandmarkFrame>> persons,
                                  const SweepConfig& cfg) {
    Population pop;
    for (const auto& frames : persons) {
        std::vector<LandmarkFrame> enroll;
        std::vector<LandmarkFrame> probes;
        for (const auto& f : frames) {
            if (f.kind == FrameKind::Moment && enroll.size() < cfg.enroll_frames) {
                enroll.push_back(f);
            } else if (f.kind == cfg.probe_kind && probes.size() < cfg.probe_frames) {
                probes.push_back(f);
            }
        }
        const std::string id = frames.empty() ? std::string("?") : frames.front().person_id;
        if (enroll.size() < cfg.enroll_frames || probes.size() < cfg.probe_frames) {
            throw InvalidInput("person '" + id + "' has " + std::to_string(enroll.size()) +
                               " enrollment and " + std::to_string(probes.size()) +
                               " probe frames; need " + std::to_string(cfg.enroll_frames) + " and " +
                               std::to_string(cfg.probe_frames));
        }
        pop.person_ids.push_back(id);
        pop.enroll.push_back(std::move(enroll));
        pop.probes.push_back(std::move(probes));
    }
    return pop;
}

namespace {

struct PersonToken {
    Nonce512 rn1;
    std::vector<std::uint32_t> indices;
    TernaryTable token;
};

struct Trial {
    std::uint32_t enrollee;
    std::uint32_t source;
    std::uint32_t frame;
    bool genuine;
};

std::vector<Trial> make_trials(const SweepConfig& cfg, std::uint32_t persons) {
    std::vector<Trial> trials;
    for (std::uint32_t e = 0; e < persons; ++e) {
        for (std::uint32_t f = 0; f < cfg.probe_frames; ++f) {
            trials.push_back({e, e, f, true});
        }
        for (std::uint32_t o = 0; o < persons; ++o) {
            if (o == e) {
                continue;
            }
            for (std::uint32_t f = 0; f < cfg.impostor_probes; ++f) {
                trials.push_back({e, o, f, false});
            }
        }
    }
    return trials;
}

struct TrialOutcome {
    bool accepted = false;
    KeyBits client_key;
    KeyBits final_key;
};

bool within_budget(const KeyBits& server, const KeyBits& client, std::size_t frag_level,
                   int max_hamming) {
    const std::size_t len = server.size() / frag_level;
    for (std::size_t f = 0; f < frag_level; ++f) {
        std::size_t d = 0;
        for (std::size_t i = f * len; i < (f + 1) * len; ++i) {
            d += server[i] != client[i];
        }
        if (d > static_cast<std::size_t>(max_hamming)) {
            return false;
        }
    }
    return true;
}

}  // namespace

SweepResult far_frr_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const Population pop = synth_population(cfg);
    const SramDeviceModel device = synth_harness_device(cfg.seed, 0, cfg.token_noise);
    return far_frr_sweep(cfg, pop, device);
}

SweepResult far_frr_sweep(const SweepConfig& cfg, const Population& pop,
                          const SramDeviceModel& device) {
    cfg.validate();
    const auto persons = static_cast<std::uint32_t>(pop.enroll.size());
    if (persons < 2 || pop.probes.size() != persons) {
        throw InvalidInput("sweep population needs at least 2 persons");
    }
    for (std::uint32_t p = 0; p < persons; ++p) {
        if (pop.enroll[p].size() < cfg.enroll_frames || pop.probes[p].size() < cfg.probe_frames) {
            throw InvalidInput("population person " + std::to_string(p) + " has too few frames");
        }
    }
    const Password pwd(cfg.password);
    const Digest512 pwd_sha3 = pwd.digest512();
    const Digest256 pwd_sha256 = pwd.digest256();

    std::vector<SramRead> reads(cfg.enroll_cycles);
    detail::parallel_for(reads.size(), cfg.workers, [&](std::size_t k) {
        reads[k] = harness_enroll_read(device, cfg.seed, k);
    });

    std::vector<PersonToken> tokens(persons);
    detail::parallel_for(persons, cfg.workers, [&](std::size_t p) {
        PersonToken& t = tokens[p];
        t.rn1 = seed_nonce(cfg.seed, "zkmfa/harness/rn1", {p});
        t.indices = derive_cell_indices(t.rn1, pwd_sha3, kPufCells, kTableCells);
        t.token = enroll_token(reads, t.indices);
    });
    reads.clear();

    const std::vector<Trial> trials = make_trials(cfg, persons);
    SweepResult result;
    std::vector<std::uint8_t> client_pool;
    std::vector<std::uint8_t> server_pool;

    for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
        const GridPoint& gp = cfg.grid[gi];
        SessionParams sp{gp.g, gp.m, cfg.Q, cfg.L, static_cast<std::uint8_t>(gp.frag_level),
                         static_cast<std::uint8_t>(cfg.max_hamming)};

        std::vector<BioChallenge> challenges(persons);
        std::vector<std::shared_ptr<const Enrollment>> enrollments(persons);
        detail::parallel_for(persons, cfg.workers, [&](std::size_t p) {
            challenges[p] = make_bio_challenge(tokens[p].rn1, pwd_sha3, pwd_sha256, sp.quant());
            enrollments[p] = make_enrollment(tokens[p].token, enroll_bio(pop.enroll[p], challenges[p]),
                                             tokens[p].rn1, pwd_sha3, sp);
        });

        std::vector<TrialOutcome> outcomes(trials.size());
        detail::parallel_for(trials.size(), cfg.workers, [&](std::size_t t) {
            const Trial& trial = trials[t];
            const Nonce512 rn2 = seed_nonce(cfg.seed, "zkmfa/harness/rn2", {gi, t});
            const SramRead read = power_cycle_read(
                device, seed_nonce(cfg.seed, "zkmfa/harness/probe-read", {gi, t}).bytes());
            const BinaryTable token_table = project_read(read, tokens[trial.enrollee].indices);
            const BinaryTable bio_table =
                response_table(pop.probes[trial.source][trial.frame], challenges[trial.enrollee]);

            ServerSession server(enrollments[trial.enrollee]);
            const ChallengeMessage msg = server_challenge(server, rn2);
            TrialOutcome& out = outcomes[t];
            std::pair<ClientSession, ResponseMessage> client;
            try {
                client = client_keygen_from_tables(msg, token_table, bio_table, pwd_sha3);
            } catch (const InsufficientStableBits&) {
                return;
            }
            out.client_key = client.first.key;

            if (!cfg.exhaustive_rejects) {
                ChallengeIndexStream stream(rn2, pwd_sha3, kTableCells);
                try {
                    const auto collected = collect_stable_bits(server.composite(), stream, sp.Q, sp.L);
                    if (!within_budget(derive_key(collected, sp.L), out.client_key, sp.frag_level,
                                       sp.max_hamming)) {
                        return;
                    }
                } catch (const InsufficientStableBits&) {
                    return;
                }
            }
            try {
                const VerifyOutcome v = server_verify(server, client.second);
                out.accepted = v.accepted;
                if (v.accepted) {
                    out.final_key = v.reconciliation.key;
                }
            } catch (const InsufficientStableBits&) {
                out.accepted = false;
            }
        });

        SweepRow row;
        row.g = gp.g;
        row.m = gp.m;
        row.frag_level = gp.frag_level;
        for (std::size_t t = 0; t < trials.size(); ++t) {
            const TrialOutcome& o = outcomes[t];
            if (trials[t].genuine) {
                ++row.genuine_tests;
                if (!o.accepted) {
                    ++row.genuine_rejects;
                } else {
                    client_pool.insert(client_pool.end(), o.client_key.bits().begin(),
                                       o.client_key.bits().end());
                    server_pool.insert(server_pool.end(), o.final_key.bits().begin(),
                                       o.final_key.bits().end());
                }
            } else {
                ++row.impostor_tests;
                if (o.accepted) {
                    ++row.impostor_accepts;
                }
            }
        }
        row.far_percent = percent(row.impostor_accepts, row.impostor_tests);
        row.frr_percent = percent(row.genuine_rejects, row.genuine_tests);
        result.rows.push_back(row);
    }

    std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.far_percent + a.frr_percent < b.far_percent + b.frr_percent;
    });
    result.client_key_pool = KeyBits(std::move(client_pool));
    result.server_key_pool = KeyBits(std::move(server_pool));
    return result;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out =
        "g,m,frag_level,far_percent,frr_percent,genuine_tests,impostor_tests,genuine_rejects,"
        "impostor_accepts\n";
    for (const auto& r : rows) {
        out += std::to_string(r.g) + "," + std::to_string(r.m) + "," + std::to_string(r.frag_level) +
               "," + fmt_double(r.far_percent, 4) + "," + fmt_double(r.frr_percent, 4) + "," +
               std::to_string(r.genuine_tests) + "," + std::to_string(r.impostor_tests) + "," +
               std::to_string(r.genuine_rejects) + "," + std::to_string(r.impostor_accepts) + "\n";
    }
    return out;
}

std::vector<CurvePoint> enrollment_error_curve(const CurveConfig& cfg) {
    const SramDeviceModel device = synth_harness_device(cfg.seed, 0, cfg.noise);
    return enrollment_error_curve(cfg, device);
}

std::vector<CurvePoint> enrollment_error_curve(const CurveConfig& cfg,
                                               const SramDeviceModel& device) {
    if (cfg.cycles.empty() || cfg.trials == 0) {
        throw InvalidParameters("curve needs at least one cycle count and one trial");
    }
    if (cfg.cycles.front() < 1 || !std::is_sorted(cfg.cycles.begin(), cfg.cycles.end())) {
        throw InvalidParameters("cycle counts must be ascending and >= 1");
    }
    const SessionParams sp{7, 1, cfg.Q, cfg.L, 1, kDefaultMaxHamming};
    sp.validate();

    const Password pwd(cfg.password);
    const Digest512 pwd_sha3 = pwd.digest512();
    const Nonce512 rn1 = seed_nonce(cfg.seed, "zkmfa/harness/rn1", {});
    const auto indices = derive_cell_indices(rn1, pwd_sha3, kPufCells, kTableCells);

    const std::uint32_t max_cycles = cfg.cycles.back();
    std::vector<BinaryTable> enrolled(max_cycles);
    detail::parallel_for(max_cycles, cfg.workers, [&](std::size_t k) {
        enrolled[k] = project_read(harness_enroll_read(device, cfg.seed, k), indices);
    });
    std::vector<BinaryTable> probes(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
        probes[t] = project_read(
            power_cycle_read(device, seed_nonce(cfg.seed, "zkmfa/harness/probe-read", {t}).bytes()),
            indices);
    });

    std::vector<CurvePoint> points;
    for (std::uint32_t n : cfg.cycles) {
        const TernaryTable table =
            superimpose(std::span<const BinaryTable>(enrolled.data(), n));
        const MaskVector mask = mask_of(table);
        std::vector<std::size_t> errors(cfg.trials);
        detail::parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
            const Nonce512 rn2 = seed_nonce(cfg.seed, "zkmfa/harness/rn2", {t});
            ChallengeIndexStream server_stream(rn2, pwd_sha3, kTableCells);
            const KeyBits server_key =
                derive_key(collect_stable_bits(table, server_stream, sp.Q, sp.L), sp.L);
            ChallengeIndexStream client_stream(rn2, pwd_sha3, kTableCells);
            const KeyBits client_key = derive_key(
                collect_stable_bits(apply_mask(probes[t], mask), client_stream, sp.Q, sp.L), sp.L);
            errors[t] = hamming_distance(server_key, client_key);
        });
        CurvePoint pt;
        pt.cycles = n;
        std::size_t total = 0;
        for (std::size_t e : errors) {
            total += e;
            pt.max_errors = std::max(pt.max_errors, e);
        }
        pt.mean_errors = static_cast<double>(total) / static_cast<double>(cfg.trials);
        pt.x_density = table.x_density();
        points.push_back(pt);
    }
    return points;
}

std::string curve_csv(std::span<const CurvePoint> points) {
    std::string out = "cycles,mean_errors,max_errors,x_density\n";
    for (const auto& p : points) {
        out += std::to_string(p.cycles) + "," + fmt_double(p.mean_errors, 6) + "," +
               std::to_string(p.max_errors) + "," + fmt_double(p.x_density, 6) + "\n";
    }
    return out;
}

SampleStats summarize(std::span<const double> values) {
    SampleStats s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.variance = sq / static_cast<double>(values.size());
    return s;
}

double Histogram::standardized_gap() const noexcept {
    const double pooled = std::sqrt((genuine_stats.variance + impostor_stats.variance) / 2.0);
    const double diff = genuine_stats.mean - impostor_stats.mean;
    if (pooled == 0.0) {
        return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return diff / pooled;
}

Histogram histogram_emit(const SweepConfig& cfg, int g, int m) {
    return histogram_emit(cfg, synth_population(cfg), g, m);
}

Histogram histogram_emit(const SweepConfig& cfg, const Population& pop, int g, int m) {
    const QuantParams qp{g, m, kFrameSize};
    qp.validate();
    const auto persons = static_cast<std::uint32_t>(pop.enroll.size());
    if (persons < 2) {
        throw InvalidInput("histogram needs at least 2 persons");
    }
    const Password pwd(cfg.password);
    const Digest512 pwd_sha3 = pwd.digest512();
    const Digest256 pwd_sha256 = pwd.digest256();

    std::vector<BioChallenge> challenges(persons);
    std::vector<TernaryTable> refs(persons);
    detail::parallel_for(persons, cfg.workers, [&](std::size_t p) {
        challenges[p] = make_bio_challenge(seed_nonce(cfg.seed, "zkmfa/harness/rn1", {p}),
                                           pwd_sha3, pwd_sha256, qp);
        refs[p] = enroll_bio(pop.enroll[p], challenges[p]);
    });

    const std::vector<Trial> trials = make_trials(cfg, persons);
    std::vector<double> fractions(trials.size());
    detail::parallel_for(trials.size(), cfg.workers, [&](std::size_t t) {
        const Trial& trial = trials[t];
        fractions[t] = match_fraction(
            refs[trial.enrollee],
            response_table(pop.probes[trial.source][trial.frame], challenges[trial.enrollee]));
    });

    Histogram h;
    h.g = g;
    h.m = m;
    h.genuine.assign(kHistogramBins, 0);
    h.impostor.assign(kHistogramBins, 0);
    std::vector<double> genuine;
    std::vector<double> impostor;
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const double x = fractions[t];
        const auto bin = std::min<std::size_t>(kHistogramBins - 1,
                                               static_cast<std::size_t>(x * kHistogramBins));
        if (trials[t].genuine) {
            ++h.genuine[bin];
            genuine.push_back(x);
        } else {
            ++h.impostor[bin];
            impostor.push_back(x);
        }
    }
    h.genuine_stats = summarize(genuine);
    h.impostor_stats = summarize(impostor);
    return h;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_low,bin_high,genuine_count,impostor_count\n";
    for (std::size_t b = 0; b < h.genuine.size(); ++b) {
        out += fmt_double(static_cast<double>(b) / kHistogramBins, 2) + "," +
               fmt_double(static_cast<double>(b + 1) / kHistogramBins, 2) + "," +
               std::to_string(h.genuine[b]) + "," + std::to_string(h.impostor[b]) + "\n";
    }
    return out;
}

namespace {

double log_pmf_half(std::size_t n, std::size_t k) {
    const double dn = static_cast<double>(n);
    return std::lgamma(dn + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0) - dn * std::log(2.0);
}

// Relative slack when comparing outcome probabilities, so ties computed with
// rounding error are still counted as "as extreme".
constexpr double kTieTolerance = 1e-7;

}  // namespace

BiasResult binomial_test(std::size_t n, std::size_t ones) {
    if (n == 0) {
        throw InvalidInput("binomial test needs n >= 1");
    }
    if (ones > n) {
        throw InvalidInput("ones count exceeds n");
    }
    BiasResult r;
    r.n = n;
    r.ones = ones;
    r.p_hat = static_cast<double>(ones) / static_cast<double>(n);

    // The null is symmetric, so test the lower-tail representative.
    const std::size_t k = std::min(ones, n - ones);
    const double threshold = log_pmf_half(n, k) + std::log1p(kTieTolerance);
    double log_max = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    for (std::size_t j = 0; j <= n; ++j) {
        const double lp = log_pmf_half(n, std::min(j, n - j));
        if (lp <= threshold) {
            terms.push_back(lp);
            log_max = std::max(log_max, lp);
        }
    }
    double sum = 0.0;
    for (double lp : terms) {
        sum += std::exp(lp - log_max);
    }
    r.p_value = std::min(1.0, std::exp(log_max + std::log(sum)));

    constexpr double z = 1.959963984540054;
    const double dn = static_cast<double>(n);
    const double denom = 1.0 + z * z / dn;
    const double center = (r.p_hat + z * z / (2.0 * dn)) / denom;
    const double half =
        z / denom * std::sqrt(r.p_hat * (1.0 - r.p_hat) / dn + z * z / (4.0 * dn * dn));
    r.ci_low = std::max(0.0, center - half);
    r.ci_high = std::min(1.0, center + half);
    return r;
}

BiasResult binomial_bias_test(std::span<const std::uint8_t> bits) {
    if (bits.empty()) {
        throw InvalidInput("binomial_bias_test: empty bit pool");
    }
    std::size_t ones = 0;
    for (std::uint8_t b : bits) {
        ones += b != 0;
    }
    return binomial_test(bits.size(), ones);
}

std::string bias_csv(std::span<const std::pair<std::string, BiasResult>> pools) {
    std::string out = "pool,n,ones,p_hat,ci_low,ci_high,p_value\n";
    for (const auto& [name, r] : pools) {
        out += name + "," + std::to_string(r.n) + "," + std::to_string(r.ones) + "," +
               fmt_double(r.p_hat, 6) + "," + fmt_double(r.ci_low, 6) + "," +
               fmt_double(r.ci_high, 6) + "," + fmt_double(r.p_value, 6) + "\n";
    }
    return out;
}

}  // namespace zkmfa
