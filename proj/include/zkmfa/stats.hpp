#pragma once

// Desk-scale statistical evaluation: FAR/FRR sweeps through the full protocol,
// enrollment-count error curves, match-fraction histograms and the exact
// binomial key-bias test.

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zkmfa/biometric.hpp"
#include "zkmfa/protocol.hpp"
#include "zkmfa/puf.hpp"

namespace zkmfa {

/// Reproducible nonce for simulations: SHAKE-256(label || seed u64 BE || path u64 BE...).
Nonce512 seed_nonce(std::uint64_t seed, std::string_view label,
                    std::initializer_list<std::uint64_t> path = {});

/// Synthetic device `index` of a seeded run, and its k-th enrollment read.
SramDeviceModel synth_harness_device(std::uint64_t seed, std::uint32_t index,
                                     const DeviceNoise& noise = {});
SramRead harness_enroll_read(const SramDeviceModel& device, std::uint64_t seed, std::uint64_t k);

struct GridPoint {
    int g = 7;
    int m = 1;
    int frag_level = 1;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Default sweep grid: five (g, m, frag) configurations.
std::vector<GridPoint> default_grid();

struct SweepConfig {
    std::uint32_t persons = 30;
    std::uint32_t enroll_frames = 10;  // moment frames superimposed at enrollment
    std::uint32_t probe_frames = 10;   // genuine probes per person
    FrameKind probe_kind = FrameKind::Moment;
    std::uint32_t impostor_probes = 2;  // probes of every other person tried per enrollee
    std::vector<GridPoint> grid = default_grid();

    DeviceNoise token_noise;
    std::uint32_t enroll_cycles = 40;
    double moment_sigma = 0.5;
    double variation_sigma = 2.0;

    std::uint16_t Q = 384;
    std::uint16_t L = static_cast<std::uint16_t>(kKeyBits);
    int max_hamming = kDefaultMaxHamming;
    std::string password = "zkmfa-shared-password";

    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Run the full neighbourhood search even when a fragment is already known
    /// to be out of budget. Off by default: the outcome is the same unless SHA3 collides.
    bool exhaustive_rejects = false;

    /// Throws InvalidParameters.
    void validate() const;
};

/// Frames available to the harness, per person.
struct Population {
    std::vector<std::string> person_ids;
    std::vector<std::vector<LandmarkFrame>> enroll;  // [person][frame]
    std::vector<std::vector<LandmarkFrame>> probes;  // [person][frame]
};

Population synth_population(const SweepConfig& cfg);
/// Splits loaded per-person frames: the first enroll_frames moment frames enroll,
/// the remaining frames of probe_kind probe. Throws InvalidInput if too few.
Population population_from_frames(std::span<const std::vector<LandmarkFrame>> persons,
                                  const SweepConfig& cfg);

struct SweepRow {
    int g = 0;
    int m = 0;
    int frag_level = 0;
    double far_percent = 0.0;
    double frr_percent = 0.0;
    std::size_t genuine_tests = 0;
    std::size_t impostor_tests = 0;
    std::size_t genuine_rejects = 0;
    std::size_t impostor_accepts = 0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ascending FAR + FRR, ties in grid order
    KeyBits client_key_pool;     // concatenated client keys of accepted genuine trials
    KeyBits server_key_pool;     // the matching finalized server keys
};

SweepResult far_frr_sweep(const SweepConfig& cfg);
SweepResult far_frr_sweep(const SweepConfig& cfg, const Population& population,
                          const SramDeviceModel& device);

std::string sweep_csv(std::span<const SweepRow> rows);

struct CurveConfig {
    DeviceNoise noise;
    std::vector<std::uint32_t> cycles = {1, 5, 10, 20, 40};
    std::uint32_t trials = 1000;
    std::uint16_t Q = 384;
    std::uint16_t L = static_cast<std::uint16_t>(kKeyBits);
    std::string password = "zkmfa-shared-password";
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct CurvePoint {
    std::uint32_t cycles = 0;
    double mean_errors = 0.0;
    std::size_t max_errors = 0;
    double x_density = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Token-only key errors before reconciliation, versus enrollment cycles.
/// Enrollment reads are nested (N reads are a prefix of the N' > N reads).
std::vector<CurvePoint> enrollment_error_curve(const CurveConfig& cfg);
std::vector<CurvePoint> enrollment_error_curve(const CurveConfig& cfg, const SramDeviceModel& device);

std::string curve_csv(std::span<const CurvePoint> points);

struct SampleStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

SampleStats summarize(std::span<const double> values);

inline constexpr std::size_t kHistogramBins = 50;

struct Histogram {
    int g = 0;
    int m = 0;
    std::vector<std::size_t> genuine;   // kHistogramBins counts over [0, 1]
    std::vector<std::size_t> impostor;
    SampleStats genuine_stats;
    SampleStats impostor_stats;

    /// (mean_genuine - mean_impostor) / sqrt((var_genuine + var_impostor) / 2)
    double standardized_gap() const noexcept;
};

/// Match fraction of each biometric enrollment against single probe frames.
Histogram histogram_emit(const SweepConfig& cfg, int g, int m);
Histogram histogram_emit(const SweepConfig& cfg, const Population& population, int g, int m);

std::string histogram_csv(const Histogram& h);

struct BiasResult {
    std::size_t n = 0;
    std::size_t ones = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
};

/// Exact two-sided binomial test of p(1) = 0.5 (log-space) with a Wilson 95% interval.
BiasResult binomial_test(std::size_t n, std::size_t ones);
/// Throws InvalidInput on an empty pool.
BiasResult binomial_bias_test(std::span<const std::uint8_t> bits);

std::string bias_csv(std::span<const std::pair<std::string, BiasResult>> pools);

}  // namespace zkmfa
