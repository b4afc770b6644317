#pragma once

// Miniature regression corpus: 3 synthetic persons, 1 synthetic device, golden
// .tt tables and a golden sweep CSV, each recorded with its SHA3-256 digest and
// the command that produces it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zkmfa {

inline constexpr std::uint64_t kCorpusSeed = 7;
inline constexpr const char* kCorpusPassword = "zkmfa-shared-password";

struct GoldenArtifact {
    std::string path;  // relative to the corpus root, '/'-separated
    std::string sha3_256;
    std::string command;
};

/// Writes the corpus (inputs, golden outputs, golden.conf, manifest.json) under `root`.
std::vector<GoldenArtifact> generate_corpus(const std::filesystem::path& root,
                                            std::uint64_t seed = kCorpusSeed);

std::vector<GoldenArtifact> load_manifest(const std::filesystem::path& root);

struct GoldenMismatch {
    std::string path;
    std::string summary;
};

struct GoldenReport {
    std::size_t checked = 0;
    std::vector<GoldenMismatch> mismatches;

    bool ok() const noexcept { return mismatches.empty(); }
};

/// Regenerates every artifact into a scratch directory (with `seed` when given,
/// else the manifest's) and compares both the on-disk file and the regenerated
/// file against the manifest digest. Throws NotFound when the corpus is missing.
GoldenReport verify_golden(const std::filesystem::path& root,
                           std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace zkmfa
