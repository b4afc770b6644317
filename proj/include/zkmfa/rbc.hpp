#pragma once

// Response-based cryptography: the verifier holds a noisy copy of the key and
// searches its Hamming neighbourhood, fragment by fragment, for digests that
// match the prover's.

#include <cstdint>
#include <span>
#include <vector>

#include "zkmfa/errors.hpp"
#include "zkmfa/hash.hpp"

namespace zkmfa {

inline constexpr std::size_t kKeyBits = 256;
inline constexpr int kDefaultMaxHamming = 3;

class KeyBits {
public:
    KeyBits() = default;
    explicit KeyBits(std::size_t length) : bits_(length, 0) {}
    /// `bits` values must be 0 or 1.
    explicit KeyBits(std::vector<std::uint8_t> bits);

    std::size_t size() const noexcept { return bits_.size(); }
    std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
    void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }
    void flip(std::size_t i) noexcept { bits_[i] ^= 1; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    /// MSB-first packing, zero-padded to a byte boundary.
    Bytes pack() const;

    friend bool operator==(const KeyBits&, const KeyBits&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const KeyBits& a, const KeyBits& b);

/// SHA3-256 fingerprint of the packed key; safe to print.
Digest256 key_fingerprint(const KeyBits& key);

struct FragmentDigestSet {
    std::vector<Digest256> digests;

    std::size_t frag_level() const noexcept { return digests.size(); }
    friend bool operator==(const FragmentDigestSet&, const FragmentDigestSet&) = default;
};

/// Throws InvalidParameters unless 1 <= frag_level <= 255 and frag_level divides L.
void check_frag_level(std::size_t key_length, std::size_t frag_level);

/// Contiguous equal-length fragments, in key order.
std::vector<KeyBits> fragment(const KeyBits& key, std::size_t frag_level);

/// SHA3-256(pack(fragment) || index) with the fragment index as one byte.
Digest256 fragment_digest(std::span<const std::uint8_t> fragment_bits, std::uint8_t index);
FragmentDigestSet digest_fragments(const KeyBits& key, std::size_t frag_level);

enum class FragmentStatus { Matched, Corrected, Unresolved };

struct FragmentReport {
    FragmentStatus status = FragmentStatus::Unresolved;
    int distance = -1;  // flips applied; -1 when unresolved
    std::uint64_t candidates_tested = 0;
};

struct ReconcileResult {
    bool success = false;
    KeyBits key;  // the corrected key on success, the input key otherwise
    std::vector<FragmentReport> fragments;
    std::size_t corrected_bits = 0;

    std::uint64_t candidates_tested() const noexcept;
};

class ReconciliationFailure : public Error {
public:
    explicit ReconciliationFailure(std::vector<FragmentReport> fragments);
    const std::vector<FragmentReport>& fragments() const noexcept { return fragments_; }

private:
    std::vector<FragmentReport> fragments_;
};

/// Sum over t = 0..max_hamming of C(n, t): the worst-case digests per fragment.
std::uint64_t search_space_size(std::size_t fragment_length, int max_hamming);

/// Each fragment: direct check, then distances 1..max_hamming with flip
/// positions in lexicographic order. Every fragment is searched, even after a
/// failure, so the report is complete.
ReconcileResult try_reconcile(const KeyBits& server_key, const FragmentDigestSet& expected,
                              int max_hamming = kDefaultMaxHamming);

/// As try_reconcile, throwing ReconciliationFailure when any fragment is unresolved.
KeyBits reconcile(const KeyBits& server_key, const FragmentDigestSet& expected,
                  int max_hamming = kDefaultMaxHamming);

}  // namespace zkmfa
