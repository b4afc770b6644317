#pragma once

// Keyed derivation of cell indices, challenge coordinates, challenge index
// streams and landmark selections. Every function here is a pure function of
// its arguments; see docs/derivation.md for the byte-level conventions.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "zkmfa/hash.hpp"

namespace zkmfa {

inline constexpr std::uint32_t kPufCells = 1u << 20;     // 1,048,576 bits
inline constexpr std::uint32_t kPufBytes = kPufCells / 8;  // 131,072 bytes
inline constexpr std::uint32_t kTableSide = 256;
inline constexpr std::uint32_t kTableCells = kTableSide * kTableSide;
inline constexpr std::uint32_t kFrameSize = 256;
inline constexpr std::uint32_t kLandmarkCount = 68;
inline constexpr std::uint32_t kSelectedLandmarks = 64;

class Nonce512 {
public:
    static constexpr std::size_t kSize = 64;

    Nonce512() = default;

    /// Fresh nonce from the OpenSSL CSPRNG.
    static Nonce512 random();
    /// Throws InvalidInput unless exactly 64 bytes.
    static Nonce512 from_bytes(ByteView bytes);
    /// Deterministic nonce for reproducible simulations: SHAKE-256(label || seed).
    static Nonce512 derive(ByteView seed, std::string_view label);

    ByteView bytes() const noexcept { return bytes_; }
    const std::array<std::uint8_t, kSize>& array() const noexcept { return bytes_; }

    friend bool operator==(const Nonce512&, const Nonce512&) = default;

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

/// Non-empty UTF-8 password. Only its digests leave this type.
class Password {
public:
    explicit Password(std::string text);

    /// SHA3-512(pwd), the seed suffix for cell indices and challenges.
    Digest512 digest512() const noexcept { return sha3_512(as_bytes(text_)); }
    /// SHA-256(pwd), the landmark selection seed.
    Digest256 digest256() const { return sha256(as_bytes(text_)); }

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

/// Deterministic byte stream: SHAKE-256 over the concatenation of its seed parts.
class XofStream {
public:
    /// Throws InvalidParameters when `parts` is empty.
    explicit XofStream(std::initializer_list<ByteView> parts);
    explicit XofStream(std::span<const ByteView> parts);

    std::uint8_t next_byte() noexcept { return shake_.next_byte(); }
    /// Next four bytes as a little-endian unsigned integer.
    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    void fill(std::span<std::uint8_t> out) noexcept { shake_.squeeze(out); }
    Bytes take(std::size_t n);

private:
    Shake256 shake_;
};

XofStream make_xof(std::span<const ByteView> seed_parts);

/// PUF address derivation: C distinct cell indices in [0, M), first-drawn order.
std::vector<std::uint32_t> derive_cell_indices(const Nonce512& rn1, const Digest512& pwd_digest,
                                               std::uint32_t cell_count = kPufCells,
                                               std::uint32_t table_size = kTableCells);
std::vector<std::uint32_t> derive_cell_indices(const Nonce512& rn1, const Password& pwd,
                                               std::uint32_t cell_count = kPufCells,
                                               std::uint32_t table_size = kTableCells);

struct ChallengePoint {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    friend bool operator==(const ChallengePoint&, const ChallengePoint&) = default;
};

/// Challenge coordinates: one stream byte per axis, x then y, reduced mod F.
class ChallengeCoordStream {
public:
    /// Throws InvalidParameters unless frame_size divides 256.
    ChallengeCoordStream(const Nonce512& rn1, const Digest512& pwd_digest,
                         std::uint32_t frame_size = kFrameSize);

    ChallengePoint next() noexcept;

private:
    XofStream xof_;
    std::uint32_t frame_size_;
};

std::vector<ChallengePoint> derive_challenge_coords(const Nonce512& rn1, const Password& pwd,
                                                    std::uint32_t frame_size, std::size_t count);
std::vector<ChallengePoint> derive_challenge_coords(const Nonce512& rn1,
                                                    const Digest512& pwd_digest,
                                                    std::uint32_t frame_size, std::size_t count);

/// Unbounded challenge indices a_i in [0, C) from SHAKE-256(RN2 || SHA3-512(pwd)).
/// Duplicates are kept; callers deduplicate.
class ChallengeIndexStream {
public:
    /// Throws InvalidParameters unless table_size is a power of two.
    ChallengeIndexStream(const Nonce512& rn2, const Digest512& pwd_digest,
                         std::uint32_t table_size = kTableCells);

    std::uint32_t next() noexcept { return xof_.next_u32() & mask_; }
    std::uint32_t table_size() const noexcept { return mask_ + 1; }

private:
    XofStream xof_;
    std::uint32_t mask_;
};

ChallengeIndexStream derive_challenge_index_stream(const Nonce512& rn2, const Password& pwd,
                                                   std::uint32_t table_size = kTableCells);

/// Largest multiple of `total` not exceeding 256; bytes at or above it are rejected.
constexpr std::uint32_t landmark_rejection_threshold(std::uint32_t total) noexcept {
    return 256 - 256 % total;
}

/// Landmark choice: k distinct indices in [0, total), rejection-sampled
/// bytes from SHAKE-256(SHA-256(pwd)).
std::vector<std::uint32_t> select_landmark_indices(const Digest256& pwd_sha256,
                                                   std::uint32_t total = kLandmarkCount,
                                                   std::uint32_t k = kSelectedLandmarks);
std::vector<std::uint32_t> select_landmark_indices(const Password& pwd,
                                                   std::uint32_t total = kLandmarkCount,
                                                   std::uint32_t k = kSelectedLandmarks);

}  // namespace zkmfa
