#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zkmfa {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

using Digest256 = std::array<std::uint8_t, 32>;
using Digest512 = std::array<std::uint8_t, 64>;

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView bytes);
/// Throws InvalidInput on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

namespace keccak {

using State = std::array<std::uint64_t, 25>;

/// Keccak-f[1600], 24 rounds.
void permute(State& state) noexcept;

/// Four independent states, lane-sliced: lanes[i][k] is lane i of state k.
using Lanes4 = std::uint64_t __attribute__((vector_size(32)));
using State4 = std::array<Lanes4, 25>;

/// Keccak-f[1600] on four states at once; same result as four permute() calls.
void permute4(State4& state) noexcept;

/// XOR `byte` into the state at byte offset `offset` (little-endian lanes).
inline void xor_byte(State& state, std::size_t offset, std::uint8_t byte) noexcept {
    state[offset / 8] ^= static_cast<std::uint64_t>(byte) << (8 * (offset % 8));
}

inline std::uint8_t get_byte(const State& state, std::size_t offset) noexcept {
    return static_cast<std::uint8_t>(state[offset / 8] >> (8 * (offset % 8)));
}

/// Sponge over Keccak-f[1600] with byte-granular absorb and squeeze.
class Sponge {
public:
    Sponge(std::size_t rate_bytes, std::uint8_t domain_pad) noexcept
        : rate_(rate_bytes), pad_(domain_pad) {}

    void absorb(ByteView data) noexcept;
    /// The first call finalizes; later calls continue the output stream.
    void squeeze(std::span<std::uint8_t> out) noexcept;
    std::uint8_t squeeze_byte() noexcept;

    bool finalized() const noexcept { return squeezing_; }

private:
    void finalize() noexcept;

    State state_{};
    std::size_t rate_;
    std::uint8_t pad_;
    std::size_t pos_ = 0;
    bool squeezing_ = false;
};

}  // namespace keccak

/// Incremental SHAKE-256 extendable-output function.
class Shake256 {
public:
    Shake256() noexcept : sponge_(136, 0x1F) {}

    Shake256& absorb(ByteView data) noexcept {
        sponge_.absorb(data);
        return *this;
    }
    void squeeze(std::span<std::uint8_t> out) noexcept { sponge_.squeeze(out); }
    std::uint8_t next_byte() noexcept { return sponge_.squeeze_byte(); }

private:
    keccak::Sponge sponge_;
};

Digest256 sha3_256(ByteView data) noexcept;
Digest512 sha3_512(ByteView data) noexcept;
/// SHA-256 (FIPS 180-4), backed by OpenSSL.
Digest256 sha256(ByteView data);

}  // namespace zkmfa
