#include "zkmfa/derivation.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <unordered_set>

#include "zkmfa/errors.hpp"

namespace zkmfa {

Nonce512 Nonce512::random() {
    Nonce512 n;
    if (RAND_bytes(n.bytes_.data(), static_cast<int>(n.bytes_.size())) != 1) {
        throw Error("RAND_bytes failed");
    }
    return n;
}

Nonce512 Nonce512::from_bytes(ByteView bytes) {
    if (bytes.size() != kSize) {
        throw InvalidInput("nonce must be 64 bytes, got " + std::to_string(bytes.size()));
    }
    Nonce512 n;
    std::copy(bytes.begin(), bytes.end(), n.bytes_.begin());
    return n;
}

Nonce512 Nonce512::derive(ByteView seed, std::string_view label) {
    XofStream xof{as_bytes(label), seed};
    Nonce512 n;
    xof.fill(n.bytes_);
    return n;
}

Password::Password(std::string text) : text_(std::move(text)) {
    if (text_.empty()) {
        throw InvalidInput("password must be non-empty");
    }
}

XofStream::XofStream(std::initializer_list<ByteView> parts)
    : XofStream(std::span<const ByteView>(parts.begin(), parts.size())) {}

XofStream::XofStream(std::span<const ByteView> parts) {
    if (parts.empty()) {
        throw InvalidParameters("XOF seed must have at least one part");
    }
    for (const auto& p : parts) {
        shake_.absorb(p);
    }
}

std::uint32_t XofStream::next_u32() noexcept {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(shake_.next_byte()) << (8 * i);
    }
    return v;
}

std::uint64_t XofStream::next_u64() noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(shake_.next_byte()) << (8 * i);
    }
    return v;
}

Bytes XofStream::take(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

XofStream make_xof(std::span<const ByteView> seed_parts) { return XofStream(seed_parts); }

std::vector<std::uint32_t> derive_cell_indices(const Nonce512& rn1, const Digest512& pwd_digest,
                                               std::uint32_t cell_count,
                                               std::uint32_t table_size) {
    if (cell_count == 0 || table_size > cell_count) {
        throw InvalidParameters("derive_cell_indices: need 0 < C <= M (C=" +
                                std::to_string(table_size) + ", M=" + std::to_string(cell_count) +
                                ")");
    }
    XofStream z{rn1.bytes(), pwd_digest};
    std::vector<std::uint32_t> out;
    out.reserve(table_size);

    constexpr std::uint32_t kDenseLimit = 1u << 26;
    if (cell_count <= kDenseLimit) {
        std::vector<bool> seen(cell_count, false);
        while (out.size() < table_size) {
            const std::uint32_t s = z.next_u32() % cell_count;
            if (!seen[s]) {
                seen[s] = true;
                out.push_back(s);
            }
        }
    } else {
        std::unordered_set<std::uint32_t> seen;
        seen.reserve(table_size * 2);
        while (out.size() < table_size) {
            const std::uint32_t s = z.next_u32() % cell_count;
            if (seen.insert(s).second) {
                out.push_back(s);
            }
        }
    }
    return out;
}

std::vector<std::uint32_t> derive_cell_indices(const Nonce512& rn1, const Password& pwd,
                                               std::uint32_t cell_count,
                                               std::uint32_t table_size) {
    return derive_cell_indices(rn1, pwd.digest512(), cell_count, table_size);
}

namespace {

std::uint32_t checked_frame_size(std::uint32_t f) {
    if (f < 1 || f > 256 || 256 % f != 0) {
        throw InvalidParameters("frame size must divide 256, got " + std::to_string(f));
    }
    return f;
}

}  // namespace

ChallengeCoordStream::ChallengeCoordStream(const Nonce512& rn1, const Digest512& pwd_digest,
                                           std::uint32_t frame_size)
    : xof_{rn1.bytes(), pwd_digest}, frame_size_(checked_frame_size(frame_size)) {}

ChallengePoint ChallengeCoordStream::next() noexcept {
    const auto x = static_cast<std::uint16_t>(xof_.next_byte() % frame_size_);
    const auto y = static_cast<std::uint16_t>(xof_.next_byte() % frame_size_);
    return {x, y};
}

std::vector<ChallengePoint> derive_challenge_coords(const Nonce512& rn1,
                                                    const Digest512& pwd_digest,
                                                    std::uint32_t frame_size, std::size_t count) {
    if (count == 0) {
        throw InvalidParameters("challenge count must be >= 1");
    }
    ChallengeCoordStream stream(rn1, pwd_digest, frame_size);
    std::vector<ChallengePoint> out(count);
    for (auto& p : out) {
        p = stream.next();
    }
    return out;
}

std::vector<ChallengePoint> derive_challenge_coords(const Nonce512& rn1, const Password& pwd,
                                                    std::uint32_t frame_size, std::size_t count) {
    return derive_challenge_coords(rn1, pwd.digest512(), frame_size, count);
}

ChallengeIndexStream::ChallengeIndexStream(const Nonce512& rn2, const Digest512& pwd_digest,
                                           std::uint32_t table_size)
    : xof_{rn2.bytes(), pwd_digest}, mask_(table_size - 1) {
    if (table_size == 0 || (table_size & (table_size - 1)) != 0) {
        throw InvalidParameters("challenge table size must be a power of two, got " +
                                std::to_string(table_size));
    }
}

ChallengeIndexStream derive_challenge_index_stream(const Nonce512& rn2, const Password& pwd,
                                                   std::uint32_t table_size) {
    return ChallengeIndexStream(rn2, pwd.digest512(), table_size);
}

std::vector<std::uint32_t> select_landmark_indices(const Digest256& pwd_sha256,
                                                   std::uint32_t total, std::uint32_t k) {
    if (total == 0 || total > 256 || k > total) {
        throw InvalidParameters("select_landmark_indices: need k <= total <= 256 (k=" +
                                std::to_string(k) + ", total=" + std::to_string(total) + ")");
    }
    const std::uint32_t threshold = landmark_rejection_threshold(total);
    XofStream z{pwd_sha256};
    std::vector<bool> taken(total, false);
    std::vector<std::uint32_t> out;
    out.reserve(k);
    while (out.size() < k) {
        const std::uint32_t b = z.next_byte();
        if (b >= threshold) {
            continue;
        }
        const std::uint32_t candidate = b % total;
        if (!taken[candidate]) {
            taken[candidate] = true;
            out.push_back(candidate);
        }
    }
    return out;
}

std::vector<std::uint32_t> select_landmark_indices(const Password& pwd, std::uint32_t total,
                                                   std::uint32_t k) {
    return select_landmark_indices(pwd.digest256(), total, k);
}

}  // namespace zkmfa
