#include "zkmfa/rbc.hpp"

#include <algorithm>
#include <optional>

namespace zkmfa {

KeyBits::KeyBits(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
        throw InvalidInput("key bit outside {0,1}");
    }
}

namespace {

Bytes pack_bits(std::span<const std::uint8_t> bits) {
    Bytes out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        }
    }
    return out;
}

}  // namespace

Bytes KeyBits::pack() const { return pack_bits(bits_); }

std::size_t hamming_distance(const KeyBits& a, const KeyBits& b) {
    if (a.size() != b.size()) {
        throw InvalidInput("hamming_distance: key length mismatch");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] != b[i];
    }
    return d;
}

Digest256 key_fingerprint(const KeyBits& key) { return sha3_256(key.pack()); }

void check_frag_level(std::size_t key_length, std::size_t frag_level) {
    if (frag_level == 0 || frag_level > 255 || key_length == 0 || key_length % frag_level != 0) {
        throw InvalidParameters("fragmentation level " + std::to_string(frag_level) +
                                " does not divide key length " + std::to_string(key_length));
    }
}

std::vector<KeyBits> fragment(const KeyBits& key, std::size_t frag_level) {
    check_frag_level(key.size(), frag_level);
    const std::size_t len = key.size() / frag_level;
    std::vector<KeyBits> out;
    out.reserve(frag_level);
    for (std::size_t f = 0; f < frag_level; ++f) {
        const auto first = key.bits().begin() + static_cast<std::ptrdiff_t>(f * len);
        out.emplace_back(std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(len)));
    }
    return out;
}

Digest256 fragment_digest(std::span<const std::uint8_t> fragment_bits, std::uint8_t index) {
    Bytes msg = pack_bits(fragment_bits);
    msg.push_back(index);
    return sha3_256(msg);
}

FragmentDigestSet digest_fragments(const KeyBits& key, std::size_t frag_level) {
    check_frag_level(key.size(), frag_level);
    const std::size_t len = key.size() / frag_level;
    FragmentDigestSet set;
    set.digests.reserve(frag_level);
    for (std::size_t f = 0; f < frag_level; ++f) {
        set.digests.push_back(
            fragment_digest(key.bits().subspan(f * len, len), static_cast<std::uint8_t>(f)));
    }
    return set;
}

std::uint64_t ReconcileResult::candidates_tested() const noexcept {
    std::uint64_t n = 0;
    for (const auto& f : fragments) {
        n += f.candidates_tested;
    }
    return n;
}

namespace {

const char* status_name(FragmentStatus s) {
    switch (s) {
        case FragmentStatus::Matched: return "matched";
        case FragmentStatus::Corrected: return "corrected";
        case FragmentStatus::Unresolved: return "unresolved";
    }
    return "?";
}

std::string failure_message(const std::vector<FragmentReport>& fragments) {
    std::string msg = "reconciliation failed:";
    for (std::size_t i = 0; i < fragments.size(); ++i) {
        msg += " [" + std::to_string(i) + "]=" + status_name(fragments[i].status);
    }
    return msg;
}

constexpr std::size_t kSha3_256Rate = 136;

// Advance `pos` to the next t-subset of [0, n) in lexicographic order.
bool next_combination(std::vector<std::size_t>& pos, std::size_t n) {
    const std::size_t t = pos.size();
    std::size_t i = t;
    while (i > 0) {
        --i;
        if (pos[i] < n - t + i) {
            ++pos[i];
            for (std::size_t j = i + 1; j < t; ++j) {
                pos[j] = pos[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

// Hashes one fragment with a set of flipped positions. When the message fits a
// single Keccak block the padded state is built once and each candidate only
// XORs its flipped bits into a copy.
class FragmentSearcher {
public:
    FragmentSearcher(std::span<const std::uint8_t> bits, std::uint8_t index, const Digest256& target)
        : bits_(bits.begin(), bits.end()), index_(index), target_(target) {
        Bytes msg = pack_bits(bits);
        msg.push_back(index);
        single_block_ = msg.size() < kSha3_256Rate;
        if (single_block_) {
            for (std::size_t i = 0; i < msg.size(); ++i) {
                keccak::xor_byte(base_, i, msg[i]);
            }
            keccak::xor_byte(base_, msg.size(), 0x06);
            keccak::xor_byte(base_, kSha3_256Rate - 1, 0x80);
            for (std::size_t l = 0; l < 4; ++l) {
                std::uint64_t lane = 0;
                for (std::size_t b = 0; b < 8; ++b) {
                    lane |= static_cast<std::uint64_t>(target[8 * l + b]) << (8 * b);
                }
                target_lanes_[l] = lane;
            }
            for (std::size_t p = 0; p < bits_.size(); ++p) {
                const std::size_t byte = p / 8;
                flip_lane_.push_back(static_cast<std::uint8_t>(byte / 8));
                flip_mask_.push_back(std::uint64_t{1} << (8 * (byte % 8) + (7 - p % 8)));
            }
        }
    }

    bool matches(std::span<const std::size_t> flips) {
        if (!single_block_) {
            std::vector<std::uint8_t> candidate = bits_;
            for (std::size_t p : flips) {
                candidate[p] ^= 1;
            }
            return fragment_digest(candidate, index_) == target_;
        }
        keccak::State s = base_;
        for (std::size_t p : flips) {
            s[flip_lane_[p]] ^= flip_mask_[p];
        }
        keccak::permute(s);
        return hit(s);
    }

    /// Every t-subset of flip positions in lexicographic order, stopping at the
    /// first match, which is left in `pos`. `tested` counts digests computed.
    bool search(std::size_t t, std::vector<std::size_t>& pos, std::uint64_t& tested) {
        pos.resize(t);
        if (t == 0 || t > bits_.size()) {
            return false;
        }
        if (single_block_) {
            return walk(base_, 0, 0, pos, tested);
        }
        for (std::size_t i = 0; i < t; ++i) {
            pos[i] = i;
        }
        do {
            ++tested;
            if (matches(pos)) {
                return true;
            }
        } while (next_combination(pos, bits_.size()));
        return false;
    }

private:
    bool hit(const keccak::State& s) const noexcept {
        return s[0] == target_lanes_[0] && s[1] == target_lanes_[1] && s[2] == target_lanes_[2] &&
               s[3] == target_lanes_[3];
    }

    // States are built up one flip per level. The last level hashes four
    // candidates per call and checks them in order, so the first match and the
    // tested count are the same as a one-at-a-time walk.
    bool walk(const keccak::State& s, std::size_t depth, std::size_t start, std::vector<std::size_t>& pos,
              std::uint64_t& tested) {
        const std::size_t n = bits_.size();
        const std::size_t left = pos.size() - depth;
        if (left == 1) {
            for (std::size_t p = start; p < n; p += 4) {
                const std::size_t batch = std::min<std::size_t>(4, n - p);
                keccak::State4 v;
                for (std::size_t i = 0; i < 25; ++i) {
                    v[i] = keccak::Lanes4{s[i], s[i], s[i], s[i]};
                }
                for (std::size_t k = 0; k < batch; ++k) {
                    v[flip_lane_[p + k]][k] ^= flip_mask_[p + k];
                }
                keccak::permute4(v);
                for (std::size_t k = 0; k < batch; ++k) {
                    ++tested;
                    if (v[0][k] == target_lanes_[0] && v[1][k] == target_lanes_[1] &&
                        v[2][k] == target_lanes_[2] && v[3][k] == target_lanes_[3]) {
                        pos[depth] = p + k;
                        return true;
                    }
                }
            }
            return false;
        }
        for (std::size_t p = start; p + left <= n; ++p) {
            keccak::State c = s;
            c[flip_lane_[p]] ^= flip_mask_[p];
            pos[depth] = p;
            if (walk(c, depth + 1, p + 1, pos, tested)) {
                return true;
            }
        }
        return false;
    }

    std::vector<std::uint8_t> bits_;
    std::uint8_t index_;
    Digest256 target_;
    bool single_block_ = false;
    keccak::State base_{};
    std::array<std::uint64_t, 4> target_lanes_{};
    std::vector<std::uint8_t> flip_lane_;
    std::vector<std::uint64_t> flip_mask_;
};


}  // namespace

ReconciliationFailure::ReconciliationFailure(std::vector<FragmentReport> fragments)
    : Error(failure_message(fragments)), fragments_(std::move(fragments)) {}

std::uint64_t search_space_size(std::size_t n, int max_hamming) {
    std::uint64_t total = 0;
    std::uint64_t binom = 1;  // C(n, t)
    for (int t = 0; t <= max_hamming && static_cast<std::size_t>(t) <= n; ++t) {
        total += binom;
        binom = binom * (n - static_cast<std::size_t>(t)) / static_cast<std::uint64_t>(t + 1);
    }
    return total;
}

ReconcileResult try_reconcile(const KeyBits& server_key, const FragmentDigestSet& expected,
                              int max_hamming) {
    if (max_hamming < 0) {
        throw InvalidParameters("max_hamming must be >= 0");
    }
    const std::size_t frag_level = expected.frag_level();
    check_frag_level(server_key.size(), frag_level);
    const std::size_t len = server_key.size() / frag_level;

    ReconcileResult result;
    result.key = server_key;
    result.fragments.resize(frag_level);
    bool all_resolved = true;

    for (std::size_t f = 0; f < frag_level; ++f) {
        const auto bits = server_key.bits().subspan(f * len, len);
        FragmentSearcher searcher(bits, static_cast<std::uint8_t>(f), expected.digests[f]);
        FragmentReport& report = result.fragments[f];

        std::optional<std::vector<std::size_t>> found;
        ++report.candidates_tested;
        if (searcher.matches({})) {
            found.emplace();
        }
        std::vector<std::size_t> pos;
        for (int t = 1; !found && t <= max_hamming; ++t) {
            if (searcher.search(static_cast<std::size_t>(t), pos, report.candidates_tested)) {
                found = pos;
            }
        }

        if (!found) {
            report.status = FragmentStatus::Unresolved;
            report.distance = -1;
            all_resolved = false;
            continue;
        }
        report.distance = static_cast<int>(found->size());
        report.status = found->empty() ? FragmentStatus::Matched : FragmentStatus::Corrected;
        for (std::size_t p : *found) {
            result.key.flip(f * len + p);
        }
    }

    result.success = all_resolved;
    if (!all_resolved) {
        result.key = server_key;
        result.corrected_bits = 0;
    } else {
        result.corrected_bits = hamming_distance(server_key, result.key);
    }
    return result;
}

KeyBits reconcile(const KeyBits& server_key, const FragmentDigestSet& expected, int max_hamming) {
    ReconcileResult r = try_reconcile(server_key, expected, max_hamming);
    if (!r.success) {
        throw ReconciliationFailure(std::move(r.fragments));
    }
    return std::move(r.key);
}

}  // namespace zkmfa
