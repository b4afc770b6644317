#pragma once

// Two-message ephemeral-key protocol.
//
//   server                                    client
//   enroll token + bio, merge -> composite
//   challenge: (RN1, RN2, mask F)  ------->   one-shot T', B'; X where F set, else T' ^ B'
//                                             collect stable bits on the RN2 stream -> K'
//                                  <-------   response: fragment digests of K'
//   collect on composite -> K, reconcile K against the digests, finalize.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zkmfa/biometric.hpp"
#include "zkmfa/derivation.hpp"
#include "zkmfa/puf.hpp"
#include "zkmfa/rbc.hpp"
#include "zkmfa/table.hpp"

namespace zkmfa {

inline constexpr std::uint8_t kProtocolVersion = 1;

struct SessionParams {
    int g = 7;
    int m = 1;
    std::uint16_t Q = 384;
    std::uint16_t L = static_cast<std::uint16_t>(kKeyBits);
    std::uint8_t frag_level = 1;
    std::uint8_t max_hamming = kDefaultMaxHamming;

    QuantParams quant() const noexcept { return {g, m, kFrameSize}; }
    /// Throws InvalidParameters unless L <= Q <= 65536, m < g, frag_level divides L.
    void validate() const;

    friend bool operator==(const SessionParams&, const SessionParams&) = default;
};

using SessionId = std::array<std::uint8_t, 16>;

SessionId make_session_id(const Nonce512& rn1, const Nonce512& rn2);

struct ChallengeMessage {
    std::uint8_t version = kProtocolVersion;
    SessionId session_id{};
    Nonce512 rn1;
    Nonce512 rn2;
    MaskVector mask;
    SessionParams params;

    friend bool operator==(const ChallengeMessage&, const ChallengeMessage&) = default;
};

struct ResponseMessage {
    std::uint8_t version = kProtocolVersion;
    SessionId session_id{};
    FragmentDigestSet digests;

    friend bool operator==(const ResponseMessage&, const ResponseMessage&) = default;
};

/// Server's outcome, sent back so a remote client can report it.
struct VerdictMessage {
    std::uint8_t version = kProtocolVersion;
    SessionId session_id{};
    bool accepted = false;
    std::uint16_t corrected_bits = 0;

    friend bool operator==(const VerdictMessage&, const VerdictMessage&) = default;
};

struct StableBit {
    std::uint32_t index;
    std::uint8_t bit;

    friend bool operator==(const StableBit&, const StableBit&) = default;
};

/// Draw budget of the stable-bit walk, in multiples of the table size.
inline constexpr std::size_t kDrawBudgetFactor = 16;

/// Walk the index stream and keep the first occurrence of each binary cell
/// until Q are collected or 16*C draws are spent. Throws InsufficientStableBits
/// if fewer than L were collected.
std::vector<StableBit> collect_stable_bits(const TernaryTable& table, ChallengeIndexStream& stream,
                                           std::size_t Q, std::size_t L);

/// First L collected bits, in collection order. Throws InvalidInput on a short list.
KeyBits derive_key(std::span<const StableBit> collected, std::size_t L);

/// Everything the server keeps after enrollment. The password is reduced to its digest.
struct Enrollment {
    TernaryTable token;
    TernaryTable bio;
    TernaryTable composite;
    MaskVector mask;
    Nonce512 rn1;
    Digest512 pwd_digest{};
    SessionParams params;
};

/// Merge already-enrolled factor tables into an enrollment record.
std::shared_ptr<const Enrollment> make_enrollment(TernaryTable token, TernaryTable bio,
                                                  const Nonce512& rn1, const Digest512& pwd_digest,
                                                  const SessionParams& params);

struct VerifyOutcome;

class ServerSession {
public:
    enum class State { Created, Challenged, Verified, Failed };

    explicit ServerSession(std::shared_ptr<const Enrollment> enrollment);

    State state() const noexcept { return state_; }
    const Enrollment& enrollment() const noexcept { return *enrollment_; }
    const TernaryTable& composite() const noexcept { return enrollment_->composite; }
    const MaskVector& mask() const noexcept { return enrollment_->mask; }
    const SessionParams& params() const noexcept { return enrollment_->params; }

    /// Available after verify().
    const std::vector<StableBit>& collected() const noexcept { return collected_; }
    const std::optional<KeyBits>& server_key() const noexcept { return server_key_; }
    const std::optional<KeyBits>& final_key() const noexcept { return final_key_; }

private:
    friend ChallengeMessage server_challenge(ServerSession&, const Nonce512&);
    friend VerifyOutcome server_verify(ServerSession&, const ResponseMessage&);

    std::shared_ptr<const Enrollment> enrollment_;
    State state_ = State::Created;
    std::optional<Nonce512> rn2_;
    SessionId session_id_{};
    std::vector<StableBit> collected_;
    std::optional<KeyBits> server_key_;
    std::optional<KeyBits> final_key_;
};

ServerSession server_enroll(std::span<const SramRead> token_reads,
                            std::span<const LandmarkFrame> bio_frames, const Password& pwd,
                            const Nonce512& rn1, const SessionParams& params);

/// Created -> Challenged. A session issues exactly one challenge.
ChallengeMessage server_challenge(ServerSession& session, const Nonce512& rn2);

struct VerifyOutcome {
    bool accepted = false;
    KeyBits server_key;
    ReconcileResult reconciliation;
};

/// Challenged -> Verified | Failed. Throws ProtocolStateError in any other
/// state or for a response that belongs to another session.
VerifyOutcome server_verify(ServerSession& session, const ResponseMessage& response);

struct ClientSession {
    enum class State { Created, Keyed };

    State state = State::Created;
    SessionId session_id{};
    std::vector<StableBit> collected;
    KeyBits key;
};

/// Client lane given one-shot factor tables. Throws InsufficientStableBits.
std::pair<ClientSession, ResponseMessage> client_keygen_from_tables(const ChallengeMessage& msg,
                                                                    const BinaryTable& token,
                                                                    const BinaryTable& bio,
                                                                    const Digest512& pwd_digest);

std::pair<ClientSession, ResponseMessage> client_keygen(const ChallengeMessage& msg,
                                                        const SramRead& token_read,
                                                        const LandmarkFrame& bio_frame,
                                                        const Password& pwd);

/// Both roles in one process, optionally flipping `inject_flips` client key
/// bits (spread evenly over the key) before the response is hashed.
struct LoopbackResult {
    bool accepted = false;
    std::size_t corrected_bits = 0;
    KeyBits server_key;
    KeyBits client_key;
    std::optional<KeyBits> final_key;
};

LoopbackResult run_loopback(ServerSession& server, const Nonce512& rn2, const SramRead& token_read,
                            const LandmarkFrame& bio_frame, const Password& pwd,
                            std::size_t inject_flips = 0);

// ---- wire format -------------------------------------------------------------
// frame = "ZKMF" | version u8 | msg_type u8 | body_len u32 | body; integers big-endian.

enum class MessageType : std::uint8_t { Challenge = 1, Response = 2, Verdict = 3 };

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'Z', 'K', 'M', 'F'};
inline constexpr std::size_t kFrameHeaderSize = 10;
inline constexpr std::size_t kChallengeBodySize = 16 + 64 + 64 + 1 + 1 + 2 + 2 + 1 + 1 + kTableCells / 8;

struct Frame {
    MessageType type;
    Bytes body;
};

Bytes encode_frame(MessageType type, ByteView body);
/// Parses exactly one whole frame. Throws FormatError.
Frame decode_frame(ByteView bytes);
/// Validates a 10-byte header and returns (type, body_len).
std::pair<MessageType, std::uint32_t> decode_frame_header(ByteView header);

Bytes encode(const ChallengeMessage& msg);
Bytes encode(const ResponseMessage& msg);
Bytes encode(const VerdictMessage& msg);

ChallengeMessage decode_challenge(ByteView frame);
ResponseMessage decode_response(ByteView frame);
VerdictMessage decode_verdict(ByteView frame);

ChallengeMessage decode_challenge_body(ByteView body);
ResponseMessage decode_response_body(ByteView body);
VerdictMessage decode_verdict_body(ByteView body);

}  // namespace zkmfa
