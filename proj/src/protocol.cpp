#include "zkmfa/protocol.hpp"

#include <algorithm>

#include "zkmfa/errors.hpp"

namespace zkmfa {

void SessionParams::validate() const {
    quant().validate();
    if (L == 0 || L > Q || Q > kTableCells) {
        throw InvalidParameters("session params need 0 < L <= Q <= 65536 (L=" + std::to_string(L) +
                                ", Q=" + std::to_string(Q) + ")");
    }
    check_frag_level(L, frag_level);
}

SessionId make_session_id(const Nonce512& rn1, const Nonce512& rn2) {
    Shake256 xof;
    xof.absorb(as_bytes("zkmfa/session")).absorb(rn1.bytes()).absorb(rn2.bytes());
    SessionId id{};
    xof.squeeze(id);
    return id;
}

std::vector<StableBit> collect_stable_bits(const TernaryTable& table, ChallengeIndexStream& stream,
                                           std::size_t Q, std::size_t L) {
    if (Q < L) {
        throw InvalidParameters("collect_stable_bits: need Q >= L");
    }
    if (stream.table_size() != table.size()) {
        throw InvalidInput("collect_stable_bits: stream range does not match table size");
    }
    std::vector<StableBit> out;
    out.reserve(Q);
    std::vector<bool> taken(table.size(), false);
    const std::size_t budget = kDrawBudgetFactor * table.size();
    for (std::size_t draw = 0; draw < budget && out.size() < Q; ++draw) {
        const std::uint32_t a = stream.next();
        if (table.is_x(a) || taken[a]) {
            continue;
        }
        taken[a] = true;
        out.push_back({a, static_cast<std::uint8_t>(table[a])});
    }
    if (out.size() < L) {
        throw InsufficientStableBits(out.size(), L);
    }
    return out;
}

KeyBits derive_key(std::span<const StableBit> collected, std::size_t L) {
    if (collected.size() < L) {
        throw InvalidInput("derive_key: " + std::to_string(collected.size()) +
                           " collected bits, need " + std::to_string(L));
    }
    std::vector<std::uint8_t> bits(L);
    for (std::size_t i = 0; i < L; ++i) {
        bits[i] = collected[i].bit;
    }
    return KeyBits(std::move(bits));
}

std::shared_ptr<const Enrollment> make_enrollment(TernaryTable token, TernaryTable bio,
                                                  const Nonce512& rn1, const Digest512& pwd_digest,
                                                  const SessionParams& params) {
    params.validate();
    auto e = std::make_shared<Enrollment>();
    e->composite = merge_xor(token, bio);
    e->mask = mask_of(e->composite);
    e->token = std::move(token);
    e->bio = std::move(bio);
    e->rn1 = rn1;
    e->pwd_digest = pwd_digest;
    e->params = params;
    return e;
}

ServerSession::ServerSession(std::shared_ptr<const Enrollment> enrollment)
    : enrollment_(std::move(enrollment)) {
    if (!enrollment_) {
        throw InvalidInput("server session needs an enrollment");
    }
}

ServerSession server_enroll(std::span<const SramRead> token_reads,
                            std::span<const LandmarkFrame> bio_frames, const Password& pwd,
                            const Nonce512& rn1, const SessionParams& params) {
    params.validate();
    TernaryTable token = enroll_token(token_reads, rn1, pwd);
    TernaryTable bio = enroll_bio(bio_frames, rn1, pwd, params.quant());
    return ServerSession(make_enrollment(std::move(token), std::move(bio), rn1, pwd.digest512(), params));
}

ChallengeMessage server_challenge(ServerSession& session, const Nonce512& rn2) {
    if (session.state_ != ServerSession::State::Created) {
        throw ProtocolStateError("server_challenge: session already issued its challenge");
    }
    const Enrollment& e = *session.enrollment_;
    if (rn2 == e.rn1) {
        throw InvalidParameters("server_challenge: RN2 must differ from RN1");
    }
    session.rn2_ = rn2;
    session.session_id_ = make_session_id(e.rn1, rn2);
    session.state_ = ServerSession::State::Challenged;

    ChallengeMessage msg;
    msg.session_id = session.session_id_;
    msg.rn1 = e.rn1;
    msg.rn2 = rn2;
    msg.mask = e.mask;
    msg.params = e.params;
    return msg;
}

VerifyOutcome server_verify(ServerSession& session, const ResponseMessage& response) {
    if (session.state_ != ServerSession::State::Challenged) {
        throw ProtocolStateError("server_verify: session is not awaiting a response");
    }
    if (response.session_id != session.session_id_) {
        throw ProtocolStateError("server_verify: response belongs to another session");
    }
    const Enrollment& e = *session.enrollment_;
    const SessionParams& p = e.params;
    if (response.digests.frag_level() != p.frag_level) {
        session.state_ = ServerSession::State::Failed;
        throw InvalidInput("server_verify: response fragmentation level " +
                           std::to_string(response.digests.frag_level()) + " != " +
                           std::to_string(p.frag_level));
    }

    ChallengeIndexStream stream(*session.rn2_, e.pwd_digest, static_cast<std::uint32_t>(e.composite.size()));
    try {
        session.collected_ = collect_stable_bits(e.composite, stream, p.Q, p.L);
    } catch (const InsufficientStableBits&) {
        session.state_ = ServerSession::State::Failed;
        throw;
    }

    VerifyOutcome out;
    out.server_key = derive_key(session.collected_, p.L);
    session.server_key_ = out.server_key;
    out.reconciliation = try_reconcile(out.server_key, response.digests, p.max_hamming);
    out.accepted = out.reconciliation.success;
    if (out.accepted) {
        session.final_key_ = out.reconciliation.key;
        session.state_ = ServerSession::State::Verified;
    } else {
        session.state_ = ServerSession::State::Failed;
    }
    return out;
}

std::pair<ClientSession, ResponseMessage> client_keygen_from_tables(const ChallengeMessage& msg,
                                                                    const BinaryTable& token,
                                                                    const BinaryTable& bio,
                                                                    const Digest512& pwd_digest) {
    msg.params.validate();
    const TernaryTable masked = apply_mask(xor_tables(token, bio), msg.mask);
    ChallengeIndexStream stream(msg.rn2, pwd_digest, static_cast<std::uint32_t>(masked.size()));

    ClientSession session;
    session.session_id = msg.session_id;
    session.collected = collect_stable_bits(masked, stream, msg.params.Q, msg.params.L);
    session.key = derive_key(session.collected, msg.params.L);
    session.state = ClientSession::State::Keyed;

    ResponseMessage resp;
    resp.session_id = msg.session_id;
    resp.digests = digest_fragments(session.key, msg.params.frag_level);
    return {std::move(session), std::move(resp)};
}

std::pair<ClientSession, ResponseMessage> client_keygen(const ChallengeMessage& msg,
                                                        const SramRead& token_read,
                                                        const LandmarkFrame& bio_frame,
                                                        const Password& pwd) {
    msg.params.validate();
    const auto indices = derive_cell_indices(msg.rn1, pwd, kPufCells, kTableCells);
    const BinaryTable token = one_shot_token_table(token_read, indices);
    const BinaryTable bio = response_table(bio_frame, make_bio_challenge(msg.rn1, pwd, msg.params.quant()));
    return client_keygen_from_tables(msg, token, bio, pwd.digest512());
}

LoopbackResult run_loopback(ServerSession& server, const Nonce512& rn2, const SramRead& token_read,
                            const LandmarkFrame& bio_frame, const Password& pwd,
                            std::size_t inject_flips) {
    const ChallengeMessage challenge = server_challenge(server, rn2);
    auto [client, response] = client_keygen(challenge, token_read, bio_frame, pwd);
    if (inject_flips > 0) {
        const std::size_t L = client.key.size();
        const std::size_t n = std::min(inject_flips, L);
        for (std::size_t k = 0; k < n; ++k) {
            client.key.flip(k * L / n);
        }
        response.digests = digest_fragments(client.key, challenge.params.frag_level);
    }
    const VerifyOutcome outcome = server_verify(server, response);

    LoopbackResult r;
    r.accepted = outcome.accepted;
    r.corrected_bits = outcome.reconciliation.corrected_bits;
    r.server_key = outcome.server_key;
    r.client_key = client.key;
    if (outcome.accepted) {
        r.final_key = outcome.reconciliation.key;
    }
    return r;
}

// ---- wire format -------------------------------------------------------------

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }
    void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    Reader(ByteView data, const char* what) : data_(data), what_(what) {}

    ByteView take(std::size_t n) {
        if (data_.size() - pos_ < n) {
            throw FormatError(std::string(what_) + ": truncated");
        }
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }
    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() {
        const ByteView b = take(2);
        return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }
    std::uint32_t u32() {
        const ByteView b = take(4);
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
               (std::uint32_t{b[2]} << 8) | b[3];
    }
    void finish() const {
        if (pos_ != data_.size()) {
            throw FormatError(std::string(what_) + ": trailing bytes");
        }
    }

private:
    ByteView data_;
    const char* what_;
    std::size_t pos_ = 0;
};

template <std::size_t N>
std::array<std::uint8_t, N> to_array(ByteView b) {
    std::array<std::uint8_t, N> a{};
    std::copy(b.begin(), b.end(), a.begin());
    return a;
}

}  // namespace

Bytes encode_frame(MessageType type, ByteView body) {
    Writer w;
    w.bytes(kFrameMagic);
    w.u8(kProtocolVersion);
    w.u8(static_cast<std::uint8_t>(type));
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.bytes(body);
    return w.take();
}

std::pair<MessageType, std::uint32_t> decode_frame_header(ByteView header) {
    if (header.size() < kFrameHeaderSize) {
        throw FormatError("frame: truncated header");
    }
    if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), header.begin())) {
        throw FormatError("frame: bad magic");
    }
    if (header[4] != kProtocolVersion) {
        throw FormatError("frame: unsupported version " + std::to_string(header[4]));
    }
    const std::uint8_t type = header[5];
    if (type < 1 || type > 3) {
        throw FormatError("frame: unknown message type " + std::to_string(type));
    }
    Reader r(header.subspan(6, 4), "frame");
    return {static_cast<MessageType>(type), r.u32()};
}

Frame decode_frame(ByteView bytes) {
    const auto [type, len] = decode_frame_header(bytes);
    if (bytes.size() - kFrameHeaderSize != len) {
        throw FormatError("frame: body length " + std::to_string(len) + " does not match " +
                          std::to_string(bytes.size() - kFrameHeaderSize) + " received bytes");
    }
    const ByteView body = bytes.subspan(kFrameHeaderSize);
    return {type, Bytes(body.begin(), body.end())};
}

Bytes encode(const ChallengeMessage& msg) {
    if (msg.mask.size() != kTableCells) {
        throw InvalidInput("challenge mask must cover 65,536 cells");
    }
    const SessionParams& p = msg.params;
    Writer w;
    w.bytes(msg.session_id);
    w.bytes(msg.rn1.bytes());
    w.bytes(msg.rn2.bytes());
    w.u8(static_cast<std::uint8_t>(p.g));
    w.u8(static_cast<std::uint8_t>(p.m));
    w.u16(p.Q);
    w.u16(p.L);
    w.u8(p.frag_level);
    w.u8(p.max_hamming);
    w.bytes(msg.mask.to_bytes());
    const Bytes body = w.take();
    return encode_frame(MessageType::Challenge, body);
}

Bytes encode(const ResponseMessage& msg) {
    Writer w;
    w.bytes(msg.session_id);
    w.u8(static_cast<std::uint8_t>(msg.digests.frag_level()));
    for (const auto& d : msg.digests.digests) {
        w.bytes(d);
    }
    const Bytes body = w.take();
    return encode_frame(MessageType::Response, body);
}

Bytes encode(const VerdictMessage& msg) {
    Writer w;
    w.bytes(msg.session_id);
    w.u8(msg.accepted ? 0 : 1);
    w.u16(msg.corrected_bits);
    const Bytes body = w.take();
    return encode_frame(MessageType::Verdict, body);
}

ChallengeMessage decode_challenge_body(ByteView body) {
    Reader r(body, "challenge");
    ChallengeMessage msg;
    msg.session_id = to_array<16>(r.take(16));
    msg.rn1 = Nonce512::from_bytes(r.take(64));
    msg.rn2 = Nonce512::from_bytes(r.take(64));
    msg.params.g = r.u8();
    msg.params.m = r.u8();
    msg.params.Q = r.u16();
    msg.params.L = r.u16();
    msg.params.frag_level = r.u8();
    msg.params.max_hamming = r.u8();
    msg.mask = MaskVector::from_bytes(r.take(kTableCells / 8), kTableCells);
    r.finish();
    return msg;
}

ResponseMessage decode_response_body(ByteView body) {
    Reader r(body, "response");
    ResponseMessage msg;
    msg.session_id = to_array<16>(r.take(16));
    const std::uint8_t frag = r.u8();
    if (frag == 0) {
        throw FormatError("response: zero fragmentation level");
    }
    for (std::uint8_t i = 0; i < frag; ++i) {
        msg.digests.digests.push_back(to_array<32>(r.take(32)));
    }
    r.finish();
    return msg;
}

VerdictMessage decode_verdict_body(ByteView body) {
    Reader r(body, "verdict");
    VerdictMessage msg;
    msg.session_id = to_array<16>(r.take(16));
    const std::uint8_t status = r.u8();
    if (status > 1) {
        throw FormatError("verdict: unknown status " + std::to_string(status));
    }
    msg.accepted = status == 0;
    msg.corrected_bits = r.u16();
    r.finish();
    return msg;
}

namespace {

Frame expect(ByteView bytes, MessageType type) {
    Frame f = decode_frame(bytes);
    if (f.type != type) {
        throw FormatError("frame: unexpected message type " +
                          std::to_string(static_cast<int>(f.type)));
    }
    return f;
}

}  // namespace

ChallengeMessage decode_challenge(ByteView frame) {
    return decode_challenge_body(expect(frame, MessageType::Challenge).body);
}

ResponseMessage decode_response(ByteView frame) {
    return decode_response_body(expect(frame, MessageType::Response).body);
}

VerdictMessage decode_verdict(ByteView frame) {
    return decode_verdict_body(expect(frame, MessageType::Verdict).body);
}

}  // namespace zkmfa
