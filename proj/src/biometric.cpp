#include "zkmfa/biometric.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "sampling.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

namespace zkmfa {

const char* to_string(FrameKind kind) noexcept {
    return kind == FrameKind::Moment ? "moment" : "variation";
}

FrameKind frame_kind_from_string(std::string_view s) {
    if (s == "moment") return FrameKind::Moment;
    if (s == "variation") return FrameKind::Variation;
    throw InvalidInput("unknown frame kind '" + std::string(s) + "'");
}

void validate_frame(const LandmarkFrame& frame, std::uint32_t frame_size) {
    const double limit = static_cast<double>(frame_size);
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
        for (double c : {frame.points[i].x, frame.points[i].y}) {
            if (!std::isfinite(c) || c < 0.0 || c >= limit) {
                throw FormatError("frame '" + frame.frame_id + "': landmark " + std::to_string(i) +
                                  " component out of range [0, " + std::to_string(frame_size) +
                                  ")");
            }
        }
    }
}

double QuantParams::d_max() const noexcept {
    return std::sqrt(2.0) * static_cast<double>(frame_size);
}

void QuantParams::validate() const {
    if (g < 1 || g > 16) {
        throw InvalidParameters("accuracy bits g must be in [1, 16], got " + std::to_string(g));
    }
    if (m < 0 || m >= g) {
        throw InvalidParameters("chopped MSBs m must be in [0, g), got m=" + std::to_string(m) +
                                " g=" + std::to_string(g));
    }
    if (frame_size == 0) {
        throw InvalidParameters("frame size must be positive");
    }
}

std::uint32_t quantize_distance_code(double d, const QuantParams& p) {
    p.validate();
    if (!(d >= 0.0)) {
        throw InvalidInput("distance must be non-negative");
    }
    const std::uint32_t levels = 1u << p.g;
    const double scaled = std::floor(d / p.d_max() * static_cast<double>(levels));
    const std::uint32_t w =
        scaled >= static_cast<double>(levels) ? levels - 1 : static_cast<std::uint32_t>(scaled);
    const std::uint32_t v = w & ((1u << p.bits_per_distance()) - 1);
    return v ^ (v >> 1);
}

std::vector<std::uint8_t> quantize_distance(double d, const QuantParams& p) {
    const std::uint32_t code = quantize_distance_code(d, p);
    const int n = p.bits_per_distance();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        bits[static_cast<std::size_t>(i)] = (code >> (n - 1 - i)) & 1;
    }
    return bits;
}

std::size_t challenges_needed(const QuantParams& p, std::size_t landmarks, std::size_t bits) {
    p.validate();
    const std::size_t per_challenge = landmarks * static_cast<std::size_t>(p.bits_per_distance());
    return (bits + per_challenge - 1) / per_challenge;
}

std::vector<std::uint8_t> frame_response_stream(const LandmarkFrame& frame,
                                                std::span<const ChallengePoint> challenges,
                                                std::span<const std::uint32_t> landmark_sel,
                                                const QuantParams& p, std::size_t bits) {
    p.validate();
    if (landmark_sel.empty()) {
        throw InvalidParameters("landmark selection is empty");
    }
    for (std::uint32_t j : landmark_sel) {
        if (j >= frame.points.size()) {
            throw InvalidParameters("landmark index out of range");
        }
    }
    const int width = p.bits_per_distance();
    const double scale = static_cast<double>(1u << p.g);
    const double d_max = p.d_max();
    const std::uint32_t top = (1u << p.g) - 1;
    const std::uint32_t low_mask = (1u << width) - 1;

    std::vector<std::uint8_t> out;
    out.reserve(bits + static_cast<std::size_t>(width) * landmark_sel.size());
    std::size_t next = 0;
    while (out.size() < bits) {
        if (next == challenges.size()) {
            throw InsufficientChallenges("challenge stream exhausted after " +
                                         std::to_string(next) + " challenges (" +
                                         std::to_string(out.size()) + " of " +
                                         std::to_string(bits) + " bits)");
        }
        const ChallengePoint q = challenges[next++];
        for (std::uint32_t j : landmark_sel) {
            const double dx = frame.points[j].x - q.x;
            const double dy = frame.points[j].y - q.y;
            const double d = std::sqrt(dx * dx + dy * dy);
            const double scaled = std::floor(d / d_max * scale);
            const std::uint32_t w =
                scaled >= static_cast<double>(top) ? top : static_cast<std::uint32_t>(scaled);
            const std::uint32_t v = w & low_mask;
            const std::uint32_t gray = v ^ (v >> 1);
            for (int b = width - 1; b >= 0; --b) {
                out.push_back((gray >> b) & 1);
            }
        }
    }
    out.resize(bits);
    return out;
}

BioChallenge make_bio_challenge(const Nonce512& rn1, const Digest512& pwd_sha3,
                                const Digest256& pwd_sha256, const QuantParams& p) {
    p.validate();
    BioChallenge c;
    c.params = p;
    c.landmarks = select_landmark_indices(pwd_sha256, kLandmarkCount, kSelectedLandmarks);
    c.challenges = derive_challenge_coords(rn1, pwd_sha3, p.frame_size,
                                           challenges_needed(p, c.landmarks.size(), kTableCells));
    return c;
}

BioChallenge make_bio_challenge(const Nonce512& rn1, const Password& pwd, const QuantParams& p) {
    return make_bio_challenge(rn1, pwd.digest512(), pwd.digest256(), p);
}

BinaryTable response_table(const LandmarkFrame& frame, const BioChallenge& challenge) {
    return BinaryTable(kTableSide, kTableSide,
                       frame_response_stream(frame, challenge.challenges, challenge.landmarks,
                                             challenge.params, kTableCells));
}

TernaryTable enroll_bio(std::span<const LandmarkFrame> frames, const BioChallenge& challenge) {
    if (frames.empty()) {
        throw InvalidInput("enroll_bio: need at least one frame");
    }
    std::vector<BinaryTable> reads;
    reads.reserve(frames.size());
    for (const auto& f : frames) {
        reads.push_back(response_table(f, challenge));
    }
    return superimpose(reads);
}

TernaryTable enroll_bio(std::span<const LandmarkFrame> frames, const Nonce512& rn1,
                        const Password& pwd, const QuantParams& p) {
    if (frames.empty()) {
        throw InvalidInput("enroll_bio: need at least one frame");
    }
    return enroll_bio(frames, make_bio_challenge(rn1, pwd, p));
}

BinaryTable one_shot_bio_table(const LandmarkFrame& frame, const Nonce512& rn1,
                               const Password& pwd, const QuantParams& p) {
    return response_table(frame, make_bio_challenge(rn1, pwd, p));
}

const Landmarks& face_anchor_points() noexcept {
    // jaw 0-16, brows 17-26, nose 27-35, eyes 36-47, mouth 48-67
    static const Landmarks kAnchors = {{
        {52.29, 116.37},  {54.81, 133.86},  {59.84, 150.46},  {67.20, 165.61},  {76.66, 178.78},
        {87.87, 189.52},  {100.45, 197.47}, {113.99, 202.35}, {128.00, 204.00}, {142.01, 202.35},
        {155.55, 197.47}, {168.13, 189.52}, {179.34, 178.78}, {188.80, 165.61}, {196.16, 150.46},
        {201.19, 133.86}, {203.71, 116.37}, {66.00, 84.00},   {78.00, 77.00},   {92.00, 75.00},
        {106.00, 77.00},  {119.00, 82.00},  {137.00, 82.00},  {150.00, 77.00},  {164.00, 75.00},
        {178.00, 77.00},  {190.00, 84.00},  {128.00, 96.00},  {128.00, 109.00}, {128.00, 122.00},
        {128.00, 135.00}, {112.00, 146.00}, {120.00, 149.00}, {128.00, 151.00}, {136.00, 149.00},
        {144.00, 146.00}, {76.00, 100.00},  {84.00, 94.00},   {96.00, 94.00},   {105.00, 100.00},
        {96.00, 104.00},  {84.00, 104.00},  {150.00, 100.00}, {158.00, 94.00},  {170.00, 94.00},
        {179.00, 100.00}, {170.00, 104.00}, {158.00, 104.00}, {98.00, 178.00},  {109.00, 170.00},
        {120.00, 166.00}, {128.00, 168.00}, {136.00, 166.00}, {147.00, 170.00}, {158.00, 178.00},
        {148.00, 188.00}, {137.00, 192.00}, {128.00, 193.00}, {119.00, 192.00}, {108.00, 188.00},
        {104.00, 178.00}, {120.00, 174.00}, {128.00, 175.00}, {136.00, 174.00}, {152.00, 178.00},
        {136.00, 182.00}, {128.00, 183.00}, {120.00, 182.00},
    }};
    return kAnchors;
}

namespace {

// Person-to-person variation of the synthetic prior, in pixels.
constexpr double kScaleSpread = 0.08;
constexpr double kShiftSpread = 8.0;
constexpr double kPointSpread = 5.0;
constexpr double kCanonicalMin = 8.0;
constexpr double kCanonicalMax = 247.99;

double clamp_to_frame(double v) {
    return std::clamp(v, 0.0, std::nextafter(static_cast<double>(kFrameSize), 0.0));
}

}  // namespace

PersonModel synth_person(ByteView seed, std::string person_id) {
    XofStream xof{as_bytes("zkmfa/bio/person"), seed};
    PersonModel model;
    model.person_id = std::move(person_id);

    const double scale = 1.0 + kScaleSpread * (2.0 * xof.next_unit() - 1.0);
    const double shift_x = kShiftSpread * (2.0 * xof.next_unit() - 1.0);
    const double shift_y = kShiftSpread * (2.0 * xof.next_unit() - 1.0);
    const Landmarks& anchors = face_anchor_points();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double ox = kPointSpread * (2.0 * xof.next_unit() - 1.0);
        const double oy = kPointSpread * (2.0 * xof.next_unit() - 1.0);
        const double x = 128.0 + scale * (anchors[i].x - 128.0) + shift_x + ox;
        const double y = 140.0 + scale * (anchors[i].y - 140.0) + shift_y + oy;
        model.canonical[i] = {std::clamp(x, kCanonicalMin, kCanonicalMax),
                              std::clamp(y, kCanonicalMin, kCanonicalMax)};
    }
    return model;
}

LandmarkFrame synth_frame(const PersonModel& model, FrameKind kind, ByteView frame_seed,
                          std::string frame_id) {
    XofStream xof{as_bytes("zkmfa/bio/frame"), frame_seed};
    const double sigma = kind == FrameKind::Moment ? model.moment_sigma : model.variation_sigma;
    LandmarkFrame f;
    f.person_id = model.person_id;
    f.frame_id = std::move(frame_id);
    f.kind = kind;
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        const double jx = sigma * detail::standard_normal(xof);
        const double jy = sigma * detail::standard_normal(xof);
        f.points[i] = {clamp_to_frame(model.canonical[i].x + jx),
                       clamp_to_frame(model.canonical[i].y + jy)};
    }
    return f;
}

std::vector<LandmarkFrame> parse_frames(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("landmark file is not valid JSON: ") + e.what());
    }
    std::vector<LandmarkFrame> frames;
    std::string current = "<unknown>";
    try {
        const std::string person_id = doc.at("person_id").get<std::string>();
        for (const auto& jf : doc.at("frames")) {
            LandmarkFrame f;
            f.person_id = person_id;
            f.frame_id = jf.at("frame_id").get<std::string>();
            current = f.frame_id;
            f.kind = frame_kind_from_string(jf.at("kind").get<std::string>());
            const auto& pts = jf.at("points");
            if (!pts.is_array() || pts.size() != kLandmarkCount) {
                throw FormatError("frame '" + f.frame_id + "': expected 68 points, got " +
                                  std::to_string(pts.is_array() ? pts.size() : 0));
            }
            for (std::size_t i = 0; i < kLandmarkCount; ++i) {
                const auto& p = pts[i];
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    throw FormatError("frame '" + f.frame_id + "': point " + std::to_string(i) +
                                      " is not an [x, y] pair");
                }
                f.points[i] = {p[0].get<double>(), p[1].get<double>()};
            }
            validate_frame(f);
            frames.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("frame '" + current + "': " + e.what());
    } catch (const InvalidInput& e) {
        throw FormatError("frame '" + current + "': " + e.what());
    }
    return frames;
}

std::vector<LandmarkFrame> load_frames(const std::filesystem::path& path) {
    try {
        return parse_frames(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string frames_to_json(std::string_view person_id, std::span<const LandmarkFrame> frames) {
    nlohmann::ordered_json doc;
    doc["person_id"] = std::string(person_id);
    doc["frames"] = nlohmann::ordered_json::array();
    for (const auto& f : frames) {
        nlohmann::ordered_json jf;
        jf["frame_id"] = f.frame_id;
        jf["kind"] = to_string(f.kind);
        auto pts = nlohmann::ordered_json::array();
        for (const auto& p : f.points) {
            pts.push_back({p.x, p.y});
        }
        jf["points"] = std::move(pts);
        doc["frames"].push_back(std::move(jf));
    }
    return doc.dump() + "\n";
}

void save_frames(const std::filesystem::path& path, std::string_view person_id,
                 std::span<const LandmarkFrame> frames) {
    write_text_file(path, frames_to_json(person_id, frames));
}

}  // namespace zkmfa
