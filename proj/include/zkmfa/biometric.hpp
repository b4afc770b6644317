#pragma once

// Template-less facial biometric: challenge-to-landmark distances quantized
// with MSB chopping and Gray coding, superimposed over frames.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zkmfa/derivation.hpp"
#include "zkmfa/table.hpp"

namespace zkmfa {

enum class FrameKind { Moment, Variation };

const char* to_string(FrameKind kind) noexcept;
/// Throws InvalidInput for anything other than "moment" / "variation".
FrameKind frame_kind_from_string(std::string_view s);

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

using Landmarks = std::array<Point2, kLandmarkCount>;

struct LandmarkFrame {
    std::string person_id;
    std::string frame_id;
    FrameKind kind = FrameKind::Moment;
    Landmarks points{};

    friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

/// Throws FormatError (naming frame_id) if any component is non-finite or outside [0, frame_size).
void validate_frame(const LandmarkFrame& frame, std::uint32_t frame_size = kFrameSize);

struct QuantParams {
    int g = 7;  // accuracy bits
    int m = 1;  // chopped MSBs
    std::uint32_t frame_size = kFrameSize;

    double d_max() const noexcept;
    int bits_per_distance() const noexcept { return g - m; }
    /// Throws InvalidParameters unless 1 <= g <= 16 and 0 <= m < g.
    void validate() const;

    friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

/// Gray-coded value of the g-m low bits of floor(d / D_max * 2^g), w clamped to 2^g - 1.
std::uint32_t quantize_distance_code(double d, const QuantParams& p);
/// The same code as g-m bits, most significant first.
std::vector<std::uint8_t> quantize_distance(double d, const QuantParams& p);

/// Challenges consumed to emit `bits` response bits.
std::size_t challenges_needed(const QuantParams& p, std::size_t landmarks = kSelectedLandmarks,
                              std::size_t bits = kTableCells);

/// Per challenge, per selected landmark (selection order): quantized distance bits,
/// truncated to exactly `bits`. Throws InsufficientChallenges if the challenges run out.
std::vector<std::uint8_t> frame_response_stream(const LandmarkFrame& frame,
                                                std::span<const ChallengePoint> challenges,
                                                std::span<const std::uint32_t> landmark_sel,
                                                const QuantParams& p,
                                                std::size_t bits = kTableCells);

/// Challenge points and landmark selection shared by every frame of a session.
struct BioChallenge {
    QuantParams params;
    std::vector<ChallengePoint> challenges;
    std::vector<std::uint32_t> landmarks;
};

BioChallenge make_bio_challenge(const Nonce512& rn1, const Password& pwd, const QuantParams& p);
BioChallenge make_bio_challenge(const Nonce512& rn1, const Digest512& pwd_sha3,
                                const Digest256& pwd_sha256, const QuantParams& p);

BinaryTable response_table(const LandmarkFrame& frame, const BioChallenge& challenge);

TernaryTable enroll_bio(std::span<const LandmarkFrame> frames, const BioChallenge& challenge);
TernaryTable enroll_bio(std::span<const LandmarkFrame> frames, const Nonce512& rn1,
                        const Password& pwd, const QuantParams& p);

BinaryTable one_shot_bio_table(const LandmarkFrame& frame, const Nonce512& rn1,
                               const Password& pwd, const QuantParams& p);

struct PersonModel {
    std::string person_id;
    Landmarks canonical{};
    double moment_sigma = 0.5;
    double variation_sigma = 2.0;
};

/// Mean 68-point face layout in a 256x256 frame.
const Landmarks& face_anchor_points() noexcept;

PersonModel synth_person(ByteView seed, std::string person_id = {});
LandmarkFrame synth_frame(const PersonModel& model, FrameKind kind, ByteView frame_seed,
                          std::string frame_id = {});

/// Landmark JSON: {"person_id": str, "frames": [{"frame_id", "kind", "points": [[x,y] x 68]}]}
std::vector<LandmarkFrame> load_frames(const std::filesystem::path& path);
std::vector<LandmarkFrame> parse_frames(std::string_view json_text);
std::string frames_to_json(std::string_view person_id, std::span<const LandmarkFrame> frames);
void save_frames(const std::filesystem::path& path, std::string_view person_id,
                 std::span<const LandmarkFrame> frames);

}  // namespace zkmfa
