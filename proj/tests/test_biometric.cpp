#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "test_util.hpp"
#include "zkmfa/biometric.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

using namespace zkmfa;
using namespace zkmfa::testing;

namespace {

std::string bits_str(const std::vector<std::uint8_t>& bits) {
    std::string s;
    for (auto b : bits) s += static_cast<char>('0' + b);
    return s;
}

QuantParams qp(int g, int m) { return QuantParams{g, m, kFrameSize}; }

PersonModel person(std::uint8_t id) { return synth_person(Bytes{0x70, id}, "p" + std::to_string(id)); }

LandmarkFrame frame(const PersonModel& p, int k, FrameKind kind = FrameKind::Moment) {
    return synth_frame(p, kind, Bytes{0x66, static_cast<std::uint8_t>(k)}, "f" + std::to_string(k));
}

Nonce512 rn1() { return Nonce512::derive(Bytes{2}, "test-rn1"); }

}  // namespace

TEST(Quantizer, WorkedExamples) {
    EXPECT_NEAR(qp(7, 1).d_max(), 362.0387, 1e-4);
    EXPECT_EQ(bits_str(quantize_distance(0.0, qp(7, 1))), "000000");
    EXPECT_EQ(bits_str(quantize_distance(0.0, qp(12, 3))), "000000000");
    EXPECT_EQ(bits_str(quantize_distance(100.0, qp(7, 1))), "110010");
    EXPECT_EQ(bits_str(quantize_distance(250.0, qp(8, 2))), "101000");
    EXPECT_EQ(bits_str(quantize_distance(qp(7, 1).d_max(), qp(7, 1))), "100000");
    EXPECT_EQ(bits_str(quantize_distance(1e9, qp(7, 1))), "100000");
}

TEST(Quantizer, Errors) {
    EXPECT_THROW(quantize_distance(1.0, qp(7, 7)), InvalidParameters);
    EXPECT_THROW(quantize_distance(1.0, qp(0, 0)), InvalidParameters);
    EXPECT_THROW(quantize_distance(1.0, qp(17, 1)), InvalidParameters);
    EXPECT_THROW(quantize_distance(1.0, qp(7, -1)), InvalidParameters);
    EXPECT_THROW(quantize_distance(-1.0, qp(7, 1)), InvalidInput);
    EXPECT_THROW(quantize_distance(std::nan(""), qp(7, 1)), InvalidInput);
}

TEST(Quantizer, GrayAdjacencyExhaustive) {
    for (int g = 1; g <= 16; ++g) {
        for (int m = 0; m < g; ++m) {
            const int n = g - m;
            const double step = qp(g, m).d_max() / std::ldexp(1.0, g);
            // Bin centres for v and v+1 within the first chopped block.
            for (std::uint32_t v = 0; v + 1 < (1u << n); ++v) {
                const auto a = quantize_distance_code((v + 0.5) * step, qp(g, m));
                const auto b = quantize_distance_code((v + 1.5) * step, qp(g, m));
                ASSERT_EQ(std::popcount(a ^ b), 1) << g << "," << m << "," << v;
            }
        }
    }
}

TEST(Quantizer, ChopMakesBlocksIdentical) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 2000; ++trial) {
        const int g = 2 + static_cast<int>(rng() % 15);
        const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(g - 1));
        const QuantParams p = qp(g, m);
        const double step = p.d_max() / std::ldexp(1.0, g);
        const std::uint32_t block = 1u << (g - m);
        const std::uint32_t w = static_cast<std::uint32_t>(rng() % block);
        const std::uint32_t k = static_cast<std::uint32_t>(rng() % (1u << m));
        const double d1 = (w + 0.5) * step;
        const double d2 = (w + block * k + 0.5) * step;
        ASSERT_EQ(quantize_distance(d1, p), quantize_distance(d2, p));
    }
}

TEST(ResponseStream, ChallengeCountAndDeterminism) {
    EXPECT_EQ(challenges_needed(qp(7, 1)), 171u);
    EXPECT_EQ(challenges_needed(qp(7, 2)), 205u);
    const BioChallenge c = make_bio_challenge(rn1(), Password("pw"), qp(7, 1));
    EXPECT_EQ(c.challenges.size(), 171u);
    EXPECT_EQ(c.landmarks.size(), kSelectedLandmarks);
    const LandmarkFrame f = frame(person(1), 0);
    const auto s1 = frame_response_stream(f, c.challenges, c.landmarks, c.params);
    EXPECT_EQ(s1.size(), kTableCells);
    EXPECT_EQ(s1, frame_response_stream(f, c.challenges, c.landmarks, c.params));
    EXPECT_THROW(frame_response_stream(f, std::span(c.challenges).first(170), c.landmarks, c.params),
                 InsufficientChallenges);
}

TEST(ResponseStream, MatchesPerDistanceQuantizer) {
    const BioChallenge c = make_bio_challenge(rn1(), Password("pw"), qp(8, 2));
    const LandmarkFrame f = frame(person(2), 0);
    const auto s = frame_response_stream(f, c.challenges, c.landmarks, c.params);
    std::vector<std::uint8_t> expect;
    for (std::size_t q = 0; expect.size() < kTableCells; ++q) {
        for (auto j : c.landmarks) {
            const double d = std::hypot(f.points[j].x - c.challenges[q].x, f.points[j].y - c.challenges[q].y);
            const auto bits = quantize_distance(d, c.params);
            expect.insert(expect.end(), bits.begin(), bits.end());
        }
    }
    expect.resize(kTableCells);
    EXPECT_EQ(s, expect);
}

TEST(ResponseStream, TranslationInvariant) {
    LandmarkFrame f;
    std::mt19937_64 rng(42);
    for (auto& p : f.points) p = {40.0 + rng() % 100 + 0.25, 40.0 + rng() % 100 + 0.75};
    std::vector<ChallengePoint> ch(200);
    for (auto& q : ch) q = {static_cast<std::uint16_t>(30 + rng() % 100), static_cast<std::uint16_t>(30 + rng() % 100)};
    const auto sel = select_landmark_indices(Password("t"));
    const auto base = frame_response_stream(f, ch, sel, qp(7, 1));
    LandmarkFrame g = f;
    for (auto& p : g.points) p = {p.x + 17, p.y + 9};
    for (auto& q : ch) q = {static_cast<std::uint16_t>(q.x + 17), static_cast<std::uint16_t>(q.y + 9)};
    EXPECT_EQ(frame_response_stream(g, ch, sel, qp(7, 1)), base);
}

TEST(EnrollBio, UnanimityAndJitter) {
    const PersonModel p = person(3);
    const LandmarkFrame f = frame(p, 0);
    const BioChallenge c = make_bio_challenge(rn1(), Password("pw"), qp(7, 1));
    const std::vector<LandmarkFrame> single = {f};
    const TernaryTable t1 = enroll_bio(single, c);
    EXPECT_EQ(t1.x_count(), 0u);
    EXPECT_EQ(t1, TernaryTable::from_binary(response_table(f, c)));
    EXPECT_EQ(enroll_bio(std::vector<LandmarkFrame>(4, f), c), t1);
    EXPECT_EQ(one_shot_bio_table(f, rn1(), Password("pw"), qp(7, 1)), response_table(f, c));
    EXPECT_THROW(enroll_bio(std::vector<LandmarkFrame>{}, c), InvalidInput);

    std::vector<LandmarkFrame> jittered;
    for (int k = 0; k < 10; ++k) jittered.push_back(frame(p, k));
    double prev = 0.0;
    for (int g : {6, 7, 8}) {
        const double x = enroll_bio(jittered, rn1(), Password("pw"), qp(g, 1)).x_density();
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
        EXPECT_GT(x, prev) << g;
        prev = x;
    }
}

TEST(EnrollBio, GenuineBeatsImpostor) {
    const Password pwd("pw");
    const QuantParams q = qp(7, 1);
    std::vector<TernaryTable> enrolled;
    std::vector<PersonModel> people;
    for (std::uint8_t i = 0; i < 6; ++i) {
        people.push_back(person(10 + i));
        std::vector<LandmarkFrame> fs;
        for (int k = 0; k < 10; ++k) fs.push_back(frame(people.back(), k));
        enrolled.push_back(enroll_bio(fs, rn1(), pwd, q));
    }
    double genuine = 0, impostor = 0;
    int ng = 0, ni = 0;
    for (std::size_t a = 0; a < people.size(); ++a) {
        for (std::size_t b = 0; b < people.size(); ++b) {
            const double mf = match_fraction(enrolled[a], one_shot_bio_table(frame(people[b], 50), rn1(), pwd, q));
            (a == b ? genuine : impostor) += mf;
            ++(a == b ? ng : ni);
        }
    }
    EXPECT_GT(genuine / ng, impostor / ni);
}

TEST(Synth, DeterministicAndDistinct) {
    const PersonModel a = person(4);
    const PersonModel b = person(4);
    EXPECT_EQ(a.canonical, b.canonical);
    EXPECT_NE(a.canonical, person(5).canonical);
    for (const auto& pt : a.canonical) {
        EXPECT_GE(pt.x, 8.0);
        EXPECT_LT(pt.x, 248.0);
        EXPECT_GE(pt.y, 8.0);
        EXPECT_LT(pt.y, 248.0);
    }
    EXPECT_EQ(frame(a, 1), frame(b, 1));
    // Moment jitter: landmarks stay within a few sigma of the canonical layout.
    const LandmarkFrame f = frame(a, 2);
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        EXPECT_LT(std::hypot(f.points[i].x - a.canonical[i].x, f.points[i].y - a.canonical[i].y), 6 * a.moment_sigma);
    }
    EXPECT_NO_THROW(validate_frame(f));
}

TEST(FramesJson, RoundTripAndErrors) {
    const PersonModel p = person(6);
    std::vector<LandmarkFrame> frames;
    for (int k = 0; k < 25; ++k) frames.push_back(frame(p, k, k % 2 ? FrameKind::Variation : FrameKind::Moment));
    const std::string json = frames_to_json(p.person_id, frames);
    EXPECT_EQ(parse_frames(json), frames);
    TempDir dir;
    save_frames(dir.path() / "p.json", p.person_id, frames);
    EXPECT_EQ(load_frames(dir.path() / "p.json").size(), 25u);

    auto points = [](int n, double v) {
        std::string s = "[";
        for (int i = 0; i < n; ++i) s += std::string(i ? "," : "") + "[" + std::to_string(v) + ",10.0]";
        return s + "]";
    };
    auto doc = [](const std::string& pts) {
        return R"({"person_id":"x","frames":[{"frame_id":"bad_frame","kind":"moment","points":)" + pts + "}]}";
    };
    EXPECT_NO_THROW(parse_frames(doc(points(68, 255.5))));
    try {
        parse_frames(doc(points(67, 10.0)));
        FAIL() << "67 points accepted";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("bad_frame"), std::string::npos);
    }
    EXPECT_THROW(parse_frames(doc(points(68, 256.0))), FormatError);
    EXPECT_THROW(parse_frames(doc(points(68, -0.5))), FormatError);
    EXPECT_THROW(parse_frames("{not json"), FormatError);
    EXPECT_THROW(parse_frames(R"({"person_id":"x"})"), FormatError);
    EXPECT_THROW(frame_kind_from_string("blink"), InvalidInput);
}
