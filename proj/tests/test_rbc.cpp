#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/rbc.hpp"

using namespace zkmfa;
using namespace zkmfa::testing;

namespace {

KeyBits random_key(std::mt19937_64& rng, std::size_t n = kKeyBits) {
    std::vector<std::uint8_t> b(n);
    for (auto& x : b) x = rng() & 1;
    return KeyBits(std::move(b));
}

}  // namespace

TEST(KeyBits, PackAndHamming) {
    KeyBits k(std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 1, 1});
    EXPECT_EQ(k.pack(), (Bytes{0x81, 0x80}));
    EXPECT_THROW(KeyBits(std::vector<std::uint8_t>{2}), InvalidInput);
    KeyBits j = k;
    j.flip(0);
    j.flip(8);
    EXPECT_EQ(hamming_distance(k, j), 2u);
    EXPECT_THROW(hamming_distance(k, KeyBits(3)), InvalidInput);
    const auto fp = key_fingerprint(k);
    EXPECT_EQ(Bytes(fp.begin(), fp.end()), evp_sha3_256(k.pack()));
}

TEST(Fragments, SplittingAndErrors) {
    std::mt19937_64 rng(51);
    const KeyBits k = random_key(rng);
    const auto four = fragment(k, 4);
    ASSERT_EQ(four.size(), 4u);
    for (std::size_t f = 0; f < 4; ++f) {
        ASSERT_EQ(four[f].size(), 64u);
        for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(four[f][i], k[f * 64 + i]);
    }
    EXPECT_EQ(fragment(k, 1).front(), k);
    EXPECT_THROW(fragment(k, 3), InvalidParameters);
    EXPECT_THROW(check_frag_level(256, 0), InvalidParameters);
    EXPECT_THROW(check_frag_level(512, 256), InvalidParameters);
}

TEST(Fragments, DigestOracleAndDomainSeparation) {
    std::mt19937_64 rng(52);
    const KeyBits k = random_key(rng);
    const FragmentDigestSet set = digest_fragments(k, 4);
    ASSERT_EQ(set.frag_level(), 4u);
    for (std::size_t f = 0; f < 4; ++f) {
        Bytes msg = fragment(k, 4)[f].pack();
        msg.push_back(static_cast<std::uint8_t>(f));
        const auto& d = set.digests[f];
        EXPECT_EQ(Bytes(d.begin(), d.end()), evp_sha3_256(msg));
    }
    EXPECT_EQ(digest_fragments(k, 4), set);
    KeyBits k2 = k;
    k2.flip(70);
    const auto set2 = digest_fragments(k2, 4);
    EXPECT_EQ(set2.digests[0], set.digests[0]);
    EXPECT_NE(set2.digests[1], set.digests[1]);

    // Repeated fragment content, different positions.
    std::vector<std::uint8_t> half(128);
    for (auto& b : half) b = rng() & 1;
    std::vector<std::uint8_t> twice = half;
    twice.insert(twice.end(), half.begin(), half.end());
    const auto rep = digest_fragments(KeyBits(twice), 2);
    EXPECT_NE(rep.digests[0], rep.digests[1]);
}

TEST(Reconcile, SearchSpace) {
    EXPECT_EQ(search_space_size(64, 3), 43745u);
    EXPECT_EQ(search_space_size(256, 0), 1u);
    EXPECT_EQ(search_space_size(256, 1), 257u);
}

TEST(Reconcile, DirectMatch) {
    std::mt19937_64 rng(53);
    const KeyBits k = random_key(rng);
    const ReconcileResult r = try_reconcile(k, digest_fragments(k, 4));
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.key, k);
    EXPECT_EQ(r.corrected_bits, 0u);
    EXPECT_EQ(r.candidates_tested(), 4u);
    for (const auto& f : r.fragments) EXPECT_EQ(f.status, FragmentStatus::Matched);
}

TEST(Reconcile, SingleFlipRecovered) {
    std::mt19937_64 rng(54);
    const KeyBits server = random_key(rng);
    KeyBits client = server;
    client.flip(100);
    const KeyBits got = reconcile(server, digest_fragments(client, 4), 1);
    EXPECT_EQ(got, client);
    const ReconcileResult r = try_reconcile(server, digest_fragments(client, 4), 1);
    EXPECT_EQ(r.fragments[1].status, FragmentStatus::Corrected);
    EXPECT_EQ(r.fragments[1].distance, 1);
    EXPECT_EQ(r.corrected_bits, 1u);
}

TEST(Reconcile, CapacityPerFragment) {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const KeyBits server = random_key(rng);
        KeyBits client = server;
        // Three flips in every fragment of four: 12 total.
        for (std::size_t f = 0; f < 4; ++f) {
            std::set<std::size_t> pos;
            while (pos.size() < 3) pos.insert(f * 64 + rng() % 64);
            for (auto p : pos) client.flip(p);
        }
        const ReconcileResult r = try_reconcile(server, digest_fragments(client, 4), 3);
        ASSERT_TRUE(r.success);
        EXPECT_EQ(r.key, client);
        EXPECT_EQ(r.corrected_bits, 12u);
        EXPECT_EQ(digest_fragments(r.key, 4), digest_fragments(client, 4));
    }
}

TEST(Reconcile, FourFlipsFailWithFullSearch) {
    std::mt19937_64 rng(56);
    const KeyBits server = random_key(rng);
    KeyBits client = server;
    for (std::size_t p : {64, 80, 90, 127}) client.flip(p);
    const ReconcileResult r = try_reconcile(server, digest_fragments(client, 4), 3);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.key, server);
    EXPECT_EQ(r.fragments[1].status, FragmentStatus::Unresolved);
    EXPECT_EQ(r.fragments[1].distance, -1);
    EXPECT_EQ(r.fragments[1].candidates_tested, 43745u);
    EXPECT_EQ(r.fragments[0].status, FragmentStatus::Matched);
    EXPECT_EQ(r.fragments[3].status, FragmentStatus::Matched);
    try {
        reconcile(server, digest_fragments(client, 4), 3);
        FAIL() << "expected failure";
    } catch (const ReconciliationFailure& e) {
        EXPECT_EQ(e.fragments().size(), 4u);
        EXPECT_EQ(e.fragments()[1].status, FragmentStatus::Unresolved);
    }
}

TEST(Reconcile, CountsCandidatesInLexicographicOrder) {
    // Tested count = everything below distance 3, plus the rank of the flip set among 3-subsets.
    std::mt19937_64 rng(131);
    for (std::size_t frag : {4u, 2u}) {
        const std::size_t len = kKeyBits / frag;
        for (int trial = 0; trial < 5; ++trial) {
            const KeyBits client = random_key(rng);
            KeyBits server = client;
            std::set<std::size_t> flips;
            while (flips.size() < 3) flips.insert(rng() % len);
            for (std::size_t p : flips) server.flip(len + p);
            const std::vector<std::size_t> want(flips.begin(), flips.end());
            std::uint64_t rank = 0;
            bool done = false;
            for (std::size_t a = 0; a < len && !done; ++a)
                for (std::size_t b = a + 1; b < len && !done; ++b)
                    for (std::size_t c = b + 1; c < len && !done; ++c) {
                        ++rank;
                        done = a == want[0] && b == want[1] && c == want[2];
                    }
            const ReconcileResult r = try_reconcile(server, digest_fragments(client, frag), 3);
            ASSERT_TRUE(r.success);
            EXPECT_EQ(r.key, client);
            EXPECT_EQ(r.fragments[1].distance, 3);
            EXPECT_EQ(r.fragments[1].candidates_tested, 1 + len + len * (len - 1) / 2 + rank);
        }
    }
}
