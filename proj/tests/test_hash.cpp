#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/hash.hpp"

using namespace zkmfa;
using namespace zkmfa::testing;

namespace {

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
}

}  // namespace

TEST(Hash, Sha3MatchesOpenSslAcrossBlockBoundaries) {
    std::mt19937_64 rng(11);
    for (std::size_t n : {0, 1, 71, 72, 73, 135, 136, 137, 200, 1000, 4099}) {
        const Bytes data = random_bytes(rng, n);
        const Digest256 d256 = sha3_256(data);
        const Digest512 d512 = sha3_512(data);
        EXPECT_EQ(Bytes(d256.begin(), d256.end()), evp_sha3_256(data)) << n;
        EXPECT_EQ(Bytes(d512.begin(), d512.end()), evp_sha3_512(data)) << n;
        const Digest256 s = sha256(data);
        EXPECT_EQ(Bytes(s.begin(), s.end()), evp_sha256(data)) << n;
    }
}

TEST(Hash, KnownAnswerEmptyInput) {
    EXPECT_EQ(to_hex(sha3_256({})), "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
    Shake256 s;
    Bytes out(32);
    s.squeeze(out);
    EXPECT_EQ(to_hex(out), "46b9dd2b0ba88d13233b3feb743eeb243fcd52ea62b81b82b50c27646ed5762f");
}

TEST(Hash, ShakeIncrementalMatchesOneShot) {
    std::mt19937_64 rng(12);
    const Bytes data = random_bytes(rng, 500);
    const Bytes expect = evp_shake256(data, 5000);
    Shake256 s;
    // Uneven absorb chunks, then uneven squeeze chunks.
    s.absorb(ByteView(data).first(7)).absorb(ByteView(data).subspan(7, 200)).absorb(ByteView(data).subspan(207));
    Bytes got;
    std::size_t chunk = 1;
    while (got.size() < expect.size()) {
        const std::size_t n = std::min(chunk, expect.size() - got.size());
        Bytes part(n);
        s.squeeze(part);
        got.insert(got.end(), part.begin(), part.end());
        chunk = chunk * 3 + 1;
    }
    EXPECT_EQ(got, expect);
}

TEST(Hash, ShakeByteAtATime) {
    const Bytes data = {1, 2, 3};
    const Bytes expect = evp_shake256(data, 300);
    Shake256 s;
    s.absorb(data);
    for (std::size_t i = 0; i < expect.size(); ++i) {
        ASSERT_EQ(s.next_byte(), expect[i]) << i;
    }
}

TEST(Hash, HexRoundTrip) {
    const Bytes b = {0x00, 0x7f, 0x80, 0xff};
    EXPECT_EQ(to_hex(b), "007f80ff");
    EXPECT_EQ(from_hex("007F80ff"), b);
    EXPECT_THROW(from_hex("abc"), InvalidInput);
    EXPECT_THROW(from_hex("zz"), InvalidInput);
}

TEST(Hash, FourWayPermutationMatchesScalar) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        keccak::State s[4];
        keccak::State4 v;
        for (int k = 0; k < 4; ++k) {
            for (std::size_t i = 0; i < 25; ++i) {
                s[k][i] = rng();
                v[i][k] = s[k][i];
            }
            keccak::permute(s[k]);
        }
        keccak::permute4(v);
        for (int k = 0; k < 4; ++k) {
            for (std::size_t i = 0; i < 25; ++i) ASSERT_EQ(v[i][k], s[k][i]) << trial << "," << k << "," << i;
        }
    }
}
