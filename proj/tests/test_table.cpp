#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/table.hpp"

using namespace zkmfa;
using namespace zkmfa::testing;

namespace {

BinaryTable bin1(std::initializer_list<std::uint8_t> bits) {
    return BinaryTable(1, static_cast<std::uint32_t>(bits.size()), std::vector<std::uint8_t>(bits));
}

TernaryTable ter1(std::initializer_list<Trit> cells) {
    return TernaryTable(1, static_cast<std::uint32_t>(cells.size()), std::vector<Trit>(cells));
}

constexpr Trit O = Trit::Zero, I = Trit::One, X = Trit::X;

}  // namespace

TEST(Table, ConstructionContracts) {
    EXPECT_THROW(BinaryTable(2, 2, {0, 1, 0}), InvalidInput);
    EXPECT_THROW(BinaryTable(1, 2, {0, 2}), InvalidInput);
    EXPECT_THROW(TernaryTable(1, 1, std::vector<Trit>{static_cast<Trit>(3)}), InvalidInput);
    EXPECT_THROW(BinaryTable(0, 4), InvalidParameters);
    const TernaryTable t = ter1({O, X, I, X});
    EXPECT_EQ(t.x_count(), 2u);
    EXPECT_DOUBLE_EQ(t.x_density(), 0.5);
}

TEST(Superimpose, UnanimityExamples) {
    const std::vector<BinaryTable> reads = {bin1({0, 0, 1}), bin1({0, 1, 1}), bin1({0, 0, 1})};
    EXPECT_EQ(superimpose(reads), ter1({O, X, I}));
    const std::vector<BinaryTable> one = {bin1({1, 0, 1})};
    EXPECT_EQ(superimpose(one), ter1({I, O, I}));
    EXPECT_THROW(superimpose(std::span<const BinaryTable>{}), InvalidInput);
    const std::vector<BinaryTable> bad = {bin1({0, 1}), bin1({0, 1, 1})};
    EXPECT_THROW(superimpose(bad), InvalidInput);
}

TEST(Superimpose, OrderInsensitiveAndMatchesBruteForce) {
    std::mt19937_64 rng(21);
    std::vector<BinaryTable> reads;
    for (int i = 0; i < 5; ++i) {
        // Mostly-agreeing reads so both outcomes are common.
        BinaryTable t = i == 0 ? random_binary(rng, 32, 32) : reads.front();
        if (i > 0) {
            for (std::size_t k = 0; k < t.size(); ++k) {
                if (rng() % 10 == 0) t.flip(k);
            }
        }
        reads.push_back(t);
    }
    const TernaryTable u = superimpose(reads);
    for (std::size_t k = 0; k < u.size(); ++k) {
        bool all0 = true, all1 = true;
        for (const auto& r : reads) {
            all0 &= r[k] == 0;
            all1 &= r[k] == 1;
        }
        const Trit expect = all0 ? O : all1 ? I : X;
        ASSERT_EQ(u[k], expect) << k;
    }
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(reads.begin(), reads.end(), rng);
        EXPECT_EQ(superimpose(reads), u);
    }
}

TEST(Merge, ExamplesAndXAbsorption) {
    // (0,0,c) and (1,1,c) collide; X in A or B dominates.
    EXPECT_EQ(merge_xor(ter1({O, I, X, I, O}), ter1({O, I, I, X, O}), bin1({1, 1, 0, 0, 0})),
              ter1({I, I, X, X, O}));
    EXPECT_EQ(merge_xor(ter1({I}), ter1({O}), bin1({0})), ter1({I}));
    EXPECT_EQ(merge_xor(ter1({I, O, X}), ter1({I, I, O})), ter1({O, I, X}));
    EXPECT_THROW(merge_xor(ter1({I}), ter1({I, O})), InvalidInput);
    EXPECT_THROW(merge_xor(ter1({I}), ter1({I}), bin1({0, 1})), InvalidInput);
}

TEST(Merge, ExactlyFourPreimagesPerOutput) {
    for (int out = 0; out < 2; ++out) {
        int count = 0;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                for (int c = 0; c < 2; ++c) {
                    const TernaryTable d = merge_xor(ter1({trit_of(a)}), ter1({trit_of(b)}),
                                                     bin1({static_cast<std::uint8_t>(c)}));
                    count += d[0] == trit_of(out);
                }
            }
        }
        EXPECT_EQ(count, 4) << out;
    }
}

TEST(Merge, CollisionWitnessOnRandomTables) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const TernaryTable a = random_ternary(rng, 16, 16);
        const TernaryTable b = random_ternary(rng, 16, 16);
        const BinaryTable c = random_binary(rng, 16, 16);
        const TernaryTable d = merge_xor(a, b, c);
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (a.is_x(k) || b.is_x(k)) {
                ASSERT_TRUE(d.is_x(k));
            }
        }
        // Flip a (0,0) cell pair to (1,1): different input, same output.
        std::size_t k = 0;
        while (k < a.size() && !(a[k] == O && b[k] == O)) ++k;
        if (k == a.size()) continue;
        TernaryTable a2 = a, b2 = b;
        a2.set(k, I);
        b2.set(k, I);
        EXPECT_NE(a2, a);
        EXPECT_EQ(merge_xor(a2, b2, c), d);
    }
}

TEST(Mask, Examples) {
    EXPECT_EQ(mask_of(TernaryTable(256, 256, O)).count(), 0u);
    EXPECT_EQ(mask_of(TernaryTable(256, 256, X)).count(), kTableCells);
    TernaryTable t(256, 256, I);
    t.set(0, X);
    t.set(65535, X);
    const MaskVector m = mask_of(t);
    EXPECT_EQ(m.count(), 2u);
    EXPECT_TRUE(m[0]);
    EXPECT_TRUE(m[65535]);
    const Bytes packed = m.to_bytes();
    ASSERT_EQ(packed.size(), 8192u);
    EXPECT_EQ(packed.front(), 0x80);
    EXPECT_EQ(packed.back(), 0x01);
    EXPECT_EQ(MaskVector::from_bytes(packed, kTableCells), m);
    EXPECT_THROW(MaskVector::from_bytes(ByteView(packed).first(100), kTableCells), FormatError);
}

TEST(Mask, ApplyMask) {
    std::mt19937_64 rng(23);
    const BinaryTable p = random_binary(rng);
    EXPECT_EQ(apply_mask(p, MaskVector(kTableCells)), TernaryTable::from_binary(p));
    EXPECT_EQ(apply_mask(p, MaskVector(std::vector<std::uint8_t>(kTableCells, 1))), TernaryTable(256, 256, X));
    EXPECT_THROW(apply_mask(p, MaskVector(10)), InvalidInput);
    const TernaryTable t = random_ternary(rng);
    const TernaryTable masked = apply_mask(p, mask_of(t));
    for (std::size_t k = 0; k < t.size(); ++k) {
        ASSERT_EQ(masked.is_x(k), t.is_x(k));
    }
}

TEST(MatchFraction, Examples) {
    std::mt19937_64 rng(24);
    const BinaryTable probe = random_binary(rng, 10, 20);
    const TernaryTable same = TernaryTable::from_binary(probe);
    EXPECT_DOUBLE_EQ(match_fraction(same, probe), 1.0);
    BinaryTable comp = probe;
    for (std::size_t k = 0; k < comp.size(); ++k) comp.flip(k);
    EXPECT_DOUBLE_EQ(match_fraction(same, comp), 0.0);

    // 100 binary cells out of 200, probe differs on 25 of them; mismatches under X are ignored.
    TernaryTable ref = same;
    BinaryTable p2 = probe;
    for (std::size_t k = 0; k < 200; ++k) {
        if (k >= 100) {
            ref.set(k, X);
            p2.flip(k);
        } else if (k < 25) {
            p2.flip(k);
        }
    }
    EXPECT_DOUBLE_EQ(match_fraction(ref, p2), 0.75);
    EXPECT_THROW(match_fraction(TernaryTable(10, 20, X), probe), UndefinedStatistic);
    EXPECT_THROW(match_fraction(same, random_binary(rng, 20, 10)), InvalidInput);
}

TEST(Serialize, SizeAndRoundTrip) {
    EXPECT_EQ(serialized_size(256, 256), 16392u);
    std::mt19937_64 rng(25);
    for (auto [r, c] : {std::pair{256u, 256u}, {1u, 1u}, {3u, 5u}, {7u, 9u}}) {
        const TernaryTable t = random_ternary(rng, r, c);
        const Bytes b = serialize(t);
        EXPECT_EQ(b.size(), serialized_size(r, c));
        EXPECT_EQ(deserialize(b), t);
    }
    // Cells 0..3 = 0,1,X,0 pack as 00 01 10 00.
    const Bytes b = serialize(ter1({O, I, X, O}));
    EXPECT_EQ(b, (Bytes{'T', 'T', '0', '1', 0, 1, 0, 4, 0x18}));
}

TEST(Serialize, Errors) {
    const Bytes good = serialize(ter1({O, I, X, O, I}));
    Bytes bad = good;
    bad[0] = 'X';
    EXPECT_THROW(deserialize(bad), FormatError);
    bad = good;
    bad[8] |= 0xC0;  // cell 0 -> 11
    EXPECT_THROW(deserialize(bad), FormatError);
    EXPECT_THROW(deserialize(ByteView(good).first(good.size() - 1)), FormatError);
    EXPECT_THROW(deserialize(ByteView(good).first(5)), FormatError);
    bad = good;
    bad.push_back(0);
    EXPECT_THROW(deserialize(bad), FormatError);
    bad = good;
    bad.back() |= 0x01;  // padding bits after cell 4
    EXPECT_THROW(deserialize(bad), FormatError);
}

TEST(Serialize, FileRoundTrip) {
    TempDir dir;
    std::mt19937_64 rng(26);
    const TernaryTable t = random_ternary(rng);
    write_table_file(dir.path() / "t.tt", t);
    EXPECT_EQ(read_table_file(dir.path() / "t.tt"), t);
}
