#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zkmfa/corpus.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

using namespace zkmfa;
using namespace zkmfa::testing;

namespace fs = std::filesystem;

namespace {

fs::path checked_in() { return fs::path(ZKMFA_SOURCE_DIR) / "corpus"; }

void copy_corpus(const fs::path& to) { fs::copy(checked_in(), to, fs::copy_options::recursive); }

}  // namespace

TEST(Corpus, CheckedInCorpusVerifies) {
    const GoldenReport r = verify_golden(checked_in());
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.checked, load_manifest(checked_in()).size());
    for (const auto& m : r.mismatches) ADD_FAILURE() << m.path << ": " << m.summary;
}

TEST(Corpus, SingleCorruptedByteIsReported) {
    TempDir dir;
    copy_corpus(dir.path() / "c");
    const fs::path tt = dir.path() / "c" / "golden" / "token_device_000.tt";
    Bytes b = read_file(tt);
    b[100] ^= 0x01;
    write_file(tt, b);
    const GoldenReport r = verify_golden(dir.path() / "c");
    ASSERT_EQ(r.mismatches.size(), 1u);
    EXPECT_EQ(r.mismatches[0].path, "golden/token_device_000.tt");
    EXPECT_NE(r.mismatches[0].summary.find("100"), std::string::npos);
}

TEST(Corpus, DifferentSeedDiverges) {
    const GoldenReport r = verify_golden(checked_in(), kCorpusSeed + 1);
    EXPECT_FALSE(r.ok());
}

TEST(Corpus, RegenerationIsByteIdentical) {
    TempDir dir;
    const auto fresh = generate_corpus(dir.path(), kCorpusSeed);
    const auto manifest = load_manifest(checked_in());
    ASSERT_EQ(fresh.size(), manifest.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        EXPECT_EQ(fresh[i].path, manifest[i].path);
        EXPECT_EQ(fresh[i].sha3_256, manifest[i].sha3_256) << fresh[i].path;
    }
    EXPECT_THROW(load_manifest(dir.path() / "nope"), NotFound);
}
