#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include "zkmfa/hash.hpp"
#include "zkmfa/table.hpp"

namespace zkmfa::testing {

// One-shot OpenSSL digests, used as oracles for the in-house sponge.
inline Bytes evp_digest(const EVP_MD* md, ByteView data, std::size_t xof_len = 0) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    Bytes out(xof_len ? xof_len : static_cast<std::size_t>(EVP_MD_get_size(md)));
    unsigned int len = 0;
    bool ok = EVP_DigestInit_ex(ctx, md, nullptr) == 1 && EVP_DigestUpdate(ctx, data.data(), data.size()) == 1;
    ok = ok && (xof_len ? EVP_DigestFinalXOF(ctx, out.data(), out.size()) == 1
                        : EVP_DigestFinal_ex(ctx, out.data(), &len) == 1);
    EVP_MD_CTX_free(ctx);
    if (!ok) {
        throw std::runtime_error("OpenSSL digest failed");
    }
    return out;
}

inline Bytes evp_shake256(ByteView data, std::size_t n) { return evp_digest(EVP_shake256(), data, n); }
inline Bytes evp_sha3_256(ByteView data) { return evp_digest(EVP_sha3_256(), data); }
inline Bytes evp_sha3_512(ByteView data) { return evp_digest(EVP_sha3_512(), data); }
inline Bytes evp_sha256(ByteView data) { return evp_digest(EVP_sha256(), data); }

inline Bytes concat(ByteView a, ByteView b) {
    Bytes out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline std::uint32_t le32(const Bytes& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
           static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

inline BinaryTable random_binary(std::mt19937_64& rng, std::uint32_t rows = kTableSide,
                                 std::uint32_t cols = kTableSide) {
    std::vector<std::uint8_t> bits(std::size_t{rows} * cols);
    for (auto& b : bits) b = rng() & 1;
    return BinaryTable(rows, cols, std::move(bits));
}

inline TernaryTable random_ternary(std::mt19937_64& rng, std::uint32_t rows = kTableSide,
                                   std::uint32_t cols = kTableSide) {
    std::vector<Trit> cells(std::size_t{rows} * cols);
    for (auto& c : cells) c = static_cast<Trit>(rng() % 3);
    return TernaryTable(rows, cols, std::move(cells));
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("zkmfa-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace zkmfa::testing
