#include "zkmfa/hash.hpp"

#include <openssl/evp.h>

#include <bit>
#include <memory>

#include "zkmfa/errors.hpp"

namespace zkmfa {

namespace keccak {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

}  // namespace

void permute(State& st) noexcept {
    // Lanes held in locals, indexed x + 5y; one round per iteration.
    std::uint64_t a0 = st[0], a1 = st[1], a2 = st[2], a3 = st[3], a4 = st[4],
                  a5 = st[5], a6 = st[6], a7 = st[7], a8 = st[8], a9 = st[9],
                  a10 = st[10], a11 = st[11], a12 = st[12], a13 = st[13], a14 = st[14],
                  a15 = st[15], a16 = st[16], a17 = st[17], a18 = st[18], a19 = st[19],
                  a20 = st[20], a21 = st[21], a22 = st[22], a23 = st[23], a24 = st[24];
    for (std::uint64_t rc : kRoundConstants) {
        const std::uint64_t c0 = a0 ^ a5 ^ a10 ^ a15 ^ a20;
        const std::uint64_t c1 = a1 ^ a6 ^ a11 ^ a16 ^ a21;
        const std::uint64_t c2 = a2 ^ a7 ^ a12 ^ a17 ^ a22;
        const std::uint64_t c3 = a3 ^ a8 ^ a13 ^ a18 ^ a23;
        const std::uint64_t c4 = a4 ^ a9 ^ a14 ^ a19 ^ a24;
        const std::uint64_t d0 = c4 ^ std::rotl(c1, 1);
        const std::uint64_t d1 = c0 ^ std::rotl(c2, 1);
        const std::uint64_t d2 = c1 ^ std::rotl(c3, 1);
        const std::uint64_t d3 = c2 ^ std::rotl(c4, 1);
        const std::uint64_t d4 = c3 ^ std::rotl(c0, 1);
        const std::uint64_t b0 = a0 ^ d0;
        const std::uint64_t b1 = std::rotl(a6 ^ d1, 44);
        const std::uint64_t b2 = std::rotl(a12 ^ d2, 43);
        const std::uint64_t b3 = std::rotl(a18 ^ d3, 21);
        const std::uint64_t b4 = std::rotl(a24 ^ d4, 14);
        const std::uint64_t b5 = std::rotl(a3 ^ d3, 28);
        const std::uint64_t b6 = std::rotl(a9 ^ d4, 20);
        const std::uint64_t b7 = std::rotl(a10 ^ d0, 3);
        const std::uint64_t b8 = std::rotl(a16 ^ d1, 45);
        const std::uint64_t b9 = std::rotl(a22 ^ d2, 61);
        const std::uint64_t b10 = std::rotl(a1 ^ d1, 1);
        const std::uint64_t b11 = std::rotl(a7 ^ d2, 6);
        const std::uint64_t b12 = std::rotl(a13 ^ d3, 25);
        const std::uint64_t b13 = std::rotl(a19 ^ d4, 8);
        const std::uint64_t b14 = std::rotl(a20 ^ d0, 18);
        const std::uint64_t b15 = std::rotl(a4 ^ d4, 27);
        const std::uint64_t b16 = std::rotl(a5 ^ d0, 36);
        const std::uint64_t b17 = std::rotl(a11 ^ d1, 10);
        const std::uint64_t b18 = std::rotl(a17 ^ d2, 15);
        const std::uint64_t b19 = std::rotl(a23 ^ d3, 56);
        const std::uint64_t b20 = std::rotl(a2 ^ d2, 62);
        const std::uint64_t b21 = std::rotl(a8 ^ d3, 55);
        const std::uint64_t b22 = std::rotl(a14 ^ d4, 39);
        const std::uint64_t b23 = std::rotl(a15 ^ d0, 41);
        const std::uint64_t b24 = std::rotl(a21 ^ d1, 2);
        a0 = b0 ^ (~b1 & b2);
        a1 = b1 ^ (~b2 & b3);
        a2 = b2 ^ (~b3 & b4);
        a3 = b3 ^ (~b4 & b0);
        a4 = b4 ^ (~b0 & b1);
        a5 = b5 ^ (~b6 & b7);
        a6 = b6 ^ (~b7 & b8);
        a7 = b7 ^ (~b8 & b9);
        a8 = b8 ^ (~b9 & b5);
        a9 = b9 ^ (~b5 & b6);
        a10 = b10 ^ (~b11 & b12);
        a11 = b11 ^ (~b12 & b13);
        a12 = b12 ^ (~b13 & b14);
        a13 = b13 ^ (~b14 & b10);
        a14 = b14 ^ (~b10 & b11);
        a15 = b15 ^ (~b16 & b17);
        a16 = b16 ^ (~b17 & b18);
        a17 = b17 ^ (~b18 & b19);
        a18 = b18 ^ (~b19 & b15);
        a19 = b19 ^ (~b15 & b16);
        a20 = b20 ^ (~b21 & b22);
        a21 = b21 ^ (~b22 & b23);
        a22 = b22 ^ (~b23 & b24);
        a23 = b23 ^ (~b24 & b20);
        a24 = b24 ^ (~b20 & b21);
        a0 ^= rc;
    }
    st[0] = a0; st[1] = a1; st[2] = a2; st[3] = a3; st[4] = a4;
    st[5] = a5; st[6] = a6; st[7] = a7; st[8] = a8; st[9] = a9;
    st[10] = a10; st[11] = a11; st[12] = a12; st[13] = a13; st[14] = a14;
    st[15] = a15; st[16] = a16; st[17] = a17; st[18] = a18; st[19] = a19;
    st[20] = a20; st[21] = a21; st[22] = a22; st[23] = a23; st[24] = a24;
}

// Same round as permute(), one vector lane per state. The clones let AVX2 or
// AVX2/AVX-512 hardware run it natively while the default build stays portable.
__attribute__((target_clones("arch=skylake-avx512", "avx2", "default")))
void permute4(State4& st) noexcept {
    Lanes4 a0 = st[0], a1 = st[1], a2 = st[2], a3 = st[3], a4 = st[4],
           a5 = st[5], a6 = st[6], a7 = st[7], a8 = st[8], a9 = st[9],
           a10 = st[10], a11 = st[11], a12 = st[12], a13 = st[13], a14 = st[14],
           a15 = st[15], a16 = st[16], a17 = st[17], a18 = st[18], a19 = st[19],
           a20 = st[20], a21 = st[21], a22 = st[22], a23 = st[23], a24 = st[24];
    for (std::uint64_t rc : kRoundConstants) {
        const Lanes4 c0 = a0 ^ a5 ^ a10 ^ a15 ^ a20;
        const Lanes4 c1 = a1 ^ a6 ^ a11 ^ a16 ^ a21;
        const Lanes4 c2 = a2 ^ a7 ^ a12 ^ a17 ^ a22;
        const Lanes4 c3 = a3 ^ a8 ^ a13 ^ a18 ^ a23;
        const Lanes4 c4 = a4 ^ a9 ^ a14 ^ a19 ^ a24;
        const Lanes4 d0 = c4 ^ (c1 << 1) ^ (c1 >> 63);
        const Lanes4 d1 = c0 ^ (c2 << 1) ^ (c2 >> 63);
        const Lanes4 d2 = c1 ^ (c3 << 1) ^ (c3 >> 63);
        const Lanes4 d3 = c2 ^ (c4 << 1) ^ (c4 >> 63);
        const Lanes4 d4 = c3 ^ (c0 << 1) ^ (c0 >> 63);
        const Lanes4 b0 = a0 ^ d0;
        const Lanes4 t1 = a6 ^ d1;
        const Lanes4 b1 = (t1 << 44) | (t1 >> 20);
        const Lanes4 t2 = a12 ^ d2;
        const Lanes4 b2 = (t2 << 43) | (t2 >> 21);
        const Lanes4 t3 = a18 ^ d3;
        const Lanes4 b3 = (t3 << 21) | (t3 >> 43);
        const Lanes4 t4 = a24 ^ d4;
        const Lanes4 b4 = (t4 << 14) | (t4 >> 50);
        const Lanes4 t5 = a3 ^ d3;
        const Lanes4 b5 = (t5 << 28) | (t5 >> 36);
        const Lanes4 t6 = a9 ^ d4;
        const Lanes4 b6 = (t6 << 20) | (t6 >> 44);
        const Lanes4 t7 = a10 ^ d0;
        const Lanes4 b7 = (t7 << 3) | (t7 >> 61);
        const Lanes4 t8 = a16 ^ d1;
        const Lanes4 b8 = (t8 << 45) | (t8 >> 19);
        const Lanes4 t9 = a22 ^ d2;
        const Lanes4 b9 = (t9 << 61) | (t9 >> 3);
        const Lanes4 t10 = a1 ^ d1;
        const Lanes4 b10 = (t10 << 1) | (t10 >> 63);
        const Lanes4 t11 = a7 ^ d2;
        const Lanes4 b11 = (t11 << 6) | (t11 >> 58);
        const Lanes4 t12 = a13 ^ d3;
        const Lanes4 b12 = (t12 << 25) | (t12 >> 39);
        const Lanes4 t13 = a19 ^ d4;
        const Lanes4 b13 = (t13 << 8) | (t13 >> 56);
        const Lanes4 t14 = a20 ^ d0;
        const Lanes4 b14 = (t14 << 18) | (t14 >> 46);
        const Lanes4 t15 = a4 ^ d4;
        const Lanes4 b15 = (t15 << 27) | (t15 >> 37);
        const Lanes4 t16 = a5 ^ d0;
        const Lanes4 b16 = (t16 << 36) | (t16 >> 28);
        const Lanes4 t17 = a11 ^ d1;
        const Lanes4 b17 = (t17 << 10) | (t17 >> 54);
        const Lanes4 t18 = a17 ^ d2;
        const Lanes4 b18 = (t18 << 15) | (t18 >> 49);
        const Lanes4 t19 = a23 ^ d3;
        const Lanes4 b19 = (t19 << 56) | (t19 >> 8);
        const Lanes4 t20 = a2 ^ d2;
        const Lanes4 b20 = (t20 << 62) | (t20 >> 2);
        const Lanes4 t21 = a8 ^ d3;
        const Lanes4 b21 = (t21 << 55) | (t21 >> 9);
        const Lanes4 t22 = a14 ^ d4;
        const Lanes4 b22 = (t22 << 39) | (t22 >> 25);
        const Lanes4 t23 = a15 ^ d0;
        const Lanes4 b23 = (t23 << 41) | (t23 >> 23);
        const Lanes4 t24 = a21 ^ d1;
        const Lanes4 b24 = (t24 << 2) | (t24 >> 62);
        a0 = b0 ^ (~b1 & b2);
        a1 = b1 ^ (~b2 & b3);
        a2 = b2 ^ (~b3 & b4);
        a3 = b3 ^ (~b4 & b0);
        a4 = b4 ^ (~b0 & b1);
        a5 = b5 ^ (~b6 & b7);
        a6 = b6 ^ (~b7 & b8);
        a7 = b7 ^ (~b8 & b9);
        a8 = b8 ^ (~b9 & b5);
        a9 = b9 ^ (~b5 & b6);
        a10 = b10 ^ (~b11 & b12);
        a11 = b11 ^ (~b12 & b13);
        a12 = b12 ^ (~b13 & b14);
        a13 = b13 ^ (~b14 & b10);
        a14 = b14 ^ (~b10 & b11);
        a15 = b15 ^ (~b16 & b17);
        a16 = b16 ^ (~b17 & b18);
        a17 = b17 ^ (~b18 & b19);
        a18 = b18 ^ (~b19 & b15);
        a19 = b19 ^ (~b15 & b16);
        a20 = b20 ^ (~b21 & b22);
        a21 = b21 ^ (~b22 & b23);
        a22 = b22 ^ (~b23 & b24);
        a23 = b23 ^ (~b24 & b20);
        a24 = b24 ^ (~b20 & b21);
        a0 ^= rc;
    }
    st[0] = a0; st[1] = a1; st[2] = a2; st[3] = a3; st[4] = a4;
    st[5] = a5; st[6] = a6; st[7] = a7; st[8] = a8; st[9] = a9;
    st[10] = a10; st[11] = a11; st[12] = a12; st[13] = a13; st[14] = a14;
    st[15] = a15; st[16] = a16; st[17] = a17; st[18] = a18; st[19] = a19;
    st[20] = a20; st[21] = a21; st[22] = a22; st[23] = a23; st[24] = a24;
}

void Sponge::absorb(ByteView data) noexcept {
    for (std::uint8_t b : data) {
        xor_byte(state_, pos_, b);
        if (++pos_ == rate_) {
            permute(state_);
            pos_ = 0;
        }
    }
}

void Sponge::finalize() noexcept {
    xor_byte(state_, pos_, pad_);
    xor_byte(state_, rate_ - 1, 0x80);
    permute(state_);
    pos_ = 0;
    squeezing_ = true;
}

std::uint8_t Sponge::squeeze_byte() noexcept {
    if (!squeezing_) {
        finalize();
    }
    if (pos_ == rate_) {
        permute(state_);
        pos_ = 0;
    }
    return get_byte(state_, pos_++);
}

void Sponge::squeeze(std::span<std::uint8_t> out) noexcept {
    for (auto& b : out) {
        b = squeeze_byte();
    }
}

}  // namespace keccak

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> sha3_fixed(ByteView data) noexcept {
    keccak::Sponge sponge(200 - 2 * N, 0x06);
    sponge.absorb(data);
    std::array<std::uint8_t, N> out{};
    sponge.squeeze(out);
    return out;
}

}  // namespace

Digest256 sha3_256(ByteView data) noexcept { return sha3_fixed<32>(data); }

Digest512 sha3_512(ByteView data) noexcept { return sha3_fixed<64>(data); }

Digest256 sha256(ByteView data) {
    Digest256 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw Error("EVP_Digest(SHA-256) failed");
    }
    return out;
}

std::string to_hex(ByteView bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw InvalidInput("hex string has odd length");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw InvalidInput(std::string("invalid hex character '") + c + "'");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

}  // namespace zkmfa
