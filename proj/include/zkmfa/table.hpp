#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "zkmfa/derivation.hpp"
#include "zkmfa/hash.hpp"

namespace zkmfa {

enum class Trit : std::uint8_t { Zero = 0, One = 1, X = 2 };

inline constexpr Trit trit_of(bool bit) noexcept { return bit ? Trit::One : Trit::Zero; }

/// Row-major grid of bits; a one-shot read of a factor.
class BinaryTable {
public:
    explicit BinaryTable(std::uint32_t rows = kTableSide, std::uint32_t cols = kTableSide);
    /// `bits` must hold rows*cols values in {0,1}.
    BinaryTable(std::uint32_t rows, std::uint32_t cols, std::vector<std::uint8_t> bits);

    std::uint32_t rows() const noexcept { return rows_; }
    std::uint32_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return bits_.size(); }

    std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
    void set(std::size_t i, bool bit) noexcept { bits_[i] = bit ? 1 : 0; }
    void flip(std::size_t i) noexcept { bits_[i] ^= 1; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool same_shape(const BinaryTable& o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    friend bool operator==(const BinaryTable&, const BinaryTable&) = default;

private:
    std::uint32_t rows_;
    std::uint32_t cols_;
    std::vector<std::uint8_t> bits_;
};

/// Row-major grid over {0, 1, X}. X marks a cell that is unreliable and never
/// contributes key material.
class TernaryTable {
public:
    explicit TernaryTable(std::uint32_t rows = kTableSide, std::uint32_t cols = kTableSide,
                          Trit fill = Trit::Zero);
    TernaryTable(std::uint32_t rows, std::uint32_t cols, std::vector<Trit> cells);
    static TernaryTable from_binary(const BinaryTable& b);

    std::uint32_t rows() const noexcept { return rows_; }
    std::uint32_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return cells_.size(); }

    Trit operator[](std::size_t i) const noexcept { return cells_[i]; }
    void set(std::size_t i, Trit t) noexcept { cells_[i] = t; }
    bool is_x(std::size_t i) const noexcept { return cells_[i] == Trit::X; }
    std::span<const Trit> cells() const noexcept { return cells_; }

    std::size_t x_count() const noexcept;
    /// Fraction of cells marked X.
    double x_density() const noexcept;

    template <class Table>
    bool same_shape(const Table& o) const noexcept {
        return rows_ == o.rows() && cols_ == o.cols();
    }

    friend bool operator==(const TernaryTable&, const TernaryTable&) = default;

private:
    std::uint32_t rows_;
    std::uint32_t cols_;
    std::vector<Trit> cells_;
};

/// Bit j set iff cell j (row-major) is X.
class MaskVector {
public:
    explicit MaskVector(std::size_t size = kTableCells) : bits_(size, 0) {}
    explicit MaskVector(std::vector<std::uint8_t> bits);

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }
    std::size_t count() const noexcept;

    /// Packed MSB-first: bit j lives in byte j/8 at position 7 - j%8.
    Bytes to_bytes() const;
    static MaskVector from_bytes(ByteView packed, std::size_t size);

    friend bool operator==(const MaskVector&, const MaskVector&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Unanimity across reads: the common bit, else X.
TernaryTable superimpose(std::span<const BinaryTable> reads);

/// Cellwise merge: X if either ternary input is X, else a ^ b ^ c.
TernaryTable merge_xor(const TernaryTable& a, const TernaryTable& b);
TernaryTable merge_xor(const TernaryTable& a, const TernaryTable& b, const BinaryTable& c);

BinaryTable xor_tables(const BinaryTable& a, const BinaryTable& b);

MaskVector mask_of(const TernaryTable& t);
TernaryTable apply_mask(const BinaryTable& p, const MaskVector& mask);

/// Agreement of `probe` with the binary cells of `ref`; X cells are ignored.
/// Throws UndefinedStatistic when `ref` has no binary cell.
double match_fraction(const TernaryTable& ref, const BinaryTable& probe);

// TT01 format: "TT01" | rows u16 BE | cols u16 BE | 2-bit cells packed MSB-first,
// 00 = 0, 01 = 1, 10 = X, 11 reserved; the final byte is zero-padded.
inline constexpr std::array<std::uint8_t, 4> kTableMagic = {'T', 'T', '0', '1'};

std::size_t serialized_size(std::uint32_t rows, std::uint32_t cols) noexcept;
Bytes serialize(const TernaryTable& t);
TernaryTable deserialize(ByteView bytes);

void write_table_file(const std::filesystem::path& path, const TernaryTable& t);
TernaryTable read_table_file(const std::filesystem::path& path);

}  // namespace zkmfa
