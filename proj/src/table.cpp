#include "zkmfa/table.hpp"

#include <algorithm>

#include "zkmfa/errors.hpp"
#include "zkmfa/io.hpp"

namespace zkmfa {

namespace {

void check_dims(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0 || cols == 0 || rows > 0xFFFF || cols > 0xFFFF) {
        throw InvalidParameters("table dimensions must be in [1, 65535], got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
    }
}

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                           "x" + std::to_string(b.cols()) + ")");
    }
}

}  // namespace

BinaryTable::BinaryTable(std::uint32_t rows, std::uint32_t cols)
    : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    bits_.assign(static_cast<std::size_t>(rows) * cols, 0);
}

BinaryTable::BinaryTable(std::uint32_t rows, std::uint32_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
    check_dims(rows, cols);
    if (bits_.size() != static_cast<std::size_t>(rows) * cols) {
        throw InvalidInput("binary table needs " + std::to_string(std::size_t{rows} * cols) +
                           " cells, got " + std::to_string(bits_.size()));
    }
    if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
        throw InvalidInput("binary table cell outside {0,1}");
    }
}

TernaryTable::TernaryTable(std::uint32_t rows, std::uint32_t cols, Trit fill)
    : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    cells_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

TernaryTable::TernaryTable(std::uint32_t rows, std::uint32_t cols, std::vector<Trit> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)) {
    check_dims(rows, cols);
    if (cells_.size() != static_cast<std::size_t>(rows) * cols) {
        throw InvalidInput("ternary table needs " + std::to_string(std::size_t{rows} * cols) +
                           " cells, got " + std::to_string(cells_.size()));
    }
    if (std::any_of(cells_.begin(), cells_.end(), [](Trit t) { return t > Trit::X; })) {
        throw InvalidInput("ternary table cell outside {0,1,X}");
    }
}

TernaryTable TernaryTable::from_binary(const BinaryTable& b) {
    std::vector<Trit> cells(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        cells[i] = trit_of(b[i] != 0);
    }
    return TernaryTable(b.rows(), b.cols(), std::move(cells));
}

std::size_t TernaryTable::x_count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), Trit::X));
}

double TernaryTable::x_density() const noexcept {
    return static_cast<double>(x_count()) / static_cast<double>(cells_.size());
}

MaskVector::MaskVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) {
        b = b ? 1 : 0;
    }
}

std::size_t MaskVector::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Bytes MaskVector::to_bytes() const {
    Bytes out((bits_.size() + 7) / 8, 0);
    for (std::size_t j = 0; j < bits_.size(); ++j) {
        if (bits_[j]) {
            out[j / 8] |= static_cast<std::uint8_t>(0x80u >> (j % 8));
        }
    }
    return out;
}

MaskVector MaskVector::from_bytes(ByteView packed, std::size_t size) {
    if (packed.size() != (size + 7) / 8) {
        throw FormatError("mask needs " + std::to_string((size + 7) / 8) + " bytes, got " +
                          std::to_string(packed.size()));
    }
    MaskVector m(size);
    for (std::size_t j = 0; j < size; ++j) {
        m.bits_[j] = (packed[j / 8] >> (7 - j % 8)) & 1;
    }
    return m;
}

TernaryTable superimpose(std::span<const BinaryTable> reads) {
    if (reads.empty()) {
        throw InvalidInput("superimpose: need at least one read");
    }
    const BinaryTable& first = reads.front();
    for (const auto& r : reads.subspan(1)) {
        require_same_shape(first, r, "superimpose");
    }
    std::vector<Trit> cells(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        const std::uint8_t v = first[i];
        bool unanimous = true;
        for (const auto& r : reads.subspan(1)) {
            if (r[i] != v) {
                unanimous = false;
                break;
            }
        }
        cells[i] = unanimous ? trit_of(v != 0) : Trit::X;
    }
    return TernaryTable(first.rows(), first.cols(), std::move(cells));
}

namespace {

TernaryTable merge_impl(const TernaryTable& a, const TernaryTable& b, const BinaryTable* c) {
    require_same_shape(a, b, "merge_xor");
    if (c != nullptr) {
        require_same_shape(a, *c, "merge_xor");
    }
    // Branch-free: X cells are dense and random, so a branch would mispredict.
    std::vector<Trit> cells(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const unsigned ta = static_cast<unsigned>(a[i]);
        const unsigned tb = static_cast<unsigned>(b[i]);
        const unsigned x = (ta >> 1) | (tb >> 1);
        unsigned v = (ta ^ tb) & 1u;
        if (c != nullptr) {
            v ^= (*c)[i] & 1u;
        }
        cells[i] = static_cast<Trit>((v & (x - 1u)) | (x << 1));
    }
    return TernaryTable(a.rows(), a.cols(), std::move(cells));
}

}  // namespace

TernaryTable merge_xor(const TernaryTable& a, const TernaryTable& b) {
    return merge_impl(a, b, nullptr);
}

TernaryTable merge_xor(const TernaryTable& a, const TernaryTable& b, const BinaryTable& c) {
    return merge_impl(a, b, &c);
}

BinaryTable xor_tables(const BinaryTable& a, const BinaryTable& b) {
    require_same_shape(a, b, "xor_tables");
    std::vector<std::uint8_t> bits(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        bits[i] = a[i] ^ b[i];
    }
    return BinaryTable(a.rows(), a.cols(), std::move(bits));
}

MaskVector mask_of(const TernaryTable& t) {
    MaskVector m(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        m.set(i, t.is_x(i));
    }
    return m;
}

TernaryTable apply_mask(const BinaryTable& p, const MaskVector& mask) {
    if (mask.size() != p.size()) {
        throw InvalidInput("apply_mask: mask length " + std::to_string(mask.size()) +
                           " != table cells " + std::to_string(p.size()));
    }
    std::vector<Trit> cells(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        cells[j] = mask[j] ? Trit::X : trit_of(p[j] != 0);
    }
    return TernaryTable(p.rows(), p.cols(), std::move(cells));
}

double match_fraction(const TernaryTable& ref, const BinaryTable& probe) {
    require_same_shape(ref, probe, "match_fraction");
    std::size_t binary = 0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (ref[i] == Trit::X) {
            continue;
        }
        ++binary;
        agree += static_cast<std::uint8_t>(ref[i]) == probe[i];
    }
    if (binary == 0) {
        throw UndefinedStatistic("match_fraction: reference table is all X");
    }
    return static_cast<double>(agree) / static_cast<double>(binary);
}

std::size_t serialized_size(std::uint32_t rows, std::uint32_t cols) noexcept {
    return kTableMagic.size() + 4 + (static_cast<std::size_t>(rows) * cols * 2 + 7) / 8;
}

Bytes serialize(const TernaryTable& t) {
    Bytes out(serialized_size(t.rows(), t.cols()), 0);
    std::copy(kTableMagic.begin(), kTableMagic.end(), out.begin());
    out[4] = static_cast<std::uint8_t>(t.rows() >> 8);
    out[5] = static_cast<std::uint8_t>(t.rows());
    out[6] = static_cast<std::uint8_t>(t.cols() >> 8);
    out[7] = static_cast<std::uint8_t>(t.cols());
    std::uint8_t* payload = out.data() + 8;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const auto code = static_cast<std::uint8_t>(t[k]);
        payload[k / 4] |= static_cast<std::uint8_t>(code << (6 - 2 * (k % 4)));
    }
    return out;
}

TernaryTable deserialize(ByteView bytes) {
    if (bytes.size() < 8) {
        throw FormatError("TT01: truncated header (" + std::to_string(bytes.size()) + " bytes)");
    }
    if (!std::equal(kTableMagic.begin(), kTableMagic.end(), bytes.begin())) {
        throw FormatError("TT01: bad magic");
    }
    const std::uint32_t rows = (std::uint32_t{bytes[4]} << 8) | bytes[5];
    const std::uint32_t cols = (std::uint32_t{bytes[6]} << 8) | bytes[7];
    if (rows == 0 || cols == 0) {
        throw FormatError("TT01: zero dimension");
    }
    const std::size_t expected = serialized_size(rows, cols);
    if (bytes.size() < expected) {
        throw FormatError("TT01: truncated payload (" + std::to_string(bytes.size()) + " of " +
                          std::to_string(expected) + " bytes)");
    }
    if (bytes.size() > expected) {
        throw FormatError("TT01: trailing bytes after payload");
    }
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    const std::uint8_t* payload = bytes.data() + 8;
    std::vector<Trit> cells(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint8_t code = (payload[k / 4] >> (6 - 2 * (k % 4))) & 0x3;
        if (code == 0x3) {
            throw FormatError("TT01: reserved code 11 at cell " + std::to_string(k));
        }
        cells[k] = static_cast<Trit>(code);
    }
    for (std::size_t k = n; k % 4 != 0; ++k) {
        if (((payload[k / 4] >> (6 - 2 * (k % 4))) & 0x3) != 0) {
            throw FormatError("TT01: non-zero padding");
        }
    }
    return TernaryTable(rows, cols, std::move(cells));
}

void write_table_file(const std::filesystem::path& path, const TernaryTable& t) {
    write_file(path, serialize(t));
}

TernaryTable read_table_file(const std::filesystem::path& path) {
    return deserialize(read_file(path));
}

}  // namespace zkmfa
