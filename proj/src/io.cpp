#include "zkmfa/io.hpp"

#include <fstream>
#include <iterator>

#include "zkmfa/errors.hpp"

namespace zkmfa {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw NotFound("no such file: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path.string());
    }
    return data;
}

std::string read_text_file(const fs::path& path) {
    const Bytes b = read_file(path);
    return {b.begin(), b.end()};
}

void write_file(const fs::path& path, ByteView data) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_text_file(const fs::path& path, std::string_view text) {
    write_file(path, as_bytes(text));
}

std::string file_fingerprint(const fs::path& path) {
    const Bytes b = read_file(path);
    const auto d = sha3_256(b);
    return to_hex(d);
}

}  // namespace zkmfa
