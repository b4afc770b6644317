#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "zkmfa/hash.hpp"

namespace zkmfa {

/// Throws NotFound if the file does not exist, IoError on read failure.
Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Creates parent directories as needed. Throws IoError on failure.
void write_file(const std::filesystem::path& path, ByteView data);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// SHA3-256 of the file contents, hex encoded.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace zkmfa
