#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cpgeo {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames, so a file at `path` is always complete.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cpgeo
