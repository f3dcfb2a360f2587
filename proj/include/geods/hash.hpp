#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace geods {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const std::byte> bytes);

/// SHA-256 of a file's contents; throws IntegrityError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

} // namespace geods
