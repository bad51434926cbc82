#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

namespace flats {

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
/// Throws IoFailure.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace flats
