#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace hadola {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace hadola
