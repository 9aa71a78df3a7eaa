#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rtfbeam::io {

// Writes bytes to `<path>.tmp` and renames over `path`, so readers never see a
// partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace rtfbeam::io
