#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace nbf {

/// Shortest decimal string that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Writes to a temporary sibling then renames over the target, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace nbf
