#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lbt {

/// Shortest decimal form with 17 significant digits (round-trip exact).
std::string fmt17(double x);

/// Writes `content` to `path` via a temp file in the same directory plus
/// rename, so partial artifacts never bear the final name.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Splits one CSV line on commas (no quoting; numeric payloads only).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lbt
