#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ksb {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Lowercase hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes `text` with LF line endings, replacing any existing file.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Comma-separated table with a header row.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

}  // namespace ksb
