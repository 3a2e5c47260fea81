#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace econlab::util {

/// Current UTC time as 2026-01-31T12:34:56.789Z.
std::string now_iso8601();

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it into place, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Appends one line (a newline is added) and flushes before returning.
void append_line(const std::filesystem::path& path, std::string_view line);

/// Non-empty lines of a JSON-lines file; a missing file yields no lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// True for ids made of [A-Za-z0-9_-], 1..64 chars. Used before ids become path segments.
bool is_safe_id(std::string_view id) noexcept;

}  // namespace econlab::util
