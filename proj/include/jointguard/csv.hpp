#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace jointguard::csv {

// Shortest round-trip decimal form of a double ("0.5", "1e-07", "107.25").
std::string format_real(double value);

// FNV-1a 64-bit digest, rendered as 16 hex digits.
std::string digest(std::string_view bytes);

// `# jointguard <version> scenario=<hash>` header comment.
std::string header_comment(std::string_view scenario_hash);

// Writes `contents` to a sibling temporary and renames it over `path`.
// Throws std::filesystem::filesystem_error / std::runtime_error on failure.
void write_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace jointguard::csv
