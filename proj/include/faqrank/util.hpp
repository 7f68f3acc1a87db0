#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faqrank {

/// 64-bit FNV-1a. Used for artifact checksums and the hashed embedder.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Fixed-point formatting with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Strict parse of the whole string; accepts nan/inf spellings.
std::optional<double> parse_double(std::string_view text);
std::optional<std::uint64_t> parse_uint(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view text);

}  // namespace faqrank
