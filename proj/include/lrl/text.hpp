#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrl {

// Whitespace tokenization shared by the aligner, retriever and prompt
// renderers. Splits on ASCII whitespace only.
std::vector<std::string> split_whitespace(std::string_view text);

std::string_view trim(std::string_view text);

// Case folding for label comparison: Unicode lowercase + trim.
std::string normalize_label(std::string_view label);

std::string to_lower(std::string_view text);

bool is_valid_utf8(std::string_view text);
bool starts_with_bom(std::string_view text);

std::size_t count_codepoints(std::string_view utf8);

// Hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// Shortest round-trip decimal representation.
std::string format_double(double value);

// Cascade summation in a fixed order; result is independent of threading.
double pairwise_sum(std::span<const double> values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace lrl
