#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rca::text {

// Splits into lines, each keeping its trailing '\n' when present. An empty
// string has zero lines.
std::vector<std::string_view> split_lines_keep(std::string_view text);

// Splits on '\n' without terminators; a trailing newline does not produce an
// extra empty element.
std::vector<std::string> split_lines(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Collapses every run of whitespace to a single space and trims the ends.
std::string normalize_whitespace(std::string_view s);

// Keeps the first `head` and last `tail` characters with an elision marker
// between them. Returns the input unchanged when it already fits.
std::string elide_middle(std::string_view s, std::size_t head, std::size_t tail);

// Head+tail truncation whose result, marker included, never exceeds `limit`.
std::string truncate_to(std::string_view s, std::size_t limit);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Whitespace tokenizer honouring single and double quotes.
std::vector<std::string> split_arguments(std::string_view s);

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace rca::text
