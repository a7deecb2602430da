#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctikit::text {

/// Unicode NFC normalization; invalid UTF-8 sequences are replaced with U+FFFD.
std::string nfc(std::string_view utf8);

/// Number of Unicode code points (invalid bytes count as one each).
std::size_t code_points(std::string_view utf8);

std::string ascii_lower(std::string_view s);

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
inline bool is_hex(char c) {
    return is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

}  // namespace ctikit::text
