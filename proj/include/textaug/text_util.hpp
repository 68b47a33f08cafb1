#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace textaug {

std::string trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

bool iequals_ascii(std::string_view a, std::string_view b);

// Decode UTF-8 into code points. Invalid bytes decode as U+FFFD so that
// character-level augmenters never corrupt byte sequences further.
std::vector<char32_t> utf8_decode(std::string_view s);

std::string utf8_encode(const std::vector<char32_t>& cps);

bool is_unicode_space(char32_t cp);

// Whitespace tokenization: splits on Unicode space code points,
// punctuation stays attached to its token.
std::vector<std::string> tokenize(std::string_view text);

// Re-joins tokens with single spaces (the inverse used by word-level
// augmenters; original spacing is not preserved).
std::string join_tokens(const std::vector<std::string>& tokens);

// Shortest round-trip decimal form of a double, deterministic across
// runs. Used everywhere a float lands in a report file.
std::string format_double(double v);

// "w1<TAB>v1,v2,..." resource-file line splitting helpers.
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace textaug
