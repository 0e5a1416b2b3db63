#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lyrav::text {

// Decodes UTF-8 into codepoints; invalid byte sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t c);

bool is_space(char32_t c);

// ASCII punctuation plus the common CJK/fullwidth punctuation blocks.
// Whitespace (including the ideographic space) is never punctuation.
bool is_punct(char32_t c);

// Strips leading/trailing whitespace, fullwidth spaces included.
std::string trim(std::string_view s);

// Splits on '\n', tolerating '\r\n'. Keeps empty lines.
std::vector<std::string> split_lines(std::string_view s);

std::string join_lines(const std::vector<std::string>& lines);

// Removes every <think>...</think> span; an unterminated <think> is
// stripped through the end of the text.
std::string strip_think_blocks(std::string_view s);

// Truncates to the first `max_chars` codepoints.
std::string truncate_chars(std::string_view s, std::size_t max_chars);

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset);

// Folds an integer seed into the hash state before the payload.
std::uint64_t fnv1a64_seeded(std::string_view bytes, std::uint64_t seed);

// 16-char lowercase hex of a 64-bit hash; used as a content digest.
std::string hex64(std::uint64_t h);

}  // namespace lyrav::text
