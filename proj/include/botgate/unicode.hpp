#pragma once

#include <string>
#include <string_view>

namespace botgate::unicode {

// Decodes UTF-8 into scalar values. Malformed sequences decode to U+FFFD,
// one replacement per offending byte, so decoding never fails.
std::u32string decode_utf8(std::string_view text);

void append_utf8(std::string &out, char32_t cp);
std::string encode_utf8(std::u32string_view text);

// Unicode White_Space property.
bool is_whitespace(char32_t cp);

// ASCII punctuation and symbols (C ispunct), Latin-1 punctuation, the
// General Punctuation block, CJK punctuation and the fullwidth ASCII forms.
bool is_punctuation(char32_t cp);

} // namespace botgate::unicode
