#pragma once

#include <string>
#include <string_view>

namespace softlex {

// Sentences are sequences of Unicode scalar code points. No normalization is
// applied anywhere; callers pre-normalize if they need NFC/NFKC.

// Decodes UTF-8 into code points. Throws DataError on malformed input;
// `context` is prefixed to the error message (e.g. "lexicon.txt:12").
std::u32string utf8_decode(std::string_view s, std::string_view context = {});

std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

}  // namespace softlex
