#pragma once

#include <string>
#include <string_view>

namespace ancon::utf8 {

// Decodes UTF-8 into code points. Throws FormatError on malformed input
// (overlong forms, surrogates, truncated sequences).
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view chars);
std::string encode(char32_t ch);

}  // namespace ancon::utf8
