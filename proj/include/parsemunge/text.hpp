#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace parsemunge {

// Unicode simple uppercase over UTF-8. Covers Basic Latin, Latin-1
// Supplement, Latin Extended-A, Greek and Cyrillic; other code points and
// malformed bytes pass through unchanged.
std::string utf8_upper(std::string_view text);

// Number of code points (malformed bytes count one each).
std::size_t utf8_length(std::string_view text);

// Code points of a UTF-8 string. A malformed byte b decodes to 0x110000 + b
// so that utf8_encode restores the original bytes.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

// Turns an arbitrary string into a header token that is CSV-safe and free of
// separators: alphanumerics are kept, leading and trailing runs of other
// characters are dropped, interior ones become "-HH" byte escapes.
std::string sanitize_token(std::string_view text);

}  // namespace parsemunge
