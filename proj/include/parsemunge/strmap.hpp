#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "parsemunge/tidytable.hpp"

namespace parsemunge {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

// String-keyed hash map that accepts string_view lookups.
template <class T>
using StringIndex = std::unordered_map<std::string, T, StringHash, std::equal_to<>>;

// Categoric view of a cell without copying Text. Numbers are rendered into
// `scratch`. Returns false for Missing.
inline bool key_view(const CellValue& cell, std::string& scratch, std::string_view& out) {
  if (cell.is_text()) {
    out = cell.as_text();
    return true;
  }
  if (cell.is_number()) {
    scratch = format_number(cell.as_number());
    out = scratch;
    return true;
  }
  return false;
}

}  // namespace parsemunge
