#pragma once

// Brute-force reference implementations the library is checked against.
// They work on ASCII bytes and share no code with src/.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline bool has_excluded(const std::string& s, const std::string& excluded) {
  return s.find_first_of(excluded) != std::string::npos;
}

// All longest common substrings of a and b that avoid `excluded`, found with
// the classic suffix-length table. `len` receives their length (0 if none).
inline std::set<std::string> longest_common(const std::string& a, const std::string& b, const std::string& excluded,
                                            std::size_t& len) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  len = 0;
  std::set<std::string> best;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] != b[j - 1] || excluded.find(a[i - 1]) != std::string::npos) continue;
      t[i][j] = t[i - 1][j - 1] + 1;
      if (t[i][j] > len) {
        len = t[i][j];
        best.clear();
      }
      if (t[i][j] == len) best.insert(a.substr(i - len, len));
    }
  }
  return best;
}

// Overlap a single-id scan should assign to entries[self]: the longest
// substring shared with any other entry, smallest string on ties.
inline std::optional<std::string> single_id_overlap(const std::vector<std::string>& entries, std::size_t self,
                                                    std::size_t min_len, const std::string& excluded) {
  std::size_t best_len = 0;
  std::set<std::string> best;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    if (j == self) continue;
    std::size_t len = 0;
    auto found = longest_common(entries[self], entries[j], excluded, len);
    if (len == 0 || len < best_len) continue;
    if (len > best_len) best.clear(), best_len = len;
    best.insert(found.begin(), found.end());
  }
  if (best_len < min_len || best.empty()) return std::nullopt;
  return *best.begin();
}

// Longest substring matching the number grammar, earliest on ties, parsed
// with strtod after dropping commas.
inline std::optional<double> extract_number(const std::string& s, bool commas, bool decimal, bool negative) {
  std::string pattern = negative ? "-?" : "";
  pattern += commas ? "[0-9]+(,[0-9]+)*" : "[0-9]+";
  if (decimal) pattern += "(\\.[0-9]+)?";
  const std::regex re(pattern);
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t len = s.size() - i; len > best_len; --len) {
      if (std::regex_match(s.begin() + i, s.begin() + i + len, re)) {
        best_start = i;
        best_len = len;
        break;
      }
    }
  }
  if (best_len == 0) return std::nullopt;
  std::string digits;
  for (char c : s.substr(best_start, best_len)) {
    if (c != ',') digits += c;
  }
  const double v = std::strtod(digits.c_str(), nullptr);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string ascii_upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

inline bool contains(const std::string& cell, const std::string& term, bool case_sensitive) {
  if (case_sensitive) return cell.find(term) != std::string::npos;
  return ascii_upper(cell).find(ascii_upper(term)) != std::string::npos;
}

}  // namespace oracle
