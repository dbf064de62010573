#include "parsemunge/extract_search.hpp"

#include <cmath>
#include <set>

#include "parsemunge/error.hpp"
#include "parsemunge/strmap.hpp"
#include "parsemunge/text.hpp"

namespace parsemunge::extract {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::size_t digit_run(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size() && is_digit(s[end])) ++end;
  return end - pos;
}

// Length of the longest format-valid number starting at `start`, 0 if none.
std::size_t match_at(std::string_view s, std::size_t start, const NumberFormat& f) {
  std::size_t pos = start;
  if (f.allow_negative && pos < s.size() && s[pos] == '-') ++pos;
  std::size_t run = digit_run(s, pos);
  if (run == 0) return 0;
  pos += run;
  if (f.allow_commas) {
    while (pos < s.size() && s[pos] == ',' && (run = digit_run(s, pos + 1)) > 0) pos += 1 + run;
  }
  if (f.allow_decimal && pos < s.size() && s[pos] == '.' && (run = digit_run(s, pos + 1)) > 0) pos += 1 + run;
  return pos - start;
}

std::optional<double> parse_match(std::string_view text) {
  std::string digits;
  digits.reserve(text.size());
  for (char c : text) {
    if (c != ',') digits.push_back(c);
  }
  auto v = parse_decimal(digits);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

CellValue as_cell(const std::optional<double>& v) { return v ? CellValue::number(*v) : CellValue::missing(); }

}  // namespace

std::optional<double> nmcm_extract(std::string_view entry, const NumberFormat& format) {
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  for (std::size_t start = 0; start < entry.size(); ++start) {
    const std::size_t len = match_at(entry, start, format);
    if (len > best_len) {
      best_len = len;
      best_start = start;
    }
  }
  if (best_len == 0) return std::nullopt;
  return parse_match(entry.substr(best_start, best_len));
}

NumericExtractFit nmcm_fit(std::span<const CellValue> column, const NumberFormat& format) {
  NumericExtractFit fit;
  fit.format = format;
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    if (!key_view(cell, scratch, key)) continue;
    std::string k(key);
    if (!fit.lookup.count(k)) fit.lookup.emplace(k, nmcm_extract(k, format));
  }
  return fit;
}

Column nmcm_apply(const NumericExtractFit& fit, std::span<const CellValue> column) {
  StringIndex<CellValue> memo;
  Column out;
  out.reserve(column.size());
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    if (!key_view(cell, scratch, key)) {
      out.push_back(CellValue::missing());
      continue;
    }
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(std::string(key), as_cell(nmcm_extract(key, fit.format))).first;
    out.push_back(it->second);
  }
  return out;
}

Column nmc7_apply(const NumericExtractFit& fit, std::span<const CellValue> column, std::size_t* extraction_calls) {
  StringIndex<CellValue> memo;
  for (const auto& [entry, value] : fit.lookup) memo.emplace(entry, as_cell(value));
  std::size_t calls = 0;
  Column out;
  out.reserve(column.size());
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    if (!key_view(cell, scratch, key)) {
      out.push_back(CellValue::missing());
      continue;
    }
    auto it = memo.find(key);
    if (it == memo.end()) {
      ++calls;
      it = memo.emplace(std::string(key), as_cell(nmcm_extract(key, fit.format))).first;
    }
    out.push_back(it->second);
  }
  if (extraction_calls) *extraction_calls = calls;
  return out;
}

SearchSpec make_search_spec(const std::vector<std::string>& terms,
                            const std::vector<std::vector<std::string>>& aggregates, bool ordinal,
                            bool case_sensitive) {
  SearchSpec spec;
  spec.ordinal = ordinal;
  spec.case_sensitive = case_sensitive;
  for (const auto& term : terms) spec.groups.push_back({term, {term}});
  for (const auto& group : aggregates) {
    if (group.empty()) throw ConfigError("srch: empty aggregate group");
    std::string label;
    for (const auto& term : group) label += (label.empty() ? "" : "-") + term;
    spec.groups.push_back({label, group});
  }
  if (spec.groups.empty()) throw ConfigError("srch: no search terms");
  std::set<std::string> labels;
  for (const auto& g : spec.groups) {
    for (const auto& term : g.terms) {
      if (term.empty()) throw ConfigError("srch: empty search term");
    }
    if (!labels.insert(g.label).second) throw ConfigError("srch: duplicate search group \"" + g.label + "\"");
  }
  return spec;
}

std::vector<Column> srch_apply(const SearchSpec& spec, std::span<const CellValue> column) {
  std::vector<std::vector<std::string>> needles;
  for (const auto& g : spec.groups) {
    auto& list = needles.emplace_back();
    for (const auto& term : g.terms) list.push_back(spec.case_sensitive ? term : utf8_upper(term));
  }
  auto hits_for = [&](std::string_view key) {
    const std::string hay = spec.case_sensitive ? std::string(key) : utf8_upper(key);
    std::vector<bool> hits(needles.size(), false);
    for (std::size_t g = 0; g < needles.size(); ++g) {
      for (const auto& n : needles[g]) {
        if (hay.find(n) != std::string::npos) {
          hits[g] = true;
          break;
        }
      }
    }
    return hits;
  };

  const std::size_t width = spec.ordinal ? 1 : spec.groups.size();
  std::vector<Column> out(width, Column(column.size(), CellValue::number(0.0)));
  StringIndex<std::vector<bool>> memo;
  std::string scratch;
  std::string_view key;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!key_view(column[r], scratch, key)) continue;
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(std::string(key), hits_for(key)).first;
    const auto& hits = it->second;
    if (spec.ordinal) {
      for (std::size_t g = 0; g < hits.size(); ++g) {
        if (hits[g]) {
          out[0][r] = CellValue::number(static_cast<double>(g + 1));
          break;
        }
      }
    } else {
      for (std::size_t g = 0; g < hits.size(); ++g) {
        if (hits[g]) out[g][r] = CellValue::number(1.0);
      }
    }
  }
  return out;
}

}  // namespace parsemunge::extract
