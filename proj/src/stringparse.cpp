#include "parsemunge/stringparse.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "parsemunge/strmap.hpp"
#include "parsemunge/text.hpp"

namespace parsemunge::stringparse {
namespace {

using Entries = std::vector<std::u32string>;

struct Exclusion {
  std::unordered_set<char32_t> chars;

  explicit Exclusion(std::string_view utf8) {
    for (char32_t c : utf8_decode(utf8)) chars.insert(c);
  }
  bool hits(std::u32string_view s) const {
    if (chars.empty()) return false;
    return std::any_of(s.begin(), s.end(), [&](char32_t c) { return chars.count(c) > 0; });
  }
};

Entries decode_all(std::span<const std::string> uniques) {
  Entries out;
  out.reserve(uniques.size());
  for (const auto& u : uniques) out.push_back(utf8_decode(u));
  return out;
}

bool occurs_elsewhere(const Entries& e, std::size_t self, std::u32string_view window) {
  const std::size_t w = window.size();
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (j == self || e[j].size() < w) continue;
    const std::u32string_view other = e[j];
    for (std::size_t q = 0; q + w <= other.size(); ++q) {
      if (other.substr(q, w) == window) return true;
    }
  }
  return false;
}

// Windows of length w shared by two or more entries: -2 marks multi-owner.
std::unordered_map<std::u32string_view, long> window_owners(const Entries& e, std::size_t w) {
  std::unordered_map<std::u32string_view, long> owners;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const std::u32string_view s = e[j];
    for (std::size_t p = 0; p + w <= s.size(); ++p) {
      auto [it, fresh] = owners.emplace(s.substr(p, w), static_cast<long>(j));
      if (!fresh && it->second != static_cast<long>(j)) it->second = -2;
    }
  }
  return owners;
}

std::set<std::string> supporters(std::span<const std::string> uniques, const std::string& overlap) {
  std::set<std::string> out;
  for (const auto& u : uniques) {
    if (u.find(overlap) != std::string::npos) out.insert(u);
  }
  return out;
}

OverlapMap single_scan(std::span<const std::string> uniques, const OverlapScanConfig& cfg) {
  const Entries e = decode_all(uniques);
  const Exclusion excl(cfg.exclude_chars);
  const std::size_t min_len = std::max<std::size_t>(cfg.min_len, 1);
  std::size_t maxlen = 0;
  for (const auto& s : e) maxlen = std::max(maxlen, s.size());

  std::vector<std::u32string> chosen(e.size());
  std::vector<bool> assigned(e.size(), false);
  for (std::size_t w = maxlen > 0 ? maxlen - 1 : 0; w >= min_len; --w) {
    std::vector<std::optional<std::u32string_view>> found(e.size());
    std::unordered_map<std::u32string_view, long> owners;
    if (cfg.strategy == ScanStrategy::indexed) owners = window_owners(e, w);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (assigned[i] || e[i].size() < w) continue;
      const std::u32string_view s = e[i];
      std::optional<std::u32string_view> best;
      for (std::size_t p = 0; p + w <= s.size(); ++p) {
        const auto window = s.substr(p, w);
        if (best && !(window < *best)) continue;
        if (excl.hits(window)) continue;
        const bool shared = cfg.strategy == ScanStrategy::indexed ? owners.at(window) == -2
                                                                  : occurs_elsewhere(e, i, window);
        if (shared) best = window;
      }
      found[i] = best;
    }
    // assignments land after the whole level so order of entries is moot
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!found[i]) continue;
      chosen[i] = std::u32string(*found[i]);
      assigned[i] = true;
    }
    if (w == min_len) break;
  }

  OverlapMap map;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!assigned[i]) continue;
    const std::string overlap = utf8_encode(chosen[i]);
    map.assignment[uniques[i]] = {overlap};
    if (!map.overlaps.count(overlap)) map.overlaps[overlap] = supporters(uniques, overlap);
  }
  return map;
}

bool longer_first(const std::string& a, const std::string& b) {
  const auto la = utf8_length(a);
  const auto lb = utf8_length(b);
  if (la != lb) return la > lb;
  return a < b;
}

OverlapMap closed_scan(std::span<const std::string> uniques, const OverlapScanConfig& cfg) {
  const Entries e = decode_all(uniques);
  const Exclusion excl(cfg.exclude_chars);
  const std::size_t min_len = std::max<std::size_t>(cfg.min_len, 1);

  std::unordered_map<std::u32string_view, std::vector<std::size_t>> support;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const std::u32string_view s = e[j];
    for (std::size_t p = 0; p < s.size(); ++p) {
      for (std::size_t len = 1; p + len <= s.size(); ++len) {
        if (excl.hits(s.substr(p + len - 1, 1))) break;
        if (len < min_len) continue;
        auto& owners = support[s.substr(p, len)];
        if (owners.empty() || owners.back() != j) owners.push_back(j);
      }
    }
  }

  std::unordered_map<std::u32string_view, bool> closed;
  for (const auto& [sub, owners] : support) {
    if (owners.size() >= 2) closed.emplace(sub, true);
  }
  for (const auto& [sub, flag] : closed) {
    if (sub.size() <= min_len) continue;
    const std::size_t n = support.at(sub).size();
    for (auto shorter : {sub.substr(0, sub.size() - 1), sub.substr(1)}) {
      if (support.at(shorter).size() == n) closed.at(shorter) = false;
    }
  }

  OverlapMap map;
  for (const auto& [sub, flag] : closed) {
    if (!flag) continue;
    const std::string overlap = utf8_encode(sub);
    auto& owners = map.overlaps[overlap];
    for (auto j : support.at(sub)) {
      owners.insert(uniques[j]);
      map.assignment[uniques[j]].push_back(overlap);
    }
  }
  for (auto& [entry, list] : map.assignment) std::sort(list.begin(), list.end(), longer_first);
  return map;
}

StringIndex<std::size_t> index_of(const std::vector<std::string>& columns) {
  StringIndex<std::size_t> index;
  for (std::size_t i = 0; i < columns.size(); ++i) index.emplace(columns[i], i);
  return index;
}

ActivationFit activations_from(const OverlapMap& map) {
  ActivationFit fit;
  for (const auto& [overlap, owners] : map.overlaps) fit.columns.push_back(overlap);
  const auto index = index_of(fit.columns);
  for (const auto& [entry, list] : map.assignment) {
    auto& cols = fit.active[entry];
    for (const auto& overlap : list) cols.push_back(index.at(overlap));
    std::sort(cols.begin(), cols.end());
  }
  return fit;
}

std::string pattern_key(const std::vector<std::size_t>& cols, std::size_t width) {
  std::string key(width, '0');
  for (auto c : cols) key[c] = '1';
  return key;
}

}  // namespace

std::string_view space_and_punctuation() { return " !\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"; }

OverlapMap scan_overlaps(std::span<const std::string> uniques, const OverlapScanConfig& cfg) {
  return cfg.single_id ? single_scan(uniques, cfg) : closed_scan(uniques, cfg);
}

OverlapMap scan_containment(std::span<const std::string> uniques, const OverlapScanConfig& cfg) {
  const Exclusion excl(cfg.exclude_chars);
  const std::size_t min_len = std::max<std::size_t>(cfg.min_len, 1);
  OverlapMap map;
  for (const auto& candidate : uniques) {
    if (utf8_length(candidate) < min_len || excl.hits(utf8_decode(candidate))) continue;
    for (const auto& entry : uniques) {
      if (entry == candidate || entry.find(candidate) == std::string::npos) continue;
      map.overlaps[candidate].insert(entry);
      map.assignment[entry].push_back(candidate);
    }
    if (map.overlaps.count(candidate)) map.overlaps[candidate].insert(candidate);
  }
  for (auto& [entry, list] : map.assignment) {
    std::sort(list.begin(), list.end(), longer_first);
    if (cfg.single_id) list.resize(1);
  }
  return map;
}

std::vector<std::string> distinct_keys(std::span<const CellValue> column) {
  StringIndex<bool> seen;
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    if (key_view(cell, scratch, key) && !seen.count(key)) seen.emplace(std::string(key), true);
  }
  std::vector<std::string> out;
  out.reserve(seen.size());
  for (auto& [k, v] : seen) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

ActivationFit splt_fit(std::span<const CellValue> column, OverlapScanConfig cfg) {
  cfg.single_id = true;
  return activations_from(scan_overlaps(distinct_keys(column), cfg));
}

ActivationFit sp15_fit(std::span<const CellValue> column, OverlapScanConfig cfg) {
  cfg.single_id = false;
  return activations_from(scan_overlaps(distinct_keys(column), cfg));
}

ActivationFit sbst_fit(std::span<const CellValue> column, OverlapScanConfig cfg) {
  cfg.single_id = true;
  return activations_from(scan_containment(distinct_keys(column), cfg));
}

std::vector<Column> activation_apply(const ActivationFit& fit, std::span<const CellValue> column) {
  StringIndex<const std::vector<std::size_t>*> index;
  for (const auto& [entry, cols] : fit.active) index.emplace(entry, &cols);
  std::vector<Column> out(fit.columns.size(), Column(column.size(), CellValue::number(0.0)));
  std::string scratch;
  std::string_view key;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!key_view(column[r], scratch, key)) continue;
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (auto c : *it->second) out[c][r] = CellValue::number(1.0);
  }
  return out;
}

std::size_t PatternFit::width() const {
  return patterns.size() == 0 ? 1 : encoders::binary_width(patterns.size());
}

PatternFit sp19_fit(std::span<const CellValue> column, OverlapScanConfig cfg) {
  PatternFit fit;
  fit.activations = sp15_fit(column, cfg);
  const std::size_t n = fit.activations.columns.size();
  StringIndex<CellValue> keyed;
  for (const auto& [entry, cols] : fit.activations.active) {
    keyed.emplace(entry, cols.empty() ? CellValue::missing() : CellValue::text(pattern_key(cols, n)));
  }
  Column patterns;
  patterns.reserve(column.size());
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    auto it = key_view(cell, scratch, key) ? keyed.find(key) : keyed.end();
    patterns.push_back(it == keyed.end() ? CellValue::missing() : it->second);
  }
  fit.patterns = encoders::rank_entries(patterns);
  return fit;
}

std::vector<Column> sp19_apply(const PatternFit& fit, std::span<const CellValue> column) {
  const std::size_t n = fit.activations.columns.size();
  StringIndex<std::size_t> pattern_code;
  for (std::size_t i = 0; i < fit.patterns.entries.size(); ++i) pattern_code.emplace(fit.patterns.entries[i], i + 1);
  StringIndex<std::size_t> entry_code;
  for (const auto& [entry, cols] : fit.activations.active) {
    if (cols.empty()) continue;
    auto it = pattern_code.find(pattern_key(cols, n));
    if (it != pattern_code.end()) entry_code.emplace(entry, it->second);
  }

  const std::size_t width = fit.width();
  std::vector<Column> out(width, Column(column.size(), CellValue::number(0.0)));
  std::string scratch;
  std::string_view key;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!key_view(column[r], scratch, key)) continue;
    auto it = entry_code.find(key);
    if (it == entry_code.end()) continue;
    for (std::size_t b = 0; b < width; ++b) {
      if ((it->second >> (width - 1 - b)) & 1U) out[b][r] = CellValue::number(1.0);
    }
  }
  return out;
}

ReplaceFit replace_fit(std::span<const CellValue> column, OverlapScanConfig cfg, std::optional<std::string> plug) {
  cfg.single_id = true;
  const OverlapMap map = scan_overlaps(distinct_keys(column), cfg);
  ReplaceFit fit;
  fit.search_unseen = !cfg.test_subset_assumption;
  for (const auto& [entry, list] : map.assignment) fit.assignment[entry] = list.front();
  for (const auto& [overlap, owners] : map.overlaps) fit.overlaps.push_back(overlap);
  std::sort(fit.overlaps.begin(), fit.overlaps.end(), longer_first);
  if (plug) {
    std::string candidate = *plug;
    for (int k = 1; map.overlaps.count(candidate); ++k) candidate = *plug + "_" + std::to_string(k);
    fit.plug = candidate;
  }
  return fit;
}

Column replace_apply(const ReplaceFit& fit, std::span<const CellValue> column) {
  StringIndex<CellValue> memo;
  for (const auto& [entry, overlap] : fit.assignment) memo.emplace(entry, CellValue::text(overlap));

  auto resolve = [&](std::string_view key) -> CellValue {
    if (fit.search_unseen) {
      // overlaps are sorted longest first, so the first hit wins
      for (const auto& overlap : fit.overlaps) {
        if (key.find(overlap) != std::string_view::npos) return CellValue::text(overlap);
      }
    }
    return fit.plug ? CellValue::text(*fit.plug) : CellValue::text(std::string(key));
  };

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
    if (it == memo.end()) it = memo.emplace(std::string(key), resolve(key)).first;
    out.push_back(it->second);
  }
  return out;
}

}  // namespace parsemunge::stringparse
