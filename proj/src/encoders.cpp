#include "parsemunge/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "parsemunge/error.hpp"
#include "parsemunge/strmap.hpp"
#include "parsemunge/text.hpp"

namespace parsemunge::encoders {
namespace {

StringIndex<std::size_t> code_index(const CodeMap& map) {
  StringIndex<std::size_t> index;
  index.reserve(map.entries.size());
  for (std::size_t i = 0; i < map.entries.size(); ++i) index.emplace(map.entries[i], i + 1);
  return index;
}

// ord3 code per row: 0 for Missing and unseen.
std::vector<std::size_t> codes_of(const CodeMap& map, std::span<const CellValue> column) {
  const auto index = code_index(map);
  std::vector<std::size_t> codes(column.size(), 0);
  std::string scratch;
  std::string_view key;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!key_view(column[r], scratch, key)) continue;
    auto it = index.find(key);
    if (it != index.end()) codes[r] = it->second;
  }
  return codes;
}

std::vector<double> present_numbers(std::span<const CellValue> column) {
  std::vector<double> values;
  values.reserve(column.size());
  for (const auto& cell : column) {
    if (auto v = numeric_value(cell)) {
      if (std::isfinite(*v)) values.push_back(*v);
    }
  }
  return values;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::size_t activation(const CellValue& cell, std::size_t row) {
  if (cell.is_number()) {
    if (cell.as_number() == 0.0) return 0;
    if (cell.as_number() == 1.0) return 1;
  }
  throw DataError("row " + std::to_string(row) + ": expected a 0/1 activation");
}

const Column& only_column(std::span<const Column> group) {
  if (group.empty()) throw DataError("empty column group");
  return group.front();
}

}  // namespace

std::optional<std::string> categoric_key(const CellValue& cell) {
  if (cell.is_missing()) return std::nullopt;
  return cell.canonical_text();
}

CodeMap rank_entries(std::span<const CellValue> column) {
  StringIndex<std::size_t> counts;
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    if (!key_view(cell, scratch, key)) continue;
    auto it = counts.find(key);
    if (it == counts.end()) {
      counts.emplace(std::string(key), 1);
    } else {
      ++it->second;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  CodeMap map;
  for (auto& [entry, count] : ranked) {
    map.entries.push_back(std::move(entry));
    map.counts.push_back(count);
  }
  return map;
}

Column upcs(std::span<const CellValue> column, bool active) {
  Column out;
  out.reserve(column.size());
  if (!active) {
    out.assign(column.begin(), column.end());
    return out;
  }
  StringIndex<CellValue> memo;
  for (const auto& cell : column) {
    if (!cell.is_text()) {
      out.push_back(cell);
      continue;
    }
    auto it = memo.find(std::string_view(cell.as_text()));
    if (it == memo.end()) {
      it = memo.emplace(cell.as_text(), CellValue::text(utf8_upper(cell.as_text()))).first;
    }
    out.push_back(it->second);
  }
  return out;
}

Column narw(std::span<const CellValue> column, bool numeric_root) {
  const Mask mask = infill::mark_targets(column, numeric_root);
  Column out;
  out.reserve(mask.size());
  for (auto m : mask) out.push_back(CellValue::number(m ? 1.0 : 0.0));
  return out;
}

Column ord3_apply(const CodeMap& map, std::span<const CellValue> column) {
  Column out;
  out.reserve(column.size());
  for (auto code : codes_of(map, column)) out.push_back(CellValue::number(static_cast<double>(code)));
  return out;
}

std::vector<Column> onht_apply(const CodeMap& map, std::span<const CellValue> column) {
  const auto codes = codes_of(map, column);
  std::vector<Column> out(map.size(), Column(column.size(), CellValue::number(0.0)));
  for (std::size_t r = 0; r < codes.size(); ++r) {
    if (codes[r] > 0) out[codes[r] - 1][r] = CellValue::number(1.0);
  }
  return out;
}

std::size_t binary_width(std::size_t n) {
  std::size_t width = 1;
  while (width < 64 && (std::size_t{1} << width) < n + 1) ++width;
  return width;
}

std::vector<Column> b1010_apply(const CodeMap& map, std::span<const CellValue> column) {
  const auto codes = codes_of(map, column);
  const std::size_t width = binary_width(map.size());
  std::vector<Column> out(width, Column(column.size(), CellValue::number(0.0)));
  for (std::size_t r = 0; r < codes.size(); ++r) {
    for (std::size_t b = 0; b < width; ++b) {
      if ((codes[r] >> (width - 1 - b)) & 1U) out[b][r] = CellValue::number(1.0);
    }
  }
  return out;
}

BinaryMap bnry_fit(std::span<const CellValue> column) {
  const CodeMap ranked = rank_entries(column);
  if (ranked.size() != 2) {
    throw DataError("bnry needs exactly 2 distinct entries, found " + std::to_string(ranked.size()));
  }
  return {ranked.entries[0], ranked.entries[1]};
}

Column bnry_apply(const BinaryMap& map, std::span<const CellValue> column) {
  Column out;
  out.reserve(column.size());
  std::string scratch;
  std::string_view key;
  for (const auto& cell : column) {
    const bool zero = key_view(cell, scratch, key) && key == map.zero;
    out.push_back(CellValue::number(zero ? 0.0 : 1.0));
  }
  return out;
}

NormFit nmbr_fit(std::span<const CellValue> column) {
  const auto values = present_numbers(column);
  NormFit fit;
  fit.mean = mean_of(values);
  if (!values.empty()) {
    double ss = 0.0;
    for (double v : values) ss += (v - fit.mean) * (v - fit.mean);
    fit.std = std::sqrt(ss / static_cast<double>(values.size()));
  }
  return fit;
}

Column nmbr_apply(const NormFit& fit, std::span<const CellValue> column) {
  Column out;
  out.reserve(column.size());
  for (const auto& cell : column) {
    auto v = numeric_value(cell);
    if (!v || !std::isfinite(*v) || fit.std == 0.0) {
      out.push_back(CellValue::number(0.0));
    } else {
      out.push_back(CellValue::number((*v - fit.mean) / fit.std));
    }
  }
  return out;
}

MinMaxFit mnmx_fit(std::span<const CellValue> column) {
  const auto values = present_numbers(column);
  MinMaxFit fit;
  if (!values.empty()) {
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    fit.min = *lo;
    fit.max = *hi;
  }
  fit.mean = mean_of(values);
  return fit;
}

Column mnmx_apply(const MinMaxFit& fit, std::span<const CellValue> column) {
  const double range = fit.max - fit.min;
  auto scale = [&](double v) { return range == 0.0 ? 0.0 : (v - fit.min) / range; };
  Column out;
  out.reserve(column.size());
  for (const auto& cell : column) {
    auto v = numeric_value(cell);
    out.push_back(CellValue::number(v && std::isfinite(*v) ? scale(*v) : scale(fit.mean)));
  }
  return out;
}

Column ord3_decode(const CodeMap& map, std::span<const CellValue> codes) {
  Column out;
  out.reserve(codes.size());
  for (std::size_t r = 0; r < codes.size(); ++r) {
    const auto& cell = codes[r];
    if (!cell.is_number() || cell.as_number() != std::floor(cell.as_number()) || cell.as_number() < 0 ||
        cell.as_number() > static_cast<double>(map.size())) {
      throw DataError("row " + std::to_string(r) + ": ord3 code absent from the code map");
    }
    const auto code = static_cast<std::size_t>(cell.as_number());
    out.push_back(code == 0 ? CellValue::missing() : CellValue::text(map.entries[code - 1]));
  }
  return out;
}

Column onht_decode(const CodeMap& map, std::span<const Column> group) {
  if (group.size() != map.size()) throw DataError("onht column count does not match the code map");
  const std::size_t rows = group.empty() ? 0 : group.front().size();
  Column out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::optional<std::size_t> hot;
    for (std::size_t c = 0; c < group.size(); ++c) {
      if (!activation(group[c][r], r)) continue;
      if (hot) throw DataError("row " + std::to_string(r) + ": more than one onht activation");
      hot = c;
    }
    out.push_back(hot ? CellValue::text(map.entries[*hot]) : CellValue::missing());
  }
  return out;
}

Column b1010_decode(const CodeMap& map, std::span<const Column> group) {
  if (group.size() != binary_width(map.size())) throw DataError("1010 column count does not match the code map");
  const std::size_t rows = only_column(group).size();
  Column out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t code = 0;
    std::string pattern;
    for (const auto& col : group) {
      const auto bit = activation(col[r], r);
      code = (code << 1) | bit;
      pattern.push_back(bit ? '1' : '0');
    }
    if (code > map.size()) {
      throw DataError("row " + std::to_string(r) + ": activation pattern " + pattern +
                      " absent from the code map");
    }
    out.push_back(code == 0 ? CellValue::missing() : CellValue::text(map.entries[code - 1]));
  }
  return out;
}

Column bnry_decode(const BinaryMap& map, std::span<const CellValue> codes) {
  Column out;
  out.reserve(codes.size());
  for (std::size_t r = 0; r < codes.size(); ++r) {
    out.push_back(CellValue::text(activation(codes[r], r) ? map.one : map.zero));
  }
  return out;
}

Column nmbr_invert(const NormFit& fit, std::span<const CellValue> values) {
  Column out;
  out.reserve(values.size());
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (!values[r].is_number()) throw DataError("row " + std::to_string(r) + ": expected a number");
    out.push_back(CellValue::number(values[r].as_number() * fit.std + fit.mean));
  }
  return out;
}

Column mnmx_invert(const MinMaxFit& fit, std::span<const CellValue> values) {
  Column out;
  out.reserve(values.size());
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (!values[r].is_number()) throw DataError("row " + std::to_string(r) + ": expected a number");
    out.push_back(CellValue::number(values[r].as_number() * (fit.max - fit.min) + fit.min));
  }
  return out;
}

std::string auto_root_select(ColType type, const UniqueSetStats& stats, int threshold) {
  if (type == ColType::numeric) return "nmbr";
  if (type == ColType::all_missing || stats.n_unique == 0) return "excl";
  if (stats.n_unique == 2) return "bnry";
  if (stats.n_unique == 3) return "onht";
  if (threshold >= 0 && stats.n_unique > static_cast<std::size_t>(threshold)) return "ord3";
  return "1010";
}

}  // namespace parsemunge::encoders
