#include "parsemunge/infill.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "parsemunge/error.hpp"

namespace parsemunge {
namespace {

constexpr std::array<std::pair<InfillKind, std::string_view>, 8> kNames = {{
    {InfillKind::transform_default, "stdrdinfill"},
    {InfillKind::zero, "zeroinfill"},
    {InfillKind::one, "oneinfill"},
    {InfillKind::adjacent, "adjinfill"},
    {InfillKind::mean, "meaninfill"},
    {InfillKind::median, "medianinfill"},
    {InfillKind::mode, "modeinfill"},
    {InfillKind::neg_zero, "negzeroinfill"},
}};

// Missing < Number (by value) < Text (bytewise).
bool cell_less(const CellValue& a, const CellValue& b) {
  auto rank = [](const CellValue& c) { return c.is_missing() ? 0 : c.is_number() ? 1 : 2; };
  if (rank(a) != rank(b)) return rank(a) < rank(b);
  if (a.is_number()) return a.as_number() < b.as_number();
  if (a.is_text()) return a.as_text() < b.as_text();
  return false;
}

struct RowLess {
  bool operator()(const std::vector<CellValue>& a, const std::vector<CellValue>& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
  }
};

std::vector<CellValue> row_of(std::span<const Column> group, std::size_t r) {
  std::vector<CellValue> row;
  row.reserve(group.size());
  for (const auto& col : group) row.push_back(col[r]);
  return row;
}

}  // namespace

std::string_view to_string(InfillKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "stdrdinfill";
}

std::optional<InfillKind> parse_infill_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

namespace infill {

Mask mark_targets(std::span<const CellValue> source, bool numeric_root) {
  Mask mask(source.size(), 0);
  for (std::size_t r = 0; r < source.size(); ++r) {
    const auto& cell = source[r];
    if (cell.is_missing()) {
      mask[r] = 1;
    } else if (numeric_root && !numeric_value(cell)) {
      mask[r] = 1;
    }
  }
  return mask;
}

InfillStats fit_infill(InfillKind kind, std::span<const Column> group, const Mask& mask,
                       bool numeric_output) {
  InfillStats stats;
  if (kind != InfillKind::mean && kind != InfillKind::median && kind != InfillKind::mode) return stats;
  if ((kind == InfillKind::mean || kind == InfillKind::median) && !numeric_output) {
    throw ConfigError(std::string(to_string(kind)) + " requires a numeric-output column");
  }
  const std::size_t rows = group.empty() ? 0 : group.front().size();

  if (kind == InfillKind::mode) {
    std::map<std::vector<CellValue>, std::size_t, RowLess> counts;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!mask[r]) ++counts[row_of(group, r)];
    }
    if (counts.empty()) {
      stats.values.assign(group.size(), CellValue::number(0.0));
      return stats;
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    stats.values = best->first;
    return stats;
  }

  for (const auto& col : group) {
    std::vector<double> values;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!mask[r] && col[r].is_number()) values.push_back(col[r].as_number());
    }
    double fill = 0.0;
    if (!values.empty()) {
      if (kind == InfillKind::mean) {
        double sum = 0.0;
        for (double v : values) sum += v;
        fill = sum / static_cast<double>(values.size());
      } else {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        fill = n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
      }
    }
    stats.values.push_back(CellValue::number(fill));
  }
  return stats;
}

void apply_infill(InfillKind kind, std::span<Column> group, const Mask& mask, const InfillStats& stats) {
  if (kind == InfillKind::transform_default || group.empty()) return;
  const std::size_t rows = group.front().size();

  auto fill_constant = [&](double value) {
    for (auto& col : group) {
      for (std::size_t r = 0; r < rows; ++r) {
        if (mask[r]) col[r] = CellValue::number(value);
      }
    }
  };

  switch (kind) {
    case InfillKind::zero:
      fill_constant(0.0);
      return;
    case InfillKind::one:
      fill_constant(1.0);
      return;
    case InfillKind::neg_zero:
      fill_constant(-0.0);
      return;
    case InfillKind::mean:
    case InfillKind::median:
    case InfillKind::mode:
      for (std::size_t c = 0; c < group.size(); ++c) {
        const CellValue fill = c < stats.values.size() ? stats.values[c] : CellValue::number(0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          if (mask[r]) group[c][r] = fill;
        }
      }
      return;
    case InfillKind::adjacent: {
      // forward fill; leading targets take the first non-target row
      std::optional<std::size_t> first_valid;
      for (std::size_t r = 0; r < rows; ++r) {
        if (!mask[r]) {
          first_valid = r;
          break;
        }
      }
      if (!first_valid) {
        fill_constant(0.0);
        return;
      }
      std::size_t source = *first_valid;
      for (std::size_t r = 0; r < rows; ++r) {
        if (!mask[r]) {
          source = r;
          continue;
        }
        for (auto& col : group) col[r] = col[source];
      }
      return;
    }
    case InfillKind::transform_default:
      return;
  }
}

}  // namespace infill
}  // namespace parsemunge
