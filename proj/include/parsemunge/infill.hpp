#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parsemunge/tidytable.hpp"

namespace parsemunge {

enum class InfillKind { transform_default, zero, one, adjacent, mean, median, mode, neg_zero };

// Config spellings: "stdrdinfill", "zeroinfill", "oneinfill", "adjinfill",
// "meaninfill", "medianinfill", "modeinfill", "negzeroinfill".
std::string_view to_string(InfillKind kind);
std::optional<InfillKind> parse_infill_kind(std::string_view name);

// One byte per row, 1 = infill target.
using Mask = std::vector<std::uint8_t>;

namespace infill {

// Missing cells are always targets; numeric roots also target cells that do
// not parse as a number.
Mask mark_targets(std::span<const CellValue> source, bool numeric_root);

// Train-basis values an infill kind substitutes, one per column of a step's
// output group. Empty for kinds that need no statistics.
struct InfillStats {
  std::vector<CellValue> values;
  friend bool operator==(const InfillStats&, const InfillStats&) = default;
};

// Computes stats from the non-target rows of a train output group. Throws
// ConfigError for mean/median on a group that is not numeric.
InfillStats fit_infill(InfillKind kind, std::span<const Column> group, const Mask& mask,
                       bool numeric_output);

// Rewrites target rows of every column in `group`; non-target rows are never
// touched. Mode and adjacent work on whole row patterns so multi-column
// encodings stay valid.
void apply_infill(InfillKind kind, std::span<Column> group, const Mask& mask, const InfillStats& stats);

}  // namespace infill
}  // namespace parsemunge
