#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parsemunge/infill.hpp"
#include "parsemunge/tidytable.hpp"

namespace parsemunge::encoders {

// Categoric key of a cell: Text verbatim, Number in canonical form, Missing
// has none.
std::optional<std::string> categoric_key(const CellValue& cell);

// Train entries in rank order (count descending, then value ascending). The
// code of entries[i] is i + 1; code 0 is reserved for missing and unseen.
struct CodeMap {
  std::vector<std::string> entries;
  std::vector<std::size_t> counts;

  std::size_t size() const { return entries.size(); }
  friend bool operator==(const CodeMap&, const CodeMap&) = default;
};

CodeMap rank_entries(std::span<const CellValue> column);

Column upcs(std::span<const CellValue> column, bool active = true);

// 1 where the cell is an infill target for a root of the given kind.
Column narw(std::span<const CellValue> column, bool numeric_root);

Column ord3_apply(const CodeMap& map, std::span<const CellValue> column);
std::vector<Column> onht_apply(const CodeMap& map, std::span<const CellValue> column);

// Width of a 1010 encoding for n entries, leaving the all-zero pattern free.
std::size_t binary_width(std::size_t n);
// Big-endian bit columns of each row's ord3 code.
std::vector<Column> b1010_apply(const CodeMap& map, std::span<const CellValue> column);

struct BinaryMap {
  std::string one;   // the more frequent entry; also the missing/unseen code
  std::string zero;
  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;
};

// Throws DataError unless the column has exactly two distinct entries.
BinaryMap bnry_fit(std::span<const CellValue> column);
Column bnry_apply(const BinaryMap& map, std::span<const CellValue> column);

struct NormFit {
  double mean = 0.0;
  double std = 0.0;  // population
  friend bool operator==(const NormFit&, const NormFit&) = default;
};

struct MinMaxFit {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  friend bool operator==(const MinMaxFit&, const MinMaxFit&) = default;
};

NormFit nmbr_fit(std::span<const CellValue> column);
Column nmbr_apply(const NormFit& fit, std::span<const CellValue> column);
MinMaxFit mnmx_fit(std::span<const CellValue> column);
Column mnmx_apply(const MinMaxFit& fit, std::span<const CellValue> column);

// Decoders used by inversion. Throw DataError on codes or activation
// patterns the fit never produced.
Column ord3_decode(const CodeMap& map, std::span<const CellValue> codes);
Column onht_decode(const CodeMap& map, std::span<const Column> group);
Column b1010_decode(const CodeMap& map, std::span<const Column> group);
Column bnry_decode(const BinaryMap& map, std::span<const CellValue> codes);
Column nmbr_invert(const NormFit& fit, std::span<const CellValue> values);
Column mnmx_invert(const MinMaxFit& fit, std::span<const CellValue> values);

inline constexpr int kDefaultCategoryThreshold = 255;

// Default root category for an unassigned column.
std::string auto_root_select(ColType type, const UniqueSetStats& stats,
                             int threshold = kDefaultCategoryThreshold);

}  // namespace parsemunge::encoders
