#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parsemunge/tidytable.hpp"

namespace parsemunge::extract {

struct NumberFormat {
  bool allow_commas = true;
  bool allow_decimal = true;
  bool allow_negative = false;
  friend bool operator==(const NumberFormat&, const NumberFormat&) = default;
};

// Longest substring of the form [-]digits[,digits]*[.digits] (parts per the
// format flags), earliest on ties, commas stripped.
std::optional<double> nmcm_extract(std::string_view entry, const NumberFormat& format = {});

struct NumericExtractFit {
  std::map<std::string, std::optional<double>> lookup;  // train entry -> extract
  NumberFormat format;
  friend bool operator==(const NumericExtractFit&, const NumericExtractFit&) = default;
};

NumericExtractFit nmcm_fit(std::span<const CellValue> column, const NumberFormat& format = {});
// Parses every distinct entry afresh.
Column nmcm_apply(const NumericExtractFit& fit, std::span<const CellValue> column);
// Looks train entries up and parses only unseen ones. `extraction_calls`
// receives the number of fresh parses when given.
Column nmc7_apply(const NumericExtractFit& fit, std::span<const CellValue> column,
                  std::size_t* extraction_calls = nullptr);

struct SearchGroup {
  std::string label;
  std::vector<std::string> terms;
  friend bool operator==(const SearchGroup&, const SearchGroup&) = default;
};

struct SearchSpec {
  std::vector<SearchGroup> groups;
  bool ordinal = false;
  bool case_sensitive = false;
  friend bool operator==(const SearchSpec&, const SearchSpec&) = default;
};

// Each single term becomes its own group labelled by the term; each
// aggregate list becomes one group labelled by its terms joined with "-".
// Throws ConfigError on an empty term, an empty spec, or duplicate labels.
SearchSpec make_search_spec(const std::vector<std::string>& terms,
                            const std::vector<std::vector<std::string>>& aggregates, bool ordinal = false,
                            bool case_sensitive = false);

// Per-group boolean columns, or one ordinal column (0 = no match, else the
// first matching group's 1-based position).
std::vector<Column> srch_apply(const SearchSpec& spec, std::span<const CellValue> column);

}  // namespace parsemunge::extract
