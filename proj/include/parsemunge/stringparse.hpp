#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parsemunge/encoders.hpp"
#include "parsemunge/tidytable.hpp"

namespace parsemunge::stringparse {

inline constexpr std::size_t kDefaultMinLen = 5;
inline constexpr std::string_view kDefaultPlug = "zzzplug";

// Space plus ASCII punctuation, the set "exclude_space_punct" switches on.
std::string_view space_and_punctuation();

enum class ScanStrategy {
  pairwise,  // every window of every entry against every window of every other entry
  indexed,   // hash each window once; same result
};

struct OverlapScanConfig {
  std::size_t min_len = kDefaultMinLen;
  std::string exclude_chars;  // UTF-8; candidates containing any of these are dropped
  bool single_id = true;
  bool test_subset_assumption = false;
  ScanStrategy strategy = ScanStrategy::pairwise;
};

struct OverlapMap {
  // overlap -> every train entry containing it
  std::map<std::string, std::set<std::string>> overlaps;
  // entry -> its overlap (single_id) or overlaps, longest first
  std::map<std::string, std::vector<std::string>> assignment;

  friend bool operator==(const OverlapMap&, const OverlapMap&) = default;
};

// Lengths are counted in code points. An overlap needs at least two distinct
// supporting entries. In single_id mode each entry takes its longest
// overlap, ties going to the lexicographically smallest string; in multi
// mode an entry takes every overlap it contains that cannot be extended by
// one character without losing a supporter.
OverlapMap scan_overlaps(std::span<const std::string> uniques, const OverlapScanConfig& cfg);

// Candidates are whole entries found inside other entries.
OverlapMap scan_containment(std::span<const std::string> uniques, const OverlapScanConfig& cfg);

// Distinct categoric keys of a column, sorted.
std::vector<std::string> distinct_keys(std::span<const CellValue> column);

// splt / sp15 / sbst: one boolean column per overlap.
struct ActivationFit {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<std::size_t>> active;  // train entry -> column indices

  friend bool operator==(const ActivationFit&, const ActivationFit&) = default;
};

ActivationFit splt_fit(std::span<const CellValue> column, OverlapScanConfig cfg);
ActivationFit sp15_fit(std::span<const CellValue> column, OverlapScanConfig cfg);
ActivationFit sbst_fit(std::span<const CellValue> column, OverlapScanConfig cfg);
// Unseen and Missing rows are all zeros.
std::vector<Column> activation_apply(const ActivationFit& fit, std::span<const CellValue> column);

// sp19: sp15 activation patterns as categoric entries under the 1010 scheme.
struct PatternFit {
  ActivationFit activations;
  encoders::CodeMap patterns;  // keys are '0'/'1' strings over activations.columns

  std::size_t width() const;
  friend bool operator==(const PatternFit&, const PatternFit&) = default;
};

PatternFit sp19_fit(std::span<const CellValue> column, OverlapScanConfig cfg);
std::vector<Column> sp19_apply(const PatternFit& fit, std::span<const CellValue> column);

// spl2 / spl5 / spl9 / sp10: entries replaced by their overlap.
struct ReplaceFit {
  std::map<std::string, std::string> assignment;
  // Unseen entries are searched for the longest contained overlap (spl2,
  // spl5); spl9 and sp10 only look entries up.
  bool search_unseen = true;
  std::vector<std::string> overlaps;  // longest first, then lexicographic
  std::optional<std::string> plug;    // replaces unassigned entries when set

  friend bool operator==(const ReplaceFit&, const ReplaceFit&) = default;
};

// cfg.test_subset_assumption turns the unseen-entry search off.
ReplaceFit replace_fit(std::span<const CellValue> column, OverlapScanConfig cfg, std::optional<std::string> plug);
Column replace_apply(const ReplaceFit& fit, std::span<const CellValue> column);

}  // namespace parsemunge::stringparse
