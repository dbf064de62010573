#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "parsemunge/encoders.hpp"
#include "parsemunge/extract_search.hpp"
#include "parsemunge/registry.hpp"
#include "parsemunge/stringparse.hpp"
#include "parsemunge/tidytable.hpp"

namespace parsemunge {

struct PassFit {
  friend bool operator==(const PassFit&, const PassFit&) = default;
};

struct UpcsFit {
  bool active = true;
  friend bool operator==(const UpcsFit&, const UpcsFit&) = default;
};

struct NarwFit {
  bool numeric_targets = false;
  friend bool operator==(const NarwFit&, const NarwFit&) = default;
};

using FitParams =
    std::variant<PassFit, UpcsFit, NarwFit, encoders::CodeMap, encoders::BinaryMap, encoders::NormFit,
                 encoders::MinMaxFit, stringparse::ActivationFit, stringparse::PatternFit, stringparse::ReplaceFit,
                 extract::NumericExtractFit, extract::SearchSpec>;

// Frozen train-basis parameters of one step.
struct ColumnFit {
  Behavior behavior = Behavior::passthrough;
  FitParams params;
  friend bool operator==(const ColumnFit&, const ColumnFit&) = default;
};

// Columns a step returns; tokens[i] is appended after the category suffix
// when non-empty ("col_1010" + "_" + "0").
struct StepOutput {
  std::vector<std::string> tokens;
  std::vector<Column> columns;
};

// Parameter names a behavior accepts through assignparam.
std::vector<std::string_view> accepted_params(Behavior behavior);

// `params` is the merged parameter object for this step. `numeric_root`
// only matters to NArw. Throws ConfigError on unknown or ill-typed params.
ColumnFit fit_column(Behavior behavior, std::span<const CellValue> input, const nlohmann::json& params,
                     bool numeric_root);

StepOutput apply_column(const ColumnFit& fit, std::span<const CellValue> input);

nlohmann::json to_json(const ColumnFit& fit);
ColumnFit column_fit_from_json(const nlohmann::json& doc);

nlohmann::json cell_to_json(const CellValue& cell);
CellValue cell_from_json(const nlohmann::json& doc);

}  // namespace parsemunge
