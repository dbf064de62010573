#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parsemunge/infill.hpp"
#include "parsemunge/registry.hpp"
#include "parsemunge/tidytable.hpp"
#include "parsemunge/transforms.hpp"

namespace parsemunge {

inline constexpr int kFormatVersion = 1;

struct Options {
  int threshold = encoders::kDefaultCategoryThreshold;
  std::uint64_t seed = 0;
  bool passthrough_unassigned = false;
  std::optional<std::string> labels_column;
  // category -> column -> params, plus "global_assignparam" and
  // "default_assignparam" layers
  nlohmann::json assignparam = nlohmann::json::object();
  std::map<std::string, InfillKind> assigninfill;  // source header -> kind
  int max_depth = kDefaultMaxDepth;
  // Worker cap for per-source fitting; 0 reads PARSEMUNGE_THREADS, then the
  // hardware. Not part of the artifact.
  unsigned threads = 0;

  friend bool operator==(const Options& a, const Options& b) {
    return a.threshold == b.threshold && a.seed == b.seed && a.passthrough_unassigned == b.passthrough_unassigned &&
           a.labels_column == b.labels_column && a.assignparam == b.assignparam &&
           a.assigninfill == b.assigninfill && a.max_depth == b.max_depth;
  }
};

struct StepRecord {
  std::string category;
  int input = -1;  // parent step index; -1 is the source column
  std::string input_header;
  std::vector<std::string> output_headers;
  ColumnFit fit;
  bool retained = false;
  InfillKind infill = InfillKind::transform_default;
  infill::InfillStats infill_stats;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SourceProfile {
  ColType coltype = ColType::all_missing;
  std::size_t rows = 0;
  std::size_t missing = 0;
  double mean = 0.0;  // numeric sources only
  double std = 0.0;
  std::vector<std::pair<std::string, std::size_t>> freq;  // count desc, value asc

  friend bool operator==(const SourceProfile&, const SourceProfile&) = default;
};

struct SourceRecord {
  std::string header;
  std::size_t position = 0;
  std::string root;
  bool numeric_root = false;
  bool retain_source = false;  // raw column returned as-is
  bool is_label = false;
  SourceProfile profile;
  std::vector<StepRecord> steps;  // depth-first, parents before offspring

  friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

struct FitArtifact {
  int format_version = kFormatVersion;
  Options options;
  Registry registry;
  std::map<std::string, SourceRecord> per_source;
  std::vector<std::string> output_order;
  std::map<std::string, InfillKind> infill_spec;  // returned header -> kind

  // Sources in train column order.
  std::vector<const SourceRecord*> sources() const;
  const SourceRecord* label_source() const;
  // Returned headers belonging to the label column.
  std::vector<std::string> label_headers() const;

  friend bool operator==(const FitArtifact&, const FitArtifact&) = default;
};

// Headers a source contributes to the returned table, in order.
std::vector<std::string> returned_headers(const SourceRecord& rec);

struct FitResult {
  TidyTable encoded;
  FitArtifact artifact;
};

// `assignments` maps source header -> root category; other columns get
// encoders::auto_root_select (or excl under passthrough_unassigned).
FitResult fit(const TidyTable& train, const std::map<std::string, std::string>& assignments, const Registry& reg,
              const Options& opts);

// Extra test columns are ignored with a message appended to `warnings`. A
// missing label column is skipped silently.
TidyTable apply(const FitArtifact& artifact, const TidyTable& test, std::vector<std::string>* warnings = nullptr);

std::string serialize(const FitArtifact& artifact);
FitArtifact deserialize(std::string_view bytes);

struct InversionResult {
  TidyTable table;
  std::vector<std::string> non_invertible;
  std::map<std::string, std::string> paths;  // source -> step header inverted
};

InversionResult invert(const FitArtifact& artifact, const TidyTable& encoded);

struct NumericDrift {
  double train_mean = 0.0, train_std = 0.0;
  double new_mean = 0.0, new_std = 0.0;
  double mean_delta = 0.0, std_delta = 0.0;
};

struct FrequencyDrift {
  std::string value;
  double train_freq = 0.0;
  double new_freq = 0.0;
  double delta = 0.0;
};

struct CategoricDrift {
  std::vector<FrequencyDrift> top;  // up to 10 most frequent train entries
  double unseen_rate = 0.0;
};

struct SourceDrift {
  std::string header;
  std::optional<NumericDrift> numeric;
  std::optional<CategoricDrift> categoric;
};

struct DriftReport {
  std::vector<SourceDrift> sources;
};

DriftReport drift_report(const FitArtifact& artifact, const TidyTable& fresh);
nlohmann::json to_json(const DriftReport& report);
std::string render(const DriftReport& report);

// Per-source tree, returned headers and unique counts.
std::string fit_summary(const FitArtifact& artifact);

}  // namespace parsemunge
