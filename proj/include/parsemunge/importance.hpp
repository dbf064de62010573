#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parsemunge/tidytable.hpp"
#include "parsemunge/treeengine.hpp"

namespace parsemunge::importance {

enum class Task { classification, regression };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

// Categoric labels classify; numeric labels regress unless they are
// integer-valued with at most 20 distinct values.
Task infer_task(const Column& labels);

// Seeded 64-bit generator with portable bounded draws and shuffles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t state_;
};

// Independent stream for (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class Model {
 public:
  virtual ~Model() = default;
  virtual Column predict(const TidyTable& features) const = 0;
};

struct PredictorAdapter {
  Task task = Task::classification;
  std::function<std::unique_ptr<Model>(const TidyTable& features, const Column& labels)> train;
};

struct TreeOptions {
  int max_depth = 8;
  int n_trees = 10;
  std::uint64_t seed = 0;
  bool feature_subsample = false;  // sqrt(features) candidates per split
};

// Bagged CART: gini for classification, variance for regression, majority
// vote or mean across trees. Non-numeric cells are treated as one value
// below every number. Training on zero rows throws DataError.
PredictorAdapter builtin_tree(Task task, TreeOptions opts = {});

double accuracy(const Column& predicted, const Column& truth);
// Mean squared log error; values below zero are clamped to zero.
double msle(const Column& predicted, const Column& truth);

struct ImportanceOptions {
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  int repeats = 1;  // permutations averaged per feature
};

struct ImportanceReport {
  Task task = Task::classification;
  std::string metric;  // "accuracy" or "msle"
  double base_score = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  // source column -> drop in quality when all its derived columns are
  // shuffled together; larger means more important
  std::map<std::string, double> metric1;
  // derived column -> drop in quality when every sibling but this column is
  // shuffled; smaller means the column carries more of its source's signal
  std::map<std::string, double> metric2;
  std::uint64_t seed = 0;

  friend bool operator==(const ImportanceReport&, const ImportanceReport&) = default;
};

// Encodes `table` with the artifact, holds out a seeded validation split,
// trains once and scores shuffled copies of the validation features.
// Rows with a Missing label are dropped. Throws DataError when fewer than 5
// validation rows remain or a classification split has a single class.
ImportanceReport permutation_importance(const FitArtifact& artifact, const TidyTable& table, const Column& labels,
                                        const PredictorAdapter& adapter, const ImportanceOptions& opts = {});

nlohmann::json to_json(const ImportanceReport& report);
// Sources by metric1 descending, then derived columns by metric2 ascending.
std::string render(const ImportanceReport& report);

}  // namespace parsemunge::importance
