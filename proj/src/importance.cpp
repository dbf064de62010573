#include "parsemunge/importance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "parsemunge/encoders.hpp"
#include "parsemunge/error.hpp"
#include "parsemunge/parallel.hpp"

namespace parsemunge::importance {
namespace {

constexpr double kLow = -1e300;  // stands in for Missing and text features

using Matrix = std::vector<std::vector<double>>;  // column-major

Matrix to_matrix(const TidyTable& features) {
  Matrix m(features.column_count(), std::vector<double>(features.row_count(), kLow));
  for (std::size_t c = 0; c < features.column_count(); ++c) {
    const Column& col = features.column(c);
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (auto v = numeric_value(col[r]); v && std::isfinite(*v)) m[c][r] = *v;
    }
  }
  return m;
}

struct Node {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // class id or mean
};

struct Tree {
  std::vector<Node> nodes;

  double predict(const Matrix& x, std::size_t row) const {
    int at = 0;
    while (nodes[at].feature >= 0) {
      at = x[nodes[at].feature][row] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    }
    return nodes[at].value;
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<double>& y, std::size_t n_classes, const TreeOptions& opts, Rng& rng)
      : x_(x), y_(y), n_classes_(n_classes), opts_(opts), rng_(rng) {}

  Tree build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  bool classify() const { return n_classes_ > 0; }

  double leaf_value(const std::vector<std::size_t>& rows, bool& pure) const {
    if (classify()) {
      std::vector<std::size_t> counts(n_classes_, 0);
      for (auto r : rows) ++counts[static_cast<std::size_t>(y_[r])];
      const auto best = std::max_element(counts.begin(), counts.end());
      pure = *best == rows.size();
      return static_cast<double>(best - counts.begin());
    }
    double sum = 0.0;
    for (auto r : rows) sum += y_[r];
    pure = std::all_of(rows.begin(), rows.end(), [&](auto r) { return y_[r] == y_[rows.front()]; });
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> feats(x_.size());
    for (std::size_t f = 0; f < feats.size(); ++f) feats[f] = f;
    if (!opts_.feature_subsample || feats.size() <= 1) return feats;
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(feats.size()))));
    for (std::size_t i = 0; i < k; ++i) std::swap(feats[i], feats[i + rng_.below(feats.size() - i)]);
    feats.resize(k);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  // Larger is better: sum of squared class counts over size (gini) or
  // squared sum over size (variance), added across both sides.
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  Split best_split(const std::vector<std::size_t>& rows) {
    const double n = static_cast<double>(rows.size());
    double parent = 0.0;
    std::vector<double> total(std::max<std::size_t>(n_classes_, 1), 0.0);
    double total_sum = 0.0;
    if (classify()) {
      for (auto r : rows) total[static_cast<std::size_t>(y_[r])] += 1.0;
      for (double c : total) parent += c * c;
    } else {
      for (auto r : rows) total_sum += y_[r];
      parent = total_sum * total_sum;
    }
    parent /= n;

    Split best;
    best.score = parent + 1e-12 * std::max(1.0, std::abs(parent));
    std::vector<std::pair<double, double>> order(rows.size());
    std::vector<double> left(total.size());
    for (auto f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) order[i] = {x_[f][rows[i]], y_[rows[i]]};
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      double sq_left = 0.0, sq_right = 0.0, sum_left = 0.0;
      if (classify()) {
        for (double c : total) sq_right += c * c;
      }
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double yi = order[i].second;
        if (classify()) {
          const auto k = static_cast<std::size_t>(yi);
          const double right_k = total[k] - left[k];
          sq_left += 2.0 * left[k] + 1.0;
          sq_right -= 2.0 * right_k - 1.0;
          left[k] += 1.0;
        } else {
          sum_left += yi;
        }
        if (order[i].first == order[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        double score;
        if (classify()) {
          score = sq_left / nl + sq_right / nr;
        } else {
          const double sum_right = total_sum - sum_left;
          score = sum_left * sum_left / nl + sum_right * sum_right / nr;
        }
        if (score > best.score) {
          best.feature = static_cast<int>(f);
          best.threshold = order[i].first / 2.0 + order[i + 1].first / 2.0;
          best.score = score;
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    bool pure = false;
    tree_.nodes[index].value = leaf_value(rows, pure);
    if (pure || depth >= opts_.max_depth || rows.size() < 2) return index;
    const Split split = best_split(rows);
    if (split.feature < 0) return index;
    std::vector<std::size_t> lo, hi;
    for (auto r : rows) (x_[split.feature][r] <= split.threshold ? lo : hi).push_back(r);
    tree_.nodes[index].feature = split.feature;
    tree_.nodes[index].threshold = split.threshold;
    const int l = grow(lo, depth + 1);
    const int h = grow(hi, depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = h;
    return index;
  }

  const Matrix& x_;
  const std::vector<double>& y_;
  std::size_t n_classes_;
  const TreeOptions& opts_;
  Rng& rng_;
  Tree tree_;
};

class Forest : public Model {
 public:
  Forest(Task task, std::vector<Tree> trees, std::vector<CellValue> classes)
      : task_(task), trees_(std::move(trees)), classes_(std::move(classes)) {}

  Column predict(const TidyTable& features) const override {
    const Matrix x = to_matrix(features);
    Column out;
    out.reserve(features.row_count());
    std::vector<std::size_t> votes(classes_.size());
    for (std::size_t r = 0; r < features.row_count(); ++r) {
      if (task_ == Task::classification) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict(x, r))];
        const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
        out.push_back(classes_[best]);
      } else {
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.predict(x, r);
        out.push_back(CellValue::number(sum / static_cast<double>(trees_.size())));
      }
    }
    return out;
  }

 private:
  Task task_;
  std::vector<Tree> trees_;
  std::vector<CellValue> classes_;
};

std::unique_ptr<Model> train_forest(Task task, const TreeOptions& opts, const TidyTable& features,
                                    const Column& labels) {
  const std::size_t n = features.row_count();
  if (n == 0 || labels.size() != n) throw DataError("tree training needs a non-empty table with one label per row");
  if (opts.n_trees < 1 || opts.max_depth < 0) throw ConfigError("tree ensemble needs n_trees >= 1 and max_depth >= 0");
  const Matrix x = to_matrix(features);

  std::vector<double> y(n, 0.0);
  std::vector<CellValue> classes;
  if (task == Task::classification) {
    std::map<std::string, std::size_t> ids;
    for (const auto& cell : labels) {
      if (cell.is_missing()) throw DataError("missing label in training rows");
      ids.emplace(cell.canonical_text(), 0);
    }
    for (auto& [key, id] : ids) id = classes.size(), classes.push_back(CellValue::missing());
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t id = ids.at(labels[r].canonical_text());
      y[r] = static_cast<double>(id);
      if (classes[id].is_missing()) classes[id] = labels[r];
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      auto v = numeric_value(labels[r]);
      if (!v) throw DataError("regression labels must be numeric");
      y[r] = *v;
    }
  }

  std::vector<Tree> trees(static_cast<std::size_t>(opts.n_trees));
  parallel_for(trees.size(), worker_count(), [&](std::size_t t) {
    Rng rng(derive_seed(opts.seed, t));
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
    std::sort(sample.begin(), sample.end());
    TreeBuilder builder(x, y, classes.size(), opts, rng);
    trees[t] = builder.build(std::move(sample));
  });
  return std::make_unique<Forest>(task, std::move(trees), std::move(classes));
}

TidyTable shuffled(const TidyTable& table, const std::set<std::string>& targets,
                   const std::vector<std::size_t>& perm) {
  TidyTable out;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const auto& header = table.headers()[c];
    const Column& col = table.column(c);
    if (!targets.count(header)) {
      out.add_column(header, col);
      continue;
    }
    Column moved(col.size());
    for (std::size_t r = 0; r < col.size(); ++r) moved[r] = col[perm[r]];
    out.add_column(header, std::move(moved));
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::classification ? "classification" : "regression"; }

std::optional<Task> parse_task(std::string_view name) {
  if (name == "classification") return Task::classification;
  if (name == "regression") return Task::regression;
  return std::nullopt;
}

Task infer_task(const Column& labels) {
  if (infer_coltype(labels) != ColType::numeric) return Task::classification;
  std::set<double> values;
  for (const auto& cell : labels) {
    if (!cell.is_number()) continue;
    if (cell.as_number() != std::floor(cell.as_number())) return Task::regression;
    values.insert(cell.as_number());
    if (values.size() > 20) return Task::regression;
  }
  return Task::classification;
}

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = -n % n;  // values under this would bias the modulo
  for (;;) {
    const std::uint64_t r = next();
    if (r >= limit) return r % n;
  }
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
  return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  Rng mix(seed ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  return mix.next();
}

PredictorAdapter builtin_tree(Task task, TreeOptions opts) {
  PredictorAdapter adapter;
  adapter.task = task;
  adapter.train = [task, opts](const TidyTable& features, const Column& labels) {
    return train_forest(task, opts, features, labels);
  };
  return adapter;
}

double accuracy(const Column& predicted, const Column& truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw DataError("accuracy needs equal, non-empty columns");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    if (encoders::categoric_key(predicted[r]) == encoders::categoric_key(truth[r])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double msle(const Column& predicted, const Column& truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw DataError("msle needs equal, non-empty columns");
  double sum = 0.0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const double p = std::max(0.0, numeric_value(predicted[r]).value_or(0.0));
    const double t = std::max(0.0, numeric_value(truth[r]).value_or(0.0));
    const double d = std::log1p(p) - std::log1p(t);
    sum += d * d;
  }
  return sum / static_cast<double>(truth.size());
}

ImportanceReport permutation_importance(const FitArtifact& artifact, const TidyTable& table, const Column& labels,
                                        const PredictorAdapter& adapter, const ImportanceOptions& opts) {
  if (labels.size() != table.row_count()) throw DataError("labels and table differ in row count");
  if (!(opts.val_fraction > 0.0 && opts.val_fraction < 1.0)) throw ConfigError("valpercent must lie in (0, 1)");
  if (opts.repeats < 1) throw ConfigError("importance repeats must be at least 1");

  TidyTable encoded = apply(artifact, table);
  const auto label_headers = artifact.label_headers();
  std::vector<std::string> feature_headers;
  for (const auto& h : encoded.headers()) {
    if (std::find(label_headers.begin(), label_headers.end(), h) == label_headers.end()) feature_headers.push_back(h);
  }
  const TidyTable features = encoded.select_columns(feature_headers);

  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (!labels[r].is_missing()) kept.push_back(r);
  }
  Rng split_rng(opts.seed);
  const auto order = split_rng.permutation(kept.size());
  const auto val_count = static_cast<std::size_t>(std::llround(opts.val_fraction * static_cast<double>(kept.size())));
  if (val_count < 5) throw DataError("validation split needs at least 5 labelled rows");
  if (val_count >= kept.size()) throw DataError("validation split leaves no training rows");
  std::vector<std::size_t> val_rows, train_rows;
  for (std::size_t i = 0; i < kept.size(); ++i) (i < val_count ? val_rows : train_rows).push_back(kept[order[i]]);
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  auto pick = [&](const std::vector<std::size_t>& rows) {
    Column out;
    for (auto r : rows) out.push_back(labels[r]);
    return out;
  };
  const Column y_train = pick(train_rows);
  const Column y_val = pick(val_rows);
  const bool classify = adapter.task == Task::classification;
  if (classify) {
    std::set<std::string> classes;
    for (const auto& cell : y_val) classes.insert(cell.canonical_text());
    if (classes.size() < 2) throw DataError("validation split holds a single class; choose another seed");
  }

  const auto model = adapter.train(features.select_rows(train_rows), y_train);
  const TidyTable x_val = features.select_rows(val_rows);
  auto score = [&](const TidyTable& x) {
    const Column predicted = model->predict(x);
    return classify ? accuracy(predicted, y_val) : msle(predicted, y_val);
  };
  // positive when shuffling hurt
  auto drop = [&](double base, double shuffled_score) { return classify ? base - shuffled_score : shuffled_score - base; };

  ImportanceReport report;
  report.task = adapter.task;
  report.metric = classify ? "accuracy" : "msle";
  report.seed = opts.seed;
  report.train_rows = train_rows.size();
  report.validation_rows = val_rows.size();
  report.base_score = score(x_val);

  std::uint64_t feature_index = 0;
  for (const SourceRecord* rec : artifact.sources()) {
    if (rec->is_label) continue;
    ++feature_index;
    std::vector<std::string> derived;
    for (const auto& h : returned_headers(*rec)) {
      if (x_val.contains(h)) derived.push_back(h);
    }
    if (derived.empty()) continue;
    std::vector<std::vector<std::size_t>> perms;
    for (int k = 0; k < opts.repeats; ++k) {
      const std::uint64_t stream = derive_seed(opts.seed, feature_index);
      Rng perm_rng(k == 0 ? stream : derive_seed(stream, static_cast<std::uint64_t>(k)));
      perms.push_back(perm_rng.permutation(x_val.row_count()));
    }
    auto mean_drop = [&](const std::set<std::string>& targets) {
      double sum = 0.0;
      for (const auto& perm : perms) sum += drop(report.base_score, score(shuffled(x_val, targets, perm)));
      return sum / static_cast<double>(perms.size());
    };
    const std::set<std::string> all(derived.begin(), derived.end());
    report.metric1[rec->header] = mean_drop(all);
    for (const auto& target : derived) {
      if (derived.size() == 1) {
        report.metric2[target] = 0.0;
        continue;
      }
      std::set<std::string> others = all;
      others.erase(target);
      report.metric2[target] = mean_drop(others);
    }
  }
  return report;
}

nlohmann::json to_json(const ImportanceReport& report) {
  nlohmann::json m1 = nlohmann::json::object();
  for (const auto& [k, v] : report.metric1) m1[k] = v;
  nlohmann::json m2 = nlohmann::json::object();
  for (const auto& [k, v] : report.metric2) m2[k] = v;
  return {{"task", std::string(to_string(report.task))},
          {"metric", report.metric},
          {"base_score", report.base_score},
          {"train_rows", report.train_rows},
          {"validation_rows", report.validation_rows},
          {"seed", report.seed},
          {"metric1", m1},
          {"metric2", m2}};
}

std::string render(const ImportanceReport& report) {
  auto sorted = [](const std::map<std::string, double>& m, bool descending) {
    std::vector<std::pair<std::string, double>> v(m.begin(), m.end());
    std::stable_sort(v.begin(), v.end(), [&](const auto& a, const auto& b) {
      return descending ? a.second > b.second : a.second < b.second;
    });
    return v;
  };
  std::ostringstream os;
  os << "base " << report.metric << ": " << fixed(report.base_score) << " (" << report.validation_rows
     << " validation rows, seed " << report.seed << ")\n\n";
  os << "metric1 (source column, higher = more important)\n";
  for (const auto& [k, v] : sorted(report.metric1, true)) os << "  " << std::setw(12) << fixed(v) << "  " << k << "\n";
  os << "\nmetric2 (derived column, lower = more important within its source)\n";
  for (const auto& [k, v] : sorted(report.metric2, false)) os << "  " << std::setw(12) << fixed(v) << "  " << k << "\n";
  return os.str();
}

}  // namespace parsemunge::importance
