#include "parsemunge/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "parsemunge/config.hpp"
#include "parsemunge/error.hpp"
#include "parsemunge/importance.hpp"
#include "parsemunge/treeengine.hpp"

namespace parsemunge {
namespace {

namespace fs = std::filesystem;

constexpr const char* kArtifactName = "artifact.pmz.json";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

struct Common {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threshold;
  std::optional<std::string> labels;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.seed = c.seed;
  if (c.threshold) {
    if (*c.threshold < 1) throw ConfigError("--threshold must be a positive integer");
    cfg.threshold = c.threshold;
  }
  if (c.labels) cfg.labels_column = c.labels;
  return cfg;
}

int cmd_fit(const Common& c, const std::string& train_path, const std::string& test_path, std::ostream& out,
            std::ostream& err) {
  const RunConfig cfg = resolve_config(c);
  const Registry reg = build_registry(cfg);
  const TidyTable train = load_csv(train_path);
  std::optional<TidyTable> test;
  if (!test_path.empty()) test = load_csv(test_path);

  const FitResult result = fit(train, cfg.assignments, reg, build_options(cfg));
  std::vector<std::string> warnings;
  std::optional<TidyTable> test_encoded;
  if (test) test_encoded = apply(result.artifact, *test, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  if (cfg.shuffletrain) {
    importance::Rng rng(importance::derive_seed(cfg.seed.value_or(0), 0));
    write_csv(result.encoded.select_rows(rng.permutation(result.encoded.row_count())), dir / "train_encoded.csv");
  } else {
    write_csv(result.encoded, dir / "train_encoded.csv");
  }
  if (test_encoded) write_csv(*test_encoded, dir / "test_encoded.csv");
  write_text(dir / kArtifactName, serialize(result.artifact));
  write_text(dir / "fit_report.txt", fit_summary(result.artifact));

  out << "fit: " << train.column_count() << " source columns -> " << result.encoded.column_count()
      << " returned columns, " << train.row_count() << " train rows";
  if (test_encoded) out << ", " << test_encoded->row_count() << " test rows";
  out << "\nwrote " << (dir / kArtifactName).string() << "\n";
  return 0;
}

int cmd_apply(const Common& c, const std::string& artifact_path, const std::string& test_path,
              const std::string& out_path, bool drift, std::ostream& out, std::ostream& err) {
  const FitArtifact artifact = deserialize(read_text(artifact_path));
  const TidyTable test = load_csv(test_path);
  std::vector<std::string> warnings;
  const TidyTable encoded = apply(artifact, test, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  fs::path target = out_path.empty() ? fs::path(c.out_dir) / "test_encoded.csv" : fs::path(out_path);
  if (target.has_parent_path()) ensure_dir(target.parent_path());
  write_csv(encoded, target);
  out << "apply: " << test.row_count() << " rows -> " << encoded.column_count() << " columns, wrote "
      << target.string() << "\n";
  if (drift) out << render(drift_report(artifact, test));
  return 0;
}

int cmd_invert(const Common& c, const std::string& artifact_path, const std::string& encoded_path,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  const FitArtifact artifact = deserialize(read_text(artifact_path));
  const TidyTable encoded = load_csv(encoded_path);
  const InversionResult inv = invert(artifact, encoded);
  for (const auto& h : inv.non_invertible) err << "non-invertible: " << h << "\n";

  fs::path target = out_path.empty() ? fs::path(c.out_dir) / "inverted.csv" : fs::path(out_path);
  if (target.has_parent_path()) ensure_dir(target.parent_path());
  write_csv(inv.table, target);
  out << "invert: recovered " << inv.table.column_count() << " source columns, " << inv.non_invertible.size()
      << " non-invertible, wrote " << target.string() << "\n";
  return 0;
}

int cmd_importance(const Common& c, const std::string& train_path, std::ostream& out) {
  const RunConfig cfg = resolve_config(c);
  if (!cfg.labels_column) throw ConfigError("importance needs labels_column (config key or --labels)");
  const Registry reg = build_registry(cfg);
  const TidyTable train = load_csv(train_path);
  if (!train.contains(*cfg.labels_column)) {
    throw ConfigError("labels_column \"" + *cfg.labels_column + "\" is not in the train table");
  }
  const Options opts = build_options(cfg);
  const FitResult result = fit(train, cfg.assignments, reg, opts);
  const Column& labels = train.column(*cfg.labels_column);

  importance::Task task = cfg.task ? *importance::parse_task(*cfg.task) : importance::infer_task(labels);
  importance::TreeOptions tree;
  tree.seed = opts.seed;
  importance::ImportanceOptions iopts;
  iopts.val_fraction = cfg.valpercent;
  iopts.seed = opts.seed;
  const auto report =
      importance::permutation_importance(result.artifact, train, labels, importance::builtin_tree(task, tree), iopts);

  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  write_text(dir / "importance.json", importance::to_json(report).dump(2) + "\n");
  write_text(dir / "importance.txt", importance::render(report));
  out << "importance: " << to_string(task) << ", base " << report.metric << " " << report.base_score << ", "
      << report.metric1.size() << " source features; wrote " << (dir / "importance.json").string() << "\n";
  return 0;
}

int cmd_inspect(const std::string& artifact_path, std::ostream& out) {
  out << fit_summary(deserialize(read_text(artifact_path)));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"parsemunge: tabular encoding with string parsing, replayable fits and feature importance"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool fit_flags) {
    sub->add_option("--out-dir", common.out_dir, "Directory for written files")->capture_default_str();
    if (!fit_flags) return;
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--seed", common.seed, "Seed for splits and models");
    sub->add_option("--threshold", common.threshold, "Unique count above which categoric columns get ord3");
    sub->add_option("--labels", common.labels, "Label column header");
  };

  std::string train_path, test_path, artifact_path, data_path, out_path;
  bool drift = false;

  auto* fit_cmd = app.add_subcommand("fit", "Fit on a train set, encode it and write the artifact");
  add_common(fit_cmd, true);
  fit_cmd->add_option("train", train_path, "Train CSV")->required();
  fit_cmd->add_option("test", test_path, "Optional test CSV encoded with the fitted artifact");

  auto* apply_cmd = app.add_subcommand("apply", "Encode new data with a fitted artifact");
  add_common(apply_cmd, false);
  apply_cmd->add_option("artifact", artifact_path, "Artifact file")->required();
  apply_cmd->add_option("data", data_path, "CSV to encode")->required();
  apply_cmd->add_option("-o,--out", out_path, "Output CSV (default <out-dir>/test_encoded.csv)");
  apply_cmd->add_flag("--drift", drift, "Print drift against the train profile");

  auto* invert_cmd = app.add_subcommand("invert", "Recover source columns from an encoded table");
  add_common(invert_cmd, false);
  invert_cmd->add_option("artifact", artifact_path, "Artifact file")->required();
  invert_cmd->add_option("encoded", data_path, "Encoded CSV")->required();
  invert_cmd->add_option("-o,--out", out_path, "Output CSV (default <out-dir>/inverted.csv)");

  auto* imp_cmd = app.add_subcommand("importance", "Permutation feature importance with the built-in trees");
  add_common(imp_cmd, true);
  imp_cmd->add_option("train", train_path, "Train CSV including the label column")->required();

  auto* inspect_cmd = app.add_subcommand("inspect", "Print the per-column trees of an artifact");
  inspect_cmd->add_option("artifact", artifact_path, "Artifact file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(common, train_path, test_path, out, err);
    if (apply_cmd->parsed()) return cmd_apply(common, artifact_path, data_path, out_path, drift, out, err);
    if (invert_cmd->parsed()) return cmd_invert(common, artifact_path, data_path, out_path, out, err);
    if (imp_cmd->parsed()) return cmd_importance(common, train_path, out);
    if (inspect_cmd->parsed()) return cmd_inspect(artifact_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace parsemunge
