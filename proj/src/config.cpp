#include "parsemunge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "parsemunge/error.hpp"

namespace parsemunge {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {"assigncat",   "assignparam",   "assigninfill", "transformdict",
                                             "processdict", "labels_column", "seed",         "threshold",
                                             "valpercent",  "task",          "srch",         "passthrough_unassigned",
                                             "shuffletrain"};
  return keys;
}

std::vector<std::string> header_list(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be a list of column headers");
  std::vector<std::string> out;
  for (const auto& h : v) {
    if (!h.is_string()) throw ConfigError(where + " must be a list of column headers");
    out.push_back(h.get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (doc.is_null()) return {};
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key \"" + key + "\"");
  }

  RunConfig cfg;
  if (doc.contains("assigncat")) {
    const auto& ac = doc["assigncat"];
    if (!ac.is_object()) throw ConfigError("assigncat must map categories to header lists");
    for (const auto& [category, headers] : ac.items()) {
      for (const auto& h : header_list(headers, "assigncat." + category)) {
        if (!cfg.assignments.emplace(h, category).second) {
          throw ConfigError("column \"" + h + "\" is assigned more than one root in assigncat");
        }
      }
    }
  }

  if (doc.contains("assignparam")) {
    if (!doc["assignparam"].is_object()) throw ConfigError("assignparam must be an object");
    cfg.assignparam = doc["assignparam"];
  }
  if (doc.contains("srch")) {
    if (!doc["srch"].is_object()) throw ConfigError("srch must map columns to search specs");
    if (cfg.assignparam.contains("srch")) throw ConfigError("srch given both at top level and under assignparam");
    cfg.assignparam["srch"] = doc["srch"];
  }

  if (doc.contains("assigninfill")) {
    const auto& ai = doc["assigninfill"];
    if (!ai.is_object()) throw ConfigError("assigninfill must map infill kinds to header lists");
    for (const auto& [name, headers] : ai.items()) {
      auto kind = parse_infill_kind(name);
      if (!kind) throw ConfigError("unknown infill kind \"" + name + "\" in assigninfill");
      for (const auto& h : header_list(headers, "assigninfill." + name)) {
        if (!cfg.assigninfill.emplace(h, *kind).second) {
          throw ConfigError("column \"" + h + "\" is listed under more than one assigninfill kind");
        }
      }
    }
  }

  cfg.overrides = parse_overrides(doc.value("transformdict", nlohmann::json()), doc.value("processdict", nlohmann::json()));

  if (doc.contains("labels_column")) {
    if (!doc["labels_column"].is_string()) throw ConfigError("labels_column must be a header string");
    cfg.labels_column = doc["labels_column"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("threshold")) {
    if (!doc["threshold"].is_number_integer() || doc["threshold"].get<long long>() < 1) {
      throw ConfigError("threshold must be a positive integer");
    }
    cfg.threshold = doc["threshold"].get<int>();
  }
  if (doc.contains("valpercent")) {
    const auto& v = doc["valpercent"];
    if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
      throw ConfigError("valpercent must be a number in (0, 1)");
    }
    cfg.valpercent = v.get<double>();
  }
  if (doc.contains("task")) {
    const auto& t = doc["task"];
    if (!t.is_string() || (t != "classification" && t != "regression")) {
      throw ConfigError("task must be \"classification\" or \"regression\"");
    }
    cfg.task = t.get<std::string>();
  }
  if (doc.contains("passthrough_unassigned")) {
    if (!doc["passthrough_unassigned"].is_boolean()) throw ConfigError("passthrough_unassigned must be a boolean");
    cfg.passthrough_unassigned = doc["passthrough_unassigned"].get<bool>();
  }
  if (doc.contains("shuffletrain")) {
    if (!doc["shuffletrain"].is_boolean()) throw ConfigError("shuffletrain must be a boolean");
    cfg.shuffletrain = doc["shuffletrain"].get<bool>();
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

Registry build_registry(const RunConfig& cfg) {
  if (cfg.overrides.trees.empty() && cfg.overrides.entries.empty()) return builtin_registry();
  return merge_overrides(builtin_registry(), cfg.overrides);
}

Options build_options(const RunConfig& cfg) {
  Options opts;
  if (cfg.threshold) opts.threshold = *cfg.threshold;
  if (cfg.seed) opts.seed = *cfg.seed;
  opts.passthrough_unassigned = cfg.passthrough_unassigned;
  opts.labels_column = cfg.labels_column;
  opts.assignparam = cfg.assignparam;
  opts.assigninfill = cfg.assigninfill;
  return opts;
}

}  // namespace parsemunge
