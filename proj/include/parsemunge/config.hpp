#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "parsemunge/registry.hpp"
#include "parsemunge/treeengine.hpp"

namespace parsemunge {

// Parsed run configuration document. Keys follow the automunge names:
// assigncat, assignparam, assigninfill, transformdict, processdict,
// labels_column, seed, threshold, valpercent, task, shuffletrain,
// passthrough_unassigned, plus "srch" as a shorthand for assignparam.srch.
struct RunConfig {
  std::map<std::string, std::string> assignments;  // source -> root
  nlohmann::json assignparam = nlohmann::json::object();
  std::map<std::string, InfillKind> assigninfill;
  RegistryOverrides overrides;
  std::optional<std::string> labels_column;
  std::optional<std::uint64_t> seed;
  std::optional<int> threshold;
  double valpercent = 0.2;
  std::optional<std::string> task;
  bool passthrough_unassigned = false;
  bool shuffletrain = false;  // seeded row shuffle of the written train output
};

// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

Registry build_registry(const RunConfig& cfg);
Options build_options(const RunConfig& cfg);

}  // namespace parsemunge
