#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "parsemunge/infill.hpp"

namespace parsemunge {

// The eight family tree primitives. The first four are consulted when a
// category is the root of a source column, the last four when it is reached
// as an offspring-bearing entry.
enum class Slot { parents, siblings, auntsuncles, cousins, children, niecesnephews, coworkers, friends };

inline constexpr std::array<Slot, 8> kAllSlots = {Slot::parents,  Slot::siblings,      Slot::auntsuncles,
                                                  Slot::cousins,  Slot::children,      Slot::niecesnephews,
                                                  Slot::coworkers, Slot::friends};
inline constexpr std::array<Slot, 4> kUpstreamSlots = {Slot::parents, Slot::siblings, Slot::auntsuncles,
                                                       Slot::cousins};
inline constexpr std::array<Slot, 4> kDownstreamSlots = {Slot::children, Slot::niecesnephews, Slot::coworkers,
                                                         Slot::friends};

struct SlotSemantics {
  bool offspring;
  bool retain_source;
};

constexpr SlotSemantics semantics(Slot slot) {
  switch (slot) {
    case Slot::parents:
    case Slot::children:
      return {true, false};
    case Slot::siblings:
    case Slot::niecesnephews:
      return {true, true};
    case Slot::auntsuncles:
    case Slot::coworkers:
      return {false, false};
    case Slot::cousins:
    case Slot::friends:
      return {false, true};
  }
  return {false, true};
}

std::string_view to_string(Slot slot);
std::optional<Slot> parse_slot(std::string_view name);

struct FamilyTree {
  std::array<std::vector<std::string>, 8> slots;

  std::vector<std::string>& operator[](Slot s) { return slots[static_cast<std::size_t>(s)]; }
  const std::vector<std::string>& operator[](Slot s) const { return slots[static_cast<std::size_t>(s)]; }
  bool downstream_empty() const;

  friend bool operator==(const FamilyTree&, const FamilyTree&) = default;
};

// Built-in transform behaviors a process entry can bind to.
enum class Behavior {
  passthrough,
  upcs,
  narw,
  ord3,
  onht,
  bnry,
  b1010,
  nmbr,
  mnmx,
  splt,
  sp15,
  spl2,
  spl5,
  sp19,
  sbst,
  spl9,
  sp10,
  srch,
  nmcm,
  nmc7,
};

enum class OutputClass { numeric, categoric, boolean, passthrough };

struct BehaviorTraits {
  std::string_view name;
  OutputClass output;
  bool numeric_input;   // non-parsable cells are infill targets
  bool invertible;
  bool single_column;   // may feed offspring
};

const BehaviorTraits& traits(Behavior behavior);
std::optional<Behavior> parse_behavior(std::string_view name);
std::string_view to_string(OutputClass c);
std::optional<OutputClass> parse_output_class(std::string_view name);

struct ProcessEntry {
  std::string key;
  Behavior behavior = Behavior::passthrough;
  // Header token appended by this category; usually the key itself.
  std::string suffix;
  InfillKind default_infill = InfillKind::transform_default;
  OutputClass coltype_class = OutputClass::passthrough;

  friend bool operator==(const ProcessEntry&, const ProcessEntry&) = default;
};

// Keys must be non-empty and free of underscore, comma and whitespace.
bool valid_category_key(std::string_view key);

class Registry {
 public:
  // Alias resolution ("text" -> "onht"); unknown keys come back unchanged.
  std::string resolve(std::string_view key) const;

  bool contains(std::string_view key) const;
  // Both throw ConfigError naming the key when it is not registered. A key
  // with a process entry but no tree has an empty tree.
  const FamilyTree& tree(std::string_view key) const;
  const ProcessEntry& process(std::string_view key) const;

  void set_tree(const std::string& key, FamilyTree tree);
  void set_process(ProcessEntry entry);
  void set_alias(const std::string& alias, const std::string& target);

  const std::map<std::string, FamilyTree>& trees() const { return trees_; }
  const std::map<std::string, ProcessEntry>& processes() const { return processes_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }

  friend bool operator==(const Registry&, const Registry&) = default;

 private:
  std::map<std::string, FamilyTree> trees_;
  std::map<std::string, ProcessEntry> processes_;
  std::map<std::string, std::string> aliases_;
};

Registry builtin_registry();

struct RegistryOverrides {
  std::map<std::string, FamilyTree> trees;
  std::map<std::string, ProcessEntry> entries;
};

// User trees and entries shadow the base key-by-key. Throws ConfigError on
// dangling references, keys without a process entry, or any error-severity
// validation diagnostic.
Registry merge_overrides(const Registry& base, const RegistryOverrides& overrides);

struct Diagnostic {
  enum class Severity { warning, error };
  Severity severity;
  std::string key;
  std::string message;
};

inline constexpr int kDefaultMaxDepth = 16;

std::vector<Diagnostic> validate_registry(const Registry& reg, int max_depth = kDefaultMaxDepth);

// JSON shapes: {"transformdict": {key: {slot: [keys]}}, "processdict":
// {key: {"behavior": name, "suffix": token, "infill": kind, "coltype": class}}}.
RegistryOverrides parse_overrides(const nlohmann::json& transformdict, const nlohmann::json& processdict);
nlohmann::json registry_to_json(const Registry& reg);
Registry registry_from_json(const nlohmann::json& doc);

}  // namespace parsemunge
