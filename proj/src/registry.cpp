#include "parsemunge/registry.hpp"

#include <functional>
#include <set>

#include "parsemunge/error.hpp"

namespace parsemunge {
namespace {

constexpr std::array<std::string_view, 8> kSlotNames = {"parents",  "siblings",      "auntsuncles", "cousins",
                                                        "children", "niecesnephews", "coworkers",   "friends"};

using OC = OutputClass;

// name, output class, numeric input, invertible, single column
constexpr std::array<std::pair<Behavior, BehaviorTraits>, 20> kTraits = {{
    {Behavior::passthrough, {"excl", OC::passthrough, false, false, true}},
    {Behavior::upcs, {"UPCS", OC::passthrough, false, false, true}},
    {Behavior::narw, {"NArw", OC::boolean, false, false, true}},
    {Behavior::ord3, {"ord3", OC::categoric, false, true, true}},
    {Behavior::onht, {"onht", OC::boolean, false, true, false}},
    {Behavior::bnry, {"bnry", OC::boolean, false, true, true}},
    {Behavior::b1010, {"1010", OC::boolean, false, true, false}},
    {Behavior::nmbr, {"nmbr", OC::numeric, true, true, true}},
    {Behavior::mnmx, {"mnmx", OC::numeric, true, true, true}},
    {Behavior::splt, {"splt", OC::boolean, false, false, false}},
    {Behavior::sp15, {"sp15", OC::boolean, false, false, false}},
    {Behavior::spl2, {"spl2", OC::passthrough, false, false, true}},
    {Behavior::spl5, {"spl5", OC::passthrough, false, false, true}},
    {Behavior::sp19, {"sp19", OC::boolean, false, false, false}},
    {Behavior::sbst, {"sbst", OC::boolean, false, false, false}},
    {Behavior::spl9, {"spl9", OC::passthrough, false, false, true}},
    {Behavior::sp10, {"sp10", OC::passthrough, false, false, true}},
    {Behavior::srch, {"srch", OC::boolean, false, false, false}},
    {Behavior::nmcm, {"nmcm", OC::numeric, false, false, true}},
    {Behavior::nmc7, {"nmc7", OC::numeric, false, false, true}},
}};

constexpr std::array<std::string_view, 4> kClassNames = {"numeric", "categoric", "boolean", "passthrough"};

FamilyTree make_tree(std::initializer_list<std::pair<Slot, std::vector<std::string>>> entries) {
  FamilyTree tree;
  for (const auto& [slot, keys] : entries) tree[slot] = keys;
  return tree;
}

void add(Registry& reg, const std::string& key, Behavior behavior, FamilyTree tree, std::string suffix = {}) {
  ProcessEntry entry;
  entry.key = key;
  entry.behavior = behavior;
  entry.suffix = suffix.empty() ? key : std::move(suffix);
  entry.coltype_class = traits(behavior).output;
  reg.set_process(std::move(entry));
  reg.set_tree(key, std::move(tree));
}

// Single-step encoder with a NArw companion.
FamilyTree leaf_tree(const std::string& key) {
  return make_tree({{Slot::auntsuncles, {key}}, {Slot::cousins, {"NArw"}}});
}

const std::vector<std::string>& tree_slot(const FamilyTree& t, Slot s) { return t[s]; }

}  // namespace

std::string_view to_string(Slot slot) { return kSlotNames[static_cast<std::size_t>(slot)]; }

std::optional<Slot> parse_slot(std::string_view name) {
  for (std::size_t i = 0; i < kSlotNames.size(); ++i) {
    if (kSlotNames[i] == name) return kAllSlots[i];
  }
  return std::nullopt;
}

bool FamilyTree::downstream_empty() const {
  for (Slot s : kDownstreamSlots) {
    if (!(*this)[s].empty()) return false;
  }
  return true;
}

const BehaviorTraits& traits(Behavior behavior) {
  for (const auto& [b, t] : kTraits) {
    if (b == behavior) return t;
  }
  return kTraits.front().second;
}

std::optional<Behavior> parse_behavior(std::string_view name) {
  if (name == "text") return Behavior::onht;
  for (const auto& [b, t] : kTraits) {
    if (t.name == name) return b;
  }
  return std::nullopt;
}

std::string_view to_string(OutputClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<OutputClass> parse_output_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<OutputClass>(i);
  }
  return std::nullopt;
}

bool valid_category_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (c == '_' || c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

std::string Registry::resolve(std::string_view key) const {
  auto it = aliases_.find(std::string(key));
  return it == aliases_.end() ? std::string(key) : it->second;
}

bool Registry::contains(std::string_view key) const { return processes_.contains(resolve(key)); }

const FamilyTree& Registry::tree(std::string_view key) const {
  static const FamilyTree kEmpty;
  const std::string k = resolve(key);
  if (!processes_.contains(k)) throw ConfigError("unknown transformation category \"" + k + "\"");
  auto it = trees_.find(k);
  return it == trees_.end() ? kEmpty : it->second;
}

const ProcessEntry& Registry::process(std::string_view key) const {
  const std::string k = resolve(key);
  auto it = processes_.find(k);
  if (it == processes_.end()) throw ConfigError("unknown transformation category \"" + k + "\"");
  return it->second;
}

void Registry::set_tree(const std::string& key, FamilyTree tree) { trees_[key] = std::move(tree); }

void Registry::set_process(ProcessEntry entry) {
  const std::string key = entry.key;
  processes_[key] = std::move(entry);
}

void Registry::set_alias(const std::string& alias, const std::string& target) { aliases_[alias] = target; }

Registry builtin_registry() {
  Registry reg;
  add(reg, "excl", Behavior::passthrough, make_tree({{Slot::auntsuncles, {"excl"}}}));
  add(reg, "NArw", Behavior::narw, make_tree({{Slot::auntsuncles, {"NArw"}}}));
  for (const char* key : {"ord3", "onht", "bnry", "1010", "nmbr", "mnmx", "splt", "sp15", "sp19", "sbst", "srch"}) {
    add(reg, key, *parse_behavior(key), leaf_tree(key));
  }
  reg.set_alias("text", "onht");

  // replacement parsers feed an ordinal encoding
  add(reg, "spl2", Behavior::spl2,
      make_tree({{Slot::parents, {"spl2"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"ord3"}}}));
  add(reg, "spl5", Behavior::spl5,
      make_tree({{Slot::parents, {"spl5"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"ord3"}}}));
  add(reg, "sp10", Behavior::sp10,
      make_tree({{Slot::parents, {"sp10"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"ord3"}}}));
  add(reg, "spl9", Behavior::spl9,
      make_tree({{Slot::parents, {"spl9"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"ord3", "sp10"}}}));

  // numeric extraction followed by z-score
  for (const char* key : {"nmcm", "nmc7"}) {
    add(reg, key, *parse_behavior(key),
        make_tree({{Slot::parents, {key}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"nmbr"}}}));
  }
  add(reg, "nmc8", Behavior::nmc7,
      make_tree({{Slot::parents, {"nmc8"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"nmbr"}}}), "nmc7");

  // or19: uppercase, then a full-information binary branch, a numeric
  // extraction branch and two tiers of overlap replacement.
  add(reg, "UPCS", Behavior::upcs,
      make_tree({{Slot::auntsuncles, {"UPCS"}},
                 {Slot::cousins, {"NArw"}},
                 {Slot::children, {"nmc8", "spl9"}},
                 {Slot::friends, {"1010"}}}));
  add(reg, "or19", Behavior::upcs, make_tree({{Slot::parents, {"UPCS"}}, {Slot::cousins, {"NArw"}}}));
  reg.set_process([&] {
    ProcessEntry e = reg.process("or19");
    e.coltype_class = OutputClass::categoric;
    return e;
  }());

  // or20 inserts one more spl9 tier ahead of sp10
  add(reg, "spla", Behavior::spl9,
      make_tree({{Slot::parents, {"spla"}}, {Slot::cousins, {"NArw"}}, {Slot::children, {"ord3", "spl9"}}}),
      "spl9");
  add(reg, "UPC2", Behavior::upcs,
      make_tree({{Slot::auntsuncles, {"UPC2"}},
                 {Slot::cousins, {"NArw"}},
                 {Slot::children, {"nmc8", "spla"}},
                 {Slot::friends, {"1010"}}}),
      "UPCS");
  add(reg, "or20", Behavior::upcs, make_tree({{Slot::parents, {"UPC2"}}, {Slot::cousins, {"NArw"}}}));
  reg.set_process([&] {
    ProcessEntry e = reg.process("or20");
    e.coltype_class = OutputClass::categoric;
    return e;
  }());
  return reg;
}

Registry merge_overrides(const Registry& base, const RegistryOverrides& overrides) {
  Registry merged = base;
  for (const auto& [key, entry] : overrides.entries) {
    if (!valid_category_key(key)) throw ConfigError("invalid category key \"" + key + "\"");
    if (entry.key != key) throw ConfigError("process entry key mismatch for \"" + key + "\"");
    if (!valid_category_key(entry.suffix)) {
      throw ConfigError("invalid suffix \"" + entry.suffix + "\" for category \"" + key + "\"");
    }
    merged.set_process(entry);
  }
  for (const auto& [key, tree] : overrides.trees) {
    if (!valid_category_key(key)) throw ConfigError("invalid category key \"" + key + "\"");
    if (!merged.processes().contains(merged.resolve(key))) {
      throw ConfigError("transformdict entry \"" + key + "\" has no processdict entry");
    }
    merged.set_tree(merged.resolve(key), tree);
  }
  for (const auto& [key, tree] : overrides.trees) {
    for (Slot slot : kAllSlots) {
      for (const auto& ref : tree[slot]) {
        if (!merged.contains(ref)) {
          throw ConfigError("transformdict entry \"" + key + "\" slot " + std::string(to_string(slot)) +
                            " references unknown category \"" + ref + "\"");
        }
      }
    }
  }
  for (const auto& d : validate_registry(merged)) {
    if (d.severity == Diagnostic::Severity::error) throw ConfigError("registry validation: " + d.message);
  }
  return merged;
}

std::vector<Diagnostic> validate_registry(const Registry& reg, int max_depth) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& key, std::string msg) {
    out.push_back({Diagnostic::Severity::error, key, std::move(msg)});
  };

  for (const auto& [key, tree] : reg.trees()) {
    if (!reg.processes().contains(key)) error(key, "category \"" + key + "\" has a tree but no process entry");
    for (Slot slot : kAllSlots) {
      for (const auto& ref : tree[slot]) {
        if (!reg.contains(ref)) {
          error(key, "dangling key \"" + ref + "\" in " + key + "." + std::string(to_string(slot)));
        }
      }
    }
  }

  // Longest offspring chain reachable from a category reached as offspring;
  // nullopt means unbounded (a cycle).
  std::map<std::string, std::optional<int>> depth_memo;
  std::set<std::string> on_stack;
  std::function<std::optional<int>(const std::string&)> offspring_depth = [&](const std::string& key) -> std::optional<int> {
    if (auto it = depth_memo.find(key); it != depth_memo.end()) return it->second;
    if (on_stack.contains(key)) return std::nullopt;
    on_stack.insert(key);
    std::optional<int> best = 0;
    auto it = reg.trees().find(key);
    if (it != reg.trees().end()) {
      for (Slot slot : kDownstreamSlots) {
        if (!semantics(slot).offspring) continue;
        for (const auto& ref : it->second[slot]) {
          if (!reg.contains(ref)) continue;
          auto d = offspring_depth(reg.resolve(ref));
          if (!d) {
            best = std::nullopt;
            break;
          }
          best = std::max(*best, *d + 1);
        }
        if (!best) break;
      }
    }
    on_stack.erase(key);
    depth_memo[key] = best;
    return best;
  };

  for (const auto& [key, entry] : reg.processes()) {
    const FamilyTree& tree = reg.tree(key);
    auto check_chain = [&](const std::string& ref, int base) {
      auto d = offspring_depth(ref);
      if (!d || *d + base > max_depth) {
        error(key, "offspring recursion from \"" + key + "\" exceeds max depth " + std::to_string(max_depth) +
                       (d ? "" : " (cycle through \"" + ref + "\")"));
        return false;
      }
      return true;
    };
    // reached as offspring
    if (!check_chain(key, 0)) continue;
    // used as a root
    for (Slot slot : kUpstreamSlots) {
      if (!semantics(slot).offspring) continue;
      for (const auto& ref : tree_slot(tree, slot)) {
        if (!reg.contains(ref)) continue;
        const std::string target = reg.resolve(ref);
        check_chain(target, 1);
        if (reg.tree(target).downstream_empty()) {
          out.push_back({Diagnostic::Severity::warning, key,
                         "\"" + target + "\" sits in offspring slot " + key + "." + std::string(to_string(slot)) +
                             " but has no downstream entries"});
        }
      }
    }
  }

  // offspring need a single input column
  for (const auto& [key, tree] : reg.trees()) {
    for (Slot slot : kAllSlots) {
      if (!semantics(slot).offspring) continue;
      for (const auto& ref : tree[slot]) {
        if (!reg.contains(ref)) continue;
        const auto& entry = reg.process(ref);
        if (!traits(entry.behavior).single_column && !reg.tree(ref).downstream_empty()) {
          error(key, "\"" + entry.key + "\" in " + key + "." + std::string(to_string(slot)) +
                         " produces multiple columns and cannot bear offspring");
        }
      }
    }
  }
  return out;
}

namespace {

FamilyTree tree_from_json(const std::string& key, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("transformdict entry \"" + key + "\" must be an object");
  FamilyTree tree;
  for (const auto& [slot_name, keys] : j.items()) {
    auto slot = parse_slot(slot_name);
    if (!slot) throw ConfigError("transformdict entry \"" + key + "\": unknown primitive \"" + slot_name + "\"");
    if (!keys.is_array()) throw ConfigError("transformdict entry \"" + key + "\"." + slot_name + " must be a list");
    for (const auto& k : keys) {
      if (!k.is_string()) throw ConfigError("transformdict entry \"" + key + "\"." + slot_name + " holds a non-string");
      tree[*slot].push_back(k.get<std::string>());
    }
  }
  return tree;
}

ProcessEntry entry_from_json(const std::string& key, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("processdict entry \"" + key + "\" must be an object");
  ProcessEntry entry;
  entry.key = key;
  entry.suffix = key;
  bool have_behavior = false;
  bool have_class = false;
  for (const auto& [field, value] : j.items()) {
    if (!value.is_string()) throw ConfigError("processdict entry \"" + key + "\"." + field + " must be a string");
    const auto text = value.get<std::string>();
    if (field == "behavior") {
      auto b = parse_behavior(text);
      if (!b) throw ConfigError("processdict entry \"" + key + "\": unknown behavior \"" + text + "\"");
      entry.behavior = *b;
      have_behavior = true;
    } else if (field == "suffix") {
      entry.suffix = text;
    } else if (field == "infill") {
      auto kind = parse_infill_kind(text);
      if (!kind) throw ConfigError("processdict entry \"" + key + "\": unknown infill \"" + text + "\"");
      entry.default_infill = *kind;
    } else if (field == "coltype") {
      auto c = parse_output_class(text);
      if (!c) throw ConfigError("processdict entry \"" + key + "\": unknown coltype \"" + text + "\"");
      entry.coltype_class = *c;
      have_class = true;
    } else {
      throw ConfigError("processdict entry \"" + key + "\": unknown field \"" + field + "\"");
    }
  }
  if (!have_behavior) throw ConfigError("processdict entry \"" + key + "\" needs a \"behavior\"");
  if (!have_class) entry.coltype_class = traits(entry.behavior).output;
  return entry;
}

}  // namespace

RegistryOverrides parse_overrides(const nlohmann::json& transformdict, const nlohmann::json& processdict) {
  RegistryOverrides out;
  if (!transformdict.is_null()) {
    if (!transformdict.is_object()) throw ConfigError("transformdict must be an object");
    for (const auto& [key, tree] : transformdict.items()) out.trees[key] = tree_from_json(key, tree);
  }
  if (!processdict.is_null()) {
    if (!processdict.is_object()) throw ConfigError("processdict must be an object");
    for (const auto& [key, entry] : processdict.items()) out.entries[key] = entry_from_json(key, entry);
  }
  return out;
}

nlohmann::json registry_to_json(const Registry& reg) {
  nlohmann::json doc;
  nlohmann::json trees = nlohmann::json::object();
  for (const auto& [key, tree] : reg.trees()) {
    nlohmann::json t = nlohmann::json::object();
    for (Slot slot : kAllSlots) t[std::string(to_string(slot))] = tree[slot];
    trees[key] = std::move(t);
  }
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [key, e] : reg.processes()) {
    entries[key] = {{"behavior", std::string(traits(e.behavior).name)},
                    {"suffix", e.suffix},
                    {"infill", std::string(to_string(e.default_infill))},
                    {"coltype", std::string(to_string(e.coltype_class))}};
  }
  doc["transformdict"] = std::move(trees);
  doc["processdict"] = std::move(entries);
  doc["aliases"] = reg.aliases();
  return doc;
}

Registry registry_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("registry snapshot must be an object");
  Registry reg;
  try {
    auto overrides = parse_overrides(doc.at("transformdict"), doc.at("processdict"));
    for (auto& [key, entry] : overrides.entries) reg.set_process(std::move(entry));
    for (auto& [key, tree] : overrides.trees) reg.set_tree(key, std::move(tree));
    for (const auto& [alias, target] : doc.at("aliases").items()) reg.set_alias(alias, target.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed registry snapshot: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed registry snapshot: ") + e.what());
  }
  return reg;
}

}  // namespace parsemunge
