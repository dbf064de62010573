#include "parsemunge/treeengine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <set>
#include <sstream>

#include "parsemunge/encoders.hpp"
#include "parsemunge/error.hpp"
#include "parsemunge/parallel.hpp"
#include "parsemunge/strmap.hpp"

namespace parsemunge {
namespace {

using nlohmann::json;

// Raw outputs and infill masks of each step, indexed like SourceRecord::steps.
// Deques keep earlier columns in place while offspring are appended.
struct StepState {
  std::deque<std::vector<Column>> outputs;
  std::deque<Mask> masks;
};

Mask step_mask(const Mask& in, std::span<const CellValue> input, Behavior behavior) {
  if (behavior == Behavior::narw) return Mask(in.size(), 0);
  Mask out = in;
  const bool numeric = traits(behavior).numeric_input;
  for (std::size_t r = 0; r < input.size(); ++r) {
    if (input[r].is_missing() || (numeric && !numeric_value(input[r]))) out[r] = 1;
  }
  return out;
}

std::string header_for(const std::string& input, const std::string& suffix, const std::string& token) {
  std::string h = input + "_" + suffix;
  if (!token.empty()) h += "_" + token;
  return h;
}

void merge_into(json& target, const json& layer) {
  if (!layer.is_object()) return;
  for (const auto& [name, value] : layer.items()) target[name] = value;
}

json resolve_params(const json& assignparam, const std::string& category, const std::string& source,
                    Behavior behavior) {
  json params = json::object();
  if (!assignparam.is_object()) return params;
  if (auto g = assignparam.find("global_assignparam"); g != assignparam.end() && g->is_object()) {
    const auto accepted = accepted_params(behavior);
    for (const auto& [name, value] : g->items()) {
      if (std::find(accepted.begin(), accepted.end(), name) != accepted.end()) params[name] = value;
    }
  }
  if (auto d = assignparam.find("default_assignparam"); d != assignparam.end() && d->is_object()) {
    if (auto c = d->find(category); c != d->end()) merge_into(params, *c);
  }
  if (auto c = assignparam.find(category); c != assignparam.end() && c->is_object()) {
    if (auto s = c->find(source); s != c->end()) merge_into(params, *s);
  }
  return params;
}

template <class E>
[[noreturn]] void rethrow_with(const E& e, const std::string& prefix) {
  throw E(prefix + e.what());
}

SourceProfile profile_of(const Column& col) {
  SourceProfile p;
  p.coltype = infer_coltype(col);
  p.rows = col.size();
  for (const auto& cell : col) {
    if (cell.is_missing()) ++p.missing;
  }
  if (p.coltype == ColType::numeric) {
    auto fit = encoders::nmbr_fit(col);
    p.mean = fit.mean;
    p.std = fit.std;
  }
  auto ranked = encoders::rank_entries(col);
  for (std::size_t i = 0; i < ranked.size(); ++i) p.freq.emplace_back(ranked.entries[i], ranked.counts[i]);
  return p;
}

class Traversal {
 public:
  Traversal(const Registry& reg, const Options& opts, SourceRecord& rec, StepState& state, const Column& source,
            const Mask& root_mask)
      : reg_(reg), opts_(opts), rec_(rec), state_(state), source_(source), root_mask_(root_mask) {}

  // Applies the upstream (root) or downstream slots of `key` to the output
  // of step `parent`. Returns whether that input survives, i.e. no
  // replacement slot held an entry.
  bool expand(int parent, const std::string& key, bool as_root, const std::string& header, int depth) {
    const FamilyTree& tree = reg_.tree(key);
    const auto& slots = as_root ? kUpstreamSlots : kDownstreamSlots;
    bool replaced = false;
    for (Slot slot : slots) {
      for (const auto& child : tree[slot]) {
        const std::span<const CellValue> input =
            parent < 0 ? std::span<const CellValue>(source_) : std::span<const CellValue>(state_.outputs[parent][0]);
        const Mask& in_mask = parent < 0 ? root_mask_ : state_.masks[parent];
        const ProcessEntry& entry = reg_.process(child);

        StepRecord step;
        step.category = entry.key;
        step.input = parent;
        step.input_header = header;
        step.fit = fit_column(entry.behavior, input,
                              resolve_params(opts_.assignparam, entry.key, rec_.header, entry.behavior),
                              rec_.numeric_root);
        StepOutput out = apply_column(step.fit, input);
        for (const auto& token : out.tokens) step.output_headers.push_back(header_for(header, entry.suffix, token));

        const int index = static_cast<int>(rec_.steps.size());
        state_.masks.push_back(step_mask(in_mask, input, entry.behavior));
        state_.outputs.push_back(std::move(out.columns));
        rec_.steps.push_back(std::move(step));

        const SlotSemantics sem = semantics(slot);
        if (!sem.retain_source) replaced = true;
        if (!sem.offspring) {
          rec_.steps[index].retained = true;
          continue;
        }
        if (state_.outputs[index].size() != 1) {
          throw ConfigError("category \"" + entry.key + "\" returns " +
                            std::to_string(state_.outputs[index].size()) + " columns and cannot bear offspring");
        }
        if (depth + 1 > opts_.max_depth) {
          throw ConfigError("family tree of root \"" + rec_.root + "\" exceeds max depth " +
                            std::to_string(opts_.max_depth));
        }
        const std::string child_header = rec_.steps[index].output_headers[0];
        rec_.steps[index].retained = expand(index, entry.key, false, child_header, depth + 1);
      }
    }
    return !replaced;
  }

 private:
  const Registry& reg_;
  const Options& opts_;
  SourceRecord& rec_;
  StepState& state_;
  const Column& source_;
  const Mask& root_mask_;
};

// Infill over retained step outputs. With `fitting` set the stats are
// computed from these (train) outputs and stored in the record.
void finish_infill(SourceRecord& rec, StepState& state, const Registry& reg, const Options& opts, bool fitting) {
  std::optional<InfillKind> assigned;
  if (auto it = opts.assigninfill.find(rec.header); it != opts.assigninfill.end()) assigned = it->second;
  bool mean_like_used = false;
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    auto& step = rec.steps[i];
    if (!step.retained) continue;
    if (fitting) {
      InfillKind kind = assigned ? *assigned : reg.process(step.category).default_infill;
      const bool numeric_output = traits(step.fit.behavior).output == OutputClass::numeric;
      const bool mean_like = kind == InfillKind::mean || kind == InfillKind::median;
      // a source-level mean/median reaches only the numeric-output columns
      if (mean_like && assigned && !numeric_output) kind = InfillKind::transform_default;
      if (mean_like && kind != InfillKind::transform_default) mean_like_used = true;
      step.infill = kind;
      step.infill_stats = infill::fit_infill(kind, state.outputs[i], state.masks[i], numeric_output);
    }
    infill::apply_infill(step.infill, state.outputs[i], state.masks[i], step.infill_stats);
  }
  if (fitting && assigned && (*assigned == InfillKind::mean || *assigned == InfillKind::median) && !mean_like_used) {
    throw ConfigError(std::string(to_string(*assigned)) + " assigned to \"" + rec.header +
                      "\" but none of its returned columns is numeric");
  }
}

struct SourceWork {
  SourceRecord rec;
  // returned columns: (step index or -1 for the raw source, column index)
  std::vector<std::pair<int, std::size_t>> slots;
  std::vector<Column> columns;
};

void collect_returned(SourceWork& work, StepState& state, const Column& source) {
  if (work.rec.retain_source) {
    work.slots.emplace_back(-1, 0);
    work.columns.push_back(source);
  }
  for (std::size_t i = 0; i < work.rec.steps.size(); ++i) {
    if (!work.rec.steps[i].retained) continue;
    for (std::size_t c = 0; c < state.outputs[i].size(); ++c) {
      work.slots.emplace_back(static_cast<int>(i), c);
      work.columns.push_back(std::move(state.outputs[i][c]));
    }
  }
}

std::string label_root(const Column& col) {
  const ColType type = infer_coltype(col);
  if (type != ColType::categoric) return "excl";
  return column_stats(col).n_unique == 2 ? "bnry" : "ord3";
}

SourceWork fit_source(const Column& source, SourceRecord rec, const Registry& reg, const Options& opts) {
  SourceWork work;
  StepState state;
  rec.profile = profile_of(source);
  const Mask root_mask = infill::mark_targets(source, rec.numeric_root);
  if (rec.is_label) {
    const ProcessEntry& entry = reg.process(rec.root);
    StepRecord step;
    step.category = entry.key;
    step.input_header = rec.header;
    step.fit = fit_column(entry.behavior, source, json::object(), false);
    StepOutput out = apply_column(step.fit, source);
    for (const auto& token : out.tokens) step.output_headers.push_back(header_for(rec.header, entry.suffix, token));
    step.retained = true;
    state.outputs.push_back(std::move(out.columns));
    state.masks.push_back(Mask(source.size(), 0));
    rec.steps.push_back(std::move(step));
  } else {
    Traversal traversal(reg, opts, rec, state, source, root_mask);
    rec.retain_source = traversal.expand(-1, rec.root, true, rec.header, 0);
    finish_infill(rec, state, reg, opts, true);
  }
  work.rec = std::move(rec);
  collect_returned(work, state, source);
  return work;
}

std::string next_free(const std::string& header, const std::set<std::string>& used) {
  for (int k = 1;; ++k) {
    std::string candidate = header + "_" + std::to_string(k);
    if (!used.count(candidate)) return candidate;
  }
}

// Step columns of one source replayed on new data, in returned order.
std::vector<Column> replay_source(const SourceRecord& rec, const Column& source) {
  StepState state;
  const Mask root_mask = rec.is_label ? Mask(source.size(), 0) : infill::mark_targets(source, rec.numeric_root);
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    const auto& step = rec.steps[i];
    if (step.input >= static_cast<int>(i)) throw DataError("artifact step references a later step");
    const std::span<const CellValue> input = step.input < 0
                                                 ? std::span<const CellValue>(source)
                                                 : std::span<const CellValue>(state.outputs[step.input].at(0));
    const Mask& in_mask = step.input < 0 ? root_mask : state.masks[step.input];
    StepOutput out = apply_column(step.fit, input);
    if (out.columns.size() != step.output_headers.size()) {
      throw DataError("step \"" + step.category + "\" of \"" + rec.header + "\" returned " +
                      std::to_string(out.columns.size()) + " columns, artifact records " +
                      std::to_string(step.output_headers.size()));
    }
    state.masks.push_back(rec.is_label ? Mask(source.size(), 0) : step_mask(in_mask, input, step.fit.behavior));
    state.outputs.push_back(std::move(out.columns));
  }
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    const auto& step = rec.steps[i];
    if (step.retained) infill::apply_infill(step.infill, state.outputs[i], state.masks[i], step.infill_stats);
  }
  std::vector<Column> returned;
  if (rec.retain_source) returned.push_back(source);
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    if (!rec.steps[i].retained) continue;
    for (auto& col : state.outputs[i]) returned.push_back(std::move(col));
  }
  return returned;
}

// Serialization.

json options_json(const Options& o) {
  json infill = json::object();
  for (const auto& [header, kind] : o.assigninfill) infill[header] = std::string(to_string(kind));
  return {{"threshold", o.threshold},
          {"seed", o.seed},
          {"passthrough_unassigned", o.passthrough_unassigned},
          {"labels_column", o.labels_column ? json(*o.labels_column) : json(nullptr)},
          {"assignparam", o.assignparam},
          {"assigninfill", infill},
          {"max_depth", o.max_depth}};
}

InfillKind kind_from(const json& j) {
  const auto name = j.get<std::string>();
  auto kind = parse_infill_kind(name);
  if (!kind) throw DataError("unknown infill kind \"" + name + "\"");
  return *kind;
}

Options options_from(const json& j) {
  Options o;
  o.threshold = j.at("threshold").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.passthrough_unassigned = j.at("passthrough_unassigned").get<bool>();
  if (!j.at("labels_column").is_null()) o.labels_column = j.at("labels_column").get<std::string>();
  o.assignparam = j.at("assignparam");
  for (const auto& [header, kind] : j.at("assigninfill").items()) o.assigninfill[header] = kind_from(kind);
  o.max_depth = j.at("max_depth").get<int>();
  return o;
}

ColType coltype_from(const std::string& name) {
  for (ColType t : {ColType::numeric, ColType::categoric, ColType::all_missing}) {
    if (to_string(t) == name) return t;
  }
  throw DataError("unknown column type \"" + name + "\"");
}

json profile_json(const SourceProfile& p) {
  json freq = json::array();
  for (const auto& [value, count] : p.freq) freq.push_back(json::array({value, count}));
  return {{"coltype", std::string(to_string(p.coltype))},
          {"rows", p.rows},
          {"missing", p.missing},
          {"mean", p.mean},
          {"std", p.std},
          {"freq", freq}};
}

SourceProfile profile_from(const json& j) {
  SourceProfile p;
  p.coltype = coltype_from(j.at("coltype").get<std::string>());
  p.rows = j.at("rows").get<std::size_t>();
  p.missing = j.at("missing").get<std::size_t>();
  p.mean = j.at("mean").get<double>();
  p.std = j.at("std").get<double>();
  for (const auto& pair : j.at("freq")) {
    p.freq.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::size_t>());
  }
  return p;
}

json step_json(const StepRecord& s) {
  json stats = json::array();
  for (const auto& v : s.infill_stats.values) stats.push_back(cell_to_json(v));
  return {{"category", s.category},
          {"input", s.input},
          {"input_header", s.input_header},
          {"output_headers", s.output_headers},
          {"fit", to_json(s.fit)},
          {"retained", s.retained},
          {"infill", {{"kind", std::string(to_string(s.infill))}, {"stats", stats}}}};
}

StepRecord step_from(const json& j) {
  StepRecord s;
  s.category = j.at("category").get<std::string>();
  s.input = j.at("input").get<int>();
  s.input_header = j.at("input_header").get<std::string>();
  s.output_headers = j.at("output_headers").get<std::vector<std::string>>();
  s.fit = column_fit_from_json(j.at("fit"));
  s.retained = j.at("retained").get<bool>();
  s.infill = kind_from(j.at("infill").at("kind"));
  for (const auto& v : j.at("infill").at("stats")) s.infill_stats.values.push_back(cell_from_json(v));
  return s;
}

json source_json(const SourceRecord& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(step_json(s));
  return {{"position", r.position},         {"root", r.root},   {"numeric_root", r.numeric_root},
          {"retain_source", r.retain_source}, {"is_label", r.is_label}, {"profile", profile_json(r.profile)},
          {"steps", steps}};
}

SourceRecord source_from(const std::string& header, const json& j) {
  SourceRecord r;
  r.header = header;
  r.position = j.at("position").get<std::size_t>();
  r.root = j.at("root").get<std::string>();
  r.numeric_root = j.at("numeric_root").get<bool>();
  r.retain_source = j.at("retain_source").get<bool>();
  r.is_label = j.at("is_label").get<bool>();
  r.profile = profile_from(j.at("profile"));
  for (const auto& s : j.at("steps")) r.steps.push_back(step_from(s));
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    if (r.steps[i].input >= static_cast<int>(i) || r.steps[i].input < -1) {
      throw DataError("step " + std::to_string(i) + " of \"" + header + "\" has an invalid input index");
    }
  }
  return r;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

int inversion_rank(Behavior b) {
  switch (b) {
    case Behavior::b1010:
      return 0;
    case Behavior::onht:
      return 1;
    case Behavior::bnry:
      return 2;
    case Behavior::ord3:
      return 3;
    case Behavior::mnmx:
      return 4;
    case Behavior::nmbr:
      return 5;
    case Behavior::passthrough:
    case Behavior::upcs:
      return 6;
    default:
      return -1;
  }
}

// Every ancestor must be lossless apart from case folding.
bool clean_chain(const SourceRecord& rec, int index) {
  for (int p = rec.steps[index].input; p >= 0; p = rec.steps[p].input) {
    const Behavior b = rec.steps[p].fit.behavior;
    if (b != Behavior::upcs && b != Behavior::passthrough) return false;
  }
  return true;
}

template <class T>
const T& fit_as(const StepRecord& step) {
  if (auto* p = std::get_if<T>(&step.fit.params)) return *p;
  throw DataError("fit parameters of \"" + step.category + "\" do not match its behavior");
}

Column decode_step(const StepRecord& step, const std::vector<Column>& group) {
  switch (step.fit.behavior) {
    case Behavior::b1010:
      return encoders::b1010_decode(fit_as<encoders::CodeMap>(step), group);
    case Behavior::onht:
      return encoders::onht_decode(fit_as<encoders::CodeMap>(step), group);
    case Behavior::bnry:
      return encoders::bnry_decode(fit_as<encoders::BinaryMap>(step), group.at(0));
    case Behavior::ord3:
      return encoders::ord3_decode(fit_as<encoders::CodeMap>(step), group.at(0));
    case Behavior::mnmx:
      return encoders::mnmx_invert(fit_as<encoders::MinMaxFit>(step), group.at(0));
    case Behavior::nmbr:
      return encoders::nmbr_invert(fit_as<encoders::NormFit>(step), group.at(0));
    default:
      return group.at(0);
  }
}

}  // namespace

std::vector<std::string> returned_headers(const SourceRecord& rec) {
  std::vector<std::string> out;
  if (rec.retain_source) out.push_back(rec.header);
  for (const auto& step : rec.steps) {
    if (!step.retained) continue;
    out.insert(out.end(), step.output_headers.begin(), step.output_headers.end());
  }
  return out;
}

std::vector<const SourceRecord*> FitArtifact::sources() const {
  std::vector<const SourceRecord*> out;
  for (const auto& [header, rec] : per_source) out.push_back(&rec);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->position < b->position; });
  return out;
}

const SourceRecord* FitArtifact::label_source() const {
  for (const auto& [header, rec] : per_source) {
    if (rec.is_label) return &rec;
  }
  return nullptr;
}

std::vector<std::string> FitArtifact::label_headers() const {
  const SourceRecord* label = label_source();
  return label ? returned_headers(*label) : std::vector<std::string>{};
}

FitResult fit(const TidyTable& train, const std::map<std::string, std::string>& assignments, const Registry& reg,
              const Options& opts) {
  if (train.row_count() == 0 || train.column_count() == 0) throw DataError("empty train table");
  for (const auto& d : validate_registry(reg, opts.max_depth)) {
    if (d.severity == Diagnostic::Severity::error) throw ConfigError("registry: " + d.message);
  }
  for (const auto& [header, root] : assignments) {
    if (!train.contains(header)) throw ConfigError("assigned column \"" + header + "\" is not in the train table");
    if (!reg.contains(root)) throw ConfigError("unknown root category \"" + root + "\" for column \"" + header + "\"");
  }
  if (opts.labels_column && !train.contains(*opts.labels_column)) {
    throw ConfigError("labels_column \"" + *opts.labels_column + "\" is not in the train table");
  }
  for (const auto& [header, kind] : opts.assigninfill) {
    if (!train.contains(header)) throw ConfigError("assigninfill column \"" + header + "\" is not in the train table");
  }

  std::vector<SourceRecord> pending;
  for (std::size_t c = 0; c < train.column_count(); ++c) {
    SourceRecord rec;
    rec.header = train.headers()[c];
    rec.position = c;
    const Column& col = train.column(c);
    if (opts.labels_column && rec.header == *opts.labels_column) {
      if (assignments.count(rec.header)) throw ConfigError("labels_column \"" + rec.header + "\" is also assigned");
      rec.is_label = true;
      rec.root = label_root(col);
    } else if (auto it = assignments.find(rec.header); it != assignments.end()) {
      rec.root = reg.resolve(it->second);
    } else if (opts.passthrough_unassigned) {
      rec.root = "excl";
    } else {
      rec.root = encoders::auto_root_select(infer_coltype(col), column_stats(col), opts.threshold);
    }
    rec.numeric_root = !rec.is_label && traits(reg.process(rec.root).behavior).numeric_input;
    pending.push_back(std::move(rec));
  }

  std::vector<SourceWork> works(pending.size());
  parallel_for(pending.size(), worker_count(opts.threads), [&](std::size_t i) {
    const std::string prefix = "column \"" + pending[i].header + "\": ";
    try {
      works[i] = fit_source(train.column(i), std::move(pending[i]), reg, opts);
    } catch (const ConfigError& e) {
      rethrow_with(e, prefix);
    } catch (const VersionError& e) {
      rethrow_with(e, prefix);
    } catch (const DataError& e) {
      rethrow_with(e, prefix);
    }
  });

  // Features first in column order, the label last.
  std::stable_partition(works.begin(), works.end(), [](const SourceWork& w) { return !w.rec.is_label; });

  std::set<std::string> used(train.headers().begin(), train.headers().end());
  for (auto& work : works) {
    for (auto& step : work.rec.steps) {
      for (auto& h : step.output_headers) {
        if (used.count(h)) h = next_free(h, used);
        used.insert(h);
      }
    }
    for (auto& step : work.rec.steps) {
      if (step.input >= 0) step.input_header = work.rec.steps[step.input].output_headers.at(0);
    }
  }

  FitResult result;
  FitArtifact& art = result.artifact;
  art.options = opts;
  art.registry = reg;
  for (auto& work : works) {
    for (std::size_t k = 0; k < work.slots.size(); ++k) {
      const auto [step, c] = work.slots[k];
      const std::string& h = step < 0 ? work.rec.header : work.rec.steps[step].output_headers[c];
      art.output_order.push_back(h);
      art.infill_spec[h] = step < 0 ? InfillKind::transform_default : work.rec.steps[step].infill;
      result.encoded.add_column(h, std::move(work.columns[k]));
    }
    art.per_source.emplace(work.rec.header, std::move(work.rec));
  }
  return result;
}

TidyTable apply(const FitArtifact& artifact, const TidyTable& test, std::vector<std::string>* warnings) {
  std::vector<const SourceRecord*> active;
  for (const SourceRecord* rec : artifact.sources()) {
    if (test.contains(rec->header)) {
      active.push_back(rec);
    } else if (!rec->is_label) {
      throw DataError("test table is missing source column \"" + rec->header + "\"");
    }
  }
  if (warnings) {
    for (const auto& h : test.headers()) {
      if (!artifact.per_source.count(h)) warnings->push_back("ignoring column \"" + h + "\" absent at fit");
    }
  }

  std::vector<std::vector<Column>> replayed(active.size());
  parallel_for(active.size(), worker_count(artifact.options.threads), [&](std::size_t i) {
    replayed[i] = replay_source(*active[i], test.column(active[i]->header));
  });

  std::map<std::string, Column*> by_header;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto headers = returned_headers(*active[i]);
    for (std::size_t k = 0; k < headers.size(); ++k) by_header[headers[k]] = &replayed[i][k];
  }
  TidyTable out;
  for (const auto& h : artifact.output_order) {
    auto it = by_header.find(h);
    if (it == by_header.end()) continue;  // label column absent from test
    out.add_column(h, std::move(*it->second));
  }
  return out;
}

std::string serialize(const FitArtifact& artifact) {
  json per_source = json::object();
  for (const auto& [header, rec] : artifact.per_source) per_source[header] = source_json(rec);
  json infill_spec = json::object();
  for (const auto& [header, kind] : artifact.infill_spec) infill_spec[header] = std::string(to_string(kind));
  const json doc = {{"format_version", artifact.format_version},
                    {"options", options_json(artifact.options)},
                    {"registry_snapshot", registry_to_json(artifact.registry)},
                    {"per_source", per_source},
                    {"output_order", artifact.output_order},
                    {"infill_spec", infill_spec}};
  return doc.dump(2) + "\n";
}

FitArtifact deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed artifact: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw VersionError("artifact format version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kFormatVersion) + ")");
    }
    FitArtifact art;
    art.format_version = version;
    art.options = options_from(doc.at("options"));
    art.registry = registry_from_json(doc.at("registry_snapshot"));
    for (const auto& [header, rec] : doc.at("per_source").items()) {
      art.per_source.emplace(header, source_from(header, rec));
    }
    art.output_order = doc.at("output_order").get<std::vector<std::string>>();
    for (const auto& [header, kind] : doc.at("infill_spec").items()) art.infill_spec[header] = kind_from(kind);
    std::set<std::string> known;
    for (const auto& [header, rec] : art.per_source) {
      for (const auto& h : returned_headers(rec)) known.insert(h);
    }
    for (const auto& h : art.output_order) {
      if (!known.count(h)) throw DataError("output_order names unknown column \"" + h + "\"");
    }
    return art;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed artifact: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed artifact: ") + e.what());
  }
}

InversionResult invert(const FitArtifact& artifact, const TidyTable& encoded) {
  bool any_known = false;
  for (const auto& h : artifact.output_order) any_known = any_known || encoded.contains(h);
  if (!any_known) throw DataError("encoded table carries none of the artifact's columns");

  InversionResult result;
  for (const SourceRecord* rec : artifact.sources()) {
    if (rec->is_label) continue;
    int best = -2;
    int best_rank = 100;
    for (std::size_t i = 0; i < rec->steps.size(); ++i) {
      const auto& step = rec->steps[i];
      const int rank = inversion_rank(step.fit.behavior);
      if (!step.retained || rank < 0 || rank >= best_rank) continue;
      if (!clean_chain(*rec, static_cast<int>(i))) continue;
      const bool present = std::all_of(step.output_headers.begin(), step.output_headers.end(),
                                       [&](const std::string& h) { return encoded.contains(h); });
      if (!present) continue;
      best = static_cast<int>(i);
      best_rank = rank;
    }
    if (best == -2 && rec->retain_source && encoded.contains(rec->header)) best = -1;
    if (best == -2) {
      result.non_invertible.push_back(rec->header);
      continue;
    }

    Column values;
    if (best == -1) {
      values = encoded.column(rec->header);
      result.paths[rec->header] = rec->header;
    } else {
      const auto& step = rec->steps[best];
      std::vector<Column> group;
      for (const auto& h : step.output_headers) group.push_back(encoded.column(h));
      try {
        values = decode_step(step, group);
      } catch (const DataError& e) {
        throw DataError("column \"" + rec->header + "\": " + e.what());
      }
      result.paths[rec->header] = step.output_headers.front();
      const bool categoric = traits(step.fit.behavior).output != OutputClass::numeric;
      if (categoric && rec->profile.coltype == ColType::numeric) {
        for (auto& cell : values) {
          if (!cell.is_text()) continue;
          if (auto v = parse_decimal(cell.as_text())) cell = CellValue::number(*v);
        }
      }
    }
    for (const auto& step : rec->steps) {
      if (step.fit.behavior != Behavior::narw || step.input != -1 || !step.retained) continue;
      if (!encoded.contains(step.output_headers.front())) continue;
      const Column& flags = encoded.column(step.output_headers.front());
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (flags[r].is_number() && flags[r].as_number() == 1.0) values[r] = CellValue::missing();
      }
      break;
    }
    result.table.add_column(rec->header, std::move(values));
  }
  return result;
}

DriftReport drift_report(const FitArtifact& artifact, const TidyTable& fresh) {
  DriftReport report;
  for (const SourceRecord* rec : artifact.sources()) {
    if (rec->is_label || !fresh.contains(rec->header)) continue;
    const Column& col = fresh.column(rec->header);
    SourceDrift d;
    d.header = rec->header;
    if (rec->profile.coltype == ColType::numeric) {
      const auto now = encoders::nmbr_fit(col);
      NumericDrift n;
      n.train_mean = rec->profile.mean;
      n.train_std = rec->profile.std;
      n.new_mean = now.mean;
      n.new_std = now.std;
      n.mean_delta = std::abs(n.new_mean - n.train_mean);
      n.std_delta = std::abs(n.new_std - n.train_std);
      d.numeric = n;
    } else if (rec->profile.coltype == ColType::categoric) {
      const auto now = column_stats(col);
      std::size_t present = 0;
      for (const auto& [v, c] : now.freq) present += c;
      const std::size_t train_present = rec->profile.rows - rec->profile.missing;
      std::set<std::string> seen;
      for (const auto& [v, c] : rec->profile.freq) seen.insert(v);
      CategoricDrift cat;
      for (std::size_t i = 0; i < rec->profile.freq.size() && i < 10; ++i) {
        const auto& [value, count] = rec->profile.freq[i];
        FrequencyDrift f;
        f.value = value;
        f.train_freq = train_present ? static_cast<double>(count) / static_cast<double>(train_present) : 0.0;
        auto it = now.freq.find(value);
        const std::size_t new_count = it == now.freq.end() ? 0 : it->second;
        f.new_freq = present ? static_cast<double>(new_count) / static_cast<double>(present) : 0.0;
        f.delta = std::abs(f.new_freq - f.train_freq);
        cat.top.push_back(f);
      }
      std::size_t unseen = 0;
      for (const auto& [v, c] : now.freq) {
        if (!seen.count(v)) unseen += c;
      }
      cat.unseen_rate = present ? static_cast<double>(unseen) / static_cast<double>(present) : 0.0;
      d.categoric = cat;
    }
    report.sources.push_back(std::move(d));
  }
  return report;
}

nlohmann::json to_json(const DriftReport& report) {
  json sources = json::object();
  for (const auto& d : report.sources) {
    json entry = json::object();
    if (d.numeric) {
      const auto& n = *d.numeric;
      entry = {{"train_mean", n.train_mean}, {"train_std", n.train_std}, {"new_mean", n.new_mean},
               {"new_std", n.new_std},       {"mean_delta", n.mean_delta}, {"std_delta", n.std_delta}};
    } else if (d.categoric) {
      json top = json::array();
      for (const auto& f : d.categoric->top) {
        top.push_back({{"value", f.value}, {"train_freq", f.train_freq}, {"new_freq", f.new_freq}, {"delta", f.delta}});
      }
      entry = {{"top", top}, {"unseen_rate", d.categoric->unseen_rate}};
    }
    sources[d.header] = entry;
  }
  return {{"sources", sources}};
}

std::string render(const DriftReport& report) {
  std::ostringstream os;
  for (const auto& d : report.sources) {
    if (d.numeric) {
      const auto& n = *d.numeric;
      os << d.header << ": mean " << fixed(n.train_mean) << " -> " << fixed(n.new_mean) << " (delta "
         << fixed(n.mean_delta) << "), std " << fixed(n.train_std) << " -> " << fixed(n.new_std) << " (delta "
         << fixed(n.std_delta) << ")\n";
    } else if (d.categoric) {
      double worst = 0.0;
      for (const auto& f : d.categoric->top) worst = std::max(worst, f.delta);
      os << d.header << ": unseen rate " << fixed(d.categoric->unseen_rate) << ", max top-10 frequency delta "
         << fixed(worst) << "\n";
    } else {
      os << d.header << ": all missing at fit\n";
    }
  }
  return os.str();
}

std::string fit_summary(const FitArtifact& artifact) {
  std::ostringstream os;
  for (const SourceRecord* rec : artifact.sources()) {
    os << rec->header << (rec->is_label ? " [label]" : "") << "\n";
    os << "  root " << rec->root << ", " << to_string(rec->profile.coltype) << ", " << rec->profile.freq.size()
       << " unique, " << rec->profile.missing << " missing of " << rec->profile.rows << "\n";
    for (const auto& step : rec->steps) {
      int depth = 0;
      for (int p = step.input; p >= 0; p = rec->steps[p].input) ++depth;
      os << "  " << std::string(2 * depth, ' ') << step.category << " <- " << step.input_header
         << (step.retained ? "" : " (replaced)") << "\n";
    }
    os << "  returned:";
    for (const auto& h : returned_headers(*rec)) os << " " << h;
    os << "\n";
  }
  return os.str();
}

}  // namespace parsemunge
