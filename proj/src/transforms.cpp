#include "parsemunge/transforms.hpp"

#include <algorithm>

#include "parsemunge/error.hpp"
#include "parsemunge/text.hpp"

namespace parsemunge {
namespace {

using nlohmann::json;

const std::vector<std::string_view> kScanParams = {"min_len", "minsplit", "exclude_space_punct", "exclude_chars",
                                                   "fast_scan"};

std::string where(Behavior b, std::string_view param) {
  return std::string(traits(b).name) + " parameter \"" + std::string(param) + "\"";
}

void check_known(Behavior b, const json& params) {
  if (params.is_null()) return;
  if (!params.is_object()) throw ConfigError(std::string(traits(b).name) + " parameters must be an object");
  const auto names = accepted_params(b);
  for (const auto& [name, value] : params.items()) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("unknown " + where(b, name));
    }
  }
}

bool flag(Behavior b, const json& params, std::string_view name, bool fallback) {
  if (!params.is_object() || !params.contains(name)) return fallback;
  const auto& v = params.at(std::string(name));
  if (!v.is_boolean()) throw ConfigError(where(b, name) + " must be a boolean");
  return v.get<bool>();
}

std::optional<std::string> text_param(Behavior b, const json& params, std::string_view name) {
  if (!params.is_object() || !params.contains(name)) return std::nullopt;
  const auto& v = params.at(std::string(name));
  if (!v.is_string()) throw ConfigError(where(b, name) + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(Behavior b, const json& v, std::string_view name) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError(where(b, name) + " must be a string or a list of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(where(b, name) + " must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

stringparse::OverlapScanConfig scan_config(Behavior b, const json& params) {
  stringparse::OverlapScanConfig cfg;
  const std::size_t floor = b == Behavior::sbst ? 1 : 2;
  for (const char* name : {"min_len", "minsplit"}) {
    if (!params.is_object() || !params.contains(name)) continue;
    const auto& v = params.at(name);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(floor)) {
      throw ConfigError(where(b, name) + " must be an integer >= " + std::to_string(floor));
    }
    cfg.min_len = static_cast<std::size_t>(v.get<long long>());
  }
  if (flag(b, params, "exclude_space_punct", false)) cfg.exclude_chars = stringparse::space_and_punctuation();
  if (auto extra = text_param(b, params, "exclude_chars")) cfg.exclude_chars += *extra;
  if (flag(b, params, "fast_scan", false)) cfg.strategy = stringparse::ScanStrategy::indexed;
  return cfg;
}

extract::NumberFormat number_format(Behavior b, const json& params) {
  extract::NumberFormat f;
  f.allow_commas = flag(b, params, "allow_commas", f.allow_commas);
  f.allow_decimal = flag(b, params, "allow_decimal", f.allow_decimal);
  f.allow_negative = flag(b, params, "allow_negative", f.allow_negative);
  return f;
}

extract::SearchSpec search_spec(const json& params) {
  constexpr Behavior b = Behavior::srch;
  std::vector<std::string> terms;
  std::vector<std::vector<std::string>> aggregates;
  if (params.is_object() && params.contains("search")) terms = string_list(b, params.at("search"), "search");
  if (params.is_object() && params.contains("aggregate")) {
    const auto& agg = params.at("aggregate");
    if (!agg.is_array()) throw ConfigError(where(b, "aggregate") + " must be a list of lists");
    for (const auto& group : agg) aggregates.push_back(string_list(b, group, "aggregate"));
  }
  return extract::make_search_spec(terms, aggregates, flag(b, params, "ordinal", false),
                                   flag(b, params, "case_sensitive", false));
}

std::vector<std::string> index_tokens(std::size_t n, std::size_t first) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i + first));
  return out;
}

std::vector<std::string> text_tokens(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string token = sanitize_token(labels[i]);
    out.push_back(token.empty() ? std::to_string(i) : token);
  }
  return out;
}

StepOutput single(Column col) {
  StepOutput out;
  out.tokens.emplace_back();
  out.columns.push_back(std::move(col));
  return out;
}

StepOutput multi(std::vector<std::string> tokens, std::vector<Column> cols) {
  return StepOutput{std::move(tokens), std::move(cols)};
}

template <class T>
const T& params_as(const ColumnFit& fit) {
  if (auto* p = std::get_if<T>(&fit.params)) return *p;
  throw DataError(std::string("fit parameters do not match behavior ") + std::string(traits(fit.behavior).name));
}

// JSON codecs for each fit shape.

json codemap_json(const encoders::CodeMap& m) { return {{"entries", m.entries}, {"counts", m.counts}}; }

encoders::CodeMap codemap_from(const json& j) {
  encoders::CodeMap m;
  m.entries = j.at("entries").get<std::vector<std::string>>();
  m.counts = j.at("counts").get<std::vector<std::size_t>>();
  if (m.entries.size() != m.counts.size()) throw DataError("code map entries and counts differ in length");
  return m;
}

json activation_json(const stringparse::ActivationFit& f) {
  json active = json::object();
  for (const auto& [entry, cols] : f.active) active[entry] = cols;
  return {{"columns", f.columns}, {"active", active}};
}

stringparse::ActivationFit activation_from(const json& j) {
  stringparse::ActivationFit f;
  f.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& [entry, cols] : j.at("active").items()) {
    f.active[entry] = cols.get<std::vector<std::size_t>>();
    for (auto c : f.active[entry]) {
      if (c >= f.columns.size()) throw DataError("activation index out of range");
    }
  }
  return f;
}

json params_json(const FitParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PassFit>) {
          return json::object();
        } else if constexpr (std::is_same_v<T, UpcsFit>) {
          return {{"active", p.active}};
        } else if constexpr (std::is_same_v<T, NarwFit>) {
          return {{"numeric_targets", p.numeric_targets}};
        } else if constexpr (std::is_same_v<T, encoders::CodeMap>) {
          return codemap_json(p);
        } else if constexpr (std::is_same_v<T, encoders::BinaryMap>) {
          return {{"one", p.one}, {"zero", p.zero}};
        } else if constexpr (std::is_same_v<T, encoders::NormFit>) {
          return {{"mean", p.mean}, {"std", p.std}};
        } else if constexpr (std::is_same_v<T, encoders::MinMaxFit>) {
          return {{"min", p.min}, {"max", p.max}, {"mean", p.mean}};
        } else if constexpr (std::is_same_v<T, stringparse::ActivationFit>) {
          return activation_json(p);
        } else if constexpr (std::is_same_v<T, stringparse::PatternFit>) {
          return {{"activations", activation_json(p.activations)}, {"patterns", codemap_json(p.patterns)}};
        } else if constexpr (std::is_same_v<T, stringparse::ReplaceFit>) {
          json assignment = json::object();
          for (const auto& [entry, overlap] : p.assignment) assignment[entry] = overlap;
          return {{"assignment", assignment},
                  {"search_unseen", p.search_unseen},
                  {"overlaps", p.overlaps},
                  {"plug", p.plug ? json(*p.plug) : json(nullptr)}};
        } else if constexpr (std::is_same_v<T, extract::NumericExtractFit>) {
          json lookup = json::object();
          for (const auto& [entry, value] : p.lookup) lookup[entry] = value ? json(*value) : json(nullptr);
          return {{"lookup", lookup},
                  {"format",
                   {{"allow_commas", p.format.allow_commas},
                    {"allow_decimal", p.format.allow_decimal},
                    {"allow_negative", p.format.allow_negative}}}};
        } else {
          json groups = json::array();
          for (const auto& g : p.groups) groups.push_back({{"label", g.label}, {"terms", g.terms}});
          return {{"groups", groups}, {"ordinal", p.ordinal}, {"case_sensitive", p.case_sensitive}};
        }
      },
      params);
}

FitParams params_from(Behavior b, const json& j) {
  switch (b) {
    case Behavior::passthrough:
      return PassFit{};
    case Behavior::upcs:
      return UpcsFit{j.at("active").get<bool>()};
    case Behavior::narw:
      return NarwFit{j.at("numeric_targets").get<bool>()};
    case Behavior::ord3:
    case Behavior::onht:
    case Behavior::b1010:
      return codemap_from(j);
    case Behavior::bnry:
      return encoders::BinaryMap{j.at("one").get<std::string>(), j.at("zero").get<std::string>()};
    case Behavior::nmbr:
      return encoders::NormFit{j.at("mean").get<double>(), j.at("std").get<double>()};
    case Behavior::mnmx:
      return encoders::MinMaxFit{j.at("min").get<double>(), j.at("max").get<double>(), j.at("mean").get<double>()};
    case Behavior::splt:
    case Behavior::sp15:
    case Behavior::sbst:
      return activation_from(j);
    case Behavior::sp19:
      return stringparse::PatternFit{activation_from(j.at("activations")), codemap_from(j.at("patterns"))};
    case Behavior::spl2:
    case Behavior::spl5:
    case Behavior::spl9:
    case Behavior::sp10: {
      stringparse::ReplaceFit f;
      for (const auto& [entry, overlap] : j.at("assignment").items()) f.assignment[entry] = overlap.get<std::string>();
      f.search_unseen = j.at("search_unseen").get<bool>();
      f.overlaps = j.at("overlaps").get<std::vector<std::string>>();
      if (!j.at("plug").is_null()) f.plug = j.at("plug").get<std::string>();
      return f;
    }
    case Behavior::nmcm:
    case Behavior::nmc7: {
      extract::NumericExtractFit f;
      for (const auto& [entry, value] : j.at("lookup").items()) {
        f.lookup[entry] = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      }
      const auto& fmt = j.at("format");
      f.format = {fmt.at("allow_commas").get<bool>(), fmt.at("allow_decimal").get<bool>(),
                  fmt.at("allow_negative").get<bool>()};
      return f;
    }
    case Behavior::srch: {
      extract::SearchSpec s;
      for (const auto& g : j.at("groups")) {
        s.groups.push_back({g.at("label").get<std::string>(), g.at("terms").get<std::vector<std::string>>()});
      }
      s.ordinal = j.at("ordinal").get<bool>();
      s.case_sensitive = j.at("case_sensitive").get<bool>();
      return s;
    }
  }
  throw DataError("unhandled behavior");
}

}  // namespace

std::vector<std::string_view> accepted_params(Behavior behavior) {
  switch (behavior) {
    case Behavior::upcs:
      return {"activate"};
    case Behavior::splt:
    case Behavior::sp15:
    case Behavior::sp19:
    case Behavior::sbst:
    case Behavior::spl2:
    case Behavior::spl9:
      return kScanParams;
    case Behavior::spl5:
    case Behavior::sp10: {
      auto names = kScanParams;
      names.push_back("plug");
      return names;
    }
    case Behavior::nmcm:
    case Behavior::nmc7:
      return {"allow_commas", "allow_decimal", "allow_negative"};
    case Behavior::srch:
      return {"search", "aggregate", "ordinal", "case_sensitive"};
    default:
      return {};
  }
}

ColumnFit fit_column(Behavior behavior, std::span<const CellValue> input, const nlohmann::json& params,
                     bool numeric_root) {
  check_known(behavior, params);
  ColumnFit fit;
  fit.behavior = behavior;
  switch (behavior) {
    case Behavior::passthrough:
      fit.params = PassFit{};
      break;
    case Behavior::upcs:
      fit.params = UpcsFit{flag(behavior, params, "activate", true)};
      break;
    case Behavior::narw:
      fit.params = NarwFit{numeric_root};
      break;
    case Behavior::ord3:
    case Behavior::onht:
    case Behavior::b1010:
      fit.params = encoders::rank_entries(input);
      break;
    case Behavior::bnry:
      fit.params = encoders::bnry_fit(input);
      break;
    case Behavior::nmbr:
      fit.params = encoders::nmbr_fit(input);
      break;
    case Behavior::mnmx:
      fit.params = encoders::mnmx_fit(input);
      break;
    case Behavior::splt:
      fit.params = stringparse::splt_fit(input, scan_config(behavior, params));
      break;
    case Behavior::sp15:
      fit.params = stringparse::sp15_fit(input, scan_config(behavior, params));
      break;
    case Behavior::sbst:
      fit.params = stringparse::sbst_fit(input, scan_config(behavior, params));
      break;
    case Behavior::sp19:
      fit.params = stringparse::sp19_fit(input, scan_config(behavior, params));
      break;
    case Behavior::spl2:
    case Behavior::spl5:
    case Behavior::spl9:
    case Behavior::sp10: {
      auto cfg = scan_config(behavior, params);
      cfg.test_subset_assumption = behavior == Behavior::spl9 || behavior == Behavior::sp10;
      std::optional<std::string> plug;
      if (behavior == Behavior::spl5 || behavior == Behavior::sp10) {
        plug = text_param(behavior, params, "plug").value_or(std::string(stringparse::kDefaultPlug));
        if (plug->empty()) throw ConfigError(where(behavior, "plug") + " must not be empty");
      }
      fit.params = stringparse::replace_fit(input, cfg, plug);
      break;
    }
    case Behavior::srch:
      fit.params = search_spec(params);
      break;
    case Behavior::nmcm:
    case Behavior::nmc7:
      fit.params = extract::nmcm_fit(input, number_format(behavior, params));
      break;
  }
  return fit;
}

StepOutput apply_column(const ColumnFit& fit, std::span<const CellValue> input) {
  switch (fit.behavior) {
    case Behavior::passthrough:
      return single(Column(input.begin(), input.end()));
    case Behavior::upcs:
      return single(encoders::upcs(input, params_as<UpcsFit>(fit).active));
    case Behavior::narw:
      return single(encoders::narw(input, params_as<NarwFit>(fit).numeric_targets));
    case Behavior::ord3:
      return single(encoders::ord3_apply(params_as<encoders::CodeMap>(fit), input));
    case Behavior::onht: {
      const auto& map = params_as<encoders::CodeMap>(fit);
      return multi(index_tokens(map.size(), 1), encoders::onht_apply(map, input));
    }
    case Behavior::b1010: {
      const auto& map = params_as<encoders::CodeMap>(fit);
      return multi(index_tokens(encoders::binary_width(map.size()), 0), encoders::b1010_apply(map, input));
    }
    case Behavior::bnry:
      return single(encoders::bnry_apply(params_as<encoders::BinaryMap>(fit), input));
    case Behavior::nmbr:
      return single(encoders::nmbr_apply(params_as<encoders::NormFit>(fit), input));
    case Behavior::mnmx:
      return single(encoders::mnmx_apply(params_as<encoders::MinMaxFit>(fit), input));
    case Behavior::splt:
    case Behavior::sp15:
    case Behavior::sbst: {
      const auto& f = params_as<stringparse::ActivationFit>(fit);
      return multi(text_tokens(f.columns), stringparse::activation_apply(f, input));
    }
    case Behavior::sp19: {
      const auto& f = params_as<stringparse::PatternFit>(fit);
      return multi(index_tokens(f.width(), 0), stringparse::sp19_apply(f, input));
    }
    case Behavior::spl2:
    case Behavior::spl5:
    case Behavior::spl9:
    case Behavior::sp10:
      return single(stringparse::replace_apply(params_as<stringparse::ReplaceFit>(fit), input));
    case Behavior::srch: {
      const auto& spec = params_as<extract::SearchSpec>(fit);
      if (spec.ordinal) return single(std::move(extract::srch_apply(spec, input).front()));
      std::vector<std::string> labels;
      for (const auto& g : spec.groups) labels.push_back(g.label);
      return multi(text_tokens(labels), extract::srch_apply(spec, input));
    }
    case Behavior::nmcm:
      return single(extract::nmcm_apply(params_as<extract::NumericExtractFit>(fit), input));
    case Behavior::nmc7:
      return single(extract::nmc7_apply(params_as<extract::NumericExtractFit>(fit), input));
  }
  throw DataError("unhandled behavior");
}

nlohmann::json to_json(const ColumnFit& fit) {
  return {{"behavior", std::string(traits(fit.behavior).name)}, {"params", params_json(fit.params)}};
}

ColumnFit column_fit_from_json(const nlohmann::json& doc) {
  const auto name = doc.at("behavior").get<std::string>();
  auto behavior = parse_behavior(name);
  if (!behavior) throw DataError("unknown behavior \"" + name + "\" in artifact");
  return {*behavior, params_from(*behavior, doc.at("params"))};
}

nlohmann::json cell_to_json(const CellValue& cell) {
  if (cell.is_number()) return cell.as_number();
  if (cell.is_text()) return cell.as_text();
  return nullptr;
}

CellValue cell_from_json(const nlohmann::json& doc) {
  if (doc.is_null()) return CellValue::missing();
  if (doc.is_number()) return CellValue::number(doc.get<double>());
  if (doc.is_string()) return CellValue::text(doc.get<std::string>());
  throw DataError("cell values must be null, a number or a string");
}

}  // namespace parsemunge
