#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gen.hpp"
#include "parsemunge/error.hpp"
#include "parsemunge/treeengine.hpp"

using namespace parsemunge;
using nlohmann::json;

namespace {

Column texts(const std::vector<std::string>& xs) {
  Column c;
  for (const auto& x : xs) c.push_back(x.empty() ? CellValue::missing() : CellValue::text(x));
  return c;
}

TidyTable addresses() {
  TidyTable t;
  t.add_column("col1", {CellValue::number(1), CellValue::number(2), CellValue::number(3), CellValue::number(4),
                        CellValue::number(5)});
  t.add_column("col2", texts({"12 Main Street 94107", "88 main street 10001", "7 Ocean Ave 94107",
                              "100 ocean ave 30301", ""}));
  return t;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST(Fit, Or19Headers) {
  const auto r = fit(addresses(), {{"col2", "or19"}}, builtin_registry(), {});
  const auto& h = r.encoded.headers();
  EXPECT_TRUE(has(h, "col2_UPCS_nmc7_nmbr"));
  EXPECT_TRUE(has(h, "col2_UPCS_spl9_ord3"));
  EXPECT_TRUE(has(h, "col2_UPCS_spl9_sp10_ord3"));
  EXPECT_TRUE(has(h, "col2_UPCS_1010_0"));
  EXPECT_TRUE(has(h, "col2_NArw"));
  EXPECT_FALSE(has(h, "col2"));
  EXPECT_FALSE(has(h, "col2_UPCS"));
  EXPECT_EQ(r.artifact.per_source.at("col2").root, "or19");
  EXPECT_EQ(r.artifact.output_order, h);
  // NArw marks the missing address
  const auto& narw = r.encoded.column("col2_NArw");
  EXPECT_EQ(narw[4].as_number(), 1.0);
  EXPECT_EQ(narw[0].as_number(), 0.0);
}

TEST(Fit, OverrideRoutesExtractToOrdinal) {
  RegistryOverrides ov;
  FamilyTree t;
  t[Slot::parents] = {"nmc8"};
  t[Slot::cousins] = {"NArw"};
  t[Slot::children] = {"ord3"};
  ov.trees["nmc8"] = t;
  const auto reg = merge_overrides(builtin_registry(), ov);
  const auto r = fit(addresses(), {{"col2", "or19"}}, reg, {});
  EXPECT_TRUE(has(r.encoded.headers(), "col2_UPCS_nmc7_ord3"));
  EXPECT_FALSE(has(r.encoded.headers(), "col2_UPCS_nmc7_nmbr"));
}

TEST(Fit, AutoRoots) {
  TidyTable t;
  t.add_column("n", {CellValue::number(1), CellValue::number(2), CellValue::number(3)});
  t.add_column("b", texts({"y", "n", "y"}));
  t.add_column("c", texts({"r", "g", "b"}));
  const auto r = fit(t, {}, builtin_registry(), {});
  EXPECT_EQ(r.artifact.per_source.at("n").root, "nmbr");
  EXPECT_EQ(r.artifact.per_source.at("b").root, "bnry");
  EXPECT_EQ(r.artifact.per_source.at("c").root, "onht");
}

TEST(Fit, ExclPassesThrough) {
  const auto t = addresses();
  const auto r = fit(t, {{"col2", "excl"}}, builtin_registry(), {});
  EXPECT_EQ(r.artifact.per_source.at("col2").steps.size(), 1u);
  EXPECT_TRUE(r.encoded.column("col2_excl") == t.column("col2"));
}

TEST(Fit, Preconditions) {
  EXPECT_THROW(fit(addresses(), {{"zz", "ord3"}}, builtin_registry(), {}), ConfigError);
  EXPECT_THROW(fit(addresses(), {{"col2", "qq"}}, builtin_registry(), {}), ConfigError);
  EXPECT_THROW(fit(TidyTable{}, {}, builtin_registry(), {}), DataError);
}

TEST(Fit, HeaderCollisionsGetCounter) {
  TidyTable t;
  t.add_column("a", {CellValue::number(1), CellValue::number(2)});
  t.add_column("a_nmbr", {CellValue::number(3), CellValue::number(5)});
  const auto r = fit(t, {{"a", "nmbr"}, {"a_nmbr", "nmbr"}}, builtin_registry(), {});
  const auto& h = r.encoded.headers();
  EXPECT_TRUE(has(h, "a_nmbr_1"));
  EXPECT_TRUE(has(h, "a_nmbr_nmbr"));
  std::set<std::string> unique(h.begin(), h.end());
  EXPECT_EQ(unique.size(), h.size());
}

TEST(Fit, AssignedInfill) {
  TidyTable t;
  t.add_column("x", {CellValue::number(1), CellValue::missing(), CellValue::number(3)});
  Options opts;
  opts.assigninfill["x"] = InfillKind::mean;
  const auto r = fit(t, {{"x", "mnmx"}}, builtin_registry(), opts);
  // min-max of {1, 3} -> {0, 1}; mean of the non-target rows is 0.5
  EXPECT_DOUBLE_EQ(r.encoded.column("x_mnmx")[1].as_number(), 0.5);
  EXPECT_EQ(r.artifact.infill_spec.at("x_mnmx"), InfillKind::mean);
}

TEST(Fit, LabelColumn) {
  TidyTable t = addresses();
  t.add_column("y", texts({"a", "b", "a", "c", "a"}));
  Options opts;
  opts.labels_column = "y";
  const auto r = fit(t, {}, builtin_registry(), opts);
  EXPECT_TRUE(r.artifact.per_source.at("y").is_label);
  EXPECT_EQ(r.artifact.label_headers(), std::vector<std::string>{"y_ord3"});
  EXPECT_EQ(r.encoded.headers().back(), "y_ord3");
  // apply without the label column still works
  const auto applied = apply(r.artifact, addresses());
  EXPECT_FALSE(applied.contains("y_ord3"));
}

TEST(Apply, ReplaysFit) {
  std::mt19937_64 rng(9);
  const auto vocab = gen::unique_words(rng, 30, 3, 10, "abcde ");
  TidyTable t;
  t.add_column("a", gen::categoric(rng, 200, vocab, 0.1));
  t.add_column("b", gen::numeric(rng, 200, 0.1));
  t.add_column("c", gen::categoric(rng, 200, vocab, 0.0));
  const auto r = fit(t, {{"a", "or19"}, {"c", "sp19"}}, builtin_registry(), {});
  EXPECT_TRUE(apply(r.artifact, t) == r.encoded);
  const auto back = deserialize(serialize(r.artifact));
  EXPECT_TRUE(back == r.artifact);
  EXPECT_EQ(serialize(back), serialize(r.artifact));
  EXPECT_TRUE(apply(back, t) == r.encoded);
}

TEST(Apply, UnseenOrdinalIsZero) {
  TidyTable t;
  t.add_column("c", texts({"x", "y", "x"}));
  const auto r = fit(t, {{"c", "ord3"}}, builtin_registry(), {});
  TidyTable test;
  test.add_column("c", texts({"zz", "y"}));
  const auto out = apply(r.artifact, test);
  EXPECT_EQ(out.column("c_ord3")[0].as_number(), 0.0);
  EXPECT_EQ(out.column("c_ord3")[1].as_number(), 2.0);
}

TEST(Apply, ExtraColumnWarnsMissingColumnThrows) {
  const auto r = fit(addresses(), {}, builtin_registry(), {});
  TidyTable extra = addresses();
  extra.add_column("junk", texts({"1", "2", "3", "4", "5"}));
  std::vector<std::string> warnings;
  EXPECT_TRUE(apply(r.artifact, extra, &warnings) == apply(r.artifact, addresses()));
  EXPECT_EQ(warnings.size(), 1u);
  TidyTable partial;
  partial.add_column("col1", addresses().column("col1"));
  EXPECT_THROW(apply(r.artifact, partial), DataError);
}

TEST(Apply, RowPermutationEquivariance) {
  std::mt19937_64 rng(4);
  const auto vocab = gen::unique_words(rng, 12, 4, 9, "abcd");
  TidyTable t;
  t.add_column("a", gen::categoric(rng, 60, vocab, 0.1));
  t.add_column("b", gen::numeric(rng, 60, 0.1));
  const auto r = fit(t, {{"a", "or20"}}, builtin_registry(), {});
  std::vector<std::size_t> perm(60);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  EXPECT_TRUE(apply(r.artifact, t.select_rows(perm)) == apply(r.artifact, t).select_rows(perm));
}

TEST(Apply, ThreadCountDoesNotMatter) {
  std::mt19937_64 rng(8);
  const auto vocab = gen::unique_words(rng, 20, 4, 9, "abcd");
  TidyTable t;
  for (int c = 0; c < 6; ++c) t.add_column("c" + std::to_string(c), gen::categoric(rng, 80, vocab, 0.1));
  Options one, many;
  one.threads = 1;
  many.threads = 4;
  std::map<std::string, std::string> roots = {{"c0", "or19"}, {"c1", "sp15"}, {"c2", "spl5"}};
  const auto a = fit(t, roots, builtin_registry(), one);
  const auto b = fit(t, roots, builtin_registry(), many);
  EXPECT_EQ(serialize(a.artifact), serialize(b.artifact));
  EXPECT_TRUE(a.encoded == b.encoded);
}

TEST(Serialize, VersionAndMalformed) {
  const auto r = fit(addresses(), {}, builtin_registry(), {});
  auto doc = json::parse(serialize(r.artifact));
  doc["format_version"] = 999;
  EXPECT_THROW(deserialize(doc.dump()), VersionError);
  EXPECT_THROW(deserialize("{not json"), DataError);
  EXPECT_THROW(deserialize("{}"), DataError);
}

TEST(Invert, UpcsForms) {
  TidyTable t;
  t.add_column("c", texts({"usa", "Usa", "USA", "", "uk"}));
  const auto r = fit(t, {{"c", "or19"}}, builtin_registry(), {});
  const auto inv = invert(r.artifact, r.encoded);
  const auto& c = inv.table.column("c");
  EXPECT_EQ(c[0].as_text(), "USA");
  EXPECT_EQ(c[1].as_text(), "USA");
  EXPECT_EQ(c[2].as_text(), "USA");
  EXPECT_TRUE(c[3].is_missing());
  EXPECT_EQ(c[4].as_text(), "UK");
}

TEST(Invert, OrdinalExact) {
  TidyTable t;
  t.add_column("c", texts({"b", "a", "b"}));
  const auto r = fit(t, {{"c", "ord3"}}, builtin_registry(), {});
  EXPECT_TRUE(invert(r.artifact, r.encoded).table.column("c") == t.column("c"));
}

TEST(Invert, NumericSourceComesBackAsNumbers) {
  TidyTable t;
  t.add_column("n", {CellValue::number(1), CellValue::number(2), CellValue::number(2)});
  const auto r = fit(t, {{"n", "1010"}}, builtin_registry(), {});
  EXPECT_TRUE(invert(r.artifact, r.encoded).table.column("n") == t.column("n"));
}

TEST(Invert, StringParseOnlyIsNonInvertible) {
  TidyTable t = addresses();
  const auto r = fit(t, {{"col2", "spl2"}}, builtin_registry(), {});
  const auto inv = invert(r.artifact, r.encoded);
  EXPECT_TRUE(has(inv.non_invertible, "col2"));
  EXPECT_TRUE(inv.table.contains("col1"));
}

TEST(Invert, BadPatternNamesIt) {
  TidyTable t;
  t.add_column("c", texts({"a", "b", "a"}));
  const auto r = fit(t, {{"c", "1010"}}, builtin_registry(), {});
  TidyTable enc = r.encoded;
  TidyTable bad;
  for (const auto& h : enc.headers()) {
    Column col = enc.column(h);
    if (h.rfind("c_1010_", 0) == 0) col[0] = CellValue::number(1);
    bad.add_column(h, col);
  }
  try {
    invert(r.artifact, bad);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("11"), std::string::npos);
  }
}

TEST(Drift, IdentityShiftAndDisjoint) {
  TidyTable t;
  t.add_column("n", {CellValue::number(1), CellValue::number(2), CellValue::number(3)});
  t.add_column("c", texts({"a", "b", "a"}));
  const auto r = fit(t, {}, builtin_registry(), {});
  const auto same = drift_report(r.artifact, t);
  for (const auto& s : same.sources) {
    if (s.numeric) EXPECT_EQ(s.numeric->mean_delta, 0.0);
    if (s.categoric) EXPECT_EQ(s.categoric->unseen_rate, 0.0);
  }
  TidyTable shifted;
  shifted.add_column("n", {CellValue::number(2), CellValue::number(3), CellValue::number(4)});
  shifted.add_column("c", texts({"x", "y", "z"}));
  const auto d = drift_report(r.artifact, shifted);
  for (const auto& s : d.sources) {
    if (s.numeric) EXPECT_NEAR(s.numeric->mean_delta, 1.0, 1e-9);
    if (s.categoric) EXPECT_EQ(s.categoric->unseen_rate, 1.0);
  }
  EXPECT_FALSE(render(d).empty());
  EXPECT_TRUE(to_json(d).is_object());
}
