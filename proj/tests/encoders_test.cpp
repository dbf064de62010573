#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "gen.hpp"
#include "parsemunge/encoders.hpp"
#include "parsemunge/error.hpp"

using namespace parsemunge;
using namespace parsemunge::encoders;

namespace {

Column texts(std::initializer_list<const char*> xs) {
  Column c;
  for (const char* x : xs) c.push_back(x ? CellValue::text(x) : CellValue::missing());
  return c;
}

double num(const CellValue& c) { return c.as_number(); }

}  // namespace

TEST(Rank, CountThenValue) {
  const auto m = rank_entries(texts({"b", "a", "c", "b", "a", nullptr, "d"}));
  EXPECT_EQ(m.entries, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(m.counts, (std::vector<std::size_t>{2, 2, 1, 1}));
}

TEST(Ord3, CodesAndReservedZero) {
  const auto col = texts({"x", "y", "x", nullptr});
  const auto m = rank_entries(col);
  const auto out = ord3_apply(m, texts({"x", "y", "zz", nullptr}));
  EXPECT_EQ(num(out[0]), 1);
  EXPECT_EQ(num(out[1]), 2);
  EXPECT_EQ(num(out[2]), 0);
  EXPECT_EQ(num(out[3]), 0);
  EXPECT_TRUE(ord3_decode(m, ord3_apply(m, col))[1] == CellValue::text("y"));
}

TEST(Ord3, NumbersUseCanonicalKey) {
  const Column col = {CellValue::number(2), CellValue::text("2"), CellValue::number(2.5)};
  const auto m = rank_entries(col);
  EXPECT_EQ(m.entries.front(), "2");
  EXPECT_EQ(m.counts.front(), 2u);
}

TEST(Onht, OneColumnPerEntry) {
  const auto col = texts({"a", "b", "c", "a"});
  const auto m = rank_entries(col);
  const auto out = onht_apply(m, texts({"a", "c", "q"}));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(num(out[0][0]), 1);
  EXPECT_EQ(num(out[2][1]), 1);
  for (const auto& c : out) EXPECT_EQ(num(c[2]), 0);
  const auto dec = onht_decode(m, onht_apply(m, col));
  EXPECT_TRUE(dec == col);
}

TEST(Onht, InvalidPatternThrows) {
  const auto m = rank_entries(texts({"a", "b"}));
  std::vector<Column> group = {{CellValue::number(1)}, {CellValue::number(1)}};
  EXPECT_THROW(onht_decode(m, group), DataError);
}

TEST(Binary1010, WidthFormula) {
  for (std::size_t n = 1; n <= 300; ++n) {
    EXPECT_EQ(binary_width(n), static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n) + 1)))) << n;
  }
}

TEST(Binary1010, BigEndianCodes) {
  // ranks a=1 (count 3), b=2 (count 2), c=3
  const auto col = texts({"a", "a", "a", "b", "b", "c"});
  const auto m = rank_entries(col);
  const auto out = b1010_apply(m, texts({"a", "b", "c", nullptr}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(num(out[0][0]), 0);
  EXPECT_EQ(num(out[1][0]), 1);
  EXPECT_EQ(num(out[0][1]), 1);
  EXPECT_EQ(num(out[1][1]), 0);
  EXPECT_EQ(num(out[0][2]), 1);
  EXPECT_EQ(num(out[1][2]), 1);
  EXPECT_EQ(num(out[0][3]), 0);
  EXPECT_EQ(num(out[1][3]), 0);
}

TEST(Binary1010, DecodeRoundTripAndBadPattern) {
  std::mt19937_64 rng(3);
  const auto vocab = gen::unique_words(rng, 40, 2, 6, "abcdef");
  const auto col = gen::categoric(rng, 200, vocab, 0.0);
  const auto m = rank_entries(col);
  EXPECT_TRUE(b1010_decode(m, b1010_apply(m, col)) == col);

  const auto small = rank_entries(texts({"a", "b"}));  // codes 1, 2 in width 2
  std::vector<Column> bad = {{CellValue::number(1)}, {CellValue::number(1)}};
  EXPECT_THROW(b1010_decode(small, bad), DataError);
}

TEST(Bnry, ModeIsOneAndMissingFollowsMode) {
  const auto col = texts({"n", "y", "y", nullptr});
  const auto m = bnry_fit(col);
  EXPECT_EQ(m.one, "y");
  EXPECT_EQ(m.zero, "n");
  const auto out = bnry_apply(m, texts({"n", "y", nullptr, "other"}));
  EXPECT_EQ(num(out[0]), 0);
  EXPECT_EQ(num(out[1]), 1);
  EXPECT_EQ(num(out[2]), 1);
  EXPECT_EQ(num(out[3]), 1);
  EXPECT_THROW(bnry_fit(texts({"a", "b", "c"})), DataError);
}

TEST(Nmbr, ZeroMeanUnitStdOnTrain) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto col = gen::numeric(rng, 100, 0.0);
    const auto fit = nmbr_fit(col);
    const auto out = nmbr_apply(fit, col);
    double mean = 0.0;
    for (const auto& c : out) mean += num(c);
    mean /= out.size();
    double var = 0.0;
    for (const auto& c : out) var += (num(c) - mean) * (num(c) - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_LT(std::abs(std::sqrt(var / out.size()) - 1.0), 1e-9);
  }
}

TEST(Nmbr, HandComputed) {
  const Column col = {CellValue::number(1), CellValue::number(3), CellValue::missing(), CellValue::text("q")};
  const auto fit = nmbr_fit(col);
  EXPECT_DOUBLE_EQ(fit.mean, 2.0);
  EXPECT_DOUBLE_EQ(fit.std, 1.0);
  const auto out = nmbr_apply(fit, col);
  EXPECT_DOUBLE_EQ(num(out[0]), -1.0);
  EXPECT_DOUBLE_EQ(num(out[1]), 1.0);
  EXPECT_EQ(num(out[2]), 0.0);
  const auto back = nmbr_invert(fit, out);
  EXPECT_DOUBLE_EQ(num(back[1]), 3.0);
}

TEST(Nmbr, ConstantColumnIsZero) {
  const Column col = {CellValue::number(4), CellValue::number(4)};
  const auto out = nmbr_apply(nmbr_fit(col), col);
  EXPECT_EQ(num(out[0]), 0.0);
  EXPECT_EQ(num(out[1]), 0.0);
}

TEST(Mnmx, ScalesAndMissingTakesMean) {
  const Column col = {CellValue::number(2), CellValue::number(4), CellValue::number(6), CellValue::missing()};
  const auto fit = mnmx_fit(col);
  const auto out = mnmx_apply(fit, Column{CellValue::number(2), CellValue::number(6), CellValue::missing(),
                                          CellValue::number(10)});
  EXPECT_DOUBLE_EQ(num(out[0]), 0.0);
  EXPECT_DOUBLE_EQ(num(out[1]), 1.0);
  EXPECT_DOUBLE_EQ(num(out[2]), 0.5);
  EXPECT_DOUBLE_EQ(num(out[3]), 2.0);
  EXPECT_DOUBLE_EQ(num(mnmx_invert(fit, out)[1]), 6.0);
}

TEST(Upcs, UppercasesText) {
  const auto out = upcs(texts({"Abc", "abc", nullptr}));
  EXPECT_TRUE(out[0] == CellValue::text("ABC"));
  EXPECT_TRUE(out[1] == CellValue::text("ABC"));
  EXPECT_TRUE(out[2].is_missing());
  EXPECT_TRUE(upcs(texts({"abc"}), false)[0] == CellValue::text("abc"));
}

TEST(Narw, MarksTargets) {
  const auto a = narw(texts({"x", nullptr}), false);
  EXPECT_EQ(num(a[0]), 0);
  EXPECT_EQ(num(a[1]), 1);
  const auto b = narw(texts({"3", "q"}), true);
  EXPECT_EQ(num(b[0]), 0);
  EXPECT_EQ(num(b[1]), 1);
}

TEST(AutoRoot, Selection) {
  UniqueSetStats s;
  EXPECT_EQ(auto_root_select(ColType::numeric, s), "nmbr");
  EXPECT_EQ(auto_root_select(ColType::all_missing, s), "excl");
  s.n_unique = 2;
  EXPECT_EQ(auto_root_select(ColType::categoric, s), "bnry");
  s.n_unique = 3;
  EXPECT_EQ(auto_root_select(ColType::categoric, s), "onht");
  s.n_unique = 50;
  EXPECT_EQ(auto_root_select(ColType::categoric, s), "1010");
  s.n_unique = 300;
  EXPECT_EQ(auto_root_select(ColType::categoric, s), "ord3");
  EXPECT_EQ(auto_root_select(ColType::categoric, s, 400), "1010");
}
