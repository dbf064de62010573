#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "oracles.hpp"
#include "parsemunge/stringparse.hpp"

using namespace parsemunge;
using namespace parsemunge::stringparse;

namespace {

Column texts(const std::vector<std::string>& xs) {
  Column c;
  for (const auto& x : xs) c.push_back(CellValue::text(x));
  return c;
}

OverlapScanConfig cfg_len(std::size_t n) {
  OverlapScanConfig cfg;
  cfg.min_len = n;
  return cfg;
}

}  // namespace

TEST(Scan, ChromePair) {
  const std::vector<std::string> u = {"chrome 62.0", "chrome 49.0"};
  const auto m = scan_overlaps(u, cfg_len(5));
  EXPECT_EQ(m.assignment.at("chrome 62.0"), std::vector<std::string>{"chrome "});
  EXPECT_EQ(m.assignment.at("chrome 49.0"), std::vector<std::string>{"chrome "});
  EXPECT_EQ(m.overlaps.at("chrome ").size(), 2u);
}

TEST(Scan, MacOsPair) {
  const std::vector<std::string> u = {"Mac OS X 10_11_6", "Mac OS X 10_7_5"};
  const auto m = scan_overlaps(u, cfg_len(5));
  EXPECT_EQ(m.assignment.at("Mac OS X 10_11_6").front(), "Mac OS X 10_");
}

TEST(Scan, NothingShared) {
  const std::vector<std::string> u = {"abc", "xyz"};
  EXPECT_TRUE(scan_overlaps(u, cfg_len(2)).overlaps.empty());
}

TEST(Scan, ExclusionDropsCandidates) {
  const std::vector<std::string> u = {"chrome 62.0", "chrome 49.0"};
  auto cfg = cfg_len(5);
  cfg.exclude_chars = std::string(space_and_punctuation());
  const auto m = scan_overlaps(u, cfg);
  EXPECT_EQ(m.assignment.at("chrome 62.0").front(), "chrome");
}

TEST(Scan, CountsCodePoints) {
  // four-character overlap made of two-byte characters
  const std::vector<std::string> u = {"ééééx", "ééééy"};
  EXPECT_EQ(scan_overlaps(u, cfg_len(4)).assignment.at("ééééx").front(), "éééé");
  EXPECT_TRUE(scan_overlaps(u, cfg_len(5)).assignment.empty());
}

TEST(Scan, SingleIdMatchesDynamicProgrammingOracle) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    const auto u = gen::unique_words(rng, n, 1, 10, "abcde ");
    const auto min_len = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    const std::string excluded = gen::coin(rng, 0.3) ? " " : "";
    for (auto strategy : {ScanStrategy::pairwise, ScanStrategy::indexed}) {
      OverlapScanConfig cfg = cfg_len(min_len);
      cfg.exclude_chars = excluded;
      cfg.strategy = strategy;
      const auto m = scan_overlaps(u, cfg);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const auto want = oracle::single_id_overlap(u, i, min_len, excluded);
        auto it = m.assignment.find(u[i]);
        if (!want) {
          EXPECT_EQ(it, m.assignment.end()) << u[i];
        } else {
          ASSERT_NE(it, m.assignment.end()) << u[i];
          EXPECT_EQ(it->second.front(), *want) << u[i];
        }
      }
    }
  }
}

TEST(Scan, SupportersAreEveryContainingEntry) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = gen::unique_words(rng, 8, 3, 9, "abc");
    for (bool single : {true, false}) {
      auto cfg = cfg_len(2);
      cfg.single_id = single;
      for (const auto& [overlap, owners] : scan_overlaps(u, cfg).overlaps) {
        std::set<std::string> want;
        for (const auto& e : u) {
          if (e.find(overlap) != std::string::npos) want.insert(e);
        }
        EXPECT_EQ(owners, want);
        EXPECT_GE(owners.size(), 2u);
      }
    }
  }
}

TEST(Scan, MultiModeKeepsClosedOverlaps) {
  const std::vector<std::string> u = {"ab cd", "ab xy", "zz cd"};
  auto cfg = cfg_len(2);
  cfg.single_id = false;
  const auto m = scan_overlaps(u, cfg);
  EXPECT_EQ(m.assignment.at("ab cd"), (std::vector<std::string>{" cd", "ab "}));
  EXPECT_EQ(m.overlaps.size(), 2u);
}

TEST(Scan, MultiModeClosureOracle) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = gen::unique_words(rng, 6, 2, 8, "abc");
    auto cfg = cfg_len(2);
    cfg.single_id = false;
    const auto m = scan_overlaps(u, cfg);
    auto support = [&](const std::string& s) {
      std::size_t n = 0;
      for (const auto& e : u) n += e.find(s) != std::string::npos;
      return n;
    };
    // every shared substring of length >= 2 that no one-character extension
    // keeps at the same support
    std::set<std::string> want;
    for (const auto& e : u) {
      for (std::size_t p = 0; p < e.size(); ++p) {
        for (std::size_t len = 2; p + len <= e.size(); ++len) {
          const auto s = e.substr(p, len);
          const auto n = support(s);
          if (n < 2) continue;
          bool closed = true;
          for (char c : std::string("abc")) {
            if (support(s + c) == n || support(c + s) == n) closed = false;
          }
          if (closed) want.insert(s);
        }
      }
    }
    std::set<std::string> got;
    for (const auto& [k, v] : m.overlaps) got.insert(k);
    EXPECT_EQ(got, want);
  }
}

TEST(Containment, WholeEntryCandidates) {
  const std::vector<std::string> u = {"a", "ba", "cba"};
  auto cfg = cfg_len(1);
  const auto m = scan_containment(u, cfg);
  EXPECT_EQ(m.assignment.at("cba").front(), "ba");
  EXPECT_EQ(m.assignment.at("ba").front(), "a");
  EXPECT_EQ(m.assignment.count("a"), 0u);
}

TEST(Splt, ChromeColumn) {
  const auto col = texts({"chrome 62.0", "chrome 49.0"});
  const auto fit = splt_fit(col, cfg_len(5));
  ASSERT_EQ(fit.columns, std::vector<std::string>{"chrome "});
  const auto out = activation_apply(fit, col);
  EXPECT_EQ(out[0][0].as_number(), 1.0);
  EXPECT_EQ(out[0][1].as_number(), 1.0);
  const auto unseen = activation_apply(fit, texts({"chrome 70.0"}));
  EXPECT_EQ(unseen[0][0].as_number(), 0.0);
}

TEST(Sp15, DegeneratesToSpltWithOneOverlap) {
  const auto col = texts({"chrome 62.0", "chrome 49.0"});
  EXPECT_EQ(sp15_fit(col, cfg_len(5)), splt_fit(col, cfg_len(5)));
}

TEST(Sbst, ContainmentActivations) {
  const auto col = texts({"chrome", "chrome 62.0", "safari"});
  const auto fit = sbst_fit(col, cfg_len(1));
  ASSERT_EQ(fit.columns, std::vector<std::string>{"chrome"});
  const auto out = activation_apply(fit, col);
  EXPECT_EQ(out[0][0].as_number(), 0.0);
  EXPECT_EQ(out[0][1].as_number(), 1.0);
  EXPECT_EQ(out[0][2].as_number(), 0.0);
}

TEST(Sp19, PatternWidth) {
  // overlaps "aaa", "bbb", "ccc" give three distinct patterns
  const auto col = texts({"aaa1", "aaa2", "bbb1", "bbb2", "ccc1", "ccc2"});
  const auto fit = sp19_fit(col, cfg_len(3));
  EXPECT_EQ(fit.patterns.size(), 3u);
  EXPECT_EQ(fit.width(), 2u);
  const auto out = sp19_apply(fit, col);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t r = 0; r < col.size(); ++r) {
    EXPECT_NE(out[0][r].as_number() + out[1][r].as_number(), 0.0);
  }
}

TEST(Sp19, SinglePatternAndNone) {
  const auto same = sp19_fit(texts({"chrome 62.0", "chrome 49.0"}), cfg_len(5));
  EXPECT_EQ(same.width(), 1u);
  const auto none = sp19_fit(texts({"abc", "xyz"}), cfg_len(2));
  EXPECT_EQ(none.width(), 1u);
  const auto out = sp19_apply(none, texts({"abc"}));
  EXPECT_EQ(out[0][0].as_number(), 0.0);
}

TEST(Replace, Spl2PassesUnassignedThrough) {
  const auto col = texts({"chrome 62.0", "chrome 49.0", "safari"});
  const auto fit = replace_fit(col, cfg_len(5), std::nullopt);
  const auto out = replace_apply(fit, col);
  EXPECT_EQ(out[0].as_text(), "chrome ");
  EXPECT_EQ(out[1].as_text(), "chrome ");
  EXPECT_EQ(out[2].as_text(), "safari");
  // unseen entries are searched for a known overlap
  EXPECT_EQ(replace_apply(fit, texts({"chrome 90.1"}))[0].as_text(), "chrome ");
}

TEST(Replace, Spl5Plugs) {
  const auto col = texts({"chrome 62.0", "chrome 49.0", "safari"});
  const auto fit = replace_fit(col, cfg_len(5), std::string(kDefaultPlug));
  const auto out = replace_apply(fit, col);
  EXPECT_EQ(out[2].as_text(), "zzzplug");
  const auto none = replace_fit(texts({"abc", "xyz"}), cfg_len(2), std::string(kDefaultPlug));
  for (const auto& c : replace_apply(none, texts({"abc", "xyz"}))) EXPECT_EQ(c.as_text(), "zzzplug");
}

TEST(Replace, PlugCollisionGetsSuffix) {
  const auto col = texts({"zzzplug1", "zzzplug2"});
  const auto fit = replace_fit(col, cfg_len(5), std::string(kDefaultPlug));
  EXPECT_EQ(*fit.plug, "zzzplug_1");
}

TEST(Replace, SubsetAssumptionOnlyLooksUp) {
  const auto col = texts({"chrome 62.0", "chrome 49.0"});
  auto cfg = cfg_len(5);
  cfg.test_subset_assumption = true;
  const auto fit = replace_fit(col, cfg, std::nullopt);
  EXPECT_FALSE(fit.search_unseen);
  EXPECT_EQ(replace_apply(fit, texts({"chrome 90.1"}))[0].as_text(), "chrome 90.1");
}

TEST(Replace, RandomSetCardinalityShrinks) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = gen::unique_words(rng, 5, 2, 8, "abcd");
    const auto col = texts(u);
    const auto fit = replace_fit(col, cfg_len(2), std::nullopt);
    const auto out = replace_apply(fit, col);
    std::set<std::string> before(u.begin(), u.end()), after;
    for (std::size_t i = 0; i < u.size(); ++i) {
      after.insert(out[i].as_text());
      const auto want = oracle::single_id_overlap(u, i, 2, "");
      EXPECT_EQ(out[i].as_text(), want ? *want : u[i]);
    }
    EXPECT_LE(after.size(), before.size());
  }
}
