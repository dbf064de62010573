#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "parsemunge/cli.hpp"
#include "parsemunge/config.hpp"
#include "parsemunge/error.hpp"
#include "parsemunge/treeengine.hpp"

using namespace parsemunge;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("parsemunge_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::mt19937_64 rng(1);
    const char* fams[] = {"chrome", "safari", "firefox", "edge"};
    std::ostringstream csv;
    csv << "num,browser,label\n";
    for (int i = 0; i < 200; ++i) {
      const int f = static_cast<int>(rng() % 4);
      csv << (rng() % 1000) / 10.0 << "," << fams[f] << " " << (rng() % 60) << ".0," << (f % 2 ? "yes" : "no")
          << "\n";
    }
    write("train.csv", csv.str());
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream f(dir_ / name, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "parsemunge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, FitWritesFilesAndAssignsRoot) {
  write("cfg.json", R"({"assigncat": {"or19": ["browser"]}})");
  ASSERT_EQ(run({"fit", path("train.csv"), path("train.csv"), "--config", path("cfg.json"), "--out-dir", path("o")}),
            0)
      << err_.str();
  for (const char* f : {"o/train_encoded.csv", "o/test_encoded.csv", "o/artifact.pmz.json", "o/fit_report.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const auto art = deserialize(read("o/artifact.pmz.json"));
  EXPECT_EQ(art.per_source.at("browser").root, "or19");
  EXPECT_EQ(read("o/train_encoded.csv"), read("o/test_encoded.csv"));
}

TEST_F(CliTest, FitWithoutConfigAutoSelects) {
  ASSERT_EQ(run({"fit", path("train.csv"), "--out-dir", path("o")}), 0) << err_.str();
  const auto art = deserialize(read("o/artifact.pmz.json"));
  EXPECT_EQ(art.per_source.at("num").root, "nmbr");
  EXPECT_EQ(art.per_source.at("label").root, "bnry");
}

TEST_F(CliTest, UnknownCategoryExitsTwo) {
  write("cfg.json", R"({"assigncat": {"qq": ["browser"]}})");
  EXPECT_EQ(run({"fit", path("train.csv"), "--config", path("cfg.json"), "--out-dir", path("o")}), 2);
  EXPECT_NE(err_.str().find("qq"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKeyExitsTwo) {
  write("cfg.json", R"({"assigncats": {}})");
  EXPECT_EQ(run({"fit", path("train.csv"), "--config", path("cfg.json")}), 2);
  EXPECT_NE(err_.str().find("assigncats"), std::string::npos);
}

TEST_F(CliTest, ApplyReplaysAndReportsDrift) {
  ASSERT_EQ(run({"fit", path("train.csv"), "--out-dir", path("o")}), 0);
  ASSERT_EQ(run({"apply", path("o/artifact.pmz.json"), path("train.csv"), "-o", path("o/re.csv")}), 0);
  EXPECT_EQ(read("o/re.csv"), read("o/train_encoded.csv"));

  write("shift.csv", "num,browser,label\n500,opera 1.0,yes\n600,opera 2.0,no\n");
  ASSERT_EQ(run({"apply", path("o/artifact.pmz.json"), path("shift.csv"), "-o", path("o/s.csv"), "--drift"}), 0);
  EXPECT_NE(out_.str().find("unseen rate 1"), std::string::npos) << out_.str();
}

TEST_F(CliTest, ApplyMissingColumnExitsThree) {
  ASSERT_EQ(run({"fit", path("train.csv"), "--out-dir", path("o")}), 0);
  write("partial.csv", "num\n1\n");
  EXPECT_EQ(run({"apply", path("o/artifact.pmz.json"), path("partial.csv"), "-o", path("o/p.csv")}), 3);
  EXPECT_NE(err_.str().find("browser"), std::string::npos);
}

TEST_F(CliTest, InvertRoundTripAndNonInvertible) {
  write("cfg.json", R"({"assigncat": {"or19": ["browser"], "spl2": ["label"]}})");
  ASSERT_EQ(run({"fit", path("train.csv"), "--config", path("cfg.json"), "--out-dir", path("o")}), 0);
  ASSERT_EQ(run({"invert", path("o/artifact.pmz.json"), path("o/train_encoded.csv"), "-o", path("o/inv.csv")}), 0);
  EXPECT_NE(err_.str().find("non-invertible: label"), std::string::npos);
  const auto inv = load_csv(path("o/inv.csv"));
  const auto train = load_csv(path("train.csv"));
  for (std::size_t r = 0; r < train.row_count(); ++r) {
    std::string up = train.column("browser")[r].as_text();
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    EXPECT_EQ(inv.column("browser")[r].as_text(), up);
  }
}

TEST_F(CliTest, InvertBadPatternExitsThree) {
  write("small.csv", "c\na\nb\na\n");
  write("cfg.json", R"({"assigncat": {"1010": ["c"]}})");
  ASSERT_EQ(run({"fit", path("small.csv"), "--config", path("cfg.json"), "--out-dir", path("o")}), 0);
  write("bad.csv", "c_1010_0,c_1010_1,c_NArw\n1,1,0\n");
  EXPECT_EQ(run({"invert", path("o/artifact.pmz.json"), path("bad.csv"), "-o", path("o/inv.csv")}), 3);
}

TEST_F(CliTest, ImportanceDeterministic) {
  write("cfg.json", R"({"labels_column": "label", "assigncat": {"or19": ["browser"]}, "seed": 3})");
  ASSERT_EQ(run({"importance", path("train.csv"), "--config", path("cfg.json"), "--out-dir", path("a")}), 0)
      << err_.str();
  ASSERT_EQ(run({"importance", path("train.csv"), "--config", path("cfg.json"), "--out-dir", path("b")}), 0);
  EXPECT_EQ(read("a/importance.json"), read("b/importance.json"));
  EXPECT_EQ(read("a/importance.txt"), read("b/importance.txt"));
  const auto doc = nlohmann::json::parse(read("a/importance.json"));
  EXPECT_GT(doc["metric1"]["browser"].get<double>(), doc["metric1"]["num"].get<double>());
}

TEST_F(CliTest, ImportanceNeedsLabels) {
  EXPECT_EQ(run({"importance", path("train.csv"), "--out-dir", path("o")}), 2);
}

TEST_F(CliTest, InspectAndUsageErrors) {
  ASSERT_EQ(run({"fit", path("train.csv"), "--out-dir", path("o")}), 0);
  ASSERT_EQ(run({"inspect", path("o/artifact.pmz.json")}), 0);
  EXPECT_NE(out_.str().find("browser"), std::string::npos);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"fit"}), 2);
  EXPECT_EQ(run({"fit", path("nope.csv")}), 3);
}

TEST(Config, ParsesDocument) {
  const auto cfg = parse_run_config(nlohmann::json::parse(R"({
    "assigncat": {"or19": ["a", "b"], "nmbr": ["c"]},
    "assigninfill": {"meaninfill": ["c"]},
    "srch": {"a": {"search": ["x"]}},
    "labels_column": "y", "seed": 4, "threshold": 30, "valpercent": 0.3
  })"));
  EXPECT_EQ(cfg.assignments.at("b"), "or19");
  EXPECT_EQ(cfg.assigninfill.at("c"), InfillKind::mean);
  EXPECT_TRUE(cfg.assignparam["srch"].contains("a"));
  EXPECT_EQ(*cfg.seed, 4u);
  const auto opts = build_options(cfg);
  EXPECT_EQ(opts.threshold, 30);
  EXPECT_EQ(*opts.labels_column, "y");
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"assigncat": {"ord3": ["a"], "onht": ["a"]}})")),
               ConfigError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"assigninfill": {"mlinfill": ["a"]}})")), ConfigError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"valpercent": 1.5})")), ConfigError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"seed": -1})")), ConfigError);
}
