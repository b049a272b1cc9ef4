// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gdlm/cli.hpp"
#include "gdlm/io.hpp"
#include "gdlm/sim.hpp"
#include "test_support.hpp"

using namespace gdlm;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gdlm_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

using CsvTest = TempDir;
using ModelJsonTest = TempDir;
using CliTest = TempDir;

}  // namespace

TEST_F(CsvTest, HeaderAndRows) {
  write_text(path("d.csv"), "d=4,d=4\n0,3\n2,1\n");
  const Dataset data = io::load_dataset_csv(path("d.csv"));
  EXPECT_EQ(data.n, 2);
  EXPECT_EQ(data.p, 2);
  EXPECT_EQ(data.categories, (std::vector<int>{4, 4}));
  EXPECT_EQ(data(0, 1), 3.0);
  EXPECT_EQ(data(1, 0), 2.0);
}

TEST_F(CsvTest, RoundTrip) {
  SimConfig cfg;
  cfg.p = 6;
  cfg.k = 2;
  cfg.d = 5;
  cfg.n = 120;
  cfg.seed = 33;
  Dataset data = simulate_dataset(sample_model(cfg), cfg);
  // splice in a numeric column
  data.categories[2] = 1;
  SplitMix64 rng(200);
  for (int i = 0; i < data.n; ++i) data(i, 2) = rng.next_double() * 10 - 5;
  io::save_dataset_csv(data, path("round.csv"));
  const Dataset back = io::load_dataset_csv(path("round.csv"));
  EXPECT_EQ(back.n, data.n);
  EXPECT_EQ(back.categories, data.categories);
  EXPECT_EQ(back.values, data.values);  // 17-digit round trip is exact
}

TEST_F(CsvTest, ParseErrorsCarryLineNumbers) {
  write_text(path("empty.csv"), "d=4,d=4\n");
  try {
    io::load_dataset_csv(path("empty.csv"));
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("no observations"), std::string::npos);
  }

  write_text(path("bad_row.csv"), "d=4,d=4\n0,1\n0\n");
  try {
    io::load_dataset_csv(path("bad_row.csv"));
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }

  write_text(path("bad_cat.csv"), "d=4,d=4\n0,7\n");
  try {
    io::load_dataset_csv(path("bad_cat.csv"));
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }

  write_text(path("bad_header.csv"), "4,4\n0,1\n");
  EXPECT_THROW(io::load_dataset_csv(path("bad_header.csv")), io::ParseError);
  EXPECT_THROW(io::load_dataset_csv(path("missing.csv")), io::IoError);
}

TEST_F(ModelJsonTest, RoundTripBitExact) {
  SimConfig cfg;
  cfg.p = 5;
  cfg.k = 3;
  cfg.d = 4;
  cfg.seed = 44;
  const ModelParams m = sample_model(cfg);
  io::save_model_json(m, path("m.json"));
  const ModelParams back = io::load_model_json(path("m.json"));
  EXPECT_EQ(back.p(), m.p());
  EXPECT_EQ(back.k(), m.k());
  EXPECT_EQ(back.alpha0, m.alpha0);
  for (int j = 0; j < m.p(); ++j) {
    ASSERT_EQ(back.thetas[j].rows(), m.thetas[j].rows());
    EXPECT_EQ((back.thetas[j] - m.thetas[j]).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST_F(ModelJsonTest, ValidationNamesVariableAndColumn) {
  SimConfig cfg;
  cfg.p = 3;
  cfg.k = 2;
  cfg.d = 3;
  cfg.seed = 45;
  ModelParams m = sample_model(cfg);
  std::string text = io::model_to_json(m);
  // corrupt variable 1, column 0 by scaling a row of its theta
  nlohmann::json j = nlohmann::json::parse(text);
  j["variables"][1]["theta"][0] = 0.9;
  j["variables"][1]["theta"][2] = 0.9;
  write_text(path("bad.json"), j.dump());
  try {
    io::load_model_json(path("bad.json"));
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("variable 1"), std::string::npos);
    EXPECT_NE(msg.find("column 0"), std::string::npos);
  }
}

TEST_F(CliTest, SimulateFitEvalPipeline) {
  const int rc_sim = cli::run({"simulate", "--p", "6", "--k", "2", "--d", "3", "--n", "500",
                               "--alpha-h", "0.4", "--seed", "7", "--out-data", path("d.csv"),
                               "--out-model", path("t.json"), "--report", path("r1.json")});
  EXPECT_EQ(rc_sim, cli::kExitOk);
  const int rc_fit =
      cli::run({"fit", "--data", path("d.csv"), "--k", "2", "--alpha0", "0.8", "--seed", "7",
                "--max-iters", "300", "--out-model", path("e.json"), "--report",
                path("r2.json")});
  EXPECT_EQ(rc_fit, cli::kExitOk);
  const int rc_eval = cli::run({"eval", "--est", path("e.json"), "--truth", path("t.json"),
                                "--report", path("r3.json")});
  EXPECT_EQ(rc_eval, cli::kExitOk);

  // reports validate against the documented shape
  std::ifstream in(path("r3.json"));
  nlohmann::json rep = nlohmann::json::parse(in);
  EXPECT_EQ(rep["command"], "eval");
  EXPECT_TRUE(rep["metrics"].contains("rmse"));
  EXPECT_GE(rep["metrics"]["rmse"].get<double>(), 0.0);

  std::ifstream in2(path("r2.json"));
  nlohmann::json rep2 = nlohmann::json::parse(in2);
  EXPECT_EQ(rep2["partition_reports"].size(), 2u);
}

TEST_F(CliTest, EvalSelfIsZero) {
  ASSERT_EQ(cli::run({"simulate", "--p", "4", "--k", "2", "--d", "3", "--n", "50", "--seed",
                      "9", "--out-data", path("d.csv"), "--out-model", path("t.json")}),
            cli::kExitOk);
  ASSERT_EQ(cli::run({"eval", "--est", path("t.json"), "--truth", path("t.json"), "--report",
                      path("r.json")}),
            cli::kExitOk);
  std::ifstream in(path("r.json"));
  nlohmann::json rep = nlohmann::json::parse(in);
  EXPECT_EQ(rep["metrics"]["rmse"].get<double>(), 0.0);
}

TEST_F(CliTest, ExitCodes) {
  // unknown flag -> argument error
  EXPECT_EQ(cli::run({"simulate", "--bogus", "1"}), cli::kExitArgs);
  // missing file -> I/O error
  EXPECT_EQ(cli::run({"fit", "--data", path("none.csv"), "--k", "2", "--alpha0", "1",
                      "--out-model", path("e.json")}),
            cli::kExitIo);
  // malformed CSV -> parse error
  write_text(path("bad.csv"), "d=4,d=4\n0,9\n");
  EXPECT_EQ(cli::run({"fit", "--data", path("bad.csv"), "--k", "2", "--alpha0", "1",
                      "--out-model", path("e.json")}),
            cli::kExitParse);
  // strict mode surfaces non-convergence
  ASSERT_EQ(cli::run({"simulate", "--p", "6", "--k", "2", "--d", "3", "--n", "200", "--seed",
                      "3", "--out-data", path("d.csv"), "--out-model", path("t.json")}),
            cli::kExitOk);
  EXPECT_EQ(cli::run({"fit", "--data", path("d.csv"), "--k", "2", "--alpha0", "0.8",
                      "--max-iters", "2", "--rel-tol", "1e-15", "--strict", "--out-model",
                      path("e.json")}),
            cli::kExitSolver);
}

TEST_F(CliTest, NegfracRuns) {
  ASSERT_EQ(cli::run({"simulate", "--p", "9", "--k", "3", "--d", "4", "--n", "100",
                      "--alpha-h", "0.1", "--seed", "21", "--out-data", path("d.csv"),
                      "--out-model", path("t.json")}),
            cli::kExitOk);
  ASSERT_EQ(cli::run({"negfrac", "--data", path("d.csv"), "--alpha0", "0.3", "--report",
                      path("r.json")}),
            cli::kExitOk);
  std::ifstream in(path("r.json"));
  nlohmann::json rep = nlohmann::json::parse(in);
  const double frac = rep["metrics"]["negative_fraction"].get<double>();
  EXPECT_GE(frac, 0.0);
  EXPECT_LE(frac, 1.0);
}

TEST_F(CliTest, BenchEmitsRequestedRows) {
  ASSERT_EQ(cli::run({"bench", "--p", "9", "--k", "2", "--d", "3", "--n", "200",
                      "--partitions", "1,2,3", "--reps", "1", "--max-iters", "40", "--seed",
                      "2", "--report", path("r.json")}),
            cli::kExitOk);
  std::ifstream in(path("r.json"));
  nlohmann::json rep = nlohmann::json::parse(in);
  ASSERT_EQ(rep["metrics"]["runtimes"].size(), 3u);
  for (const auto& row : rep["metrics"]["runtimes"]) {
    EXPECT_TRUE(row.contains("partitions"));
    EXPECT_TRUE(row.contains("median"));
  }
}

TEST_F(CliTest, JsonConfigSuppliesDefaults) {
  write_text(path("cfg.json"),
             R"({"p": 5, "k": 2, "d": 3, "n": 60, "seed": 12})");
  ASSERT_EQ(cli::run({"simulate", "--config", path("cfg.json"), "--out-data", path("d.csv"),
                      "--out-model", path("t.json")}),
            cli::kExitOk);
  const Dataset data = io::load_dataset_csv(path("d.csv"));
  EXPECT_EQ(data.p, 5);
  EXPECT_EQ(data.n, 60);

  // explicit flags win over config values
  ASSERT_EQ(cli::run({"simulate", "--config", path("cfg.json"), "--n", "30", "--out-data",
                      path("d2.csv"), "--out-model", path("t2.json")}),
            cli::kExitOk);
  EXPECT_EQ(io::load_dataset_csv(path("d2.csv")).n, 30);
}

TEST_F(CliTest, SeedDeterminism) {
  for (int run = 0; run < 2; ++run) {
    ASSERT_EQ(cli::run({"simulate", "--p", "5", "--k", "2", "--d", "3", "--n", "80", "--seed",
                        "77", "--delta", "0.1", "--out-data", path("d" + std::to_string(run) + ".csv"),
                        "--out-model", path("t" + std::to_string(run) + ".json")}),
              cli::kExitOk);
  }
  std::ifstream a(path("d0.csv")), b(path("d1.csv"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}
