#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "securesense/cli/commands.hpp"

namespace securesense::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "securesense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("securesense_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

TEST(Config, RoundTripIsExact) {
  ExperimentConfig c = reference_config(3, 8, 4, 1, 4, 2);
  c.evaluation.trials = 17;
  c.evaluation.tol_sdp = 1.234567890123e-11;
  c.scenarios.design_measure = ExplicitMeasure{{0.1, 0.2, 0.3}};
  const io::Json j = config_to_json(c);
  const ExperimentConfig back = parse_config(j);
  EXPECT_EQ(back.model.A, c.model.A);
  EXPECT_EQ(back.model.Sigma1, c.model.Sigma1);
  EXPECT_EQ(back.attackers[1].z, c.attackers[1].z);
  EXPECT_EQ(back.evaluation.tol_sdp, c.evaluation.tol_sdp);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.model_source, "inline");
}

TEST(Config, ReferenceAndGeneratorSources) {
  const auto ref = parse_config(io::Json::parse(R"({"reference": {"seed": 2, "n": 6, "m": 4, "r": 1},
                                                      "scenarios": {"delta": 2}})"));
  EXPECT_EQ(ref.model_source, "reference");
  EXPECT_EQ(ref.attackers.size(), 2u);
  EXPECT_EQ(build_scenarios(ref).size(), 1u + 2u * 3u * 4u / 2u);

  const auto gen = parse_config(io::Json::parse(R"({"model": {"generator": {"n": 5, "m": 2, "r": 1}},
      "objective": {"QF": [[1,0],[0,1]], "RF": [[1]]}, "scenarios": {"delta": 5}})"));
  EXPECT_EQ(gen.model_source, "generator");
  EXPECT_EQ(gen.model.horizon, 5);
  EXPECT_TRUE(check_config(gen).ok());
}

TEST(Config, ExplicitCasesCarryTheirMeasure) {
  const auto c = parse_config(io::Json::parse(R"({"reference": {"n": 6, "m": 4, "r": 1},
      "scenarios": {"delta": 3, "cases": [{"theta": ["F", "F"], "mu": 3}, {"name": "hit", "theta": ["A1", "T"], "mu": 1}]}})"));
  const auto set = build_scenarios(c);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.scenarios[0].name, "case1");
  EXPECT_EQ(set.scenarios[1].name, "hit");
  EXPECT_DOUBLE_EQ(set.scenarios[0].mu, 0.75);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      (void)parse_config(io::Json::parse(text));
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 4, "r": 1}, "scenarios": {"delta": 1}})").find("$.scenarios.delta"),
            std::string::npos);
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 4, "r": 1}, "scenarios": {"delta": 2}, "extra": 1})").find("$.extra"),
            std::string::npos);
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 3, "r": 1}, "scenarios": {"delta": 2}})").find("$.reference.m"),
            std::string::npos);
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 4, "r": 1},
      "scenarios": {"delta": 3, "cases": [{"theta": ["F", "A9"]}]}})").find("$.scenarios.cases[0].theta"),
            std::string::npos);
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 4, "r": 1},
      "scenarios": {"delta": 3, "cases": [{"theta": ["F", "X"]}]}})").find("$.scenarios.cases[0].theta[1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"scenarios": {"delta": 3}})").find("model source"), std::string::npos);
  EXPECT_NE(message(R"({"reference": {"n": 6, "m": 4, "r": 1}, "scenarios": {"delta": 3, "measure": {"no_infiltration": 2}}})")
                .find("$.scenarios.measure.no_infiltration"),
            std::string::npos);
}

TEST(Config, CheckFindsWrongLabelCount) {
  const auto c = parse_config(io::Json::parse(R"({"reference": {"n": 6, "m": 4, "r": 1},
      "scenarios": {"delta": 3, "cases": [{"theta": ["F"]}]}})"));
  EXPECT_FALSE(check_config(c).ok());
}

TEST(Table, FormatsAndClampsNegativeZero) {
  EvaluationReport a{"secure", {{"case1", 0.7, 6, -1e-12, 0, 0}}, 4.04, 0, false};
  EvaluationReport b{"secure-perceived", {{"case1", 0.7, 6, 2.25, 0, 0}}, 2.25, 0, false};
  std::ostringstream os;
  print_comparison(os, {a, b});
  const std::string s = os.str();
  EXPECT_EQ(s.find("-0.0"), std::string::npos);
  EXPECT_NE(s.find("secure-perceived"), std::string::npos);
  EXPECT_NE(s.find("4.0"), std::string::npos);
  std::ostringstream csv;
  write_comparison_csv(csv, {a, b});
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "case,mu,nT,secure_analytic,secure-perceived_analytic");
}

TEST(Checks, Orderings) {
  auto report = [](std::vector<double> v) {
    EvaluationReport r;
    double avg = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      r.rows.push_back({"case" + std::to_string(i + 1), 0.5, 1, v[i], 0, 0});
      avg += 0.5 * v[i];
    }
    r.average_analytic = avg;
    return r;
  };
  const auto good = scenario1_checks(report({0.1, 1}), report({0, 2}), report({100, 100}));
  for (const auto& c : good) EXPECT_TRUE(c.passed) << c.name;
  const auto bad = scenario1_checks(report({0, 3}), report({0.5, 2}), report({10, 10}));
  EXPECT_FALSE(bad[0].passed);
  EXPECT_FALSE(bad[1].passed);
  EXPECT_FALSE(bad[2].passed);
  EXPECT_FALSE(bad[3].passed);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kInputError);
  EXPECT_EQ(invoke({"frobnicate"}).code, kInputError);
  EXPECT_EQ(invoke({"reproduce", "scenario3"}).code, kInputError);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  EXPECT_EQ(invoke({"validate", "--config", (dir_ / "missing.json").string()}).code, kInputError);
}

TEST_F(CliTest, MalformedConfigReportsPath) {
  const auto path = write("bad.json", R"({"reference": {"n": 6, "m": 4, "r": 1}, "scenarios": {"delta": "x"}})");
  const auto r = invoke({"validate", "--config", path});
  EXPECT_EQ(r.code, kInputError);
  EXPECT_NE(r.err.find("$.scenarios.delta"), std::string::npos) << r.err;
  EXPECT_EQ(invoke({"validate", "--config", write("junk.json", "{not json")}).code, kInputError);
}

TEST_F(CliTest, GenerateDesignEvaluate) {
  const auto cfg = (dir_ / "cfg.json").string();
  ASSERT_EQ(invoke({"generate", "--seed", "2", "--n", "8", "--m", "4", "--r", "1", "--delta", "4", "--out", cfg}).code, kOk);
  ASSERT_EQ(invoke({"validate", "--config", cfg}).code, kOk);

  const auto out = (dir_ / "run").string();
  const auto d = invoke({"design", "--config", cfg, "--out", out});
  ASSERT_EQ(d.code, kOk) << d.err;
  EXPECT_TRUE(fs::exists(dir_ / "run" / "design.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "manifest.json"));

  const auto e = invoke({"evaluate", "--config", cfg, "--design", (dir_ / "run" / "design.json").string(), "--out", out,
                         "--trials", "50", "--threads", "2"});
  ASSERT_EQ(e.code, kOk) << e.err;
  std::ifstream csv(dir_ / "run" / "comparison.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_NE(header.find("secure_empirical"), std::string::npos);
  EXPECT_NE(header.find("classical_analytic"), std::string::npos);
  EXPECT_NE(header.find("no-sensor_analytic"), std::string::npos);
  EXPECT_NE(e.out.find("Average"), std::string::npos);

  // Same seed, same numbers.
  const auto again = invoke({"evaluate", "--config", cfg, "--design", (dir_ / "run" / "design.json").string(), "--out",
                             (dir_ / "run2").string(), "--trials", "50"});
  ASSERT_EQ(again.code, kOk);
  std::ifstream a(dir_ / "run" / "comparison.csv"), b(dir_ / "run2" / "comparison.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_F(CliTest, MismatchedDesignIsAnInputError) {
  const auto small = (dir_ / "small.json").string(), big = (dir_ / "big.json").string();
  ASSERT_EQ(invoke({"generate", "--n", "6", "--m", "4", "--delta", "3", "--out", small}).code, kOk);
  ASSERT_EQ(invoke({"generate", "--n", "8", "--m", "4", "--delta", "4", "--out", big}).code, kOk);
  ASSERT_EQ(invoke({"design", "--config", small, "--out", (dir_ / "d").string()}).code, kOk);
  const auto r = invoke({"evaluate", "--config", big, "--design", (dir_ / "d" / "design.json").string(), "--out",
                         (dir_ / "e").string()});
  EXPECT_EQ(r.code, kInputError);
}

TEST_F(CliTest, SmallReproductionRuns) {
  const auto out = (dir_ / "rep").string();
  const auto r = invoke({"reproduce", "scenario2", "--n", "12", "--m", "4", "--r", "1", "--delta", "4", "--out", out});
  EXPECT_EQ(r.code, kOk) << r.out << r.err;
  for (const char* f : {"design.json", "design_perceived.json", "comparison.csv", "summary.txt", "checks.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / "rep" / f)) << f;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

}  // namespace
}  // namespace securesense::cli
