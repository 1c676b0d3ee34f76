#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using compois::cli::run;

namespace {

struct Output {
  int code;
  std::string out;
  std::string err;
};

Output call(std::vector<std::string> args) {
  args.insert(args.begin(), "compois");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("compois_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("COMPOIS_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("COMPOIS_SEED");
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return path(name);
  }
  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

const std::string kData = std::string(COMPOIS_DATA_DIR) + "/takeover_bids.csv";

}  // namespace

TEST_F(CliTest, SampleUnitDispersionOneTrialEach) {
  const auto r = call({"sample", "--mu", "3", "--nu", "1", "--n", "200", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "value,trials");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.substr(line.find(',') + 1), "1");
    ++rows;
  }
  EXPECT_EQ(rows, 200);
  EXPECT_NE(r.err.find("acceptance_rate=1"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  const auto missing = call({"sample", "--nu", "0.5"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--mu"), std::string::npos);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"sample", "--mu", "-1", "--nu", "0.5"}).code, 2);
  EXPECT_EQ(call({"fit", "--data", kData, "--algorithm", "hmc"}).code, 2);
  EXPECT_EQ(call({"--version"}).code, 0);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(call({"fit", "--data", kData, "--formula", "mu ~ FOO", "--iterations", "100",
                  "--burnin", "10"})
                .code,
            3);
  EXPECT_EQ(call({"fit", "--data", path("absent.csv"), "--iterations", "100"}).code, 3);
  const auto frac = write("frac.csv", "Y,X\n1,0.5\n2.5,1\n");
  EXPECT_EQ(call({"fit", "--data", frac, "--formula", "mu ~ X ; response = Y", "--iterations",
                  "100", "--burnin", "10"})
                .code,
            3);
  const auto ragged = write("ragged.csv", "Y,X\n1,0.5\n2\n");
  EXPECT_EQ(call({"fit", "--data", ragged, "--formula", "mu ~ X ; response = Y"}).code, 3);
  const auto text = write("text.csv", "Y,X\n1,abc\n");
  EXPECT_EQ(call({"fit", "--data", text, "--formula", "mu ~ X ; response = Y"}).code, 3);
}

TEST_F(CliTest, SeedFromEnvironment) {
  const auto a = call({"sample", "--mu", "2", "--nu", "0.5", "--n", "50", "--seed", "77"});
  setenv("COMPOIS_SEED", "77", 1);
  const auto b = call({"sample", "--mu", "2", "--nu", "0.5", "--n", "50"});
  EXPECT_EQ(a.out, b.out);
  setenv("COMPOIS_SEED", "seventy", 1);
  EXPECT_EQ(call({"sample", "--mu", "2", "--nu", "0.5"}).code, 2);
}

TEST_F(CliTest, FitWritesOutputsAndRerunMatches) {
  const std::string prefix = path("fit");
  const auto r = call({"fit", "--data", kData, "--model", "model1", "--iterations", "600",
                       "--burnin", "100", "--seed", "3", "--out", prefix});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* suffix : {"_chain.csv", "_summary.json", "_manifest.json"}) {
    EXPECT_TRUE(fs::exists(prefix + suffix)) << suffix;
  }
  const auto summary = nlohmann::json::parse(read(prefix + "_summary.json"));
  EXPECT_EQ(summary.at("retained"), 500);
  const auto manifest = nlohmann::json::parse(read(prefix + "_manifest.json"));
  EXPECT_EQ(manifest.at("seed"), 3);

  const auto again = call({"rerun", "--manifest", prefix + "_manifest.json", "--out",
                           path("again")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(again.out.find("DIFFERENT"), std::string::npos) << again.out;
  EXPECT_NE(again.out.find("identical"), std::string::npos);
  EXPECT_EQ(read(prefix + "_chain.csv"), read(path("again") + "_chain.csv"));
}

TEST_F(CliTest, RerunDetectsChangedOutput) {
  const std::string out = path("draws.csv");
  ASSERT_EQ(call({"sample", "--mu", "2", "--nu", "0.5", "--n", "20", "--out", out}).code, 0);
  auto manifest = nlohmann::json::parse(read(out + ".manifest.json"));
  manifest["outputs"][0]["fnv1a64"] = "0000000000000000";
  std::ofstream(out + ".manifest.json") << manifest.dump();
  const auto r = call({"rerun", "--manifest", out + ".manifest.json", "--out", path("d2.csv")});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("DIFFERENT"), std::string::npos);
}

TEST_F(CliTest, BicWritesRankedTable) {
  const std::string out = path("bic.csv");
  const auto r = call({"bic", "--data", kData, "--models", "model1,model5r", "--r", "50",
                       "--iterations", "500", "--burnin", "100", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(read(out));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "model,k,n,r,loglik_hat,bic_hat,rank");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(CliTest, Fnv1a) {
  EXPECT_EQ(compois::cli::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(compois::cli::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
