#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rencoal/cli.hpp"
#include "rencoal/io.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rencoal::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<rencoal::SweepRow> rows_of(const std::string& csv) {
  std::istringstream in(csv);
  return rencoal::read_sweep_csv(in);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rencoal_cli_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kFixture = std::string(RENCOAL_TEST_DATA_DIR) + "/anticorrelated_4site.csv";

}  // namespace

TEST(Cli, SolveGrandCoalitionWithoutPenalty) {
  const auto r = run({"solve", "--alpha", "3.4", "--q", "0", "--N", "100", "--K", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = rows_of(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].total_bid, 0.1470588, 1e-7);
}

TEST(Cli, SweepExample) {
  const auto r = run({"sweep", "--alpha", "3.4", "--q", "1", "--N", "1000", "--mu", "0.3", "--sigma", "0.075",
                      "--k-list", "1,2,5,10,50,1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = rows_of(r.out);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& row : rows) EXPECT_GE(row.total_bid, rows[0].total_bid);
  EXPECT_EQ(rows[0].k, 1u);
  EXPECT_EQ(rows[5].k, 1000u);
}

TEST(Cli, PartitionOfAntiCorrelatedFixture) {
  const auto r = run({"partition", "--data", kFixture, "--K", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1,3,4\n2\n");
  const auto j = run({"partition", "--data", kFixture, "--K", "2", "--format", "json"});
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["groups"], nlohmann::json::parse("[[1,3,4],[2]]"));
  EXPECT_EQ(doc["sites"][1], "s2");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"solve", "--bogus", "1"}).code, 1);
  EXPECT_EQ(run({"solve", "--pbar", "1"}).code, 1);
  EXPECT_EQ(run({"solve", "--eps-std", "0.1", "--settlement", "fixed"}).code, 1);
  EXPECT_EQ(run({"solve", "--settlement", "real_time", "--q", "1"}).code, 1);
  EXPECT_EQ(run({"solve", "--data", kFixture}).code, 1);
  EXPECT_EQ(run({"solve", "--model", "empirical"}).code, 1);
  EXPECT_EQ(run({"solve", "--N", "10", "--K", "11"}).code, 1);
  EXPECT_EQ(run({"solve", "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"sweep", "--k-list", "1,2", "--k-grid", "log"}).code, 1);
  EXPECT_EQ(run({"partition", "--K", "2"}).code, 1);
  EXPECT_EQ(run({"paths", "--q", "1"}).code, 1);
  const auto r = run({"solve", "--pbar", "1"});
  EXPECT_NE(r.err.find("--pbar"), std::string::npos);
}

TEST(Cli, HelpExitsCleanly) {
  const auto r = run({"sweep", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--k-list"), std::string::npos);
}

TEST(Cli, DataErrors) {
  EXPECT_EQ(run({"partition", "--data", "/nonexistent.csv", "--K", "2"}).code, 2);
  const auto bad = temp_file("bad.csv");
  std::ofstream(bad) << "site_id,timestamp,forecast_mw,capacity_mw\n";
  const auto r = run({"solve", "--model", "empirical", "--data", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("actual_mw"), std::string::npos);
}

TEST(Cli, NonConvergenceExitCode) {
  const auto r = run({"solve", "--q", "0.1", "--N", "100", "--K", "50", "--method", "damped_best_response",
                      "--max-iterations", "300"});
  EXPECT_EQ(r.code, 3);
  const auto rows = rows_of(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].converged);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = temp_file("config.ini");
  std::ofstream(cfg) << "# comment\nalpha = 2\nq = 0\nK = 2\n";
  const auto from_file = rows_of(run({"solve", "--config", cfg.string()}).out);
  EXPECT_NEAR(from_file[0].total_bid, 2.0 / 3.0 / 2.0, 1e-9);
  const auto overridden = rows_of(run({"solve", "--config", cfg.string(), "--alpha", "4"}).out);
  EXPECT_NEAR(overridden[0].total_bid, 2.0 / 3.0 / 4.0, 1e-9);

  std::ofstream(cfg) << "nonsense = 1\n";
  EXPECT_EQ(run({"solve", "--config", cfg.string()}).code, 1);
  EXPECT_EQ(run({"solve", "--config", "/nonexistent.ini"}).code, 1);
}

TEST(Cli, OutputFilesAreByteIdenticalForSameSeed) {
  const auto a = temp_file("paths_a.json");
  const auto b = temp_file("paths_b.json");
  const std::vector<std::string> base{"paths", "--days", "30", "--seed", "7", "--format", "json", "--out"};
  auto args_a = base;
  args_a.push_back(a.string());
  auto args_b = base;
  args_b.push_back(b.string());
  ASSERT_EQ(run(args_a).code, 0);
  ASSERT_EQ(run(args_b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto doc = nlohmann::json::parse(slurp(a));
  ASSERT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(doc["rows"][0]["path"].size(), 30u);
}

TEST(Cli, JsonSolveMirrorsResultFields) {
  const auto r = run({"solve", "--q", "0", "--N", "10", "--K", "2", "--format", "json"});
  const auto doc = nlohmann::json::parse(r.out);
  for (const char* key : {"partition", "bids", "total_bid", "clearing_price", "group_profits",
                          "per_producer_profit", "diagnostics"})
    EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_NEAR(doc["total_bid"].get<double>(), 2.0 / 3.0 / 3.4, 1e-12);
}

TEST(Cli, WideOutputDistributionWarns) {
  const auto r = run({"solve", "--N", "10", "--mu", "0.3", "--sigma", "0.2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, ScalingTable) {
  const auto r = run({"scaling", "--q", "1", "--n-list", "64,512"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "N,K,total_bid,gap,converged");
  EXPECT_EQ(run({"scaling", "--n-list", "512,64"}).code, 1);
}
