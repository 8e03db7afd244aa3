#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rencoal/errors.hpp"
#include "rencoal/grouping.hpp"
#include "rencoal/io.hpp"

using namespace rencoal;

namespace {

const std::string kHeader = std::string(kWindCsvHeader) + "\n";

std::string two_sites() {
  return kHeader +
         "a,2020-01-01T00:00,10,12,100\n"
         "a,2020-01-01T01:00,20,18,100\n"
         "a,2020-01-01T02:00,30,30,100\n"
         "b,2020-01-01T00:00,5,5,50\n"
         "b,2020-01-01T01:00,6,7,50\n"
         "b,2020-01-01T02:00,7,9,50\n";
}

WindDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_wind_csv(in, "test.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(WindCsv, TwoSitesThreeTimestamps) {
  const auto ds = parse(two_sites());
  EXPECT_EQ(ds.n_sites(), 2u);
  EXPECT_EQ(ds.n_times(), 3u);
  EXPECT_EQ(ds.sites[1].id, "b");
  EXPECT_EQ(ds.sites[1].capacity_mw, 50.0);
  EXPECT_EQ(ds.actual_mw(2, 1), 9.0);
}

TEST(WindCsv, InterleavedSitesAreGrouped) {
  const auto ds = parse(kHeader +
                        "a,2020-01-01,1,1,10\n"
                        "b,2020-01-01,2,2,10\n"
                        "a,2020-01-02,3,3,10\n"
                        "b,2020-01-02,4,4,10\n");
  EXPECT_EQ(ds.forecast_mw(1, 1), 4.0);
}

TEST(WindCsv, MissingColumnIsNamed) {
  const auto msg = error_of("site_id,timestamp,forecast_mw,capacity_mw\na,2020-01-01,1,10\n");
  EXPECT_NE(msg.find("actual_mw"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.csv:1"), std::string::npos) << msg;
}

TEST(WindCsv, ValidationErrorsCarryLineNumbers) {
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,1,1,0\n").find("test.csv:2: capacity_mw"), std::string::npos);
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,-1,1,10\n").find("test.csv:2: negative forecast_mw"), std::string::npos);
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,1,1,10\na,2020-01-02,1,1,11\n").find("test.csv:3"), std::string::npos);
  EXPECT_NE(error_of(kHeader + "a,yesterday,1,1,10\n").find("ISO-8601"), std::string::npos);
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,1,1,10\na,2020-01-01,1,1,10\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,x,1,10\n").find("forecast_mw"), std::string::npos);
  EXPECT_FALSE(error_of("").empty());
}

TEST(WindCsv, MisalignedGridsAreRejected) {
  auto text = two_sites();
  text.replace(text.rfind("T02:00"), 6, "T03:00");
  const auto msg = error_of(text);
  EXPECT_NE(msg.find("misalignment"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.csv:7"), std::string::npos) << msg;
  EXPECT_NE(error_of(kHeader + "a,2020-01-01,1,1,10\na,2020-01-02,1,1,10\nb,2020-01-01,1,1,10\n").find("timestamps"),
            std::string::npos);
}

TEST(WindCsv, MissingFileIsDataError) {
  EXPECT_THROW(load_wind_csv("/nonexistent/wind.csv"), DataError);
}

TEST(Iso8601, AcceptsAndRejects) {
  for (const char* ok : {"2020-01-01", "2020-01-01T00:00", "2020-02-29T23:59:59", "2020-01-01T00:00:00Z",
                         "2020-01-01T00:00:00.250+05:30", "2020-01-01 12:00"})
    EXPECT_TRUE(is_iso8601_timestamp(ok)) << ok;
  for (const char* bad : {"", "2020-1-01", "2020-13-01", "2020-01-32", "2020-01-01T24:00", "01/02/2020",
                          "2020-01-01T00:00:00+5"})
    EXPECT_FALSE(is_iso8601_timestamp(bad)) << bad;
}

TEST(Errors, PerSiteAndTotalNormalization) {
  const auto ds = parse(kHeader +
                        "a,2020-01-01,50,60,100\n"
                        "a,2020-01-02,50,50,100\n");
  const auto per_site = compute_errors(ds, Normalization::per_site_capacity);
  EXPECT_NEAR(per_site(0, 0), 0.10, 1e-15);
  EXPECT_EQ(per_site(1, 0), 0.0);
  const auto both = parse(two_sites());
  const auto total = compute_errors(both, Normalization::total_capacity);
  EXPECT_NEAR(total(0, 0), 2.0 / 150.0, 1e-15);
  EXPECT_NEAR(total(2, 1), 2.0 / 150.0, 1e-15);
}

TEST(Errors, PerfectForecastGivesZeros) {
  const auto ds = parse(kHeader + "a,2020-01-01,5,5,10\na,2020-01-02,7,7,10\nb,2020-01-01,1,1,3\nb,2020-01-02,0,0,3\n");
  EXPECT_TRUE(compute_errors(ds, Normalization::per_site_capacity).isZero(0.0));
}

TEST(Errors, NeedTwoTimestamps) {
  EXPECT_THROW(compute_errors(parse(kHeader + "a,2020-01-01,5,5,10\n"), Normalization::total_capacity), InvalidArgument);
}

TEST(Errors, SyntheticStddevRoundTrip) {
  const double sigma = 0.08;
  const std::size_t t_count = 2000;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, sigma);
  std::ostringstream csv;
  csv << kHeader;
  for (int site = 0; site < 3; ++site) {
    for (std::size_t t = 0; t < t_count; ++t) {
      const std::size_t day = t / 24;
      char stamp[32];
      std::snprintf(stamp, sizeof stamp, "2020-%02zu-%02zuT%02zu:00", 1 + day / 28, 1 + day % 28, t % 24);
      csv << "s" << site << ',' << stamp << ",400," << 400.0 + 1000.0 * noise(rng) << ",1000\n";
    }
  }
  const auto err = compute_errors(parse(csv.str()), Normalization::per_site_capacity);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const auto col = err.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(t_count - 1));
    // std error of a sample std is about sigma / sqrt(2(T-1))
    EXPECT_NEAR(sd, sigma, 3 * sigma / std::sqrt(2.0 * static_cast<double>(t_count - 1)));
  }
}

TEST(EmpiricalModel, FixtureYieldsHandTracedGreedyPartition) {
  const auto ds = load_wind_csv(std::string(RENCOAL_TEST_DATA_DIR) + "/anticorrelated_4site.csv");
  const auto cov = empirical_covariance(compute_errors(ds, Normalization::per_site_capacity));
  EXPECT_EQ(greedy_partition(cov, 2).to_text(), "1,3,4\n2\n");
  const auto model = empirical_model(ds, 0.3);
  EXPECT_EQ(model.kind(), ModelKind::empirical);
  EXPECT_NEAR(model.mean_vector().sum() / 4.0, 0.3, 1e-12);
}

TEST(SweepCsv, RoundTripIsStable) {
  std::vector<SweepRow> rows{{1, 0.1470588235294118, 0.5, 1.0 / 3.0e4, true, 0.0},
                             {7, 0.2612345678901234, 0.1118, -2.5e-7, false, 3.25e-9}};
  std::ostringstream first;
  write_sweep_csv(first, rows);
  std::istringstream in(first.str());
  const auto back = read_sweep_csv(in);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].k, rows[i].k);
    EXPECT_EQ(back[i].converged, rows[i].converged);
    EXPECT_EQ(back[i].total_bid, std::stod(format_number(rows[i].total_bid)));
    EXPECT_NEAR(back[i].per_producer_profit, rows[i].per_producer_profit, 1e-9 * std::abs(rows[i].per_producer_profit));
  }
  std::ostringstream second;
  write_sweep_csv(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().substr(0, first.str().find('\n')), kSweepCsvHeader);
}

TEST(SweepCsv, MalformedInputIsDataError) {
  std::istringstream bad(std::string(kSweepCsvHeader) + "\n1,0.1,0.5,oops,true,0\n");
  EXPECT_THROW(read_sweep_csv(bad), DataError);
  std::istringstream header("K,total\n");
  EXPECT_THROW(read_sweep_csv(header), DataError);
}

TEST(FormatNumber, TenSignificantDigits) {
  EXPECT_EQ(format_number(0.14705882352941177), "0.1470588235");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1.5e-12), "1.5e-12");
}
