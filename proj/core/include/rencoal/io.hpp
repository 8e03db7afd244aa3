#pragma once

// Data ingestion and result tables. MW appear only here; everything returned
// is per-unit.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rencoal/experiments.hpp"
#include "rencoal/stochastic.hpp"

namespace rencoal {

struct Site {
  std::string id;
  double capacity_mw = 0.0;
};

/// Per-site forecast/actual series on a shared timestamp grid.
struct WindDataset {
  std::vector<Site> sites;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd forecast_mw;  ///< T x N
  Eigen::MatrixXd actual_mw;    ///< T x N

  std::size_t n_sites() const { return sites.size(); }
  std::size_t n_times() const { return timestamps.size(); }
};

/// Exact header of the wind CSV format.
inline constexpr const char* kWindCsvHeader = "site_id,timestamp,forecast_mw,actual_mw,capacity_mw";

/// Reads the wind CSV format. Rows may come in any site order; each site's
/// rows must follow the same timestamp sequence. Throws DataError with the
/// offending line number.
WindDataset load_wind_csv(const std::filesystem::path& path);
WindDataset parse_wind_csv(std::istream& in, const std::string& source_name = "<stream>");

/// True for ISO-8601 dates and date-times (YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+hh:mm]).
bool is_iso8601_timestamp(std::string_view text);

enum class Normalization { per_site_capacity, total_capacity };

/// (actual - forecast) / normalizer as a T x N matrix. Requires T >= 2.
Eigen::MatrixXd compute_errors(const WindDataset& ds, Normalization normalization);

/// Empirical output model: each site's mean per-unit forecast plus its
/// historical per-unit errors, rescaled so the mean total output equals
/// `target_mean` (fraction of demand).
ForecastModel empirical_model(const WindDataset& ds, double target_mean = 0.3);

/// Fixed 10-significant-digit formatting used by every CSV writer.
std::string format_number(double v);

inline constexpr const char* kSweepCsvHeader =
    "K,total_bid,clearing_price,per_producer_profit,converged,residual";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace rencoal
