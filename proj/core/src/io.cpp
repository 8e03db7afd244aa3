#include "rencoal/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rencoal/errors.hpp"

namespace rencoal {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  detail::throw_data(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, const std::string& source, std::size_t line,
                    const std::string& column) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail_at(source, line, "invalid number '" + text + "' in column " + column);
  }
  return v;
}

bool digits(std::string_view s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) return false;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

bool is_iso8601_timestamp(std::string_view s) {
  // YYYY-MM-DD
  if (!digits(s, 0, 4) || s.size() < 10 || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' ||
      !digits(s, 8, 2)) {
    return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  std::size_t pos = 10;
  if (pos == s.size()) return true;
  if (s[pos] != 'T' && s[pos] != ' ') return false;
  ++pos;
  if (!digits(s, pos, 2) || pos + 2 >= s.size() || s[pos + 2] != ':' || !digits(s, pos + 3, 2)) {
    return false;
  }
  const int hour = (s[pos] - '0') * 10 + (s[pos + 1] - '0');
  const int minute = (s[pos + 3] - '0') * 10 + (s[pos + 4] - '0');
  if (hour > 23 || minute > 59) return false;
  pos += 5;
  if (pos < s.size() && s[pos] == ':') {
    if (!digits(s, pos + 1, 2)) return false;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      const std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) return false;
    }
  }
  if (pos == s.size()) return true;
  if (s[pos] == 'Z') return pos + 1 == s.size();
  if (s[pos] == '+' || s[pos] == '-') {
    if (!digits(s, pos + 1, 2)) return false;
    pos += 3;
    if (pos < s.size() && s[pos] == ':') ++pos;
    return digits(s, pos, 2) && pos + 2 == s.size();
  }
  return false;
}

WindDataset load_wind_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) detail::throw_data("cannot open wind data file '" + path.string() + "'");
  return parse_wind_csv(in, path.string());
}

WindDataset parse_wind_csv(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kColumns{"site_id", "timestamp", "forecast_mw", "actual_mw",
                                                 "capacity_mw"};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) break;
  }
  if (line_no == 0 || line.empty()) detail::throw_data(source + ": empty file, expected header '" + kWindCsvHeader + "'");
  const auto header = split_fields(line);
  for (const auto& col : kColumns) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      fail_at(source, line_no, "header is missing column '" + col + "' (expected '" + kWindCsvHeader + "')");
    }
  }
  if (header != kColumns) {
    fail_at(source, line_no, "header must be exactly '" + std::string(kWindCsvHeader) + "'");
  }

  struct SiteRows {
    double capacity = 0.0;
    std::size_t capacity_line = 0;
    std::vector<std::string> timestamps;
    std::vector<std::size_t> lines;
    std::vector<double> forecast;
    std::vector<double> actual;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, SiteRows> sites;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto f = split_fields(line);
    if (f.size() != kColumns.size()) {
      fail_at(source, line_no, "expected " + std::to_string(kColumns.size()) + " fields, found " +
                                   std::to_string(f.size()));
    }
    if (f[0].empty()) fail_at(source, line_no, "empty site_id");
    if (!is_iso8601_timestamp(f[1])) fail_at(source, line_no, "timestamp '" + f[1] + "' is not ISO-8601");
    const double forecast = parse_double(f[2], source, line_no, "forecast_mw");
    const double actual = parse_double(f[3], source, line_no, "actual_mw");
    const double capacity = parse_double(f[4], source, line_no, "capacity_mw");
    if (forecast < 0.0) fail_at(source, line_no, "negative forecast_mw");
    if (actual < 0.0) fail_at(source, line_no, "negative actual_mw");
    if (!(capacity > 0.0)) fail_at(source, line_no, "capacity_mw must be positive for site '" + f[0] + "'");

    auto [it, inserted] = sites.try_emplace(f[0]);
    SiteRows& s = it->second;
    if (inserted) {
      order.push_back(f[0]);
      s.capacity = capacity;
      s.capacity_line = line_no;
    } else if (capacity != s.capacity) {
      fail_at(source, line_no, "site '" + f[0] + "' capacity " + f[4] + " differs from " +
                                   format_number(s.capacity) + " on line " + std::to_string(s.capacity_line));
    }
    s.timestamps.push_back(f[1]);
    s.lines.push_back(line_no);
    s.forecast.push_back(forecast);
    s.actual.push_back(actual);
  }
  if (order.empty()) detail::throw_data(source + ": no data rows");

  const SiteRows& first = sites.at(order.front());
  const std::size_t t_count = first.timestamps.size();
  std::unordered_set<std::string> seen;
  for (std::size_t t = 0; t < t_count; ++t) {
    if (!seen.insert(first.timestamps[t]).second) {
      fail_at(source, first.lines[t],
              "duplicate timestamp '" + first.timestamps[t] + "' for site '" + order.front() + "'");
    }
  }

  WindDataset ds;
  const auto rows = static_cast<Eigen::Index>(t_count);
  const auto cols = static_cast<Eigen::Index>(order.size());
  ds.forecast_mw.resize(rows, cols);
  ds.actual_mw.resize(rows, cols);
  ds.timestamps = first.timestamps;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const SiteRows& s = sites.at(order[j]);
    if (s.timestamps.size() != t_count) {
      const std::size_t at_line = s.lines.size() > t_count ? s.lines[t_count] : s.lines.back();
      fail_at(source, at_line, "site '" + order[j] + "' has " + std::to_string(s.timestamps.size()) +
                                   " timestamps, site '" + order.front() + "' has " + std::to_string(t_count));
    }
    for (std::size_t t = 0; t < t_count; ++t) {
      if (s.timestamps[t] != first.timestamps[t]) {
        fail_at(source, s.lines[t], "timestamp misalignment: site '" + order[j] + "' row " +
                                        std::to_string(t + 1) + " is '" + s.timestamps[t] + "', expected '" +
                                        first.timestamps[t] + "'");
      }
      ds.forecast_mw(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = s.forecast[t];
      ds.actual_mw(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = s.actual[t];
    }
    ds.sites.push_back({order[j], s.capacity});
  }
  return ds;
}

Eigen::MatrixXd compute_errors(const WindDataset& ds, Normalization normalization) {
  if (ds.n_times() < 2) {
    detail::throw_invalid("compute_errors: need T >= 2 timestamps, got " + std::to_string(ds.n_times()));
  }
  Eigen::MatrixXd err = ds.actual_mw - ds.forecast_mw;
  if (normalization == Normalization::per_site_capacity) {
    for (std::size_t j = 0; j < ds.n_sites(); ++j) {
      err.col(static_cast<Eigen::Index>(j)) /= ds.sites[j].capacity_mw;
    }
  } else {
    double total = 0.0;
    for (const auto& s : ds.sites) total += s.capacity_mw;
    err /= total;
  }
  return err;
}

ForecastModel empirical_model(const WindDataset& ds, double target_mean) {
  const Eigen::MatrixXd err = compute_errors(ds, Normalization::per_site_capacity);
  Eigen::MatrixXd per_unit_forecast = ds.forecast_mw;
  for (std::size_t j = 0; j < ds.n_sites(); ++j) {
    per_unit_forecast.col(static_cast<Eigen::Index>(j)) /= ds.sites[j].capacity_mw;
  }
  const Eigen::RowVectorXd level = per_unit_forecast.colwise().mean();
  const double mean_level = level.mean();
  if (!(mean_level > 0.0)) detail::throw_data("empirical model: mean forecast is zero");
  const Eigen::MatrixXd samples = (err.rowwise() + level) * (target_mean / mean_level);
  return ForecastModel::empirical(samples);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << format_number(r.total_bid) << ',' << format_number(r.clearing_price) << ','
        << format_number(r.per_producer_profit) << ',' << (r.converged ? "true" : "false") << ','
        << format_number(r.residual) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  const std::string source = "<sweep csv>";
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) detail::throw_data("sweep csv: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) fail_at(source, line_no, "unexpected header '" + line + "'");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 6) fail_at(source, line_no, "expected 6 fields");
    SweepRow r;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.k);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) fail_at(source, line_no, "invalid K");
    r.total_bid = parse_double(f[1], source, line_no, "total_bid");
    r.clearing_price = parse_double(f[2], source, line_no, "clearing_price");
    r.per_producer_profit = parse_double(f[3], source, line_no, "per_producer_profit");
    if (f[4] != "true" && f[4] != "false") fail_at(source, line_no, "converged must be true or false");
    r.converged = f[4] == "true";
    r.residual = parse_double(f[5], source, line_no, "residual");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rencoal
