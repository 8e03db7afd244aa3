#include "rencoal/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rencoal/equilibrium.hpp"
#include "rencoal/errors.hpp"
#include "rencoal/experiments.hpp"
#include "rencoal/grouping.hpp"
#include "rencoal/io.hpp"

namespace rencoal::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MarketFlags {
  double alpha = 3.4;
  double q = 1.0;
  double pbar = 1.0;
  double eps_std = 0.05;
  std::string settlement = "fixed";
  CLI::Option* q_opt = nullptr;
  CLI::Option* pbar_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
};

struct ModelFlags {
  std::size_t n = 100;
  double mu = 0.3;
  double sigma = 0.0;
  std::string model = "gaussian_iid";
  std::string data;
  CLI::Option* n_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* data_opt = nullptr;
};

struct OutputFlags {
  std::string out;
  std::string format = "csv";
  std::string config;
};

void add_market(CLI::App& app, MarketFlags& f, bool with_penalty, bool with_real_time) {
  app.add_option("--alpha", f.alpha, "Price slope")->capture_default_str()->check(CLI::PositiveNumber);
  if (with_penalty) {
    f.q_opt = app.add_option("--q", f.q, "Shortfall penalty rate (fixed settlement)")
                  ->capture_default_str()
                  ->check(CLI::NonNegativeNumber);
  }
  if (with_real_time) {
    f.pbar_opt = app.add_option("--pbar", f.pbar, "Real-time price cap")
                     ->capture_default_str()
                     ->check(CLI::NonNegativeNumber);
    f.eps_opt = app.add_option("--eps-std", f.eps_std, "Std of the real-time demand shock")
                    ->capture_default_str()
                    ->check(CLI::NonNegativeNumber);
  }
  if (with_penalty && with_real_time) {
    app.add_option("--settlement", f.settlement, "fixed or real_time")
        ->capture_default_str()
        ->check(CLI::IsMember({"fixed", "real_time", "realtime"}));
  } else if (with_real_time) {
    f.settlement = "real_time";
  }
}

void add_model(CLI::App& app, ModelFlags& f, bool with_data) {
  f.n_opt = app.add_option("--N", f.n, "Number of producers")->capture_default_str()->check(CLI::PositiveNumber);
  f.mu_opt = app.add_option("--mu", f.mu, "Mean output per producer (or target mean with --data)")
                 ->capture_default_str()
                 ->check(CLI::PositiveNumber);
  f.sigma_opt = app.add_option("--sigma", f.sigma, "Output std per producer [default: mu/4]")
                    ->check(CLI::NonNegativeNumber);
  if (with_data) {
    app.add_option("--model", f.model, "gaussian_iid or empirical")
        ->capture_default_str()
        ->check(CLI::IsMember({"gaussian_iid", "empirical"}));
    f.data_opt = app.add_option("--data", f.data, "Wind CSV (empirical model)");
  }
}

void add_output(CLI::App& app, OutputFlags& f) {
  app.add_option("--out", f.out, "Output file [default: stdout]");
  app.add_option("--format", f.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", f.config, "File of 'key = value' lines named after the flags; command-line flags win");
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

bool names_flag(const std::string& arg, const std::string& flag) {
  return arg == flag || arg.rfind(flag + "=", 0) == 0;
}

/// Splices the entries of a --config file in as flags right after the
/// subcommand, skipping keys that also appear on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path || args.empty()) return args;
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file '" + *path + "'");
  std::vector<std::string> flags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw UsageError(*path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string flag = "--" + trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (flag == "--" || flag == "--config") {
      throw UsageError(*path + ":" + std::to_string(line_no) + ": invalid key");
    }
    const bool overridden =
        std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) { return names_flag(a, flag); });
    if (!overridden) {
      flags.push_back(flag);
      flags.push_back(value);
    }
  }
  std::vector<std::string> expanded{args.front()};
  expanded.insert(expanded.end(), flags.begin(), flags.end());
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

MarketParams market_from(const MarketFlags& f) {
  MarketParams p;
  p.alpha = f.alpha;
  p.settlement = parse_settlement(f.settlement);
  if (p.settlement == Settlement::fixed_penalty) {
    if ((f.pbar_opt && f.pbar_opt->count() > 0) || (f.eps_opt && f.eps_opt->count() > 0)) {
      throw UsageError("--pbar and --eps-std apply only to --settlement real_time");
    }
    p.q = f.q;
  } else {
    if (f.q_opt && f.q_opt->count() > 0) throw UsageError("--q applies only to --settlement fixed");
    p.q = 0.0;
    p.pbar = f.pbar;
    p.eps.stddev = f.eps_std;
  }
  p.validate();
  return p;
}

ForecastModel model_from(const ModelFlags& f, std::ostream& err) {
  const bool has_data = f.data_opt && f.data_opt->count() > 0;
  std::optional<ForecastModel> model;
  if (f.model == "empirical") {
    if (!has_data) throw UsageError("--model empirical requires --data");
    if (f.n_opt->count() > 0) throw UsageError("--N is set by the number of sites in --data");
    if (f.sigma_opt->count() > 0) throw UsageError("--sigma does not apply to --model empirical");
    model = empirical_model(load_wind_csv(f.data), f.mu);
  } else {
    if (has_data) throw UsageError("--data requires --model empirical");
    const double sigma = f.sigma_opt->count() > 0 ? f.sigma : ForecastModel::kDefaultRelativeStddev * f.mu;
    model = ForecastModel::gaussian_iid(f.n, f.mu, sigma);
  }
  for (const auto& w : model->warnings()) err << "warning: " << w << '\n';
  return *model;
}

void emit(const OutputFlags& f, const std::string& csv, const json& doc, std::ostream& out) {
  const std::string text = f.format == "json" ? doc.dump(2) + "\n" : csv;
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(f.out, std::ios::binary);
  if (!file) detail::throw_data("cannot open output file '" + f.out + "'");
  file << text;
  if (!file) detail::throw_data("failed writing output file '" + f.out + "'");
}

json groups_json(const Partition& p) {
  json groups = json::array();
  for (const auto& g : p.groups()) {
    json ids = json::array();
    for (auto i : g) ids.push_back(i + 1);
    groups.push_back(ids);
  }
  return groups;
}

json row_json(const SweepRow& r) {
  return {{"K", r.k},
          {"total_bid", r.total_bid},
          {"clearing_price", r.clearing_price},
          {"per_producer_profit", r.per_producer_profit},
          {"converged", r.converged},
          {"residual", r.residual}};
}

// --- subcommands -----------------------------------------------------------

struct SolveCmd {
  MarketFlags market;
  ModelFlags model;
  OutputFlags output;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::string method;
  std::size_t max_iterations = SolverOptions{}.max_iterations;

  void attach(CLI::App& app) {
    add_market(app, market, true, true);
    add_model(app, model, true);
    app.add_option("--K", k, "Number of groups")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--method", method, "Force the general solver: aggregate_bisection or damped_best_response")
        ->check(CLI::IsMember({"aggregate_bisection", "damped_best_response"}));
    app.add_option("--max-iterations", max_iterations, "Best-response iteration limit")->capture_default_str();
    app.add_option("--seed", seed, "Seed for sample-based distributions")->capture_default_str();
    add_output(app, output);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto params = market_from(market);
    const auto m = model_from(model, err);
    const std::size_t n = m.n_producers();
    if (k > n) throw UsageError("--K must not exceed the number of producers");
    SolverOptions opts;
    opts.max_iterations = max_iterations;
    if (method == "damped_best_response") opts.method = AsymmetricMethod::damped_best_response;
    EquilibriumResult r = [&] {
      if (params.settlement == Settlement::real_time_market) {
        if (!method.empty()) throw UsageError("--method applies only to --settlement fixed");
        return solve_real_time(params, m, k, opts);
      }
      if (method.empty() && m.is_exchangeable() && n % k == 0) return solve_symmetric(params, m, k, opts);
      return solve_asymmetric(params, m, Partition::near_equal_blocks(n, k), opts);
    }();

    const SweepRow row{k, r.total_bid, r.clearing_price, r.mean_producer_profit(), r.diagnostics.converged,
                       r.diagnostics.residual};
    std::ostringstream csv;
    write_sweep_csv(csv, {row});
    json doc = {{"partition", groups_json(r.partition)},
                {"bids", r.bids},
                {"total_bid", r.total_bid},
                {"clearing_price", r.clearing_price},
                {"group_profits", r.group_profits},
                {"per_producer_profit", r.per_producer_profit},
                {"diagnostics",
                 {{"iterations", r.diagnostics.iterations},
                  {"residual", r.diagnostics.residual},
                  {"converged", r.diagnostics.converged},
                  {"method", r.diagnostics.method},
                  {"price_clamped", r.diagnostics.price_clamped}}}};
    emit(output, csv.str(), doc, out);
    return r.diagnostics.converged ? kOk : kNotConverged;
  }
};

struct SweepCmd {
  MarketFlags market;
  ModelFlags model;
  OutputFlags output;
  std::vector<std::size_t> k_list;
  std::string k_grid;
  std::string source = "symmetric";
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t max_group_size = 0;

  void attach(CLI::App& app) {
    add_market(app, market, true, true);
    add_model(app, model, true);
    auto* list = app.add_option("--k-list", k_list, "Comma-separated group counts")->delimiter(',');
    app.add_option("--k-grid", k_grid, "divisors or log [default: divisors for symmetric, log otherwise]")
        ->check(CLI::IsMember({"divisors", "log"}))
        ->excludes(list);
    app.add_option("--partition-source", source, "symmetric, greedy or baseline")
        ->capture_default_str()
        ->check(CLI::IsMember({"symmetric", "greedy", "baseline"}));
    app.add_option("--max-group-size", max_group_size, "Greedy group size cap")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for random baselines")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads [default: all cores]");
    add_output(app, output);
  }

  int run(std::ostream& out, std::ostream& err) const {
    SweepSpec spec{.model = model_from(model, err), .params = market_from(market)};
    const std::size_t n = spec.model.n_producers();
    spec.source = parse_partition_source(source);
    spec.seed = seed;
    spec.threads = threads;
    if (max_group_size > 0) spec.greedy.max_group_size = max_group_size;
    if (!k_list.empty()) {
      spec.k_list = k_list;
    } else {
      const bool use_divisors = k_grid.empty() ? spec.source == PartitionSource::symmetric : k_grid == "divisors";
      spec.k_list = use_divisors ? divisors(n) : log_grid(n);
    }
    for (auto k : spec.k_list) {
      if (k < 1 || k > n) throw UsageError("--k-list values must lie in [1, " + std::to_string(n) + "]");
    }
    const auto rows = run_sweep(spec);

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    json doc = {{"rows", json::array()}};
    for (const auto& r : rows) doc["rows"].push_back(row_json(r));
    emit(output, csv.str(), doc, out);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
    return ok ? kOk : kNotConverged;
  }
};

struct PartitionCmd {
  OutputFlags output;
  std::string data;
  std::size_t k = 1;
  std::size_t max_group_size = 0;

  void attach(CLI::App& app) {
    app.add_option("--data", data, "Wind CSV")->required();
    app.add_option("--K", k, "Number of groups")->required()->check(CLI::PositiveNumber);
    app.add_option("--max-group-size", max_group_size, "Group size cap")->check(CLI::PositiveNumber);
    add_output(app, output);
  }

  int run(std::ostream& out, std::ostream&) const {
    const auto ds = load_wind_csv(data);
    const auto cov = empirical_covariance(compute_errors(ds, Normalization::per_site_capacity));
    GreedyOptions opts;
    if (max_group_size > 0) opts.max_group_size = max_group_size;
    const auto p = greedy_partition(cov, k, opts);
    json sites = json::array();
    for (const auto& s : ds.sites) sites.push_back(s.id);
    json doc = {{"groups", groups_json(p)},
                {"sites", sites},
                {"group_variance", total_group_variance(cov.matrix, p)}};
    emit(output, p.to_text(), doc, out);
    return kOk;
  }
};

struct ScalingCmd {
  MarketFlags market;
  ModelFlags model;
  OutputFlags output;
  std::vector<std::size_t> n_list{64, 512, 4096};

  void attach(CLI::App& app) {
    add_market(app, market, true, false);
    app.add_option("--mu", model.mu, "Mean output per producer")->capture_default_str()->check(CLI::PositiveNumber);
    model.sigma_opt = app.add_option("--sigma", model.sigma, "Output std per producer [default: mu/4]")
                          ->check(CLI::NonNegativeNumber);
    app.add_option("--n-list", n_list, "Comma-separated producer counts")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_output(app, output);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto params = market_from(market);
    if (!std::is_sorted(n_list.begin(), n_list.end())) throw UsageError("--n-list must be ascending");
    const double mu = model.mu;
    const double sigma = model.sigma_opt->count() > 0 ? model.sigma : ForecastModel::kDefaultRelativeStddev * mu;
    for (const auto& w : ForecastModel::gaussian_iid(1, mu, sigma).warnings()) err << "warning: " << w << '\n';
    const auto rows = scaling_study(n_list, params,
                                    [&](std::size_t n) { return ForecastModel::gaussian_iid(n, mu, sigma); });

    std::ostringstream csv;
    csv << "N,K,total_bid,gap,converged\n";
    json doc = {{"rows", json::array()}};
    for (const auto& r : rows) {
      csv << r.n << ',' << r.k << ',' << format_number(r.total_bid) << ',' << format_number(r.gap) << ','
          << (r.converged ? "true" : "false") << '\n';
      doc["rows"].push_back(
          {{"N", r.n}, {"K", r.k}, {"total_bid", r.total_bid}, {"gap", r.gap}, {"converged", r.converged}});
    }
    emit(output, csv.str(), doc, out);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
    return ok ? kOk : kNotConverged;
  }
};

struct PathsCmd {
  MarketFlags market;
  ModelFlags model;
  OutputFlags output;
  std::size_t days = 365;
  std::vector<std::size_t> partitions;
  std::uint64_t seed = 0;
  std::string policy = "equilibrium";

  void attach(CLI::App& app) {
    add_market(app, market, false, true);
    add_model(app, model, false);
    app.add_option("--days", days, "Simulated days")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--partitions", partitions, "Comma-separated group counts [default: N,N/10]")->delimiter(',');
    app.add_option("--policy", policy, "equilibrium or common_total")
        ->capture_default_str()
        ->check(CLI::IsMember({"equilibrium", "common_total"}));
    app.add_option("--seed", seed, "Simulation seed")->capture_default_str();
    add_output(app, output);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto params = market_from(market);
    const auto m = model_from(model, err);
    const std::size_t n = m.n_producers();
    std::vector<std::size_t> ks = partitions;
    if (ks.empty()) {
      ks.push_back(n);
      if (n % 10 == 0 && n >= 10) ks.push_back(n / 10);
    }
    std::vector<Partition> parts;
    for (auto k : ks) {
      if (k < 1 || k > n || n % k != 0) throw UsageError("--partitions values must divide N");
      parts.push_back(Partition::equal_blocks(n, k));
    }
    PathStudyOptions opts;
    opts.days = days;
    opts.seed = seed;
    opts.policy = policy == "common_total" ? BidPolicy::common_total : BidPolicy::equilibrium;
    opts.keep_paths = output.format == "json";
    const auto summaries = sample_path_study(params, m, parts, opts);

    std::ostringstream csv;
    csv << "K,reference_group_size,total_bid,mean,stddev,std_error\n";
    json doc = {{"rows", json::array()}};
    for (const auto& s : summaries) {
      csv << s.n_groups << ',' << s.reference_group_size << ',' << format_number(s.total_bid) << ','
          << format_number(s.mean) << ',' << format_number(s.stddev) << ',' << format_number(s.std_error) << '\n';
      doc["rows"].push_back({{"K", s.n_groups},
                             {"reference_group_size", s.reference_group_size},
                             {"bids", s.bids},
                             {"total_bid", s.total_bid},
                             {"mean", s.mean},
                             {"stddev", s.stddev},
                             {"std_error", s.std_error},
                             {"path", s.path}});
    }
    emit(output, csv.str(), doc, out);
    return kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coalition bidding of renewable producers in a Cournot day-ahead market", "rencoal"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(32);

  SolveCmd solve;
  SweepCmd sweep;
  PartitionCmd partition;
  ScalingCmd scaling;
  PathsCmd paths;
  auto* solve_app = app.add_subcommand("solve", "Equilibrium bids for K groups");
  auto* sweep_app = app.add_subcommand("sweep", "Equilibrium total bid across group counts");
  auto* partition_app = app.add_subcommand("partition", "Greedy coalition partition from wind data");
  auto* scaling_app = app.add_subcommand("scaling", "Gap to 1/alpha under K = ceil(N^(2/3))");
  auto* paths_app = app.add_subcommand("paths", "Real-time profit sample paths per partition");
  solve.attach(*solve_app);
  sweep.attach(*sweep_app);
  partition.attach(*partition_app);
  scaling.attach(*scaling_app);
  paths.attach(*paths_app);

  std::vector<std::string> reversed;
  try {
    const auto expanded = expand_config(args);
    reversed.assign(expanded.rbegin(), expanded.rend());
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (solve_app->parsed()) return solve.run(out, err);
    if (sweep_app->parsed()) return sweep.run(out, err);
    if (partition_app->parsed()) return partition.run(out, err);
    if (scaling_app->parsed()) return scaling.run(out, err);
    return paths.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace rencoal::cli
