#include "nllt/commands.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "nllt/error.hpp"
#include "nllt/fourier.hpp"
#include "nllt/variance.hpp"

namespace nllt {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

json header(const char* command, const InstanceFile& instance) {
  json out;
  out["command"] = command;
  out["tool_version"] = kToolVersion;
  out["instance_name"] = instance.name;
  out["instance_digest"] = instance.digest;
  return out;
}

void finish(json& report, Clock::time_point start) {
  report["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

std::optional<double> try_s_ell2(const NonconvInstance& instance, json& sink) {
  try {
    const double s2 = s_ell_squared(instance.chain, instance.decomposition);
    sink = s2;
    return s2;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CapExceeded && e.code() != ErrorCode::SolveFailed) throw;
    sink = {{"unavailable", e.what()}};
    return std::nullopt;
  }
}

json verdict_json(const VarianceReport& report) {
  json out;
  out["verdict"] = to_string(report.verdict);
  out["route"] = report.route;
  out["s_ell2"] = report.s_ell2 ? json(*report.s_ell2) : json(nullptr);
  out["lower_bound"] = report.lower_bound ? json(*report.lower_bound) : json(nullptr);
  out["basis"] = {{"rho_ell_below_one", report.basis.correlation},
                  {"delta_ell_below_one", report.basis.contraction},
                  {"overlap_rows", report.basis.overlap_rows},
                  {"overlap_columns", report.basis.overlap_columns},
                  {"f_ell_nonzero", report.basis.f_ell_nonzero}};
  return out;
}

std::size_t pick_samples(std::optional<std::size_t> flag, const InstanceDefaults& defaults) {
  const std::size_t m = flag.value_or(defaults.samples.value_or(kDefaultSamples));
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "sample count M must be >= 1");
  return m;
}

std::size_t pick_horizon(std::optional<std::size_t> flag, const InstanceDefaults& defaults) {
  const std::size_t n = flag.value_or(defaults.horizon.value_or(kDefaultHorizon));
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "horizon N must be >= 1");
  return n;
}

std::string row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.1};
  for (int i = 1; i <= 15; ++i) grid.push_back(0.2 * i);
  return grid;
}

}  // namespace

CommandResult cmd_analyze(const InstanceFile& file, const AnalyzeOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  json& report = result.report;
  report = header("analyze", file);

  const Observable& raw = file.observable;
  report["observable"] = {{"ell", raw.ell},
                          {"mean", raw.mean},
                          {"exact_mean", raw.exact_mean ? json(raw.exact_mean->str()) : json(nullptr)},
                          {"second_moment", raw.second_moment}};
  const NonconvInstance instance = make_instance(file.chain, raw);
  report["observable"]["centered_second_moment"] = instance.observable.second_moment;
  report["observable"]["exact_values_dropped"] = instance.observable.exact_dropped;

  json components = json::array();
  for (std::size_t i = 0; i < instance.decomposition.components.size(); ++i) {
    const auto& table = instance.decomposition.components[i];
    double max_abs = 0.0;
    for (double v : table) max_abs = std::max(max_abs, std::abs(v));
    std::vector<double> squares(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) squares[k] = table[k] * table[k];
    components.push_back({{"index", i + 1},
                          {"max_abs", max_abs},
                          {"second_moment", integrate(squares, static_cast<int>(i + 1), file.chain.stationary())}});
  }
  report["decomposition"] = {{"components", components}, {"f_ell_zero", is_F_ell_zero(instance.decomposition)}};
  report["lattice"] = lattice_json(instance.lattice, file.chain);

  const MixingProfile profile = mixing_profile(file.chain, raw.ell, options.max_lag);
  report["mixing"] = mixing_json(profile);

  json s_node;
  const auto s2 = try_s_ell2(instance, s_node);
  report["s_ell2"] = s_node;
  report["positivity"] = verdict_json(positivity_verdict(instance, profile, s2));
  finish(report, start);
  return result;
}

CommandResult cmd_simulate(const InstanceFile& file, const SimulateOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  json& report = result.report;
  report = header("simulate", file);
  const std::size_t n = pick_horizon(options.horizon, file.defaults);
  const std::size_t m = pick_samples(options.samples, file.defaults);
  const std::uint64_t seed = options.seed.value_or(file.defaults.seed.value_or(kDefaultSeed));
  report["horizon"] = n;
  report["samples"] = m;
  report["seed"] = seed;
  report["workers"] = options.workers;

  const NonconvInstance instance = make_instance(file.chain, file.observable);
  const MonteCarloBatch batch = run_monte_carlo(instance, {n, m, seed, options.workers}, true);
  const EmpiricalDistribution dist = empirical_distribution(instance, batch);

  std::string csv = row({"value", "mass", "stderr"});
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    csv += row({format_double(dist.support[i]), format_double(dist.mass[i]), format_double(dist.stderr_per_point[i])});
  }
  result.files["distribution.csv"] = std::move(csv);
  report["distribution"] = {{"support_size", dist.support.size()},
                            {"binned_on_lattice", instance.lattice.kind == LatticeKind::Lattice}};

  const SigmaGridPoint var = variance_point(batch.totals, n);
  report["var_over_n"] = var.value;
  report["var_over_n_stderr"] = var.stderr;

  const double sigma2 = options.sigma2.value_or(var.value);
  report["clt"] = {{"sigma2", sigma2}, {"sigma2_source", options.sigma2 ? "flag" : "sample var(S_N)/N"}};
  if (sigma2 > 0.0) {
    report["clt"]["ks"] = clt_check(batch, sigma2).ks;
  } else {
    report["clt"]["ks"] = nullptr;
    report["clt"]["note"] = "degenerate variance, KS statistic not defined";
  }

  if (m >= 2) {
    const CovarianceReport cov = covariance_matrix(batch);
    std::string cov_csv = row({"i", "j", "C", "C_stderr", "D", "D_stderr"});
    for (Eigen::Index i = 0; i < cov.c_hat.rows(); ++i) {
      for (Eigen::Index j = 0; j < cov.c_hat.cols(); ++j) {
        cov_csv += row({std::to_string(i + 1), std::to_string(j + 1), format_double(cov.c_hat(i, j)),
                        format_double(cov.c_stderr(i, j)), format_double(cov.d_hat(i, j)),
                        format_double(cov.d_stderr(i, j))});
      }
    }
    result.files["covariance.csv"] = std::move(cov_csv);
    report["covariance"] = {{"C", matrix_json(cov.c_hat)},       {"C_stderr", matrix_json(cov.c_stderr)},
                            {"D", matrix_json(cov.d_hat)},       {"D_stderr", matrix_json(cov.d_stderr)},
                            {"sum_C", cov.sum_c},                {"sum_C_stderr", cov.sum_stderr},
                            {"var_over_n", cov.var_over_n}};
  }
  finish(report, start);
  return result;
}

CommandResult cmd_llt(const InstanceFile& file, const LltOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  json& report = result.report;
  report = header("llt", file);
  const std::size_t n = pick_horizon(options.horizon, file.defaults);
  const std::size_t m = pick_samples(options.samples, file.defaults);
  const std::uint64_t seed = options.seed.value_or(file.defaults.seed.value_or(kDefaultSeed));
  report["horizon"] = n;
  report["samples"] = m;
  report["seed"] = seed;
  report["workers"] = options.workers;

  const NonconvInstance instance = make_instance(file.chain, file.observable);
  if (instance.lattice.kind == LatticeKind::Other) {
    throw Error(ErrorCode::KindOther, "lattice classification is Other (" + instance.lattice.diagnostic +
                                          "); the local limit comparison is defined only for lattice and "
                                          "non-lattice observables");
  }
  const MixingProfile profile = mixing_profile(file.chain, file.observable.ell);
  json s_node;
  const auto s2 = try_s_ell2(instance, s_node);
  const VarianceReport verdict = positivity_verdict(instance, profile, s2);
  report["positivity"] = verdict_json(verdict);
  if (verdict.verdict == PositivityVerdict::DegenerateFEllZero || verdict.verdict == PositivityVerdict::Inconclusive) {
    throw Error(ErrorCode::DegenerateVariance,
                std::string("positivity verdict ") + to_string(verdict.verdict) + ": " + verdict.route);
  }

  const MonteCarloBatch batch = run_monte_carlo(instance, {n, m, seed, options.workers}, false);
  const SigmaGridPoint var = variance_point(batch.totals, n);
  const double sigma2 = options.sigma2.value_or(var.value);
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "sigma^2 = " + format_double(sigma2));
  const LltReport llt = llt_check(instance, batch, sigma2, options.half_width);

  std::string csv = row({"u", "L", "R", "stderr"});
  for (const auto& r : llt.rows) {
    csv += row({format_double(r.u), format_double(r.local), format_double(r.gauss), format_double(r.stderr)});
  }
  result.files["llt.csv"] = std::move(csv);
  report["llt"] = {{"lattice", llt.lattice},
                   {llt.lattice ? "h" : "half_width", llt.h},
                   {"sigma2", sigma2},
                   {"sigma2_source", options.sigma2 ? "flag" : "sample var(S_N)/N"},
                   {"points", llt.rows.size()},
                   {"max_deviation", llt.max_deviation},
                   {"max_stderr", llt.max_stderr},
                   {"noise_budget_3sigma", 3.0 * llt.max_stderr}};
  finish(report, start);
  return result;
}

CommandResult cmd_cf_scan(const InstanceFile& file, const CfScanOptions& options) {
  const auto start = Clock::now();
  CommandResult result;
  json& report = result.report;
  report = header("cf-scan", file);
  const std::vector<double> thetas = options.theta_grid.value_or(file.defaults.theta_grid.value_or(default_theta_grid()));
  std::vector<std::size_t> horizons = options.n_grid.value_or(
      file.defaults.n_grid.value_or(std::vector<std::size_t>{2, 3, 4, 5, 6, 7, 8, 9, 10}));
  if (thetas.empty() || horizons.empty()) throw Error(ErrorCode::InvalidArgument, "theta and N grids must be non-empty");
  for (std::size_t v : horizons) {
    if (v < 1) throw Error(ErrorCode::InvalidArgument, "N grid entries must be >= 1");
  }

  CfRequest request;
  request.mode = options.mode;
  request.workers = options.workers;
  if (options.mode == CfMode::MonteCarlo) {
    request.samples = pick_samples(options.samples, file.defaults);
    request.seed = options.seed.value_or(file.defaults.seed.value_or(kDefaultSeed));
    report["samples"] = request.samples;
    report["seed"] = request.seed;
    report["workers"] = options.workers;
  }
  report["mode"] = to_string(options.mode);
  report["theta_grid"] = thetas;
  report["n_grid"] = horizons;

  const NonconvInstance instance = make_instance(file.chain, file.observable);
  const ContractionScan scan = cf_decay_scan(instance, thetas, horizons, request, options.windows);

  std::string cf_csv = row({"theta", "N", "abs_phi", "mode"});
  json flagged = json::array();
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      cf_csv += row({format_double(thetas[t]), std::to_string(horizons[k]), format_double(scan.abs_phi[k][t]),
                     to_string(options.mode)});
      if (scan.below_noise_floor[k][t]) flagged.push_back({{"theta", thetas[t]}, {"N", horizons[k]}});
    }
  }
  result.files["cf.csv"] = std::move(cf_csv);

  json fits = json::array();
  for (const auto& fit : scan.q_fits) {
    fits.push_back({{"theta", fit.theta},
                    {"q", fit.q},
                    {"intercept", fit.intercept},
                    {"residual", fit.residual},
                    {"points", fit.points}});
  }
  report["q_window"] = {scan.q_min, scan.q_max};
  report["q_fits"] = fits;
  report["r_window_max"] = scan.r_max;
  report["r_fit"] = scan.r_fit ? json(*scan.r_fit) : json(nullptr);
  report["r_residual"] = scan.r_residual;
  report["r_points"] = scan.r_points;
  if (options.mode == CfMode::MonteCarlo) {
    report["noise_floor"] = scan.noise_floor;
    report["below_noise_floor"] = flagged;
  }

  std::string rho_csv = row({"theta", "prefix_index", "rho"});
  try {
    const ContractionProfile profile = contraction_profile(instance, thetas, options.block_length);
    json points = json::array();
    for (const auto& point : profile.points) {
      for (std::size_t p = 0; p < point.rho.size(); ++p) {
        rho_csv += row({format_double(point.theta), std::to_string(p), format_double(point.rho[p])});
      }
      points.push_back({{"theta", point.theta},
                        {"min", point.min},
                        {"max", point.max},
                        {"mean", point.mean},
                        {"contracting_prefixes", point.contracting},
                        {"contracting_mass", point.contracting_mass}});
    }
    report["contraction"] = {{"block_length", profile.block_length},
                             {"prefix_count", profile.prefix_count},
                             {"points", points},
                             {"r_per_prefix", profile.r_per_prefix},
                             {"r_best", profile.r_best ? json(*profile.r_best) : json(nullptr)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PositivityWindowUnavailable) throw;
    report["contraction"] = {{"unavailable", e.what()}};
  }
  result.files["contraction.csv"] = std::move(rho_csv);
  finish(report, start);
  return result;
}

void write_outputs(const CommandResult& result, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [name, contents] : result.files) write_file(directory / name, contents);
  write_file(directory / "report.json", result.report.dump(2) + "\n");
}

const char* csv_column_help() {
  return "CSV outputs (written to --out):\n"
         "  simulate  distribution.csv  value,mass,stderr       law of S_N (lattice: binned on hZ)\n"
         "            covariance.csv    i,j,C,C_stderr,D,D_stderr   C = Cov(S_i,N, S_j,N)/N, D = C/min(i,j)\n"
         "  llt       llt.csv           u,L,R,stderr            L = sigma sqrt(2 pi N) E g(S_N - u), R = mass of g\n"
         "                                                      times exp(-u^2/(2 N sigma^2))\n"
         "  cf-scan   cf.csv            theta,N,abs_phi,mode    |E exp(i theta S_N)|\n"
         "            contraction.csv   theta,prefix_index,rho  rho_theta per prefix (row-major prefix index)\n"
         "Every command also writes report.json (digest, seeds, fits, wall time).\n";
}

}  // namespace nllt
