#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nllt/commands.hpp"
#include "nllt/error.hpp"

namespace {

template <typename T>
std::optional<T> if_set(CLI::Option* opt, const T& value) {
  return opt->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonconventional sums of finite Markov chains: mixing, decomposition, lattice type, variance, "
               "characteristic functions and local limit comparisons.\n"
               "Usage: nllt analyze|simulate|llt|cf-scan <instance.json> [flags]"};
  app.footer(std::string(nllt::csv_column_help()) +
             "Environment: NLLT_MAX_ENUM overrides the 2^24 path-enumeration cap.\n"
             "Exit codes: 0 ok, 2 parse/validation/usage, 3 precondition, 4 budget or cap.");
  app.require_subcommand(1);

  std::string path;
  std::string out_dir;
  std::size_t horizon = 0, samples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double sigma2 = 0.0, half_width = 0.5;
  std::string theta_text, n_text, mode_text = "exact";
  int block = 0;
  double q_min = 0.2, q_max = 0.0, r_max = 0.1;

  auto* analyze = app.add_subcommand("analyze", "Decomposition, lattice verdict, mixing tables, s_ell^2, positivity");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo law of S_N, CLT KS statistic and covariance matrix");
  auto* llt = app.add_subcommand("llt", "Local limit comparison of sigma sqrt(2 pi N) P{S_N = u} with the Gaussian");
  auto* cf = app.add_subcommand("cf-scan", "Characteristic-function decay fits and contraction numbers");

  for (auto* sub : {analyze, simulate, llt, cf}) {
    sub->add_option("instance", path, "Instance JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Directory for CSV files and report.json");
  }
  CLI::Option *o_horizon[2], *o_samples[3], *o_seed[3], *o_sigma[2];
  int idx = 0;
  for (auto* sub : {simulate, llt}) {
    o_horizon[idx] = sub->add_option("--horizon,-N", horizon, "Horizon N (>= 1)")->check(CLI::PositiveNumber);
    o_sigma[idx] = sub->add_option("--sigma2", sigma2, "Reference variance (default: sample var(S_N)/N)");
    ++idx;
  }
  idx = 0;
  for (auto* sub : {simulate, llt, cf}) {
    o_samples[idx] = sub->add_option("--samples,-M", samples, "Monte Carlo sample count M (>= 1)")
                         ->check(CLI::PositiveNumber);
    o_seed[idx] = sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--workers", workers, "Worker threads; never changes values")->check(CLI::PositiveNumber);
    ++idx;
  }
  llt->add_option("--half-width", half_width, "Triangle test-function half-width (non-lattice)")
      ->check(CLI::PositiveNumber);
  auto* o_theta = cf->add_option("--theta-grid", theta_text, "theta values: a,b,c or start:stop:step");
  auto* o_ngrid = cf->add_option("--n-grid", n_text, "horizons: a,b,c or start:stop:step");
  cf->add_option("--mode", mode_text, "exact or mc")->check(CLI::IsMember({"exact", "mc", "monte_carlo"}));
  auto* o_block = cf->add_option("--block-length", block, "Block length m (default: least with (m-2) ell >= k)");
  cf->add_option("--q-min", q_min, "Lower end of the bounded-theta fit window");
  auto* o_qmax = cf->add_option("--q-max", q_max, "Upper end of the bounded-theta fit window");
  cf->add_option("--r-max", r_max, "Upper end of the small-theta fit window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const nllt::InstanceFile instance = nllt::load_instance(path);
    nllt::CommandResult result;
    if (analyze->parsed()) {
      result = nllt::cmd_analyze(instance);
    } else if (simulate->parsed()) {
      nllt::SimulateOptions opts;
      opts.horizon = if_set(o_horizon[0], horizon);
      opts.samples = if_set(o_samples[0], samples);
      opts.seed = if_set(o_seed[0], seed);
      opts.sigma2 = if_set(o_sigma[0], sigma2);
      opts.workers = workers;
      result = nllt::cmd_simulate(instance, opts);
    } else if (llt->parsed()) {
      nllt::LltOptions opts;
      opts.horizon = if_set(o_horizon[1], horizon);
      opts.samples = if_set(o_samples[1], samples);
      opts.seed = if_set(o_seed[1], seed);
      opts.sigma2 = if_set(o_sigma[1], sigma2);
      opts.workers = workers;
      opts.half_width = half_width;
      result = nllt::cmd_llt(instance, opts);
    } else {
      nllt::CfScanOptions opts;
      if (o_theta->count()) opts.theta_grid = nllt::parse_real_grid(theta_text);
      if (o_ngrid->count()) opts.n_grid = nllt::parse_count_grid(n_text);
      opts.mode = mode_text == "exact" ? nllt::CfMode::Exact : nllt::CfMode::MonteCarlo;
      opts.samples = if_set(o_samples[2], samples);
      opts.seed = if_set(o_seed[2], seed);
      opts.workers = workers;
      opts.block_length = if_set(o_block, block);
      opts.windows.q_min = q_min;
      if (o_qmax->count()) opts.windows.q_max = q_max;
      opts.windows.r_max = r_max;
      result = nllt::cmd_cf_scan(instance, opts);
    }
    if (!out_dir.empty()) nllt::write_outputs(result, out_dir);
    std::cout << result.report.dump(2) << "\n";
    return 0;
  } catch (const nllt::Error& e) {
    std::cerr << "nllt: " << e.what() << "\n";
    return nllt::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "nllt: internal error: " << e.what() << "\n";
    return 1;
  }
}
