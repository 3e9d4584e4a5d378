#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/distribution.hpp"
#include "nllt/lattice.hpp"
#include "nllt/observable.hpp"
#include "nllt/rng.hpp"

namespace nllt {

/// Chain plus centered observable, its decomposition and lattice verdict.
struct NonconvInstance {
  FiniteChain chain;
  Observable observable;
  Decomposition decomposition;
  LatticeClassification lattice;
};

/// Centers the observable, decomposes it and classifies it.
NonconvInstance make_instance(const FiniteChain& chain, const Observable& observable);

struct SimConfig {
  std::size_t horizon = 1;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Upper bound on samples * path length; BudgetExceeded beyond it.
  double step_budget = 5e10;
};

/// Path sampler with reusable buffers; one per thread.
class PathSampler {
 public:
  explicit PathSampler(const NonconvInstance& instance);

  /// Draws xi_0 ~ mu, runs the chain to index ell*N and returns
  /// S_N = sum_{n<=N} F(xi_n, xi_{2n}, ..., xi_{ell n}). When components is
  /// non-empty (size ell) it receives S_{1,N}, ..., S_{ell,N}.
  double sample(std::size_t horizon, SampleStream& stream, std::span<double> components = {});

  /// Evaluates S_N and components on a given path xi_0..xi_{ell N}.
  double evaluate(std::span<const int> path, std::size_t horizon, std::span<double> components = {}) const;

  const std::vector<int>& last_path() const noexcept { return path_; }

 private:
  const NonconvInstance* instance_;
  std::vector<std::vector<double>> cdf_;
  std::vector<double> initial_cdf_;
  std::vector<int> path_;
};

double sample_S_N(const NonconvInstance& instance, std::size_t horizon, SampleStream& stream,
                  std::span<double> components = {});

/// Raw Monte Carlo output, one entry per sample index (components row-major,
/// samples x ell).
struct MonteCarloBatch {
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  int ell = 1;
  std::vector<double> totals;
  std::vector<double> components;
};

MonteCarloBatch run_monte_carlo(const NonconvInstance& instance, const SimConfig& config, bool with_components);

/// Enumeration cap on S^{ell N + 1} paths: 2^24 unless NLLT_MAX_ENUM is set.
std::size_t enumeration_cap();

/// Exact law of S_N by enumerating every path xi_0..xi_{ell N}.
EmpiricalDistribution exact_distribution(const NonconvInstance& instance, std::size_t horizon);
EmpiricalDistribution exact_distribution(const NonconvInstance& instance, std::size_t horizon, std::size_t cap);

/// Exact law of S_N for additively separable observables F = sum_j g_j(x_j)
/// with commensurable parts, by forward recursion over the chain in
/// (state, partial sum); no path enumeration, so large N is reachable.
/// Throws NotAdditive otherwise.
EmpiricalDistribution additive_exact_distribution(const NonconvInstance& instance, std::size_t horizon);

/// Lattice instances are binned at multiples of h; others keep every distinct
/// sampled value.
EmpiricalDistribution empirical_distribution(const NonconvInstance& instance, const MonteCarloBatch& batch);
EmpiricalDistribution empirical_distribution(const NonconvInstance& instance, std::size_t horizon,
                                             std::size_t samples, std::uint64_t seed, unsigned workers);

enum class CfMode { Exact, MonteCarlo };

const char* to_string(CfMode mode);

struct CFSample {
  CfMode mode = CfMode::Exact;
  std::vector<double> theta_grid;
  std::vector<std::size_t> horizons;
  /// phi[n][t] = phi_{horizons[n]}(theta_grid[t]).
  std::vector<std::vector<std::complex<double>>> phi;
  std::optional<std::size_t> sample_count;
  /// Lattice instances, exact mode: max |phi(theta + 2 pi / h) - phi(theta)| on the grid.
  std::optional<double> periodicity_defect;
  std::optional<double> fitted_q;
  std::optional<double> fitted_r;
};

std::complex<double> characteristic_value(const EmpiricalDistribution& distribution, double theta);
std::complex<double> characteristic_value(std::span<const double> samples, double theta);

struct CfRequest {
  CfMode mode = CfMode::Exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

CFSample characteristic_function(const NonconvInstance& instance, std::size_t horizon,
                                 const std::vector<double>& theta_grid, const CfRequest& request = {});

/// Kolmogorov-Smirnov distance between the law of the samples and N(0, sigma2).
double ks_distance_normal(std::vector<double> samples, double sigma2);

struct CltReport {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  double sigma2 = 0.0;
  double ks = 0.0;
};

CltReport clt_check(const NonconvInstance& instance, std::size_t horizon, std::size_t samples, std::uint64_t seed,
                    double sigma2, unsigned workers = 1);
/// KS distance of N^{-1/2} S_N for an existing batch.
CltReport clt_check(const MonteCarloBatch& batch, double sigma2);

struct LltRow {
  double u = 0.0;
  double local = 0.0;  // sigma sqrt(2 pi N) E g(S_N - u)
  double gauss = 0.0;  // e^{-u^2/(2 N sigma^2)} times the mass of g
  double stderr = 0.0;
};

struct LltReport {
  bool lattice = true;
  double h = 0.0;           // lattice span, or triangle half-width w for non-lattice
  std::size_t horizon = 0;
  std::optional<std::size_t> samples;
  double sigma2 = 0.0;
  std::vector<LltRow> rows;
  double max_deviation = 0.0;
  double max_stderr = 0.0;
};

/// Lattice comparison over u in hZ and [-2 sigma sqrt N, 2 sigma sqrt N] from a
/// (binned or exact) distribution.
LltReport llt_lattice(const EmpiricalDistribution& distribution, std::size_t horizon, double sigma2, double h);

/// Non-lattice comparison with the triangle test function of half-width w on
/// a 41-point u-grid.
LltReport llt_nonlattice(std::span<const double> samples, std::size_t horizon, double sigma2, double half_width);

LltReport llt_check(const NonconvInstance& instance, std::size_t horizon, std::size_t samples, std::uint64_t seed,
                    double sigma2, unsigned workers = 1, double half_width = 0.5);
LltReport llt_check(const NonconvInstance& instance, const MonteCarloBatch& batch, double sigma2,
                    double half_width = 0.5);

}  // namespace nllt
