#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/observable.hpp"
#include "nllt/simulate.hpp"

namespace nllt {

using ComplexMatrix = Eigen::MatrixXcd;

/// Phi_x(theta) f(a) = sum_b p^(ell)_ab e^{i theta F(x, b)} f(b) for a prefix x in X^{ell-1}.
struct FourierOperator {
  std::vector<int> prefix;
  double theta = 0.0;
  ComplexMatrix matrix;
  int block_length = 0;
};

/// Smallest m with (m - 2) ell >= k, k the least exponent making P^k positive.
/// Throws PositivityWindowUnavailable when no such k <= S^2 exists.
int block_length(const FiniteChain& chain, int ell);

FourierOperator phi_operator(const FiniteChain& chain, const Observable& observable, const std::vector<int>& prefix,
                             double theta, std::optional<int> m = std::nullopt);

/// max_a sum_b p^((m-2)ell)_ab sum_d |sum_c p^(ell)_bc e^{i theta F(x, c)} p^(ell)_cd|,
/// evaluated as one minus the smallest phase-cancellation deficit so that
/// theta = 0 returns exactly 1.
double rho_theta(const FiniteChain& chain, const Observable& observable, const std::vector<int>& prefix,
                 double theta, std::optional<int> m = std::nullopt);

/// Sup-norm operator norm: largest absolute row sum.
double sup_norm(const ComplexMatrix& matrix);

struct ContractionPoint {
  double theta = 0.0;
  std::vector<double> rho;  // one per prefix, in prefix index order
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<std::size_t> contracting;  // prefixes with rho < 1 - 1e-12
  double contracting_mass = 0.0;
};

struct ContractionProfile {
  int block_length = 0;
  std::size_t prefix_count = 0;
  std::vector<ContractionPoint> points;
  /// Least squares 1 - rho = r theta^2 over theta in (0, small_theta_max], per prefix.
  std::vector<double> r_per_prefix;
  std::optional<double> r_best;
  std::optional<std::size_t> r_best_prefix;
};

ContractionProfile contraction_profile(const NonconvInstance& instance, const std::vector<double>& theta_grid,
                                       std::optional<int> m = std::nullopt, double small_theta_max = 0.1);

struct FitWindows {
  double q_min = 0.2;
  /// Upper end of the bounded-theta regime; pi/h - 0.2 for lattice instances when unset.
  std::optional<double> q_max;
  double r_max = 0.1;
};

struct DecayFit {
  double theta = 0.0;
  double q = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual relative to the mean of -log|phi|
  std::size_t points = 0;
};

struct ContractionScan {
  CfMode mode = CfMode::Exact;
  std::vector<double> theta_grid;
  std::vector<std::size_t> horizons;
  std::optional<std::size_t> samples;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// abs_phi[n][t] = |phi_{horizons[n]}(theta_grid[t])|.
  std::vector<std::vector<double>> abs_phi;
  std::vector<std::vector<bool>> below_noise_floor;
  double noise_floor = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double r_max = 0.0;
  std::vector<DecayFit> q_fits;
  std::optional<double> r_fit;
  double r_residual = 0.0;
  std::size_t r_points = 0;
};

ContractionScan cf_decay_scan(const NonconvInstance& instance, const std::vector<double>& theta_list,
                              const std::vector<std::size_t>& horizons, const CfRequest& request = {},
                              const FitWindows& windows = {});

}  // namespace nllt
