#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/observable.hpp"
#include "nllt/simulate.hpp"

namespace nllt {

/// Asymptotic variance of F_ell along the product chain P (x) P^2 (x) ... (x) P^ell,
/// from the Poisson equation on the mean-zero subspace.
double s_ell_squared(const FiniteChain& chain, const Decomposition& decomposition,
                     std::size_t max_states = 4096);

/// Var(f) + 2 sum_{k=1}^{terms} <f, T^k f> for the same f and T. Independent check.
double s_ell_squared_series(const FiniteChain& chain, const Decomposition& decomposition, int terms);

struct SigmaGridPoint {
  std::size_t horizon = 0;
  double value = 0.0;   // var(S_N) / N
  double stderr = 0.0;
};

struct SigmaEstimate {
  std::vector<SigmaGridPoint> grid;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double sigma2 = 0.0;  // value at the largest horizon
  double stderr = 0.0;
  /// Least-squares slope of var(S_N)/N against 1/N across the grid.
  double slope_inverse_n = 0.0;
};

/// Sample variance over N with the standard error of a variance estimate:
/// sqrt((m4 - s^4) / M) / N.
SigmaGridPoint variance_point(const std::vector<double>& totals, std::size_t horizon);

SigmaEstimate sigma_squared_estimate(const NonconvInstance& instance, const std::vector<std::size_t>& horizons,
                                     std::size_t samples, std::uint64_t seed, unsigned workers = 1);

struct CovarianceReport {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Matrix c_hat;         // Cov(S_{i,N}, S_{j,N}) / N
  Matrix c_stderr;
  Matrix d_hat;         // c_hat / min(i, j)
  Matrix d_stderr;
  double sum_c = 0.0;   // sum over all entries of c_hat
  double var_over_n = 0.0;  // var(S_N)/N from the same sample
  double var_stderr = 0.0;
  /// Standard error of sum_c from the per-sample sums of deviation products.
  double sum_stderr = 0.0;
};

CovarianceReport covariance_matrix(const MonteCarloBatch& batch);
CovarianceReport covariance_matrix(const NonconvInstance& instance, std::size_t horizon, std::size_t samples,
                                   std::uint64_t seed, unsigned workers = 1);

enum class PositivityVerdict { PositiveCertified, PositiveEmpirical, DegenerateFEllZero, Inconclusive };

const char* to_string(PositivityVerdict verdict);

struct PositivityBasis {
  bool correlation = false;   // rho_ell < 1
  bool contraction = false;   // delta_ell < 1
  bool overlap_rows = false;
  bool overlap_columns = false;
  bool f_ell_nonzero = false;
};

struct VarianceReport {
  std::optional<SigmaEstimate> sigma2_hat;
  std::optional<double> s_ell2;
  std::optional<double> lower_bound;  // s_ell2 / (2 ell)
  PositivityVerdict verdict = PositivityVerdict::Inconclusive;
  PositivityBasis basis;
  std::string route;
  std::optional<CovarianceReport> d_hat;
};

VarianceReport positivity_verdict(const NonconvInstance& instance, const MixingProfile& profile,
                                  std::optional<double> s_ell2, std::optional<SigmaEstimate> sigma2_hat = {});

}  // namespace nllt
