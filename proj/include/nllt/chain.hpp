#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nllt/exact.hpp"

namespace nllt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ChainOptions {
  double stationary_residual = 1e-13;
  std::size_t max_iterations = 1'000'000;
};

/// Validated finite-state stationary Markov chain. Immutable after
/// construction; build one through validate_chain().
class FiniteChain {
 public:
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& transition() const noexcept { return transition_; }
  const Vector& stationary() const noexcept { return stationary_; }

  /// Exact stationary law, present when every transition entry is a
  /// recognizable rational and the rational solve of mu P = mu succeeds.
  const std::optional<std::vector<Rational>>& exact_stationary() const noexcept { return exact_stationary_; }

 private:
  friend FiniteChain validate_chain(const Matrix&, std::vector<std::string>, const std::optional<Vector>&,
                                    const ChainOptions&);
  friend FiniteChain product_chain(const FiniteChain&, int, std::size_t);

  std::vector<std::string> labels_;
  Matrix transition_;
  Vector stationary_;
  std::optional<std::vector<Rational>> exact_stationary_;
};

/// Checks stochasticity, computes (or verifies a supplied) stationary law by
/// power iteration and rejects states of zero stationary mass.
FiniteChain validate_chain(const Matrix& transition, std::vector<std::string> labels,
                           const std::optional<Vector>& stationary = std::nullopt,
                           const ChainOptions& options = {});

Matrix k_step(const FiniteChain& chain, int k);

/// Largest total-variation distance between two rows of P^k.
double doeblin_delta(const FiniteChain& chain, int k);

/// Norm of P^k on the mean-zero subspace of L2(mu).
double rho_correlation(const FiniteChain& chain, int k);

/// max_{i,j} |p^(m)_ij / mu_j - 1|.
double psi_coefficient(const FiniteChain& chain, int m);

struct DoeblinCertificate {
  int n0 = 0;
  double gamma = 0.0;
  Vector reference;  // always the stationary law
};

/// Two-sided comparison of P^{n0} with mu; absent when P^{n0} has a zero.
std::optional<DoeblinCertificate> check_doeblin(const FiniteChain& chain, int n0);

struct OverlapCondition {
  bool rows = false;       // min_{i,j} sum_k min(p_ik, p_jk) > 0 on P^ell
  bool columns = false;    // min_{i,j} sum_k min(p_ki, p_kj) > 0 on P^ell
  double row_overlap = 0.0;
  double column_overlap = 0.0;
  std::optional<int> positivity_exponent;  // least k <= S^2 with P^k > 0
};

OverlapCondition check_overlap_condition(const FiniteChain& chain, int ell);

/// Least k <= S^2 such that every entry of P^k is positive.
std::optional<int> positivity_exponent(const FiniteChain& chain);

/// Chain of (xi^(1)_n, xi^(2)_{2n}, ..., xi^(ell)_{ell n}) for independent
/// copies: transition P (x) P^2 (x) ... (x) P^ell, stationary mu^ell, last
/// coordinate fastest.
FiniteChain product_chain(const FiniteChain& chain, int ell, std::size_t max_states = 4096);

struct PsiDecayFit {
  double rate = 0.0;   // least-squares slope of -log psi(m)
  double alpha = 0.0;  // largest alpha <= rate with psi(m) <= e^{-alpha m}/alpha on the range
  bool vanishes = false;  // psi is identically zero on the range
};

PsiDecayFit fit_psi_decay(const std::vector<double>& psi_by_lag);

struct MixingProfile {
  int ell = 1;
  std::map<int, double> psi;
  std::map<int, double> delta;
  std::map<int, double> rho;
  std::optional<DoeblinCertificate> doeblin;
  std::optional<PsiDecayFit> psi_decay;
  bool correlation_condition = false;  // rho_ell < 1
  bool contraction_condition = false;  // delta_ell < 1
  OverlapCondition overlap;
};

/// Coefficient tables for lags 1..max_lag plus the conditions evaluated at ell.
/// The Doeblin certificate uses the least n0 with P^{n0} strictly positive;
/// the psi decay fit runs over lags 1..30.
MixingProfile mixing_profile(const FiniteChain& chain, int ell, int max_lag = 20);

}  // namespace nllt
