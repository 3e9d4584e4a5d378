#include "nllt/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nllt/error.hpp"

namespace nllt {

namespace {

constexpr double kRejectRowSum = 1e-9;
constexpr double kZeroMass = 1e-12;

double delta_of(const Matrix& power) {
  double best = 0.0;
  const Eigen::Index n = power.rows();
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      best = std::max(best, 0.5 * (power.row(x) - power.row(y)).cwiseAbs().sum());
    }
  }
  return std::min(best, 1.0);
}

double psi_of(const Matrix& power, const Vector& mu) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < power.rows(); ++i) {
    for (Eigen::Index j = 0; j < power.cols(); ++j) {
      best = std::max(best, std::abs(power(i, j) / mu(j) - 1.0));
    }
  }
  return best;
}

double rho_of(const Matrix& power, const Vector& mu) {
  const Vector root = mu.cwiseSqrt();
  const Matrix similar = root.asDiagonal() * power * root.cwiseInverse().asDiagonal();
  const Matrix projector = Matrix::Identity(mu.size(), mu.size()) - root * root.transpose();
  const Matrix restricted = projector * similar * projector;
  Eigen::JacobiSVD<Matrix> svd(restricted);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

bool strictly_positive(const Matrix& m) { return (m.array() > 0.0).all(); }

// Exact solve of mu (P - I) = 0, sum mu = 1 over the rationals.
std::optional<std::vector<Rational>> exact_stationary_of(const Matrix& transition, const Vector& approx) {
  const std::size_t n = static_cast<std::size_t>(transition.rows());
  try {
    std::vector<std::vector<Rational>> p(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
      Rational row_sum;
      for (std::size_t j = 0; j < n; ++j) {
        auto r = recognize_rational(transition(i, j));
        if (!r) return std::nullopt;
        p[i][j] = *r;
        row_sum += *r;
      }
      if (row_sum != Rational(1)) return std::nullopt;
    }
    // Augmented system A mu = e with A = (P - I)^T, last row replaced by ones.
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] = (r + 1 == n) ? Rational(1) : p[c][r] - (r == c ? Rational(1) : Rational());
      }
      a[r][n] = (r + 1 == n) ? Rational(1) : Rational();
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (pivot < n && a[pivot][col].is_zero()) ++pivot;
      if (pivot == n) return std::nullopt;
      std::swap(a[pivot], a[col]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col || a[r][col].is_zero()) continue;
        const Rational factor = a[r][col] / a[col][col];
        for (std::size_t c = col; c <= n; ++c) a[r][c] -= factor * a[col][c];
      }
    }
    std::vector<Rational> mu(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = a[i][n] / a[i][i];
      if (std::abs(mu[i].to_double() - approx(static_cast<Eigen::Index>(i))) > 1e-10) return std::nullopt;
    }
    return mu;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

FiniteChain validate_chain(const Matrix& transition, std::vector<std::string> labels,
                           const std::optional<Vector>& stationary, const ChainOptions& options) {
  const Eigen::Index n = transition.rows();
  if (transition.cols() != n) throw Error(ErrorCode::InvalidArgument, "transition matrix must be square");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "chain needs at least two states");
  if (labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(n) + " state labels, got " +
                                               std::to_string(labels.size()));
  }

  Matrix p = transition;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "transition[" << i << "][" << j << "] = " << v << " is not a probability";
        throw Error(ErrorCode::NonStochastic, msg.str());
      }
    }
    const double sum = p.row(i).sum();
    if (std::abs(sum - 1.0) > kRejectRowSum) {
      std::ostringstream msg;
      msg << "transition row " << i << " sums to " << sum;
      throw Error(ErrorCode::NonStochastic, msg.str());
    }
    p.row(i) /= sum;
  }

  Vector mu;
  if (stationary) {
    mu = *stationary;
    if (mu.size() != n) throw Error(ErrorCode::LengthMismatch, "stationary vector length differs from state count");
    if ((mu.array() < 0.0).any() || std::abs(mu.sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidStationary, "supplied stationary vector is not a probability vector");
    }
    const double residual = (mu.transpose() * p - mu.transpose()).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
      throw Error(ErrorCode::InvalidStationary, "supplied stationary vector violates mu P = mu (residual " +
                                                    std::to_string(residual) + ")");
    }
  } else {
    // unimodular eigenvalues besides 1: iteration would only stall or land on one class
    const Eigen::VectorXcd spectrum = p.eigenvalues();
    const auto unimodular = (spectrum.array().abs() > 1.0 - 1e-9).count();
    if (unimodular > 1) {
      throw Error(ErrorCode::NotConverged,
                  "dominant eigenspace is degenerate (periodic or reducible chain); supply \"stationary\" explicitly");
    }
    Eigen::RowVectorXd current = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    bool converged = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      Eigen::RowVectorXd next = current * p;
      next /= next.sum();
      const double residual = (next - current).cwiseAbs().sum();
      current = std::move(next);
      if (residual < options.stationary_residual) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorCode::NotConverged,
                  "power iteration for the stationary law did not converge (periodic or reducible chain?); "
                  "supply \"stationary\" explicitly");
    }
    mu = current.transpose();
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) < kZeroMass) {
      throw Error(ErrorCode::ZeroMassState, "state '" + labels[static_cast<std::size_t>(i)] +
                                                "' has zero stationary mass");
    }
  }

  FiniteChain chain;
  chain.labels_ = std::move(labels);
  chain.transition_ = std::move(p);
  chain.stationary_ = std::move(mu);
  chain.exact_stationary_ = exact_stationary_of(chain.transition_, chain.stationary_);
  return chain;
}

Matrix k_step(const FiniteChain& chain, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k_step requires k >= 1");
  Matrix result = chain.transition();
  Matrix base = chain.transition();
  int remaining = k - 1;
  while (remaining > 0) {
    if (remaining & 1) result = result * base;
    remaining >>= 1;
    if (remaining > 0) base = base * base;
  }
  return result;
}

double doeblin_delta(const FiniteChain& chain, int k) { return delta_of(k_step(chain, k)); }

double rho_correlation(const FiniteChain& chain, int k) { return rho_of(k_step(chain, k), chain.stationary()); }

double psi_coefficient(const FiniteChain& chain, int m) { return psi_of(k_step(chain, m), chain.stationary()); }

std::optional<DoeblinCertificate> check_doeblin(const FiniteChain& chain, int n0) {
  const Matrix power = k_step(chain, n0);
  const Vector& mu = chain.stationary();
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  for (Eigen::Index i = 0; i < power.rows(); ++i) {
    for (Eigen::Index j = 0; j < power.cols(); ++j) {
      if (power(i, j) <= 0.0) return std::nullopt;
      const double ratio = power(i, j) / mu(j);
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
    }
  }
  DoeblinCertificate cert;
  cert.n0 = n0;
  cert.gamma = std::min({min_ratio, 1.0 / max_ratio, 1.0});
  cert.reference = mu;
  return cert;
}

std::optional<int> positivity_exponent(const FiniteChain& chain) {
  const std::size_t s = chain.size();
  Matrix power = chain.transition();
  for (std::size_t k = 1; k <= s * s; ++k) {
    if (k > 1) power = power * chain.transition();
    if (strictly_positive(power)) return static_cast<int>(k);
  }
  return std::nullopt;
}

OverlapCondition check_overlap_condition(const FiniteChain& chain, int ell) {
  const Matrix power = k_step(chain, ell);
  const Eigen::Index n = power.rows();
  OverlapCondition out;
  out.row_overlap = std::numeric_limits<double>::infinity();
  out.column_overlap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.row_overlap = std::min(out.row_overlap, power.row(i).cwiseMin(power.row(j)).sum());
      out.column_overlap = std::min(out.column_overlap, power.col(i).cwiseMin(power.col(j)).sum());
    }
  }
  out.rows = out.row_overlap > 0.0;
  out.columns = out.column_overlap > 0.0;
  out.positivity_exponent = positivity_exponent(chain);
  return out;
}

FiniteChain product_chain(const FiniteChain& chain, int ell, std::size_t max_states) {
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "product_chain requires ell >= 1");
  if (ell == 1) return chain;
  const std::size_t s = chain.size();
  std::size_t total = 1;
  for (int i = 0; i < ell; ++i) {
    if (total > max_states / s) {
      throw Error(ErrorCode::CapExceeded, "product chain on S^ell states exceeds cap " + std::to_string(max_states));
    }
    total *= s;
  }

  Matrix transition = chain.transition();
  Vector mu = chain.stationary();
  std::vector<std::string> labels = chain.labels();
  std::optional<std::vector<Rational>> exact = chain.exact_stationary();
  for (int copy = 2; copy <= ell; ++copy) {
    const Matrix factor = k_step(chain, copy);
    const Eigen::Index a = transition.rows();
    const Eigen::Index b = factor.rows();
    Matrix kron(a * b, a * b);
    for (Eigen::Index i = 0; i < a; ++i) {
      for (Eigen::Index j = 0; j < a; ++j) kron.block(i * b, j * b, b, b) = transition(i, j) * factor;
    }
    transition = std::move(kron);
    Vector next_mu(mu.size() * chain.stationary().size());
    std::vector<std::string> next_labels;
    std::optional<std::vector<Rational>> next_exact;
    if (exact) next_exact.emplace();
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        next_mu(i * static_cast<Eigen::Index>(s) + static_cast<Eigen::Index>(j)) =
            mu(i) * chain.stationary()(static_cast<Eigen::Index>(j));
        next_labels.push_back(labels[static_cast<std::size_t>(i)] + "," + chain.labels()[j]);
        if (exact) next_exact->push_back((*exact)[static_cast<std::size_t>(i)] * (*chain.exact_stationary())[j]);
      }
    }
    mu = std::move(next_mu);
    labels = std::move(next_labels);
    exact = std::move(next_exact);
  }

  FiniteChain product;
  product.labels_.reserve(labels.size());
  for (auto& label : labels) product.labels_.push_back("(" + label + ")");
  product.transition_ = std::move(transition);
  product.stationary_ = std::move(mu);
  product.exact_stationary_ = std::move(exact);
  return product;
}

PsiDecayFit fit_psi_decay(const std::vector<double>& psi_by_lag) {
  constexpr double kFloor = 1e-14;
  PsiDecayFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < psi_by_lag.size(); ++i) {
    if (psi_by_lag[i] > kFloor) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(-std::log(psi_by_lag[i]));
    }
  }
  if (xs.empty()) {
    fit.vanishes = true;
    fit.rate = std::numeric_limits<double>::infinity();
    fit.alpha = 1.0;
    return fit;
  }
  if (xs.size() == 1) {
    fit.rate = ys[0] / xs[0];
  } else {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  if (!(fit.rate > 0.0)) return fit;

  auto bound_holds = [&](double alpha) {
    for (std::size_t i = 0; i < psi_by_lag.size(); ++i) {
      if (psi_by_lag[i] > std::exp(-alpha * static_cast<double>(i + 1)) / alpha) return false;
    }
    return true;
  };
  // alpha^{-1} e^{-alpha m} decreases in alpha, so the admissible set is an interval (0, alpha*].
  if (bound_holds(fit.rate)) {
    fit.alpha = fit.rate;
    return fit;
  }
  double lo = 0.0, hi = fit.rate;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    (bound_holds(mid) ? lo : hi) = mid;
  }
  fit.alpha = lo;
  return fit;
}

MixingProfile mixing_profile(const FiniteChain& chain, int ell, int max_lag) {
  if (ell < 1 || max_lag < 1) throw Error(ErrorCode::InvalidArgument, "mixing_profile requires ell, max_lag >= 1");
  MixingProfile profile;
  profile.ell = ell;
  const Vector& mu = chain.stationary();
  constexpr int kPsiFitLags = 30;
  std::vector<double> psi_fit_values;
  Matrix power = chain.transition();
  const int horizon = std::max({max_lag, kPsiFitLags, ell});
  for (int k = 1; k <= horizon; ++k) {
    if (k > 1) power = power * chain.transition();
    const double psi = psi_of(power, mu);
    if (k <= kPsiFitLags) psi_fit_values.push_back(psi);
    if (k <= max_lag || k == ell) {
      profile.psi[k] = psi;
      profile.delta[k] = delta_of(power);
      profile.rho[k] = rho_of(power, mu);
    }
  }
  // Strict inequalities judged with a rounding margin.
  profile.correlation_condition = profile.rho.at(ell) < 1.0 - 1e-12;
  profile.contraction_condition = profile.delta.at(ell) < 1.0 - 1e-12;
  profile.overlap = check_overlap_condition(chain, ell);
  if (profile.overlap.positivity_exponent) {
    profile.doeblin = check_doeblin(chain, *profile.overlap.positivity_exponent);
    profile.psi_decay = fit_psi_decay(psi_fit_values);
  }
  return profile;
}

}  // namespace nllt
