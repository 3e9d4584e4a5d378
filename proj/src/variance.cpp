#include "nllt/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nllt/error.hpp"

namespace nllt {

namespace {

struct ProductView {
  Matrix transition;
  Vector mu;
  Vector f;
};

ProductView product_view(const FiniteChain& chain, const Decomposition& decomposition, std::size_t max_states) {
  const FiniteChain product = product_chain(chain, decomposition.ell, max_states);
  const auto& last = decomposition.last();
  ProductView view{product.transition(), product.stationary(), Vector(static_cast<Eigen::Index>(last.size()))};
  for (std::size_t i = 0; i < last.size(); ++i) view.f(static_cast<Eigen::Index>(i)) = last[i];
  return view;
}

double weighted_dot(const Vector& a, const Vector& b, const Vector& mu) { return (a.array() * b.array() * mu.array()).sum(); }

double clamp_variance(double value) {
  if (value < -1e-10) throw Error(ErrorCode::SolveFailed, "negative asymptotic variance " + std::to_string(value));
  return std::max(0.0, value);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double s_ell_squared(const FiniteChain& chain, const Decomposition& decomposition, std::size_t max_states) {
  const ProductView view = product_view(chain, decomposition, max_states);
  const Eigen::Index n = view.f.size();
  // (I - T + 1 mu^T) g = f has the unique solution with mu^T g = mu^T f = 0.
  const Matrix a = Matrix::Identity(n, n) - view.transition + Vector::Ones(n) * view.mu.transpose();
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::SolveFailed, "Poisson operator is singular on the mean-zero subspace");
  const Vector g = lu.solve(view.f);
  const Vector centered = g - Vector::Constant(n, view.mu.dot(g));
  const double residual = (centered - view.transition * centered - view.f).cwiseAbs().maxCoeff();
  if (!(residual < 1e-11 * std::max(1.0, view.f.cwiseAbs().maxCoeff()))) {
    throw Error(ErrorCode::SolveFailed, "Poisson solve residual " + std::to_string(residual) + " exceeds 1e-11");
  }
  return clamp_variance(2.0 * weighted_dot(view.f, centered, view.mu) - weighted_dot(view.f, view.f, view.mu));
}

double s_ell_squared_series(const FiniteChain& chain, const Decomposition& decomposition, int terms) {
  const ProductView view = product_view(chain, decomposition, 4096);
  double total = weighted_dot(view.f, view.f, view.mu);
  Vector pushed = view.f;
  for (int k = 1; k <= terms; ++k) {
    pushed = view.transition * pushed;
    total += 2.0 * weighted_dot(view.f, pushed, view.mu);
  }
  return total;
}

SigmaGridPoint variance_point(const std::vector<double>& totals, std::size_t horizon) {
  const double m = static_cast<double>(totals.size());
  const double mean = mean_of(totals);
  double m2 = 0.0, m4 = 0.0;
  for (double v : totals) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= m;
  m4 /= m;
  const double n = static_cast<double>(horizon);
  const double var = totals.size() > 1 ? m2 * m / (m - 1.0) : 0.0;
  return {horizon, var / n, std::sqrt(std::max(0.0, m4 - m2 * m2) / m) / n};
}

SigmaEstimate sigma_squared_estimate(const NonconvInstance& instance, const std::vector<std::size_t>& horizons,
                                     std::size_t samples, std::uint64_t seed, unsigned workers) {
  if (horizons.size() < 3) throw Error(ErrorCode::InvalidArgument, "sigma^2 grid needs at least 3 horizons");
  if (!std::is_sorted(horizons.begin(), horizons.end()) ||
      std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end()) {
    throw Error(ErrorCode::InvalidArgument, "sigma^2 grid must be strictly ascending");
  }
  SigmaEstimate out;
  out.samples = samples;
  out.seed = seed;
  for (std::size_t n : horizons) {
    const MonteCarloBatch batch = run_monte_carlo(instance, {n, samples, seed, workers}, false);
    out.grid.push_back(variance_point(batch.totals, n));
  }
  out.sigma2 = out.grid.back().value;
  out.stderr = out.grid.back().stderr;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& point : out.grid) {
    const double x = 1.0 / static_cast<double>(point.horizon);
    sx += x;
    sy += point.value;
    sxx += x * x;
    sxy += x * point.value;
  }
  const double k = static_cast<double>(out.grid.size());
  out.slope_inverse_n = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return out;
}

CovarianceReport covariance_matrix(const MonteCarloBatch& batch) {
  const std::size_t m = batch.totals.size();
  const auto ell = static_cast<std::size_t>(batch.ell);
  if (batch.components.size() != m * ell) throw Error(ErrorCode::InvalidArgument, "batch lacks component sums");
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "covariance needs at least two samples");
  const double md = static_cast<double>(m);
  const double n = static_cast<double>(batch.horizon);

  std::vector<double> means(ell, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < ell; ++i) means[i] += batch.components[j * ell + i];
  }
  for (double& v : means) v /= md;

  const auto e = static_cast<Eigen::Index>(ell);
  Matrix sum = Matrix::Zero(e, e), sum_sq = Matrix::Zero(e, e);
  double joint = 0.0, joint_sq = 0.0;
  std::vector<double> dev(ell);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < ell; ++i) dev[i] = batch.components[j * ell + i] - means[i];
    double csum = 0.0;
    for (std::size_t a = 0; a < ell; ++a) {
      for (std::size_t b = 0; b < ell; ++b) {
        const double prod = dev[a] * dev[b];
        sum(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += prod;
        sum_sq(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += prod * prod;
        csum += prod;
      }
    }
    joint += csum;
    joint_sq += csum * csum;
  }

  CovarianceReport out;
  out.horizon = batch.horizon;
  out.samples = m;
  out.seed = batch.seed;
  out.c_hat = sum / (md - 1.0) / n;
  const Matrix mean_prod = sum / md;
  out.c_stderr = ((sum_sq / md - mean_prod.cwiseProduct(mean_prod)).cwiseMax(0.0) / md).cwiseSqrt() / n;
  out.d_hat = out.c_hat;
  out.d_stderr = out.c_stderr;
  for (Eigen::Index a = 0; a < e; ++a) {
    for (Eigen::Index b = 0; b < e; ++b) {
      const double scale = static_cast<double>(std::min(a, b) + 1);
      out.d_hat(a, b) /= scale;
      out.d_stderr(a, b) /= scale;
    }
  }
  out.sum_c = out.c_hat.sum();
  const SigmaGridPoint var = variance_point(batch.totals, batch.horizon);
  out.var_over_n = var.value;
  out.var_stderr = var.stderr;
  const double joint_mean = joint / md;
  out.sum_stderr = std::sqrt(std::max(0.0, joint_sq / md - joint_mean * joint_mean) / md) / n;
  return out;
}

CovarianceReport covariance_matrix(const NonconvInstance& instance, std::size_t horizon, std::size_t samples,
                                   std::uint64_t seed, unsigned workers) {
  return covariance_matrix(run_monte_carlo(instance, {horizon, samples, seed, workers}, true));
}

const char* to_string(PositivityVerdict verdict) {
  switch (verdict) {
    case PositivityVerdict::PositiveCertified: return "PositiveCertified";
    case PositivityVerdict::PositiveEmpirical: return "PositiveEmpirical";
    case PositivityVerdict::DegenerateFEllZero: return "DegenerateFEllZero";
    case PositivityVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

VarianceReport positivity_verdict(const NonconvInstance& instance, const MixingProfile& profile,
                                  std::optional<double> s_ell2, std::optional<SigmaEstimate> sigma2_hat) {
  if (profile.ell != instance.observable.ell) {
    throw Error(ErrorCode::InvalidArgument, "mixing profile arity differs from the instance");
  }
  VarianceReport report;
  report.sigma2_hat = std::move(sigma2_hat);
  report.s_ell2 = s_ell2;
  if (s_ell2) report.lower_bound = *s_ell2 / (2.0 * instance.observable.ell);
  report.basis.correlation = profile.correlation_condition;
  report.basis.contraction = profile.contraction_condition;
  report.basis.overlap_rows = profile.overlap.rows;
  report.basis.overlap_columns = profile.overlap.columns;
  report.basis.f_ell_nonzero = !is_F_ell_zero(instance.decomposition);

  if (!report.basis.f_ell_nonzero) {
    report.verdict = PositivityVerdict::DegenerateFEllZero;
    report.route = instance.observable.ell > 1 ? "F_ell vanishes; F depends on fewer coordinates, reduce ell to " +
                                                     std::to_string(instance.observable.ell - 1)
                                               : "F_1 vanishes; the observable is constant";
  } else if (report.basis.correlation || report.basis.contraction) {
    report.verdict = PositivityVerdict::PositiveCertified;
    report.route = report.basis.correlation && report.basis.contraction ? "rho_ell < 1 and delta_ell < 1, F_ell != 0"
                   : report.basis.correlation                          ? "rho_ell < 1, F_ell != 0"
                                                                       : "delta_ell < 1, F_ell != 0";
  } else if (s_ell2 && *s_ell2 > 0.0) {
    report.verdict = PositivityVerdict::PositiveEmpirical;
    report.route = "s_ell^2 > 0 gives sigma^2 >= s_ell^2 / (2 ell)";
  } else {
    report.verdict = PositivityVerdict::Inconclusive;
    report.route = "no mixing condition at ell and s_ell^2 unavailable or zero";
  }
  return report;
}

}  // namespace nllt
