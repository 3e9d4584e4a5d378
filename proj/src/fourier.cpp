#include "nllt/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "nllt/error.hpp"

namespace nllt {

namespace {

struct Powers {
  Matrix step;   // P^ell
  Matrix twice;  // P^ell P^ell, summed in the same order as the phased products
  Matrix window; // P^((m-2) ell)
};

Powers powers_for(const FiniteChain& chain, int ell, int m) {
  Powers out;
  out.step = k_step(chain, ell);
  const auto s = out.step.rows();
  out.twice = Matrix::Zero(s, s);
  for (Eigen::Index b = 0; b < s; ++b) {
    for (Eigen::Index d = 0; d < s; ++d) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < s; ++c) acc += out.step(b, c) * out.step(c, d);
      out.twice(b, d) = acc;
    }
  }
  out.window = k_step(chain, (m - 2) * ell);
  return out;
}

std::vector<std::complex<double>> phases(const Observable& observable, const std::vector<int>& prefix, double theta) {
  const std::size_t s = observable.states;
  const std::size_t base = tuple_index(prefix, s) * s;
  std::vector<std::complex<double>> out(s);
  for (std::size_t c = 0; c < s; ++c) {
    if (theta == 0.0) {
      out[c] = 1.0;
    } else {
      const double angle = theta * observable.values[base + c];
      out[c] = {std::cos(angle), std::sin(angle)};
    }
  }
  return out;
}

void check_prefix(const Observable& observable, const std::vector<int>& prefix) {
  if (static_cast<int>(prefix.size()) != observable.ell - 1) {
    throw Error(ErrorCode::LengthMismatch, "prefix length must be ell - 1");
  }
  for (int x : prefix) {
    if (x < 0 || static_cast<std::size_t>(x) >= observable.states) {
      throw Error(ErrorCode::InvalidArgument, "prefix state out of range");
    }
  }
}

double rho_from_powers(const Powers& powers, const std::vector<std::complex<double>>& phase) {
  const auto s = powers.step.rows();
  // deficit_b = sum_d (p^(2 ell)_bd - |z_bd|) >= 0
  std::vector<double> deficit(static_cast<std::size_t>(s), 0.0);
  for (Eigen::Index b = 0; b < s; ++b) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < s; ++d) {
      std::complex<double> z = 0.0;
      for (Eigen::Index c = 0; c < s; ++c) z += powers.step(b, c) * phase[static_cast<std::size_t>(c)] * powers.step(c, d);
      acc += std::max(0.0, powers.twice(b, d) - std::abs(z));
    }
    deficit[static_cast<std::size_t>(b)] = acc;
  }
  double worst = 1.0;
  for (Eigen::Index a = 0; a < s; ++a) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < s; ++b) acc += powers.window(a, b) * deficit[static_cast<std::size_t>(b)];
    worst = std::min(worst, acc);
  }
  return std::clamp(1.0 - worst, 0.0, 1.0);
}

double prefix_mass(const std::vector<int>& prefix, const Vector& mu) {
  double mass = 1.0;
  for (int x : prefix) mass *= mu(x);
  return mass;
}

}  // namespace

int block_length(const FiniteChain& chain, int ell) {
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "ell must be >= 1");
  const auto k = positivity_exponent(chain);
  if (!k) {
    throw Error(ErrorCode::PositivityWindowUnavailable,
                "no power P^k with k <= S^2 is strictly positive; block length undefined");
  }
  return 2 + (*k + ell - 1) / ell;
}

FourierOperator phi_operator(const FiniteChain& chain, const Observable& observable, const std::vector<int>& prefix,
                             double theta, std::optional<int> m) {
  check_prefix(observable, prefix);
  FourierOperator op;
  op.prefix = prefix;
  op.theta = theta;
  op.block_length = m.value_or(block_length(chain, observable.ell));
  const Matrix step = k_step(chain, observable.ell);
  const auto phase = phases(observable, prefix, theta);
  op.matrix = step.cast<std::complex<double>>();
  for (Eigen::Index b = 0; b < step.cols(); ++b) op.matrix.col(b) *= phase[static_cast<std::size_t>(b)];
  return op;
}

double rho_theta(const FiniteChain& chain, const Observable& observable, const std::vector<int>& prefix, double theta,
                 std::optional<int> m) {
  check_prefix(observable, prefix);
  const int block = m.value_or(block_length(chain, observable.ell));
  if (block < 3) throw Error(ErrorCode::InvalidArgument, "block length must be >= 3");
  const Matrix window = k_step(chain, (block - 2) * observable.ell);
  if ((window.array() <= 0.0).any()) {
    throw Error(ErrorCode::PositivityWindowUnavailable,
                "P^((m-2) ell) has a zero entry for m = " + std::to_string(block));
  }
  return rho_from_powers(powers_for(chain, observable.ell, block), phases(observable, prefix, theta));
}

double sup_norm(const ComplexMatrix& matrix) { return matrix.cwiseAbs().rowwise().sum().maxCoeff(); }

ContractionProfile contraction_profile(const NonconvInstance& instance, const std::vector<double>& theta_grid,
                                       std::optional<int> m, double small_theta_max) {
  const FiniteChain& chain = instance.chain;
  const Observable& observable = instance.observable;
  const int ell = observable.ell;
  ContractionProfile profile;
  profile.block_length = m.value_or(block_length(chain, ell));
  const Powers powers = powers_for(chain, ell, profile.block_length);
  if ((powers.window.array() <= 0.0).any()) {
    throw Error(ErrorCode::PositivityWindowUnavailable,
                "P^((m-2) ell) has a zero entry for m = " + std::to_string(profile.block_length));
  }
  const std::size_t s = chain.size();
  const std::size_t prefixes = table_size(s, ell - 1);
  profile.prefix_count = prefixes;
  std::vector<std::vector<int>> tuples;
  std::vector<double> masses;
  for (std::size_t p = 0; p < prefixes; ++p) {
    tuples.push_back(tuple_of(p, s, ell - 1));
    masses.push_back(prefix_mass(tuples.back(), chain.stationary()));
  }

  std::vector<double> num(prefixes, 0.0), den(prefixes, 0.0);
  for (double theta : theta_grid) {
    ContractionPoint point;
    point.theta = theta;
    point.min = 1.0;
    point.max = 0.0;
    double weight = 0.0;
    for (std::size_t p = 0; p < prefixes; ++p) {
      const double rho = rho_from_powers(powers, phases(observable, tuples[p], theta));
      point.rho.push_back(rho);
      if (masses[p] <= 0.0) continue;
      point.min = std::min(point.min, rho);
      point.max = std::max(point.max, rho);
      point.mean += masses[p] * rho;
      weight += masses[p];
      if (rho < 1.0 - 1e-12) {
        point.contracting.push_back(p);
        point.contracting_mass += masses[p];
      }
      if (theta > 0.0 && theta <= small_theta_max) {
        const double t2 = theta * theta;
        num[p] += t2 * (1.0 - rho);
        den[p] += t2 * t2;
      }
    }
    if (weight > 0.0) point.mean /= weight;
    profile.points.push_back(std::move(point));
  }
  for (std::size_t p = 0; p < prefixes; ++p) {
    const double r = den[p] > 0.0 ? num[p] / den[p] : 0.0;
    profile.r_per_prefix.push_back(r);
    if (den[p] > 0.0 && masses[p] > 0.0 && (!profile.r_best || r > *profile.r_best)) {
      profile.r_best = r;
      profile.r_best_prefix = p;
    }
  }
  return profile;
}

ContractionScan cf_decay_scan(const NonconvInstance& instance, const std::vector<double>& theta_list,
                              const std::vector<std::size_t>& horizons, const CfRequest& request,
                              const FitWindows& windows) {
  if (horizons.empty()) throw Error(ErrorCode::InvalidArgument, "N grid is empty");
  ContractionScan scan;
  scan.mode = request.mode;
  scan.theta_grid = theta_list;
  scan.horizons = horizons;
  scan.seed = request.seed;
  scan.workers = request.workers;
  scan.q_min = windows.q_min;
  if (windows.q_max) {
    scan.q_max = *windows.q_max;
  } else if (instance.lattice.kind == LatticeKind::Lattice && instance.lattice.h) {
    scan.q_max = std::numbers::pi / *instance.lattice.h - 0.2;
  } else {
    scan.q_max = 5.0;
  }
  scan.r_max = windows.r_max;
  if (request.mode == CfMode::MonteCarlo) {
    if (request.samples < 1) throw Error(ErrorCode::InvalidArgument, "Monte Carlo scan needs M >= 1");
    scan.samples = request.samples;
    scan.noise_floor = 3.0 / std::sqrt(static_cast<double>(request.samples));
  }

  for (std::size_t n : horizons) {
    std::vector<double> row;
    std::vector<bool> flags;
    if (request.mode == CfMode::Exact) {
      const EmpiricalDistribution dist = exact_distribution(instance, n);
      for (double theta : theta_list) row.push_back(std::abs(characteristic_value(dist, theta)));
    } else {
      const MonteCarloBatch batch = run_monte_carlo(instance, {n, request.samples, request.seed, request.workers}, false);
      for (double theta : theta_list) row.push_back(std::abs(characteristic_value(batch.totals, theta)));
    }
    for (double v : row) flags.push_back(v < scan.noise_floor);
    scan.abs_phi.push_back(std::move(row));
    scan.below_noise_floor.push_back(std::move(flags));
  }

  auto usable = [&](std::size_t n, std::size_t t) {
    return !scan.below_noise_floor[n][t] && scan.abs_phi[n][t] > 0.0;
  };

  for (std::size_t t = 0; t < theta_list.size(); ++t) {
    const double theta = std::abs(theta_list[t]);
    if (theta < scan.q_min || theta > scan.q_max) continue;
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < horizons.size(); ++n) {
      if (!usable(n, t)) continue;
      xs.push_back(static_cast<double>(horizons[n]));
      ys.push_back(-std::log(scan.abs_phi[n][t]));
    }
    if (xs.size() < 2) continue;
    const double k = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = k * sxx - sx * sx;
    if (denom <= 0.0) continue;
    DecayFit fit;
    fit.theta = theta_list[t];
    fit.q = (k * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.q * sx) / k;
    fit.points = xs.size();
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - fit.intercept - fit.q * xs[i];
      rss += r * r;
    }
    const double mean_y = sy / k;
    fit.residual = mean_y > 0.0 ? std::sqrt(rss / k) / mean_y : 0.0;
    scan.q_fits.push_back(fit);
  }

  double num = 0.0, den = 0.0;
  std::vector<std::pair<double, double>> points;
  for (std::size_t t = 0; t < theta_list.size(); ++t) {
    const double theta = std::abs(theta_list[t]);
    if (!(theta > 0.0) || theta > scan.r_max) continue;
    for (std::size_t n = 0; n < horizons.size(); ++n) {
      if (!usable(n, t)) continue;
      const double x = static_cast<double>(horizons[n]) * theta * theta;
      const double y = -std::log(scan.abs_phi[n][t]);
      points.emplace_back(x, y);
      num += x * y;
      den += x * x;
    }
  }
  if (den > 0.0) {
    scan.r_fit = num / den;
    double rss = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
      const double r = y - *scan.r_fit * x;
      rss += r * r;
      sy += y;
    }
    const double k = static_cast<double>(points.size());
    scan.r_residual = sy > 0.0 ? std::sqrt(rss / k) / (sy / k) : 0.0;
    scan.r_points = points.size();
  }
  return scan;
}

}  // namespace nllt
