#include "nllt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <numbers>
#include <thread>

#include "nllt/error.hpp"

namespace nllt {

namespace {

int pick(const std::vector<double>& cdf, double u) {
  const std::size_t last = cdf.size() - 1;
  for (std::size_t j = 0; j < last; ++j) {
    if (u < cdf[j]) return static_cast<int>(j);
  }
  return static_cast<int>(last);
}

std::vector<double> cumulative(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::vector<double> cdf(static_cast<std::size_t>(row.size()));
  double acc = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    acc += row(j);
    cdf[static_cast<std::size_t>(j)] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

// Runs body(begin, end) over contiguous slices of [0, count). Results must be
// written per index so the split never changes values.
template <typename Body>
void parallel_slices(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2)); }

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap) {
  std::size_t value = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (value > cap / base) return cap + 1;
    value *= base;
  }
  return value;
}

void compact(std::vector<std::pair<double, double>>& leaves) {
  std::sort(leaves.begin(), leaves.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (out > 0 && std::abs(leaves[i].first - leaves[out - 1].first) <= 1e-12 * std::max(1.0, std::abs(leaves[i].first))) {
      leaves[out - 1].second += leaves[i].second;
    } else {
      leaves[out++] = leaves[i];
    }
  }
  leaves.resize(out);
}

}  // namespace

NonconvInstance make_instance(const FiniteChain& chain, const Observable& observable) {
  if (observable.states != chain.size()) {
    throw Error(ErrorCode::LengthMismatch, "observable state count differs from chain");
  }
  NonconvInstance instance{chain, center(observable, chain), {}, {}};
  instance.decomposition = decompose(instance.observable, chain);
  instance.lattice = classify(instance.observable, chain);
  return instance;
}

PathSampler::PathSampler(const NonconvInstance& instance) : instance_(&instance) {
  const Matrix& p = instance.chain.transition();
  for (Eigen::Index i = 0; i < p.rows(); ++i) cdf_.push_back(cumulative(p.row(i)));
  initial_cdf_ = cumulative(instance.chain.stationary().transpose());
}

double PathSampler::sample(std::size_t horizon, SampleStream& stream, std::span<double> components) {
  const std::size_t length = static_cast<std::size_t>(instance_->observable.ell) * horizon;
  path_.resize(length + 1);
  int x = pick(initial_cdf_, stream.uniform());
  path_[0] = x;
  for (std::size_t d = 1; d <= length; ++d) {
    x = pick(cdf_[static_cast<std::size_t>(x)], stream.uniform());
    path_[d] = x;
  }
  return evaluate(path_, horizon, components);
}

double PathSampler::evaluate(std::span<const int> path, std::size_t horizon, std::span<double> components) const {
  const std::size_t s = instance_->chain.size();
  const int ell = instance_->observable.ell;
  const auto& table = instance_->observable.values;
  const auto& parts = instance_->decomposition.components;
  const bool with_components = !components.empty();
  if (with_components) std::fill(components.begin(), components.end(), 0.0);
  double total = 0.0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    std::size_t idx = 0;
    for (int i = 1; i <= ell; ++i) {
      idx = idx * s + static_cast<std::size_t>(path[static_cast<std::size_t>(i) * n]);
      if (with_components) components[static_cast<std::size_t>(i - 1)] += parts[static_cast<std::size_t>(i - 1)][idx];
    }
    total += table[idx];
  }
  return total;
}

double sample_S_N(const NonconvInstance& instance, std::size_t horizon, SampleStream& stream,
                  std::span<double> components) {
  PathSampler sampler(instance);
  return sampler.sample(horizon, stream, components);
}

MonteCarloBatch run_monte_carlo(const NonconvInstance& instance, const SimConfig& config, bool with_components) {
  if (config.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon N must be >= 1");
  if (config.samples < 1) throw Error(ErrorCode::InvalidArgument, "sample count M must be >= 1");
  const int ell = instance.observable.ell;
  const double steps = static_cast<double>(config.samples) * static_cast<double>(ell) * static_cast<double>(config.horizon);
  if (steps > config.step_budget) {
    throw Error(ErrorCode::BudgetExceeded, "M * ell * N = " + std::to_string(steps) + " exceeds step budget " +
                                               std::to_string(config.step_budget));
  }
  MonteCarloBatch batch;
  batch.horizon = config.horizon;
  batch.seed = config.seed;
  batch.workers = config.workers;
  batch.ell = ell;
  batch.totals.resize(config.samples);
  if (with_components) batch.components.resize(config.samples * static_cast<std::size_t>(ell));
  parallel_slices(config.samples, config.workers, [&](std::size_t begin, std::size_t end) {
    PathSampler sampler(instance);
    for (std::size_t j = begin; j < end; ++j) {
      SampleStream stream(config.seed, j);
      std::span<double> comps;
      if (with_components) comps = std::span<double>(batch.components).subspan(j * static_cast<std::size_t>(ell), static_cast<std::size_t>(ell));
      batch.totals[j] = sampler.sample(config.horizon, stream, comps);
    }
  });
  return batch;
}

std::size_t enumeration_cap() {
  if (const char* env = std::getenv("NLLT_MAX_ENUM")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{1} << 24;
}

EmpiricalDistribution exact_distribution(const NonconvInstance& instance, std::size_t horizon) {
  return exact_distribution(instance, horizon, enumeration_cap());
}

EmpiricalDistribution exact_distribution(const NonconvInstance& instance, std::size_t horizon, std::size_t cap) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon N must be >= 1");
  const std::size_t s = instance.chain.size();
  const std::size_t ell = static_cast<std::size_t>(instance.observable.ell);
  const std::size_t length = ell * horizon;
  if (checked_power(s, length + 1, cap) > cap) {
    throw Error(ErrorCode::CapExceeded, "S^(ell N + 1) paths exceed enumeration cap " + std::to_string(cap));
  }
  const Matrix& p = instance.chain.transition();
  const Vector& mu = instance.chain.stationary();
  const auto& table = instance.observable.values;
  const bool exact = instance.observable.fully_exact();

  std::vector<int> path(length + 1);
  std::vector<double> sums(length + 1, 0.0);
  std::vector<QSqrt2> exact_sums(exact ? length + 1 : 0);
  std::vector<std::pair<double, double>> leaves;
  std::map<QSqrt2, double> exact_leaves;

  auto term_index = [&](std::size_t n) {
    std::size_t idx = 0;
    for (std::size_t i = 1; i <= ell; ++i) idx = idx * s + static_cast<std::size_t>(path[i * n]);
    return idx;
  };

  auto dfs = [&](auto&& self, std::size_t depth, double weight) -> void {
    if (depth == length) {
      if (exact) {
        exact_leaves[exact_sums[depth]] += weight;
      } else {
        leaves.emplace_back(sums[depth], weight);
        if (leaves.size() >= (std::size_t{1} << 20)) compact(leaves);
      }
      return;
    }
    const int from = path[depth];
    const std::size_t next = depth + 1;
    for (std::size_t y = 0; y < s; ++y) {
      const double step = p(from, static_cast<Eigen::Index>(y));
      if (step == 0.0) continue;
      path[next] = static_cast<int>(y);
      if (next % ell == 0) {
        const std::size_t idx = term_index(next / ell);
        sums[next] = sums[depth] + table[idx];
        if (exact) exact_sums[next] = exact_sums[depth] + *instance.observable.exact_values[idx];
      } else {
        sums[next] = sums[depth];
        if (exact) exact_sums[next] = exact_sums[depth];
      }
      self(self, next, weight * step);
    }
  };
  for (std::size_t x0 = 0; x0 < s; ++x0) {
    path[0] = static_cast<int>(x0);
    dfs(dfs, 0, mu(static_cast<Eigen::Index>(x0)));
  }

  EmpiricalDistribution dist;
  dist.kind = DistributionKind::Exact;
  if (exact) {
    for (const auto& [value, mass] : exact_leaves) {
      dist.exact_support.push_back(value);
      dist.support.push_back(value.to_double());
      dist.mass.push_back(mass);
    }
  } else {
    compact(leaves);
    for (const auto& [value, mass] : leaves) {
      dist.support.push_back(value);
      dist.mass.push_back(mass);
    }
  }
  dist.stderr_per_point.assign(dist.support.size(), 0.0);
  return dist;
}

EmpiricalDistribution additive_exact_distribution(const NonconvInstance& instance, std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon N must be >= 1");
  const std::size_t s = instance.chain.size();
  const int ell = instance.observable.ell;
  const Vector& mu = instance.chain.stationary();
  const auto& table = instance.observable.values;
  const double mean = instance.observable.mean;

  // parts[j][x] = E[F | x_{j+1} = x] - Fbar under mu^ell.
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(ell), std::vector<double>(s, 0.0));
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const auto tuple = tuple_of(idx, s, ell);
    double weight = 1.0;
    for (int x : tuple) weight *= mu(x);
    for (int j = 0; j < ell; ++j) {
      const auto xj = static_cast<std::size_t>(tuple[static_cast<std::size_t>(j)]);
      parts[static_cast<std::size_t>(j)][xj] += table[idx] * weight / mu(static_cast<Eigen::Index>(xj));
    }
  }
  double scale = 1.0;
  for (double v : table) scale = std::max(scale, std::abs(v));
  std::vector<double> all_parts;
  for (auto& part : parts) {
    for (double& v : part) {
      v -= mean;
      all_parts.push_back(v);
    }
  }
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const auto tuple = tuple_of(idx, s, ell);
    double rebuilt = mean;
    for (int j = 0; j < ell; ++j) rebuilt += parts[static_cast<std::size_t>(j)][static_cast<std::size_t>(tuple[static_cast<std::size_t>(j)])];
    if (std::abs(rebuilt - table[idx]) > 1e-12 * scale) {
      throw Error(ErrorCode::NotAdditive, "observable is not a sum of single-coordinate functions");
    }
  }

  const auto quantum = float_span(all_parts, 1e-9, 100'000);
  std::vector<std::vector<long>> units(static_cast<std::size_t>(ell), std::vector<long>(s, 0));
  if (quantum) {
    for (int j = 0; j < ell; ++j) {
      for (std::size_t x = 0; x < s; ++x) {
        const double q = parts[static_cast<std::size_t>(j)][x] / *quantum;
        if (std::abs(q - std::round(q)) > 1e-7) {
          throw Error(ErrorCode::NotAdditive, "additive parts are not commensurable");
        }
        units[static_cast<std::size_t>(j)][x] = std::lround(q);
      }
    }
  } else {
    for (double v : all_parts) {
      if (std::abs(v) > 1e-9 * scale) throw Error(ErrorCode::NotAdditive, "additive parts are incommensurable");
    }
  }
  const double step = quantum.value_or(1.0);

  // Index k of the path contributes sum over {j : j | k, k / j <= N} of part j.
  const std::size_t length = static_cast<std::size_t>(ell) * horizon;
  std::vector<std::vector<long>> increments(length + 1, std::vector<long>(s, 0));
  long lo = 0, hi = 0;
  for (std::size_t k = 1; k <= length; ++k) {
    for (int j = 1; j <= ell; ++j) {
      if (k % static_cast<std::size_t>(j) == 0 && k / static_cast<std::size_t>(j) <= horizon) {
        for (std::size_t x = 0; x < s; ++x) increments[k][x] += units[static_cast<std::size_t>(j - 1)][x];
      }
    }
    const auto [mn, mx] = std::minmax_element(increments[k].begin(), increments[k].end());
    lo += std::min(0L, *mn);
    hi += std::max(0L, *mx);
  }
  const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
  if (width * s > (std::size_t{1} << 28)) throw Error(ErrorCode::CapExceeded, "additive recursion grid too large");

  const Matrix& p = instance.chain.transition();
  std::vector<double> current(s * width, 0.0), next(s * width, 0.0);
  for (std::size_t x = 0; x < s; ++x) current[x * width + static_cast<std::size_t>(-lo)] = mu(static_cast<Eigen::Index>(x));
  long cur_lo = 0, cur_hi = 0;
  for (std::size_t k = 1; k <= length; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    const auto [mn, mx] = std::minmax_element(increments[k].begin(), increments[k].end());
    for (std::size_t x = 0; x < s; ++x) {
      for (std::size_t y = 0; y < s; ++y) {
        const double step_prob = p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
        if (step_prob == 0.0) continue;
        const long shift = increments[k][y];
        const double* src = current.data() + x * width;
        double* dst = next.data() + y * width;
        for (long v = cur_lo; v <= cur_hi; ++v) {
          const double m = src[v - lo];
          if (m != 0.0) dst[v + shift - lo] += m * step_prob;
        }
      }
    }
    cur_lo += std::min(0L, *mn);
    cur_hi += std::max(0L, *mx);
    std::swap(current, next);
  }

  EmpiricalDistribution dist;
  dist.kind = DistributionKind::Exact;
  for (long v = cur_lo; v <= cur_hi; ++v) {
    double mass = 0.0;
    for (std::size_t x = 0; x < s; ++x) mass += current[x * width + static_cast<std::size_t>(v - lo)];
    if (mass > 0.0) {
      dist.support.push_back(static_cast<double>(v) * step + mean * static_cast<double>(horizon));
      dist.mass.push_back(mass);
    }
  }
  dist.stderr_per_point.assign(dist.support.size(), 0.0);
  return dist;
}

EmpiricalDistribution empirical_distribution(const NonconvInstance& instance, const MonteCarloBatch& batch) {
  EmpiricalDistribution dist;
  dist.kind = DistributionKind::MonteCarlo;
  const std::size_t m = batch.totals.size();
  dist.sample_count = m;
  const double inv = 1.0 / static_cast<double>(m);
  auto push = [&](double value, std::size_t count) {
    const double prob = static_cast<double>(count) * inv;
    dist.support.push_back(value);
    dist.mass.push_back(prob);
    dist.stderr_per_point.push_back(std::sqrt(prob * (1.0 - prob) * inv));
  };
  const auto& lattice = instance.lattice;
  if (lattice.kind == LatticeKind::Lattice && lattice.h) {
    const double h = *lattice.h;
    std::map<long long, std::size_t> counts;
    for (double v : batch.totals) {
      const long long k = std::llround(v / h);
      if (std::abs(v - static_cast<double>(k) * h) >= h * 1e-6) {
        throw Error(ErrorCode::KindMismatch, "sampled S_N = " + std::to_string(v) + " is off the lattice hZ");
      }
      ++counts[k];
    }
    for (const auto& [k, count] : counts) {
      push(static_cast<double>(k) * h, count);
      if (lattice.exact_h) dist.exact_support.push_back(*lattice.exact_h * QSqrt2(Rational(k)));
    }
  } else {
    std::vector<double> sorted(batch.totals);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      push(sorted[i], j - i);
      i = j;
    }
  }
  return dist;
}

EmpiricalDistribution empirical_distribution(const NonconvInstance& instance, std::size_t horizon,
                                             std::size_t samples, std::uint64_t seed, unsigned workers) {
  SimConfig config{horizon, samples, seed, workers};
  return empirical_distribution(instance, run_monte_carlo(instance, config, false));
}

const char* to_string(CfMode mode) { return mode == CfMode::Exact ? "exact" : "monte_carlo"; }

std::complex<double> characteristic_value(const EmpiricalDistribution& distribution, double theta) {
  double re = 0.0, im = 0.0, total = 0.0;
  for (std::size_t i = 0; i < distribution.support.size(); ++i) {
    const double p = distribution.mass[i];
    const double angle = theta * distribution.support[i];
    re += p * std::cos(angle);
    im += p * std::sin(angle);
    total += p;
  }
  return {re / total, im / total};
}

std::complex<double> characteristic_value(std::span<const double> samples, double theta) {
  double re = 0.0, im = 0.0;
  for (double v : samples) {
    re += std::cos(theta * v);
    im += std::sin(theta * v);
  }
  const double m = static_cast<double>(samples.size());
  return {re / m, im / m};
}

CFSample characteristic_function(const NonconvInstance& instance, std::size_t horizon,
                                 const std::vector<double>& theta_grid, const CfRequest& request) {
  CFSample out;
  out.mode = request.mode;
  out.theta_grid = theta_grid;
  out.horizons = {horizon};
  std::vector<std::complex<double>> row;
  if (request.mode == CfMode::Exact) {
    const EmpiricalDistribution dist = exact_distribution(instance, horizon);
    for (double theta : theta_grid) row.push_back(characteristic_value(dist, theta));
    if (instance.lattice.kind == LatticeKind::Lattice && instance.lattice.h) {
      const double period = 2.0 * std::numbers::pi / *instance.lattice.h;
      double defect = 0.0;
      for (std::size_t t = 0; t < theta_grid.size(); ++t) {
        defect = std::max(defect, std::abs(characteristic_value(dist, theta_grid[t] + period) - row[t]));
      }
      out.periodicity_defect = defect;
    }
  } else {
    SimConfig config{horizon, request.samples, request.seed, request.workers};
    const MonteCarloBatch batch = run_monte_carlo(instance, config, false);
    for (double theta : theta_grid) row.push_back(characteristic_value(batch.totals, theta));
    out.sample_count = request.samples;
  }
  out.phi.push_back(std::move(row));
  return out;
}

double ks_distance_normal(std::vector<double> samples, double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "KS reference variance must be positive");
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "KS distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double sigma = std::sqrt(sigma2);
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = normal_cdf(samples[i], sigma);
    d = std::max({d, static_cast<double>(i + 1) / m - cdf, cdf - static_cast<double>(i) / m});
  }
  return d;
}

CltReport clt_check(const MonteCarloBatch& batch, double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "CLT check needs sigma2 > 0");
  std::vector<double> scaled(batch.totals);
  const double root = std::sqrt(static_cast<double>(batch.horizon));
  for (double& v : scaled) v /= root;
  CltReport report;
  report.horizon = batch.horizon;
  report.samples = batch.totals.size();
  report.sigma2 = sigma2;
  report.ks = ks_distance_normal(std::move(scaled), sigma2);
  return report;
}

CltReport clt_check(const NonconvInstance& instance, std::size_t horizon, std::size_t samples, std::uint64_t seed,
                    double sigma2, unsigned workers) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "CLT check needs sigma2 > 0");
  SimConfig config{horizon, samples, seed, workers};
  return clt_check(run_monte_carlo(instance, config, false), sigma2);
}

LltReport llt_lattice(const EmpiricalDistribution& distribution, std::size_t horizon, double sigma2, double h) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "LLT comparison needs sigma2 > 0");
  LltReport report;
  report.lattice = true;
  report.h = h;
  report.horizon = horizon;
  report.samples = distribution.sample_count;
  report.sigma2 = sigma2;
  const double n = static_cast<double>(horizon);
  const double sigma = std::sqrt(sigma2);
  const double scale = sigma * std::sqrt(2.0 * std::numbers::pi * n);
  const double radius = 2.0 * sigma * std::sqrt(n);
  const long long k_lo = static_cast<long long>(std::ceil(-radius / h));
  const long long k_hi = static_cast<long long>(std::floor(radius / h));
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double u = static_cast<double>(k) * h;
    LltRow row;
    row.u = u;
    auto it = std::lower_bound(distribution.support.begin(), distribution.support.end(), u - h * 1e-6);
    if (it != distribution.support.end() && std::abs(*it - u) < h * 1e-6) {
      const std::size_t i = static_cast<std::size_t>(it - distribution.support.begin());
      row.local = scale * distribution.mass[i];
      row.stderr = scale * distribution.stderr_per_point[i];
    }
    row.gauss = h * std::exp(-u * u / (2.0 * n * sigma2));
    report.max_deviation = std::max(report.max_deviation, std::abs(row.local - row.gauss));
    report.max_stderr = std::max(report.max_stderr, row.stderr);
    report.rows.push_back(row);
  }
  return report;
}

LltReport llt_nonlattice(std::span<const double> samples, std::size_t horizon, double sigma2, double half_width) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "LLT comparison needs sigma2 > 0");
  if (!(half_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "triangle half-width must be positive");
  LltReport report;
  report.lattice = false;
  report.h = half_width;
  report.horizon = horizon;
  report.samples = samples.size();
  report.sigma2 = sigma2;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(horizon);
  const double m = static_cast<double>(sorted.size());
  const double sigma = std::sqrt(sigma2);
  const double scale = sigma * std::sqrt(2.0 * std::numbers::pi * n);
  const double radius = 2.0 * sigma * std::sqrt(n);
  constexpr int kGrid = 41;
  for (int g = 0; g < kGrid; ++g) {
    const double u = -radius + 2.0 * radius * g / (kGrid - 1);
    auto it = std::upper_bound(sorted.begin(), sorted.end(), u - half_width);
    double sum = 0.0, sum_sq = 0.0;
    for (; it != sorted.end() && *it < u + half_width; ++it) {
      const double weight = 1.0 - std::abs(*it - u) / half_width;
      sum += weight;
      sum_sq += weight * weight;
    }
    const double mean = sum / m;
    const double var = std::max(0.0, sum_sq / m - mean * mean);
    LltRow row;
    row.u = u;
    row.local = scale * mean;
    row.stderr = scale * std::sqrt(var / m);
    row.gauss = half_width * std::exp(-u * u / (2.0 * n * sigma2));
    report.max_deviation = std::max(report.max_deviation, std::abs(row.local - row.gauss));
    report.max_stderr = std::max(report.max_stderr, row.stderr);
    report.rows.push_back(row);
  }
  return report;
}

LltReport llt_check(const NonconvInstance& instance, const MonteCarloBatch& batch, double sigma2, double half_width) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "LLT comparison needs sigma2 > 0");
  switch (instance.lattice.kind) {
    case LatticeKind::Other:
      throw Error(ErrorCode::KindOther, "lattice classification is Other (" + instance.lattice.diagnostic +
                                            "); the local limit comparison covers only lattice and non-lattice cases");
    case LatticeKind::Lattice:
      return llt_lattice(empirical_distribution(instance, batch), batch.horizon, sigma2, *instance.lattice.h);
    case LatticeKind::NonLattice:
      return llt_nonlattice(batch.totals, batch.horizon, sigma2, half_width);
  }
  return {};
}

LltReport llt_check(const NonconvInstance& instance, std::size_t horizon, std::size_t samples, std::uint64_t seed,
                    double sigma2, unsigned workers, double half_width) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "LLT comparison needs sigma2 > 0");
  if (instance.lattice.kind == LatticeKind::Other) return llt_check(instance, MonteCarloBatch{}, sigma2, half_width);
  SimConfig config{horizon, samples, seed, workers};
  return llt_check(instance, run_monte_carlo(instance, config, false), sigma2, half_width);
}

}  // namespace nllt
