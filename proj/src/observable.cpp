#include "nllt/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nllt/error.hpp"

namespace nllt {

namespace {

std::vector<double> average_last(std::span<const double> table, const Vector& mu) {
  const std::size_t s = static_cast<std::size_t>(mu.size());
  std::vector<double> out(table.size() / s, 0.0);
  for (std::size_t prefix = 0; prefix < out.size(); ++prefix) {
    double acc = 0.0;
    for (std::size_t c = 0; c < s; ++c) acc += table[prefix * s + c] * mu(static_cast<Eigen::Index>(c));
    out[prefix] = acc;
  }
  return out;
}

std::optional<QSqrt2> exact_integral(const std::vector<std::optional<QSqrt2>>& table, const FiniteChain& chain) {
  const auto& exact_mu = chain.exact_stationary();
  if (!exact_mu) return std::nullopt;
  const std::size_t s = chain.size();
  try {
    std::vector<QSqrt2> current;
    current.reserve(table.size());
    for (const auto& v : table) {
      if (!v) return std::nullopt;
      current.push_back(*v);
    }
    while (current.size() > 1) {
      std::vector<QSqrt2> next(current.size() / s);
      for (std::size_t prefix = 0; prefix < next.size(); ++prefix) {
        QSqrt2 acc;
        for (std::size_t c = 0; c < s; ++c) acc += current[prefix * s + c] * QSqrt2((*exact_mu)[c]);
        next[prefix] = acc;
      }
      current = std::move(next);
    }
    return current.front();
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

bool Observable::fully_exact() const noexcept {
  return has_exact() && std::all_of(exact_values.begin(), exact_values.end(), [](const auto& v) { return v.has_value(); });
}

std::size_t table_size(std::size_t states, int arity) {
  std::size_t n = 1;
  for (int i = 0; i < arity; ++i) {
    if (n > (std::size_t{1} << 31) / states) throw Error(ErrorCode::CapExceeded, "observable table too large");
    n *= states;
  }
  return n;
}

std::size_t tuple_index(std::span<const int> tuple, std::size_t states) {
  std::size_t idx = 0;
  for (int x : tuple) idx = idx * states + static_cast<std::size_t>(x);
  return idx;
}

std::vector<int> tuple_of(std::size_t index, std::size_t states, int arity) {
  std::vector<int> tuple(static_cast<std::size_t>(arity));
  for (int i = arity - 1; i >= 0; --i) {
    tuple[static_cast<std::size_t>(i)] = static_cast<int>(index % states);
    index /= states;
  }
  return tuple;
}

double integrate(std::span<const double> table, int arity, const Vector& mu) {
  std::vector<double> current(table.begin(), table.end());
  for (int i = 0; i < arity; ++i) current = average_last(current, mu);
  return current.front();
}

Observable build_observable(int ell, std::vector<double> values, std::vector<std::optional<QSqrt2>> exact_values,
                            const FiniteChain& chain) {
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "observable arity must be >= 1");
  const std::size_t expected = table_size(chain.size(), ell);
  if (values.size() != expected) {
    throw Error(ErrorCode::LengthMismatch, "observable table has " + std::to_string(values.size()) +
                                               " entries, expected S^ell = " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFiniteValue, "observable value " + std::to_string(i) + " is not finite");
    }
  }
  if (!exact_values.empty()) {
    if (exact_values.size() != expected) {
      throw Error(ErrorCode::LengthMismatch, "exact_values has " + std::to_string(exact_values.size()) +
                                                 " entries, expected " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < expected; ++i) {
      if (exact_values[i] && std::abs(exact_values[i]->to_double() - values[i]) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "exact value " + std::to_string(i) + " (" + exact_values[i]->str() +
                                                    ") disagrees with float entry");
      }
    }
  }

  Observable obs;
  obs.ell = ell;
  obs.states = chain.size();
  obs.values = std::move(values);
  obs.exact_values = std::move(exact_values);
  obs.mean = integrate(obs.values, ell, chain.stationary());
  std::vector<double> squares(obs.values.size());
  std::transform(obs.values.begin(), obs.values.end(), squares.begin(), [](double v) { return v * v; });
  obs.second_moment = integrate(squares, ell, chain.stationary());
  if (obs.fully_exact()) obs.exact_mean = exact_integral(obs.exact_values, chain);
  return obs;
}

Observable center(const Observable& observable, const FiniteChain& chain) {
  std::vector<double> shifted(observable.values);
  const double shift = observable.exact_mean ? observable.exact_mean->to_double() : observable.mean;
  for (double& v : shifted) v -= shift;

  std::vector<std::optional<QSqrt2>> exact;
  bool dropped = observable.exact_dropped;
  if (observable.has_exact()) {
    if (observable.exact_mean) {
      try {
        exact.reserve(observable.exact_values.size());
        for (const auto& v : observable.exact_values) exact.push_back(*v - *observable.exact_mean);
      } catch (const Error&) {
        exact.clear();
        dropped = true;
      }
    } else if (shift == 0.0) {
      exact = observable.exact_values;
    } else {
      dropped = true;
    }
  }
  Observable out = build_observable(observable.ell, std::move(shifted), {}, chain);
  if (!exact.empty()) {
    // Shifted exact values stay authoritative; the float table mirrors them.
    out.exact_values = std::move(exact);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (out.exact_values[i]) out.values[i] = out.exact_values[i]->to_double();
    }
    out.mean = integrate(out.values, out.ell, chain.stationary());
    if (out.fully_exact()) out.exact_mean = exact_integral(out.exact_values, chain);
  }
  out.exact_dropped = dropped;
  return out;
}

Decomposition decompose(const Observable& observable, const FiniteChain& chain) {
  if (std::abs(observable.mean) >= 1e-10) {
    throw Error(ErrorCode::NotCentered, "decompose requires a centered observable (mean = " +
                                            std::to_string(observable.mean) + ")");
  }
  const std::size_t s = chain.size();
  const Vector& mu = chain.stationary();
  const int ell = observable.ell;

  // averaged[k] = integral of F over x_{k+1..ell}, a table on X^k.
  std::vector<std::vector<double>> averaged(static_cast<std::size_t>(ell) + 1);
  averaged[static_cast<std::size_t>(ell)] = observable.values;
  for (int k = ell; k >= 1; --k) {
    averaged[static_cast<std::size_t>(k) - 1] = average_last(averaged[static_cast<std::size_t>(k)], mu);
  }

  Decomposition dec;
  dec.ell = ell;
  dec.states = s;
  dec.components.resize(static_cast<std::size_t>(ell));
  for (int i = 1; i <= ell; ++i) {
    const auto& upper = averaged[static_cast<std::size_t>(i)];
    const auto& lower = averaged[static_cast<std::size_t>(i) - 1];
    std::vector<double> component(upper.size());
    for (std::size_t idx = 0; idx < upper.size(); ++idx) component[idx] = upper[idx] - lower[idx / s];
    dec.components[static_cast<std::size_t>(i) - 1] = std::move(component);
  }

  if (observable.fully_exact()) {
    bool zero = true;
    for (std::size_t prefix = 0; prefix < observable.size() / s && zero; ++prefix) {
      for (std::size_t c = 1; c < s; ++c) {
        if (*observable.exact_values[prefix * s + c] != *observable.exact_values[prefix * s]) {
          zero = false;
          break;
        }
      }
    }
    dec.exact_last_zero = zero;
  }
  return dec;
}

bool is_F_ell_zero(const Decomposition& decomposition, double tol) {
  if (decomposition.exact_last_zero) return *decomposition.exact_last_zero;
  const auto& last = decomposition.last();
  return std::all_of(last.begin(), last.end(), [tol](double v) { return std::abs(v) <= tol; });
}

}  // namespace nllt
