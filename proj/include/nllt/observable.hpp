#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/exact.hpp"

namespace nllt {

/// Observable F on X^ell stored as a dense row-major table (last index
/// fastest), with mean and second moment under mu^ell.
struct Observable {
  int ell = 1;
  std::size_t states = 0;
  std::vector<double> values;
  /// Optional exact entries parallel to values; an empty vector means none.
  /// Individual entries may be missing, which classify() rejects.
  std::vector<std::optional<QSqrt2>> exact_values;
  double mean = 0.0;
  double second_moment = 0.0;
  /// Exact mean, available when every entry is exact and mu is exact.
  std::optional<QSqrt2> exact_mean;
  /// Set by center() when the exact table could not be shifted exactly.
  bool exact_dropped = false;

  std::size_t size() const noexcept { return values.size(); }
  bool has_exact() const noexcept { return !exact_values.empty(); }
  bool fully_exact() const noexcept;
};

/// S^k, throwing CapExceeded beyond 2^31 entries.
std::size_t table_size(std::size_t states, int arity);

/// Flat index of (x_1, ..., x_k).
std::size_t tuple_index(std::span<const int> tuple, std::size_t states);

/// Inverse of tuple_index for an arity-k tuple.
std::vector<int> tuple_of(std::size_t index, std::size_t states, int arity);

Observable build_observable(int ell, std::vector<double> values, std::vector<std::optional<QSqrt2>> exact_values,
                            const FiniteChain& chain);

/// F - Fbar. Exact entries are shifted exactly when exact_mean is known and
/// dropped (exact_dropped = true) otherwise, unless no shift is needed.
Observable center(const Observable& observable, const FiniteChain& chain);

/// F_1, ..., F_ell; component i (0-based) is a table on X^{i+1}.
struct Decomposition {
  int ell = 1;
  std::size_t states = 0;
  std::vector<std::vector<double>> components;
  /// Exact answer to "F_ell == 0" when the observable is fully exact.
  std::optional<bool> exact_last_zero;

  const std::vector<double>& last() const { return components.back(); }
};

Decomposition decompose(const Observable& observable, const FiniteChain& chain);

/// F_ell vanishes identically (exact test when available, else max |F_ell| <= tol).
bool is_F_ell_zero(const Decomposition& decomposition, double tol = 1e-10);

/// mu^k-weighted integral of a table on X^k.
double integrate(std::span<const double> table, int arity, const Vector& mu);

}  // namespace nllt
