#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/distribution.hpp"
#include "nllt/exact.hpp"
#include "nllt/observable.hpp"

namespace nllt {

enum class LatticeKind { Lattice, NonLattice, Other };

const char* to_string(LatticeKind kind);

/// Span data for one prefix (x_1, ..., x_{ell-1}).
struct PrefixSpan {
  std::vector<int> prefix;
  double mass = 0.0;
  /// B is all of [0, inf): F(prefix, .) is constant.
  bool unbounded = false;
  /// B is empty: last-coordinate differences are incommensurable.
  bool empty = false;
  /// Largest span, when B is bounded and non-empty.
  std::optional<double> span;
  std::optional<QSqrt2> exact_span;
  /// Every F(prefix, x) is an integer multiple of the span.
  bool span_in_values_lattice = false;
};

struct LatticeClassification {
  LatticeKind kind = LatticeKind::Other;
  /// Verdict came from float tables (tolerance 1e-9) rather than exact values.
  bool heuristic = true;
  std::optional<double> h;
  std::optional<QSqrt2> exact_h;
  /// Lattice with an irrational (sqrt 2 multiple) span.
  bool irrational_span = false;
  /// For NonLattice: a prefix whose B is empty.
  std::optional<std::vector<int>> witness;
  std::string diagnostic;
  std::vector<PrefixSpan> per_prefix;
};

/// Lattice / non-lattice / other verdict for a centered observable. Exact
/// values give a certified verdict; float-only tables give a heuristic one.
LatticeClassification classify(const Observable& observable, const FiniteChain& chain);

/// Every support point of the distribution lies in hZ (exactly when the
/// distribution carries exact support points).
bool lattice_mesh_check(const LatticeClassification& classification, const EmpiricalDistribution& distribution);

/// Span of a finite set of reals: largest h > 0 with every value in hZ,
/// recovered through rational ratios within tol. Empty when the values are
/// all zero or incommensurable at denominators up to max_den.
std::optional<double> float_span(const std::vector<double>& values, double tol = 1e-9,
                                 std::int64_t max_den = 100'000);

}  // namespace nllt
