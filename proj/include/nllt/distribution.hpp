#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nllt/exact.hpp"

namespace nllt {

enum class DistributionKind { Exact, MonteCarlo };

/// Law of S_N on a sorted, strictly ascending support.
struct EmpiricalDistribution {
  DistributionKind kind = DistributionKind::Exact;
  std::vector<double> support;
  std::vector<double> mass;
  std::vector<double> stderr_per_point;
  /// Exact support points parallel to support (exact enumeration of exact tables only).
  std::vector<QSqrt2> exact_support;
  std::optional<std::size_t> sample_count;

  double total_mass() const;
  /// P{S_N = u} with u matched within tol; 0 if absent.
  double mass_at(double u, double tol = 1e-9) const;
};

/// Half the L1 distance between two laws, matching support points within tol.
double total_variation(const EmpiricalDistribution& a, const EmpiricalDistribution& b, double tol = 1e-9);

}  // namespace nllt
