#include "nllt/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nllt {

double EmpiricalDistribution::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

double EmpiricalDistribution::mass_at(double u, double tol) const {
  auto it = std::lower_bound(support.begin(), support.end(), u - tol);
  if (it == support.end() || std::abs(*it - u) > tol) return 0.0;
  return mass[static_cast<std::size_t>(it - support.begin())];
}

double total_variation(const EmpiricalDistribution& a, const EmpiricalDistribution& b, double tol) {
  double l1 = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && a.support[i] < b.support[j] - tol)) {
      l1 += a.mass[i++];
    } else if (i == a.support.size() || b.support[j] < a.support[i] - tol) {
      l1 += b.mass[j++];
    } else {
      l1 += std::abs(a.mass[i++] - b.mass[j++]);
    }
  }
  return 0.5 * l1;
}

}  // namespace nllt
