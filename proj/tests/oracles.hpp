#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nllt/chain.hpp"
#include "nllt/observable.hpp"

namespace oracle {

using nllt::Matrix;

// sup over events on (xi_0, xi_1) and (xi_{1+m}, xi_{2+m}) of |P(A and B)/(P(A)P(B)) - 1|.
inline double psi_event_oracle(const nllt::FiniteChain& chain, int m) {
  const Matrix& p = chain.transition();
  const Matrix pm = nllt::k_step(chain, m);
  const auto& mu = chain.stationary();
  double joint[2][2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) joint[a][b][c][d] = mu(a) * p(a, b) * pm(b, c) * p(c, d);
  double sup = 0.0;
  for (int ga = 1; ga < 16; ++ga) {
    for (int gb = 1; gb < 16; ++gb) {
      double pa = 0.0, pb = 0.0, pab = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
              const double w = joint[a][b][c][d];
              const bool in_a = (ga >> (2 * a + b)) & 1, in_b = (gb >> (2 * c + d)) & 1;
              if (in_a) pa += w;
              if (in_b) pb += w;
              if (in_a && in_b) pab += w;
            }
      if (pa > 0.0 && pb > 0.0) sup = std::max(sup, std::abs(pab / (pa * pb) - 1.0));
    }
  }
  return sup;
}

// Second singular value of D^{1/2} P^k D^{-1/2}; the first is 1 with vector sqrt(mu).
inline double rho_oracle(const nllt::FiniteChain& chain, int k) {
  const auto s = static_cast<Eigen::Index>(chain.size());
  const Matrix pk = nllt::k_step(chain, k);
  Matrix a(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      a(i, j) = std::sqrt(chain.stationary()(i)) * pk(i, j) / std::sqrt(chain.stationary()(j));
  return Eigen::BDCSVD<Matrix>(a).singularValues()(1);
}

// Reconstruction and last-coordinate mean-zero, worst deviation.
inline double decomposition_defect(const nllt::Observable& centered, const nllt::Decomposition& dec,
                                   const nllt::FiniteChain& chain) {
  const std::size_t s = chain.size();
  const int ell = centered.ell;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < centered.size(); ++idx) {
    const auto x = nllt::tuple_of(idx, s, ell);
    double sum = 0.0;
    for (int i = 1; i <= ell; ++i) {
      const std::vector<int> head(x.begin(), x.begin() + i);
      sum += dec.components[static_cast<std::size_t>(i - 1)][nllt::tuple_index(head, s)];
    }
    worst = std::max(worst, std::abs(sum - centered.values[idx]));
  }
  for (int i = 1; i <= ell; ++i) {
    const auto& table = dec.components[static_cast<std::size_t>(i - 1)];
    for (std::size_t p = 0; p < table.size() / s; ++p) {
      double m = 0.0;
      for (std::size_t c = 0; c < s; ++c) m += table[p * s + c] * chain.stationary()(static_cast<Eigen::Index>(c));
      worst = std::max(worst, std::abs(m));
    }
  }
  return worst;
}

}  // namespace oracle
