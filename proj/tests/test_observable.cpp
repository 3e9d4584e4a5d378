#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "oracles.hpp"
#include "nllt/error.hpp"
#include "nllt/observable.hpp"

using nllt::QSqrt2;

TEST_CASE("moments of small observables") {
  auto a = corpus::instance_a();
  CHECK(std::abs(a.observable.mean) < 1e-15);
  CHECK(std::abs(a.observable.second_moment - 2.0) < 1e-12);
  auto z = corpus::zero();
  CHECK(z.observable.mean == 0.0);
  CHECK(z.observable.second_moment == 0.0);
  auto one = corpus::ell1_coin();
  CHECK(std::abs(one.observable.second_moment - 1.0) < 1e-12);
}

TEST_CASE("table validation") {
  auto chain = corpus::coin();
  CHECK_THROWS_WITH_AS(nllt::build_observable(2, {1.0, 2.0, 3.0}, {}, chain), doctest::Contains("LengthMismatch"),
                       nllt::Error);
  CHECK_THROWS_WITH_AS(nllt::build_observable(1, {1.0, NAN}, {}, chain), doctest::Contains("NonFiniteValue"),
                       nllt::Error);
  CHECK_THROWS_AS(nllt::build_observable(1, {1.0, 2.0}, {QSqrt2(1), QSqrt2(3)}, chain), nllt::Error);
}

TEST_CASE("centering") {
  auto e = corpus::product_01();
  CHECK(std::abs(e.observable.mean - 0.25) < 1e-15);
  REQUIRE(e.observable.exact_mean.has_value());
  CHECK(*e.observable.exact_mean == QSqrt2(nllt::Rational(1, 4)));
  auto c = nllt::center(e.observable, e.chain);
  CHECK(std::abs(c.mean) < 1e-15);
  CHECK(*c.exact_values[0] == QSqrt2(nllt::Rational(-1, 4)));
  CHECK(*c.exact_values[3] == QSqrt2(nllt::Rational(3, 4)));
  CHECK_FALSE(c.exact_dropped);

  auto a = corpus::instance_a();
  auto ca = nllt::center(a.observable, a.chain);
  CHECK(ca.values == a.observable.values);

  auto chain = corpus::coin();
  auto constant = nllt::build_observable(2, {3.5, 3.5, 3.5, 3.5}, {}, chain);
  auto cc = nllt::center(constant, chain);
  for (double v : cc.values) CHECK(v == 0.0);

  auto g = corpus::nonlattice3();
  auto cg = nllt::center(g.observable, g.chain);
  REQUIRE(cg.fully_exact());
  CHECK(*cg.exact_values[0] == QSqrt2(nllt::Rational(-1, 3), nllt::Rational(-1, 3)));
}

TEST_CASE("decomposition examples") {
  auto a = corpus::instance_a();
  auto ca = nllt::center(a.observable, a.chain);
  auto dec = nllt::decompose(ca, a.chain);
  CHECK(std::abs(dec.components[0][0] + 1.0) < 1e-15);
  CHECK(std::abs(dec.components[0][1] - 1.0) < 1e-15);
  CHECK(std::abs(dec.components[1][2] + 1.0) < 1e-15);  // F_2(1, -1) = -1
  CHECK_FALSE(nllt::is_F_ell_zero(dec));

  auto p = corpus::product_pm1();
  auto dp = nllt::decompose(nllt::center(p.observable, p.chain), p.chain);
  CHECK(std::abs(dp.components[0][0]) < 1e-15);
  CHECK(std::abs(dp.components[1][3] - 1.0) < 1e-15);
  CHECK_FALSE(nllt::is_F_ell_zero(dp));

  auto f = corpus::first_only();
  auto df = nllt::decompose(nllt::center(f.observable, f.chain), f.chain);
  CHECK(nllt::is_F_ell_zero(df));

  auto chain = corpus::coin();
  auto gy = nllt::build_observable(2, {-1.0, 1.0, -1.0, 1.0}, {}, chain);
  auto dg = nllt::decompose(gy, chain);
  CHECK(std::abs(dg.components[0][0]) < 1e-15);
  CHECK(std::abs(dg.components[1][1] - 1.0) < 1e-15);

  CHECK_THROWS_WITH_AS(nllt::decompose(corpus::product_01().observable, chain), doctest::Contains("NotCentered"),
                       nllt::Error);
}

TEST_CASE("random tables satisfy decomposition identities") {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 100; ++seed) {
    const int s = 2 + seed % 3;
    const int ell = 1 + (seed / 3) % 3;
    auto chain = corpus::random_chain(rng, s);
    auto raw = corpus::random_table(rng, chain, ell);
    auto centered = nllt::center(raw, chain);
    auto dec = nllt::decompose(centered, chain);
    CHECK(oracle::decomposition_defect(centered, dec, chain) < 1e-11);

    // E(sum F_i)^2 = b^2 of the centered table
    double second = 0.0;
    for (std::size_t idx = 0; idx < centered.size(); ++idx) {
      const auto x = nllt::tuple_of(idx, chain.size(), ell);
      double sum = 0.0, w = 1.0;
      for (int i = 1; i <= ell; ++i) {
        const std::vector<int> head(x.begin(), x.begin() + i);
        sum += dec.components[static_cast<std::size_t>(i - 1)][nllt::tuple_index(head, chain.size())];
        w *= chain.stationary()(x[static_cast<std::size_t>(i - 1)]);
      }
      second += w * sum * sum;
    }
    CHECK(std::abs(second - centered.second_moment) < 1e-11);

    // re-summing the components and decomposing again reproduces them
    std::vector<double> resum(centered.size());
    for (std::size_t idx = 0; idx < centered.size(); ++idx) {
      const auto x = nllt::tuple_of(idx, chain.size(), ell);
      for (int i = 1; i <= ell; ++i) {
        const std::vector<int> head(x.begin(), x.begin() + i);
        resum[idx] += dec.components[static_cast<std::size_t>(i - 1)][nllt::tuple_index(head, chain.size())];
      }
    }
    auto again = nllt::decompose(nllt::build_observable(ell, resum, {}, chain), chain);
    double diff = 0.0;
    for (int i = 0; i < ell; ++i) {
      for (std::size_t k = 0; k < dec.components[static_cast<std::size_t>(i)].size(); ++k) {
        diff = std::max(diff, std::abs(again.components[static_cast<std::size_t>(i)][k] -
                                       dec.components[static_cast<std::size_t>(i)][k]));
      }
    }
    CHECK(diff < 1e-12);
  }
}
