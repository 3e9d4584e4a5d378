#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "corpus.hpp"
#include "nllt/error.hpp"
#include "nllt/simulate.hpp"

using nllt::QSqrt2;

TEST_CASE("path evaluation follows the index pattern") {
  auto a = corpus::instance_a().instance();
  nllt::PathSampler sampler(a);
  // states: 0 -> -1, 1 -> +1; path xi_0..xi_4
  const std::vector<int> path{0, 1, 0, 1, 1};
  std::vector<double> comps(2);
  const double s2 = sampler.evaluate(path, 2, comps);
  // S_2 = xi_1 + 2 xi_2 + xi_4 = 1 - 2 + 1
  CHECK(s2 == doctest::Approx(0.0));
  CHECK(comps[0] == doctest::Approx(1.0 - 1.0));   // xi_1 + xi_2
  CHECK(comps[1] == doctest::Approx(-1.0 + 1.0));  // xi_2 + xi_4
  const std::vector<int> other{1, 1, 1, 0, 0};
  CHECK(sampler.evaluate(other, 2) == doctest::Approx(1.0 + 2.0 - 1.0));

  auto one = corpus::ell1_coin().instance();
  nllt::PathSampler s1(one);
  const std::vector<int> p1{0, 1, 0, 1};
  CHECK(s1.evaluate(p1, 3) == doctest::Approx(1.0));

  auto z = corpus::zero().instance();
  nllt::SampleStream stream(3, 0);
  CHECK(nllt::sample_S_N(z, 10, stream) == 0.0);
}

TEST_CASE("exact distribution of instance A") {
  auto a = corpus::instance_a().instance();
  auto d1 = nllt::exact_distribution(a, 1);
  CHECK(d1.support == std::vector<double>{-2, 0, 2});
  CHECK(d1.mass == std::vector<double>{0.25, 0.5, 0.25});
  auto d2 = nllt::exact_distribution(a, 2);
  CHECK(d2.support == std::vector<double>{-4, -2, 0, 2, 4});
  CHECK(d2.mass == std::vector<double>{0.125, 0.25, 0.25, 0.25, 0.125});
  CHECK(d2.exact_support.size() == 5);
  auto z = nllt::exact_distribution(corpus::zero().instance(), 4);
  CHECK(z.support == std::vector<double>{0});
  CHECK(z.mass[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exact distribution masses sum to one and respect the cap") {
  for (const auto& e : corpus::positive_corpus()) {
    auto inst = e.instance();
    auto d = nllt::exact_distribution(inst, 3);
    CHECK(std::abs(d.total_mass() - 1.0) < 1e-12);
    for (std::size_t i = 1; i < d.support.size(); ++i) CHECK(d.support[i - 1] < d.support[i]);
  }
  auto a = corpus::instance_a().instance();
  CHECK_THROWS_WITH_AS(nllt::exact_distribution(a, 12, 1 << 20), doctest::Contains("CapExceeded"), nllt::Error);
  CHECK_NOTHROW(nllt::exact_distribution(a, 9, 1 << 20));
  setenv("NLLT_MAX_ENUM", "1000", 1);
  CHECK(nllt::enumeration_cap() == 1000);
  CHECK_THROWS_AS(nllt::exact_distribution(a, 5), nllt::Error);
  unsetenv("NLLT_MAX_ENUM");
  CHECK(nllt::enumeration_cap() == (std::size_t{1} << 24));
}

TEST_CASE("additive recursion reproduces enumeration") {
  for (auto e : {corpus::instance_a(), corpus::instance_b(), corpus::ell1_coin(), corpus::markov3()}) {
    auto inst = e.instance();
    for (std::size_t n = 1; n <= 5; ++n) {
      auto exact = nllt::exact_distribution(inst, n);
      auto dp = nllt::additive_exact_distribution(inst, n);
      CHECK(nllt::total_variation(exact, dp, 1e-9) < 1e-12);
    }
  }
  CHECK_THROWS_WITH_AS(nllt::additive_exact_distribution(corpus::product_pm1().instance(), 3),
                       doctest::Contains("NotAdditive"), nllt::Error);
}

TEST_CASE("sampling is reproducible across worker counts") {
  auto b = corpus::instance_b().instance();
  auto w1 = nllt::run_monte_carlo(b, {20, 5000, 42, 1}, true);
  auto w2 = nllt::run_monte_carlo(b, {20, 5000, 42, 2}, true);
  auto w8 = nllt::run_monte_carlo(b, {20, 5000, 42, 8}, true);
  CHECK(w1.totals == w2.totals);
  CHECK(w1.totals == w8.totals);
  CHECK(w1.components == w8.components);
  auto other = nllt::run_monte_carlo(b, {20, 5000, 43, 1}, false);
  CHECK(other.totals != w1.totals);
  for (std::size_t j = 0; j < 100; ++j) {
    CHECK(w1.components[2 * j] + w1.components[2 * j + 1] == doctest::Approx(w1.totals[j]));
  }
  CHECK_THROWS_WITH_AS(nllt::run_monte_carlo(b, {1000, 1000, 1, 1, 1e5}, false),
                       doctest::Contains("BudgetExceeded"), nllt::Error);
}

TEST_CASE("empirical distribution") {
  auto a = corpus::instance_a().instance();
  auto d = nllt::empirical_distribution(a, 1, 200000, 9, 1);
  REQUIRE(d.support == std::vector<double>{-2, 0, 2});
  CHECK(std::abs(d.mass[0] - 0.25) < 0.005);
  CHECK(std::abs(d.mass[1] - 0.5) < 0.005);
  CHECK(std::abs(d.total_mass() - 1.0) < 1e-9);
  CHECK(d.exact_support.size() == 3);
  auto single = nllt::empirical_distribution(a, 3, 1, 9, 1);
  CHECK(single.support.size() == 1);
  CHECK(single.mass[0] == 1.0);
  auto g = corpus::nonlattice3().instance();
  auto dg = nllt::empirical_distribution(g, 2, 1000, 1, 1);
  CHECK(std::abs(dg.total_mass() - 1.0) < 1e-9);
}

TEST_CASE("characteristic function invariants") {
  auto a = corpus::instance_a().instance();
  std::vector<double> grid;
  for (int i = -20; i <= 20; ++i) grid.push_back(0.17 * i);
  for (std::size_t n = 1; n <= 6; ++n) {
    auto cf = nllt::characteristic_function(a, n, grid);
    REQUIRE(cf.periodicity_defect.has_value());
    CHECK(*cf.periodicity_defect < 1e-10);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      CHECK(std::abs(cf.phi[0][t]) <= 1.0 + 1e-12);
      const auto mirror = cf.phi[0][grid.size() - 1 - t];
      CHECK(std::abs(mirror - std::conj(cf.phi[0][t])) < 1e-10);
    }
    CHECK(cf.phi[0][20] == std::complex<double>(1.0, 0.0));
  }
  auto one = nllt::characteristic_function(a, 1, {1.0, std::numbers::pi});
  CHECK(std::abs(one.phi[0][0] - std::cos(1.0) * std::cos(1.0)) < 1e-12);
  CHECK(std::abs(one.phi[0][1] - 1.0) < 1e-12);
  auto z = nllt::characteristic_function(corpus::zero().instance(), 3, {0.5, 2.0});
  CHECK(z.phi[0][0] == std::complex<double>(1.0, 0.0));
  nllt::CfRequest mc{nllt::CfMode::MonteCarlo, 1000, 5, 1};
  auto m = nllt::characteristic_function(a, 4, {0.0, 0.3}, mc);
  CHECK(m.phi[0][0] == std::complex<double>(1.0, 0.0));
  CHECK(m.sample_count.value() == 1000);
}

TEST_CASE("KS distance") {
  CHECK(nllt::ks_distance_normal({0.0}, 1.0) == doctest::Approx(0.5));
  std::vector<double> zeros(1000, 0.0);
  CHECK(nllt::ks_distance_normal(zeros, 3.0) == doctest::Approx(0.5));
  CHECK_THROWS_WITH_AS(nllt::ks_distance_normal({1.0}, 0.0), doctest::Contains("DegenerateVariance"), nllt::Error);
  auto one = corpus::ell1_coin().instance();
  auto report = nllt::clt_check(one, 1024, 20000, 4, 1.0);
  CHECK(report.ks < 0.03);
}

TEST_CASE("local limit comparison") {
  auto a = corpus::instance_a().instance();
  auto exact = nllt::exact_distribution(a, 10);
  auto report = nllt::llt_lattice(exact, 10, 3.0, 2.0);
  CHECK(report.rows.size() > 3);
  for (const auto& r : report.rows) CHECK(std::fmod(std::abs(r.u), 2.0) == 0.0);
  CHECK(report.max_stderr == 0.0);
  // far outside the support both sides vanish
  auto far = nllt::llt_lattice(nllt::exact_distribution(a, 1), 1, 3.0, 2.0);
  for (const auto& r : far.rows) {
    if (std::abs(r.u) > 2.0) CHECK(r.local == 0.0);
  }
  CHECK_THROWS_WITH_AS(nllt::llt_check(corpus::product_pm1().instance(), 16, 10, 1, 1.0),
                       doctest::Contains("KindOther"), nllt::Error);
  CHECK_THROWS_WITH_AS(nllt::llt_check(a, 16, 10, 1, 0.0), doctest::Contains("DegenerateVariance"), nllt::Error);
  auto g = corpus::nonlattice3().instance();
  auto nl = nllt::llt_check(g, 64, 20000, 3, 0.5);
  CHECK_FALSE(nl.lattice);
  CHECK(nl.rows.size() == 41);
}
