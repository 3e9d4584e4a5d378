#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "nllt/error.hpp"
#include "nllt/variance.hpp"

using nllt::PositivityVerdict;

TEST_CASE("s_ell^2 closed forms") {
  auto a = corpus::instance_a().instance();
  CHECK(std::abs(nllt::s_ell_squared(a.chain, a.decomposition) - 1.0) < 1e-12);
  auto b = corpus::instance_b().instance();
  const double s2 = nllt::s_ell_squared(b.chain, b.decomposition);
  CHECK(std::abs(s2 - 29.0 / 21.0) < 1e-9);
  CHECK(std::abs(nllt::s_ell_squared_series(b.chain, b.decomposition, 200) - s2) < 1e-8);
  auto z = corpus::zero().instance();
  CHECK(nllt::s_ell_squared(z.chain, z.decomposition) == 0.0);
}

TEST_CASE("Poisson solve matches the truncated series on all corpus chains") {
  for (const auto& e : corpus::positive_corpus()) {
    auto inst = e.instance();
    const double solve = nllt::s_ell_squared(inst.chain, inst.decomposition);
    const double series = nllt::s_ell_squared_series(inst.chain, inst.decomposition, 200);
    CHECK_MESSAGE(std::abs(solve - series) < 1e-8, e.name);
  }
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto chain = corpus::random_chain(rng, 2 + trial % 3);
    auto inst = nllt::make_instance(chain, corpus::random_table(rng, chain, 1 + trial % 2));
    const double solve = nllt::s_ell_squared(inst.chain, inst.decomposition);
    const double series = nllt::s_ell_squared_series(inst.chain, inst.decomposition, 200);
    CHECK(std::abs(solve - series) < 1e-8);
  }
}

TEST_CASE("s_1^2 of the skewed two-state chain equals the classical Markov variance") {
  auto chain = corpus::chain_of({{0.9, 0.1}, {0.5, 0.5}}, {"0", "1"});
  auto inst = nllt::make_instance(chain, corpus::exact_table(chain, 1, [](const std::vector<int>& x) {
                                    return nllt::QSqrt2(x[0]);
                                  }));
  // indicator of state 1: var = p(1-p), eigenvalue lambda = 0.4, s^2 = var (1 + lambda)/(1 - lambda)
  const double p = 1.0 / 6.0;
  CHECK(std::abs(nllt::s_ell_squared(inst.chain, inst.decomposition) - p * (1 - p) * 1.4 / 0.6) < 1e-12);
}

TEST_CASE("sigma^2 estimate") {
  auto one = corpus::ell1_coin().instance();
  auto est = nllt::sigma_squared_estimate(one, {64, 128, 256}, 20000, 3);
  CHECK(std::abs(est.sigma2 - 1.0) < 0.05);
  CHECK(est.grid.size() == 3);
  CHECK(est.stderr > 0.0);
  auto z = corpus::zero().instance();
  auto ez = nllt::sigma_squared_estimate(z, {4, 8, 16}, 100, 1);
  CHECK(ez.sigma2 == 0.0);
  CHECK_THROWS_AS(nllt::sigma_squared_estimate(one, {4, 8}, 100, 1), nllt::Error);
  CHECK_THROWS_AS(nllt::sigma_squared_estimate(one, {8, 4, 16}, 100, 1), nllt::Error);
}

TEST_CASE("covariance matrix structure") {
  auto a = corpus::instance_a().instance();
  auto cov = nllt::covariance_matrix(a, 256, 20000, 8);
  CHECK(std::abs(cov.c_hat(0, 0) - 1.0) < 4 * cov.c_stderr(0, 0));
  CHECK(std::abs(cov.c_hat(0, 1) - 0.5) < 4 * cov.c_stderr(0, 1));
  CHECK(std::abs(cov.d_hat(1, 1) - 0.5) < 4 * cov.d_stderr(1, 1));
  CHECK(cov.c_hat(0, 1) == cov.c_hat(1, 0));
  CHECK(std::abs(cov.sum_c - cov.var_over_n) < 1e-9);
  auto f = corpus::instance_b();
  auto chain = corpus::coin();
  auto g = nllt::make_instance(chain, nllt::build_observable(2, {-1.0, 1.0, -1.0, 1.0}, {}, chain));
  auto cg = nllt::covariance_matrix(g, 64, 2000, 1);
  CHECK(std::abs(cg.c_hat(0, 0)) < 1e-20);
  CHECK(std::abs(cg.c_hat(0, 1)) < 1e-20);
  auto one = corpus::ell1_coin().instance();
  auto c1 = nllt::covariance_matrix(one, 64, 2000, 1);
  CHECK(c1.c_hat.rows() == 1);
  CHECK(std::abs(c1.c_hat(0, 0) - c1.var_over_n) < 1e-12);
}

TEST_CASE("positivity verdicts") {
  auto b = corpus::instance_b().instance();
  auto pb = nllt::mixing_profile(b.chain, 2);
  const double s2 = nllt::s_ell_squared(b.chain, b.decomposition);
  auto vb = nllt::positivity_verdict(b, pb, s2);
  CHECK(vb.verdict == PositivityVerdict::PositiveCertified);
  CHECK(std::abs(*vb.lower_bound - 29.0 / 84.0) < 1e-9);
  CHECK(*vb.lower_bound == s2 / 4.0);
  CHECK(vb.basis.contraction);

  auto f = corpus::first_only().instance();
  auto vf = nllt::positivity_verdict(f, nllt::mixing_profile(f.chain, 2), 0.0);
  CHECK(vf.verdict == PositivityVerdict::DegenerateFEllZero);
  CHECK(vf.route.find("reduce ell") != std::string::npos);

  auto p = corpus::product_pm1().instance();
  const double sp = nllt::s_ell_squared(p.chain, p.decomposition);
  auto vp = nllt::positivity_verdict(p, nllt::mixing_profile(p.chain, 2), sp);
  CHECK(vp.verdict == PositivityVerdict::PositiveCertified);
  CHECK(std::abs(*vp.lower_bound - 0.25) < 1e-12);

  // permutation chain: no mixing condition; s^2 decides
  nllt::Matrix flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  nllt::Vector mu(2);
  mu << 0.5, 0.5;
  auto perm = nllt::validate_chain(flip, {"-1", "1"}, mu);
  auto inst = nllt::make_instance(perm, nllt::build_observable(1, {-1.0, 1.0}, {}, perm));
  auto prof = nllt::mixing_profile(perm, 1);
  CHECK(nllt::positivity_verdict(inst, prof, std::nullopt).verdict == PositivityVerdict::Inconclusive);
  CHECK(nllt::positivity_verdict(inst, prof, 0.5).verdict == PositivityVerdict::PositiveEmpirical);
}
