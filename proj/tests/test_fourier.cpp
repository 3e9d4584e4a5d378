#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corpus.hpp"
#include "nllt/error.hpp"
#include "nllt/fourier.hpp"

using nllt::ComplexMatrix;

namespace {

double abs_ln_cos(double x) { return -std::log(std::abs(std::cos(x))); }

// -log|phi_N(theta)| for the i.i.d. sign coin with F = x + y.
double coin_decay(std::size_t n, double theta) {
  const double odd_terms = static_cast<double>((n + 1) / 2);
  return 2.0 * odd_terms * abs_ln_cos(theta) + static_cast<double>(n / 2) * abs_ln_cos(2.0 * theta);
}

}  // namespace

TEST_CASE("operator at theta = 0 is the ell-step matrix and rho is exactly one") {
  for (const auto& e : corpus::positive_corpus()) {
    auto inst = e.instance();
    const int ell = inst.observable.ell;
    const std::vector<int> prefix(static_cast<std::size_t>(ell - 1), 0);
    auto op = nllt::phi_operator(inst.chain, inst.observable, prefix, 0.0);
    const nllt::Matrix step = nllt::k_step(inst.chain, ell);
    CHECK((op.matrix.real() - step).cwiseAbs().maxCoeff() == 0.0);
    CHECK(op.matrix.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(nllt::rho_theta(inst.chain, inst.observable, prefix, 0.0) == 1.0);
    CHECK(std::abs(nllt::sup_norm(op.matrix) - 1.0) < 1e-14);
  }
}

TEST_CASE("hand-computed contraction values") {
  auto b = corpus::instance_b().instance();
  CHECK(nllt::block_length(b.chain, 2) == 3);
  // prefix -1, theta = pi/2: phases (1, -1) up to a common factor
  const double rho = nllt::rho_theta(b.chain, b.observable, {0}, std::numbers::pi / 2);
  CHECK(std::abs(rho - 0.16) < 1e-12);

  auto a = corpus::instance_a().instance();
  // F differs by 2 across the last coordinate: phases align at multiples of pi
  CHECK(std::abs(nllt::rho_theta(a.chain, a.observable, {0}, std::numbers::pi) - 1.0) < 1e-12);
  CHECK(nllt::rho_theta(a.chain, a.observable, {0}, 1.0) < 1.0 - 1e-6);
  // coin: |sum_c 1/2 e^{2 i theta c}| = |cos theta|
  CHECK(std::abs(nllt::rho_theta(a.chain, a.observable, {1}, 1.0) - std::abs(std::cos(1.0))) < 1e-12);

  auto f = corpus::first_only().instance();
  for (double theta : {0.3, 1.1, 2.9}) {
    CHECK(std::abs(nllt::rho_theta(f.chain, f.observable, {0}, theta) - 1.0) < 1e-12);
    CHECK(std::abs(nllt::rho_theta(f.chain, f.observable, {1}, theta) - 1.0) < 1e-12);
  }
  CHECK_THROWS_WITH_AS(nllt::rho_theta(b.chain, b.observable, {0}, 1.0, 2), doctest::Contains("InvalidArgument"),
                       nllt::Error);
}

TEST_CASE("rho returns to one after a full lattice period") {
  for (auto e : {corpus::instance_a(), corpus::instance_b(), corpus::ell3()}) {
    auto inst = e.instance();
    REQUIRE(inst.lattice.h.has_value());
    const double period = 2.0 * std::numbers::pi / *inst.lattice.h;
    const std::size_t prefixes = nllt::table_size(inst.chain.size(), inst.observable.ell - 1);
    for (std::size_t p = 0; p < prefixes; ++p) {
      const auto prefix = nllt::tuple_of(p, inst.chain.size(), inst.observable.ell - 1);
      CHECK(std::abs(nllt::rho_theta(inst.chain, inst.observable, prefix, period) - 1.0) < 1e-12);
      for (double theta : {0.4, 1.3}) {
        const double r0 = nllt::rho_theta(inst.chain, inst.observable, prefix, theta);
        const double r1 = nllt::rho_theta(inst.chain, inst.observable, prefix, theta + period);
        CHECK(std::abs(r0 - r1) < 1e-12);
      }
    }
  }
}

TEST_CASE("block products are bounded by rho of the next-to-last prefix") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  std::vector<corpus::Entry> entries = corpus::positive_corpus();
  entries.push_back(corpus::ell3());
  for (const auto& e : entries) {
    auto inst = e.instance();
    const int ell = inst.observable.ell;
    const int m = nllt::block_length(inst.chain, ell);
    const std::size_t prefixes = nllt::table_size(inst.chain.size(), ell - 1);
    std::uniform_int_distribution<std::size_t> pick(0, prefixes - 1);
    for (int trial = 0; trial < 30; ++trial) {
      const double theta = angle(rng);
      std::vector<std::vector<int>> seq;
      for (int n = 0; n < m; ++n) seq.push_back(nllt::tuple_of(pick(rng), inst.chain.size(), ell - 1));
      ComplexMatrix prod = ComplexMatrix::Identity(static_cast<Eigen::Index>(inst.chain.size()),
                                                   static_cast<Eigen::Index>(inst.chain.size()));
      for (const auto& x : seq) prod = prod * nllt::phi_operator(inst.chain, inst.observable, x, theta).matrix;
      const double rho = nllt::rho_theta(inst.chain, inst.observable, seq[static_cast<std::size_t>(m - 2)], theta);
      CHECK_MESSAGE(nllt::sup_norm(prod) <= rho + 1e-12, e.name);
    }
  }
}

TEST_CASE("rho equals one exactly when the phase is constant on the last coordinate") {
  // every ell-step transition is positive here, so rho < 1 iff the phase varies in c
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(0.05, 3.0);
  for (auto e : {corpus::instance_b(), corpus::markov3(), corpus::nonlattice3()}) {
    auto inst = e.instance();
    const std::size_t s = inst.chain.size();
    const std::size_t prefixes = nllt::table_size(s, 1);
    for (std::size_t p = 0; p < prefixes; ++p) {
      const std::vector<int> prefix{static_cast<int>(p)};
      for (int trial = 0; trial < 10; ++trial) {
        const double theta = angle(rng);
        double spread = 0.0;
        for (std::size_t c = 1; c < s; ++c) {
          const double d = theta * (inst.observable.values[p * s + c] - inst.observable.values[p * s]);
          const double wrapped = std::remainder(d, 2.0 * std::numbers::pi);
          spread = std::max(spread, std::abs(wrapped));
        }
        const bool constant = spread < 1e-9;
        const double rho = nllt::rho_theta(inst.chain, inst.observable, prefix, theta);
        CHECK(constant == (rho > 1.0 - 1e-12));
      }
    }
  }
  // forcing constancy: 2 pi multiples of the span
  auto a = corpus::instance_a().instance();
  CHECK(std::abs(nllt::rho_theta(a.chain, a.observable, {1}, 2.0 * std::numbers::pi) - 1.0) < 1e-12);
}

TEST_CASE("ell = 1: characteristic function is a matrix power") {
  std::vector<corpus::Entry> entries{corpus::ell1_coin()};
  std::mt19937_64 rng(4);
  for (int k = 0; k < 4; ++k) {
    auto chain = corpus::random_chain(rng, 3);
    entries.push_back({"random", chain, corpus::random_table(rng, chain, 1)});
  }
  for (const auto& e : entries) {
    auto inst = e.instance();
    for (double theta : {0.3, 1.7}) {
      const ComplexMatrix phi = nllt::phi_operator(inst.chain, inst.observable, {}, theta, 3).matrix;
      Eigen::RowVectorXcd row = inst.chain.stationary().transpose().cast<std::complex<double>>();
      for (std::size_t n = 1; n <= 6; ++n) {
        row = row * phi;
        const std::complex<double> via_matrix = row.sum();
        const auto cf = nllt::characteristic_function(inst, n, {theta});
        CHECK(std::abs(via_matrix - cf.phi[0][0]) < 1e-10);
      }
    }
  }
}

TEST_CASE("contraction profile") {
  auto b = corpus::instance_b().instance();
  std::vector<double> grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 1.0, 1.5707963267948966};
  auto prof = nllt::contraction_profile(b, grid);
  CHECK(prof.block_length == 3);
  CHECK(prof.prefix_count == 2);
  CHECK(prof.points.front().max == 1.0);
  CHECK(prof.points.front().contracting.empty());
  CHECK(prof.points.back().contracting.size() == 2);
  CHECK(std::abs(prof.points.back().contracting_mass - 1.0) < 1e-12);
  REQUIRE(prof.r_best.has_value());
  CHECK(*prof.r_best > 0.0);

  nllt::Matrix flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  nllt::Vector mu(2);
  mu << 0.5, 0.5;
  auto perm = nllt::validate_chain(flip, {"-1", "1"}, mu);
  auto inst = nllt::make_instance(perm, nllt::build_observable(2, {-2.0, 0.0, 0.0, 2.0}, {}, perm));
  CHECK_THROWS_WITH_AS(nllt::contraction_profile(inst, grid), doctest::Contains("PositivityWindowUnavailable"),
                       nllt::Error);
  CHECK_THROWS_WITH_AS(nllt::rho_theta(perm, inst.observable, {0}, 1.0, 3),
                       doctest::Contains("PositivityWindowUnavailable"), nllt::Error);
}

TEST_CASE("decay scan on exact laws") {
  auto a = corpus::instance_a().instance();
  std::vector<double> thetas{0.05, 0.1, 0.5, 1.0};
  std::vector<std::size_t> ns{2, 4, 6, 8};
  auto scan = nllt::cf_decay_scan(a, thetas, ns);
  for (std::size_t n = 0; n < ns.size(); ++n) {
    for (std::size_t t = 0; t < thetas.size(); ++t) {
      CHECK(std::abs(-std::log(scan.abs_phi[n][t]) - coin_decay(ns[n], thetas[t])) < 1e-9);
    }
  }
  REQUIRE(scan.q_fits.size() == 2);
  const double expected_q = abs_ln_cos(1.0) + 0.5 * abs_ln_cos(2.0);
  CHECK(std::abs(scan.q_fits[1].q - expected_q) < 1e-9);
  CHECK(scan.q_fits[1].residual < 1e-9);
  REQUIRE(scan.r_fit.has_value());
  CHECK(std::abs(*scan.r_fit - 1.5) < 0.01);

  auto z = corpus::zero().instance();
  auto zs = nllt::cf_decay_scan(z, {0.5, 1.0}, {2, 3, 4});
  REQUIRE(zs.q_fits.size() == 2);
  for (const auto& f : zs.q_fits) CHECK(f.q == 0.0);

  nllt::CfRequest mc{nllt::CfMode::MonteCarlo, 400, 2, 1};
  auto ms = nllt::cf_decay_scan(a, {1.0}, {40, 80}, mc);
  CHECK(std::abs(ms.noise_floor - 0.15) < 1e-12);
  std::size_t usable = 0;
  for (std::size_t n = 0; n < 2; ++n) {
    CHECK(ms.below_noise_floor[n][0] == (ms.abs_phi[n][0] < ms.noise_floor));
    if (!ms.below_noise_floor[n][0]) ++usable;
  }
  CHECK(ms.below_noise_floor[0][0]);
  CHECK(ms.q_fits.size() == (usable >= 2 ? 1u : 0u));
  CHECK_THROWS_AS(nllt::cf_decay_scan(a, {1.0}, {}), nllt::Error);
}
