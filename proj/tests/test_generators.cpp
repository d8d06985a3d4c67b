#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "angsync/eig.hpp"
#include "angsync/generators.hpp"
#include "support.hpp"

using namespace angsync;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool same_instance(const Instance& a, const Instance& b) {
  if (a.graph.n() != b.graph.n() || a.graph.m() != b.graph.m()) return false;
  for (std::size_t k = 0; k < a.graph.m(); ++k) {
    const auto &x = a.graph.edge(k), &y = b.graph.edge(k);
    if (x.i != y.i || x.j != y.j || x.delta != y.delta) return false;
  }
  return a.truth.theta == b.truth.theta && a.truth.good_mask == b.truth.good_mask;
}

}  // namespace

TEST_CASE("complete model with p = 1 is all good", "[generators]") {
  auto inst = gen_complete({5, 1.0, 77});
  CHECK(inst.graph.m() == 10);
  CHECK(inst.truth.m_bad() == 0);
  CHECK(sce(inst.truth.theta, inst.graph, 1e-9) == 0);
  CHECK_NOTHROW(validate_truth(inst.graph, inst.truth));
}

TEST_CASE("complete model good count is binomial", "[generators]") {
  const double pairs = 400.0 * 399.0 / 2.0, p = 0.1;
  const double sd = std::sqrt(pairs * p * (1 - p));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto inst = gen_complete({400, p, seed});
    CHECK(inst.graph.m() == 79800);
    CHECK(std::abs(static_cast<double>(inst.truth.m_good()) - pairs * p) < 4 * sd);
    CHECK_NOTHROW(validate_truth(inst.graph, inst.truth));
  }
}

TEST_CASE("complete model with p = 0 is all bad", "[generators]") {
  auto inst = gen_complete({400, 0.0, 5});
  CHECK(inst.truth.m_good() == 0);
}

TEST_CASE("complete model rejects bad parameters", "[generators]") {
  CHECK_THROWS_AS(gen_complete({1, 0.5, 0}), Error);
  CHECK_THROWS_AS(gen_complete({10, 1.5, 0}), Error);
  CHECK_THROWS_AS(gen_complete({10, -0.1, 0}), Error);
}

TEST_CASE("generators are reproducible from the seed", "[generators]") {
  CHECK(same_instance(gen_complete({50, 0.3, 9}), gen_complete({50, 0.3, 9})));
  CHECK_FALSE(same_instance(gen_complete({50, 0.3, 9}), gen_complete({50, 0.3, 10})));
  CHECK(same_instance(gen_small_world({120, 0.3, 0.6, 4}), gen_small_world({120, 0.3, 0.6, 4})));
  CHECK_FALSE(same_instance(gen_small_world({120, 0.3, 0.6, 4}), gen_small_world({120, 0.3, 0.6, 5})));
  ClockModelParams cp;
  cp.n = 40;
  cp.seed = 3;
  cp.outlier_fraction = 0.2;
  const auto c1 = gen_clock(cp), c2 = gen_clock(cp);
  CHECK(same_instance(c1.instance, c2.instance));
  CHECK(c1.times == c2.times);
}

TEST_CASE("small-world edge counts", "[generators]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto inst = gen_small_world({400, 0.2, 1.0, seed});
    CHECK_THAT(static_cast<double>(inst.graph.m()), WithinRel(8000.0, 0.10));
    CHECK(inst.truth.m_bad() == 0);
    CHECK_NOTHROW(validate_truth(inst.graph, inst.truth));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = gen_small_world({100, 0.3, 1.0, seed});
    CHECK_THAT(static_cast<double>(inst.graph.m()), WithinRel(750.0, 0.15));
  }
}

TEST_CASE("small-world degree matches the spherical cap", "[generators]") {
  // An edge exists when <b_i, b_j> > 1 - eps, i.e. inside a cap of relative
  // area eps / 2, so 4m/n^2 = (1 - cos eta) (n - 1)/n with 1 - cos eta = eps.
  for (double eps : {0.1, 0.2, 0.3}) {
    const std::size_t n = 400;
    double m = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) m += static_cast<double>(gen_small_world({n, eps, 1.0, seed}).graph.m());
    m /= 3.0;
    const double nn = static_cast<double>(n);
    CHECK_THAT(4.0 * m / (nn * nn), WithinRel(eps * (nn - 1.0) / nn, 0.10));
  }
}

TEST_CASE("small-world rewiring keeps m and makes every edge bad at p = 0", "[generators]") {
  auto base = gen_small_world({50, 0.3, 1.0, 12});
  auto rewired = gen_small_world({50, 0.3, 0.0, 12});
  CHECK(rewired.graph.m() == base.graph.m());
  CHECK(rewired.truth.m_good() == 0);
  const auto m = rewired.graph.m();
  const auto violated = sce(rewired.truth.theta, rewired.graph, 1e-6);
  CHECK(violated <= m);
  CHECK(violated + 2 >= m);

  auto half = gen_small_world({200, 0.3, 0.5, 3});
  CHECK(half.graph.m() == gen_small_world({200, 0.3, 1.0, 3}).graph.m());
  CHECK_NOTHROW(validate_truth(half.graph, half.truth));
}

TEST_CASE("small-world rejects bad parameters", "[generators]") {
  CHECK_THROWS_AS(gen_small_world({100, 0.0, 0.5, 0}), Error);
  CHECK_THROWS_AS(gen_small_world({100, 2.0, 0.5, 0}), Error);
  CHECK_THROWS_AS(gen_small_world({100, 0.3, 1.1, 0}), Error);
}

TEST_CASE("sparse small-world graphs report disconnection", "[generators]") {
  auto inst = gen_small_world({60, 0.01, 1.0, 1});
  CHECK_FALSE(inst.connected);
  CHECK(inst.connected == is_connected(inst.graph));
}

TEST_CASE("noiseless clock model is recovered exactly", "[generators][clock]") {
  ClockModelParams cp;
  cp.n = 60;
  cp.sigma_good = 0.0;
  cp.outlier_fraction = 0.0;
  cp.omega = 0.3;
  cp.seed = 21;
  const auto ci = gen_clock(cp);
  CHECK_NOTHROW(validate_truth(ci.instance.graph, ci.instance.truth, 1e-9));
  const auto est = estimate_eig(ci.instance.graph);
  CHECK_THAT(rho1(est.theta_hat, ci.instance.truth.theta), WithinAbs(1.0, 1e-6));
  for (std::size_t i = 0; i < cp.n; ++i) {
    CHECK_THAT(ci.instance.truth.theta[i], WithinAbs(wrap_angle(cp.omega * ci.times[i]), 1e-12));
  }
}

TEST_CASE("all-outlier clock model is at chance level", "[generators][clock]") {
  const std::size_t n = 100;
  std::vector<double> r;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ClockModelParams cp;
    cp.n = n;
    cp.sigma_good = 1.0;
    cp.omega = ClockModelParams::default_omega(1.0);
    cp.outlier_fraction = 1.0;
    cp.outlier_scale = 1000.0;
    cp.seed = seed;
    const auto ci = gen_clock(cp);
    CHECK(ci.instance.truth.m_good() == 0);
    r.push_back(rho1(estimate_eig(ci.instance.graph).theta_hat, ci.instance.truth.theta));
  }
  // Modulus of the mean of n independent uniform phasors: sqrt(pi / (4 n)).
  const double chance = std::sqrt(std::numbers::pi / (4.0 * n));
  const double m = testing_support::mean(r);
  CHECK(m > 0.5 / std::sqrt(static_cast<double>(n)));
  CHECK(m < 2.0 / std::sqrt(static_cast<double>(n)));
  CHECK_THAT(m, WithinAbs(chance, 0.05));
}

TEST_CASE("clock phase error on good edges", "[generators][clock]") {
  // sigma = Delta and omega = 0.5 / Delta: the phase error omega * eps is
  // N(0, 1/4), so E|e^{i omega eps} - 1| = E 2|sin(X/2)|, X ~ N(0, 1/4).
  const double delta = 2.0;
  ClockModelParams cp;
  cp.n = 120;
  cp.sigma_good = delta;
  cp.omega = 0.5 / delta;
  cp.outlier_fraction = 0.0;
  cp.seed = 8;
  const auto ci = gen_clock(cp);
  const auto& g = ci.instance.graph;
  double total = 0.0;
  for (const auto& e : g.edges()) {
    const double err = circdist(e.delta, cp.omega * (ci.times[e.i] - ci.times[e.j]));
    total += std::abs(phasor(err) - Complex(1.0, 0.0));
  }
  const double mean_err = total / static_cast<double>(g.m());

  const double s = 0.5;
  const double oracle = testing_support::simpson(
      [&](double x) {
        return 2.0 * std::abs(std::sin(x / 2.0)) * std::exp(-x * x / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
      },
      -10 * s, 10 * s);
  CHECK(mean_err < 0.6);
  CHECK_THAT(mean_err, WithinAbs(oracle, 0.02));
}

TEST_CASE("clock model rejects bad parameters", "[generators][clock]") {
  ClockModelParams cp;
  cp.omega = 0.0;
  CHECK_THROWS_AS(gen_clock(cp), Error);
  cp.omega = 1.0;
  cp.outlier_fraction = 2.0;
  CHECK_THROWS_AS(gen_clock(cp), Error);
}
