#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "angsync/baselines.hpp"
#include "angsync/eig.hpp"
#include "angsync/generators.hpp"
#include "support.hpp"

using namespace angsync;
using Catch::Matchers::WithinAbs;
using std::numbers::pi;

namespace {

/// Planted angles on a complete graph with small Gaussian offset noise.
Instance noisy_complete(std::size_t n, double sigma, std::uint64_t seed) {
  Rng rng(seed, Stream::Sampling);
  std::vector<double> theta(n);
  for (auto& t : theta) t = rng.uniform_angle();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, theta[i] - theta[j] + sigma * rng.normal()});
  }
  std::vector<bool> good(edges.size(), true);
  return Instance{OffsetGraph(n, std::move(edges)), GroundTruth{theta, good}, true};
}

double mean_rho(const std::vector<double>& v) { return testing_support::mean(v); }

}  // namespace

TEST_CASE("least squares is exact on consistent data", "[lsqr]") {
  const auto complete = gen_complete({50, 1.0, 1});
  const auto est = estimate_lsqr(complete.graph);
  CHECK(est.method_tag == Method::Lsqr);
  CHECK(est.converged);
  CHECK_THAT(rho1(est.theta_hat, complete.truth.theta), WithinAbs(1.0, 1e-6));
  CHECK_THAT(est.eigvec.norm(), WithinAbs(1.0, 1e-12));

  const auto sw = gen_small_world({200, 0.3, 1.0, 4});
  REQUIRE(sw.connected);
  CHECK_THAT(rho1(estimate_lsqr(sw.graph).theta_hat, sw.truth.theta), WithinAbs(1.0, 1e-6));
}

TEST_CASE("least squares matches a dense solve of the anchored system", "[lsqr][oracle]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = gen_complete({12, 0.5, seed});
    const std::size_t n = 12, m = inst.graph.m();
    // Rows z_i - e^{i delta_ij} z_j = 0 with z_0 = 1 moved to the right side.
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n - 1));
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = inst.graph.edge(k);
      const auto row = static_cast<Eigen::Index>(k);
      const Complex w = phasor(e.delta);
      if (e.i == 0) {
        rhs[row] -= 1.0;
      } else {
        A(row, static_cast<Eigen::Index>(e.i - 1)) += 1.0;
      }
      if (e.j == 0) {
        rhs[row] += w;
      } else {
        A(row, static_cast<Eigen::Index>(e.j - 1)) -= w;
      }
    }
    const Eigen::VectorXcd zf = A.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXcd z(static_cast<Eigen::Index>(n));
    z[0] = 1.0;
    z.tail(static_cast<Eigen::Index>(n - 1)) = zf;
    z /= z.norm();

    LsqrOptions opts;
    opts.tol = 1e-13;
    const auto est = estimate_lsqr(inst.graph, opts);
    const Complex align = est.eigvec[0] / std::abs(est.eigvec[0]) * std::conj(z[0] / std::abs(z[0]));
    CHECK((est.eigvec - align * z).norm() < 1e-9);
  }
}

TEST_CASE("least squares anchors each component", "[lsqr]") {
  // Two planted components; each is recovered up to its own phase.
  const std::vector<double> theta{0.1, 0.9, 2.0, 3.3, 4.4, 5.0};
  std::vector<Edge> edges;
  for (std::size_t i : {0u, 1u, 2u}) {
    for (std::size_t j = i + 1; j < 3; ++j) edges.push_back({i, j, theta[i] - theta[j]});
  }
  for (std::size_t i : {3u, 4u, 5u}) {
    for (std::size_t j = i + 1; j < 6; ++j) edges.push_back({i, j, theta[i] - theta[j]});
  }
  const OffsetGraph g(6, edges);
  const auto est = estimate_lsqr(g);
  CHECK(est.components == 2);
  CHECK(circdist(est.theta_hat[0], 0.0) < 1e-12);
  CHECK(circdist(est.theta_hat[3], 0.0) < 1e-12);
  for (std::size_t k = 0; k < 6; ++k) {
    const std::size_t anchor = k < 3 ? 0 : 3;
    CHECK(circdist(est.theta_hat[k] - est.theta_hat[anchor], theta[k] - theta[anchor]) < 1e-8);
  }
}

TEST_CASE("sdp_objective examples", "[sdp]") {
  const auto good = gen_complete({30, 1.0, 3});
  CHECK_THAT(sdp_objective(good.graph, good.truth.theta), WithinAbs(2.0 * static_cast<double>(good.graph.m()), 1e-9));
  const OffsetGraph one(2, {{0, 1, pi}});
  CHECK_THAT(sdp_objective(one, std::vector<double>{0.0, 0.0}), WithinAbs(-2.0, 1e-15));
  CHECK_THROWS_AS(sdp_objective(one, std::vector<double>{0.0}), Error);

  // Random angles on an all-bad complete graph: a planar random walk of
  // about n^2/2 unit steps, so the value is O(n), far below n^2.
  std::vector<double> mags;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto bad = gen_complete({100, 0.0, seed});
    Rng rng(seed, Stream::Sampling);
    std::vector<double> theta(100);
    for (auto& t : theta) t = rng.uniform_angle();
    mags.push_back(std::abs(sdp_objective(bad.graph, theta)));
  }
  const double m = mean_rho(mags);
  CHECK(m < 3.0 * 100);
  CHECK(m < 0.05 * 100 * 100);
}

TEST_CASE("sdp recovers exact data at rank one", "[sdp]") {
  for (const auto& inst : {gen_complete({40, 1.0, 2}), gen_small_world({200, 0.3, 1.0, 5})}) {
    const auto res = estimate_sdp(inst.graph);
    CHECK(res.estimate.method_tag == Method::Sdp);
    CHECK_THAT(rho1(res.estimate.theta_hat, inst.truth.theta), WithinAbs(1.0, 1e-6));
    CHECK(res.theta_rank == 1);
    CHECK_THAT(res.objective, WithinAbs(2.0 * static_cast<double>(inst.graph.m()), 1e-6 * inst.graph.m()));
    // Both methods agree on exact data.
    CHECK_THAT(rho1(estimate_eig(inst.graph).theta_hat, inst.truth.theta), WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("sdp ascent is monotone and feasible", "[sdp]") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = gen_small_world({150, 0.3, 0.5, seed});
    SdpOptions opts;
    opts.seed = seed;
    opts.record_history = true;
    const auto res = estimate_sdp(inst.graph, opts);
    REQUIRE(res.objective_history.size() > 2);
    for (std::size_t k = 1; k < res.objective_history.size(); ++k) {
      CHECK(res.objective_history[k] >= res.objective_history[k - 1]);
    }
    CHECK(res.max_row_norm_deviation <= 1e-12);
    CHECK(res.estimate.converged);
    // Relaxation dominance.
    CHECK(res.objective >= sdp_objective(inst.graph, res.estimate.theta_hat) - 1e-9 * res.objective);
    CHECK_THAT(res.estimate.eigvec.norm(), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("sdp rank and options", "[sdp]") {
  CHECK(default_sdp_rank(200) == 20);
  CHECK(default_sdp_rank(4) == 3);
  CHECK(default_sdp_rank(2) == 2);
  const auto inst = gen_complete({10, 0.5, 1});
  SdpOptions bad;
  bad.rank = 11;
  CHECK_THROWS_AS(estimate_sdp(inst.graph, bad), Error);
  SdpOptions one;
  one.rank = 1;
  const auto res = estimate_sdp(inst.graph, one);
  CHECK(res.theta_rank == 1);
  CHECK(res.singular_values.size() == 1);
}

TEST_CASE("sdp matches an exhaustive grid search on a small instance", "[sdp][oracle]") {
  const std::size_t n = 5, L = 64;
  const auto inst = noisy_complete(n, 0.3, 17);
  const auto& g = inst.graph;

  // Fix theta_0 = 0 (global phase) and search the other angles on the grid.
  double best = -1e300;
  std::vector<double> theta(n, 0.0);
  const double step = 2 * pi / static_cast<double>(L);
  std::vector<std::size_t> idx(n - 1, 0);
  for (;;) {
    for (std::size_t k = 1; k < n; ++k) theta[k] = step * static_cast<double>(idx[k - 1]);
    best = std::max(best, sdp_objective(g, theta));
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == L) idx[d++] = 0;
    if (d == idx.size()) break;
  }

  SdpOptions opts;
  opts.rank = n;
  const auto res = estimate_sdp(g, opts);
  // Rounding each free angle to the grid moves every edge argument by at most
  // one grid step, and |d/dx 2 cos x| <= 2.
  const double deficit = 2.0 * step * static_cast<double>(g.m());
  REQUIRE(res.theta_rank == 1);  // tight relaxation on this instance
  CHECK(res.objective >= best - 1e-9);
  CHECK(res.objective - best <= deficit);
  // The rounded SDP solution is feasible, so the grid can't beat it by more than the deficit either.
  CHECK(sdp_objective(g, res.estimate.theta_hat) >= best - 1e-9);
}

TEST_CASE("least squares on the small-world benchmark", "[lsqr][slow]") {
  std::vector<double> high, low;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto a = gen_small_world({200, 0.3, 0.7, 300 + t});
    high.push_back(rho1(estimate_lsqr(a.graph).theta_hat, a.truth.theta));
    const auto b = gen_small_world({200, 0.3, 0.4, 400 + t});
    low.push_back(rho1(estimate_lsqr(b.graph).theta_hat, b.truth.theta));
  }
  CHECK_THAT(mean_rho(high), WithinAbs(0.79, 0.08));
  CHECK(mean_rho(low) < 0.3);
}

TEST_CASE("sdp on the small-world benchmark", "[sdp][slow]") {
  std::vector<double> high, low;
  std::size_t low_rank = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    SdpOptions opts;
    opts.seed = t;
    const auto a = gen_small_world({200, 0.3, 0.7, 500 + t});
    const auto ra = estimate_sdp(a.graph, opts);
    high.push_back(rho1(ra.estimate.theta_hat, a.truth.theta));
    if (ra.theta_rank <= 3) ++low_rank;
    const auto b = gen_small_world({200, 0.3, 0.4, 600 + t});
    low.push_back(rho1(estimate_sdp(b.graph, opts).estimate.theta_hat, b.truth.theta));
  }
  CHECK_THAT(mean_rho(high), WithinAbs(0.99, 0.03));
  CHECK(low_rank >= 14);
  CHECK_THAT(mean_rho(low), WithinAbs(0.89, 0.08));
}
