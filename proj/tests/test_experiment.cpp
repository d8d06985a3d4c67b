#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "angsync/experiment.hpp"

using namespace angsync;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.base.model = Model::Complete;
  cfg.base.n = 60;
  cfg.p_grid = {0.2, 0.5};
  cfg.trials = 3;
  cfg.methods = {Method::Eig, Method::Lsqr};
  cfg.master_seed = 42;
  cfg.deterministic = true;
  return cfg;
}

std::string runs_text(const std::vector<RunRecord>& rows) {
  std::ostringstream os;
  write_runs_csv(os, rows);
  return os.str();
}

}  // namespace

TEST_CASE("model names round-trip", "[experiment]") {
  for (auto m : {Model::Complete, Model::SmallWorld, Model::Clock}) CHECK(parse_model(to_string(m)) == m);
  CHECK_THROWS_AS(parse_model("torus"), Error);
}

TEST_CASE("sweeps are reproducible across thread counts", "[experiment]") {
  auto cfg = small_config();
  cfg.threads = 1;
  const auto a = run_sweep(cfg);
  cfg.threads = 4;
  const auto b = run_sweep(cfg);
  REQUIRE(a.size() == 2 * 3 * 2);
  CHECK(runs_text(a) == runs_text(b));
  // Rows are ordered by (p, trial, method).
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].p_index == k / 6);
    CHECK(a[k].trial == (k / 2) % 3);
    CHECK(a[k].method == (k % 2 ? Method::Lsqr : Method::Eig));
    CHECK(a[k].seed == sweep_seed(42, a[k].p_index, a[k].trial));
    CHECK(a[k].wall_ms == 0.0);
  }
  cfg.master_seed = 43;
  CHECK(runs_text(run_sweep(cfg)) != runs_text(a));
}

TEST_CASE("aggregate means match the rows", "[experiment]") {
  const auto rows = run_sweep(small_config());
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 4);
  for (const auto& g : agg) {
    double sum = 0.0, sq = 0.0;
    std::size_t c = 0;
    for (const auto& r : rows) {
      if (r.p == g.p && r.method == g.method) {
        sum += r.rho1;
        sq += r.rho1 * r.rho1;
        ++c;
      }
    }
    REQUIRE(c == 3);
    const double mean = sum / 3.0;
    CHECK(g.count == 3);
    CHECK_THAT(g.rho1_mean, WithinAbs(mean, 1e-14));
    CHECK_THAT(g.rho1_std, WithinAbs(std::sqrt(std::max(0.0, (sq - 3.0 * mean * mean) / 2.0)), 1e-7));
    CHECK_THAT(g.m_mean, WithinAbs(60.0 * 59.0 / 2.0, 1e-12));
  }
}

TEST_CASE("sweep input validation", "[experiment]") {
  auto cfg = small_config();
  cfg.p_grid.clear();
  CHECK_THROWS_AS(run_sweep(cfg), Error);
  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_sweep(cfg), Error);
  cfg = small_config();
  cfg.methods.clear();
  CHECK_THROWS_AS(run_sweep(cfg), Error);
  cfg = small_config();
  cfg.p_grid = {1.5};
  CHECK_THROWS_AS(run_sweep(cfg), Error);
}

TEST_CASE("single point sweep gives one row", "[experiment]") {
  auto cfg = small_config();
  cfg.p_grid = {1.0};
  cfg.trials = 1;
  cfg.methods = {Method::Eig};
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK_THAT(rows[0].rho1, WithinAbs(1.0, 1e-6));
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].rho1_std == 0.0);
}

TEST_CASE("csv output carries the schema line", "[experiment]") {
  const auto rows = run_sweep(small_config());
  const auto text = runs_text(rows);
  CHECK(text.rfind("# schema_version=1\n", 0) == 0);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.find("model,n,m,p,seed,method,rho1") == 0);
  CHECK(line.find("pred_threshold") != std::string::npos);
  std::size_t data = 0;
  while (std::getline(is, line)) ++data;
  CHECK(data == rows.size());

  std::ostringstream agg;
  write_aggregate_csv(agg, aggregate(rows));
  CHECK(agg.str().rfind("# schema_version=1\n", 0) == 0);
}

TEST_CASE("predictions per model", "[experiment]") {
  const auto c = predictions(Model::Complete, 400, 79800, 0.15, 0.15);
  CHECK_THAT(c.signal, WithinAbs(9.0, 1e-12));
  CHECK_THAT(c.lambda1, WithinAbs(67.28, 0.005));
  CHECK_THAT(c.threshold, WithinAbs(0.05, 1e-15));
  const auto s = predictions(Model::SmallWorld, 400, 8000, 0.5, 0.0);
  CHECK_THAT(s.signal, WithinAbs(2.0 * 8000 * 0.25 / 400, 1e-12));
  CHECK_THAT(s.lambda1, WithinAbs(2.0 * 8000 * 0.5 / 400, 1e-12));
}

TEST_CASE("generate and solve dispatch", "[experiment]") {
  ModelSpec spec;
  spec.model = Model::Clock;
  spec.n = 50;
  spec.p = 1.0;
  spec.sigma_good = 0.0;
  spec.seed = 3;
  CHECK_THROWS_AS(generate(spec), Error);  // no default omega without noise
  spec.omega = 0.3;
  const auto gen = generate(spec);
  CHECK(gen.times.size() == 50);
  CHECK(gen.omega == 0.3);
  for (auto m : {Method::Eig, Method::Lsqr, Method::Sdp}) {
    const auto out = solve(gen.instance.graph, m, {}, 1);
    CHECK(out.estimate.method_tag == m);
    CHECK_THAT(rho1(out.estimate.theta_hat, gen.instance.truth.theta), WithinAbs(1.0, 1e-6));
    CHECK(out.theta_rank.has_value() == (m == Method::Sdp));
  }
}
