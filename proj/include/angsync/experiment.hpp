#pragma once

// Experiment plumbing shared by the CLI and the acceptance suite: model
// selection, solver dispatch, parameter sweeps with derived seeds, and the
// versioned CSV schema.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "angsync/baselines.hpp"
#include "angsync/core.hpp"
#include "angsync/eig.hpp"
#include "angsync/generators.hpp"
#include "angsync/rng.hpp"
#include "angsync/theory.hpp"

namespace angsync {

inline constexpr int kCsvSchemaVersion = 1;

enum class Model { Complete, SmallWorld, Clock };

inline const char* to_string(Model m) {
  switch (m) {
    case Model::Complete: return "complete";
    case Model::SmallWorld: return "smallworld";
    case Model::Clock: return "clock";
  }
  return "?";
}

inline Model parse_model(const std::string& s) {
  if (s == "complete") return Model::Complete;
  if (s == "smallworld") return Model::SmallWorld;
  if (s == "clock") return Model::Clock;
  throw Error(ErrorCode::InvalidInput, "unknown model '" + s + "'");
}

/// Everything needed to draw one instance. Fields a model does not use are
/// ignored; for the clock model p is the good (non-outlier) fraction.
struct ModelSpec {
  Model model = Model::Complete;
  std::size_t n = 100;
  double p = 1.0;
  double epsilon = 0.3;
  std::uint64_t seed = 0;
  double edge_probability = 1.0;
  double sigma_good = 1.0;
  double outlier_scale = 100.0;
  std::optional<double> omega;
};

struct GeneratedInstance {
  Instance instance;
  std::vector<double> times;  // clock model only
  double omega = 0.0;
};

inline GeneratedInstance generate(const ModelSpec& spec) {
  GeneratedInstance out;
  switch (spec.model) {
    case Model::Complete:
      out.instance = gen_complete({spec.n, spec.p, spec.seed});
      break;
    case Model::SmallWorld:
      out.instance = gen_small_world({spec.n, spec.epsilon, spec.p, spec.seed});
      break;
    case Model::Clock: {
      ClockModelParams cp;
      cp.n = spec.n;
      cp.edge_probability = spec.edge_probability;
      cp.sigma_good = spec.sigma_good;
      if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw Error(ErrorCode::InvalidInput, "p must lie in [0, 1]");
      cp.outlier_fraction = 1.0 - spec.p;
      cp.outlier_scale = spec.outlier_scale;
      if (spec.omega) {
        cp.omega = *spec.omega;
      } else {
        if (!(spec.sigma_good > 0.0)) throw Error(ErrorCode::InvalidInput, "clock model: omega required when sigma_good is 0");
        cp.omega = ClockModelParams::default_omega(spec.sigma_good);
      }
      cp.seed = spec.seed;
      auto ci = gen_clock(cp);
      out.instance = std::move(ci.instance);
      out.times = std::move(ci.times);
      out.omega = ci.omega;
      break;
    }
  }
  return out;
}

struct SolveOptions {
  EigOptions eig;
  LsqrOptions lsqr;
  SdpOptions sdp;
};

struct SolveOutcome {
  AngleEstimate estimate;
  double objective = 0.0;              // sdp_objective of the rounded angles
  std::optional<double> relaxation;    // sdp: trace(H Theta) at the solution
  std::optional<std::size_t> theta_rank;
  double wall_ms = 0.0;
};

/// Runs one solver. `seed` replaces the solver seed in opts so that sweeps
/// control randomness in one place.
inline SolveOutcome solve(const OffsetGraph& graph, Method method, SolveOptions opts, std::uint64_t seed) {
  SolveOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  switch (method) {
    case Method::Eig:
      opts.eig.seed = seed;
      out.estimate = estimate_eig(graph, opts.eig);
      break;
    case Method::Lsqr:
      out.estimate = estimate_lsqr(graph, opts.lsqr);
      break;
    case Method::Sdp: {
      opts.sdp.seed = seed;
      auto r = estimate_sdp(graph, opts.sdp);
      out.estimate = std::move(r.estimate);
      out.relaxation = r.objective;
      out.theta_rank = r.theta_rank;
      break;
    }
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  out.objective = sdp_objective(graph, out.estimate.theta_hat);
  return out;
}

/// Theory columns attached to every sweep row.
struct Predictions {
  double signal = 0.0;     // n p^2, or 2 m p^2 / n on sparse graphs
  double corr = 0.0;       // (1 + 1/signal)^(-1/2)
  double lambda1 = 0.0;    // complete model: outlier eigenvalue law, at the solver's diagonal
  double edge = 0.0;       // bulk edge of the noise part
  double threshold = 0.0;  // recovery threshold for p
};

inline Predictions predictions(Model model, std::size_t n, std::size_t m, double p, double diagonal_shift) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  Predictions pr;
  if (model == Model::Complete) {
    pr.signal = nn * p * p;
    pr.corr = theory::correlation_prediction(nn, p);
    const auto law = theory::lambda1_law(nn, p);
    // The law is stated for diagonal p.
    pr.lambda1 = law.mu - p + diagonal_shift;
    pr.edge = theory::wigner_edge(nn, p);
    pr.threshold = theory::p_threshold_complete(nn);
  } else {
    pr.signal = 2.0 * mm * p * p / nn;
    pr.corr = theory::correlation_prediction_sparse(nn, mm, p);
    pr.lambda1 = 2.0 * mm * p / nn + diagonal_shift;  // mean good degree
    pr.edge = theory::lambda1_sparse_bad(nn, (1.0 - p) * mm);
    pr.threshold = mm > 0.0 ? theory::small_world_threshold(nn, mm).value : 0.0;
  }
  return pr;
}

struct RunRecord {
  Model model = Model::Complete;
  std::size_t n = 0;
  std::size_t m = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  Method method = Method::Eig;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double lambda1 = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
  Predictions pred;

  // Not in the CSV.
  std::size_t p_index = 0;
  std::size_t trial = 0;
  bool converged = true;
  std::optional<std::size_t> theta_rank;
};

struct SweepConfig {
  ModelSpec base;  // p and seed are overwritten per run
  std::vector<double> p_grid;
  std::size_t trials = 1;
  std::vector<Method> methods{Method::Eig};
  std::uint64_t master_seed = 0;
  SolveOptions solve;
  std::size_t threads = 0;  // 0 selects hardware concurrency
  bool deterministic = false;
};

/// Seed of trial t at grid point k; a pure function of its arguments.
inline std::uint64_t sweep_seed(std::uint64_t master, std::size_t p_index, std::size_t trial) {
  return derive_seed(master, p_index, trial);
}

/// Runs every (p, trial) pair, each on its own freshly generated instance
/// and with every requested method. Rows come back ordered by
/// (p_index, trial, method) whatever the thread count.
inline std::vector<RunRecord> run_sweep(const SweepConfig& cfg) {
  if (cfg.p_grid.empty()) throw Error(ErrorCode::InvalidInput, "sweep: empty p grid");
  if (cfg.trials == 0) throw Error(ErrorCode::InvalidInput, "sweep: trials must be >= 1");
  if (cfg.methods.empty()) throw Error(ErrorCode::InvalidInput, "sweep: no methods");
  for (double p : cfg.p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidInput, "sweep: p must lie in [0, 1]");
  }

  const std::size_t jobs = cfg.p_grid.size() * cfg.trials;
  const std::size_t per_job = cfg.methods.size();
  std::vector<RunRecord> rows(jobs * per_job);
  std::vector<std::string> failures(jobs);

  auto run_job = [&](std::size_t job) {
    const std::size_t k = job / cfg.trials, t = job % cfg.trials;
    try {
      ModelSpec spec = cfg.base;
      spec.p = cfg.p_grid[k];
      spec.seed = sweep_seed(cfg.master_seed, k, t);
      const auto gen = generate(spec);
      const auto& inst = gen.instance;
      for (std::size_t q = 0; q < per_job; ++q) {
        const Method method = cfg.methods[q];
        const auto res = solve(inst.graph, method, cfg.solve, spec.seed);
        RunRecord& r = rows[job * per_job + q];
        r.model = spec.model;
        r.n = spec.n;
        r.m = inst.graph.m();
        r.p = spec.p;
        r.seed = spec.seed;
        r.method = method;
        r.rho1 = rho1(res.estimate.theta_hat, inst.truth.theta);
        r.rho2 = rho2(res.estimate.eigvec, inst.truth.theta);
        r.lambda1 = res.estimate.top_eigval;
        r.objective = res.objective;
        r.iterations = res.estimate.iterations;
        r.wall_ms = cfg.deterministic ? 0.0 : res.wall_ms;
        const double shift = method == Method::Eig ? cfg.solve.eig.diagonal_shift : 0.0;
        r.pred = predictions(spec.model, spec.n, r.m, spec.p, shift);
        r.p_index = k;
        r.trial = t;
        r.converged = res.estimate.converged;
        r.theta_rank = res.theta_rank;
      }
    } catch (const std::exception& e) {
      failures[job] = e.what();
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t j = 0; j < jobs; ++j) {
    if (!failures[j].empty()) throw Error(ErrorCode::InvalidInput, "sweep run " + std::to_string(j) + ": " + failures[j]);
  }
  return rows;
}

struct AggregateRow {
  Model model = Model::Complete;
  std::size_t n = 0;
  double p = 0.0;
  Method method = Method::Eig;
  std::size_t count = 0;
  double m_mean = 0.0;
  double rho1_mean = 0.0, rho1_std = 0.0;
  double rho2_mean = 0.0, rho2_std = 0.0;
  double lambda1_mean = 0.0, lambda1_std = 0.0;
  double iterations_mean = 0.0;
  double wall_ms_mean = 0.0;
  Predictions pred;  // evaluated at the mean edge count
};

namespace detail {

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  /// Sample standard deviation (n - 1 denominator); 0 for a single value.
  double stddev() const {
    if (count < 2) return 0.0;
    const double c = static_cast<double>(count);
    return std::sqrt(std::max(0.0, (sum_sq - sum * sum / c) / (c - 1.0)));
  }
};

}  // namespace detail

/// Means and standard deviations per (p, method), in first-seen order.
inline std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& rows, double diagonal_shift = 0.0) {
  struct Acc {
    AggregateRow head;
    detail::Moments m, r1, r2, l1, it, ms;
  };
  std::vector<Acc> accs;
  std::map<std::tuple<std::size_t, int>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.p_index, static_cast<int>(r.method));
    auto [it, inserted] = index.try_emplace(key, accs.size());
    if (inserted) {
      accs.emplace_back();
      accs.back().head.model = r.model;
      accs.back().head.n = r.n;
      accs.back().head.p = r.p;
      accs.back().head.method = r.method;
    }
    auto& a = accs[it->second];
    a.m.add(static_cast<double>(r.m));
    a.r1.add(r.rho1);
    a.r2.add(r.rho2);
    a.l1.add(r.lambda1);
    a.it.add(static_cast<double>(r.iterations));
    a.ms.add(r.wall_ms);
  }
  std::vector<AggregateRow> out;
  out.reserve(accs.size());
  for (auto& a : accs) {
    auto row = a.head;
    row.count = a.r1.count;
    row.m_mean = a.m.mean();
    row.rho1_mean = a.r1.mean();
    row.rho1_std = a.r1.stddev();
    row.rho2_mean = a.r2.mean();
    row.rho2_std = a.r2.stddev();
    row.lambda1_mean = a.l1.mean();
    row.lambda1_std = a.l1.stddev();
    row.iterations_mean = a.it.mean();
    row.wall_ms_mean = a.ms.mean();
    const double shift = row.method == Method::Eig ? diagonal_shift : 0.0;
    row.pred = predictions(row.model, row.n, static_cast<std::size_t>(std::llround(row.m_mean)), row.p, shift);
    out.push_back(row);
  }
  return out;
}

namespace detail {

inline void put_pred_header(std::ostream& os) {
  os << ",pred_signal,pred_corr,pred_lambda1,pred_edge,pred_threshold\n";
}

inline void put_pred(std::ostream& os, const Predictions& p) {
  os << ',' << p.signal << ',' << p.corr << ',' << p.lambda1 << ',' << p.edge << ',' << p.threshold << '\n';
}

}  // namespace detail

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "# schema_version=" << kCsvSchemaVersion << '\n';
  os << "model,n,m,p,seed,method,rho1,rho2,lambda1,objective,iterations,wall_ms";
  detail::put_pred_header(os);
  for (const auto& r : rows) {
    os << to_string(r.model) << ',' << r.n << ',' << r.m << ',' << r.p << ',' << r.seed << ',' << to_string(r.method)
       << ',' << r.rho1 << ',' << r.rho2 << ',' << r.lambda1 << ',' << r.objective << ',' << r.iterations << ','
       << r.wall_ms;
    detail::put_pred(os, r.pred);
  }
  os.precision(old);
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "# schema_version=" << kCsvSchemaVersion << '\n';
  os << "model,n,p,method,trials,m_mean,rho1_mean,rho1_std,rho2_mean,rho2_std,lambda1_mean,lambda1_std,"
        "iterations_mean,wall_ms_mean";
  detail::put_pred_header(os);
  for (const auto& r : rows) {
    os << to_string(r.model) << ',' << r.n << ',' << r.p << ',' << to_string(r.method) << ',' << r.count << ','
       << r.m_mean << ',' << r.rho1_mean << ',' << r.rho1_std << ',' << r.rho2_mean << ',' << r.rho2_std << ','
       << r.lambda1_mean << ',' << r.lambda1_std << ',' << r.iterations_mean << ',' << r.wall_ms_mean;
    detail::put_pred(os, r.pred);
  }
  os.precision(old);
}

}  // namespace angsync
