#pragma once

// Eigenvector estimator: build H, find its top eigenvector by shifted power
// iteration, round entrywise phases to angles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "angsync/core.hpp"
#include "angsync/rng.hpp"
#include "angsync/sync_matrix.hpp"

namespace angsync {

inline SyncMatrix build_sync_matrix(const OffsetGraph& graph, double diagonal_shift = 0.0) {
  return SyncMatrix(graph, diagonal_shift);
}

struct EigPair {
  double eigval = 0.0;
  ComplexVector eigvec;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||H v - lambda v||
  bool converged = false;
  double shift = 0.0;  // c used internally; H + cI is positive semidefinite
};

/// Seeded random unit start vector.
inline ComplexVector random_unit_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, Stream::Solver);
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double re = rng.normal();
    v[k] = Complex(re, rng.normal());
  }
  v /= v.norm();
  return v;
}

/// Top eigenpair of H by power iteration on H + cI with c = ||H||_inf, which
/// makes the algebraically largest eigenvalue dominant in modulus without
/// changing eigenvectors. Stops once ||Hv - lambda v|| <= tol * |lambda| or
/// after max_iters products; lambda is the Rayleigh quotient at exit.
inline EigPair top_eigpair(const SyncMatrix& H, double tol, std::size_t max_iters, std::uint64_t seed) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "top_eigpair: tol must be > 0");
  if (max_iters < 1) throw Error(ErrorCode::InvalidInput, "top_eigpair: max_iters must be >= 1");
  if (H.n() == 0 || H.is_zero()) throw Error(ErrorCode::ZeroMatrix, "top_eigpair: matrix is zero");

  EigPair out;
  out.shift = H.row_abs_sum_bound();
  ComplexVector v = random_unit_vector(H.n(), seed);
  ComplexVector w;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    H.multiply(v, w);
    const double lambda = v.dot(w).real();  // v is unit norm
    const double res = (w - lambda * v).norm();
    out.eigval = lambda;
    out.residual = res;
    out.iterations = it;
    if (res <= tol * std::abs(lambda)) {
      out.converged = true;
      break;
    }
    if (it == max_iters) break;
    w += out.shift * v;
    const double nrm = w.norm();
    if (nrm == 0.0) break;
    v = w / nrm;
  }
  out.eigvec = std::move(v);
  return out;
}

struct RoundedAngles {
  std::vector<double> theta;
  std::vector<std::size_t> zero_entries;
};

/// Entrywise phases of v mapped to [0, 2*pi). Entries with |v_k| below
/// 1e-14 get angle 0 and are listed in zero_entries.
inline RoundedAngles round_to_angles(const ComplexVector& eigvec) {
  RoundedAngles out;
  out.theta.resize(static_cast<std::size_t>(eigvec.size()));
  for (Eigen::Index k = 0; k < eigvec.size(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (std::abs(eigvec[k]) < 1e-14) {
      out.theta[idx] = 0.0;
      out.zero_entries.push_back(idx);
    } else {
      out.theta[idx] = wrap_angle(std::arg(eigvec[k]));
    }
  }
  return out;
}

struct EigOptions {
  double tol = 1e-10;
  std::size_t max_iters = 0;  // 0 selects 10 n ln n
  double diagonal_shift = 0.0;
  std::uint64_t seed = 0;
};

inline std::size_t default_power_iterations(std::size_t n) {
  const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
  return static_cast<std::size_t>(std::ceil(10.0 * nn * std::log(nn)));
}

inline AngleEstimate estimate_eig(const OffsetGraph& graph, const EigOptions& opts = {}) {
  const auto H = build_sync_matrix(graph, opts.diagonal_shift);
  const std::size_t budget = opts.max_iters ? opts.max_iters : default_power_iterations(graph.n());
  auto pair = top_eigpair(H, opts.tol, budget, opts.seed);
  auto rounded = round_to_angles(pair.eigvec);

  AngleEstimate est;
  est.theta_hat = std::move(rounded.theta);
  est.zero_entries = std::move(rounded.zero_entries);
  est.eigvec = std::move(pair.eigvec);
  est.top_eigval = pair.eigval;
  est.iterations = pair.iterations;
  est.residual = pair.residual;
  est.converged = pair.converged;
  est.power_shift = pair.shift;
  est.method_tag = Method::Eig;
  return est;
}

/// Mean of |exp(i(delta_ij + delta_jk + delta_ki)) - 1| over triangles drawn
/// uniformly at random (with replacement) from all triangles of the graph.
/// Zero when every sampled triangle consists of good edges.
inline double triangle_consistency_score(const OffsetGraph& graph, std::size_t sample_size, std::uint64_t seed) {
  if (sample_size < 1) throw Error(ErrorCode::InvalidInput, "triangle_consistency_score: sample_size must be >= 1");
  const std::size_t n = graph.n();

  // Sorted adjacency with directed offsets delta(a -> b).
  struct Nbr {
    std::size_t v;
    double delta;
  };
  std::vector<std::vector<Nbr>> adj(n);
  for (const auto& e : graph.edges()) {
    adj[e.i].push_back({e.j, e.delta});
    adj[e.j].push_back({e.i, -e.delta});
  }
  for (auto& row : adj) std::sort(row.begin(), row.end(), [](const Nbr& a, const Nbr& b) { return a.v < b.v; });

  // Common-neighbor counts per edge: each triangle is counted once per edge,
  // so sampling an edge in proportion to its count and then a uniform
  // common neighbor samples triangles uniformly.
  const auto edges = graph.edges();
  std::vector<double> cumulative(edges.size());
  double total = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& a = adj[edges[k].i];
    const auto& b = adj[edges[k].j];
    std::size_t x = 0, y = 0, common = 0;
    while (x < a.size() && y < b.size()) {
      if (a[x].v < b[y].v) {
        ++x;
      } else if (b[y].v < a[x].v) {
        ++y;
      } else {
        ++common;
        ++x;
        ++y;
      }
    }
    total += static_cast<double>(common);
    cumulative[k] = total;
  }
  if (total == 0.0) throw Error(ErrorCode::NoTriangles, "graph has no triangles");

  Rng rng(seed, Stream::Sampling);
  double score = 0.0;
  std::vector<std::pair<double, double>> legs;
  for (std::size_t s = 0; s < sample_size; ++s) {
    const double u = rng.uniform() * total;
    const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const auto& e = edges[std::min(k, edges.size() - 1)];
    const auto& a = adj[e.i];
    const auto& b = adj[e.j];
    // Common neighbors k with offsets delta(j -> k) and delta(k -> i) = -delta(i -> k).
    legs.clear();
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
      if (a[x].v < b[y].v) {
        ++x;
      } else if (b[y].v < a[x].v) {
        ++y;
      } else {
        legs.emplace_back(b[y].delta, -a[x].delta);
        ++x;
        ++y;
      }
    }
    const auto& leg = legs[static_cast<std::size_t>(rng.below(legs.size()))];
    const double cycle = e.delta + leg.first + leg.second;
    score += std::abs(phasor(cycle) - Complex(1.0, 0.0));
  }
  return score / static_cast<double>(sample_size);
}

}  // namespace angsync
