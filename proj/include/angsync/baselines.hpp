#pragma once

// Comparison solvers: anchored least squares on z_i - exp(i delta_ij) z_j = 0,
// and the complex SDP relaxation max trace(H Theta), Theta >= 0, Theta_ii = 1,
// solved through a thin factorization Theta = V V*.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "angsync/core.hpp"
#include "angsync/eig.hpp"
#include "angsync/rng.hpp"
#include "angsync/sync_matrix.hpp"

namespace angsync {

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

struct LsqrOptions {
  double tol = 1e-10;         // relative residual of the normal equations
  std::size_t max_iters = 0;  // 0 selects 10 n
};

/// Minimizes sum over edges |z_i - exp(i delta_ij) z_j|^2 with z fixed to 1
/// at one anchor per connected component (its lowest-index vertex). The
/// normal equations restricted to free vertices are (D - H)_ff z_f = H_fa,
/// solved by conjugate gradients.
inline AngleEstimate estimate_lsqr(const OffsetGraph& graph, const LsqrOptions& opts = {}) {
  const std::size_t n = graph.n();
  if (n == 0) throw Error(ErrorCode::InvalidInput, "estimate_lsqr: empty graph");
  const auto H = build_sync_matrix(graph, 0.0);
  const auto labels = connected_components(graph);
  const std::size_t ncomp = *std::max_element(labels.begin(), labels.end()) + 1;

  std::vector<bool> anchor(n, false);
  {
    std::vector<bool> seen(ncomp, false);
    for (std::size_t v = 0; v < n; ++v) {
      if (!seen[labels[v]]) {
        seen[labels[v]] = true;
        anchor[v] = true;
      }
    }
  }
  const auto deg = graph.degrees();
  const auto N = static_cast<Eigen::Index>(n);

  // b_i = sum over anchor neighbours a of H_ia (times z_a = 1).
  ComplexVector b = ComplexVector::Zero(N);
  for (std::size_t r = 0; r < n; ++r) {
    if (anchor[r]) continue;
    H.for_each_in_row(r, [&](std::size_t c, Complex h) {
      if (anchor[c]) b[static_cast<Eigen::Index>(r)] += h;
    });
  }

  ComplexVector tmp;
  auto apply = [&](const ComplexVector& x, ComplexVector& y) {
    H.multiply(x, tmp);
    y.resize(N);
    for (std::size_t r = 0; r < n; ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      y[i] = anchor[r] ? Complex(0.0, 0.0) : static_cast<double>(deg[r]) * x[i] - tmp[i];
    }
  };

  const std::size_t budget = opts.max_iters ? opts.max_iters : 10 * n;
  ComplexVector x = ComplexVector::Zero(N);
  ComplexVector r = b;
  ComplexVector p = r;
  ComplexVector Ap;
  double rr = r.squaredNorm();
  const double bnorm = std::max(b.norm(), 1e-300);
  std::size_t it = 0;
  bool converged = std::sqrt(rr) <= opts.tol * bnorm;
  while (!converged && it < budget) {
    apply(p, Ap);
    const double pAp = p.dot(Ap).real();
    if (pAp <= 0.0) break;
    const double alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rr_next = r.squaredNorm();
    ++it;
    if (std::sqrt(rr_next) <= opts.tol * bnorm) {
      rr = rr_next;
      converged = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }

  ComplexVector z = x;
  for (std::size_t v = 0; v < n; ++v) {
    if (anchor[v]) z[static_cast<Eigen::Index>(v)] = Complex(1.0, 0.0);
  }
  auto rounded = round_to_angles(z);

  AngleEstimate est;
  est.theta_hat = std::move(rounded.theta);
  est.zero_entries = std::move(rounded.zero_entries);
  est.eigvec = z / z.norm();
  est.top_eigval = est.eigvec.dot(H * est.eigvec).real();
  est.iterations = it;
  est.residual = std::sqrt(rr) / bnorm;
  est.converged = converged;
  est.components = ncomp;
  est.method_tag = Method::Lsqr;
  return est;
}

// ---------------------------------------------------------------------------
// SDP relaxation
// ---------------------------------------------------------------------------

/// Sum over i, j of exp(-i theta_i) H_ij exp(i theta_j), i.e.
/// 2 * sum over edges cos(delta_ij - theta_i + theta_j). No diagonal.
inline double sdp_objective(const OffsetGraph& graph, std::span<const double> theta) {
  if (theta.size() != graph.n()) throw Error(ErrorCode::InvalidInput, "sdp_objective: theta length != n");
  double total = 0.0;
  for (const auto& e : graph.edges()) total += 2.0 * std::cos(e.delta - theta[e.i] + theta[e.j]);
  return total;
}

struct SdpOptions {
  std::size_t rank = 0;  // factor width r; 0 selects max(3, ceil(sqrt(2n)))
  std::size_t max_iters = 20000;
  double step_tolerance = 1e-10;  // stop when ||grad||_F <= step_tolerance * ||H V||_F
  std::uint64_t seed = 0;
  double rank_tolerance = 1e-6;  // relative singular-value cutoff for rank(Theta)
  bool restart = true;           // one perturbed restart, keep the better objective
  bool record_history = false;
};

struct SdpResult {
  AngleEstimate estimate;
  std::size_t theta_rank = 0;
  double objective = 0.0;  // trace(H Theta) at the returned factor
  std::vector<double> singular_values;
  std::vector<double> objective_history;  // accepted iterates, when recorded
  double max_row_norm_deviation = 0.0;     // worst | ||v_i|| - 1 | over all iterates
  std::size_t restarts = 0;
};

inline std::size_t default_sdp_rank(std::size_t n) {
  const auto r = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(n))));
  return std::min(n, std::max<std::size_t>(3, r));
}

namespace detail {

inline void normalize_rows(Eigen::MatrixXcd& V) {
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const double nrm = V.row(i).norm();
    if (nrm > 0.0) {
      V.row(i) /= nrm;
    } else {
      V.row(i).setZero();
      V(i, 0) = 1.0;
    }
  }
}

inline double row_norm_deviation(const Eigen::MatrixXcd& V) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < V.rows(); ++i) worst = std::max(worst, std::abs(V.row(i).norm() - 1.0));
  return worst;
}

/// trace(V* H V) given HV.
inline double factor_objective(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& HV) {
  return (V.adjoint() * HV).trace().real();
}

/// Riemannian gradient on the product of unit spheres (one per row): the
/// Euclidean ascent direction H V with its radial part removed row by row.
inline Eigen::MatrixXcd tangent_gradient(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& HV) {
  Eigen::MatrixXcd G = HV;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const double radial = V.row(i).conjugate().dot(HV.row(i).conjugate()).real();
    G.row(i) -= radial * V.row(i);
  }
  return G;
}

struct AscentState {
  Eigen::MatrixXcd V;
  double objective = 0.0;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Projected gradient ascent with row renormalization. The trial step comes
/// from a Barzilai-Borwein estimate and is halved until the Armijo condition
/// holds, so accepted objectives never decrease.
inline AscentState ascend(const SyncMatrix& H, Eigen::MatrixXcd V, const SdpOptions& opts,
                          std::vector<double>* history, double& worst_row_dev) {
  normalize_rows(V);
  worst_row_dev = std::max(worst_row_dev, row_norm_deviation(V));
  Eigen::MatrixXcd HV = H * V;
  double f = factor_objective(V, HV);
  Eigen::MatrixXcd G = tangent_gradient(V, HV);
  if (history) history->push_back(f);

  const double scale = std::max(1.0, H.row_abs_sum_bound());
  double step = 1.0 / scale;
  Eigen::MatrixXcd V_prev, G_prev;
  AscentState st;
  st.iterations = 0;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    const double gnorm2 = G.squaredNorm();
    st.gradient_norm = std::sqrt(gnorm2);
    if (st.gradient_norm <= opts.step_tolerance * std::max(HV.norm(), 1e-300)) {
      st.converged = true;
      break;
    }
    if (it > 0) {
      const Eigen::MatrixXcd s = V - V_prev;
      const Eigen::MatrixXcd y = G - G_prev;
      const double sy = std::abs((s.adjoint() * y).trace().real());
      const double ss = s.squaredNorm();
      if (sy > 0.0 && ss > 0.0) step = ss / sy;
      step = std::clamp(step, 1e-6 / scale, 1e6 / scale);
    }

    bool accepted = false;
    Eigen::MatrixXcd V_new, HV_new;
    double f_new = f;
    for (int bt = 0; bt < 60; ++bt) {
      V_new = V + step * G;
      normalize_rows(V_new);
      HV_new = H * V_new;
      f_new = factor_objective(V_new, HV_new);
      if (f_new >= f + 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent direction left at working precision.
      st.converged = true;
      break;
    }
    worst_row_dev = std::max(worst_row_dev, row_norm_deviation(V_new));
    V_prev = std::move(V);
    G_prev = std::move(G);
    V = std::move(V_new);
    HV = std::move(HV_new);
    f = f_new;
    G = tangent_gradient(V, HV);
    st.iterations = it + 1;
    if (history) history->push_back(f);
  }
  st.V = std::move(V);
  st.objective = f;
  return st;
}

}  // namespace detail

/// Solves the SDP relaxation through Theta = V V* (V: n x r, unit rows),
/// extracts the top eigenvector of Theta as the top left singular vector of
/// V, and rounds its phases. theta_rank counts singular values of V above
/// rank_tolerance times the largest.
inline SdpResult estimate_sdp(const OffsetGraph& graph, const SdpOptions& opts = {}) {
  const std::size_t n = graph.n();
  if (n == 0) throw Error(ErrorCode::InvalidInput, "estimate_sdp: empty graph");
  const std::size_t r = opts.rank ? opts.rank : default_sdp_rank(n);
  if (r < 1 || r > n) throw Error(ErrorCode::InvalidInput, "estimate_sdp: rank must satisfy 1 <= r <= n");

  const auto H = build_sync_matrix(graph, 0.0);
  const auto N = static_cast<Eigen::Index>(n);
  const auto R = static_cast<Eigen::Index>(r);

  Rng rng(opts.seed, Stream::Solver);
  Eigen::MatrixXcd V0(N, R);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index c = 0; c < R; ++c) {
      const double re = rng.normal();
      V0(i, c) = Complex(re, rng.normal());
    }
  }

  SdpResult out;
  std::vector<double>* hist = opts.record_history ? &out.objective_history : nullptr;
  double worst_dev = 0.0;
  auto best = detail::ascend(H, V0, opts, hist, worst_dev);
  std::size_t total_iters = best.iterations;

  if (opts.restart) {
    // Escape check: perturb the converged factor and ascend again.
    Eigen::MatrixXcd Vp = best.V;
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index c = 0; c < R; ++c) {
        const double re = rng.normal();
        Vp(i, c) += 0.1 * Complex(re, rng.normal());
      }
    }
    std::vector<double> restart_hist;
    auto second = detail::ascend(H, Vp, opts, hist ? &restart_hist : nullptr, worst_dev);
    total_iters += second.iterations;
    ++out.restarts;
    if (second.objective > best.objective) {
      best = std::move(second);
      if (hist) out.objective_history = std::move(restart_hist);
    }
  }
  out.max_row_norm_deviation = worst_dev;

  // Spectrum of Theta = V V* through the r x r Gram matrix V* V.
  const Eigen::MatrixXcd gram = best.V.adjoint() * best.V;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const auto& evals = es.eigenvalues();  // ascending
  out.singular_values.resize(r);
  for (std::size_t k = 0; k < r; ++k) {
    out.singular_values[k] = std::sqrt(std::max(0.0, evals[R - 1 - static_cast<Eigen::Index>(k)]));
  }
  const double smax = out.singular_values.front();
  out.theta_rank = static_cast<std::size_t>(std::count_if(out.singular_values.begin(), out.singular_values.end(),
                                                          [&](double s) { return s > opts.rank_tolerance * smax; }));

  ComplexVector u = best.V * es.eigenvectors().col(R - 1);
  u /= u.norm();
  auto rounded = round_to_angles(u);

  auto& est = out.estimate;
  est.theta_hat = std::move(rounded.theta);
  est.zero_entries = std::move(rounded.zero_entries);
  est.eigvec = std::move(u);
  est.top_eigval = evals[R - 1];
  est.iterations = total_iters;
  est.residual = best.gradient_norm;
  est.converged = best.converged;
  est.method_tag = Method::Sdp;
  out.objective = best.objective;
  return out;
}

}  // namespace angsync
