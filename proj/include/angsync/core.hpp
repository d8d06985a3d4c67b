#pragma once

// Domain types shared by every module, plus the metrics that score an
// estimate against ground truth (rho1, rho2) or against the measurements
// alone (self-consistency errors).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace angsync {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorCode {
  InvalidInput,
  ZeroMatrix,
  NoTriangles,
  TooLarge,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NoTriangles: return "NoTriangles";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round back up to exactly 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Shortest distance between two angles on the circle, in [0, pi].
inline double circdist(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

inline Complex phasor(double angle) { return std::polar(1.0, angle); }

// ---------------------------------------------------------------------------
// OffsetGraph
// ---------------------------------------------------------------------------

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double delta = 0.0;  // offset theta_i - theta_j, radians in [0, 2*pi)
};

/// Measurement graph: n vertices and m undirected edges, each carrying the
/// offset from its lower-index endpoint to its higher-index endpoint. The
/// reverse offset is implied by skew symmetry and never stored.
class OffsetGraph {
 public:
  OffsetGraph() = default;

  /// Edges may be given in either orientation; (j, i, d) is stored as
  /// (i, j, -d mod 2*pi). Self-loops, out-of-range indices and repeated
  /// pairs are rejected.
  OffsetGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (auto& e : edges_) {
      if (e.i == e.j) throw Error(ErrorCode::InvalidInput, "self-loop at vertex " + std::to_string(e.i));
      if (e.i >= n_ || e.j >= n_) throw Error(ErrorCode::InvalidInput, "edge endpoint out of range");
      if (!std::isfinite(e.delta)) throw Error(ErrorCode::InvalidInput, "non-finite offset");
      if (e.i > e.j) {
        std::swap(e.i, e.j);
        e.delta = -e.delta;
      }
      e.delta = wrap_angle(e.delta);
      const std::uint64_t key = static_cast<std::uint64_t>(e.i) * n_ + e.j;
      if (!seen.insert(key).second) {
        throw Error(ErrorCode::InvalidInput,
                    "duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
      }
    }
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_[k]; }

  /// Vertex degrees.
  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(n_, 0);
    for (const auto& e : edges_) {
      ++deg[e.i];
      ++deg[e.j];
    }
    return deg;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

/// Planted angles and the good/bad labelling of each edge. Simulator-only.
struct GroundTruth {
  std::vector<double> theta;
  std::vector<bool> good_mask;

  std::size_t m_good() const {
    return static_cast<std::size_t>(std::count(good_mask.begin(), good_mask.end(), true));
  }
  std::size_t m_bad() const { return good_mask.size() - m_good(); }
};

/// Checks the pairing invariants of a GroundTruth against its graph. Good
/// edges must carry the exact planted offset to within `tol`; pass a
/// negative tol to skip that check (noisy models).
inline void validate_truth(const OffsetGraph& graph, const GroundTruth& truth, double tol = 1e-12) {
  if (truth.theta.size() != graph.n()) throw Error(ErrorCode::InvalidInput, "theta length != n");
  if (truth.good_mask.size() != graph.m()) throw Error(ErrorCode::InvalidInput, "good_mask length != m");
  if (tol < 0.0) return;
  for (std::size_t k = 0; k < graph.m(); ++k) {
    if (!truth.good_mask[k]) continue;
    const auto& e = graph.edge(k);
    if (circdist(truth.theta[e.i] - truth.theta[e.j], e.delta) > tol) {
      throw Error(ErrorCode::InvalidInput, "good edge " + std::to_string(k) + " does not match planted offset");
    }
  }
}

/// Union-find connected components. Returns a component label per vertex;
/// labels are dense and ordered by smallest member.
inline std::vector<std::size_t> connected_components(const OffsetGraph& graph) {
  std::vector<std::size_t> parent(graph.n());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : graph.edges()) {
    const auto a = find(e.i), b = find(e.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(graph.n());
  std::vector<std::size_t> root_label(graph.n(), graph.n());
  std::size_t next = 0;
  for (std::size_t v = 0; v < graph.n(); ++v) {
    const auto r = find(v);
    if (root_label[r] == graph.n()) root_label[r] = next++;
    label[v] = root_label[r];
  }
  return label;
}

inline std::size_t component_count(const OffsetGraph& graph) {
  if (graph.n() == 0) return 0;
  const auto labels = connected_components(graph);
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

inline bool is_connected(const OffsetGraph& graph) { return component_count(graph) <= 1; }

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

enum class Method { Eig, Sdp, Lsqr };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Eig: return "eig";
    case Method::Sdp: return "sdp";
    case Method::Lsqr: return "lsqr";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "eig") return Method::Eig;
  if (s == "sdp") return Method::Sdp;
  if (s == "lsqr") return Method::Lsqr;
  throw Error(ErrorCode::InvalidInput, "unknown method '" + s + "'");
}

struct AngleEstimate {
  std::vector<double> theta_hat;
  ComplexVector eigvec;  // unit Euclidean norm
  double top_eigval = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  Method method_tag = Method::Eig;

  // Diagnostics.
  std::vector<std::size_t> zero_entries;  // rounded to angle 0 because |v_k| ~ 0
  double power_shift = 0.0;               // c in the shifted power iteration
  std::size_t components = 1;             // lsqr: independently anchored components
};

struct CorrelationReport {
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::size_t sce = 0;
  double sce_f = 0.0;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Modulus of the mean phasor of per-entry differences theta_hat - theta_true.
inline double rho1(std::span<const double> theta_hat, std::span<const double> theta_true) {
  if (theta_hat.size() != theta_true.size()) throw Error(ErrorCode::InvalidInput, "rho1: length mismatch");
  if (theta_hat.empty()) throw Error(ErrorCode::InvalidInput, "rho1: empty input");
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < theta_hat.size(); ++k) acc += phasor(theta_hat[k] - theta_true[k]);
  return std::abs(acc) / static_cast<double>(theta_hat.size());
}

/// |<z, v>| with z_k = exp(i theta_k) / sqrt(n). v must have unit norm.
inline double rho2(const ComplexVector& eigvec, std::span<const double> theta_true) {
  if (static_cast<std::size_t>(eigvec.size()) != theta_true.size()) {
    throw Error(ErrorCode::InvalidInput, "rho2: length mismatch");
  }
  if (theta_true.empty()) throw Error(ErrorCode::InvalidInput, "rho2: empty input");
  if (std::abs(eigvec.norm() - 1.0) > 1e-8) throw Error(ErrorCode::InvalidInput, "rho2: eigvec is not unit norm");
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < theta_true.size(); ++k) acc += std::conj(phasor(theta_true[k])) * eigvec[static_cast<Eigen::Index>(k)];
  return std::abs(acc) / std::sqrt(static_cast<double>(theta_true.size()));
}

/// Number of edges whose implied offset misses the measured one by more than tol.
inline std::size_t sce(std::span<const double> theta, const OffsetGraph& graph, double tol) {
  if (theta.size() != graph.n()) throw Error(ErrorCode::InvalidInput, "sce: theta length != n");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "sce: tol must be >= 0");
  std::size_t count = 0;
  for (const auto& e : graph.edges()) {
    if (circdist(wrap_angle(theta[e.i] - theta[e.j]), e.delta) > tol) ++count;
  }
  return count;
}

/// Penalty used by sce_f: 0 at zero error, quadratic up to theta0, 1 beyond.
inline double clamped_quadratic_penalty(double error, double theta0) {
  const double r = circdist(error, 0.0) / theta0;
  return std::min(1.0, r * r);
}

inline double sce_f(std::span<const double> theta, const OffsetGraph& graph, double theta0) {
  if (theta.size() != graph.n()) throw Error(ErrorCode::InvalidInput, "sce_f: theta length != n");
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidInput, "sce_f: theta0 must lie in (0, pi)");
  }
  double total = 0.0;
  for (const auto& e : graph.edges()) {
    total += clamped_quadratic_penalty(theta[e.i] - theta[e.j] - e.delta, theta0);
  }
  return total;
}

/// Default discretization allowance 2*pi/L.
inline double default_theta0(std::size_t L) {
  if (L < 3) throw Error(ErrorCode::InvalidInput, "default_theta0: need L >= 3 so that 2*pi/L < pi");
  return kTwoPi / static_cast<double>(L);
}

inline CorrelationReport correlation_report(const AngleEstimate& est, const OffsetGraph& graph,
                                            std::span<const double> theta_true, double sce_tol,
                                            double theta0) {
  CorrelationReport r;
  r.rho1 = rho1(est.theta_hat, theta_true);
  r.rho2 = rho2(est.eigvec, theta_true);
  r.sce = sce(est.theta_hat, graph, sce_tol);
  r.sce_f = sce_f(est.theta_hat, graph, theta0);
  return r;
}

/// Removes the global phase from an estimate by rotating it onto the truth
/// through the mean phasor of differences.
inline std::vector<double> align_global_phase(std::span<const double> theta_hat,
                                              std::span<const double> theta_true) {
  if (theta_hat.size() != theta_true.size()) throw Error(ErrorCode::InvalidInput, "align: length mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < theta_hat.size(); ++k) acc += phasor(theta_true[k] - theta_hat[k]);
  const double shift = std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;
  std::vector<double> out(theta_hat.size());
  for (std::size_t k = 0; k < theta_hat.size(); ++k) out[k] = wrap_angle(theta_hat[k] + shift);
  return out;
}

/// Per-angle circular errors after global alignment. Indices listed in
/// `excluded` (zero-magnitude entries at rounding) are skipped.
inline std::vector<double> aligned_angle_errors(std::span<const double> theta_hat,
                                                std::span<const double> theta_true,
                                                std::span<const std::size_t> excluded = {}) {
  const auto aligned = align_global_phase(theta_hat, theta_true);
  std::vector<bool> skip(theta_hat.size(), false);
  for (auto k : excluded) {
    if (k < skip.size()) skip[k] = true;
  }
  std::vector<double> errs;
  errs.reserve(theta_hat.size());
  for (std::size_t k = 0; k < aligned.size(); ++k) {
    if (!skip[k]) errs.push_back(circdist(aligned[k], theta_true[k]));
  }
  return errs;
}

}  // namespace angsync
