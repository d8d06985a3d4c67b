#pragma once

// Seeded synthetic instances: the complete-graph outlier model, the
// small-world model on the sphere, and the real-line clock model mapped to
// the circle. All generators are pure functions of their parameters.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "angsync/core.hpp"
#include "angsync/rng.hpp"

namespace angsync {

struct CompleteModelParams {
  std::size_t n = 100;
  double p = 1.0;
  std::uint64_t seed = 0;
};

struct SmallWorldParams {
  std::size_t n = 100;
  double epsilon = 0.3;
  double p = 1.0;
  std::uint64_t seed = 0;
};

struct ClockModelParams {
  std::size_t n = 100;
  double edge_probability = 1.0;
  double sigma_good = 1.0;  // seconds
  double outlier_fraction = 0.0;
  double outlier_scale = 100.0;  // seconds
  double omega = 0.3;            // radians per second
  std::uint64_t seed = 0;
  /// Times are drawn from [0, time_span]; unset means 1000 * sigma_good
  /// (or 1000 / omega when sigma_good is zero).
  std::optional<double> time_span;

  /// Frequency guidance for compactification: well above 1/(10 sigma) and
  /// well below 1/sigma.
  static double default_omega(double sigma_good) { return 0.3 / sigma_good; }
};

struct Instance {
  OffsetGraph graph;
  GroundTruth truth;
  bool connected = true;
};

struct ClockInstance {
  Instance instance;
  std::vector<double> times;
  double omega = 0.0;
};

namespace detail {

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + " must lie in [0, 1]");
  }
}

inline std::vector<double> uniform_angles(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, Stream::Angles);
  std::vector<double> theta(n);
  for (auto& t : theta) t = rng.uniform_angle();
  return theta;
}

inline std::uint64_t pair_key(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return static_cast<std::uint64_t>(i) * n + j;
}

}  // namespace detail

inline void validate(const CompleteModelParams& params) {
  if (params.n < 2) throw Error(ErrorCode::InvalidInput, "complete model needs n >= 2");
  detail::require_probability(params.p, "p");
}

inline void validate(const SmallWorldParams& params) {
  if (params.n < 2) throw Error(ErrorCode::InvalidInput, "small-world model needs n >= 2");
  if (!(params.epsilon > 0.0 && params.epsilon < 2.0)) {
    throw Error(ErrorCode::InvalidInput, "epsilon must lie in (0, 2)");
  }
  detail::require_probability(params.p, "p");
}

inline void validate(const ClockModelParams& params) {
  if (params.n < 2) throw Error(ErrorCode::InvalidInput, "clock model needs n >= 2");
  detail::require_probability(params.edge_probability, "edge_probability");
  detail::require_probability(params.outlier_fraction, "outlier_fraction");
  if (!(params.omega > 0.0)) throw Error(ErrorCode::InvalidInput, "omega must be > 0");
  if (!(params.sigma_good >= 0.0)) throw Error(ErrorCode::InvalidInput, "sigma_good must be >= 0");
  if (!(params.outlier_scale >= 0.0)) throw Error(ErrorCode::InvalidInput, "outlier_scale must be >= 0");
  if (params.time_span && !(*params.time_span > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "time_span must be > 0");
  }
}

/// All C(n,2) pairs measured; each is good with probability p.
inline Instance gen_complete(const CompleteModelParams& params) {
  validate(params);
  const std::size_t n = params.n;
  auto theta = detail::uniform_angles(n, params.seed);
  Rng labels(params.seed, Stream::Graph);
  Rng offsets(params.seed, Stream::Offsets);

  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  std::vector<bool> good;
  good.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool is_good = labels.bernoulli(params.p);
      // Outlier offsets are drawn for every pair so that the labelling and
      // the offset streams stay aligned across p.
      const double outlier = offsets.uniform_angle();
      edges.push_back({i, j, is_good ? wrap_angle(theta[i] - theta[j]) : outlier});
      good.push_back(is_good);
    }
  }
  Instance inst{OffsetGraph(n, std::move(edges)), GroundTruth{std::move(theta), std::move(good)}, true};
  return inst;
}

/// Uniform point on the unit sphere from three normalized Gaussians.
inline std::array<double, 3> sphere_point(Rng& rng) {
  for (;;) {
    std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 0.0) return {v[0] / norm, v[1] / norm, v[2] / norm};
  }
}

/// Neighborhood graph on S^2 (edge iff <beta_i, beta_j> > 1 - epsilon), then
/// every edge is independently replaced with probability 1 - p by a
/// uniformly random unused pair carrying a uniform offset. Kept edges are
/// good; replaced ones are bad. The edge count is preserved.
inline Instance gen_small_world(const SmallWorldParams& params) {
  validate(params);
  const std::size_t n = params.n;
  auto theta = detail::uniform_angles(n, params.seed);

  Rng geometry(params.seed, Stream::Graph);
  std::vector<std::array<double, 3>> points(n);
  for (auto& pt : points) pt = sphere_point(geometry);

  struct Pair {
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  const double threshold = 1.0 - params.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = points[i];
      const auto& b = points[j];
      if (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] > threshold) pairs.push_back({i, j});
    }
  }

  std::unordered_set<std::uint64_t> present;
  present.reserve(pairs.size() * 2);
  for (const auto& pr : pairs) present.insert(detail::pair_key(pr.i, pr.j, n));

  Rng rewiring(params.seed, Stream::Rewiring);
  Rng offsets(params.seed, Stream::Offsets);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  std::vector<bool> good;
  good.reserve(pairs.size());
  for (const auto& pr : pairs) {
    const bool keep = rewiring.bernoulli(params.p);
    if (keep) {
      edges.push_back({pr.i, pr.j, wrap_angle(theta[pr.i] - theta[pr.j])});
      good.push_back(true);
      continue;
    }
    present.erase(detail::pair_key(pr.i, pr.j, n));
    std::size_t a, b;
    do {
      a = static_cast<std::size_t>(rewiring.below(n));
      b = static_cast<std::size_t>(rewiring.below(n));
    } while (a == b || present.count(detail::pair_key(a, b, n)) != 0);
    present.insert(detail::pair_key(a, b, n));
    edges.push_back({std::min(a, b), std::max(a, b), offsets.uniform_angle()});
    good.push_back(false);
  }

  Instance inst{OffsetGraph(n, std::move(edges)), GroundTruth{std::move(theta), std::move(good)}, true};
  inst.connected = is_connected(inst.graph);
  return inst;
}

/// Clock synchronization: times t_i, pairs measured with probability
/// edge_probability, t_ij = t_i - t_j + noise, and delta_ij = omega * t_ij
/// mod 2*pi. An edge is flagged good when its noise is Gaussian (sigma_good)
/// rather than an outlier (uniform on [-outlier_scale, outlier_scale]).
inline ClockInstance gen_clock(const ClockModelParams& params) {
  validate(params);
  const std::size_t n = params.n;
  double span = 0.0;
  if (params.time_span) {
    span = *params.time_span;
  } else if (params.sigma_good > 0.0) {
    span = 1000.0 * params.sigma_good;
  } else {
    span = 1000.0 / params.omega;
  }

  Rng clock(params.seed, Stream::Angles);
  std::vector<double> times(n);
  for (auto& t : times) t = clock.uniform(0.0, span);

  Rng graph_rng(params.seed, Stream::Graph);
  Rng outlier_rng(params.seed, Stream::Rewiring);
  Rng noise(params.seed, Stream::Noise);
  Rng outlier_noise(params.seed, Stream::Offsets);

  std::vector<Edge> edges;
  std::vector<bool> good;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!graph_rng.bernoulli(params.edge_probability)) continue;
      const bool outlier = outlier_rng.bernoulli(params.outlier_fraction);
      const double gauss = noise.normal() * params.sigma_good;
      const double wild = outlier_noise.uniform(-params.outlier_scale, params.outlier_scale);
      const double t_ij = times[i] - times[j] + (outlier ? wild : gauss);
      edges.push_back({i, j, wrap_angle(params.omega * t_ij)});
      good.push_back(!outlier);
    }
  }

  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = wrap_angle(params.omega * times[i]);

  ClockInstance out;
  out.instance.graph = OffsetGraph(n, std::move(edges));
  out.instance.truth = GroundTruth{std::move(theta), std::move(good)};
  out.instance.connected = is_connected(out.instance.graph);
  out.times = std::move(times);
  out.omega = params.omega;
  return out;
}

}  // namespace angsync
