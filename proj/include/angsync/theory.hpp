#pragma once

// Closed-form predictors: random-matrix eigenvalue laws for the complete
// and small-world models, recovery thresholds, and the entropy / mutual
// information / Fano quantities for L-level discretized offsets.
//
// Every function is total on its documented domain and returns finite
// values; degenerate regimes are reported through Regime flags.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "angsync/core.hpp"

namespace angsync::theory {

enum class Regime {
  Normal,
  BelowThreshold,  // spike does not separate from the semicircle bulk
  NearExact,       // p -> 1; the outlier-eigenvalue formula diverges
  Vacuous,         // bound carries no information (e.g. threshold > 1)
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Normal: return "normal";
    case Regime::BelowThreshold: return "below_threshold";
    case Regime::NearExact: return "near_exact";
    case Regime::Vacuous: return "vacuous";
  }
  return "?";
}

struct TheoryPrediction {
  std::string name;
  double value = 0.0;
  std::optional<double> aux;
  Regime regime = Regime::Normal;
};

namespace detail {

inline void require_n(double n) {
  if (!(n >= 1.0)) throw Error(ErrorCode::InvalidInput, "theory: n must be >= 1");
}
inline void require_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidInput, "theory: p must lie in [0, 1]");
}
inline void require_L(double L) {
  if (!(L >= 2.0)) throw Error(ErrorCode::InvalidInput, "theory: L must be >= 2");
}

/// -x log2 x with the 0 log 0 = 0 convention.
inline double neg_xlog2x(double x) { return x > 0.0 ? -x * std::log2(x) : 0.0; }

}  // namespace detail

/// Right edge of the semicircle for the complete model noise, 2 sqrt(n (1 - p^2)).
inline double wigner_edge(double n, double p) {
  detail::require_n(n);
  detail::require_p(p);
  return 2.0 * std::sqrt(n * (1.0 - p * p));
}

struct Lambda1Law {
  double mu = 0.0;
  std::optional<double> sigma;
  Regime regime = Regime::Normal;
};

/// Distribution of the top eigenvalue of H (diagonal p) in the complete
/// model. Above the spike condition n p > sqrt(n (1 - p^2)) it is normal with
///   mu      = n p / sqrt(1 - p^2) + sqrt(1 - p^2) / p
///   sigma^2 = ((n + 1) p^2 - 1) / (n p^2) * (1 - p^2);
/// below it the top eigenvalue sticks to the bulk edge.
inline Lambda1Law lambda1_law(double n, double p) {
  detail::require_n(n);
  detail::require_p(p);
  const double q = 1.0 - p * p;
  if (q <= 1e-12) {
    // All edges good: H = n z z*, top eigenvalue exactly n.
    return {n, 0.0, Regime::NearExact};
  }
  if (!(n * p > std::sqrt(n * q))) return {wigner_edge(n, p), std::nullopt, Regime::BelowThreshold};
  const double mu = n * p / std::sqrt(q) + std::sqrt(q) / p;
  const double var = ((n + 1.0) * p * p - 1.0) / (n * p * p) * q;
  return {mu, std::sqrt(std::max(0.0, var)), Regime::Normal};
}

/// Complete-model recovery threshold 1/sqrt(n).
inline double p_threshold_complete(double n) {
  detail::require_n(n);
  return 1.0 / std::sqrt(n);
}

/// Leading-order squared-correlation law, (1 + 1/(n p^2))^(-1/2).
inline double correlation_prediction(double n, double p) {
  detail::require_n(n);
  detail::require_p(p);
  const double snr = n * p * p;
  if (snr <= 0.0) return 0.0;
  return 1.0 / std::sqrt(1.0 + 1.0 / snr);
}

/// Same law with the small-world signal parameter 2 m p^2 / n.
inline double correlation_prediction_sparse(double n, double m, double p) {
  detail::require_n(n);
  detail::require_p(p);
  const double snr = 2.0 * m * p * p / n;
  if (snr <= 0.0) return 0.0;
  return 1.0 / std::sqrt(1.0 + 1.0 / snr);
}

/// Spectral norm of the sparse outlier matrix, 2 sqrt(2 m_bad / n).
inline double lambda1_sparse_bad(double n, double m_bad) {
  detail::require_n(n);
  if (!(m_bad >= 0.0)) throw Error(ErrorCode::InvalidInput, "theory: m_bad must be >= 0");
  return 2.0 * std::sqrt(2.0 * m_bad / n);
}

/// Spectral gap of the good small-world graph on S^2, 4 m^2 p / n^3.
inline double small_world_gap(double n, double m, double p) {
  detail::require_n(n);
  detail::require_p(p);
  return 4.0 * m * m * p / (n * n * n);
}

struct Flagged {
  double value = 0.0;
  Regime regime = Regime::Normal;
};

/// Pessimistic small-world threshold sqrt(n^5 / (8 m^3)); flagged Vacuous
/// above 1.
inline Flagged small_world_threshold(double n, double m) {
  detail::require_n(n);
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidInput, "theory: m must be > 0");
  const double v = std::sqrt(std::pow(n, 5.0) / (8.0 * m * m * m));
  return {v, v > 1.0 ? Regime::Vacuous : Regime::Normal};
}

/// Entropy in bits of one L-level offset given the two angles it relates.
inline double entropy_HLp(double L, double p) {
  detail::require_L(L);
  detail::require_p(p);
  const double off = (1.0 - p) / L;
  return (L - 1.0) * detail::neg_xlog2x(off) + detail::neg_xlog2x(p + off);
}

/// Mutual information in bits, log2 L - H(L, p).
inline double mutual_info_ILp(double L, double p) {
  return std::max(0.0, std::log2(L) - entropy_HLp(L, p));
}

/// Leading small-p term of mutual_info_ILp, in bits: (L - 1) p^2 / (2 ln 2).
/// The same expansion measured in nats is (L - 1) p^2 / 2.
inline double mutual_info_taylor(double L, double p) {
  detail::require_L(L);
  detail::require_p(p);
  return 0.5 * (L - 1.0) * p * p / std::numbers::ln2;
}

/// Weak (Fano) lower bound on the probability of decoding all n angles wrong,
/// max(0, 1 - (m/n) I(L,p)/log2 L - 1/(n log2 L)).
inline double fano_error_bound(double n, double m, double L, double p) {
  detail::require_n(n);
  detail::require_L(L);
  const double lg = std::log2(L);
  return std::max(0.0, 1.0 - (m / n) * mutual_info_ILp(L, p) / lg - 1.0 / (n * lg));
}

/// Information-theoretic threshold sqrt((n/m) 2 log2 L / (L - 1)).
inline double p_threshold_info(double n, double m, double L) {
  detail::require_n(n);
  detail::require_L(L);
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidInput, "theory: m must be > 0");
  return std::sqrt((n / m) * 2.0 * std::log2(L) / (L - 1.0));
}

/// Individual-angle threshold sqrt((n/m) log2 L / (L - 1)).
inline double p_threshold_individual(double n, double m, double L) {
  detail::require_n(n);
  detail::require_L(L);
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidInput, "theory: m must be > 0");
  return std::sqrt((n / m) * std::log2(L) / (L - 1.0));
}

/// Asymptotic ratio of the eigenvector threshold to the individual-angle
/// threshold on the complete graph, sqrt((L - 1) / (2 log2 L)).
inline double threshold_ratio(double L) {
  detail::require_L(L);
  return std::sqrt((L - 1.0) / (2.0 * std::log2(L)));
}

/// Every named prediction for (n, m, L, p), in a fixed order.
inline std::vector<TheoryPrediction> all_predictions(double n, double m, double L, double p) {
  detail::require_n(n);
  detail::require_L(L);
  detail::require_p(p);
  std::vector<TheoryPrediction> out;
  out.push_back({"wigner_edge", wigner_edge(n, p), std::nullopt, Regime::Normal});
  const auto law = lambda1_law(n, p);
  out.push_back({"lambda1_mu", law.mu, law.sigma, law.regime});
  out.push_back({"p_threshold_complete", p_threshold_complete(n), std::nullopt, Regime::Normal});
  out.push_back({"correlation_prediction", correlation_prediction(n, p), n * p * p, Regime::Normal});
  out.push_back({"correlation_prediction_sparse", correlation_prediction_sparse(n, m, p), 2.0 * m * p * p / n,
                 Regime::Normal});
  const double m_bad = (1.0 - p) * m;
  out.push_back({"lambda1_sparse_bad", lambda1_sparse_bad(n, m_bad), m_bad, Regime::Normal});
  out.push_back({"small_world_gap", small_world_gap(n, m, p), std::nullopt, Regime::Normal});
  if (m > 0.0) {
    const auto sw = small_world_threshold(n, m);
    out.push_back({"small_world_threshold", sw.value, std::nullopt, sw.regime});
  }
  out.push_back({"entropy_HLp", entropy_HLp(L, p), std::log2(L), Regime::Normal});
  out.push_back({"mutual_info_ILp", mutual_info_ILp(L, p), mutual_info_taylor(L, p), Regime::Normal});
  out.push_back({"fano_error_bound", fano_error_bound(n, m, L, p), std::nullopt, Regime::Normal});
  if (m > 0.0) {
    out.push_back({"p_threshold_info", p_threshold_info(n, m, L), std::nullopt, Regime::Normal});
    out.push_back({"p_threshold_individual", p_threshold_individual(n, m, L), std::nullopt, Regime::Normal});
  }
  out.push_back({"threshold_ratio", threshold_ratio(L), std::nullopt, Regime::Normal});
  return out;
}

}  // namespace angsync::theory
