#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "angsync/core.hpp"
#include "angsync/sync_matrix.hpp"

namespace angsync {

inline constexpr std::size_t kDefaultDenseLimit = 5000;

/// All eigenvalues of H, descending, from a dense Hermitian eigensolver.
inline std::vector<double> full_spectrum(const SyncMatrix& H, std::size_t dense_limit = kDefaultDenseLimit) {
  if (H.n() > dense_limit) {
    throw Error(ErrorCode::TooLarge, "full_spectrum: n = " + std::to_string(H.n()) + " exceeds dense limit " +
                                         std::to_string(dense_limit));
  }
  if (H.n() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.to_dense(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline std::vector<double> top_k_spectrum(const SyncMatrix& H, std::size_t k,
                                          std::size_t dense_limit = kDefaultDenseLimit) {
  if (k > H.n()) throw Error(ErrorCode::InvalidInput, "top_k_spectrum: k exceeds n");
  auto all = full_spectrum(H, dense_limit);
  all.resize(k);
  return all;
}

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins spanning [min, max]; the maximum falls in the last bin.
inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw Error(ErrorCode::InvalidInput, "histogram: empty input");
  if (bins == 0) throw Error(ErrorCode::InvalidInput, "histogram: bins must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) out[b].center = lo + (static_cast<double>(b) + 0.5) * width;
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) * static_cast<double>(bins) / (hi - lo));
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

/// Splits a descending sequence into runs: a new cluster starts wherever
/// consecutive values differ by more than rel_gap * values.front().
/// Returns the run lengths.
inline std::vector<std::size_t> cluster_sizes(std::span<const double> descending, double rel_gap) {
  std::vector<std::size_t> sizes;
  if (descending.empty()) return sizes;
  const double tol = rel_gap * std::abs(descending.front());
  sizes.push_back(1);
  for (std::size_t k = 1; k < descending.size(); ++k) {
    if (descending[k - 1] - descending[k] > tol) {
      sizes.push_back(1);
    } else {
      ++sizes.back();
    }
  }
  return sizes;
}

}  // namespace angsync
