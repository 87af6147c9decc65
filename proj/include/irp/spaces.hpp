#pragma once

// Embedding containers and the anchor-statistics normalization pipeline:
// center by the anchor mean, L2-normalize, and the inverse mapping back to a
// space's mean anchor scale.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "irp/error.hpp"

namespace irp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// n x d, one encoded sample per row.
using EmbeddingMatrix = Matrix;

inline constexpr double kDegenerateEps = 1e-12;
inline constexpr double kUnitNormTol = 1e-9;

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Enforces the EmbeddingMatrix invariants: n >= 1, d >= 2, finite entries.
inline void check_embedding(const Matrix& m, const std::string& what = "embedding") {
  if (m.rows() < 1 || m.cols() < 2) throw InvalidShape(what + " must be at least 1x2, got " + shape_str(m));
  if (!m.allFinite()) throw InvalidArgument(what + " contains non-finite values");
}

inline bool is_unit_normalized(const Matrix& m, double tol = kUnitNormTol) {
  for (Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

/// Scales every row to unit L2 norm.
inline Matrix normalize_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (!(norm > kDegenerateEps)) throw ZeroNormRow(static_cast<std::size_t>(i));
    out.row(i) = m.row(i) / norm;
  }
  return out;
}

/// Anchor-derived statistics of one latent space.
struct SpaceStats {
  RowVector center;       // mean of the raw anchor rows
  double mean_norm = 0;   // mean L2 norm of the centered anchor rows

  Index dim() const { return center.size(); }
};

inline SpaceStats compute_stats(const Matrix& raw_anchors) {
  if (raw_anchors.rows() < 2) {
    throw InvalidShape("need at least 2 anchors to compute statistics, got " + std::to_string(raw_anchors.rows()));
  }
  if (!raw_anchors.allFinite()) throw InvalidArgument("anchors contain non-finite values");

  SpaceStats stats;
  stats.center = raw_anchors.colwise().mean();
  double total = 0;
  for (Index i = 0; i < raw_anchors.rows(); ++i) total += (raw_anchors.row(i) - stats.center).norm();
  stats.mean_norm = total / static_cast<double>(raw_anchors.rows());
  if (!(stats.mean_norm > kDegenerateEps)) throw DegenerateSpace("all anchors coincide");
  return stats;
}

inline void check_dim(const Matrix& m, const SpaceStats& stats) {
  if (m.cols() != stats.dim()) {
    throw ShapeMismatch("matrix has " + std::to_string(m.cols()) + " columns, space has dimension " +
                        std::to_string(stats.dim()));
  }
}

/// (row - center) / ||row - center|| for every row.
inline Matrix center_normalize(const Matrix& m, const SpaceStats& stats) {
  check_dim(m, stats);
  return normalize_rows(m.rowwise() - stats.center);
}

/// row * mean_norm + center for every row of a unit-normalized matrix.
inline Matrix denormalize(const Matrix& unit, const SpaceStats& stats) {
  check_dim(unit, stats);
  return (unit * stats.mean_norm).rowwise() + stats.center;
}

inline Vector row_norms(const Matrix& m) { return m.rowwise().norm(); }

struct Histogram {
  double lo = 0;
  double hi = 0;
  std::vector<std::size_t> counts;

  double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
  double bin_lo(std::size_t b) const { return lo + bin_width() * static_cast<double>(b); }
  double bin_hi(std::size_t b) const { return lo + bin_width() * static_cast<double>(b + 1); }

  /// True when no bin sits in a valley, i.e. below the tallest bin on both
  /// of its sides by more than noise_sigmas * sqrt(shorter side peak). The
  /// slack expresses Poisson counting noise; 0 demands strict unimodality.
  bool is_unimodal(double noise_sigmas = 0.0) const {
    const std::size_t n = counts.size();
    if (n == 0) return false;
    std::vector<std::size_t> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) left[i] = std::max(counts[i], i ? left[i - 1] : 0);
    for (std::size_t i = n; i-- > 0;) right[i] = std::max(counts[i], i + 1 < n ? right[i + 1] : 0);
    if (left[n - 1] == 0) return false;
    for (std::size_t i = 0; i < n; ++i) {
      const double rim = static_cast<double>(std::min(left[i], right[i]));
      if (rim - static_cast<double>(counts[i]) > noise_sigmas * std::sqrt(rim)) return false;
    }
    return true;
  }
};

inline Histogram make_histogram(const Vector& values, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.size() == 0) return h;
  h.lo = values.minCoeff();
  h.hi = values.maxCoeff();
  if (h.hi <= h.lo) h.hi = h.lo + 1.0;
  const double width = h.bin_width();
  for (Index i = 0; i < values.size(); ++i) {
    auto b = static_cast<std::size_t>((values[i] - h.lo) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

struct NormSummary {
  double min = 0;
  double max = 0;
  double mean = 0;
  double std = 0;  // population standard deviation
  Histogram histogram;
};

inline NormSummary summarize_norms(const Vector& norms, std::size_t bins = 20) {
  if (norms.size() == 0) throw InvalidShape("no rows to summarize");
  NormSummary s;
  s.min = norms.minCoeff();
  s.max = norms.maxCoeff();
  s.mean = norms.mean();
  s.std = std::sqrt((norms.array() - s.mean).square().mean());
  s.histogram = make_histogram(norms, bins);
  return s;
}

}  // namespace irp
