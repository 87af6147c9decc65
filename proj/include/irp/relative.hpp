#pragma once

// Relative encoding against an anchor set and its inverse through the
// Moore-Penrose pseudo-inverse of the transposed anchor matrix.

#include <Eigen/SVD>

#include <limits>
#include <string>

#include "irp/spaces.hpp"

namespace irp {

/// Singular values below cutoff_ratio * sigma_max are treated as zero.
inline constexpr double kDefaultCutoff = 1e-10;

using RelativeRepresentation = Matrix;

inline void check_cutoff(double cutoff_ratio) {
  if (!(cutoff_ratio > 0.0 && cutoff_ratio < 1.0)) {
    throw InvalidArgument("cutoff ratio must lie in (0, 1), got " + std::to_string(cutoff_ratio));
  }
}

/// Cosine similarity of every sample to every anchor (both unit-normalized).
inline RelativeRepresentation relative_encode(const Matrix& x_unit, const Matrix& a_unit) {
  if (x_unit.cols() != a_unit.cols()) {
    throw ShapeMismatch("samples are " + shape_str(x_unit) + ", anchors are " + shape_str(a_unit));
  }
  return x_unit * a_unit.transpose();
}

namespace detail {

inline Eigen::BDCSVD<Matrix> svd(const Matrix& m, unsigned int options) {
  if (m.size() == 0) throw InvalidShape("cannot decompose an empty matrix");
  if (!m.allFinite()) throw SvdFailure("matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> svd(m, options);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    throw SvdFailure("decomposition of " + shape_str(m) + " did not converge");
  }
  return svd;
}

}  // namespace detail

/// Singular values in decreasing order.
inline Vector singular_values(const Matrix& m) { return detail::svd(m, 0).singularValues(); }

inline Matrix pseudo_inverse(const Matrix& m, double cutoff_ratio = kDefaultCutoff) {
  check_cutoff(cutoff_ratio);
  const auto svd = detail::svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double threshold = sigma.size() > 0 ? cutoff_ratio * sigma[0] : 0.0;
  Vector inv = Vector::Zero(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] >= threshold && sigma[i] > 0.0) inv[i] = 1.0 / sigma[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// rel * pinv(A^T), each decoded row re-normalized to unit length. The
/// relative space carries no scale, so the decoded magnitude is discarded.
inline Matrix relative_decode(const RelativeRepresentation& rel, const Matrix& a_unit,
                              double cutoff_ratio = kDefaultCutoff) {
  if (rel.cols() != a_unit.rows()) {
    throw ShapeMismatch("relative representation has " + std::to_string(rel.cols()) + " columns for " +
                        std::to_string(a_unit.rows()) + " anchors");
  }
  return normalize_rows(rel * pseudo_inverse(a_unit.transpose(), cutoff_ratio));
}

/// sigma_max / sigma_min of the anchor matrix; +inf once sigma_min falls
/// below the relative cutoff.
inline double condition_number(const Matrix& a_unit, double cutoff_ratio = kDefaultCutoff) {
  if (a_unit.rows() < 2) throw InvalidShape("condition number needs at least 2 anchors");
  check_cutoff(cutoff_ratio);
  const Vector sigma = singular_values(a_unit);
  const double hi = sigma[0];
  const double lo = sigma[sigma.size() - 1];
  if (!(hi > 0.0) || lo < cutoff_ratio * hi) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace irp
