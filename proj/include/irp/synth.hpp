#pragma once

// Synthetic latent space families: one ground-truth point cloud seen through
// per-space isometries (orthonormal embedding into a larger space), a global
// scale, a translation and independent Gaussian noise:
//
//   X_i = (Z + E_i) * Q_i * s_i + 1 * t_i^T,   E_i ~ Normal(0, sigma^2)
//
// Q_i is d0 x d_i with orthonormal rows, so Q_i * Q_i^T = I.

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "irp/anchors.hpp"
#include "irp/metrics.hpp"
#include "irp/random.hpp"
#include "irp/spaces.hpp"

namespace irp {

/// d_out x d_in matrix with orthonormal columns, from the QR factorization of
/// a Gaussian matrix with the signs of R's diagonal forced positive.
inline Matrix random_orthogonal(Index d_in, Index d_out, std::uint64_t seed) {
  if (d_in < 1 || d_out < d_in) {
    throw InvalidShape("random_orthogonal needs 1 <= d_in <= d_out, got " + std::to_string(d_in) + " -> " +
                       std::to_string(d_out));
  }
  const Matrix g = gaussian_matrix(d_out, d_in, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d_out, d_in);
  const Matrix r = qr.matrixQR().topRows(d_in).triangularView<Eigen::Upper>();
  for (Index j = 0; j < d_in; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

struct FamilySpec {
  Index n = 1024;
  Index d0 = 32;
  std::vector<Index> dims{48, 64};
  double sigma = 0.0;         // per-space noise stddev on the ground truth
  Index num_classes = 1;      // > 1 draws Z as separated class blobs
  Index k_anchors = 128;
  std::uint64_t seed = 0;
  double scale_min = 0.5;     // per-space scale drawn uniformly in [scale_min, scale_max]
  double scale_max = 2.0;
  double translation_std = 1.0;
};

struct SpaceTransform {
  Matrix map;            // d0 x d_i, orthonormal rows
  double scale = 1.0;
  RowVector translation;
  std::uint64_t noise_seed = 0;
};

struct SyntheticFamily {
  Matrix ground_truth;  // n x d0
  Labels labels;        // empty when num_classes == 1
  std::vector<Index> anchor_indices;
  std::vector<SpaceTransform> spaces;
  double sigma = 0.0;
};

/// Distance between class means, in units of the blob stddev.
inline constexpr double kClassSeparation = 6.0;

namespace detail {

// Stream ids for split_seed, one per random ingredient.
inline constexpr std::uint64_t kStreamPoints = 1;
inline constexpr std::uint64_t kStreamMeans = 2;
inline constexpr std::uint64_t kStreamAnchors = 3;
inline constexpr std::uint64_t kStreamSpaces = 100;

inline Matrix class_means(Index classes, Index d0, std::uint64_t seed) {
  const double radius = kClassSeparation / std::sqrt(2.0);
  if (classes <= d0) {
    // Orthonormal directions: every pair of means is exactly kClassSeparation apart.
    return random_orthogonal(classes, d0, seed).transpose() * radius;
  }
  return normalize_rows(gaussian_matrix(classes, d0, seed)) * radius;
}

}  // namespace detail

inline SyntheticFamily generate_family(const FamilySpec& spec) {
  if (spec.n < 1 || spec.d0 < 2) throw InvalidShape("family needs n >= 1 and d0 >= 2");
  if (spec.dims.empty()) throw InvalidShape("family needs at least one space");
  for (auto d : spec.dims) {
    if (d < spec.d0) throw InvalidShape("space dimension " + std::to_string(d) + " is below d0 " + std::to_string(spec.d0));
  }
  if (spec.k_anchors < 2 || spec.k_anchors > spec.n) throw InvalidShape("anchor count must lie in [2, n]");
  if (spec.num_classes < 1 || spec.num_classes > spec.n) throw InvalidShape("class count must lie in [1, n]");
  if (!(spec.sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  if (!(spec.scale_min > 0.0 && spec.scale_max >= spec.scale_min)) throw InvalidArgument("bad scale range");
  if (!(spec.translation_std >= 0.0)) throw InvalidArgument("translation stddev must be non-negative");

  SyntheticFamily fam;
  fam.sigma = spec.sigma;
  fam.ground_truth = gaussian_matrix(spec.n, spec.d0, split_seed(spec.seed, detail::kStreamPoints));
  if (spec.num_classes > 1) {
    const Matrix means = detail::class_means(spec.num_classes, spec.d0, split_seed(spec.seed, detail::kStreamMeans));
    fam.labels.resize(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i) {
      const auto c = static_cast<Label>(i % spec.num_classes);
      fam.labels[static_cast<std::size_t>(i)] = c;
      fam.ground_truth.row(i) += means.row(c);
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(spec.n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 pick(split_seed(spec.seed, detail::kStreamAnchors));
  for (Index i = 0; i < spec.k_anchors; ++i) {  // partial Fisher-Yates
    std::uniform_int_distribution<Index> u(i, spec.n - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(u(pick))]);
  }
  fam.anchor_indices.assign(order.begin(), order.begin() + spec.k_anchors);
  std::sort(fam.anchor_indices.begin(), fam.anchor_indices.end());

  for (std::size_t s = 0; s < spec.dims.size(); ++s) {
    const std::uint64_t base = split_seed(spec.seed, detail::kStreamSpaces + s);
    SpaceTransform t;
    t.map = random_orthogonal(spec.d0, spec.dims[s], split_seed(base, 0)).transpose();
    std::mt19937_64 rng(split_seed(base, 1));
    t.scale = std::uniform_real_distribution<double>(spec.scale_min, spec.scale_max)(rng);
    t.translation = RowVector::Zero(spec.dims[s]);
    if (spec.translation_std > 0.0) t.translation = gaussian_matrix(1, spec.dims[s], split_seed(base, 2), spec.translation_std);
    t.noise_seed = split_seed(base, 3);
    fam.spaces.push_back(std::move(t));
  }
  return fam;
}

struct MaterializedSpace {
  Matrix embeddings;  // n x d_i
  Matrix anchors;     // rows of embeddings at the family's anchor indices
  Labels labels;
};

inline MaterializedSpace materialize(const SyntheticFamily& fam, std::size_t space_index) {
  if (space_index >= fam.spaces.size()) {
    throw InvalidArgument("space index " + std::to_string(space_index) + " out of range");
  }
  const SpaceTransform& t = fam.spaces[space_index];
  Matrix z = fam.ground_truth;
  if (fam.sigma > 0.0) z += gaussian_matrix(z.rows(), z.cols(), t.noise_seed, fam.sigma);
  MaterializedSpace out;
  out.embeddings = ((z * t.map) * t.scale).rowwise() + t.translation;
  out.anchors = select_rows(out.embeddings, fam.anchor_indices);
  out.labels = fam.labels;
  return out;
}

}  // namespace irp
