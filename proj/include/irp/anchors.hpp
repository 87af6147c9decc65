#pragma once

// Parallel anchor sets, anchor pruning by farthest point sampling under the
// absolute cosine distance, pruned subspace ensembles and anchor completion.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "irp/random.hpp"
#include "irp/relative.hpp"
#include "irp/spaces.hpp"

namespace irp {

/// One latent space's view of the shared anchor samples.
struct AnchorSpace {
  Matrix raw;
  SpaceStats stats;
  Matrix unit;  // center_normalize(raw, stats)
};

/// Index-aligned anchor matrices for several spaces: row i of every space
/// encodes the same underlying sample. Dimensions may differ per space.
class ParallelAnchors {
 public:
  void add_space(const std::string& id, Matrix raw) {
    check_embedding(raw, "anchors of space '" + id + "'");
    if (!spaces_.empty() && raw.rows() != count()) {
      throw ShapeMismatch("space '" + id + "' has " + std::to_string(raw.rows()) + " anchors, expected " +
                          std::to_string(count()));
    }
    AnchorSpace space;
    space.stats = compute_stats(raw);
    space.unit = center_normalize(raw, space.stats);
    space.raw = std::move(raw);
    spaces_.insert_or_assign(id, std::move(space));
  }

  bool contains(const std::string& id) const { return spaces_.count(id) != 0; }

  const AnchorSpace& space(const std::string& id) const {
    auto it = spaces_.find(id);
    if (it == spaces_.end()) throw MissingSpace(id);
    return it->second;
  }

  Index count() const { return spaces_.empty() ? 0 : spaces_.begin()->second.raw.rows(); }
  std::size_t size() const { return spaces_.size(); }

 private:
  std::map<std::string, AnchorSpace> spaces_;
};

/// A farthest-point-sampled subset of anchor rows.
struct PrunedSubspace {
  std::vector<Index> indices;  // selection order
  double delta = 0;
  std::uint64_t seed = 0;
  double condition = 0;  // of the selected rows of the matrix that was pruned
};

/// Pairwise 1 - |<a_i, a_j>|, clamped to [0, 1]. Opposite directions count
/// as colinear.
inline Matrix dcos(const Matrix& a_unit) {
  Matrix d = (1.0 - (a_unit * a_unit.transpose()).array().abs()).matrix();
  d = d.cwiseMax(0.0).cwiseMin(1.0);
  d.diagonal().setZero();
  return d;
}

inline Matrix select_rows(const Matrix& m, std::span<const Index> indices) {
  Matrix out(static_cast<Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) out.row(static_cast<Index>(i)) = m.row(indices[i]);
  return out;
}

/// Greedy farthest point sampling from a fixed start row. The second row is
/// the farthest from the start and is always taken; afterwards the candidate
/// with the largest distance to the selected set is added while that distance
/// exceeds delta. Ties go to the lowest index.
inline PrunedSubspace fps_prune_from(const Matrix& a_unit, double delta, Index start,
                                     double cutoff_ratio = kDefaultCutoff) {
  const Index k = a_unit.rows();
  if (k < 2) throw InvalidShape("pruning needs at least 2 anchors");
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in [0, 1)");
  if (start < 0 || start >= k) throw InvalidArgument("start index out of range");

  PrunedSubspace sub;
  sub.delta = delta;
  std::vector<char> taken(static_cast<std::size_t>(k), 0);
  Vector min_dist = Vector::Constant(k, std::numeric_limits<double>::infinity());

  auto take = [&](Index j) {
    sub.indices.push_back(j);
    taken[static_cast<std::size_t>(j)] = 1;
    const Vector dots = a_unit * a_unit.row(j).transpose();
    for (Index i = 0; i < k; ++i) {
      const double d = std::clamp(1.0 - std::abs(dots[i]), 0.0, 1.0);
      min_dist[i] = std::min(min_dist[i], d);
    }
  };
  auto farthest = [&]() {
    Index best = -1;
    for (Index i = 0; i < k; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || min_dist[i] > min_dist[best]) best = i;
    }
    return best;
  };

  take(start);
  take(farthest());
  for (Index next = farthest(); next >= 0 && min_dist[next] > delta; next = farthest()) take(next);

  sub.condition = condition_number(select_rows(a_unit, sub.indices), cutoff_ratio);
  return sub;
}

/// fps_prune_from with the start row drawn uniformly from the seed.
inline PrunedSubspace fps_prune(const Matrix& a_unit, double delta, std::uint64_t seed,
                                double cutoff_ratio = kDefaultCutoff) {
  if (a_unit.rows() < 2) throw InvalidShape("pruning needs at least 2 anchors");
  PrunedSubspace sub = fps_prune_from(a_unit, delta, draw_index(seed, a_unit.rows()), cutoff_ratio);
  sub.seed = seed;
  return sub;
}

/// omega independent FPS runs, run i seeded with split_seed(master_seed, i).
inline std::vector<PrunedSubspace> make_subspaces(const Matrix& a_unit, std::size_t omega, double delta,
                                                  std::uint64_t master_seed, double cutoff_ratio = kDefaultCutoff) {
  if (omega < 1) throw InvalidArgument("omega must be at least 1");
  std::vector<PrunedSubspace> out;
  out.reserve(omega);
  for (std::size_t i = 0; i < omega; ++i) out.push_back(fps_prune(a_unit, delta, split_seed(master_seed, i), cutoff_ratio));
  return out;
}

/// Result of anchor completion. target_anchors holds where the source
/// canonical basis lands in the target space (d_x rows of dimension d_y);
/// matrix is the d_y x d_x transform applied to source rows as x * matrix^T.
struct CompletionTransform {
  Matrix target_anchors;
  Matrix matrix;

  Matrix apply(const Matrix& x_unit) const {
    if (x_unit.cols() != matrix.cols()) {
      throw ShapeMismatch("completion transform expects " + std::to_string(matrix.cols()) + " columns, got " +
                          std::to_string(x_unit.cols()));
    }
    return x_unit * matrix.transpose();
  }
};

/// Encodes the source identity with the source subset (giving S_x^T) and
/// decodes it with the target subset. With the canonical basis as the new
/// source anchors, a source row is its own relative encoding.
inline CompletionTransform anchor_completion(const Matrix& s_x_unit, const Matrix& s_y_unit,
                                             double cutoff_ratio = kDefaultCutoff) {
  if (s_x_unit.rows() != s_y_unit.rows()) {
    throw ShapeMismatch("completion needs parallel subsets, got " + shape_str(s_x_unit) + " and " +
                        shape_str(s_y_unit));
  }
  CompletionTransform t;
  t.target_anchors = s_x_unit.transpose() * pseudo_inverse(s_y_unit.transpose(), cutoff_ratio);
  t.matrix = pseudo_inverse(t.target_anchors.transpose(), cutoff_ratio).transpose();
  return t;
}

}  // namespace irp
