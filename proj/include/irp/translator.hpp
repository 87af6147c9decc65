#pragma once

// End-to-end translation between two latent spaces through the relative
// space: center and normalize with each space's anchor statistics, encode
// against pruned source anchors, decode with the parallel target anchors,
// average the omega subspace estimates, then restore the target anchors'
// center and mean scale.

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "irp/anchors.hpp"
#include "irp/metrics.hpp"
#include "irp/relative.hpp"
#include "irp/spaces.hpp"

namespace irp {

enum class PruneOn { source, target };

struct TranslationConfig {
  std::size_t omega = 8;
  double delta = 0.65;
  std::uint64_t master_seed = 0;
  bool use_completion = false;
  double cutoff_ratio = kDefaultCutoff;
  PruneOn prune_on = PruneOn::source;
  std::size_t threads = 1;  // subspace branches run concurrently above 1

  void validate() const {
    if (omega < 1) throw InvalidArgument("omega must be at least 1");
    if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in [0, 1)");
    check_cutoff(cutoff_ratio);
    if (threads < 1) throw InvalidArgument("threads must be at least 1");
  }
};

struct TranslationReport {
  std::optional<double> reconstruction_similarity;  // centered, against a reference
  std::vector<double> per_subspace_condition;       // of the target anchor subsets
  std::vector<std::size_t> anchors_after_pruning;
  double relative_residual = 0;  // ||G_x - G_y||_F / ||G_y||_F of the anchor cosine Gram matrices
  double output_scale = 0;       // mean distance of output rows from the target center
  std::chrono::nanoseconds elapsed{0};

  double mean_condition() const {
    double s = 0;
    for (double c : per_subspace_condition) s += c;
    return s / static_cast<double>(per_subspace_condition.size());
  }
  double mean_anchor_count() const {
    double s = 0;
    for (auto c : anchors_after_pruning) s += static_cast<double>(c);
    return s / static_cast<double>(anchors_after_pruning.size());
  }
};

struct Translation {
  Matrix output;
  TranslationReport report;
};

namespace detail {

struct SubspaceEstimate {
  Matrix decoded;  // unit rows in the target space
  double condition = 0;
  std::size_t anchors = 0;
};

inline SubspaceEstimate estimate_subspace(const Matrix& x_unit, const AnchorSpace& src, const AnchorSpace& tgt,
                                          const PrunedSubspace& sub, const TranslationConfig& config) {
  const Matrix s_x = select_rows(src.unit, sub.indices);
  const Matrix s_y = select_rows(tgt.unit, sub.indices);
  SubspaceEstimate est;
  est.anchors = sub.indices.size();
  est.condition = condition_number(s_y, config.cutoff_ratio);
  if (config.use_completion) {
    est.decoded = normalize_rows(anchor_completion(s_x, s_y, config.cutoff_ratio).apply(x_unit));
  } else {
    est.decoded = relative_decode(relative_encode(x_unit, s_x), s_y, config.cutoff_ratio);
  }
  return est;
}

inline double gram_residual(const Matrix& x_unit, const Matrix& y_unit) {
  const Matrix gx = x_unit * x_unit.transpose();
  const Matrix gy = y_unit * y_unit.transpose();
  return (gx - gy).norm() / gy.norm();
}

}  // namespace detail

/// Translates raw source embeddings into the target space. When a reference
/// (the true target embeddings of the same rows) is given, the report carries
/// the mean cosine between centered output and centered reference.
inline Translation translate(const Matrix& x_raw, const ParallelAnchors& anchors, const std::string& source_id,
                             const std::string& target_id, const TranslationConfig& config,
                             const Matrix* reference = nullptr) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  const AnchorSpace& src = anchors.space(source_id);
  const AnchorSpace& tgt = anchors.space(target_id);
  check_embedding(x_raw, "source embeddings");
  const Matrix x_unit = center_normalize(x_raw, src.stats);

  const Matrix& pruned_on = config.prune_on == PruneOn::source ? src.unit : tgt.unit;
  const auto subspaces = make_subspaces(pruned_on, config.omega, config.delta, config.master_seed, config.cutoff_ratio);

  std::vector<detail::SubspaceEstimate> estimates(subspaces.size());
  if (config.threads <= 1) {
    for (std::size_t i = 0; i < subspaces.size(); ++i) {
      estimates[i] = detail::estimate_subspace(x_unit, src, tgt, subspaces[i], config);
    }
  } else {
    for (std::size_t begin = 0; begin < subspaces.size(); begin += config.threads) {
      const std::size_t end = std::min(subspaces.size(), begin + config.threads);
      std::vector<std::future<detail::SubspaceEstimate>> pending;
      for (std::size_t i = begin; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, detail::estimate_subspace, std::cref(x_unit), std::cref(src),
                                     std::cref(tgt), std::cref(subspaces[i]), std::cref(config)));
      }
      for (std::size_t i = begin; i < end; ++i) estimates[i] = pending[i - begin].get();
    }
  }

  // Fixed reduction order keeps threaded runs bit-identical to sequential ones.
  Matrix sum = Matrix::Zero(x_unit.rows(), tgt.stats.dim());
  Translation result;
  for (const auto& est : estimates) {
    sum += est.decoded;
    result.report.per_subspace_condition.push_back(est.condition);
    result.report.anchors_after_pruning.push_back(est.anchors);
  }
  const Matrix mean_direction = normalize_rows(sum / static_cast<double>(estimates.size()));
  result.output = denormalize(mean_direction, tgt.stats);

  result.report.relative_residual = detail::gram_residual(src.unit, tgt.unit);
  result.report.output_scale = (result.output.rowwise() - tgt.stats.center).rowwise().norm().mean();
  if (reference != nullptr) {
    if (reference->rows() != result.output.rows() || reference->cols() != result.output.cols()) {
      throw ShapeMismatch("reference is " + shape_str(*reference) + ", output is " + shape_str(result.output));
    }
    result.report.reconstruction_similarity =
        mean_cosine(result.output.rowwise() - tgt.stats.center, reference->rowwise() - tgt.stats.center).mean;
  }
  result.report.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started);
  return result;
}

/// Downstream evaluation of a translated matrix, e.g. a classifier's accuracy.
using AccuracyFn = std::function<double(const Matrix&)>;

struct SweepRow {
  std::size_t omega = 0;
  double delta = 0;
  std::uint64_t seed = 0;
  TranslationReport report;
  std::optional<double> accuracy;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Pearson(reconstruction similarity, accuracy) over rows, when both exist
  /// and vary.
  std::optional<double> similarity_accuracy_pearson;
  /// Pearson(mean condition number, mean anchors after pruning) over rows,
  /// when every condition number is finite.
  std::optional<double> condition_anchor_pearson;
};

inline std::optional<double> try_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || x.size() != y.size()) return std::nullopt;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return std::nullopt;
  }
  try {
    return pearson(x, y);
  } catch (const ZeroVariance&) {
    return std::nullopt;
  }
}

/// One translate run per (omega, delta, seed) cell, in that nesting order.
inline SweepResult sweep(const Matrix& x_raw, const ParallelAnchors& anchors, const std::string& source_id,
                         const std::string& target_id, const std::vector<std::size_t>& omegas,
                         const std::vector<double>& deltas, const std::vector<std::uint64_t>& seeds,
                         const TranslationConfig& base, const Matrix* reference = nullptr,
                         const AccuracyFn& evaluate = {}) {
  if (omegas.empty() || deltas.empty() || seeds.empty()) throw InvalidArgument("sweep grids must be nonempty");
  SweepResult out;
  for (auto omega : omegas) {
    for (auto delta : deltas) {
      for (auto seed : seeds) {
        TranslationConfig config = base;
        config.omega = omega;
        config.delta = delta;
        config.master_seed = seed;
        Translation t = translate(x_raw, anchors, source_id, target_id, config, reference);
        SweepRow row{omega, delta, seed, std::move(t.report), std::nullopt};
        if (evaluate) row.accuracy = evaluate(t.output);
        out.rows.push_back(std::move(row));
      }
    }
  }

  std::vector<double> sim, acc, cond, count;
  for (const auto& row : out.rows) {
    cond.push_back(row.report.mean_condition());
    count.push_back(row.report.mean_anchor_count());
    if (row.report.reconstruction_similarity && row.accuracy) {
      sim.push_back(*row.report.reconstruction_similarity);
      acc.push_back(*row.accuracy);
    }
  }
  out.condition_anchor_pearson = try_pearson(cond, count);
  if (sim.size() == out.rows.size()) out.similarity_accuracy_pearson = try_pearson(sim, acc);
  return out;
}

}  // namespace irp
