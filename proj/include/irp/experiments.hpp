#pragma once

// Reproduction harnesses: zero-shot stitching of per-space classifier heads
// through translation, and classifier accuracy under rescale injection.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "irp/anchors.hpp"
#include "irp/classify.hpp"
#include "irp/metrics.hpp"
#include "irp/translator.hpp"

namespace irp {

/// Deterministic train/test split of n rows.
struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

inline Split make_split(Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (cut == 0 || cut >= order.size()) throw InvalidArgument("split leaves an empty side");
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline Labels select_labels(const Labels& labels, const std::vector<Index>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

inline double mean_squared_norm(const Matrix& x) { return x.rowwise().squaredNorm().mean(); }

struct StitchOptions {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  /// Head training; the step is divided by the mean squared row norm of each
  /// space's training features, so one setting fits spaces of any scale.
  TrainOptions head{1000, 1.0, 0.9, 0, false};
};

enum class StitchMode { zero_shot, absolute, non_stitch };

inline std::string to_string(StitchMode m) {
  switch (m) {
    case StitchMode::zero_shot: return "zero_shot";
    case StitchMode::absolute: return "absolute";
    case StitchMode::non_stitch: return "non_stitch";
  }
  return "unknown";
}

struct StitchRow {
  StitchMode mode = StitchMode::zero_shot;
  std::size_t encoder = 0;
  std::size_t head = 0;
  std::optional<double> accuracy;    // absent for dimension-incompatible absolute pairs
  std::optional<double> similarity;  // zero-shot only: centered cosine against the head's own space
  std::optional<TranslationReport> report;
};

struct StitchTable {
  std::vector<StitchRow> rows;  // mode-major, then encoder, then head

  /// Mean accuracy of a mode over encoder != head pairs that have one.
  std::optional<double> mean_off_diagonal(StitchMode mode) const {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& r : rows) {
      if (r.mode == mode && r.encoder != r.head && r.accuracy) {
        sum += *r.accuracy;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }

  std::optional<double> mean_zero_shot_similarity() const {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& r : rows) {
      if (r.mode == StitchMode::zero_shot && r.encoder != r.head && r.similarity) {
        sum += *r.similarity;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }
};

/// Parallel embeddings of the same labelled samples in several spaces, with a
/// softmax head trained on the training rows of each space.
class StitchBench {
 public:
  StitchBench(std::vector<Matrix> spaces, Labels labels, std::vector<Index> anchor_indices, const StitchOptions& opt)
      : spaces_(std::move(spaces)), labels_(std::move(labels)) {
    if (spaces_.size() < 2) throw InvalidArgument("stitching needs at least 2 spaces");
    const Index n = spaces_.front().rows();
    for (std::size_t i = 0; i < spaces_.size(); ++i) {
      check_embedding(spaces_[i], "space " + std::to_string(i));
      if (spaces_[i].rows() != n) throw ShapeMismatch("spaces have different row counts");
    }
    class_count(labels_, n);
    for (auto a : anchor_indices) {
      if (a < 0 || a >= n) throw InvalidArgument("anchor index " + std::to_string(a) + " out of range");
    }
    split_ = make_split(n, opt.train_fraction, split_seed(opt.seed, 0));
    test_labels_ = select_labels(labels_, split_.test);
    const Labels train_labels = select_labels(labels_, split_.train);
    for (std::size_t i = 0; i < spaces_.size(); ++i) {
      anchors_.add_space(id(i), select_rows(spaces_[i], anchor_indices));
      test_.push_back(select_rows(spaces_[i], split_.test));
      const Matrix train = select_rows(spaces_[i], split_.train);
      TrainOptions t = opt.head;
      t.learning_rate = opt.head.learning_rate / mean_squared_norm(train);
      t.seed = split_seed(opt.seed, 1 + i);
      heads_.push_back(train_softmax(train, train_labels, t));
    }
  }

  std::size_t size() const { return spaces_.size(); }
  const SoftmaxHead& head(std::size_t j) const { return heads_.at(j); }
  const Split& split() const { return split_; }
  const ParallelAnchors& anchors() const { return anchors_; }
  static std::string id(std::size_t i) { return std::to_string(i); }

  double non_stitch(std::size_t j) const {
    return accuracy(predict_softmax(heads_.at(j), test_[j]).labels, test_labels_);
  }

  std::optional<double> absolute(std::size_t i, std::size_t j) const {
    if (test_.at(i).cols() != heads_.at(j).dim()) return std::nullopt;
    return accuracy(predict_softmax(heads_[j], test_[i]).labels, test_labels_);
  }

  StitchRow zero_shot(std::size_t i, std::size_t j, const TranslationConfig& config) const {
    Translation t = translate(test_.at(i), anchors_, id(i), id(j), config, &test_.at(j));
    StitchRow row;
    row.mode = StitchMode::zero_shot;
    row.encoder = i;
    row.head = j;
    row.accuracy = accuracy(predict_softmax(heads_.at(j), t.output).labels, test_labels_);
    row.similarity = t.report.reconstruction_similarity;
    row.report = std::move(t.report);
    return row;
  }

  /// Every (encoder, head) pair in each of the three modes.
  StitchTable evaluate(const TranslationConfig& config) const {
    StitchTable table;
    for (StitchMode mode : {StitchMode::zero_shot, StitchMode::absolute, StitchMode::non_stitch}) {
      for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < size(); ++j) {
          if (mode == StitchMode::zero_shot) {
            table.rows.push_back(zero_shot(i, j, config));
            continue;
          }
          StitchRow row;
          row.mode = mode;
          row.encoder = i;
          row.head = j;
          row.accuracy = mode == StitchMode::absolute ? absolute(i, j) : std::optional<double>(non_stitch(j));
          table.rows.push_back(std::move(row));
        }
      }
    }
    return table;
  }

  /// Zero-shot pairs only (encoder != head), for hyperparameter sweeps.
  StitchTable evaluate_zero_shot(const TranslationConfig& config) const {
    StitchTable table;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (i != j) table.rows.push_back(zero_shot(i, j, config));
    return table;
  }

 private:
  std::vector<Matrix> spaces_;
  Labels labels_;
  Split split_;
  Labels test_labels_;
  std::vector<Matrix> test_;
  ParallelAnchors anchors_;
  std::vector<SoftmaxHead> heads_;
};

/// n log-spaced values from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n == 0) throw InvalidArgument("log_space needs 0 < lo <= hi and n >= 1");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct RescaleOptions {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  /// The step is divided by the mean squared row norm of the training rows.
  MlpOptions mlp{64, 32, TrainOptions{600, 0.5, 0.9, 0, false}};
  std::vector<double> alphas;  // rescale factors
  bool relative = false;       // alphas are multiples of the training mean scale
};

struct RescaleRow {
  Activation activation = Activation::relu;
  double alpha = 0;
  double accuracy = 0;
};

struct RescaleResult {
  double train_mean_scale = 0;  // mean row norm of the training rows
  std::vector<double> native_accuracy;  // per activation, test rows at their own scale
  std::vector<RescaleRow> rows;         // activation-major, alphas ascending

  /// Accuracy curve for one activation, in alpha order.
  std::vector<RescaleRow> curve(Activation a) const {
    std::vector<RescaleRow> out;
    for (const auto& r : rows)
      if (r.activation == a) out.push_back(r);
    return out;
  }
};

/// Trains one MLP per activation at the data's native scale, then measures
/// test accuracy with every test row rescaled to norm alpha.
inline RescaleResult rescale_sweep(const Matrix& x, const Labels& labels, const std::vector<Activation>& activations,
                                   const RescaleOptions& opt) {
  check_embedding(x, "features");
  class_count(labels, x.rows());
  if (opt.alphas.empty()) throw InvalidArgument("rescale sweep needs at least one alpha");
  const Split split = make_split(x.rows(), opt.train_fraction, split_seed(opt.seed, 0));
  const Matrix train = select_rows(x, split.train);
  const Matrix test = select_rows(x, split.test);
  const Labels train_labels = select_labels(labels, split.train);
  const Labels test_labels = select_labels(labels, split.test);

  RescaleResult result;
  result.train_mean_scale = row_norms(train).mean();
  for (std::size_t a = 0; a < activations.size(); ++a) {
    MlpOptions mo = opt.mlp;
    mo.train.learning_rate = opt.mlp.train.learning_rate / mean_squared_norm(train);
    mo.train.seed = split_seed(opt.seed, 1 + a);
    const MlpClassifier model = train_mlp(train, train_labels, activations[a], mo);
    result.native_accuracy.push_back(accuracy(predict_mlp(model, test).labels, test_labels));
    for (double alpha : opt.alphas) {
      const double scale = opt.relative ? alpha * result.train_mean_scale : alpha;
      result.rows.push_back({activations[a], scale, accuracy(predict_mlp(model, test, scale).labels, test_labels)});
    }
  }
  return result;
}

}  // namespace irp
