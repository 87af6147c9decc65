#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "irp/spaces.hpp"

namespace irp {

using Label = std::int32_t;
using Labels = std::vector<Label>;

struct MetricSummary {
  double mean = 0;
  double std = 0;  // population standard deviation
  double min = 0;
  double max = 0;
};

inline MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidShape("cannot summarize an empty score vector");
  MetricSummary s;
  s.min = s.max = values[0];
  double sum = 0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  // Rounding in the mean can overshoot a constant vector by an ulp.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

inline Vector row_cosines(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("cosine of " + shape_str(a) + " against " + shape_str(b));
  }
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const double na = a.row(i).norm();
    const double nb = b.row(i).norm();
    if (!(na > kDegenerateEps && nb > kDegenerateEps)) throw ZeroNormRow(static_cast<std::size_t>(i));
    out[i] = std::clamp(a.row(i).dot(b.row(i)) / (na * nb), -1.0, 1.0);
  }
  return out;
}

/// Per-row cosine similarity between two equally shaped matrices.
inline MetricSummary mean_cosine(const Matrix& a, const Matrix& b) {
  const Vector c = row_cosines(a, b);
  return summarize(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
}

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  if (x.size() < 2) throw InvalidShape("pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw ZeroVariance();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw LengthMismatch(predicted.size(), truth.size());
  if (truth.empty()) throw InvalidShape("accuracy of an empty label vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace irp
