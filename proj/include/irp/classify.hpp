#pragma once

// Small classifiers used to measure stitching accuracy and scale invariance:
// a softmax regression head and a two-hidden-layer MLP, both trained by
// full-batch gradient descent with heavy-ball momentum.
//
// Model blob layout (all little-endian):
//   "IRPH" | version u16 = 1 | kind u16 (0 softmax head, 1 mlp)
//   softmax head: temperature f64 | dense (classes x dim)
//   mlp:          activation u16 (0 relu, 1 tanh, 2 cosine) | dense hidden1 | dense hidden2 | softmax head
//   dense:        out u32 | in u32 | weights f64[out*in] row-major | bias f64[out]

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "irp/binary.hpp"
#include "irp/metrics.hpp"
#include "irp/random.hpp"
#include "irp/spaces.hpp"

namespace irp {

/// Logits are x * W^T + b; probabilities are softmax(logits / temperature).
struct SoftmaxHead {
  Matrix weights;  // classes x dim
  Vector bias;     // classes
  double temperature = 1.0;

  Index classes() const { return weights.rows(); }
  Index dim() const { return weights.cols(); }

  Matrix logits(const Matrix& x) const {
    if (x.cols() != dim()) throw ShapeMismatch("head expects " + std::to_string(dim()) + " features, got " + shape_str(x));
    return (x * weights.transpose()).rowwise() + bias.transpose();
  }
};

struct Prediction {
  Labels labels;
  Matrix probabilities;
};

inline Matrix softmax_rows(const Matrix& logits, double temperature = 1.0) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  Matrix p = logits / temperature;
  for (Index i = 0; i < p.rows(); ++i) {
    p.row(i).array() -= p.row(i).maxCoeff();
    p.row(i) = p.row(i).array().exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

/// Per-row argmax, lowest index on ties.
inline Labels argmax_rows(const Matrix& scores) {
  Labels out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < scores.cols(); ++j) {
      if (scores(i, j) > scores(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<Label>(best);
  }
  return out;
}

/// Sets every row to norm alpha (unit-normalize, then scale).
inline Matrix rescale_inject(const Matrix& x, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("rescale factor must be positive");
  return normalize_rows(x) * alpha;
}

/// Validates labels against n samples; returns the class count.
inline Index class_count(const Labels& labels, Index n) {
  if (static_cast<Index>(labels.size()) != n) {
    throw InvalidLabels(std::to_string(labels.size()) + " labels for " + std::to_string(n) + " samples");
  }
  Label top = -1;
  for (Label l : labels) {
    if (l < 0) throw InvalidLabels("negative label " + std::to_string(l));
    top = std::max(top, l);
  }
  const Index classes = static_cast<Index>(top) + 1;
  if (classes < 2) throw InvalidLabels("need at least 2 classes");
  if (n < classes) throw InvalidLabels("fewer samples than classes");
  return classes;
}

struct TrainOptions {
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool zero_bias = false;  // softmax head only: keep b = 0
};

namespace detail {

/// (P - Y) / n for mean cross-entropy at the given temperature.
inline Matrix softmax_residual(const Matrix& logits, const Labels& labels, double temperature) {
  Matrix r = softmax_rows(logits, temperature);
  for (Index i = 0; i < r.rows(); ++i) r(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  return r / (static_cast<double>(r.rows()) * temperature);
}

inline double cross_entropy(const Matrix& logits, const Labels& labels, double temperature) {
  double total = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const auto row = (logits.row(i) / temperature).eval();
    const double top = row.maxCoeff();
    const double lse = top + std::log((row.array() - top).exp().sum());
    total += lse - row(labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace detail

struct SoftmaxGradient {
  Matrix weights;
  Vector bias;
};

inline double softmax_loss(const SoftmaxHead& head, const Matrix& x, const Labels& labels) {
  return detail::cross_entropy(head.logits(x), labels, head.temperature);
}

inline SoftmaxGradient softmax_gradient(const SoftmaxHead& head, const Matrix& x, const Labels& labels) {
  const Matrix r = detail::softmax_residual(head.logits(x), labels, head.temperature);
  return {r.transpose() * x, r.colwise().sum().transpose()};
}

inline SoftmaxHead train_softmax(const Matrix& x, const Labels& labels, const TrainOptions& opt) {
  check_embedding(x, "training features");
  const Index classes = class_count(labels, x.rows());
  SoftmaxHead head;
  head.weights = gaussian_matrix(classes, x.cols(), opt.seed, 0.01);
  head.bias = Vector::Zero(classes);

  Matrix vel_w = Matrix::Zero(classes, x.cols());
  Vector vel_b = Vector::Zero(classes);
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const SoftmaxGradient g = softmax_gradient(head, x, labels);
    vel_w = opt.momentum * vel_w - opt.learning_rate * g.weights;
    head.weights += vel_w;
    if (!opt.zero_bias) {
      vel_b = opt.momentum * vel_b - opt.learning_rate * g.bias;
      head.bias += vel_b;
    }
  }
  return head;
}

/// With alpha, every input row is first rescaled to norm alpha.
inline Prediction predict_softmax(const SoftmaxHead& head, const Matrix& x, std::optional<double> alpha = std::nullopt) {
  const Matrix logits = alpha ? head.logits(rescale_inject(x, *alpha)) : head.logits(x);
  return {argmax_rows(logits), softmax_rows(logits, head.temperature)};
}

enum class Activation : std::uint16_t { relu = 0, tanh = 1, cosine = 2 };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::cosine: return "cosine";
  }
  return "unknown";
}

inline Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "cosine") return Activation::cosine;
  throw InvalidArgument("unknown activation '" + name + "'");
}

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out

  Matrix forward(const Matrix& x) const { return (x * weights.transpose()).rowwise() + bias.transpose(); }
};

namespace detail {

inline Matrix activate(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::cosine: return z.array().cos().matrix();
  }
  return z;
}

inline Matrix activation_slope(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::cosine: return (-z.array().sin()).matrix();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

}  // namespace detail

struct MlpClassifier {
  Activation activation = Activation::relu;
  DenseLayer hidden1;
  DenseLayer hidden2;
  SoftmaxHead head;

  Index dim() const { return hidden1.weights.cols(); }

  Matrix logits(const Matrix& x) const {
    if (x.cols() != dim()) throw ShapeMismatch("mlp expects " + std::to_string(dim()) + " features, got " + shape_str(x));
    const Matrix h1 = detail::activate(activation, hidden1.forward(x));
    const Matrix h2 = detail::activate(activation, hidden2.forward(h1));
    return head.logits(h2);
  }
};

struct MlpOptions {
  Index hidden1 = 64;
  Index hidden2 = 32;
  TrainOptions train{};
};

struct MlpGradient {
  DenseLayer hidden1;
  DenseLayer hidden2;
  DenseLayer head;
};

inline double mlp_loss(const MlpClassifier& model, const Matrix& x, const Labels& labels) {
  return detail::cross_entropy(model.logits(x), labels, model.head.temperature);
}

inline MlpGradient mlp_gradient(const MlpClassifier& model, const Matrix& x, const Labels& labels) {
  const Matrix z1 = model.hidden1.forward(x);
  const Matrix h1 = detail::activate(model.activation, z1);
  const Matrix z2 = model.hidden2.forward(h1);
  const Matrix h2 = detail::activate(model.activation, z2);
  const Matrix r = detail::softmax_residual(model.head.logits(h2), labels, model.head.temperature);

  MlpGradient g;
  g.head = {r.transpose() * h2, r.colwise().sum().transpose()};
  const Matrix d2 = (r * model.head.weights).cwiseProduct(detail::activation_slope(model.activation, z2));
  g.hidden2 = {d2.transpose() * h1, d2.colwise().sum().transpose()};
  const Matrix d1 = (d2 * model.hidden2.weights).cwiseProduct(detail::activation_slope(model.activation, z1));
  g.hidden1 = {d1.transpose() * x, d1.colwise().sum().transpose()};
  return g;
}

inline MlpClassifier init_mlp(Index in, Index classes, Activation activation, const MlpOptions& opt) {
  if (opt.hidden1 < 1 || opt.hidden2 < 1) throw InvalidArgument("hidden widths must be at least 1");
  const double gain = activation == Activation::relu ? 2.0 : 1.0;
  auto layer = [&](Index out, Index fan_in, std::uint64_t stream, double g) {
    return DenseLayer{gaussian_matrix(out, fan_in, split_seed(opt.train.seed, stream), std::sqrt(g / static_cast<double>(fan_in))),
                      Vector::Zero(out)};
  };
  MlpClassifier m;
  m.activation = activation;
  m.hidden1 = layer(opt.hidden1, in, 1, gain);
  m.hidden2 = layer(opt.hidden2, opt.hidden1, 2, gain);
  const DenseLayer out = layer(classes, opt.hidden2, 3, 1.0);
  m.head.weights = out.weights;
  m.head.bias = out.bias;
  return m;
}

inline MlpClassifier train_mlp(const Matrix& x, const Labels& labels, Activation activation, const MlpOptions& opt) {
  check_embedding(x, "training features");
  const Index classes = class_count(labels, x.rows());
  MlpClassifier m = init_mlp(x.cols(), classes, activation, opt);

  MlpGradient vel;
  vel.hidden1 = {Matrix::Zero(m.hidden1.weights.rows(), m.hidden1.weights.cols()), Vector::Zero(m.hidden1.bias.size())};
  vel.hidden2 = {Matrix::Zero(m.hidden2.weights.rows(), m.hidden2.weights.cols()), Vector::Zero(m.hidden2.bias.size())};
  vel.head = {Matrix::Zero(m.head.weights.rows(), m.head.weights.cols()), Vector::Zero(m.head.bias.size())};
  const double lr = opt.train.learning_rate;
  const double mu = opt.train.momentum;
  auto step = [&](Matrix& w, Vector& b, DenseLayer& v, const DenseLayer& g) {
    v.weights = mu * v.weights - lr * g.weights;
    v.bias = mu * v.bias - lr * g.bias;
    w += v.weights;
    b += v.bias;
  };
  for (std::size_t epoch = 0; epoch < opt.train.epochs; ++epoch) {
    const MlpGradient g = mlp_gradient(m, x, labels);
    step(m.hidden1.weights, m.hidden1.bias, vel.hidden1, g.hidden1);
    step(m.hidden2.weights, m.hidden2.bias, vel.hidden2, g.hidden2);
    step(m.head.weights, m.head.bias, vel.head, g.head);
  }
  return m;
}

inline Prediction predict_mlp(const MlpClassifier& model, const Matrix& x, std::optional<double> alpha = std::nullopt) {
  const Matrix logits = alpha ? model.logits(rescale_inject(x, *alpha)) : model.logits(x);
  return {argmax_rows(logits), softmax_rows(logits, model.head.temperature)};
}

namespace detail {

inline constexpr std::uint16_t kModelVersion = 1;
inline constexpr std::uint16_t kKindSoftmax = 0;
inline constexpr std::uint16_t kKindMlp = 1;

inline void write_dense(std::ostream& out, const Matrix& w, const Vector& b) {
  le::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(w.rows()));
  le::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(w.cols()));
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) le::write_f64(out, w(i, j));
  for (Index i = 0; i < b.size(); ++i) le::write_f64(out, b[i]);
}

inline DenseLayer read_dense(std::istream& in) {
  const auto rows = le::read_uint<std::uint32_t>(in, "layer rows");
  const auto cols = le::read_uint<std::uint32_t>(in, "layer cols");
  if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) {
    throw FormatError("implausible layer shape");
  }
  DenseLayer l{Matrix(rows, cols), Vector(rows)};
  for (Index i = 0; i < l.weights.rows(); ++i)
    for (Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = le::read_f64(in, "layer weights");
  for (Index i = 0; i < l.bias.size(); ++i) l.bias[i] = le::read_f64(in, "layer bias");
  if (!l.weights.allFinite() || !l.bias.allFinite()) throw FormatError("non-finite model parameters");
  return l;
}

inline void write_head_record(std::ostream& out, const SoftmaxHead& head) {
  le::write_f64(out, head.temperature);
  write_dense(out, head.weights, head.bias);
}

inline SoftmaxHead read_head_record(std::istream& in) {
  SoftmaxHead head;
  head.temperature = le::read_f64(in, "temperature");
  if (!(head.temperature > 0.0) || !std::isfinite(head.temperature)) throw FormatError("bad temperature");
  DenseLayer l = read_dense(in);
  head.weights = std::move(l.weights);
  head.bias = std::move(l.bias);
  return head;
}

inline void read_model_header(std::istream& in, std::uint16_t expected_kind) {
  le::expect_magic(in, "IRPH");
  const auto version = le::read_uint<std::uint16_t>(in, "version");
  if (version != kModelVersion) throw FormatError("unsupported model version " + std::to_string(version));
  const auto kind = le::read_uint<std::uint16_t>(in, "kind");
  if (kind != expected_kind) throw FormatError("unexpected model kind " + std::to_string(kind));
}

}  // namespace detail

inline void save_model(std::ostream& out, const SoftmaxHead& head) {
  le::write_magic(out, "IRPH");
  le::write_uint<std::uint16_t>(out, detail::kModelVersion);
  le::write_uint<std::uint16_t>(out, detail::kKindSoftmax);
  detail::write_head_record(out, head);
}

inline void save_model(std::ostream& out, const MlpClassifier& model) {
  le::write_magic(out, "IRPH");
  le::write_uint<std::uint16_t>(out, detail::kModelVersion);
  le::write_uint<std::uint16_t>(out, detail::kKindMlp);
  le::write_uint<std::uint16_t>(out, static_cast<std::uint16_t>(model.activation));
  detail::write_dense(out, model.hidden1.weights, model.hidden1.bias);
  detail::write_dense(out, model.hidden2.weights, model.hidden2.bias);
  detail::write_head_record(out, model.head);
}

inline SoftmaxHead load_softmax_head(std::istream& in) {
  detail::read_model_header(in, detail::kKindSoftmax);
  return detail::read_head_record(in);
}

inline MlpClassifier load_mlp(std::istream& in) {
  detail::read_model_header(in, detail::kKindMlp);
  MlpClassifier m;
  const auto act = le::read_uint<std::uint16_t>(in, "activation");
  if (act > 2) throw FormatError("unknown activation code " + std::to_string(act));
  m.activation = static_cast<Activation>(act);
  m.hidden1 = detail::read_dense(in);
  m.hidden2 = detail::read_dense(in);
  m.head = detail::read_head_record(in);
  if (m.hidden2.weights.cols() != m.hidden1.weights.rows() || m.head.weights.cols() != m.hidden2.weights.rows()) {
    throw FormatError("inconsistent layer shapes");
  }
  return m;
}

template <typename Model>
void save_model_file(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_model(out, model);
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline SoftmaxHead load_softmax_head_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_softmax_head(in);
}

}  // namespace irp
