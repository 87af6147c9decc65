#pragma once

// Command-line front end. run_cli parses arguments and runs one subcommand:
//
//   synth      write a synthetic family of spaces, anchor indices and labels
//   translate  translate embeddings between two spaces through shared anchors
//   sweep      translate over an (omega, delta, seed) grid, one CSV row per cell
//   stitch     zero-shot / absolute / non-stitch accuracy for every space pair
//   rescale    classifier accuracy against the rescale factor, per activation
//   stats      row norm histograms
//
// Every command writes a run manifest. Exit codes: 0 success, 1 usage,
// 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "irp/anchors.hpp"
#include "irp/classify.hpp"
#include "irp/experiments.hpp"
#include "irp/io.hpp"
#include "irp/synth.hpp"
#include "irp/translator.hpp"

namespace irp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

namespace detail {

template <typename F>
auto in_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ContextError(context, e);
  }
}

inline Matrix load_in_context(const std::string& role, const std::string& path) {
  return in_context(role, [&] { return load_embeddings(path); });
}

inline std::string manifest_path(const std::string& explicit_path, const std::string& out) {
  return explicit_path.empty() ? out + ".manifest.txt" : explicit_path;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

template <typename T>
std::string join_list(const std::vector<T>& v) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s << ',';
    if constexpr (std::is_floating_point_v<T>) {
      s << format_double(v[i]);
    } else {
      s << v[i];
    }
  }
  return s.str();
}

inline std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline std::ofstream open_csv(const std::string& path) { return open_output(path); }

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

struct TranslationFlags {
  std::size_t omega = 8;
  double delta = 0.65;
  std::uint64_t seed = 0;
  double cutoff = kDefaultCutoff;
  std::string prune_on = "source";
  bool completion = false;
  std::size_t threads = 1;

  void add(CLI::App& cmd) {
    cmd.add_option("--omega", omega, "number of pruned anchor subspaces")->capture_default_str();
    cmd.add_option("--delta", delta, "pruning threshold on the absolute cosine distance, in [0, 1)")->capture_default_str();
    cmd.add_option("--seed", seed, "master seed")->capture_default_str();
    cmd.add_option("--cutoff", cutoff, "relative singular value cutoff of the pseudo-inverse")->capture_default_str();
    cmd.add_option("--prune-on", prune_on, "anchor set the pruning runs on")
        ->check(CLI::IsMember({"source", "target"}))
        ->capture_default_str();
    cmd.add_flag("--completion", completion, "decode through anchor completion (an explicit linear map)");
    cmd.add_option("--threads", threads, "worker threads for subspace branches")->capture_default_str();
  }

  TranslationConfig config() const {
    TranslationConfig c;
    c.omega = omega;
    c.delta = delta;
    c.master_seed = seed;
    c.cutoff_ratio = cutoff;
    c.prune_on = prune_on == "target" ? PruneOn::target : PruneOn::source;
    c.use_completion = completion;
    c.threads = threads;
    c.validate();
    return c;
  }

  void record(RunManifest& m) const {
    m.set("config.omega", static_cast<std::uint64_t>(omega));
    m.set("config.delta", delta);
    m.set("config.seed", seed);
    m.set("config.cutoff", cutoff);
    m.set("config.prune_on", prune_on);
    m.set("config.completion", completion);
  }
};

/// Source and target anchor matrices, either given directly or as rows of
/// full space files picked by an index file.
struct AnchorFlags {
  std::string source;
  std::string target;
  std::string index;

  void add(CLI::App& cmd) {
    cmd.add_option("--source-anchors", source, "source anchor embeddings (or full source space with --anchor-index)")->required();
    cmd.add_option("--target-anchors", target, "target anchor embeddings (or full target space with --anchor-index)")->required();
    cmd.add_option("--anchor-index", index, "row indices selecting the anchors from the anchor files");
  }

  ParallelAnchors load(RunManifest& m) const {
    Matrix src = load_in_context("source anchors", source);
    Matrix tgt = load_in_context("target anchors", target);
    m.add_input("source_anchors", source);
    m.add_input("target_anchors", target);
    if (!index.empty()) {
      const auto idx = in_context("anchor index", [&] { return load_indices(index); });
      m.add_input("anchor_index", index);
      auto pick = [&](const Matrix& full, const std::string& path) {
        for (auto i : idx) {
          if (i >= full.rows()) {
            throw InvalidArgument("anchor index " + std::to_string(i) + " out of range for '" + path + "' with " +
                                  std::to_string(full.rows()) + " rows");
          }
        }
        return select_rows(full, idx);
      };
      src = pick(src, source);
      tgt = pick(tgt, target);
    }
    ParallelAnchors anchors;
    in_context("source anchors '" + source + "'", [&] { anchors.add_space("source", src); return 0; });
    in_context("target anchors '" + target + "'", [&] { anchors.add_space("target", tgt); return 0; });
    return anchors;
  }
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  FamilySpec spec{2048, 32, {48, 64}, 0.0, 10, 256, 0, 0.5, 2.0, 1.0};
  std::string out_dir;
  std::string format = "binary";
};

inline void add_synth(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "write a synthetic family of parallel spaces");
  cmd->add_option("--n", a.spec.n, "samples")->capture_default_str();
  cmd->add_option("--d0", a.spec.d0, "ground-truth dimension")->capture_default_str();
  cmd->add_option("--dims", a.spec.dims, "comma-separated space dimensions, each >= d0")->delimiter(',')->capture_default_str();
  cmd->add_option("--sigma", a.spec.sigma, "noise stddev added to the ground truth per space")->capture_default_str();
  cmd->add_option("--classes", a.spec.num_classes, "number of class blobs (1 = no labels)")->capture_default_str();
  cmd->add_option("--anchors", a.spec.k_anchors, "anchor count")->capture_default_str();
  cmd->add_option("--seed", a.spec.seed, "seed")->capture_default_str();
  cmd->add_option("--scale-min", a.spec.scale_min, "lower bound of per-space scales")->capture_default_str();
  cmd->add_option("--scale-max", a.spec.scale_max, "upper bound of per-space scales")->capture_default_str();
  cmd->add_option("--translation-std", a.spec.translation_std, "stddev of per-space translations")->capture_default_str();
  cmd->add_option("--out-dir", a.out_dir, "output directory")->required();
  cmd->add_option("--format", a.format, "embedding file format")->check(CLI::IsMember({"binary", "csv"}))->capture_default_str();
}

inline int run_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticFamily fam = generate_family(a.spec);
  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  RunManifest m;
  m.set("command", "synth");
  m.set("config.n", static_cast<std::int64_t>(a.spec.n));
  m.set("config.d0", static_cast<std::int64_t>(a.spec.d0));
  m.set("config.dims", join_list(a.spec.dims));
  m.set("config.sigma", a.spec.sigma);
  m.set("config.classes", static_cast<std::int64_t>(a.spec.num_classes));
  m.set("config.anchors", static_cast<std::int64_t>(a.spec.k_anchors));
  m.set("config.seed", a.spec.seed);
  m.set("config.scale_min", a.spec.scale_min);
  m.set("config.scale_max", a.spec.scale_max);
  m.set("config.translation_std", a.spec.translation_std);
  const std::string ext = a.format == "csv" ? ".csv" : ".irp";
  for (std::size_t s = 0; s < fam.spaces.size(); ++s) {
    const std::string path = (dir / ("space_" + std::to_string(s) + ext)).string();
    save_embeddings(path, materialize(fam, s).embeddings);
    m.set("output.space_" + std::to_string(s), path);
    m.set("output.space_" + std::to_string(s) + ".scale", fam.spaces[s].scale);
    out << "wrote " << path << " (" << a.spec.n << "x" << a.spec.dims[s] << ")\n";
  }
  const std::string idx_path = (dir / "anchors.idx").string();
  save_indices(idx_path, fam.anchor_indices);
  m.set("output.anchor_index", idx_path);
  out << "wrote " << idx_path << " (" << fam.anchor_indices.size() << " anchors)\n";
  if (!fam.labels.empty()) {
    const std::string labels_path = (dir / "labels.txt").string();
    save_labels(labels_path, fam.labels);
    m.set("output.labels", labels_path);
    out << "wrote " << labels_path << '\n';
  }
  m.save((dir / "manifest.txt").string());
  return kExitOk;
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
  std::string input;
  AnchorFlags anchors;
  std::string out;
  std::string reference;
  std::string manifest;
  TranslationFlags flags;
  bool timing = false;
};

inline void add_translate(CLI::App& app, TranslateArgs& a) {
  auto* cmd = app.add_subcommand("translate", "translate source embeddings into the target space");
  cmd->add_option("--input", a.input, "source embeddings to translate")->required();
  a.anchors.add(*cmd);
  cmd->add_option("--out", a.out, "translated embeddings (.irp or .csv)")->required();
  cmd->add_option("--reference", a.reference, "true target embeddings of the same rows, for the similarity score");
  cmd->add_option("--manifest", a.manifest, "manifest path (default: <out>.manifest.txt)");
  a.flags.add(*cmd);
  cmd->add_flag("--timing", a.timing, "record wall-clock time (makes the manifest run-dependent)");
}

inline void record_report(RunManifest& m, const TranslationReport& r, bool timing) {
  if (r.reconstruction_similarity) m.set("metric.reconstruction_similarity", *r.reconstruction_similarity);
  m.set("metric.mean_condition", r.mean_condition());
  m.set("metric.mean_anchors_after_pruning", r.mean_anchor_count());
  m.set("metric.per_subspace_condition", join(r.per_subspace_condition));
  m.set("metric.anchors_after_pruning", join(r.anchors_after_pruning));
  m.set("metric.relative_residual", r.relative_residual);
  m.set("metric.output_scale", r.output_scale);
  if (timing) m.set("metric.elapsed_seconds", std::chrono::duration<double>(r.elapsed).count());
}

inline int run_translate(const TranslateArgs& a, std::ostream& out) {
  const TranslationConfig config = a.flags.config();
  RunManifest m;
  m.set("command", "translate");
  a.flags.record(m);
  const Matrix x = load_in_context("input", a.input);
  m.add_input("input", a.input);
  const ParallelAnchors anchors = a.anchors.load(m);
  std::optional<Matrix> reference;
  if (!a.reference.empty()) {
    reference = load_in_context("reference", a.reference);
    m.add_input("reference", a.reference);
  }
  const Translation t = translate(x, anchors, "source", "target", config, reference ? &*reference : nullptr);
  save_embeddings(a.out, t.output);
  m.set("output", a.out);
  m.set("output.rows", static_cast<std::int64_t>(t.output.rows()));
  m.set("output.dim", static_cast<std::int64_t>(t.output.cols()));
  m.set("metric.target_anchor_mean_norm", anchors.space("target").stats.mean_norm);
  record_report(m, t.report, a.timing);
  const std::string mpath = manifest_path(a.manifest, a.out);
  m.save(mpath);
  out << "wrote " << a.out << " (" << t.output.rows() << "x" << t.output.cols() << ")\n";
  if (t.report.reconstruction_similarity) out << "reconstruction_similarity " << format_double(*t.report.reconstruction_similarity) << '\n';
  out << "mean_condition " << format_double(t.report.mean_condition()) << '\n';
  out << "manifest " << mpath << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string input;
  AnchorFlags anchors;
  std::string reference;
  std::string head;
  std::string labels;
  std::string out;
  std::string manifest;
  std::vector<std::size_t> omegas{1, 2, 4, 8, 16};
  std::vector<double> deltas{0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::uint64_t> seeds{0};
  TranslationFlags flags;
  bool timing = false;
};

inline void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* cmd = app.add_subcommand("sweep", "translate over an omega x delta x seed grid");
  cmd->add_option("--input", a.input, "source embeddings to translate")->required();
  a.anchors.add(*cmd);
  cmd->add_option("--reference", a.reference, "true target embeddings of the same rows");
  cmd->add_option("--head", a.head, "softmax head (target space) scored on each translation; needs --labels");
  cmd->add_option("--labels", a.labels, "labels of the input rows");
  cmd->add_option("--out", a.out, "CSV report")->required();
  cmd->add_option("--manifest", a.manifest, "manifest path (default: <out>.manifest.txt)");
  cmd->add_option("--omegas", a.omegas, "comma-separated subspace counts")->delimiter(',')->capture_default_str();
  cmd->add_option("--deltas", a.deltas, "comma-separated pruning thresholds")->delimiter(',')->capture_default_str();
  cmd->add_option("--seeds", a.seeds, "comma-separated master seeds")->delimiter(',')->capture_default_str();
  cmd->add_option("--cutoff", a.flags.cutoff, "relative singular value cutoff of the pseudo-inverse")->capture_default_str();
  cmd->add_option("--prune-on", a.flags.prune_on, "anchor set the pruning runs on")
      ->check(CLI::IsMember({"source", "target"}))
      ->capture_default_str();
  cmd->add_flag("--completion", a.flags.completion, "decode through anchor completion");
  cmd->add_option("--threads", a.flags.threads, "worker threads for subspace branches")->capture_default_str();
  cmd->add_flag("--timing", a.timing, "add an elapsed_seconds column (makes output run-dependent)");
}

inline int run_sweep(const SweepArgs& a, std::ostream& out) {
  if (a.head.empty() != a.labels.empty()) throw InvalidArgument("--head and --labels go together");
  const TranslationConfig base = a.flags.config();
  RunManifest m;
  m.set("command", "sweep");
  m.set("config.omegas", join_list(a.omegas));
  m.set("config.deltas", join_list(a.deltas));
  m.set("config.seeds", join_list(a.seeds));
  m.set("config.cutoff", a.flags.cutoff);
  m.set("config.prune_on", a.flags.prune_on);
  m.set("config.completion", a.flags.completion);
  const Matrix x = load_in_context("input", a.input);
  m.add_input("input", a.input);
  const ParallelAnchors anchors = a.anchors.load(m);
  std::optional<Matrix> reference;
  if (!a.reference.empty()) {
    reference = load_in_context("reference", a.reference);
    m.add_input("reference", a.reference);
  }
  AccuracyFn evaluate;
  std::optional<SoftmaxHead> head;
  Labels labels;
  if (!a.head.empty()) {
    head = in_context("head '" + a.head + "'", [&] { return load_softmax_head_file(a.head); });
    labels = in_context("labels", [&] { return load_labels(a.labels); });
    if (static_cast<Index>(labels.size()) != x.rows()) throw LengthMismatch(labels.size(), static_cast<std::size_t>(x.rows()));
    m.add_input("head", a.head);
    m.add_input("labels", a.labels);
    evaluate = [&](const Matrix& y) { return accuracy(predict_softmax(*head, y).labels, labels); };
  }
  const SweepResult r = sweep(x, anchors, "source", "target", a.omegas, a.deltas, a.seeds, base,
                              reference ? &*reference : nullptr, evaluate);

  auto csv = open_csv(a.out);
  csv << "omega,delta,seed,reconstruction_similarity,accuracy,mean_condition,mean_anchors_after_pruning,"
         "relative_residual,output_scale,per_subspace_condition,anchors_after_pruning";
  if (a.timing) csv << ",elapsed_seconds";
  csv << '\n';
  for (const auto& row : r.rows) {
    csv << row.omega << ',' << format_double(row.delta) << ',' << row.seed << ','
        << opt_double(row.report.reconstruction_similarity) << ',' << opt_double(row.accuracy) << ','
        << format_double(row.report.mean_condition()) << ',' << format_double(row.report.mean_anchor_count()) << ','
        << format_double(row.report.relative_residual) << ',' << format_double(row.report.output_scale) << ','
        << join(row.report.per_subspace_condition) << ',' << join(row.report.anchors_after_pruning);
    if (a.timing) csv << ',' << format_double(std::chrono::duration<double>(row.report.elapsed).count());
    csv << '\n';
  }
  finish(csv, a.out);
  m.set("output", a.out);
  m.set("output.rows", static_cast<std::uint64_t>(r.rows.size()));
  m.set("metric.pearson_condition_anchors", opt_double(r.condition_anchor_pearson));
  m.set("metric.pearson_similarity_accuracy", opt_double(r.similarity_accuracy_pearson));
  const std::string mpath = manifest_path(a.manifest, a.out);
  m.save(mpath);
  out << "wrote " << a.out << " (" << r.rows.size() << " cells)\n";
  out << "pearson_condition_anchors " << opt_double(r.condition_anchor_pearson) << '\n';
  if (evaluate) out << "pearson_similarity_accuracy " << opt_double(r.similarity_accuracy_pearson) << '\n';
  out << "manifest " << mpath << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- stitch

struct StitchArgs {
  std::vector<std::string> spaces;
  std::string labels;
  std::string anchor_index;
  std::string out;
  std::string manifest;
  std::string heads_dir;
  TranslationFlags flags;
  StitchOptions bench;
};

inline void add_stitch(CLI::App& app, StitchArgs& a) {
  auto* cmd = app.add_subcommand("stitch", "zero-shot stitching accuracy across parallel spaces");
  cmd->add_option("--spaces", a.spaces, "comma-separated embedding files of the same samples")->delimiter(',')->required();
  cmd->add_option("--labels", a.labels, "labels of the samples")->required();
  cmd->add_option("--anchor-index", a.anchor_index, "row indices of the parallel anchors")->required();
  cmd->add_option("--out", a.out, "CSV report")->required();
  cmd->add_option("--manifest", a.manifest, "manifest path (default: <out>.manifest.txt)");
  cmd->add_option("--heads-dir", a.heads_dir, "also save the trained heads here");
  a.flags.add(*cmd);
  cmd->add_option("--train-fraction", a.bench.train_fraction, "fraction of rows used to train the heads")->capture_default_str();
  cmd->add_option("--epochs", a.bench.head.epochs, "head training epochs")->capture_default_str();
  cmd->add_option("--lr", a.bench.head.learning_rate, "head step size, divided by the mean squared row norm")->capture_default_str();
}

inline int run_stitch(StitchArgs a, std::ostream& out) {
  const TranslationConfig config = a.flags.config();
  a.bench.seed = a.flags.seed;
  RunManifest m;
  m.set("command", "stitch");
  a.flags.record(m);
  m.set("config.train_fraction", a.bench.train_fraction);
  m.set("config.epochs", static_cast<std::uint64_t>(a.bench.head.epochs));
  m.set("config.lr", a.bench.head.learning_rate);
  std::vector<Matrix> spaces;
  for (std::size_t i = 0; i < a.spaces.size(); ++i) {
    spaces.push_back(load_in_context("space '" + a.spaces[i] + "'", a.spaces[i]));
    m.add_input("space_" + std::to_string(i), a.spaces[i]);
  }
  Labels labels = in_context("labels", [&] { return load_labels(a.labels); });
  m.add_input("labels", a.labels);
  auto idx = in_context("anchor index", [&] { return load_indices(a.anchor_index); });
  m.add_input("anchor_index", a.anchor_index);

  const StitchBench bench(std::move(spaces), std::move(labels), std::move(idx), a.bench);
  const StitchTable table = bench.evaluate(config);

  auto csv = open_csv(a.out);
  csv << "mode,encoder,head,accuracy,reconstruction_similarity,mean_condition,mean_anchors_after_pruning\n";
  for (const auto& row : table.rows) {
    csv << to_string(row.mode) << ',' << row.encoder << ',' << row.head << ',' << opt_double(row.accuracy) << ','
        << opt_double(row.similarity) << ','
        << (row.report ? format_double(row.report->mean_condition()) : std::string("NA")) << ','
        << (row.report ? format_double(row.report->mean_anchor_count()) : std::string("NA")) << '\n';
  }
  finish(csv, a.out);
  if (!a.heads_dir.empty()) {
    std::filesystem::create_directories(a.heads_dir);
    for (std::size_t j = 0; j < bench.size(); ++j) {
      const std::string path = (std::filesystem::path(a.heads_dir) / ("head_" + std::to_string(j) + ".bin")).string();
      save_model_file(path, bench.head(j));
      m.set("output.head_" + std::to_string(j), path);
    }
  }
  m.set("output", a.out);
  m.set("metric.zero_shot_accuracy", opt_double(table.mean_off_diagonal(StitchMode::zero_shot)));
  m.set("metric.absolute_accuracy", opt_double(table.mean_off_diagonal(StitchMode::absolute)));
  m.set("metric.non_stitch_accuracy", opt_double(table.mean_off_diagonal(StitchMode::non_stitch)));
  m.set("metric.zero_shot_similarity", opt_double(table.mean_zero_shot_similarity()));
  const std::string mpath = manifest_path(a.manifest, a.out);
  m.save(mpath);
  out << "wrote " << a.out << " (" << table.rows.size() << " rows)\n";
  out << "zero_shot_accuracy " << opt_double(table.mean_off_diagonal(StitchMode::zero_shot)) << '\n';
  out << "absolute_accuracy " << opt_double(table.mean_off_diagonal(StitchMode::absolute)) << '\n';
  out << "non_stitch_accuracy " << opt_double(table.mean_off_diagonal(StitchMode::non_stitch)) << '\n';
  out << "manifest " << mpath << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- rescale

struct RescaleArgs {
  std::string input;
  std::string labels;
  std::string out;
  std::string manifest;
  double alpha_min = 0.01;
  double alpha_max = 100.0;
  std::size_t points = 17;
  bool relative = false;
  std::vector<std::string> activations{"relu", "tanh", "cosine"};
  RescaleOptions opt;
};

inline void add_rescale(CLI::App& app, RescaleArgs& a) {
  auto* cmd = app.add_subcommand("rescale", "classifier accuracy with inputs rescaled to a fixed norm");
  cmd->add_option("--input", a.input, "embeddings")->required();
  cmd->add_option("--labels", a.labels, "labels of the rows")->required();
  cmd->add_option("--out", a.out, "CSV report")->required();
  cmd->add_option("--manifest", a.manifest, "manifest path (default: <out>.manifest.txt)");
  cmd->add_option("--alpha-min", a.alpha_min, "smallest rescale factor")->capture_default_str();
  cmd->add_option("--alpha-max", a.alpha_max, "largest rescale factor")->capture_default_str();
  cmd->add_option("--points", a.points, "log-spaced factors between the bounds")->capture_default_str();
  cmd->add_flag("--relative", a.relative, "factors are multiples of the training rows' mean norm");
  cmd->add_option("--activations", a.activations, "comma-separated MLP activations")
      ->delimiter(',')
      ->check(CLI::IsMember({"relu", "tanh", "cosine"}))
      ->capture_default_str();
  cmd->add_option("--seed", a.opt.seed, "seed")->capture_default_str();
  cmd->add_option("--train-fraction", a.opt.train_fraction, "fraction of rows used for training")->capture_default_str();
  cmd->add_option("--epochs", a.opt.mlp.train.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--lr", a.opt.mlp.train.learning_rate, "step size, divided by the mean squared row norm")->capture_default_str();
  cmd->add_option("--hidden1", a.opt.mlp.hidden1, "first hidden width")->capture_default_str();
  cmd->add_option("--hidden2", a.opt.mlp.hidden2, "second hidden width")->capture_default_str();
}

inline int run_rescale(RescaleArgs a, std::ostream& out) {
  a.opt.alphas = log_space(a.alpha_min, a.alpha_max, a.points);
  a.opt.relative = a.relative;
  std::vector<Activation> acts;
  for (const auto& s : a.activations) acts.push_back(parse_activation(s));
  RunManifest m;
  m.set("command", "rescale");
  m.set("config.alpha_min", a.alpha_min);
  m.set("config.alpha_max", a.alpha_max);
  m.set("config.points", static_cast<std::uint64_t>(a.points));
  m.set("config.relative", a.relative);
  m.set("config.activations", join_list(a.activations));
  m.set("config.seed", a.opt.seed);
  m.set("config.train_fraction", a.opt.train_fraction);
  m.set("config.epochs", static_cast<std::uint64_t>(a.opt.mlp.train.epochs));
  m.set("config.lr", a.opt.mlp.train.learning_rate);
  m.set("config.hidden1", static_cast<std::int64_t>(a.opt.mlp.hidden1));
  m.set("config.hidden2", static_cast<std::int64_t>(a.opt.mlp.hidden2));
  const Matrix x = load_in_context("input", a.input);
  m.add_input("input", a.input);
  const Labels labels = in_context("labels", [&] { return load_labels(a.labels); });
  m.add_input("labels", a.labels);

  const RescaleResult r = rescale_sweep(x, labels, acts, a.opt);
  auto csv = open_csv(a.out);
  csv << "activation,alpha,accuracy\n";
  for (const auto& row : r.rows) csv << to_string(row.activation) << ',' << format_double(row.alpha) << ',' << format_double(row.accuracy) << '\n';
  finish(csv, a.out);
  m.set("output", a.out);
  m.set("metric.train_mean_scale", r.train_mean_scale);
  for (std::size_t i = 0; i < acts.size(); ++i) m.set("metric.native_accuracy." + to_string(acts[i]), r.native_accuracy[i]);
  const std::string mpath = manifest_path(a.manifest, a.out);
  m.save(mpath);
  out << "wrote " << a.out << " (" << r.rows.size() << " rows)\n";
  out << "train_mean_scale " << format_double(r.train_mean_scale) << '\n';
  out << "manifest " << mpath << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::vector<std::string> inputs;
  std::size_t bins = 20;
  double valley_sigmas = 3.0;
  std::string out;
  std::string manifest;
  std::uint64_t seed = 0;  // accepted for uniformity; stats draw no randomness
};

inline void add_stats(CLI::App& app, StatsArgs& a) {
  auto* cmd = app.add_subcommand("stats", "row norm histograms of embedding files");
  cmd->add_option("--input", a.inputs, "comma-separated embedding files")->delimiter(',')->required();
  cmd->add_option("--bins", a.bins, "histogram bins")->capture_default_str();
  cmd->add_option("--valley-sigmas", a.valley_sigmas, "counting-noise slack, in Poisson sigmas, before a dip counts as a second mode")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "CSV histogram table")->required();
  cmd->add_option("--manifest", a.manifest, "manifest path (default: <out>.manifest.txt)");
  cmd->add_option("--seed", a.seed, "unused; every command accepts one")->capture_default_str();
}

inline int run_stats(const StatsArgs& a, std::ostream& out) {
  if (a.bins < 1) throw InvalidArgument("bins must be at least 1");
  RunManifest m;
  m.set("command", "stats");
  m.set("config.bins", static_cast<std::uint64_t>(a.bins));
  m.set("config.valley_sigmas", a.valley_sigmas);
  auto csv = open_csv(a.out);
  csv << "file,bin,lo,hi,count\n";
  for (std::size_t f = 0; f < a.inputs.size(); ++f) {
    const Matrix x = load_in_context("input", a.inputs[f]);
    m.add_input(std::to_string(f), a.inputs[f]);
    const NormSummary s = summarize_norms(row_norms(x), a.bins);
    for (std::size_t b = 0; b < s.histogram.counts.size(); ++b) {
      csv << f << ',' << b << ',' << format_double(s.histogram.bin_lo(b)) << ',' << format_double(s.histogram.bin_hi(b)) << ','
          << s.histogram.counts[b] << '\n';
    }
    const std::string key = "metric." + std::to_string(f) + ".";
    const double cv = s.std / s.mean;
    const bool unimodal = s.histogram.is_unimodal(a.valley_sigmas);
    m.set(key + "min", s.min);
    m.set(key + "max", s.max);
    m.set(key + "mean", s.mean);
    m.set(key + "std", s.std);
    m.set(key + "std_over_mean", cv);
    m.set(key + "unimodal", unimodal);
    out << a.inputs[f] << ": mean " << format_double(s.mean) << " std " << format_double(s.std) << " std/mean "
        << format_double(cv) << (unimodal ? " unimodal" : " multimodal") << '\n';
  }
  finish(csv, a.out);
  m.set("output", a.out);
  const std::string mpath = manifest_path(a.manifest, a.out);
  m.save(mpath);
  out << "wrote " << a.out << '\n';
  out << "manifest " << mpath << '\n';
  return kExitOk;
}

inline int exit_code(const Error& e) { return e.kind() == ErrorKind::numerical ? kExitNumerical : kExitData; }

}  // namespace detail

/// Runs one command. args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent space translation through relative representations"};
  app.name("irp");
  app.require_subcommand(1);
  detail::SynthArgs synth;
  detail::TranslateArgs translate_args;
  detail::SweepArgs sweep_args;
  detail::StitchArgs stitch;
  detail::RescaleArgs rescale;
  detail::StatsArgs stats;
  detail::add_synth(app, synth);
  detail::add_translate(app, translate_args);
  detail::add_sweep(app, sweep_args);
  detail::add_stitch(app, stitch);
  detail::add_rescale(app, rescale);
  detail::add_stats(app, stats);
  {
    auto* sweep_cmd = app.get_subcommand("sweep");
    sweep_cmd->add_option("--seed", sweep_args.flags.seed, "unused by the grid; use --seeds");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "irp: " << e.what() << '\n';
    err << "run 'irp --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("synth")) return detail::run_synth(synth, out);
    if (app.got_subcommand("translate")) return detail::run_translate(translate_args, out);
    if (app.got_subcommand("sweep")) return detail::run_sweep(sweep_args, out);
    if (app.got_subcommand("stitch")) return detail::run_stitch(stitch, out);
    if (app.got_subcommand("rescale")) return detail::run_rescale(rescale, out);
    if (app.got_subcommand("stats")) return detail::run_stats(stats, out);
  } catch (const Error& e) {
    err << "irp: error: " << e.what() << '\n';
    return detail::exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "irp: error: " << e.what() << '\n';
    return kExitData;
  }
  err << "irp: no command given\n";
  return kExitUsage;
}

}  // namespace irp::cli
