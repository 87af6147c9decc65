#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "irp/anchors.hpp"
#include "irp/synth.hpp"
#include "oracles.hpp"

using namespace irp;

namespace {

Matrix three_points() {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, std::sqrt(2.0) / 2, std::sqrt(2.0) / 2;
  return a;
}

// Brute-force greedy FPS: recomputes every min-distance from scratch.
std::vector<Index> brute_fps(const Matrix& a, double delta, Index start) {
  const Index k = a.rows();
  auto dist = [&](Index i, Index j) { return std::clamp(1.0 - std::abs(oracle::dot(a, i, a, j)), 0.0, 1.0); };
  std::vector<Index> sel{start};
  while (static_cast<Index>(sel.size()) < k) {
    Index best = -1;
    double best_d = -1;
    for (Index c = 0; c < k; ++c) {
      if (std::find(sel.begin(), sel.end(), c) != sel.end()) continue;
      double m = 2;
      for (Index s : sel) m = std::min(m, dist(c, s));
      if (m > best_d) {
        best_d = m;
        best = c;
      }
    }
    if (sel.size() >= 2 && best_d <= delta) break;
    sel.push_back(best);
  }
  return sel;
}

}  // namespace

TEST(Dcos, ParallelOrthogonalAndDiagonal) {
  Matrix a(4, 2);
  a << 1, 0, -1, 0, 0, 1, std::sqrt(2.0) / 2, std::sqrt(2.0) / 2;
  const Matrix d = dcos(a);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d(0, 2), 1.0);
  EXPECT_NEAR(d(0, 3), 1.0 - std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(d(0, 3), 0.29289, 1e-5);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(d(i, i), 0.0);
  EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GE(d.minCoeff(), 0.0);
  EXPECT_LE(d.maxCoeff(), 1.0);
}

TEST(FpsPrune, HandWorkedExample) {
  const PrunedSubspace s = fps_prune_from(three_points(), 0.5, 0);
  EXPECT_EQ(s.indices, (std::vector<Index>{0, 1}));
}

TEST(FpsPrune, DeltaZeroDropsOnlyDuplicates) {
  Matrix a = normalize_rows(gaussian_matrix(10, 4, 1));
  a.row(6) = a.row(2);
  a.row(8) = -a.row(4);
  const PrunedSubspace s = fps_prune_from(a, 0.0, 0);
  EXPECT_EQ(s.indices.size(), 8u);
  const std::set<Index> chosen(s.indices.begin(), s.indices.end());
  EXPECT_EQ(chosen.count(2) + chosen.count(6), 1u);
  EXPECT_EQ(chosen.count(4) + chosen.count(8), 1u);
}

TEST(FpsPrune, FloorOfTwo) {
  const PrunedSubspace s = fps_prune_from(Matrix::Identity(2, 2), 0.99, 1);
  EXPECT_EQ(s.indices, (std::vector<Index>{1, 0}));
}

TEST(FpsPrune, TiesGoToLowestIndex) {
  // From row 0, rows 1 and 2 are both orthogonal; row 1 must be chosen.
  Matrix a(3, 3);
  a << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  EXPECT_EQ(fps_prune_from(a, 0.5, 0).indices, (std::vector<Index>{0, 1, 2}));
}

TEST(FpsPrune, MatchesBruteForceGreedy) {
  const Matrix a = normalize_rows(gaussian_matrix(80, 10, 2));
  for (double delta : {0.0, 0.3, 0.6, 0.8, 0.95}) {
    for (Index start : {0, 17, 79}) {
      EXPECT_EQ(fps_prune_from(a, delta, start).indices, brute_fps(a, delta, start)) << delta << " " << start;
    }
  }
}

TEST(FpsPrune, SelectedPairsExceedDelta) {
  const Matrix a = normalize_rows(gaussian_matrix(200, 16, 3));
  for (double delta : {0.2, 0.5, 0.7}) {
    const PrunedSubspace s = fps_prune(a, delta, 5);
    const Matrix d = dcos(select_rows(a, s.indices));
    for (Index i = 0; i < d.rows(); ++i)
      for (Index j = 0; j < d.cols(); ++j) {
        if (i == j || (i < 2 && j < 2)) continue;  // the first pair is exempt
        EXPECT_GT(d(i, j), delta);
      }
    const std::set<Index> unique(s.indices.begin(), s.indices.end());
    EXPECT_EQ(unique.size(), s.indices.size());
    EXPECT_GE(s.indices.size(), 2u);
  }
}

TEST(FpsPrune, DeterministicAndRecordsInputs) {
  const Matrix a = normalize_rows(gaussian_matrix(100, 8, 4));
  const PrunedSubspace s1 = fps_prune(a, 0.6, 42);
  const PrunedSubspace s2 = fps_prune(a, 0.6, 42);
  EXPECT_EQ(s1.indices, s2.indices);
  EXPECT_EQ(s1.seed, 42u);
  EXPECT_DOUBLE_EQ(s1.delta, 0.6);
  EXPECT_DOUBLE_EQ(s1.condition, condition_number(select_rows(a, s1.indices)));
}

TEST(FpsPrune, RejectsBadArguments) {
  const Matrix a = Matrix::Identity(3, 3);
  EXPECT_THROW(fps_prune(a, 1.0, 0), InvalidArgument);
  EXPECT_THROW(fps_prune(a, -0.1, 0), InvalidArgument);
  EXPECT_THROW(fps_prune(Matrix::Identity(1, 3), 0.5, 0), InvalidShape);
}

TEST(FpsPrune, PrunedConditionUsuallyBelowFull) {
  int better = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix raw = gaussian_matrix(256, 64, split_seed(2024, static_cast<std::uint64_t>(trial)));
    const Matrix a = center_normalize(raw, compute_stats(raw));
    const PrunedSubspace s = fps_prune(a, 0.85, static_cast<std::uint64_t>(trial));
    if (s.condition <= condition_number(a)) ++better;
  }
  EXPECT_GE(better, 45);
}

TEST(MakeSubspaces, SingleIsPlainPrune) {
  const Matrix a = normalize_rows(gaussian_matrix(60, 8, 5));
  const auto subs = make_subspaces(a, 1, 0.5, 9);
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_EQ(subs[0].indices, fps_prune(a, 0.5, split_seed(9, 0)).indices);
}

TEST(MakeSubspaces, DeterministicAndSeededPerBranch) {
  const Matrix a = normalize_rows(gaussian_matrix(256, 32, 6));
  const auto s1 = make_subspaces(a, 8, 0.6, 77);
  const auto s2 = make_subspaces(a, 8, 0.6, 77);
  ASSERT_EQ(s1.size(), 8u);
  std::set<Index> uni;
  std::size_t biggest = 0;
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(s1[i].indices, s2[i].indices);
    EXPECT_EQ(s1[i].seed, split_seed(77, i));
    seeds.insert(s1[i].seed);
    uni.insert(s1[i].indices.begin(), s1[i].indices.end());
    biggest = std::max(biggest, s1[i].indices.size());
  }
  EXPECT_GE(uni.size(), biggest);
  EXPECT_EQ(seeds.size(), 8u);
}

TEST(ParallelAnchors, ValidatesCounts) {
  ParallelAnchors pa;
  pa.add_space("a", gaussian_matrix(10, 4, 1));
  pa.add_space("b", gaussian_matrix(10, 7, 2));
  EXPECT_EQ(pa.count(), 10);
  EXPECT_EQ(pa.size(), 2u);
  EXPECT_TRUE(pa.contains("b"));
  EXPECT_THROW(pa.add_space("c", gaussian_matrix(9, 4, 3)), ShapeMismatch);
  EXPECT_THROW(pa.space("missing"), MissingSpace);
  EXPECT_TRUE(is_unit_normalized(pa.space("b").unit));
}

TEST(AnchorCompletion, IdentityAnchors) {
  const CompletionTransform t = anchor_completion(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  EXPECT_LT((t.target_anchors - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.matrix - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AnchorCompletion, RecoversOrthogonalMap) {
  const Matrix s_x = normalize_rows(gaussian_matrix(30, 12, 7));
  const Matrix q = random_orthogonal(12, 12, 8);
  const CompletionTransform t = anchor_completion(s_x, s_x * q);
  const Matrix x = normalize_rows(gaussian_matrix(20, 12, 9));
  EXPECT_LT((t.apply(x) - x * q).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AnchorCompletion, ShapeContractWithFewAnchors) {
  const Matrix s_x = normalize_rows(gaussian_matrix(5, 12, 10));
  const Matrix s_y = normalize_rows(gaussian_matrix(5, 20, 11));
  const CompletionTransform t = anchor_completion(s_x, s_y);
  EXPECT_EQ(t.matrix.rows(), 20);
  EXPECT_EQ(t.matrix.cols(), 12);
  EXPECT_EQ(t.target_anchors.rows(), 12);
  EXPECT_EQ(t.target_anchors.cols(), 20);
}

TEST(AnchorCompletion, SelfCompletionReproducesAnchors) {
  const Matrix s = normalize_rows(gaussian_matrix(40, 10, 12));
  const Matrix out = anchor_completion(s, s).apply(s);
  for (Index i = 0; i < s.rows(); ++i) EXPECT_GE(oracle::cosine(out, i, s, i), 1.0 - 1e-8);
}

TEST(AnchorCompletion, RequiresParallelSubsets) {
  EXPECT_THROW(anchor_completion(Matrix::Identity(3, 3), Matrix::Identity(2, 3)), ShapeMismatch);
}
