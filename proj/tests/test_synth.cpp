#include <gtest/gtest.h>

#include <set>

#include "irp/relative.hpp"
#include "irp/synth.hpp"
#include "oracles.hpp"

using namespace irp;

namespace {

double cross_space_discrepancy(const SyntheticFamily& fam) {
  const MaterializedSpace a = materialize(fam, 0);
  const MaterializedSpace b = materialize(fam, 1);
  const SpaceStats sa = compute_stats(a.anchors);
  const SpaceStats sb = compute_stats(b.anchors);
  const Matrix ra = relative_encode(center_normalize(a.embeddings, sa), center_normalize(a.anchors, sa));
  const Matrix rb = relative_encode(center_normalize(b.embeddings, sb), center_normalize(b.anchors, sb));
  return (ra - rb).norm();
}

}  // namespace

TEST(RandomOrthogonal, SquareIsOrthogonal) {
  const Matrix q = random_orthogonal(10, 10, 1);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((q * q.transpose() - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(std::abs(q.determinant()), 1.0, 1e-10);
}

TEST(RandomOrthogonal, TallHasUnitOrthogonalColumns) {
  const Matrix q = random_orthogonal(8, 32, 2);
  ASSERT_EQ(q.rows(), 32);
  ASSERT_EQ(q.cols(), 8);
  for (Index j = 0; j < 8; ++j) {
    double s = 0;
    for (Index i = 0; i < 32; ++i) s += q(i, j) * q(i, j);
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-12);
  }
  EXPECT_LT((q.transpose() * q - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RandomOrthogonal, SeededAndSignCanonical) {
  EXPECT_TRUE(random_orthogonal(6, 9, 3) == random_orthogonal(6, 9, 3));
  EXPECT_FALSE(random_orthogonal(6, 9, 3) == random_orthogonal(6, 9, 4));
  const Matrix g = gaussian_matrix(9, 6, 3);
  const Matrix r = random_orthogonal(6, 9, 3).transpose() * g;  // = R of the QR
  for (Index j = 0; j < 6; ++j) EXPECT_GT(r(j, j), 0.0);
  EXPECT_THROW(random_orthogonal(5, 4, 0), InvalidShape);
}

TEST(GenerateFamily, ShapesAndAnchors) {
  FamilySpec spec;
  spec.n = 200;
  spec.d0 = 8;
  spec.dims = {8, 12, 20};
  spec.k_anchors = 50;
  spec.num_classes = 4;
  spec.seed = 5;
  const SyntheticFamily fam = generate_family(spec);
  EXPECT_EQ(fam.ground_truth.rows(), 200);
  EXPECT_EQ(fam.ground_truth.cols(), 8);
  ASSERT_EQ(fam.spaces.size(), 3u);
  const std::set<Index> unique(fam.anchor_indices.begin(), fam.anchor_indices.end());
  EXPECT_EQ(unique.size(), 50u);
  EXPECT_LT(*unique.rbegin(), 200);
  ASSERT_EQ(fam.labels.size(), 200u);
  EXPECT_EQ(*std::max_element(fam.labels.begin(), fam.labels.end()), 3);
  for (std::size_t s = 0; s < 3; ++s) {
    const MaterializedSpace m = materialize(fam, s);
    EXPECT_EQ(m.embeddings.rows(), 200);
    EXPECT_EQ(m.embeddings.cols(), spec.dims[s]);
    EXPECT_TRUE(m.anchors == select_rows(m.embeddings, fam.anchor_indices));
    const Matrix& q = fam.spaces[s].map;
    EXPECT_LT((q * q.transpose() - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(fam.spaces[s].scale, spec.scale_min);
    EXPECT_LE(fam.spaces[s].scale, spec.scale_max);
  }
}

TEST(GenerateFamily, ClassMeansAreSeparated) {
  FamilySpec spec;
  spec.n = 4000;
  spec.d0 = 16;
  spec.dims = {16};
  spec.k_anchors = 10;
  spec.num_classes = 5;
  const SyntheticFamily fam = generate_family(spec);
  std::vector<Vector> means(5, Vector::Zero(16));
  for (Index i = 0; i < spec.n; ++i) means[static_cast<std::size_t>(fam.labels[static_cast<std::size_t>(i)])] += fam.ground_truth.row(i).transpose();
  for (auto& m : means) m /= 800.0;
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) EXPECT_NEAR((means[a] - means[b]).norm(), kClassSeparation, 0.3);
}

TEST(GenerateFamily, RejectsInvalidSpecs) {
  FamilySpec spec;
  spec.dims = {16, 64};
  EXPECT_THROW(generate_family(spec), InvalidShape);  // 16 < d0 = 32
  spec = FamilySpec{};
  spec.k_anchors = spec.n + 1;
  EXPECT_THROW(generate_family(spec), InvalidShape);
  spec = FamilySpec{};
  spec.dims = {};
  EXPECT_THROW(generate_family(spec), InvalidShape);
  spec = FamilySpec{};
  spec.sigma = -1;
  EXPECT_THROW(generate_family(spec), InvalidArgument);
}

TEST(GenerateFamily, NoiselessRelativeEncodingsAgree) {
  FamilySpec spec;
  spec.n = 300;
  spec.d0 = 16;
  spec.dims = {24, 40};
  spec.k_anchors = 64;
  spec.seed = 6;
  EXPECT_LT(cross_space_discrepancy(generate_family(spec)), 1e-8);
}

TEST(GenerateFamily, NoiseIncreasesDiscrepancy) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FamilySpec spec;
    spec.n = 300;
    spec.d0 = 16;
    spec.dims = {24, 40};
    spec.k_anchors = 64;
    spec.seed = seed;
    const double clean = cross_space_discrepancy(generate_family(spec));
    spec.sigma = 0.5;
    EXPECT_GT(cross_space_discrepancy(generate_family(spec)), clean);
  }
}

TEST(Materialize, FollowsFamilyEquation) {
  FamilySpec spec;
  spec.n = 40;
  spec.d0 = 6;
  spec.dims = {9};
  spec.k_anchors = 5;
  spec.sigma = 0.3;
  spec.seed = 7;
  const SyntheticFamily fam = generate_family(spec);
  const SpaceTransform& t = fam.spaces[0];
  const Matrix noise = gaussian_matrix(40, 6, t.noise_seed, 0.3);
  const Matrix expected = (((fam.ground_truth + noise) * t.map) * t.scale).rowwise() + t.translation;
  EXPECT_LT((materialize(fam, 0).embeddings - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(materialize(fam, 1), InvalidArgument);
}

TEST(Materialize, IdentityTransformReproducesGroundTruth) {
  FamilySpec spec;
  spec.n = 30;
  spec.d0 = 5;
  spec.dims = {5};
  spec.k_anchors = 4;
  SyntheticFamily fam = generate_family(spec);
  fam.spaces[0].map = Matrix::Identity(5, 5);
  fam.spaces[0].scale = 1.0;
  fam.spaces[0].translation = RowVector::Zero(5);
  EXPECT_TRUE(materialize(fam, 0).embeddings == fam.ground_truth);
}

TEST(Materialize, Deterministic) {
  FamilySpec spec;
  spec.n = 100;
  spec.d0 = 8;
  spec.dims = {10, 12};
  spec.sigma = 0.2;
  spec.k_anchors = 20;
  spec.seed = 8;
  const SyntheticFamily f1 = generate_family(spec);
  const SyntheticFamily f2 = generate_family(spec);
  EXPECT_TRUE(materialize(f1, 1).embeddings == materialize(f2, 1).embeddings);
  EXPECT_EQ(f1.anchor_indices, f2.anchor_indices);
}
