#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "irp/random.hpp"
#include "irp/relative.hpp"
#include "irp/synth.hpp"
#include "oracles.hpp"

using namespace irp;

TEST(RelativeEncode, IdentityAnchors) {
  Matrix x(1, 2);
  x << 0.6, 0.8;
  const Matrix r = relative_encode(x, Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(r(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.8);
}

TEST(RelativeEncode, ExactDotProducts) {
  Matrix a(2, 2);
  a << 1, 0, std::sqrt(2.0) / 2, std::sqrt(2.0) / 2;
  Matrix x(1, 2);
  x << 1, 0;
  const Matrix r = relative_encode(x, a);
  EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
  EXPECT_NEAR(r(0, 1), std::sqrt(2.0) / 2, 1e-15);
}

TEST(RelativeEncode, MatchesDoubleLoop) {
  const Matrix x = normalize_rows(gaussian_matrix(10, 8, 1));
  const Matrix a = normalize_rows(gaussian_matrix(6, 8, 2));
  const Matrix r = relative_encode(x, a);
  ASSERT_EQ(r.rows(), 10);
  ASSERT_EQ(r.cols(), 6);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 6; ++j) EXPECT_NEAR(r(i, j), oracle::dot(x, i, a, j), 1e-12);
}

TEST(RelativeEncode, EntriesAreCosines) {
  const Matrix x = normalize_rows(gaussian_matrix(200, 5, 3));
  const Matrix a = normalize_rows(gaussian_matrix(40, 5, 4));
  const Matrix r = relative_encode(x, a);
  EXPECT_LE(r.maxCoeff(), 1.0 + 1e-9);
  EXPECT_GE(r.minCoeff(), -1.0 - 1e-9);
}

TEST(RelativeEncode, RotationInvariant) {
  const Matrix x = normalize_rows(gaussian_matrix(30, 12, 5));
  const Matrix a = normalize_rows(gaussian_matrix(20, 12, 6));
  const Matrix q = random_orthogonal(12, 12, 7);
  EXPECT_LT((relative_encode(x * q, a * q) - relative_encode(x, a)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RelativeEncode, ShapeMismatch) {
  EXPECT_THROW(relative_encode(Matrix::Ones(2, 3), Matrix::Ones(2, 4)), ShapeMismatch);
}

TEST(PseudoInverse, OrthogonalIsTranspose) {
  const Matrix q = random_orthogonal(9, 9, 8);
  EXPECT_LT((pseudo_inverse(q) - q.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PseudoInverse, TruncatesZeroSingularValue) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  const Matrix p = pseudo_inverse(m);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.0);
}

TEST(PseudoInverse, MoorePenroseIdentities) {
  for (auto [r, c] : {std::pair<Index, Index>{12, 7}, {7, 12}}) {
    const Matrix m = gaussian_matrix(r, c, static_cast<std::uint64_t>(r * 100 + c));
    const Matrix p = pseudo_inverse(m);
    EXPECT_LE((m * p * m - m).norm(), 1e-9);
    EXPECT_LE((p * m * p - p).norm(), 1e-9);
    EXPECT_LE((m * p - (m * p).transpose()).norm(), 1e-9);
    EXPECT_LE((p * m - (p * m).transpose()).norm(), 1e-9);
  }
}

TEST(PseudoInverse, CutoffDropsSmallDirections) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 1.0, 1e-3, 1e-12;
  EXPECT_DOUBLE_EQ(pseudo_inverse(m, 1e-10)(2, 2), 0.0);
  EXPECT_NEAR(pseudo_inverse(m, 1e-10)(1, 1), 1e3, 1e-6);
  EXPECT_DOUBLE_EQ(pseudo_inverse(m, 1e-2)(1, 1), 0.0);
}

TEST(PseudoInverse, RejectsBadInput) {
  EXPECT_THROW(pseudo_inverse(Matrix::Ones(2, 2), 0.0), InvalidArgument);
  EXPECT_THROW(pseudo_inverse(Matrix::Ones(2, 2), 1.0), InvalidArgument);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(pseudo_inverse(bad), SvdFailure);
}

TEST(RelativeDecode, OrthonormalRoundTrip) {
  const Matrix a = random_orthogonal(6, 6, 9).transpose();
  const Matrix x = normalize_rows(gaussian_matrix(15, 6, 10));
  const Matrix back = relative_decode(relative_encode(x, a), a);
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RelativeDecode, OverdeterminedRoundTrip) {
  const Matrix a = normalize_rows(gaussian_matrix(40, 16, 11));
  const Matrix x = normalize_rows(gaussian_matrix(100, 16, 12));
  const Matrix back = relative_decode(relative_encode(x, a), a);
  EXPECT_TRUE(is_unit_normalized(back));
  for (Index i = 0; i < x.rows(); ++i) EXPECT_GE(oracle::cosine(back, i, x, i), 1.0 - 1e-9);
}

TEST(RelativeDecode, SpanningAnchorsAcrossSizes) {
  for (Index k : {16, 17, 64}) {
    const Matrix a = normalize_rows(gaussian_matrix(k, 16, static_cast<std::uint64_t>(k)));
    const Matrix x = normalize_rows(gaussian_matrix(50, 16, 99));
    const Matrix back = relative_decode(relative_encode(x, a), a);
    for (Index i = 0; i < x.rows(); ++i) EXPECT_GE(oracle::cosine(back, i, x, i), 1.0 - 1e-8) << "k=" << k;
  }
}

TEST(RelativeDecode, RankDeficientAnchorsGiveZeroRow) {
  Matrix a(2, 2);
  a << 1, 0, 1, 0;
  Matrix x(1, 2);
  x << 0, 1;
  const Matrix r = relative_encode(x, a);
  EXPECT_DOUBLE_EQ(r.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(relative_decode(r, a), ZeroNormRow);
}

TEST(RelativeDecode, ColumnCountMustMatchAnchors) {
  EXPECT_THROW(relative_decode(Matrix::Ones(2, 3), Matrix::Identity(2, 2)), ShapeMismatch);
}

TEST(ConditionNumber, Identity) { EXPECT_NEAR(condition_number(Matrix::Identity(4, 4)), 1.0, 1e-12); }

TEST(ConditionNumber, Diagonal) {
  Matrix a(2, 2);
  a << 3, 0, 0, 1;
  EXPECT_NEAR(condition_number(a), 3.0, 1e-12);
}

TEST(ConditionNumber, MatchesEigenOracle) {
  const Matrix a = gaussian_matrix(20, 8, 13);
  const auto s = oracle::singular_values(a);
  const double expected = s.front() / s.back();
  EXPECT_NEAR(condition_number(a), expected, 1e-8 * expected);
}

TEST(ConditionNumber, InfiniteWhenRankDeficient) {
  Matrix a(3, 2);
  a << 1, 0, 1, 0, 2, 0;
  EXPECT_TRUE(std::isinf(condition_number(a)));
}

TEST(ConditionNumber, RowPermutationInvariant) {
  const Matrix a = normalize_rows(gaussian_matrix(12, 5, 14));
  Matrix b = a;
  b.row(0).swap(b.row(7));
  b.row(3).swap(b.row(11));
  EXPECT_NEAR(condition_number(a), condition_number(b), 1e-10 * condition_number(a));
}

TEST(ConditionNumber, NeedsTwoRows) { EXPECT_THROW(condition_number(Matrix::Ones(1, 3)), InvalidShape); }
