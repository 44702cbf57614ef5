#include <set>

#include <gtest/gtest.h>

#include "lasso_audit/lasso_audit.hpp"
#include "test_util.hpp"

using namespace lasso_audit;

TEST(Block, IdentityHeadIsIdentity) {
  GramMatrix g(Mat::Identity(4, 4));
  EXPECT_TRUE(block(g, {0, 1}, Block::B11).isApprox(Mat::Identity(2, 2)));
}

TEST(Block, EquicorrelationCrossColumn) {
  GramMatrix g(oracle::equicorr(4, 0.5));
  const Mat b = block(g, {0}, Block::B21);
  ASSERT_EQ(b.rows(), 3);
  ASSERT_EQ(b.cols(), 1);
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(b(i, 0), 0.5);
}

TEST(Block, CrossBlocksMatchIndexExtraction) {
  const Mat m = oracle::random_psd(6, 11);
  GramMatrix g(m);
  const oracle::Set n{1, 3};
  const oracle::Set c = oracle::rest(n, 6);
  const Mat b21 = block(g, {1, 3}, Block::B21);
  const Mat b12 = block(g, {1, 3}, Block::B12);
  EXPECT_EQ((b21 - oracle::sub(m, c, n)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((b21 - b12.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((block(g, {1, 3}, Block::B22) - oracle::sub(m, c, c)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MinEigen, KnownValues) {
  EXPECT_NEAR(min_eigen_11(GramMatrix(Mat::Identity(5, 5)), {1, 2, 4}), 1.0, 1e-12);
  EXPECT_NEAR(min_eigen_11(GramMatrix(oracle::equicorr(6, 0.5)), {0, 2, 5}), 0.5, 1e-12);
  Mat b(2, 2);
  b << 1, 0.9, 0.9, 1;
  EXPECT_NEAR(min_eigen_11(GramMatrix(b), {0, 1}), 0.1, 1e-12);
}

TEST(MinEigen, SmallBlocksMatchCharacteristicPolynomial) {
  for (unsigned seed = 0; seed < 40; ++seed) {
    const Mat m = oracle::random_psd(3, seed);
    GramMatrix g(m);
    // 2x2: (a+d)/2 - sqrt(((a-d)/2)^2 + b^2)
    const double a = m(0, 0), d = m(1, 1), b = m(0, 1);
    EXPECT_NEAR(min_eigen_11(g, {0, 1}), 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b), 1e-9);
    // 3x3: smallest root of det(M - x I) via trigonometric form
    const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    const double q = m.trace() / 3.0;
    const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) + (m(2, 2) - q) * (m(2, 2) - q) + 2 * p1;
    const double pp = std::sqrt(p2 / 6.0);
    const Mat bm = (m - q * Mat::Identity(3, 3)) / pp;
    const double r = std::clamp(bm.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double smallest = q + 2 * pp * std::cos(phi + 2.0 * M_PI / 3.0);
    EXPECT_NEAR(min_eigen_11(g, {0, 1, 2}), smallest, 1e-9);
  }
}

TEST(Cone, SupportOnSIsInside) {
  Vec b = Vec::Zero(6);
  b[1] = 2.0;
  b[4] = -1.0;
  for (double L : {0.0, 0.5, 3.0})
    for (auto v : {ConeVariant::plain, ConeVariant::adaptive})
      EXPECT_TRUE(cone_membership(b, ConeSpec{{1, 4}, L, 2}, {1, 4}, v));
}

TEST(Cone, TailTooHeavy) {
  Vec b = Vec::Zero(5);
  b << 1, 1, 2.5, 0, 0;
  EXPECT_FALSE(cone_membership(b, ConeSpec{{0, 1}, 1.0, 2}, {0, 1}, ConeVariant::plain));
}

TEST(Cone, ZeroHeadExcludedFromPlainCone) {
  Vec b = Vec::Zero(4);
  EXPECT_FALSE(cone_membership(b, ConeSpec{{0}, 1.0, 1}, {0}, ConeVariant::plain));
}

TEST(Cone, AgreesWithDirectInequalities) {
  const ConeSpec cone{{0, 2}, 1.3, 3};
  for (unsigned seed = 0; seed < 10; ++seed) {
    Vec b = oracle::random_vec(7, 100 + seed);
    b.tail(5) *= 0.4;
    const double tail = std::abs(b[1]) + std::abs(b[3]) + std::abs(b[4]) + std::abs(b[5]) + std::abs(b[6]);
    const double head1 = std::abs(b[0]) + std::abs(b[2]);
    const double head2 = std::sqrt(b[0] * b[0] + b[2] * b[2]);
    EXPECT_EQ(cone_membership(b, cone, {0, 2}, ConeVariant::plain), tail <= 1.3 * head1);
    EXPECT_EQ(cone_membership(b, cone, {0, 2}, ConeVariant::adaptive), tail <= std::sqrt(2.0) * 1.3 * head2);
  }
}

TEST(Cone, SupersetNeedsLargestTailCoordinates) {
  Vec b(5);
  b << 1, 1, 0.3, 0.1, 0.2;
  const ConeSpec cone{{0, 1}, 1.0, 3};
  EXPECT_TRUE(cone_membership(b, cone, {0, 1, 2}, ConeVariant::plain));
  EXPECT_FALSE(cone_membership(b, cone, {0, 1, 3}, ConeVariant::plain));
}

TEST(Chunks, SortOrderAndShortLastChunk) {
  Vec b(8);
  b << 9, 9, 4, 1, 3, 2, 0.5, 0.1;
  const auto part = chunk_tail(b, ConeSpec{{0, 1}, 1.0, 2});
  ASSERT_EQ(part.chunks.size(), 3U);
  EXPECT_EQ(part.chunks[0], (IndexSet{2, 4}));
  EXPECT_EQ(part.chunks[1], (IndexSet{3, 5}));
  EXPECT_EQ(part.chunks[2], (IndexSet{6, 7}));

  Vec c = Vec::Zero(7);
  c[0] = 1;
  const auto short_part = chunk_tail(c, ConeSpec{{0, 1}, 1.0, 2});
  ASSERT_EQ(short_part.chunks.size(), 3U);
  EXPECT_EQ(short_part.chunks[0], (IndexSet{2, 3}));
  EXPECT_EQ(short_part.chunks[2], (IndexSet{6}));
}

TEST(Chunks, TailNormBoundOnRandomVectors) {
  for (unsigned seed = 0; seed < 1000; ++seed) {
    const int p = 6 + static_cast<int>(seed % 7);
    const Index s = 1 + static_cast<Index>(seed % 3);
    Vec b = oracle::random_vec(p, seed);
    IndexSet S;
    for (Index j = 0; j < s; ++j) S.push_back(j);
    const auto part = chunk_tail(b, ConeSpec{S, 1.0, s});
    IndexSet head = S;
    for (Index j : part.chunks[0]) head.push_back(j);
    double tail1 = 0, restsq = 0, rest1 = 0;
    for (Index j = s; j < p; ++j) tail1 += std::abs(b[j]);
    for (Index j = 0; j < p; ++j)
      if (std::find(head.begin(), head.end(), j) == head.end()) {
        restsq += b[j] * b[j];
        rest1 += std::abs(b[j]);
      }
    EXPECT_LE(rest1, tail1 + 1e-12);
    EXPECT_LE(std::sqrt(restsq), tail1 / std::sqrt(static_cast<double>(s)) + 1e-12);
    // chunk ordering
    for (std::size_t k = 1; k < part.chunks.size(); ++k) {
      double prev_min = kInf, cur_max = 0;
      for (Index j : part.chunks[k - 1]) prev_min = std::min(prev_min, std::abs(b[j]));
      for (Index j : part.chunks[k]) cur_max = std::max(cur_max, std::abs(b[j]));
      EXPECT_LE(cur_max, prev_min);
    }
  }
}

TEST(DInfinity, Values) {
  const Mat m = oracle::random_psd(5, 3);
  EXPECT_EQ(d_infinity(m, m), 0.0);
  Mat a = Mat::Identity(4, 4), b = a;
  b(1, 2) = b(2, 1) = 0.03;
  EXPECT_DOUBLE_EQ(d_infinity(a, b), 0.03);
  const Mat m2 = oracle::random_psd(5, 4);
  double scan = 0;
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k) scan = std::max(scan, std::abs(m(j, k) - m2(j, k)));
  EXPECT_EQ(d_infinity(m, m2), scan);
  EXPECT_THROW(d_infinity(Mat::Identity(2, 2), Mat::Identity(3, 3)), Error);
  PerturbationPair pair{GramMatrix(m), GramMatrix(m2)};
  EXPECT_EQ(pair.d_inf, scan);
}

TEST(Supersets, CountsAndCap) {
  int count = 0;
  for (auto st = enumerate_supersets(ConeSpec{{2}, 1.0, 1}, 6); st.valid(); st.advance()) {
    EXPECT_EQ(st.current(), (IndexSet{2}));
    ++count;
  }
  EXPECT_EQ(count, 1);

  std::set<IndexSet> seen;
  for (auto st = enumerate_supersets(ConeSpec{{4}, 1.0, 3}, 6); st.valid(); st.advance()) {
    EXPECT_TRUE(std::is_sorted(st.current().begin(), st.current().end()));
    EXPECT_TRUE(is_subset({4}, st.current()));
    seen.insert(st.current());
  }
  EXPECT_EQ(seen.size(), 10U);

  try {
    enumerate_supersets(ConeSpec{{0, 1}, 1.0, 4}, 10, 10);
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    EXPECT_EQ(e.needed(), 28U);
  }
}

TEST(Supersets, EnumeratesBinomialManyDistinctSets) {
  for (Index N = 2; N <= 6; ++N) {
    std::set<IndexSet> seen;
    for (auto st = enumerate_supersets(ConeSpec{{1, 5}, 1.0, N}, 8); st.valid(); st.advance()) seen.insert(st.current());
    EXPECT_EQ(seen.size(), oracle::supersets({1, 5}, 8, static_cast<int>(N)).size());
  }
}

TEST(Gram, RejectsAsymmetricAndChecksPsd) {
  Mat m = Mat::Identity(3, 3);
  m(0, 1) = 0.2;
  EXPECT_THROW(GramMatrix{m}, Error);
  Mat neg(2, 2);
  neg << 1, 2, 2, 1;
  EXPECT_THROW(checked_gram(neg), Error);
  EXPECT_NO_THROW(checked_gram(oracle::random_psd(6, 1, 3)));
}

TEST(ConeSpec, Validation) {
  EXPECT_THROW(ConeSpec({}, 1.0, 0).validate(4), Error);
  EXPECT_THROW(ConeSpec({1, 0}, 1.0, 2).validate(4), Error);
  EXPECT_THROW(ConeSpec({0, 1}, 1.0, 1).validate(4), Error);
  EXPECT_THROW(ConeSpec({0, 1}, -1.0, 2).validate(4), Error);
  EXPECT_NO_THROW(ConeSpec({0, 3}, 2.0, 4).validate(4));
}
