#include <gtest/gtest.h>

#include "lasso_audit/lasso_audit.hpp"
#include "test_util.hpp"

using namespace lasso_audit;
using oracle::Set;

namespace {

IndexSet to_idx(const Set& s) { return IndexSet(s.begin(), s.end()); }

double brute_lambda2(const Mat& m, const Set& S, int N) {
  double best = kInf;
  for (const auto& n : oracle::supersets(S, static_cast<int>(m.rows()), N)) best = std::min(best, oracle::eig_min(oracle::sub(m, n, n)));
  return best;
}

double brute_delta(const Mat& m, int N) {
  double best = 0;
  for (const auto& n : oracle::subsets_of_size(static_cast<int>(m.rows()), N)) {
    const Mat b = oracle::sub(m, n, n);
    best = std::max({best, oracle::eig_max(b) - 1.0, 1.0 - oracle::eig_min(b)});
  }
  return best;
}

// every N ⊇ S with |N| <= Nmax and every M outside N with |M| <= s
double brute_theta(const Mat& m, const Set& S, int Nmax) {
  const int p = static_cast<int>(m.rows());
  double best = 0;
  for (unsigned a = 0; a < (1U << p); ++a) {
    Set n = oracle::bits(a, p);
    if (static_cast<int>(n.size()) > Nmax || !oracle::contains(n, S)) continue;
    for (unsigned b = 1; b < (1U << p); ++b) {
      if (a & b) continue;
      Set mm = oracle::bits(b, p);
      if (mm.size() > S.size()) continue;
      best = std::max(best, oracle::sigma_max(oracle::sub(m, n, mm)));
    }
  }
  return best;
}

Mat irr_matrix(const Mat& m, const Set& n) {
  const Set c = oracle::rest(n, static_cast<int>(m.rows()));
  return oracle::sub(m, c, n) * oracle::sub(m, n, n).inverse();
}

Mat example_irr(int s, int p, double rho) {
  Mat m = Mat::Identity(p, p);
  for (int k = 0; k < s; ++k) m(s, k) = m(k, s) = rho / std::sqrt(static_cast<double>(s));
  return m;
}

}  // namespace

TEST(UniformEigenvalue, KnownMatrices) {
  GramMatrix id(Mat::Identity(6, 6));
  EXPECT_DOUBLE_EQ(uniform_eigenvalue(id, ConeSpec{{1, 2}, 1, 4}).estimate, 1.0);
  GramMatrix eq(oracle::equicorr(8, 0.5));
  for (Index N : {2, 3, 5}) EXPECT_NEAR(uniform_eigenvalue(eq, ConeSpec{{0, 4}, 1, N}).estimate, 0.5, 1e-12);
  EXPECT_EQ(uniform_eigenvalue(eq, ConeSpec{{0, 4}, 1, 3}).certificate, Certificate::Exact);
}

TEST(UniformEigenvalue, MatchesExhaustiveMinimum) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Mat m = oracle::random_psd(6, seed);
    EXPECT_NEAR(uniform_eigenvalue(GramMatrix(m), ConeSpec{{1, 4}, 1, 3}).estimate, brute_lambda2(m, {1, 4}, 3), 1e-10);
  }
}

TEST(RestrictedIsometry, KnownMatrices) {
  EXPECT_DOUBLE_EQ(restricted_isometry(GramMatrix(Mat::Identity(5, 5)), 3).estimate, 0.0);
  EXPECT_NEAR(restricted_isometry(GramMatrix(oracle::equicorr(6, 0.4)), 2).estimate, 0.4, 1e-12);
  EXPECT_NEAR(restricted_isometry(GramMatrix(oracle::equicorr(7, 0.3)), 5).estimate, 1.2, 1e-12);
}

TEST(RestrictedIsometry, MatchesExhaustiveScan) {
  const Mat m = oracle::random_psd(7, 5);
  for (int N = 1; N <= 4; ++N) EXPECT_NEAR(restricted_isometry(GramMatrix(m), N).estimate, brute_delta(m, N), 1e-10);
}

TEST(RestrictedOrthogonality, ZeroWhenDecoupled) {
  EXPECT_DOUBLE_EQ(restricted_orthogonality(GramMatrix(Mat::Identity(5, 5)), ConeSpec{{0}, 1, 2}).estimate, 0.0);
  Mat m = Mat::Identity(8, 8);
  m.topLeftCorner(4, 4) = oracle::equicorr(4, 0.3);
  m.bottomRightCorner(4, 4) = oracle::equicorr(4, 0.6);
  // S and N inside the first block, M outside: every N of size 4 ⊇ {0,1} mixes blocks unless N = block
  const double v = restricted_orthogonality(GramMatrix(m), ConeSpec{{0, 1, 2, 3}, 1, 4}).estimate;
  EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(RestrictedOrthogonality, MatchesExhaustivePairs) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Mat m = oracle::random_psd(6, 40 + seed);
    EXPECT_NEAR(restricted_orthogonality(GramMatrix(m), ConeSpec{{2}, 1, 2}).estimate, brute_theta(m, {2}, 2), 1e-10);
    EXPECT_NEAR(restricted_orthogonality(GramMatrix(m), ConeSpec{{0, 3}, 1, 3}).estimate, brute_theta(m, {0, 3}, 3), 1e-10);
  }
}

TEST(ThetaUniform, Values) {
  EXPECT_DOUBLE_EQ(theta_uniform(GramMatrix(Mat::Identity(5, 5)), 1, 2).estimate, 0.0);
  EXPECT_NEAR(theta_uniform(GramMatrix(oracle::equicorr(5, 0.2)), 1, 1).estimate, 0.2, 1e-12);
  const Mat m = oracle::random_psd(5, 9);
  double best = 0;
  for (int j = 0; j < 5; ++j) best = std::max(best, brute_theta(m, {j}, 2));
  EXPECT_NEAR(theta_uniform(GramMatrix(m), 1, 2).estimate, best, 1e-10);
}

TEST(RipConstant, IdentityAndAssembly) {
  EXPECT_DOUBLE_EQ(rip_constant(GramMatrix(Mat::Identity(6, 6)), 2).estimate, 0.0);
  const Mat m = oracle::equicorr(8, 0.05);
  double tss = 0, ts2s = 0;
  for (const auto& S : oracle::subsets_of_size(8, 2)) {
    tss = std::max(tss, brute_theta(m, S, 2));
    ts2s = std::max(ts2s, brute_theta(m, S, 4));
  }
  const double expect = ts2s / (1.0 - brute_delta(m, 2) - tss);
  EXPECT_NEAR(rip_constant(GramMatrix(m), 2).estimate, expect, 1e-10);
}

TEST(RipConstant, NonPositiveDenominatorThrows) {
  try {
    rip_constant(GramMatrix(oracle::equicorr(6, 0.8)), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DenominatorNonPositive);
  }
}

TEST(WeakRip, RatioOfExactConstants) {
  EXPECT_DOUBLE_EQ(weak_rip_constant(GramMatrix(Mat::Identity(5, 5)), ConeSpec{{0}, 1, 2}).estimate, 0.0);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Mat m = oracle::random_psd(6, 70 + seed);
    const double expect = brute_theta(m, {1, 2}, 4) / brute_lambda2(m, {1, 2}, 4);
    EXPECT_NEAR(weak_rip_constant(GramMatrix(m), ConeSpec{{1, 2}, 1, 4}).estimate, expect, 1e-9);
  }
  Mat d = Mat::Identity(6, 6);
  d.topLeftCorner(3, 3) = oracle::equicorr(3, 0.5);
  d.bottomRightCorner(3, 3) = oracle::equicorr(3, 0.5);
  EXPECT_DOUBLE_EQ(weak_rip_constant(GramMatrix(d), ConeSpec{{0, 1, 2}, 1, 3}).estimate, 0.0);
}

TEST(IrrepresentableUniform, KnownValues) {
  EXPECT_DOUBLE_EQ(irrepresentable_uniform(GramMatrix(Mat::Identity(5, 5)), ConeSpec{{0, 1}, 1, 2}).estimate, 0.0);
  EXPECT_NEAR(irrepresentable_uniform(GramMatrix(example_irr(4, 12, 0.6)), ConeSpec{{0, 1, 2, 3}, 1, 4}).estimate,
              0.6 * 2.0, 1e-12);
  // Sherman-Morrison: (1-r)I + r 11' has inverse applied to 1 equal to 1/(1+(s-1)r)
  const double r = 0.5;
  const int s = 3;
  const double closed = s * r / (1 + (s - 1) * r);
  EXPECT_NEAR(irrepresentable_uniform(GramMatrix(oracle::equicorr(10, r)), ConeSpec{{0, 1, 2}, 1, 3}).estimate, closed,
              1e-12);
}

TEST(IrrepresentableUniform, MatchesExhaustiveMinimumOverSupersets) {
  for (unsigned seed = 0; seed < 15; ++seed) {
    const Mat m = oracle::random_psd(6, 300 + seed);
    double best = kInf;
    for (int size = 2; size <= 4; ++size)
      for (const auto& n : oracle::supersets({0, 3}, 6, size)) {
        const Mat a = irr_matrix(m, n);
        best = std::min(best, a.cwiseAbs().rowwise().sum().maxCoeff());
      }
    EXPECT_NEAR(irrepresentable_uniform(GramMatrix(m), ConeSpec{{0, 3}, 1, 4}).estimate, best, 1e-9);
  }
}

TEST(IrrepresentableUniform, AllSingularThrows) {
  Mat m = Mat::Ones(3, 3);
  try {
    irrepresentable_uniform(GramMatrix(m), ConeSpec{{0, 1}, 1, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllSubmatricesSingular);
  }
}

TEST(IrrepresentableSigned, IdentityHoldsWithWitnessS) {
  const auto r = irrepresentable_signed(GramMatrix(Mat::Identity(5, 5)), ConeSpec{{1, 3}, 1, 2}, IrrPart::Part2);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.witness_nset, (IndexSet{1, 3}));
  EXPECT_TRUE(irrepresentable_signed(GramMatrix(Mat::Identity(5, 5)), ConeSpec{{1, 3}, 1, 4}, IrrPart::Part3).holds);
}

TEST(IrrepresentableSigned, LargeCorrelationFailsAtSAndRecoversWithLargerN) {
  GramMatrix g(example_irr(4, 8, 0.6));
  const ConeSpec cone{{0, 1, 2, 3}, 1, 4};
  EXPECT_FALSE(irrepresentable_signed(g, cone, IrrPart::Part2).holds);
  EXPECT_TRUE(irrepresentable_signed(g, cone.with_N(5), IrrPart::Part2).holds);
  EXPECT_LT(irrepresentable_uniform(g, cone.with_N(5)).estimate, 1.0);
}

TEST(IrrepresentableSigned, MatchesExhaustiveEnumeration) {
  const Set S{1, 4};
  for (unsigned seed = 0; seed < 12; ++seed) {
    const Mat m = oracle::random_psd(6, 500 + seed);
    const double L = 1.0 + 0.25 * (seed % 3);
    // part 2
    bool p2 = false;
    for (int size = 2; size <= 3; ++size)
      for (const auto& n : oracle::supersets(S, 6, size)) {
        const Mat a = irr_matrix(m, n);
        double worst = 0;
        for (unsigned t = 0; t < (1U << n.size()); ++t) {
          Vec tau(static_cast<Index>(n.size()));
          for (std::size_t i = 0; i < n.size(); ++i) tau[static_cast<Index>(i)] = (t >> i & 1U) ? -1 : 1;
          worst = std::max(worst, (a * tau).cwiseAbs().maxCoeff());
        }
        p2 = p2 || worst < 1.0 / L;
      }
    EXPECT_EQ(irrepresentable_signed(GramMatrix(m), ConeSpec{to_idx(S), L, 3}, IrrPart::Part2).holds, p2) << seed;
    // part 3
    bool p3 = true;
    for (unsigned ts = 0; ts < 4; ++ts) {
      bool found = false;
      for (int size = 2; size <= 3 && !found; ++size)
        for (const auto& n : oracle::supersets(S, 6, size)) {
          const Mat a = irr_matrix(m, n);
          const Set extra = [&] {
            Set e;
            for (auto j : n)
              if (j != 1 && j != 4) e.push_back(j);
            return e;
          }();
          for (unsigned te = 0; te < (1U << extra.size()); ++te) {
            Vec tau(static_cast<Index>(n.size()));
            for (std::size_t i = 0; i < n.size(); ++i) {
              if (n[i] == 1) tau[static_cast<Index>(i)] = (ts & 1U) ? -1 : 1;
              else if (n[i] == 4) tau[static_cast<Index>(i)] = (ts & 2U) ? -1 : 1;
              else {
                const auto pos = std::find(extra.begin(), extra.end(), n[i]) - extra.begin();
                tau[static_cast<Index>(i)] = (te >> pos & 1U) ? -1 : 1;
              }
            }
            if ((a * tau).cwiseAbs().maxCoeff() <= 1.0 + 1e-10) found = true;
          }
        }
      p3 = p3 && found;
    }
    EXPECT_EQ(irrepresentable_signed(GramMatrix(m), ConeSpec{to_idx(S), 1, 3}, IrrPart::Part3).holds, p3) << seed;
  }
}

TEST(IrrepresentableSigned, SignCapIsEnforced) {
  EnumerationCaps caps;
  caps.signs = 8;
  EXPECT_THROW(irrepresentable_signed(GramMatrix(Mat::Identity(6, 6)), ConeSpec{{0}, 1, 4}, IrrPart::Part2, caps),
               CapExceeded);
}

TEST(IrrepresentableUniform, EqualsVertexMaximumAtS) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    GramMatrix g(oracle::random_psd(6, 800 + seed));
    const ConeSpec cone{{0, 2, 5}, 1, 3};
    const double u = irrepresentable_uniform(g, cone).estimate;
    const auto p2 = irrepresentable_signed(g, cone, IrrPart::Part2);
    EXPECT_NEAR(u, p2.value, 1e-10);
  }
}

TEST(Coherence, KnownValuesAndLoopOracle) {
  GramMatrix id(Mat::Identity(5, 5));
  EXPECT_DOUBLE_EQ(coherence(id, ConeSpec{{0, 1}, 1, 2}, CoherenceKind::mutual).estimate, 0.0);
  EXPECT_DOUBLE_EQ(coherence(id, ConeSpec{{0, 1}, 1, 2}, CoherenceKind::cumulative).estimate, 0.0);
  EXPECT_NEAR(coherence(GramMatrix(example_irr(4, 9, 0.6)), ConeSpec{{0, 1, 2, 3}, 1, 4}, CoherenceKind::mutual).estimate,
              0.6 * 2.0, 1e-12);

  const Mat m = oracle::random_psd(7, 21);
  const Set S{1, 2, 6};
  const double lam = oracle::eig_min(oracle::sub(m, S, S));
  double mx = 0, agg = 0;
  for (auto k : S) {
    double col = 0;
    for (int j = 0; j < 7; ++j) {
      if (std::find(S.begin(), S.end(), j) != S.end()) continue;
      mx = std::max(mx, std::abs(m(j, k)));
      col += std::abs(m(j, k));
    }
    agg += col * col;
  }
  GramMatrix g(m);
  EXPECT_NEAR(coherence(g, ConeSpec{to_idx(S), 1, 3}, CoherenceKind::mutual).estimate, 3 * mx / lam, 1e-10);
  EXPECT_NEAR(coherence(g, ConeSpec{to_idx(S), 1, 3}, CoherenceKind::cumulative).estimate,
              std::sqrt(3.0) * std::sqrt(agg) / lam, 1e-10);
}

TEST(Coherence, MutualDominatesColumnNormBound) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Mat m = oracle::random_psd(7, 900 + seed);
    GramMatrix g(m);
    const ConeSpec cone{{0, 3}, 1, 2};
    const double lam = oracle::eig_min(oracle::sub(m, {0, 3}, {0, 3}));
    double mid = 0;
    for (int j = 0; j < 7; ++j)
      if (j != 0 && j != 3) mid = std::max(mid, std::sqrt(m(j, 0) * m(j, 0) + m(j, 3) * m(j, 3)));
    mid *= std::sqrt(2.0) / lam;
    EXPECT_GE(coherence(g, cone, CoherenceKind::mutual).estimate, mid - 1e-12);
  }
}

TEST(BlockNorm, Values) {
  EXPECT_DOUBLE_EQ(block_norm_2q(GramMatrix(Mat::Identity(5, 5)), {0, 2}, NormQ::one).estimate, 0.0);
  Mat m = Mat::Identity(3, 3);
  m(0, 2) = m(2, 0) = 0.3;
  m(1, 2) = m(2, 1) = 0.4;
  EXPECT_NEAR(block_norm_2q(GramMatrix(m), {0, 1}, NormQ::inf).estimate, 0.5, 1e-15);
  EXPECT_NEAR(block_norm_2q(GramMatrix(m), {0, 1}, NormQ::two).estimate, 0.5, 1e-12);
}

TEST(BlockNorm, OrderingAndCrudeUpperBounds) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    GramMatrix g(oracle::random_psd(7, 1000 + seed));
    const IndexSet n{1, 5};
    const double qi = block_norm_2q(g, n, NormQ::inf).estimate;
    const double q2 = block_norm_2q(g, n, NormQ::two).estimate;
    const double q1 = block_norm_2q(g, n, NormQ::one).estimate;
    EXPECT_GE(q2, qi - 1e-12);
    EXPECT_GE(q1, q2 - 1e-12);
    const auto b1 = block_norm_2q(g, n, NormQ::one, NormMode::paper_bound);
    const auto b2 = block_norm_2q(g, n, NormQ::two, NormMode::paper_bound);
    EXPECT_EQ(b1.certificate, Certificate::CertifiedUpper);
    EXPECT_GE(b1.upper, q1 - 1e-12);
    EXPECT_GE(b2.upper, q2 - 1e-12);
    // exact (2,1) norm: brute force over sign vectors of the 5 tail columns
    const Mat b = block(g, n, Block::B12);
    double brute = 0;
    for (unsigned t = 0; t < 32; ++t) {
      Vec y(5);
      for (int i = 0; i < 5; ++i) y[i] = (t >> i & 1U) ? -1 : 1;
      brute = std::max(brute, (b * y).norm());
    }
    EXPECT_NEAR(q1, brute, 1e-12);
  }
}

TEST(Alpha, IdentityAndFormula) {
  EXPECT_DOUBLE_EQ(alpha_constant(GramMatrix(Mat::Identity(6, 6)), ConeSpec{{0, 1}, 1, 2}, 1.0).upper, 0.0);
  const Mat m = oracle::random_psd(6, 77);
  GramMatrix g(m);
  const double theta = brute_theta(m, {0, 1}, 2);
  const double delta = brute_delta(m, 2);
  const double lam = oracle::eig_min(oracle::sub(m, {0, 1}, {0, 1}));
  const double phi = 0.4;
  const double expect = (std::sqrt(2.0) * theta + std::sqrt((1 + delta) * theta)) / (phi * std::sqrt(lam));
  const auto a = alpha_constant(g, ConeSpec{{0, 1}, 1, 2}, phi);
  EXPECT_NEAR(a.upper, expect, 1e-10);
  EXPECT_EQ(a.certificate, Certificate::CertifiedUpper);
  EXPECT_THROW(alpha_constant(g, ConeSpec{{0, 1}, 1, 2}, 0.0), Error);
}

TEST(Alpha, RipArithmeticBelowOne) {
  // delta_s <= sqrt2 - 1 and theta_{s,s} <= theta_{s,2s} <= 1/16
  const double d = std::sqrt(2.0) - 1.0, t = 1.0 / 16.0;
  const double bound = std::sqrt(2.0) * (t + std::sqrt(t)) / (1.0 - d - t - t);
  EXPECT_LE(bound, 0.96);
}

TEST(Monotonicity, InN) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    GramMatrix g(oracle::random_psd(7, 1200 + seed));
    const IndexSet S{2, 4};
    double lam_prev = kInf, theta_prev = -1, delta_prev = -1;
    for (Index N : {2, 3, 4}) {
      const double lam = uniform_eigenvalue(g, ConeSpec{S, 1, N}).estimate;
      const double th = restricted_orthogonality(g, ConeSpec{S, 1, N}).estimate;
      const double de = restricted_isometry(g, N).estimate;
      EXPECT_LE(lam, lam_prev + 1e-12);
      EXPECT_GE(th, theta_prev - 1e-12);
      EXPECT_GE(de, delta_prev - 1e-12);
      EXPECT_LE(1.0 - de, lam + 1e-12);
      EXPECT_LE(lam, 1.0 + de + 1e-12);
      lam_prev = lam;
      theta_prev = th;
      delta_prev = de;
    }
  }
}
