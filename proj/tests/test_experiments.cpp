#include <gtest/gtest.h>

#include "lasso_audit/lasso_audit.hpp"
#include "test_util.hpp"

using namespace lasso_audit;

namespace {

GeneratorSpec spec(GeneratorKind k, Index p, double rho = 0.0, Index s = 0) {
  GeneratorSpec sp;
  sp.kind = k;
  sp.p = p;
  sp.rho = rho;
  sp.s = s;
  return sp;
}

void expect_code(const std::function<void()>& f, ErrorCode c) {
  try {
    f();
    ADD_FAILURE() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), c);
  }
}

}  // namespace

TEST(Generators, ClosedFormSpectra) {
  EXPECT_EQ(generate_gram(spec(GeneratorKind::identity, 4)).matrix(), Mat::Identity(4, 4));
  const Mat eq = generate_gram(spec(GeneratorKind::equicorrelation, 5, 0.3)).matrix();
  EXPECT_NEAR(oracle::eig_min(eq), 0.7, 1e-12);
  EXPECT_NEAR(oracle::eig_max(eq), 1 + 4 * 0.3, 1e-12);
  const Mat tp = generate_gram(spec(GeneratorKind::toeplitz_geometric, 6, 0.5)).matrix();
  EXPECT_DOUBLE_EQ(tp(1, 4), 0.125);
  EXPECT_DOUBLE_EQ(tp(5, 5), 1.0);
  auto bd = spec(GeneratorKind::block_diag, 0);
  bd.blocks = {2, 3};
  bd.block_rho = {0.1, 0.4};
  const Mat b = generate_gram(bd).matrix();
  EXPECT_EQ(b.rows(), 5);
  EXPECT_DOUBLE_EQ(b(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(b(3, 4), 0.4);
  EXPECT_DOUBLE_EQ(b(1, 2), 0.0);
}

TEST(Generators, IrrepresentableExample) {
  const double rho = 0.6;
  const GramMatrix g = generate_gram(spec(GeneratorKind::example_irr, 10, rho, 4));
  // rank-one coupling of unit vectors: spectrum {1 - rho, 1 + rho, 1, ...}
  EXPECT_NEAR(oracle::eig_min(g.matrix()), 1 - rho, 1e-12);
  EXPECT_NEAR(oracle::eig_max(g.matrix()), 1 + rho, 1e-12);
  const Mat m = g.matrix();
  const Mat a = m.block(4, 0, 6, 4) * m.topLeftCorner(4, 4).inverse();
  EXPECT_NEAR(a.cwiseAbs().rowwise().sum().maxCoeff(), rho * 2.0, 1e-12);
}

TEST(Generators, CompatibilityExample) {
  for (double rho : {0.2, 0.9}) {
    const GramMatrix g = generate_gram(spec(GeneratorKind::example_compat, 6, rho, 3));
    EXPECT_NEAR(oracle::eig_min(g.matrix()), 1 - rho, 1e-12);
  }
}

TEST(Generators, RandomPsdRankAndSeeds) {
  auto sp = spec(GeneratorKind::random_psd, 7);
  sp.rank = 3;
  sp.seed = 5;
  const Mat a = generate_gram(sp).matrix();
  EXPECT_EQ(a, generate_gram(sp).matrix());
  const Eigen::SelfAdjointEigenSolver<Mat> es(a);
  EXPECT_LE(std::abs(es.eigenvalues()(3)), 1e-12);
  EXPECT_GT(es.eigenvalues()(4), 1e-6);
  EXPECT_LE((a.diagonal() - Vec::Ones(7)).cwiseAbs().maxCoeff(), 0.0);
  sp.seed = 6;
  EXPECT_NE(a, generate_gram(sp).matrix());
}

TEST(Generators, InvalidParameters) {
  expect_code([] { generate_gram(spec(GeneratorKind::equicorrelation, 4, 1.0)); }, ErrorCode::InvalidParameter);
  expect_code([] { generate_gram(spec(GeneratorKind::example_compat, 4, 0.5, 2)); }, ErrorCode::InvalidParameter);
  expect_code([] { generate_gram(spec(GeneratorKind::example_irr, 4, 0.5, 4)); }, ErrorCode::InvalidParameter);
  expect_code([] { generate_gram(spec(GeneratorKind::gaussian_design, 4)); }, ErrorCode::InvalidParameter);
  expect_code([] {
    auto bd = spec(GeneratorKind::block_diag, 6);
    bd.blocks = {2, 3};
    generate_gram(bd);
  }, ErrorCode::InvalidParameter);
  expect_code([] { parse_generator_kind("circulant"); }, ErrorCode::InvalidParameter);
  EXPECT_EQ(parse_generator_kind("toeplitz"), GeneratorKind::toeplitz_geometric);
}

TEST(Generators, GaussianDesignProblem) {
  auto sp = spec(GeneratorKind::gaussian_design, 5);
  sp.n = 40;
  sp.seed = 3;
  sp.beta0 = Vec::Unit(5, 2);
  sp.noise_sd = 0.5;
  const auto a = std::get<NoisyProblem>(generate(sp));
  const auto b = std::get<NoisyProblem>(generate(sp));
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.Y, b.Y);
  EXPECT_LE((a.Y - a.X.col(2) - *a.epsilon).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Design, LawOfLargeNumbers) {
  const Mat pop = generate_gram(spec(GeneratorKind::toeplitz_geometric, 4, 0.5)).matrix();
  const auto d = sample_gaussian_design(40000, 4, GramMatrix(pop), 17);
  EXPECT_LE((d.sigma_hat.matrix() - pop).cwiseAbs().maxCoeff(), 0.04);
}

TEST(Design, GramIsUnbiased) {
  const Mat pop = oracle::equicorr(3, 0.4);
  Mat avg = Mat::Zero(3, 3);
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) avg += sample_gaussian_design(10, 3, GramMatrix(pop), 1000 + i).sigma_hat.matrix();
  avg /= reps;
  // each entry has variance at most 2/(10*2000)
  EXPECT_LE((avg - pop).cwiseAbs().maxCoeff(), 5 * std::sqrt(2.0 / (10.0 * reps)));
}

TEST(MonteCarlo, SingleColumnMatchesGaussianTail) {
  const std::vector<double> ts{0.5, 1.0, 2.0};
  const Index reps = 20000;
  const auto r = noise_bound_experiment(30, 1, reps, ts, 4);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double exact = std::erfc(std::sqrt(ts[k]));
    EXPECT_NEAR(r.empirical_tail[k], exact, 4 * std::sqrt(exact * (1 - exact) / reps)) << ts[k];
    EXPECT_TRUE(r.pass[k]);
  }
}

TEST(MonteCarlo, ZeroNoiseNeverExceeds) {
  const auto r = noise_bound_experiment(20, 5, 100, {0.1, 1.0}, 1, 0.0);
  for (double e : r.empirical_tail) EXPECT_EQ(e, 0.0);
}

TEST(MonteCarlo, ConcentrationPassesAndIsThreadInvariant) {
  const GramMatrix pop(oracle::equicorr(5, 0.3));
  const auto a = concentration_experiment(200, 5, pop, 200, {0.5, 1, 2}, 9, 1);
  const auto b = concentration_experiment(200, 5, pop, 200, {0.5, 1, 2}, 9, 3);
  EXPECT_EQ(a.empirical_tail, b.empirical_tail);
  for (bool ok : a.pass) EXPECT_TRUE(ok);
  for (std::size_t k = 0; k < 3; ++k) {
    const double t = a.t_values[k];
    const double x = (4 * t + 8 * std::log(5.0)) / 200;
    EXPECT_DOUBLE_EQ(a.threshold[k], std::sqrt(x) + x);
    EXPECT_DOUBLE_EQ(a.bound[k], std::min(1.0, 2 * std::exp(-t)));
  }
  expect_code([&] { concentration_experiment(200, 5, pop, 50, {1}, 9); }, ErrorCode::InvalidParameter);
  expect_code([&] { concentration_experiment(200, 5, pop, 100, {0}, 9); }, ErrorCode::InvalidParameter);
}
