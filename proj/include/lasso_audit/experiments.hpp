#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "lasso.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lasso_audit {

// ---------------------------------------------------------------- generators

enum class GeneratorKind {
  identity,
  equicorrelation,
  toeplitz_geometric,
  block_diag,
  example_irr,
  example_compat,
  random_psd,
  gaussian_design
};

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::identity: return "identity";
    case GeneratorKind::equicorrelation: return "equicorrelation";
    case GeneratorKind::toeplitz_geometric: return "toeplitz_geometric";
    case GeneratorKind::block_diag: return "block_diag";
    case GeneratorKind::example_irr: return "example_irr";
    case GeneratorKind::example_compat: return "example_compat";
    case GeneratorKind::random_psd: return "random_psd";
    case GeneratorKind::gaussian_design: return "gaussian_design";
  }
  return "identity";
}

inline GeneratorKind parse_generator_kind(const std::string& s) {
  for (GeneratorKind k : {GeneratorKind::identity, GeneratorKind::equicorrelation, GeneratorKind::toeplitz_geometric,
                          GeneratorKind::block_diag, GeneratorKind::example_irr, GeneratorKind::example_compat,
                          GeneratorKind::random_psd, GeneratorKind::gaussian_design})
    if (s == to_string(k)) return k;
  if (s == "toeplitz") return GeneratorKind::toeplitz_geometric;
  throw Error(ErrorCode::InvalidParameter, "unknown generator kind '" + s + "'");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::identity;
  Index p = 0;
  Index s = 0;    // example_irr / example_compat: S = {0..s-1}
  Index n = 0;    // gaussian_design
  double rho = 0.0;
  std::vector<Index> blocks;       // block_diag sizes; each block equicorrelated with rho
  std::vector<double> block_rho;   // optional per-block rho
  Index rank = 0;                  // random_psd; 0 means full rank
  std::uint64_t seed = 0;
  std::optional<Vec> b1, b2;       // example_irr overrides
  std::optional<Mat> sigma22;      // example_irr override
  std::optional<Mat> population;   // gaussian_design; identity if absent
  std::optional<Vec> beta0;        // gaussian_design
  double noise_sd = 1.0;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

inline Mat equicorrelation_matrix(Index p, double rho) {
  Mat m = Mat::Constant(p, p, rho);
  m.diagonal().setOnes();
  return m;
}

}  // namespace detail

inline GramMatrix generate_gram(const GeneratorSpec& sp) {
  using detail::require;
  switch (sp.kind) {
    case GeneratorKind::identity:
      require(sp.p >= 1, "p must be >= 1");
      return GramMatrix(Mat::Identity(sp.p, sp.p));
    case GeneratorKind::equicorrelation:
      require(sp.p >= 1, "p must be >= 1");
      require(sp.rho >= 0.0 && sp.rho < 1.0, "need 0 <= rho < 1");
      return GramMatrix(detail::equicorrelation_matrix(sp.p, sp.rho));
    case GeneratorKind::toeplitz_geometric: {
      require(sp.p >= 1, "p must be >= 1");
      require(sp.rho >= 0.0 && sp.rho < 1.0, "need 0 <= rho < 1");
      Mat m(sp.p, sp.p);
      for (Index j = 0; j < sp.p; ++j)
        for (Index k = 0; k < sp.p; ++k) m(j, k) = std::pow(sp.rho, static_cast<double>(std::abs(j - k)));
      return GramMatrix(std::move(m));
    }
    case GeneratorKind::block_diag: {
      require(!sp.blocks.empty(), "block sizes required");
      require(sp.block_rho.empty() || sp.block_rho.size() == sp.blocks.size(), "one rho per block");
      Index p = 0;
      for (Index b : sp.blocks) {
        require(b >= 1, "block sizes must be >= 1");
        p += b;
      }
      require(sp.p == 0 || sp.p == p, "p must equal the sum of block sizes");
      Mat m = Mat::Zero(p, p);
      Index at = 0;
      for (std::size_t i = 0; i < sp.blocks.size(); ++i) {
        const double r = sp.block_rho.empty() ? sp.rho : sp.block_rho[i];
        require(r >= 0.0 && r < 1.0, "need 0 <= rho < 1");
        m.block(at, at, sp.blocks[i], sp.blocks[i]) = detail::equicorrelation_matrix(sp.blocks[i], r);
        at += sp.blocks[i];
      }
      return GramMatrix(std::move(m));
    }
    case GeneratorKind::example_irr: {
      require(sp.s >= 1 && sp.p > sp.s, "need 1 <= s < p");
      require(sp.rho >= 0.0 && sp.rho < 1.0, "need 0 <= rho < 1");
      const Index q = sp.p - sp.s;
      Vec b1 = sp.b1 ? *sp.b1 : Vec(Vec::Constant(sp.s, 1.0 / std::sqrt(static_cast<double>(sp.s))));
      Vec b2 = sp.b2 ? *sp.b2 : Vec(Vec::Unit(q, 0));
      require(b1.size() == sp.s && b2.size() == q, "b1 has length s, b2 length p-s");
      require(std::abs(b1.norm() - 1.0) < 1e-12 && std::abs(b2.norm() - 1.0) < 1e-12, "b1, b2 must be unit vectors");
      Mat s22 = sp.sigma22 ? *sp.sigma22 : Mat(Mat::Identity(q, q));
      require(s22.rows() == q && s22.cols() == q, "sigma22 must be (p-s)x(p-s)");
      require((s22.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12, "sigma22 needs unit diagonal");
      Mat m(sp.p, sp.p);
      m.topLeftCorner(sp.s, sp.s).setIdentity();
      m.bottomLeftCorner(q, sp.s) = sp.rho * b2 * b1.transpose();
      m.topRightCorner(sp.s, q) = m.bottomLeftCorner(q, sp.s).transpose();
      m.bottomRightCorner(q, q) = s22;
      return GramMatrix(std::move(m));
    }
    case GeneratorKind::example_compat: {
      require(sp.s > 2 && sp.p >= sp.s, "need 2 < s <= p");
      require(sp.rho >= 0.0 && sp.rho < 1.0, "need 0 <= rho < 1");
      Mat m = Mat::Identity(sp.p, sp.p);
      m(0, 1) = m(1, 0) = sp.rho;
      return GramMatrix(std::move(m));
    }
    case GeneratorKind::random_psd: {
      require(sp.p >= 1, "p must be >= 1");
      const Index r = sp.rank == 0 ? sp.p : sp.rank;
      require(r >= 1 && r <= sp.p, "need 1 <= rank <= p");
      CounterRng rng(sp.seed);
      Mat a(sp.p, r);
      for (Index j = 0; j < sp.p; ++j)
        for (Index k = 0; k < r; ++k) a(j, k) = rng.normal();
      Mat m = a * a.transpose();
      const Vec d = m.diagonal().cwiseSqrt().cwiseInverse();
      m = d.asDiagonal() * m * d.asDiagonal();
      m = 0.5 * (m + m.transpose()).eval();
      m.diagonal().setOnes();
      return GramMatrix(std::move(m));
    }
    case GeneratorKind::gaussian_design:
      throw Error(ErrorCode::InvalidParameter, "gaussian_design produces a design, not a Gram matrix");
  }
  throw Error(ErrorCode::InvalidParameter, "unknown generator kind");
}

struct GaussianDesign {
  Mat X;
  GramMatrix sigma_hat;
};

// rows i.i.d. N(0, population), drawn through the symmetric square root
inline GaussianDesign sample_gaussian_design(Index n, Index p, const GramMatrix& population, std::uint64_t seed) {
  detail::require(n >= 1 && p >= 1, "need n, p >= 1");
  detail::require(population.p() == p, "population must be p x p");
  const Mat root = sym_sqrt(population.matrix());
  CounterRng rng(seed);
  Mat z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  Mat x = z * root;
  Mat s = x.transpose() * x / static_cast<double>(n);
  s = 0.5 * (s + s.transpose()).eval();
  return {std::move(x), GramMatrix(std::move(s))};
}

using Generated = std::variant<GramMatrix, NoisyProblem>;

inline Generated generate(const GeneratorSpec& sp) {
  if (sp.kind != GeneratorKind::gaussian_design) return generate_gram(sp);
  detail::require(sp.n >= 1 && sp.p >= 1, "need n, p >= 1");
  detail::require(sp.noise_sd >= 0.0, "noise_sd must be >= 0");
  const GramMatrix pop = sp.population ? GramMatrix(*sp.population) : GramMatrix(Mat::Identity(sp.p, sp.p));
  GaussianDesign d = sample_gaussian_design(sp.n, sp.p, pop, sp.seed);
  NoisyProblem np;
  np.X = std::move(d.X);
  const Vec b0 = sp.beta0 ? *sp.beta0 : Vec(Vec::Zero(sp.p));
  detail::require(b0.size() == sp.p, "beta0 must have length p");
  CounterRng rng = CounterRng(sp.seed).derive(0xE5);
  Vec eps = sp.noise_sd * rng.normal_vector(sp.n);
  np.Y = np.X * b0 + eps;
  np.beta0 = b0;
  np.epsilon = std::move(eps);
  return np;
}

// ---------------------------------------------------------------- Monte Carlo

inline double lambda_tilde(double t, Index n, Index p) {
  const double a = (4.0 * t + 8.0 * std::log(static_cast<double>(p))) / static_cast<double>(n);
  return std::sqrt(a) + a;
}

struct MonteCarloResult {
  std::string experiment;
  Index reps = 0;
  Index n = 0;
  Index p = 0;
  std::uint64_t seed = 0;
  std::vector<double> t_values;
  std::vector<double> threshold;      // lambda_tilde(t) or lambda0(t)
  std::vector<double> empirical_tail; // frequency of the bad event
  std::vector<double> bound;          // 2 exp(-t)
  std::vector<double> slack;          // 3 sigma + 1/reps
  std::vector<bool> pass;
};

namespace detail {

inline void finish_mc(MonteCarloResult& r, const std::vector<std::vector<char>>& bad) {
  const double reps = static_cast<double>(r.reps);
  for (std::size_t k = 0; k < r.t_values.size(); ++k) {
    double count = 0.0;
    for (const auto& rep : bad) count += rep[k];
    const double emp = count / reps;
    const double b = std::min(1.0, 2.0 * std::exp(-r.t_values[k]));
    const double sl = 3.0 * std::sqrt(b * (1.0 - b) / reps) + 1.0 / reps;
    r.empirical_tail.push_back(emp);
    r.bound.push_back(b);
    r.slack.push_back(sl);
    r.pass.push_back(emp <= b + sl);
  }
}

inline void check_mc_args(Index n, Index p, Index reps, const std::vector<double>& t_list) {
  require(n >= 1 && p >= 1, "need n, p >= 1");
  require(reps >= 100, "reps must be >= 100");
  require(!t_list.empty(), "t list is empty");
  for (double t : t_list) require(t > 0.0, "t values must be > 0");
}

}  // namespace detail

// event: d_inf(Sigma^, Sigma) >= lambda_tilde(t)
inline MonteCarloResult concentration_experiment(Index n, Index p, const GramMatrix& population, Index reps,
                                                 const std::vector<double>& t_list, std::uint64_t seed,
                                                 unsigned threads = 1) {
  detail::check_mc_args(n, p, reps, t_list);
  detail::require(population.p() == p, "population must be p x p");
  MonteCarloResult r;
  r.experiment = "concentration";
  r.reps = reps;
  r.n = n;
  r.p = p;
  r.seed = seed;
  r.t_values = t_list;
  for (double t : t_list) r.threshold.push_back(lambda_tilde(t, n, p));
  const CounterRng root(seed);
  std::vector<std::vector<char>> bad(static_cast<std::size_t>(reps), std::vector<char>(t_list.size(), 0));
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t i) {
    const GaussianDesign d = sample_gaussian_design(n, p, population, root.derive(i).key());
    const double dist = d_infinity(d.sigma_hat, population);
    for (std::size_t k = 0; k < t_list.size(); ++k) bad[i][k] = dist >= r.threshold[k];
  });
  detail::finish_mc(r, bad);
  return r;
}

// fixed design with unit column norms; event: 2 max_j |(psi_j, eps)_n| > lambda0(t)
inline MonteCarloResult noise_bound_experiment(Index n, Index p, Index reps, const std::vector<double>& t_list,
                                               std::uint64_t seed, double noise_sd = 1.0, unsigned threads = 1) {
  detail::check_mc_args(n, p, reps, t_list);
  detail::require(noise_sd >= 0.0, "noise_sd must be >= 0");
  MonteCarloResult r;
  r.experiment = "noise_bound";
  r.reps = reps;
  r.n = n;
  r.p = p;
  r.seed = seed;
  r.t_values = t_list;
  for (double t : t_list) r.threshold.push_back(lambda0_bound(t, n, p));
  const CounterRng root(seed);
  Mat x = sample_gaussian_design(n, p, GramMatrix(Mat::Identity(p, p)), root.derive(0).key()).X;
  for (Index j = 0; j < p; ++j) {
    const double nrm = x.col(j).norm() / std::sqrt(static_cast<double>(n));
    if (nrm > 0.0) x.col(j) /= nrm;
  }
  std::vector<std::vector<char>> bad(static_cast<std::size_t>(reps), std::vector<char>(t_list.size(), 0));
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t i) {
    CounterRng rng = root.derive(i + 1);
    const Vec eps = noise_sd * rng.normal_vector(n);
    const double stat = 2.0 * (x.transpose() * eps).cwiseAbs().maxCoeff() / static_cast<double>(n);
    for (std::size_t k = 0; k < t_list.size(); ++k) bad[i][k] = stat > r.threshold[k];
  });
  detail::finish_mc(r, bad);
  return r;
}

}  // namespace lasso_audit
