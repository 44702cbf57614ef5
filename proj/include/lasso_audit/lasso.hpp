#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "estimators.hpp"
#include "solvers.hpp"

namespace lasso_audit {

struct LassoSolution {
  Vec beta_star;
  Vec tau_star;
  IndexSet active_set;
  double objective = kNaN;
  double kkt_residual = kNaN;
  double lambda = kNaN;
};

namespace detail {

inline LassoSolution finish_solution(const Mat& sigma, const Vec& corr, double lambda, Vec beta,
                                     double objective_const) {
  LassoSolution sol;
  const KKTCheck k = kkt_check(sigma, corr, lambda, beta);
  sol.kkt_residual = k.residual;
  sol.tau_star = k.tau;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) sol.active_set.push_back(j);
  sol.objective = lasso_objective(sigma, corr, lambda, beta) + objective_const;
  sol.lambda = lambda;
  sol.beta_star = std::move(beta);
  return sol;
}

}  // namespace detail

// residual and implied subgradient for the noiseless objective with truth beta0
inline KKTCheck kkt_residual(const GramMatrix& g, const Vec& beta0, double lambda, const Vec& beta) {
  if (beta0.size() != g.p() || beta.size() != g.p())
    throw Error(ErrorCode::DimensionMismatch, "vector length != p");
  return kkt_check(g.matrix(), g.matrix() * beta0, lambda, beta);
}

// minimizer of ||f_b - f0||^2 + lambda ||b||_1
inline LassoSolution solve_noiseless(const GramMatrix& g, const Vec& beta0, double lambda,
                                     const SolverConfig& cfg = {}) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  if (beta0.size() != g.p()) throw Error(ErrorCode::DimensionMismatch, "beta0 length != p");
  const Vec corr = g.matrix() * beta0;
  Vec beta = coordinate_descent_lasso(g.matrix(), corr, lambda, cfg);
  return detail::finish_solution(g.matrix(), corr, lambda, std::move(beta), beta0.dot(corr));
}

// ---------------------------------------------------------------- anti-projection identity

struct IdentityCheck {
  double lhs = kNaN;
  double rhs = kNaN;
  double gap = kNaN;
  double scale = 1.0;
};

inline IdentityCheck antiprojection_identity_check(const GramMatrix& g, const LassoSolution& sol,
                                                   const IndexSet& nset) {
  Mat inv;
  if (!sym_inverse(block(g, nset, Block::B11), inv))
    throw Error(ErrorCode::SingularBlock, "Sigma_11(N) is singular");
  const IndexSet comp = complement(nset, g.p());
  const Vec b2 = subvector(sol.beta_star, comp);
  const Vec tau1 = subvector(sol.tau_star, nset);
  const Mat s21 = block(g, nset, Block::B21);
  const Mat s22 = block(g, nset, Block::B22);
  IdentityCheck c;
  const Vec proj = s21.transpose() * b2;
  c.lhs = 2.0 * (b2.dot(s22 * b2) - proj.dot(inv * proj));
  c.rhs = sol.lambda * b2.dot(s21 * (inv * tau1)) - sol.lambda * b2.lpNorm<1>();
  c.gap = std::abs(c.lhs - c.rhs);
  c.scale = std::max({1.0, std::abs(c.lhs), std::abs(c.rhs), sol.lambda * b2.lpNorm<1>()});
  return c;
}

// ---------------------------------------------------------------- selection

struct SelectionReport {
  Index false_positives = 0;  // |S* \ S|
  bool contains_S = false;
  bool equals_S = false;
  double beta0_min = kNaN;
  // Part 1: uniform irrepresentable (when supplied) bounds |S* \ S| by N - s
  std::optional<bool> part1_premise;
  std::optional<bool> part1_holds;
  // Part 2 premise: |beta0|_min > lambda s / phi^2_compatible (certified lower)
  double part2_threshold = kNaN;
  bool part2_premise = false;
  // Part 3 converse, checked when S ⊆ S* and |S*| <= N
  bool part3_checked = false;
  double part3_value = kNaN;
  bool part3_holds = false;
  // sign recovery threshold lambda sqrt(N) / (2 Lambda^2(S,N))
  double sign_threshold = kNaN;
  std::optional<bool> signs_match;
  std::string note;
};

inline SelectionReport selection_report(const GramMatrix& g, const LassoSolution& sol, const ConeSpec& cone,
                                        const Vec& beta0, double phi2_compat_lower,
                                        std::optional<double> irr_uniform = std::nullopt,
                                        const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  SelectionReport r;
  const IndexSet& Sstar = sol.active_set;
  r.false_positives = static_cast<Index>(set_difference(Sstar, cone.S).size());
  r.contains_S = is_subset(cone.S, Sstar);
  r.equals_S = Sstar == cone.S;
  r.beta0_min = kInf;
  for (Index j : cone.S) r.beta0_min = std::min(r.beta0_min, std::abs(beta0[j]));
  const double s = static_cast<double>(cone.s());
  if (irr_uniform) {
    r.part1_premise = *irr_uniform < 1.0;
    r.part1_holds = r.false_positives <= cone.N - cone.s();
  }
  r.part2_threshold = phi2_compat_lower > 0.0 ? sol.lambda * s / phi2_compat_lower : kInf;
  r.part2_premise = r.beta0_min > r.part2_threshold;
  const double lam = uniform_eigenvalue_value(g, cone.S, cone.N, caps);
  r.sign_threshold = lam > 0.0 ? sol.lambda * std::sqrt(static_cast<double>(cone.N)) / (2.0 * lam) : kInf;
  r.note = "sign threshold uses lambda sqrt(N)/(2 Lambda^2(S,N)); the stated form is lambda sqrt(s)/(2 Lambda(S,N))";
  if (r.contains_S && static_cast<Index>(Sstar.size()) <= cone.N) {
    Mat m;
    if (!irrepresentable_matrix(g, Sstar, m))
      throw Error(ErrorCode::SingularBlock, "Sigma_11(S*) is singular");
    const Vec t = subvector(sol.tau_star, Sstar);
    r.part3_checked = true;
    r.part3_value = m.rows() ? (m * t).cwiseAbs().maxCoeff() : 0.0;
    r.part3_holds = r.part3_value <= 1.0 + 1e-9;
    if (r.beta0_min > r.sign_threshold) {
      bool ok = true;
      for (Index j : cone.S) ok = ok && ((beta0[j] > 0) == (sol.tau_star[j] > 0));
      r.signs_match = ok;
    }
  }
  return r;
}

// ---------------------------------------------------------------- oracle inequalities

struct OracleVerdict {
  double lhs = kNaN;  // ||f* - f0||^2 + lambda ||b*_{S^c}||_1
  double rhs = kNaN;  // lambda^2 s / phi^2
  bool holds = false;
  double empirical_phi0 = kNaN;  // phi0^2 = lambda^2 s / lhs, reported unsquared
  double l1_lhs = kNaN, l1_rhs = kNaN;
  bool l1_holds = false;
  std::optional<double> l2_lhs, l2_rhs;
  std::optional<bool> l2_holds;
  double phi2_lower = kNaN;
};

namespace detail {
inline bool leq(double a, double b) { return a <= b + 1e-9 * std::max(1.0, std::abs(b)); }
}  // namespace detail

// phi2_lower: certified lower bound on phi^2_compatible(S); phi2_2s_lower on phi^2(S,2s)
inline OracleVerdict oracle_verdict(const GramMatrix& g, const LassoSolution& sol, const ConeSpec& cone,
                                    const Vec& beta0, double phi2_lower,
                                    std::optional<double> phi2_2s_lower = std::nullopt) {
  cone.validate(g.p());
  const double lam = sol.lambda;
  const double s = static_cast<double>(cone.s());
  const Vec d = sol.beta_star - beta0;
  const IndexSet sc = complement(cone.S, g.p());
  const double pred = d.dot(g.matrix() * d);
  OracleVerdict v;
  v.phi2_lower = phi2_lower;
  v.lhs = pred + lam * l1_on(sol.beta_star, sc);
  v.rhs = phi2_lower > 0.0 ? lam * lam * s / phi2_lower : kInf;
  v.holds = detail::leq(v.lhs, v.rhs);
  v.empirical_phi0 = v.lhs > 0.0 ? std::sqrt(lam * lam * s / v.lhs) : kInf;
  v.l1_lhs = d.lpNorm<1>();
  v.l1_rhs = phi2_lower > 0.0 ? 2.0 * lam * s / phi2_lower : kInf;
  v.l1_holds = detail::leq(v.l1_lhs, v.l1_rhs);
  if (phi2_2s_lower && *phi2_2s_lower > 0.0) {
    v.l2_lhs = d.squaredNorm();
    v.l2_rhs = 2.0 * lam * lam * s / (*phi2_2s_lower * *phi2_2s_lower);
    v.l2_holds = detail::leq(*v.l2_lhs, *v.l2_rhs);
  }
  return v;
}

// ---------------------------------------------------------------- basis pursuit

struct BasisPursuitResult {
  Vec beta_lp;
  bool recovered = false;
  double value = kNaN;
  LPStatus status = LPStatus::Infeasible;
  Index constraints = 0;
};

// min ||b||_1 subject to V'(b - b0) = 0, V spanning the range of Sigma
inline BasisPursuitResult basis_pursuit_recover(const GramMatrix& g, const Vec& beta0, const SolverConfig& cfg = {}) {
  const Index p = g.p();
  if (beta0.size() != p) throw Error(ErrorCode::DimensionMismatch, "beta0 length != p");
  const SymEig e = sym_eig(g.matrix());
  const double top = e.values(p - 1);
  IndexSet keep;
  for (Index k = 0; k < p; ++k)
    if (e.values(k) > kSingularRatio * top) keep.push_back(k);
  const Index m = static_cast<Index>(keep.size());
  Mat V(p, m);
  for (Index i = 0; i < m; ++i) V.col(i) = e.vectors.col(keep[static_cast<std::size_t>(i)]);
  LPProblem lp;
  lp.c = Vec::Ones(2 * p);
  lp.A.resize(m, 2 * p);
  lp.A.leftCols(p) = V.transpose();
  lp.A.rightCols(p) = -V.transpose();
  lp.b = V.transpose() * beta0;
  SolverConfig c = cfg;
  c.max_iters = std::max(cfg.max_iters, 10000);
  const LPResult r = simplex_lp(lp, c);
  BasisPursuitResult out;
  out.status = r.status;
  out.constraints = m;
  if (r.status != LPStatus::Optimal) return out;
  out.beta_lp = r.x.head(p) - r.x.tail(p);
  out.value = out.beta_lp.lpNorm<1>();
  out.recovered = (out.beta_lp - beta0).cwiseAbs().maxCoeff() <= 1e-6;
  return out;
}

// ---------------------------------------------------------------- noisy problems

struct NoisyProblem {
  Mat X;
  Vec Y;
  std::optional<Vec> beta0;
  std::optional<Vec> epsilon;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  void validate() const {
    if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorCode::InvalidArgument, "empty design");
    if (Y.size() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "Y length != n");
    if (beta0 && beta0->size() != X.cols()) throw Error(ErrorCode::DimensionMismatch, "beta0 length != p");
    if (epsilon && epsilon->size() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "epsilon length != n");
  }

  GramMatrix gram_hat() const {
    Mat s = X.transpose() * X / static_cast<double>(n());
    s = 0.5 * (s + s.transpose()).eval();
    return GramMatrix(std::move(s));
  }
  Vec correlation() const { return X.transpose() * Y / static_cast<double>(n()); }
};

inline double lambda0_of_data(const NoisyProblem& np) {
  if (!np.epsilon) throw Error(ErrorCode::MissingNoise, "noise vector not supplied");
  np.validate();
  const Vec v = np.X.transpose() * *np.epsilon / static_cast<double>(np.n());
  return 2.0 * v.cwiseAbs().maxCoeff();
}

inline double lambda0_bound(double t, Index n, Index p) {
  if (!(t > 0.0) || n < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "need t > 0, n >= 1, p >= 1");
  return 2.0 * std::sqrt((2.0 * t + 2.0 * std::log(static_cast<double>(p))) / static_cast<double>(n));
}

inline double cone_stretch(double lambda, double lambda0) {
  return (lambda + lambda0) / (lambda - lambda0);
}

struct NoisyVerdict {
  double lambda = kNaN;
  double lambda0 = kNaN;
  double L = kNaN;
  bool premise = false;  // lambda > lambda0
  double lhs = kNaN;     // ||f^ - f0||_n^2 + (2 lambda0/(L-1)) ||b^_{S^c}||_1
  double rhs = kNaN;     // 4 (L+1)^2 lambda0^2 s / ((L-1)^2 phi^2)
  bool holds = false;
  double phi2_lower = kNaN;  // certified lower phi^2_compatible(Sigma^, L, S)
  bool cone_ok = false;      // ||b^_{S^c}||_1 <= L ||b^_S - b0_S||_1
};

struct NoisySolve {
  LassoSolution solution;
  std::optional<NoisyVerdict> verdict;  // needs beta0 and epsilon
};

inline LassoSolution solve_noisy_only(const NoisyProblem& np, double lambda, const SolverConfig& cfg = {}) {
  np.validate();
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  const GramMatrix gh = np.gram_hat();
  const Vec corr = np.correlation();
  Vec beta = coordinate_descent_lasso(gh.matrix(), corr, lambda, cfg);
  return detail::finish_solution(gh.matrix(), corr, lambda, std::move(beta),
                                 np.Y.squaredNorm() / static_cast<double>(np.n()));
}

inline NoisySolve solve_noisy(const NoisyProblem& np, const IndexSet& S, double lambda, const SolverConfig& cfg = {}) {
  NoisySolve out;
  out.solution = solve_noisy_only(np, lambda, cfg);
  if (!np.beta0 || !np.epsilon) return out;
  const GramMatrix gh = np.gram_hat();
  NoisyVerdict v;
  v.lambda = lambda;
  v.lambda0 = lambda0_of_data(np);
  v.premise = lambda > v.lambda0;
  const Vec& b0 = *np.beta0;
  const Vec& bh = out.solution.beta_star;
  const IndexSet sc = complement(S, np.p());
  const Vec d = bh - b0;
  const double pred = d.dot(gh.matrix() * d);
  const double s = static_cast<double>(S.size());
  v.L = v.premise ? cone_stretch(lambda, v.lambda0) : kInf;
  v.cone_ok = l1_on(bh, sc) <= v.L * l1_on(d, S) * (1.0 + 1e-9) + 1e-12;
  if (v.premise) {
    ConeSpec cone{S, v.L, static_cast<Index>(S.size())};
    v.phi2_lower = compatibility_constant(gh, cone, cfg).lower;
    // 2 lambda0/(L-1) = lambda - lambda0 and (L+1) lambda0/(L-1) = lambda
    v.lhs = pred + (lambda - v.lambda0) * l1_on(bh, sc);
    if (v.lambda0 > 0.0) {
      const double L = v.L;
      v.rhs = 4.0 * (L + 1) * (L + 1) * v.lambda0 * v.lambda0 * s / ((L - 1) * (L - 1) * v.phi2_lower);
    } else {
      v.rhs = 4.0 * lambda * lambda * s / v.phi2_lower;
    }
    if (!(v.phi2_lower > 0.0)) v.rhs = kInf;
    v.holds = detail::leq(v.lhs, v.rhs);
  }
  out.verdict = v;
  return out;
}

// noisy Part-1 selection: uniform irrepresentable on Sigma^ below 1/L gives S^ ⊆ S
struct NoisySelectionVerdict {
  bool premise = false;
  double irr_value = kNaN;
  double L = kNaN;
  bool holds = false;
};

inline NoisySelectionVerdict noisy_selection_verdict(const NoisyProblem& np, const LassoSolution& sol,
                                                     const IndexSet& S, double lambda0,
                                                     const EnumerationCaps& caps = {}) {
  NoisySelectionVerdict v;
  const GramMatrix gh = np.gram_hat();
  v.L = sol.lambda > lambda0 ? cone_stretch(sol.lambda, lambda0) : kInf;
  try {
    v.irr_value = irrepresentable_uniform(gh, ConeSpec{S, 1.0, static_cast<Index>(S.size())}, caps).estimate;
  } catch (const Error&) {
    v.irr_value = kInf;
  }
  v.premise = std::isfinite(v.L) && v.irr_value < 1.0 / v.L;
  v.holds = is_subset(sol.active_set, S);
  return v;
}

// approximation lemma: Sigma^ within lambda_tilde of Sigma keeps the KKT perturbation small
struct ApproximationVerdict {
  bool premise = false;
  double d_inf = kNaN;
  double lhs = kNaN;  // ||(Sigma^ - Sigma)(b^ - b0)||_inf
  double rhs = kNaN;  // 2 lambda0 / (L - 1)
  double ratio = kNaN;  // (L+1) sqrt(lt s) / (phi - (L+1) sqrt(lt s))
  bool holds = false;
};

// phi2_compat_lower: certified lower bound on phi^2_compatible(Sigma, L, S)
inline ApproximationVerdict approximation_verdict(const GramMatrix& sigma, const NoisyProblem& np,
                                                  const LassoSolution& sol, const IndexSet& S,
                                                  double lambda0, double lambda_tilde, double phi2_compat_lower) {
  if (!np.beta0) throw Error(ErrorCode::MissingInput, "approximation verdict needs beta0");
  ApproximationVerdict v;
  const GramMatrix gh = np.gram_hat();
  v.d_inf = d_infinity(gh, sigma);
  const double lam = sol.lambda;
  const double s = static_cast<double>(S.size());
  const bool lam_ok = lam > lambda0 && lambda0 > 0.0;
  const double L = lam_ok ? cone_stretch(lam, lambda0) : kInf;
  const double c = (L + 1.0) * std::sqrt(lambda_tilde * s);
  const double phi = std::sqrt(std::max(0.0, phi2_compat_lower));
  v.ratio = phi > c ? c / (phi - c) : kInf;
  v.premise = lam_ok && v.d_inf <= lambda_tilde && phi > c && v.ratio < 1.0;
  v.lhs = ((gh.matrix() - sigma.matrix()) * (sol.beta_star - *np.beta0)).cwiseAbs().maxCoeff();
  v.rhs = lam_ok ? 2.0 * lambda0 / (L - 1.0) : kNaN;
  v.holds = lam_ok && v.lhs < v.rhs;
  return v;
}

}  // namespace lasso_audit
