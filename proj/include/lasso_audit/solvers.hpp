#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "core.hpp"

namespace lasso_audit {

enum class StepRule { fixed_inverse_lipschitz, backtracking };

struct SolverConfig {
  int max_iters = 200000;
  double tol = 1e-9;
  int restarts = 16;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::backtracking;
  int samples = 100000;  // random cone samples for the non-convex estimators
  unsigned threads = 1;
  EnumerationCaps caps{};

  void validate() const {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  }

  static SolverConfig standard() { return {}; }

  // fewer samples and restarts; used by large sweeps
  static SolverConfig reduced() {
    SolverConfig c;
    c.restarts = 4;
    c.samples = 5000;
    return c;
  }
};

// ---------------------------------------------------------------- l1 ball

inline Vec project_l1_ball(const Vec& v, double radius) {
  if (radius < 0.0) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Vec::Zero(v.size());
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - radius) / static_cast<double>(k + 1);
    if (u[k] > t) theta = t;
  }
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = v[i] < 0 ? -a : a;
  }
  return out;
}

// ---------------------------------------------------------------- projected gradient

struct QPResult {
  Vec x;
  double value = kNaN;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
};

using Projection = std::function<Vec(const Vec&)>;

// minimize x'Qx + c'x over the set behind `project`; objective never increases
inline QPResult projected_gradient_qp(const Mat& Q, const Vec& c, const Projection& project,
                                      const SolverConfig& cfg, std::optional<Vec> x0 = std::nullopt,
                                      std::vector<double>* trace = nullptr) {
  cfg.validate();
  const Index n = c.size();
  auto f = [&](const Vec& x) { return x.dot(Q * x) + c.dot(x); };
  auto grad = [&](const Vec& x) { return Vec(2.0 * (Q * x) + c); };

  double lip = 2.0 * power_lambda_max(Q);
  if (!(lip > 0.0)) lip = 1e-12;

  QPResult r;
  Vec x = project(x0 ? *x0 : Vec::Zero(n));
  double fx = f(x);
  Vec y = x, x_prev = x;
  double t = 1.0;
  if (trace) trace->push_back(fx);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Vec base = cfg.step_rule == StepRule::backtracking ? y : x;
    const Vec gb = grad(base);
    const double fb = f(base);
    Vec z;
    for (int bt = 0; bt < 60; ++bt) {
      z = project(base - gb / lip);
      const Vec d = z - base;
      if (f(z) <= fb + gb.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * std::abs(fb)) break;
      lip *= 2.0;
    }
    const double fz = f(z);
    x_prev = x;
    // f is flat to rounding near the optimum, so allow a few ulps or x freezes early
    if (fz <= fx + 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx))) {
      x = z;
      fx = fz;
    }
    if (cfg.step_rule == StepRule::backtracking) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    }
    if (trace) trace->push_back(fx);
    const Vec gx = grad(x);
    r.residual = (x - project(x - gx / lip)).cwiseAbs().maxCoeff();
    r.iterations = it;
    if (r.residual <= cfg.tol) {
      r.converged = true;
      break;
    }
    // restart momentum when the accelerated step failed to improve
    if (cfg.step_rule == StepRule::backtracking && fz > fx) {
      y = x;
      t = 1.0;
    }
  }
  r.x = x;
  r.value = fx;
  return r;
}

// ---------------------------------------------------------------- lasso by coordinate descent

// KKT residual of the objective b'Sb - 2c'b + lambda||b||_1, with tau the implied subgradient
struct KKTCheck {
  double residual = 0.0;
  Vec tau;
};

inline KKTCheck kkt_check(const Mat& sigma, const Vec& corr, double lambda, const Vec& beta) {
  const Vec g = 2.0 * (sigma * beta - corr);
  KKTCheck k;
  k.tau = Vec::Zero(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    double r;
    if (beta[j] != 0.0) {
      const double sg = beta[j] > 0 ? 1.0 : -1.0;
      r = std::abs(g[j] + lambda * sg);
      k.tau[j] = sg;
    } else {
      r = std::max(0.0, std::abs(g[j]) - lambda);
      k.tau[j] = lambda > 0.0 ? std::clamp(-g[j] / lambda, -1.0, 1.0) : 0.0;
    }
    k.residual = std::max(k.residual, r);
  }
  return k;
}

inline double lasso_objective(const Mat& sigma, const Vec& corr, double lambda, const Vec& beta) {
  return beta.dot(sigma * beta) - 2.0 * corr.dot(beta) + lambda * beta.lpNorm<1>();
}

namespace detail {

inline double soft(double x, double t) {
  return x > t ? x - t : (x < -t ? x + t : 0.0);
}

// exact minimizer on the current sign pattern, when that pattern is stable
inline bool polish_active_set(const Mat& sigma, const Vec& corr, double lambda, Vec& beta) {
  IndexSet act;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) act.push_back(j);
  if (act.empty()) return false;
  const Mat a = submatrix(sigma, act, act);
  Vec rhs(static_cast<Index>(act.size()));
  for (std::size_t i = 0; i < act.size(); ++i)
    rhs[static_cast<Index>(i)] = corr[act[i]] - 0.5 * lambda * (beta[act[i]] > 0 ? 1.0 : -1.0);
  Eigen::LDLT<Mat> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  const Vec d = ldlt.vectorD();
  if (d.minCoeff() <= kSingularRatio * std::max(1e-300, d.maxCoeff())) return false;
  const Vec sol = ldlt.solve(rhs);
  Vec cand = Vec::Zero(beta.size());
  for (std::size_t i = 0; i < act.size(); ++i) {
    const double v = sol[static_cast<Index>(i)];
    if ((v > 0) != (beta[act[i]] > 0) || v == 0.0) return false;
    cand[act[i]] = v;
  }
  if (kkt_check(sigma, corr, lambda, cand).residual < kkt_check(sigma, corr, lambda, beta).residual) {
    beta = cand;
    return true;
  }
  return false;
}

}  // namespace detail

inline Vec coordinate_descent_lasso(const Mat& sigma, const Vec& corr, double lambda,
                                    const SolverConfig& cfg, std::optional<Vec> init = std::nullopt,
                                    std::vector<double>* trace = nullptr) {
  cfg.validate();
  if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  const Index p = sigma.rows();
  if (corr.size() != p) throw Error(ErrorCode::DimensionMismatch, "correlation length != p");
  for (Index j = 0; j < p; ++j)
    if (!(sigma(j, j) > 0.0)) throw Error(ErrorCode::ZeroDiagonal, "diagonal entry " + std::to_string(j));

  Vec beta = init ? *init : Vec::Zero(p);
  Vec g = sigma * beta;  // Sigma beta kept in sync
  if (trace) trace->push_back(lasso_objective(sigma, corr, lambda, beta));
  double best_res = kInf;
  for (int sweep = 1; sweep <= cfg.max_iters; ++sweep) {
    for (Index j = 0; j < p; ++j) {
      const double old = beta[j];
      const double r = corr[j] - (g[j] - sigma(j, j) * old);
      const double nb = detail::soft(r, 0.5 * lambda) / sigma(j, j);
      if (nb != old) {
        g += sigma.col(j) * (nb - old);
        beta[j] = nb;
      }
    }
    double res = kkt_check(sigma, corr, lambda, beta).residual;
    if (res > cfg.tol && res < 1e-5 && detail::polish_active_set(sigma, corr, lambda, beta)) {
      g = sigma * beta;
      res = kkt_check(sigma, corr, lambda, beta).residual;
    }
    // resync to shed drift from incremental updates
    if (sweep % 64 == 0) g = sigma * beta;
    if (trace) trace->push_back(lasso_objective(sigma, corr, lambda, beta));
    best_res = std::min(best_res, res);
    if (res <= cfg.tol) return beta;
  }
  throw MaxItersExceeded(beta, best_res, "coordinate descent");
}

// ---------------------------------------------------------------- simplex

// minimize c'x subject to A x = b, x >= 0
struct LPProblem {
  Vec c;
  Mat A;
  Vec b;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
  return s == LPStatus::Optimal ? "Optimal" : s == LPStatus::Infeasible ? "Infeasible" : "Unbounded";
}

struct LPResult {
  Vec x;
  double value = kNaN;
  LPStatus status = LPStatus::Infeasible;
  Vec duals;  // y with c - A'y >= 0 at optimum
  int iterations = 0;
};

namespace detail {

struct Tableau {
  Mat t;                 // rows: constraints, last column rhs
  std::vector<Index> basis;

  void pivot(Index r, Index col) {
    t.row(r) /= t(r, col);
    for (Index i = 0; i < t.rows(); ++i) {
      if (i == r) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = col;
  }
};

// Bland's rule; returns false when unbounded
inline bool run_simplex(Tableau& tb, const Vec& cost, Index ncols, int& iters, int max_iters,
                        const std::vector<bool>& allowed) {
  const double piv_tol = 1e-10;
  const Index rhs = tb.t.cols() - 1;
  for (;;) {
    if (++iters > max_iters) throw Error(ErrorCode::IterationLimit, "simplex iteration limit");
    // reduced costs r_j = c_j - c_B' T_j
    Index enter = -1;
    for (Index j = 0; j < ncols; ++j) {
      if (!allowed[static_cast<std::size_t>(j)]) continue;
      double rj = cost[j];
      for (Index i = 0; i < tb.t.rows(); ++i) rj -= cost[tb.basis[static_cast<std::size_t>(i)]] * tb.t(i, j);
      if (rj < -1e-11) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    Index leave = -1;
    double best = kInf;
    for (Index i = 0; i < tb.t.rows(); ++i) {
      const double a = tb.t(i, enter);
      if (a <= piv_tol) continue;
      const double ratio = tb.t(i, rhs) / a;
      if (ratio < best - 1e-14 ||
          (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
           tb.basis[static_cast<std::size_t>(i)] < tb.basis[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return false;
    tb.pivot(leave, enter);
  }
}

}  // namespace detail

inline LPResult simplex_lp(const LPProblem& lp, const SolverConfig& cfg) {
  const Index m = lp.A.rows();
  const Index n = lp.A.cols();
  if (lp.c.size() != n || lp.b.size() != m)
    throw Error(ErrorCode::DimensionMismatch, "LP dimensions inconsistent");
  Mat A = lp.A;
  Vec b = lp.b;
  std::vector<double> flip(static_cast<std::size_t>(m), 1.0);
  for (Index i = 0; i < m; ++i)
    if (b[i] < 0) {
      A.row(i) *= -1.0;
      b[i] = -b[i];
      flip[static_cast<std::size_t>(i)] = -1.0;
    }

  detail::Tableau tb;
  tb.t = Mat::Zero(m, n + m + 1);
  tb.t.leftCols(n) = A;
  tb.t.block(0, n, m, m) = Mat::Identity(m, m);
  tb.t.col(n + m) = b;
  tb.basis.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) tb.basis[static_cast<std::size_t>(i)] = n + i;

  LPResult res;
  Vec cost1 = Vec::Zero(n + m);
  cost1.tail(m).setOnes();
  std::vector<bool> all(static_cast<std::size_t>(n + m), true);
  detail::run_simplex(tb, cost1, n + m, res.iterations, cfg.max_iters, all);
  double infeas = 0.0;
  for (Index i = 0; i < m; ++i)
    if (tb.basis[static_cast<std::size_t>(i)] >= n) infeas += tb.t(i, n + m);
  if (infeas > 1e-9 * std::max(1.0, b.lpNorm<Eigen::Infinity>())) {
    res.status = LPStatus::Infeasible;
    return res;
  }
  // drive artificials out of the basis; drop redundant rows
  std::vector<Index> keep;
  for (Index i = 0; i < m; ++i) {
    if (tb.basis[static_cast<std::size_t>(i)] < n) {
      keep.push_back(i);
      continue;
    }
    Index col = -1;
    for (Index j = 0; j < n; ++j)
      if (std::abs(tb.t(i, j)) > 1e-10) {
        col = j;
        break;
      }
    if (col >= 0) {
      tb.pivot(i, col);
      keep.push_back(i);
    }
  }
  detail::Tableau t2;
  t2.t = Mat(static_cast<Index>(keep.size()), n + 1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    t2.t.row(static_cast<Index>(k)).head(n) = tb.t.row(keep[k]).head(n);
    t2.t(static_cast<Index>(k), n) = tb.t(keep[k], n + m);
    t2.basis.push_back(tb.basis[static_cast<std::size_t>(keep[k])]);
  }
  std::vector<bool> allowed(static_cast<std::size_t>(n), true);
  if (!detail::run_simplex(t2, lp.c, n, res.iterations, cfg.max_iters, allowed)) {
    res.status = LPStatus::Unbounded;
    return res;
  }
  res.status = LPStatus::Optimal;
  res.x = Vec::Zero(n);
  for (std::size_t k = 0; k < keep.size(); ++k)
    res.x[t2.basis[k]] = std::max(0.0, t2.t(static_cast<Index>(k), n));
  res.value = lp.c.dot(res.x);

  // duals from B' y = c_B on the kept (sign-corrected) rows
  const Index mk = static_cast<Index>(keep.size());
  res.duals = Vec::Zero(m);
  if (mk > 0) {
    Mat B(mk, mk);
    Vec cb(mk);
    for (Index k = 0; k < mk; ++k) {
      cb[k] = lp.c[t2.basis[static_cast<std::size_t>(k)]];
      for (Index r = 0; r < mk; ++r) B(r, k) = A(keep[static_cast<std::size_t>(r)], t2.basis[static_cast<std::size_t>(k)]);
    }
    const Vec y = B.transpose().partialPivLu().solve(cb);
    for (Index r = 0; r < mk; ++r) {
      const Index row = keep[static_cast<std::size_t>(r)];
      res.duals[row] = y[r] * flip[static_cast<std::size_t>(row)];
    }
  }
  return res;
}

}  // namespace lasso_audit
