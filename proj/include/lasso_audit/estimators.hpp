#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "parallel.hpp"
#include "solvers.hpp"

namespace lasso_audit {

namespace detail {

// one rounding step of slack on certified endpoints
inline double widen_down(double v) { return v - 1e-12 * std::max(1.0, std::abs(v)); }
inline double widen_up(double v) { return v + 1e-12 * std::max(1.0, std::abs(v)); }

inline Vec embed(const Vec& x, const IndexSet& idx, Index p) {
  Vec out = Vec::Zero(p);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = x[static_cast<Index>(i)];
  return out;
}

// plain Nelder-Mead, minimizing f
inline Vec nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double step,
                       int max_evals, double* fbest) {
  const Index n = x0.size();
  std::vector<Vec> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i < n; ++i) {
    const double h = x0[i] != 0.0 ? step * std::abs(x0[i]) : step;
    pts[static_cast<std::size_t>(i + 1)][i] += h;
  }
  int evals = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    val[i] = f(pts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(pts.size());
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (std::abs(val[worst] - val[best]) <= 1e-13 * (std::abs(val[best]) + 1e-300)) break;
    Vec centroid = Vec::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const Vec xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < val[best]) {
      const Vec xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid))
                           : Vec(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    ++evals;
    if (fc < std::min(fr, val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      val[i] = f(pts[i]);
      ++evals;
    }
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (val[i] < val[b]) b = i;
  if (fbest) *fbest = val[b];
  return pts[b];
}

// random point of the cone: sphere head, l1-direction tail of random support
inline Vec sample_cone_point(CounterRng& rng, const ConeSpec& cone, ConeVariant variant,
                             const IndexSet& sc, Index p) {
  Vec beta = Vec::Zero(p);
  const Index s = cone.s();
  for (Index j : cone.S) beta[j] = rng.normal();
  if (s > 1 && rng.uniform() < 0.2) {
    const Index keep = static_cast<Index>(rng.below(static_cast<std::uint64_t>(s)));
    for (Index i = 0; i < s; ++i)
      if (i != keep && rng.uniform() < 0.5) beta[cone.S[static_cast<std::size_t>(i)]] = 0.0;
  }
  if (sc.empty() || rng.uniform() < 0.1) return beta;
  const Index m = static_cast<Index>(sc.size());
  const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)));
  IndexSet pool = sc;
  double total = 0.0;
  for (Index i = 0; i < k; ++i) {
    const auto pick = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(m - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick]);
    const double mag = -std::log(rng.uniform());
    const double v = rng.uniform() < 0.5 ? -mag : mag;
    beta[pool[static_cast<std::size_t>(i)]] = v;
    total += mag;
  }
  if (total <= 0.0) return beta;
  double radius = cone_radius(beta, cone, variant);
  if (rng.uniform() < 0.5) radius *= rng.uniform();
  for (Index i = 0; i < k; ++i) beta[pool[static_cast<std::size_t>(i)]] *= radius / total;
  return beta;
}

inline double lambda2_or_nan(const GramMatrix& g, const IndexSet& S, Index N, const EnumerationCaps& caps) {
  try {
    return uniform_eigenvalue_value(g, S, N, caps);
  } catch (const CapExceeded&) {
    return kNaN;
  }
}

inline double diag_scale(const GramMatrix& g) {
  return std::max(1.0, g.matrix().diagonal().maxCoeff());
}

}  // namespace detail

// ---------------------------------------------------------------- compatibility

struct CompatibilityResult {
  BoundedValue value;  // phi^2_compatible(L,S)
  Vec argmin;          // a (near-)minimizing beta with tau'beta_S = 1
  std::uint64_t qps_solved = 0;
  std::uint64_t pruned = 0;
};

// phi^2 = s * min_tau min { b'Sb : tau'b_S = 1, ||b_{S^c}||_1 <= L }.
// For fixed tail u the head is eliminated in closed form, leaving
//   u'(C + ww'/a)u + (2/a) w'u + 1/a,
// with a = tau'S11^{-1}tau, w = S21 S11^{-1} tau, C the Schur complement.
inline CompatibilityResult compatibility_detail(const GramMatrix& g, const ConeSpec& cone_in,
                                                const SolverConfig& cfg) {
  const ConeSpec cone = cone_in.with_N(std::max(cone_in.N, cone_in.s()));
  const Index p = g.p();
  cone.validate(p);
  cfg.validate();
  const Index s = cone.s();
  const double sd = static_cast<double>(s);
  const double L = cone.L;
  const IndexSet sc = complement(cone.S, p);
  CompatibilityResult out;

  const std::uint64_t need = pow2_saturating(s);
  if (need > cfg.caps.signs) throw CapExceeded(need, cfg.caps.signs, "compatibility sign enumeration");

  const Mat s11 = block(g, cone.S, Block::B11);
  Mat inv;
  if (!sym_inverse(s11, inv)) {
    const SymEig e = sym_eig(s11);
    out.argmin = detail::embed(e.vectors.col(0), cone.S, p);
    out.value = BoundedValue::exact(0.0, "Sigma_11(S) singular");
    out.value.lower_routes = {{"exact", 0.0}};
    out.value.upper_routes = {{"exact", 0.0}};
    return out;
  }
  const Mat s21 = block(g, cone.S, Block::B21);
  const Mat C = block(g, cone.S, Block::B22) - s21 * inv * s21.transpose();

  // pass 1: head-only value 1/a (feasible) and the bound (1 - L||w||_inf)_+^2 / a
  const std::uint64_t count = pow2_saturating(s - 1);
  std::vector<double> inv_a(count), bound(count);
  std::vector<unsigned char> tail_free(count);
  parallel_for(count, cfg.threads, [&](std::size_t m) {
    Vec tau(s);
    for (Index i = 0; i < s; ++i) tau[i] = ((m >> i) & 1U) ? -1.0 : 1.0;
    const Vec y = inv * tau;
    const double a = tau.dot(y);
    const double wmax = sc.empty() ? 0.0 : (s21 * y).cwiseAbs().maxCoeff();
    inv_a[m] = 1.0 / a;
    const double r = std::max(0.0, 1.0 - L * wmax);
    bound[m] = r * r / a;
    tail_free[m] = (wmax == 0.0 || L == 0.0) ? 1 : 0;
  });
  double best0 = kInf;
  std::size_t best0_idx = 0;
  for (std::size_t m = 0; m < count; ++m)
    if (inv_a[m] < best0) {
      best0 = inv_a[m];
      best0_idx = m;
    }

  std::vector<std::size_t> todo;
  for (std::size_t m = 0; m < count; ++m)
    if (!tail_free[m] && bound[m] < best0) todo.push_back(m);
  out.pruned = count - todo.size();

  struct Sol {
    double upper = kInf, lower = -kInf;
    Vec u;
    bool converged = false;
  };
  std::vector<Sol> sols(todo.size());
  parallel_for(todo.size(), cfg.threads, [&](std::size_t t) {
    const std::size_t m = todo[t];
    Vec tau(s);
    for (Index i = 0; i < s; ++i) tau[i] = ((m >> i) & 1U) ? -1.0 : 1.0;
    const Vec y = inv * tau;
    const double a = tau.dot(y);
    const Vec w = s21 * y;
    const Mat Q = C + w * w.transpose() / a;
    const Vec c = 2.0 * w / a;
    const QPResult r = projected_gradient_qp(
        Q, c, [L](const Vec& v) { return project_l1_ball(v, L); }, cfg);
    const Vec grad = 2.0 * (Q * r.x) + c;
    const double gap = std::max(0.0, grad.dot(r.x) + L * grad.cwiseAbs().maxCoeff());
    Sol& so = sols[t];
    so.u = r.x;
    so.upper = r.value + 1.0 / a;
    so.lower = std::max(bound[m], so.upper - gap);
    so.converged = r.converged;
  });

  double upper = best0, lower = kInf;
  std::size_t arg = best0_idx;
  const Sol* arg_sol = nullptr;
  bool all_exact = true;
  for (std::size_t m = 0; m < count; ++m) {
    if (tail_free[m]) lower = std::min(lower, inv_a[m]);
    else if (!(bound[m] < best0)) lower = std::min(lower, bound[m]);
  }
  for (std::size_t t = 0; t < sols.size(); ++t) {
    all_exact = false;
    lower = std::min(lower, sols[t].lower);
    if (sols[t].upper < upper) {
      upper = sols[t].upper;
      arg = todo[t];
      arg_sol = &sols[t];
    }
    ++out.qps_solved;
  }
  // pruned signs never solved still have a non-exact value unless tail-free
  for (std::size_t m = 0; m < count; ++m)
    if (!tail_free[m]) all_exact = false;
  lower = std::min(lower, upper);

  Vec tau(s);
  for (Index i = 0; i < s; ++i) tau[i] = ((arg >> i) & 1U) ? -1.0 : 1.0;
  const Vec y = inv * tau;
  const double a = tau.dot(y);
  Vec u = arg_sol ? arg_sol->u : Vec::Zero(static_cast<Index>(sc.size()));
  const Vec w = s21 * y;
  const Vec head = (1.0 + w.dot(u)) / a * y - inv * s21.transpose() * u;
  out.argmin = detail::embed(head, cone.S, p) + detail::embed(u, sc, p);

  BoundedValue& v = out.value;
  v.estimate = sd * upper;
  if (all_exact) {
    v = BoundedValue::exact(sd * upper, "tail-free sign problems");
    v.lower = detail::widen_down(v.estimate);
    v.upper = detail::widen_up(v.estimate);
    v.lower_routes = {{"exact", v.lower}};
    v.upper_routes = {{"exact", v.upper}};
    return out;
  }
  v.certificate = Certificate::Interval;
  v.lower_routes = {{"fw_gap", detail::widen_down(std::max(0.0, sd * lower))}};
  v.upper_routes = {{"feasible", detail::widen_up(sd * upper)}};
  v.settle();
  v.note = std::to_string(out.qps_solved) + " sign QPs solved, " + std::to_string(out.pruned) + " pruned";
  return out;
}

inline BoundedValue compatibility_constant(const GramMatrix& g, const ConeSpec& cone,
                                           const SolverConfig& cfg = {}) {
  return compatibility_detail(g, cone, cfg).value;
}

// ---------------------------------------------------------------- restricted regression

namespace detail {

// exact ratio for a given beta, with N(beta) the canonical superset; NaN if
// beta lies outside the cone or the head is degenerate
inline double rr_ratio(const GramMatrix& g, const ConeSpec& cone, ConeVariant variant, const Vec& beta) {
  const IndexSet nset = canonical_nset(beta, cone.S, cone.N);
  if (!cone_membership(beta, cone, nset, variant)) return kNaN;
  const IndexSet comp = complement(nset, g.p());
  const Vec bn = subvector(beta, nset);
  const double den = bn.dot(submatrix(g.matrix(), nset, nset) * bn);
  if (!(den > 1e-12 * diag_scale(g) * bn.squaredNorm())) return kNaN;
  if (comp.empty()) return 0.0;
  const double num = bn.dot(submatrix(g.matrix(), nset, comp) * subvector(beta, comp));
  return std::abs(num) / den;
}

// with N and beta_N fixed, the best tail solves a capped knapsack
inline double rr_fixed_head(const GramMatrix& g, const ConeSpec& cone, ConeVariant variant,
                            const IndexSet& nset, const IndexSet& comp, const Vec& x, Vec* beta_out) {
  const Index p = g.p();
  Vec full = embed(x, nset, p);
  double radius = cone_radius(full, cone, variant);
  double cap = kInf;
  for (Index j : nset)
    if (!std::binary_search(cone.S.begin(), cone.S.end(), j)) {
      radius -= std::abs(full[j]);
      cap = std::min(cap, std::abs(full[j]));
    }
  if (radius < 0.0) return -1.0;
  cap *= 1.0 - 1e-12;
  const double den = x.dot(submatrix(g.matrix(), nset, nset) * x);
  if (!(den > 1e-12 * diag_scale(g) * x.squaredNorm())) return -1.0;
  const Vec gv = submatrix(g.matrix(), comp, nset) * x;
  std::vector<Index> ord(comp.size());
  std::iota(ord.begin(), ord.end(), Index{0});
  std::stable_sort(ord.begin(), ord.end(), [&](Index a, Index b) { return std::abs(gv[a]) > std::abs(gv[b]); });
  double left = radius, num = 0.0;
  for (Index i : ord) {
    if (left <= 0.0) break;
    const double amt = std::min(cap, left);
    num += amt * std::abs(gv[i]);
    if (beta_out) full[comp[static_cast<std::size_t>(i)]] = gv[i] >= 0 ? amt : -amt;
    left -= amt;
  }
  if (beta_out) *beta_out = full;
  return num / den;
}

struct RRUpperInput {
  double lam_N = kNaN;   // Lambda^2(S,N)
  double lam_2s = kNaN;  // Lambda^2(S,2s)
};

// closed-form upper bounds on theta(1,S,N), each tagged with its argument
inline std::vector<RouteBound> rr_upper_routes_unit(const GramMatrix& g, const ConeSpec& cone,
                                                    ConeVariant variant, const EnumerationCaps& caps) {
  std::vector<RouteBound> out;
  const Index p = g.p();
  const Index s = cone.s();
  const double sd = static_cast<double>(s);
  const double tiny = kSingularRatio * diag_scale(g);
  if (cone.N == p) {
    out.push_back({"exact", 0.0});
    return out;
  }
  const double lam = lambda2_or_nan(g, cone.S, cone.N, caps);
  if (lam > tiny) {
    try {
      double mx = 0.0;
      for (auto st = enumerate_supersets(cone, p, caps.subsets); st.valid(); st.advance())
        mx = std::max(mx, block_norm_2q(g, st.current(), NormQ::inf).estimate);
      out.push_back({"elementary:holder", std::sqrt(sd) * mx / lam});
    } catch (const CapExceeded&) {
    }
  }
  if (cone.N == s && lam > tiny) {
    const ConeSpec c = cone.with_N(s);
    out.push_back({"E3", coherence(g, c, CoherenceKind::mutual).estimate});
    out.push_back({"E3", coherence(g, c, CoherenceKind::cumulative).estimate});
  }
  if (cone.N == 2 * s && lam > tiny) {
    try {
      double q2 = 0.0, q1 = 0.0, cum = 0.0;
      for (auto st = enumerate_supersets(cone, p, caps.subsets); st.valid(); st.advance()) {
        const IndexSet& n = st.current();
        q2 = std::max(q2, block_norm_2q(g, n, NormQ::two).estimate);
        q1 = std::max(q1, block_norm_2q(g, n, NormQ::one, NormMode::paper_bound).estimate);
        const Mat b = block(g, n, Block::B12);
        if (b.size()) cum = std::max(cum, b.cwiseAbs().rowwise().sum().norm());
      }
      out.push_back({"E2", q2 / lam});
      out.push_back({"E2", std::sqrt(sd) * q1 / (sd * lam)});
      out.push_back({"E3", cum / (std::sqrt(sd) * lam)});
      const double theta = restricted_orthogonality_value(g, cone.S, cone.N, caps);
      out.push_back({"E5", theta / lam});
    } catch (const CapExceeded&) {
    }
  }
  (void)variant;  // every route bounds the adaptive constant, hence also the plain one
  return out;
}

}  // namespace detail

// upper routes on theta(L,S,N) (closed forms only)
inline std::vector<RouteBound> restricted_regression_upper_routes(const GramMatrix& g, const ConeSpec& cone,
                                                                  ConeVariant variant,
                                                                  const EnumerationCaps& caps = {}) {
  auto r = detail::rr_upper_routes_unit(g, cone.with_L(1.0), variant, caps);
  for (auto& x : r) x.value = detail::widen_up(cone.L * x.value);
  return r;
}

struct RestrictedRegressionResult {
  BoundedValue value;
  Vec witness;  // feasible beta attaining the lower endpoint (at L = 1)
};

inline RestrictedRegressionResult restricted_regression_detail(const GramMatrix& g, const ConeSpec& cone,
                                                               ConeVariant variant, const SolverConfig& cfg) {
  const Index p = g.p();
  cone.validate(p);
  cfg.validate();
  const ConeSpec c1 = cone.with_L(1.0);
  const Index s = cone.s();
  const IndexSet sc = complement(cone.S, p);
  RestrictedRegressionResult out;
  out.witness = detail::embed(Vec::Ones(s), cone.S, p);

  double best = 0.0;
  Vec best_beta = out.witness;
  auto consider = [&](const Vec& beta) {
    const double r = detail::rr_ratio(g, c1, variant, beta);
    if (std::isfinite(r) && r > best) {
      best = r;
      best_beta = beta;
    }
  };

  if (cone.N < p && cone.L > 0.0) {
    CounterRng rng = CounterRng(cfg.seed).derive(0x5252);
    // seeds: random cone points plus the head directions S11^{-1} tau
    std::vector<std::pair<double, Vec>> seeds;
    const int nsamp = std::max(50, cfg.samples / 10);
    for (int i = 0; i < nsamp; ++i) {
      Vec b = detail::sample_cone_point(rng, c1, variant, sc, p);
      const double r = detail::rr_ratio(g, c1, variant, b);
      if (std::isfinite(r)) seeds.emplace_back(r, std::move(b));
    }
    Mat inv;
    if (sym_inverse(block(g, cone.S, Block::B11), inv)) {
      const std::uint64_t nt = std::min<std::uint64_t>(pow2_saturating(s - 1), 256);
      for (std::uint64_t m = 0; m < nt; ++m) {
        Vec tau(s);
        for (Index i = 0; i < s; ++i) tau[i] = ((m >> i) & 1U) ? -1.0 : 1.0;
        Vec b = detail::embed(inv * tau, cone.S, p);
        seeds.emplace_back(detail::rr_ratio(g, c1, variant, b), b);
      }
    }
    for (auto& sd : seeds)
      if (!std::isfinite(sd.first)) sd.first = -1.0;
    std::stable_sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& sd : seeds) consider(sd.second);

    const std::size_t starts = std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(std::max(1, cfg.restarts)));
    std::vector<std::pair<double, Vec>> local(starts);
    parallel_for(starts, cfg.threads, [&](std::size_t k) {
      Vec beta = seeds[k].second;
      // the head chosen by the seed fixes N; refine beta_N with the exact tail
      const IndexSet nset = canonical_nset(beta, cone.S, cone.N);
      const IndexSet comp = complement(nset, p);
      Vec x = subvector(beta, nset);
      if (x.cwiseAbs().minCoeff() == 0.0)
        for (Index i = 0; i < x.size(); ++i)
          if (x[i] == 0.0) x[i] = 1e-3 * x.cwiseAbs().maxCoeff() + 1e-6;
      auto f = [&](const Vec& z) { return -detail::rr_fixed_head(g, c1, variant, nset, comp, z, nullptr); };
      double fb = 0.0;
      for (int round = 0; round < 3; ++round)
        x = detail::nelder_mead(f, x, 0.2, 400 * static_cast<int>(x.size() + 1), &fb);
      Vec full;
      detail::rr_fixed_head(g, c1, variant, nset, comp, x, &full);
      local[k] = {detail::rr_ratio(g, c1, variant, full), full};
    });
    for (const auto& l : local)
      if (l.second.size() == p) consider(l.second);
  }
  out.witness = best_beta;

  BoundedValue& v = out.value;
  v.certificate = Certificate::Interval;
  v.lower_routes = {{"feasible", std::max(0.0, detail::widen_down(cone.L * best))}};
  v.upper_routes = restricted_regression_upper_routes(g, cone, variant, cfg.caps);
  if (cone.N == p || cone.L == 0.0) v.upper_routes = {{"exact", 0.0}};
  v.settle();
  v.estimate = std::clamp(cone.L * best, v.lower, std::max(v.lower, v.upper));
  v.note = std::string(to_string(variant)) + " restricted regression, canonical N(beta)";
  return out;
}

inline BoundedValue restricted_regression(const GramMatrix& g, const ConeSpec& cone, ConeVariant variant,
                                          const SolverConfig& cfg = {}) {
  return restricted_regression_detail(g, cone, variant, cfg).value;
}

// ---------------------------------------------------------------- certified lower bounds on phi^2

// lower bounds on phi^2(L,S,N) (or its adaptive version) from closed forms
inline BoundedValue certified_lower_phi(const GramMatrix& g, const ConeSpec& cone,
                                        ConeVariant variant = ConeVariant::plain,
                                        const EnumerationCaps& caps = {},
                                        const std::vector<RouteBound>& extra = {}) {
  cone.validate(g.p());
  const Index s = cone.s();
  const Index p = g.p();
  const double tiny = kSingularRatio * detail::diag_scale(g);
  BoundedValue v;
  v.lower_routes.push_back({"trivial", 0.0});

  const double lmin = lambda_min(g.matrix());
  if (lmin > tiny) v.lower_routes.push_back({"elementary:lambda_min", detail::widen_down(lmin)});

  const double lam = detail::lambda2_or_nan(g, cone.S, cone.N, caps);
  if (lam > tiny) {
    const auto ups = restricted_regression_upper_routes(g, cone, variant, caps);
    double th = kInf;
    for (const auto& r : ups) th = std::min(th, r.value);
    if (th < 1.0) v.lower_routes.push_back({"E1", detail::widen_down((1.0 - th) * (1.0 - th) * lam)});
  }
  if (2 * s <= p && cone.N <= 2 * s) {
    try {
      const ConeSpec c2 = cone.with_N(2 * s);
      const double lam2 = uniform_eigenvalue_value(g, cone.S, 2 * s, caps);
      if (lam2 > tiny) {
        const double w = cone.L * restricted_orthogonality_value(g, cone.S, 2 * s, caps) / lam2;
        if (w < 1.0) v.lower_routes.push_back({"E6", detail::widen_down((1.0 - w) * (1.0 - w) * lam2)});
      }
      (void)c2;
    } catch (const CapExceeded&) {
    }
  }
  for (const auto& r : extra) v.lower_routes.push_back(r);
  v.settle();
  v.upper = kInf;
  v.estimate = v.lower;
  std::string best_tag = "trivial";
  for (const auto& r : v.lower_routes)
    if (r.value == v.lower) best_tag = r.tag;
  if (v.lower > 0.0) {
    v.certificate = Certificate::CertifiedLower;
    v.note = "best route: " + best_tag;
  } else {
    v.certificate = Certificate::Estimate;
    v.note = "no route applies";
  }
  return v;
}

// ---------------------------------------------------------------- restricted eigenvalue

namespace detail {

// ratio b'Sb / ||b_N||^2 with N the canonical superset; +inf outside the cone
inline double re_ratio(const GramMatrix& g, const ConeSpec& cone, ConeVariant variant, const Vec& beta) {
  const IndexSet nset = canonical_nset(beta, cone.S, cone.N);
  if (!cone_membership(beta, cone, nset, variant)) return kInf;
  const double den = l2_on(beta, nset);
  if (!(den > 0.0)) return kInf;
  return beta.dot(g.matrix() * beta) / (den * den);
}

// scale the tail back onto the cone boundary when it sticks out
inline void pull_into_cone(Vec& beta, const ConeSpec& cone, ConeVariant variant, const IndexSet& sc) {
  const double tail = l1_on(beta, sc);
  const double radius = cone_radius(beta, cone, variant);
  if (tail > radius && tail > 0.0)
    for (Index j : sc) beta[j] *= radius / tail;
}

}  // namespace detail

struct RestrictedEigenvalueResult {
  BoundedValue value;  // phi^2
  Vec argmin;
};

inline RestrictedEigenvalueResult restricted_eigenvalue_detail(const GramMatrix& g, const ConeSpec& cone,
                                                               ConeVariant variant, const SolverConfig& cfg,
                                                               const std::vector<Vec>& hints = {},
                                                               const std::vector<RouteBound>& extra_lower = {}) {
  const Index p = g.p();
  cone.validate(p);
  cfg.validate();
  const Index s = cone.s();
  const IndexSet sc = complement(cone.S, p);
  const Mat& sig = g.matrix();

  double best = kInf;
  Vec best_beta;
  auto consider = [&](const Vec& beta) {
    const double r = detail::re_ratio(g, cone, variant, beta);
    if (r < best) {
      best = r;
      best_beta = beta;
    }
    return r;
  };

  // eigenvectors of principal blocks; exact ratio when feasible
  {
    const SymEig e = sym_eig(block(g, cone.S, Block::B11));
    for (Index k = 0; k < s; ++k) consider(detail::embed(e.vectors.col(k), cone.S, p));
    if (cone.N > s && superset_count(p, s, cone.N) <= 2000) {
      for (SupersetStream st(cone.S, p, cone.N); st.valid(); st.advance()) {
        const SymEig en = sym_eig(block(g, st.current(), Block::B11));
        for (Index k = 0; k < en.values.size(); ++k) consider(detail::embed(en.vectors.col(k), st.current(), p));
      }
    }
  }
  for (const Vec& h : hints) {
    if (h.size() != p) continue;
    Vec b = h;
    detail::pull_into_cone(b, cone, variant, sc);
    consider(b);
  }

  std::vector<std::pair<double, Vec>> seeds;
  if (best_beta.size() == p) seeds.emplace_back(best, best_beta);
  if (!sc.empty()) {
    CounterRng rng = CounterRng(cfg.seed).derive(0x5245);
    const std::size_t keep = static_cast<std::size_t>(std::max(1, cfg.restarts));
    for (int i = 0; i < cfg.samples; ++i) {
      Vec b = detail::sample_cone_point(rng, cone, variant, sc, p);
      const double r = consider(b);
      if (!std::isfinite(r)) continue;
      if (seeds.size() < keep + 1) {
        seeds.emplace_back(r, std::move(b));
      } else {
        auto worst = std::max_element(seeds.begin() + 1, seeds.end(),
                                      [](const auto& a, const auto& c) { return a.first < c.first; });
        if (r < worst->first) *worst = {r, std::move(b)};
      }
    }
  }

  // local descent on the ratio with N frozen per step, then re-evaluated exactly
  std::vector<std::pair<double, Vec>> local(seeds.size());
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t k) {
    Vec beta = seeds[k].second;
    double fb = seeds[k].first;
    double step = 0.1;
    for (int it = 0; it < 300 && step > 1e-12; ++it) {
      const IndexSet nset = canonical_nset(beta, cone.S, cone.N);
      Vec dn = Vec::Zero(p);
      for (Index j : nset) dn[j] = beta[j];
      const double den = dn.squaredNorm();
      const Vec grad = 2.0 * (sig * beta - fb * dn) / den;
      Vec cand = beta - step * grad * beta.norm();
      detail::pull_into_cone(cand, cone, variant, sc);
      const double nrm = cand.norm();
      if (nrm > 0.0) cand /= nrm;
      const double r = detail::re_ratio(g, cone, variant, cand);
      if (r < fb) {
        beta = cand;
        fb = r;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    local[k] = {fb, beta};
  });
  for (const auto& l : local) consider(l.second);

  RestrictedEigenvalueResult out;
  out.argmin = best_beta;
  BoundedValue lo = certified_lower_phi(g, cone, variant, cfg.caps, extra_lower);
  BoundedValue& v = out.value;
  v.certificate = Certificate::Interval;
  v.lower_routes = lo.lower_routes;
  v.upper_routes = {{"feasible", detail::widen_up(best)}};
  v.settle();
  v.estimate = std::max(v.lower, best);
  v.note = std::string(to_string(variant)) + " restricted eigenvalue; " + lo.note;
  return out;
}

inline BoundedValue restricted_eigenvalue(const GramMatrix& g, const ConeSpec& cone, ConeVariant variant,
                                          const SolverConfig& cfg = {}) {
  return restricted_eigenvalue_detail(g, cone, variant, cfg).value;
}

}  // namespace lasso_audit
