#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "core.hpp"

namespace lasso_audit {

// ---------------------------------------------------------------- report container

struct ConditionReport {
  std::map<std::string, BoundedValue> entries;
  std::map<std::string, std::string> errors;  // key -> reason the entry is absent
  ConeSpec cone;
  Index p = 0;
  std::string fingerprint;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const BoundedValue& at(const std::string& key) const { return entries.at(key); }
};

// ---------------------------------------------------------------- uniform eigenvalue

inline double uniform_eigenvalue_value(const GramMatrix& g, const IndexSet& S, Index N,
                                       const EnumerationCaps& caps = {}) {
  const ConeSpec c{S, 1.0, N};
  double best = kInf;
  for (auto st = enumerate_supersets(c, g.p(), caps.subsets); st.valid(); st.advance())
    best = std::min(best, lambda_min(block(g, st.current(), Block::B11)));
  return best;
}

// min over N ⊇ S, |N| = N; interlacing makes smaller sizes redundant
inline BoundedValue uniform_eigenvalue(const GramMatrix& g, const ConeSpec& cone,
                                       const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  return BoundedValue::exact(uniform_eigenvalue_value(g, cone.S, cone.N, caps),
                             "min eigenvalue over supersets of size N");
}

// ---------------------------------------------------------------- restricted isometry

inline BoundedValue restricted_isometry(const GramMatrix& g, Index N,
                                        const EnumerationCaps& caps = {}) {
  if (N < 1 || N > g.p()) throw Error(ErrorCode::InvalidArgument, "N outside [1, p]");
  const std::uint64_t need = binomial(static_cast<std::uint64_t>(g.p()), static_cast<std::uint64_t>(N));
  if (need > caps.subsets) throw CapExceeded(need, caps.subsets, "restricted isometry");
  double delta = -kInf;
  for (Combinations c(g.p(), N); c.valid(); c.advance()) {
    const Vec ev = sym_eig(submatrix(g.matrix(), c.current(), c.current()), false).values;
    delta = std::max({delta, ev(ev.size() - 1) - 1.0, 1.0 - ev(0)});
  }
  return BoundedValue::exact(delta, "all subsets of size N");
}

// ---------------------------------------------------------------- restricted orthogonality

namespace detail {

// sizes of N worth visiting: a size m < N is dominated by m+1 whenever
// m+1 still leaves room for an |M| = s block
inline std::vector<Index> orthogonality_sizes(Index p, Index s, Index N) {
  std::vector<Index> out;
  for (Index m = s; m <= N; ++m)
    if (m == N || p - (m + 1) < s) out.push_back(m);
  return out;
}

template <class NsetVisitor>
double max_cross_singular(const GramMatrix& g, Index s, const std::vector<Index>& sizes,
                          NsetVisitor&& for_each_nset) {
  double best = 0.0;
  for (Index m : sizes) {
    const Index msize = std::min(s, g.p() - m);
    if (msize <= 0) continue;
    for_each_nset(m, [&](const IndexSet& nset) {
      const IndexSet comp = complement(nset, g.p());
      for (Combinations c(static_cast<Index>(comp.size()), msize); c.valid(); c.advance()) {
        IndexSet mset;
        for (Index i : c.current()) mset.push_back(comp[static_cast<std::size_t>(i)]);
        best = std::max(best, spectral_norm(submatrix(g.matrix(), nset, mset)));
      }
    });
  }
  return best;
}

}  // namespace detail

inline double restricted_orthogonality_value(const GramMatrix& g, const IndexSet& S, Index N,
                                             const EnumerationCaps& caps = {}) {
  const Index p = g.p();
  const Index s = static_cast<Index>(S.size());
  const auto sizes = detail::orthogonality_sizes(p, s, N);
  std::uint64_t need = 0;
  for (Index m : sizes)
    need = saturating_add(need, saturating_mul(superset_count(p, s, m),
                                               binomial(static_cast<std::uint64_t>(p - m),
                                                        static_cast<std::uint64_t>(std::min(s, p - m)))));
  if (need > caps.subsets) throw CapExceeded(need, caps.subsets, "restricted orthogonality");
  return detail::max_cross_singular(g, s, sizes, [&](Index m, auto&& visit) {
    for (SupersetStream st(S, p, m); st.valid(); st.advance()) visit(st.current());
  });
}

inline BoundedValue restricted_orthogonality(const GramMatrix& g, const ConeSpec& cone,
                                             const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  return BoundedValue::exact(restricted_orthogonality_value(g, cone.S, cone.N, caps),
                             "max singular value over (N, M) blocks");
}

// max over all |S| = s; every N of size >= s contains some S
inline BoundedValue theta_uniform(const GramMatrix& g, Index s, Index N,
                                  const EnumerationCaps& caps = {}) {
  const Index p = g.p();
  if (s < 1 || N < s || N > p) throw Error(ErrorCode::InvalidArgument, "need 1 <= s <= N <= p");
  const auto sizes = detail::orthogonality_sizes(p, s, N);
  std::uint64_t need = 0;
  for (Index m : sizes)
    need = saturating_add(need, saturating_mul(binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(m)),
                                               binomial(static_cast<std::uint64_t>(p - m),
                                                        static_cast<std::uint64_t>(std::min(s, p - m)))));
  if (need > caps.subsets) throw CapExceeded(need, caps.subsets, "uniform restricted orthogonality");
  const double v = detail::max_cross_singular(g, s, sizes, [&](Index m, auto&& visit) {
    for (Combinations c(p, m); c.valid(); c.advance()) visit(c.current());
  });
  return BoundedValue::exact(v, "max over all active sets of size s");
}

// ---------------------------------------------------------------- RIP constants

inline BoundedValue rip_constant(const GramMatrix& g, Index s, const EnumerationCaps& caps = {}) {
  if (2 * s > g.p()) throw Error(ErrorCode::InvalidArgument, "RIP constant needs 2s <= p");
  const double delta_s = restricted_isometry(g, s, caps).estimate;
  const double theta_ss = theta_uniform(g, s, s, caps).estimate;
  const double theta_s2s = theta_uniform(g, s, 2 * s, caps).estimate;
  const double denom = 1.0 - delta_s - theta_ss;
  if (!(denom > 0.0))
    throw Error(ErrorCode::DenominatorNonPositive,
                "1 - delta_s - theta_ss = " + std::to_string(denom));
  return BoundedValue::exact(theta_s2s / denom, "theta_{s,2s} / (1 - delta_s - theta_{s,s})");
}

inline BoundedValue weak_rip_constant(const GramMatrix& g, const ConeSpec& cone,
                                      const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  const double lam = uniform_eigenvalue_value(g, cone.S, cone.N, caps);
  const double scale = std::max(1.0, g.matrix().diagonal().maxCoeff());
  if (!(lam > kSingularRatio * scale))
    throw Error(ErrorCode::SingularUniformEigenvalue, "Lambda^2(S,N) = " + std::to_string(lam));
  const double theta = restricted_orthogonality_value(g, cone.S, cone.N, caps);
  return BoundedValue::exact(theta / lam, "theta(S,N) / Lambda^2(S,N)");
}

// ---------------------------------------------------------------- irrepresentable

// Sigma_21(N) Sigma_11(N)^{-1}; false when the block is singular
inline bool irrepresentable_matrix(const GramMatrix& g, const IndexSet& nset, Mat& out) {
  Mat inv;
  if (!sym_inverse(block(g, nset, Block::B11), inv)) return false;
  out = block(g, nset, Block::B21) * inv;
  return true;
}

inline double max_row_l1(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

// all sizes s..N are visited: the value is not monotone in N
inline BoundedValue irrepresentable_uniform(const GramMatrix& g, const ConeSpec& cone,
                                            const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  double best = kInf;
  IndexSet witness;
  for_each_superset_upto(cone.S, g.p(), cone.N, caps.subsets, [&](const IndexSet& nset) {
    Mat m;
    if (!irrepresentable_matrix(g, nset, m)) return;
    const double v = max_row_l1(m);
    if (v < best) {
      best = v;
      witness = nset;
    }
  });
  if (!std::isfinite(best))
    throw Error(ErrorCode::AllSubmatricesSingular, "no nonsingular Sigma_11(N) among supersets");
  std::string note = "argmin N = {";
  for (std::size_t i = 0; i < witness.size(); ++i)
    note += (i ? "," : "") + std::to_string(witness[i]);
  return BoundedValue::exact(best, note + "}");
}

enum class IrrPart { Part2, Part3 };

struct Part3Witness {
  std::vector<int> tau_S;
  IndexSet nset;             // empty when no (N, extension) reaches <= 1
  std::vector<int> extension;  // signs on N \ S
  double value = kInf;       // min over (N, extension) of the sup-norm
};

struct SignedIrrepresentable {
  bool holds = false;
  // Part2: min over N of max over sign vectors; Part3: max over tau_S of min over (N, ext)
  double value = kInf;
  IndexSet witness_nset;                 // Part 2
  std::vector<Part3Witness> witness_map;  // Part 3, one per tau_S
};

inline std::vector<int> sign_vector(std::uint64_t mask, Index len) {
  std::vector<int> t(static_cast<std::size_t>(len));
  for (Index i = 0; i < len; ++i) t[static_cast<std::size_t>(i)] = ((mask >> i) & 1U) ? -1 : 1;
  return t;
}

inline double part3_tolerance() { return 1e-10; }

inline SignedIrrepresentable irrepresentable_signed(const GramMatrix& g, const ConeSpec& cone,
                                                    IrrPart part, const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  const Index s = cone.s();
  if (pow2_saturating(cone.N) > caps.signs)
    throw CapExceeded(pow2_saturating(cone.N), caps.signs, "sign enumeration");
  SignedIrrepresentable out;
  bool any = false;

  if (part == IrrPart::Part2) {
    const double thr = cone.L > 0.0 ? 1.0 / cone.L : kInf;
    for_each_superset_upto(cone.S, g.p(), cone.N, caps.subsets, [&](const IndexSet& nset) {
      Mat m;
      if (!irrepresentable_matrix(g, nset, m)) return;
      any = true;
      const Index k = static_cast<Index>(nset.size());
      double worst = 0.0;
      // tau and -tau give the same norm
      for (std::uint64_t mask = 0; mask < pow2_saturating(k - 1); ++mask) {
        Vec t(k);
        for (Index i = 0; i < k; ++i) t[i] = ((mask >> i) & 1U) ? -1.0 : 1.0;
        if (m.rows() > 0) worst = std::max(worst, (m * t).cwiseAbs().maxCoeff());
      }
      if (worst < out.value) {
        out.value = worst;
        out.witness_nset = nset;
      }
    });
    if (!any) throw Error(ErrorCode::AllSubmatricesSingular, "no nonsingular Sigma_11(N)");
    out.holds = out.value < thr;
    if (!out.holds) out.witness_nset.clear();
    return out;
  }

  // Part 3
  struct Cand {
    IndexSet nset;
    Mat m;
    std::vector<Index> pos_S;      // positions of S inside nset
    std::vector<Index> pos_extra;  // positions of N \ S inside nset
  };
  std::vector<Cand> cands;
  for_each_superset_upto(cone.S, g.p(), cone.N, caps.subsets, [&](const IndexSet& nset) {
    Cand c;
    if (!irrepresentable_matrix(g, nset, c.m)) return;
    c.nset = nset;
    for (Index i = 0; i < static_cast<Index>(nset.size()); ++i) {
      if (std::binary_search(cone.S.begin(), cone.S.end(), nset[static_cast<std::size_t>(i)]))
        c.pos_S.push_back(i);
      else
        c.pos_extra.push_back(i);
    }
    cands.push_back(std::move(c));
  });
  if (cands.empty()) throw Error(ErrorCode::AllSubmatricesSingular, "no nonsingular Sigma_11(N)");

  out.value = -kInf;
  for (std::uint64_t smask = 0; smask < pow2_saturating(s); ++smask) {
    Part3Witness w;
    w.tau_S = sign_vector(smask, s);
    for (const Cand& c : cands) {
      const Index extra = static_cast<Index>(c.pos_extra.size());
      for (std::uint64_t emask = 0; emask < pow2_saturating(extra); ++emask) {
        Vec t(static_cast<Index>(c.nset.size()));
        for (std::size_t i = 0; i < c.pos_S.size(); ++i)
          t[c.pos_S[i]] = w.tau_S[i];
        const auto ext = sign_vector(emask, extra);
        for (std::size_t i = 0; i < c.pos_extra.size(); ++i) t[c.pos_extra[i]] = ext[i];
        const double v = c.m.rows() > 0 ? (c.m * t).cwiseAbs().maxCoeff() : 0.0;
        const bool first_ok = w.nset.empty() && v <= 1.0 + part3_tolerance();
        if (first_ok) {
          w.nset = c.nset;
          w.extension = ext;
        }
        w.value = std::min(w.value, v);
      }
    }
    out.value = std::max(out.value, w.value);
    out.witness_map.push_back(std::move(w));
  }
  out.holds = out.value <= 1.0 + part3_tolerance();
  return out;
}

// ---------------------------------------------------------------- coherence

enum class CoherenceKind { mutual, cumulative };

inline double lambda2_Ss(const GramMatrix& g, const IndexSet& S) {
  const double lam = lambda_min(block(g, S, Block::B11));
  const double scale = std::max(1.0, g.matrix().diagonal().maxCoeff());
  if (!(lam > kSingularRatio * scale))
    throw Error(ErrorCode::SingularUniformEigenvalue, "Lambda^2(S,s) = " + std::to_string(lam));
  return lam;
}

inline BoundedValue coherence(const GramMatrix& g, const ConeSpec& cone, CoherenceKind kind) {
  cone.validate(g.p());
  const double lam = lambda2_Ss(g, cone.S);
  const Mat b = block(g, cone.S, Block::B12);  // rows S, cols S^c
  const double s = static_cast<double>(cone.s());
  if (kind == CoherenceKind::mutual) {
    const double mx = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    return BoundedValue::exact(s * mx / lam, "s max|sigma_jk| / Lambda^2(S,s)");
  }
  const double agg = b.size() ? b.cwiseAbs().rowwise().sum().norm() : 0.0;
  return BoundedValue::exact(std::sqrt(s) * agg / lam,
                             "sqrt(s) ||(sum_j |sigma_jk|)_k||_2 / Lambda^2(S,s)");
}

// ---------------------------------------------------------------- ||Sigma_12(N)||_{2,q}

enum class NormQ { one, two, inf };
enum class NormMode { exact, paper_bound };

inline const char* to_string(NormQ q) {
  return q == NormQ::one ? "1" : q == NormQ::two ? "2" : "inf";
}

inline BoundedValue block_norm_2q(const GramMatrix& g, const IndexSet& nset, NormQ q,
                                  NormMode mode = NormMode::exact,
                                  const EnumerationCaps& caps = {}) {
  const Mat b = block(g, nset, Block::B12);
  if (b.size() == 0) return BoundedValue::exact(0.0, "empty complement");
  const Vec colnorm = b.colwise().norm().transpose();
  const double qinf = colnorm.maxCoeff();
  if (q == NormQ::inf) return BoundedValue::exact(qinf, "max column 2-norm");
  if (mode == NormMode::paper_bound) {
    BoundedValue v;
    v.upper = v.estimate = q == NormQ::two ? colnorm.norm() : colnorm.sum();
    v.lower = qinf;
    v.certificate = Certificate::CertifiedUpper;
    v.note = "column-norm bound";
    return v;
  }
  if (q == NormQ::two) return BoundedValue::exact(spectral_norm(b), "largest singular value");
  const Index m = b.cols();
  if (pow2_saturating(m - 1) > caps.signs)
    throw CapExceeded(pow2_saturating(m - 1), caps.signs, "exact (2,1) norm");
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < pow2_saturating(m - 1); ++mask) {
    Vec y(m);
    for (Index i = 0; i < m; ++i) y[i] = ((mask >> i) & 1U) ? -1.0 : 1.0;
    best = std::max(best, (b * y).norm());
  }
  return BoundedValue::exact(best, "max over sign vertices");
}

// ---------------------------------------------------------------- alpha(S)

// phi_S2s_lower is a certified lower bound on phi(S,2s) itself (not squared)
inline BoundedValue alpha_constant(const GramMatrix& g, const ConeSpec& cone, double phi_S2s_lower,
                                   const EnumerationCaps& caps = {}) {
  cone.validate(g.p());
  const Index s = cone.s();
  const double theta = restricted_orthogonality_value(g, cone.S, s, caps);
  const double delta_s = restricted_isometry(g, s, caps).estimate;
  const double lam = lambda_min(block(g, cone.S, Block::B11));
  const double denom = phi_S2s_lower * std::sqrt(std::max(0.0, lam));
  if (!(phi_S2s_lower > 0.0) || !(denom > 0.0))
    throw Error(ErrorCode::NonpositiveDenominator, "phi(S,2s) Lambda(S,s) must be positive");
  const double num = std::sqrt(2.0) * theta + std::sqrt(std::max(0.0, (1.0 + delta_s) * theta));
  BoundedValue v;
  v.estimate = v.upper = num / denom;
  v.lower = 0.0;
  v.certificate = Certificate::CertifiedUpper;
  v.note = "evaluated with the certified lower bound on phi(S,2s)";
  return v;
}

}  // namespace lasso_audit
