#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace lasso_audit {

using IndexSet = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EnumerationCaps {
  std::uint64_t subsets = 1'000'000;
  std::uint64_t signs = std::uint64_t{1} << 20;
};

// ---------------------------------------------------------------- GramMatrix

class GramMatrix {
 public:
  GramMatrix() = default;

  explicit GramMatrix(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be square and non-empty");
    for (Index j = 0; j < m_.rows(); ++j) {
      if (!(m_(j, j) >= 0.0))
        throw Error(ErrorCode::InvalidArgument,
                    "negative diagonal entry at " + std::to_string(j));
      for (Index k = j + 1; k < m_.cols(); ++k) {
        if (!std::isfinite(m_(j, k)) || std::abs(m_(j, k) - m_(k, j)) > 1e-12)
          throw Error(ErrorCode::InvalidArgument, "matrix not symmetric at (" +
                                                      std::to_string(j) + "," +
                                                      std::to_string(k) + ")");
      }
    }
  }

  Index p() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }
  double operator()(Index j, Index k) const { return m_(j, k); }

  // quadratic form on `trials` random unit vectors must stay above tol*scale
  bool psd_spot_check(std::uint64_t seed = 0, int trials = 1000, double tol = -1e-9) const {
    CounterRng rng(seed);
    const double scale = std::max(1.0, m_.diagonal().cwiseAbs().maxCoeff());
    for (int t = 0; t < trials; ++t) {
      Vec v = rng.normal_vector(p());
      v.normalize();
      if (v.dot(m_ * v) < tol * scale) return false;
    }
    return true;
  }

  // FNV-1a over dimension and raw entries, hex
  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&h](const void* data, std::size_t n) {
      const auto* b = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
      }
    };
    const std::int64_t dim = p();
    eat(&dim, sizeof dim);
    for (Index j = 0; j < p(); ++j)
      for (Index k = 0; k < p(); ++k) {
        const double x = m_(j, k);
        eat(&x, sizeof x);
      }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  Mat m_;
};

// constructor checks plus the PSD spot check
inline GramMatrix checked_gram(Mat m, std::uint64_t seed = 0) {
  GramMatrix g(std::move(m));
  if (!g.psd_spot_check(seed))
    throw Error(ErrorCode::InvalidArgument, "matrix fails the PSD spot check");
  return g;
}

// ---------------------------------------------------------------- ConeSpec

struct ConeSpec {
  IndexSet S;
  double L = 1.0;
  Index N = 0;

  Index s() const { return static_cast<Index>(S.size()); }

  void validate(Index p) const {
    if (S.empty()) throw Error(ErrorCode::InvalidArgument, "active set S is empty");
    for (std::size_t i = 0; i < S.size(); ++i) {
      if (S[i] < 0 || S[i] >= p)
        throw Error(ErrorCode::InvalidArgument, "index " + std::to_string(S[i]) + " out of range");
      if (i > 0 && S[i] <= S[i - 1])
        throw Error(ErrorCode::InvalidArgument, "S must be sorted and distinct");
    }
    if (!(L >= 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidArgument, "L must be >= 0");
    if (N < s() || N > p)
      throw Error(ErrorCode::InvalidArgument,
                  "N=" + std::to_string(N) + " outside [s, p]");
  }

  ConeSpec with_N(Index n) const { return ConeSpec{S, L, n}; }
  ConeSpec with_L(double l) const { return ConeSpec{S, l, N}; }
};

enum class ConeVariant { plain, adaptive };

inline const char* to_string(ConeVariant v) { return v == ConeVariant::plain ? "plain" : "adaptive"; }

// ---------------------------------------------------------------- BoundedValue

enum class Certificate { Exact, CertifiedLower, CertifiedUpper, Interval, Estimate };

inline const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::Exact: return "Exact";
    case Certificate::CertifiedLower: return "CertifiedLower";
    case Certificate::CertifiedUpper: return "CertifiedUpper";
    case Certificate::Interval: return "Interval";
    case Certificate::Estimate: return "Estimate";
  }
  return "Estimate";
}

// one bound together with the argument that certifies it
struct RouteBound {
  std::string tag;
  double value = kNaN;
};

struct BoundedValue {
  double estimate = kNaN;
  double lower = -kInf;
  double upper = kInf;
  Certificate certificate = Certificate::Estimate;
  std::string note;
  std::vector<RouteBound> lower_routes;
  std::vector<RouteBound> upper_routes;

  static BoundedValue exact(double v, std::string note = {}) {
    BoundedValue b;
    b.estimate = b.lower = b.upper = v;
    b.certificate = Certificate::Exact;
    b.note = std::move(note);
    return b;
  }

  bool consistent(double tol = 1e-9) const {
    const double slack = tol * std::max(1.0, std::abs(estimate));
    return !(lower > estimate + slack) && !(estimate > upper + slack);
  }

  // best lower bound not relying on any of the excluded arguments
  double lower_without(std::initializer_list<std::string_view> excluded) const {
    if (lower_routes.empty()) return lower;
    double best = -kInf;
    for (const auto& r : lower_routes) {
      bool skip = false;
      for (auto e : excluded) skip = skip || r.tag == e;
      if (!skip) best = std::max(best, r.value);
    }
    return best;
  }

  double upper_without(std::initializer_list<std::string_view> excluded) const {
    if (upper_routes.empty()) return upper;
    double best = kInf;
    for (const auto& r : upper_routes) {
      bool skip = false;
      for (auto e : excluded) skip = skip || r.tag == e;
      if (!skip) best = std::min(best, r.value);
    }
    return best;
  }

  // recompute lower/upper from the route lists
  void settle() {
    if (!lower_routes.empty()) lower = lower_without({});
    if (!upper_routes.empty()) upper = upper_without({});
  }
};

// ---------------------------------------------------------------- index sets

inline IndexSet complement(const IndexSet& set, Index p) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(0, p - static_cast<Index>(set.size()))));
  std::size_t i = 0;
  for (Index j = 0; j < p; ++j) {
    if (i < set.size() && set[i] == j) {
      ++i;
      continue;
    }
    out.push_back(j);
  }
  return out;
}

inline bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Mat submatrix(const Mat& m, const IndexSet& rows, const IndexSet& cols) {
  Mat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

inline Vec subvector(const Vec& v, const IndexSet& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

enum class Block { B11, B21, B22, B12 };

// rows/cols in ascending index order; 21 = rows outside nset, cols inside
inline Mat block(const GramMatrix& g, const IndexSet& nset, Block which) {
  for (Index j : nset)
    if (j < 0 || j >= g.p()) throw Error(ErrorCode::InvalidArgument, "index out of range");
  const IndexSet comp = complement(nset, g.p());
  switch (which) {
    case Block::B11: return submatrix(g.matrix(), nset, nset);
    case Block::B21: return submatrix(g.matrix(), comp, nset);
    case Block::B22: return submatrix(g.matrix(), comp, comp);
    case Block::B12: return submatrix(g.matrix(), nset, comp);
  }
  return {};
}

inline double min_eigen_11(const GramMatrix& g, const IndexSet& nset) {
  if (nset.empty()) throw Error(ErrorCode::InvalidArgument, "empty index set");
  return lambda_min(block(g, nset, Block::B11));
}

// ---------------------------------------------------------------- cones

inline double l1_on(const Vec& beta, const IndexSet& idx) {
  double s = 0.0;
  for (Index j : idx) s += std::abs(beta[j]);
  return s;
}

inline double l2_on(const Vec& beta, const IndexSet& idx) {
  double s = 0.0;
  for (Index j : idx) s += beta[j] * beta[j];
  return std::sqrt(s);
}

// allowed ||beta_{S^c}||_1 for the given variant
inline double cone_radius(const Vec& beta, const ConeSpec& cone, ConeVariant variant) {
  if (variant == ConeVariant::plain) return cone.L * l1_on(beta, cone.S);
  return std::sqrt(static_cast<double>(cone.s())) * cone.L * l2_on(beta, cone.S);
}

inline bool cone_membership(const Vec& beta, const ConeSpec& cone, const IndexSet& nset,
                            ConeVariant variant, double rel_tol = 1e-12) {
  const Index p = beta.size();
  const IndexSet sc = complement(cone.S, p);
  const double tail = l1_on(beta, sc);
  const double radius = cone_radius(beta, cone, variant);
  if (variant == ConeVariant::plain && l1_on(beta, cone.S) == 0.0) return false;
  if (tail > radius * (1.0 + rel_tol)) return false;
  const IndexSet extra = set_difference(nset, cone.S);
  if (extra.empty()) return true;
  double mn = kInf;
  for (Index j : extra) mn = std::min(mn, std::abs(beta[j]));
  for (Index j : complement(nset, p))
    if (std::abs(beta[j]) > mn * (1.0 + rel_tol)) return false;
  return true;
}

// S^c ranked by decreasing |beta_j|, ties by ascending index
inline IndexSet ranked_tail(const Vec& beta, const IndexSet& S) {
  IndexSet sc = complement(S, beta.size());
  std::stable_sort(sc.begin(), sc.end(),
                   [&](Index a, Index b) { return std::abs(beta[a]) > std::abs(beta[b]); });
  return sc;
}

// S together with the N-s largest tail coordinates
inline IndexSet canonical_nset(const Vec& beta, const IndexSet& S, Index N) {
  const IndexSet ranked = ranked_tail(beta, S);
  const Index extra = std::max<Index>(0, N - static_cast<Index>(S.size()));
  IndexSet out = S;
  for (Index i = 0; i < extra && i < static_cast<Index>(ranked.size()); ++i)
    out.push_back(ranked[static_cast<std::size_t>(i)]);
  std::sort(out.begin(), out.end());
  return out;
}

struct ChunkPartition {
  std::vector<IndexSet> chunks;  // chunks[0] is the head chunk N_0
  Index K() const { return static_cast<Index>(chunks.size()) - 1; }
};

inline ChunkPartition chunk_tail(const Vec& beta, const ConeSpec& cone) {
  const Index s = cone.s();
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "s must be >= 1");
  const IndexSet ranked = ranked_tail(beta, cone.S);
  ChunkPartition out;
  for (std::size_t start = 0; start < ranked.size(); start += static_cast<std::size_t>(s)) {
    const std::size_t stop = std::min(ranked.size(), start + static_cast<std::size_t>(s));
    IndexSet c(ranked.begin() + static_cast<std::ptrdiff_t>(start),
               ranked.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(c.begin(), c.end());
    out.chunks.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- perturbation

inline double d_infinity(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "d_infinity needs equal dimensions");
  return (a - b).cwiseAbs().maxCoeff();
}

inline double d_infinity(const GramMatrix& a, const GramMatrix& b) {
  return d_infinity(a.matrix(), b.matrix());
}

struct PerturbationPair {
  GramMatrix sigma0;
  GramMatrix sigma1;
  double d_inf = 0.0;

  PerturbationPair(GramMatrix s0, GramMatrix s1)
      : sigma0(std::move(s0)), sigma1(std::move(s1)), d_inf(d_infinity(sigma0, sigma1)) {}
};

// ---------------------------------------------------------------- enumeration

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
  return a > m - b ? m : a + b;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
  if (a != 0 && b > m / a) return m;
  return a * b;
}

inline std::uint64_t pow2_saturating(Index k) {
  if (k >= 63) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << k;
}

// k-subsets of {0..n-1} in lexicographic order
class Combinations {
 public:
  Combinations(Index n, Index k) : n_(n), k_(k), valid_(k >= 0 && k <= n) {
    if (valid_) {
      idx_.resize(static_cast<std::size_t>(k));
      std::iota(idx_.begin(), idx_.end(), Index{0});
    }
  }
  bool valid() const { return valid_; }
  const IndexSet& current() const { return idx_; }
  void advance() {
    Index i = k_ - 1;
    while (i >= 0 && idx_[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
    if (i < 0) {
      valid_ = false;
      return;
    }
    ++idx_[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k_; ++j)
      idx_[static_cast<std::size_t>(j)] = idx_[static_cast<std::size_t>(j - 1)] + 1;
  }

 private:
  Index n_, k_;
  bool valid_;
  IndexSet idx_;
};

// every N with S ⊆ N ⊆ {0..p-1}, |N| = size, lexicographic in the added indices
class SupersetStream {
 public:
  SupersetStream(const IndexSet& S, Index p, Index size)
      : S_(S), comp_(complement(S, p)),
        comb_(static_cast<Index>(comp_.size()), size - static_cast<Index>(S.size())) {
    fill();
  }
  bool valid() const { return comb_.valid(); }
  const IndexSet& current() const { return cur_; }
  void advance() {
    comb_.advance();
    fill();
  }

 private:
  void fill() {
    if (!comb_.valid()) return;
    cur_ = S_;
    for (Index i : comb_.current()) cur_.push_back(comp_[static_cast<std::size_t>(i)]);
    std::sort(cur_.begin(), cur_.end());
  }
  IndexSet S_;
  IndexSet comp_;
  Combinations comb_;
  IndexSet cur_;
};

inline std::uint64_t superset_count(Index p, Index s, Index size) {
  if (size < s || size > p) return 0;
  return binomial(static_cast<std::uint64_t>(p - s), static_cast<std::uint64_t>(size - s));
}

inline std::uint64_t superset_count_upto(Index p, Index s, Index N) {
  std::uint64_t total = 0;
  for (Index m = s; m <= N; ++m) total = saturating_add(total, superset_count(p, s, m));
  return total;
}

inline SupersetStream enumerate_supersets(const ConeSpec& cone, Index p,
                                          std::uint64_t cap = EnumerationCaps{}.subsets) {
  cone.validate(p);
  const std::uint64_t need = superset_count(p, cone.s(), cone.N);
  if (need > cap) throw CapExceeded(need, cap, "superset enumeration");
  return SupersetStream(cone.S, p, cone.N);
}

// visit supersets of sizes s..N (smallest size first)
template <class F>
void for_each_superset_upto(const IndexSet& S, Index p, Index N, std::uint64_t cap, F&& fn) {
  const std::uint64_t need = superset_count_upto(p, static_cast<Index>(S.size()), N);
  if (need > cap) throw CapExceeded(need, cap, "superset enumeration (all sizes)");
  for (Index m = static_cast<Index>(S.size()); m <= N; ++m)
    for (SupersetStream st(S, p, m); st.valid(); st.advance()) fn(st.current());
}

}  // namespace lasso_audit
