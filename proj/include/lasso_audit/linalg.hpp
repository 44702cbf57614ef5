#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace lasso_audit {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kSingularRatio = 1e-10;

struct SymEig {
  Vec values;  // ascending
  Mat vectors;
};

inline SymEig sym_eig(const Mat& a, bool with_vectors = true) {
  SymEig out;
  if (a.rows() == 0) return out;
  if (a.rows() == 1) {
    out.values = Vec::Constant(1, a(0, 0));
    out.vectors = Mat::Ones(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(
      a, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  out.values = es.eigenvalues();
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

inline double lambda_min(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  return sym_eig(a, false).values(0);
}

inline double lambda_max(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  const Vec v = sym_eig(a, false).values;
  return v(v.size() - 1);
}

inline bool is_singular_spectrum(const Vec& ascending) {
  if (ascending.size() == 0) return true;
  const double hi = ascending(ascending.size() - 1);
  return hi <= 0.0 || ascending(0) <= kSingularRatio * hi;
}

// Inverse of a symmetric block via its spectrum; false when singular.
inline bool sym_inverse(const Mat& a, Mat& inv) {
  const SymEig e = sym_eig(a);
  if (is_singular_spectrum(e.values)) return false;
  inv = e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose();
  inv = 0.5 * (inv + inv.transpose()).eval();
  return true;
}

// PSD square root with negative eigenvalues clamped at 0
inline Mat sym_sqrt(const Mat& a) {
  const SymEig e = sym_eig(a);
  const Vec r = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * r.asDiagonal() * e.vectors.transpose();
}

inline double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

// 50 power steps from a fixed start; deterministic
inline double power_lambda_max(const Mat& a, int iters = 50) {
  if (a.rows() == 0) return 0.0;
  Vec v = Vec::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = a * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    est = v.dot(w);
    v = w / n;
  }
  return std::max(est, (a * v).norm());
}

}  // namespace lasso_audit
