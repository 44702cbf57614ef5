#include <gtest/gtest.h>

#include "lasso_audit/lasso_audit.hpp"
#include "test_util.hpp"

using namespace lasso_audit;

namespace {

Mat one_column(int s, int p, double rho) {
  Mat m = Mat::Identity(p, p);
  for (int k = 0; k < s; ++k) m(s, k) = m(k, s) = rho / std::sqrt(double(s));
  return m;
}

SolverConfig quick() { return SolverConfig{}.reduced(); }

const ImplicationVerdict& find(const std::vector<ImplicationVerdict>& vs, const std::string& id) {
  for (const auto& v : vs)
    if (v.edge_id == id) return v;
  throw std::runtime_error("no " + id);
}

}  // namespace

TEST(Implications, IdentityAllVerifiedNoSkips) {
  const GramMatrix g(Mat::Identity(6, 6));
  const ConeSpec c{{0, 1}, 1, 3};
  const auto vs = check_all(g, c, quick());
  ASSERT_EQ(vs.size(), 11u);
  for (const auto& v : vs) {
    EXPECT_EQ(v.status, EdgeStatus::Verified) << v.edge_id;
    EXPECT_TRUE(v.holds);
    for (const auto& part : v.parts) EXPECT_NE(part.status, EdgeStatus::Skipped) << v.edge_id << " " << part.label;
  }
}

TEST(Implications, TightIrrepresentableEdge) {
  const GramMatrix g(one_column(4, 9, 0.4));
  const ConeSpec c{{0, 1, 2, 3}, 1, 4};
  const auto rep = analyze(g, c, quick());
  const auto v = check_edge("E4", g, c, rep, quick());
  EXPECT_NEAR(rep.at("irr_uniform[s]").estimate, 0.8, 1e-12);
  EXPECT_LE(std::abs(v.slack), 1e-6);
  EXPECT_NE(v.status, EdgeStatus::Violated);
  EXPECT_NE(check_edge("E8", g, c, rep, quick()).status, EdgeStatus::Skipped);
}

TEST(Implications, PremiseFailureSkips) {
  const GramMatrix g(one_column(4, 9, 0.6));
  const ConeSpec c{{0, 1, 2, 3}, 1, 4};
  const auto rep = analyze(g, c, quick());
  const auto v = check_edge("E8", g, c, rep, quick());
  EXPECT_EQ(v.status, EdgeStatus::Skipped);
  EXPECT_TRUE(v.holds);
  EXPECT_NE(v.skip_reason.find("premise"), std::string::npos);
}

TEST(Implications, NoViolationsOnRandomInstances) {
  for (unsigned seed = 0; seed < 12; ++seed) {
    const GramMatrix g(oracle::random_psd(7, 1000 + seed, seed % 2 ? 5 : -1));
    const ConeSpec c{{1, 4}, 0.5 + 0.5 * (seed % 3), 3};
    for (const auto& v : check_all(g, c, quick())) {
      EXPECT_NE(v.status, EdgeStatus::Violated) << seed << " " << v.edge_id << " " << v.slack;
      for (const auto& part : v.parts)
        if (part.status != EdgeStatus::Skipped) {
          // the >= side is read at its lower end, the <= side at its upper end
          EXPECT_NE(part.note.find(".lower >="), std::string::npos) << part.note;
          EXPECT_NE(part.note.find(".upper"), std::string::npos) << part.note;
          EXPECT_NEAR(part.slack, part.lhs_value - part.rhs_value, 1e-15 + 1e-15 * std::abs(part.lhs_value));
        }
    }
  }
}

TEST(Implications, ThreadCountDoesNotChangeVerdicts) {
  const GramMatrix g(oracle::random_psd(7, 77));
  const ConeSpec c{{0, 3}, 1, 3};
  SolverConfig one = quick(), four = quick();
  four.threads = 4;
  const auto a = check_all(g, c, one);
  const auto b = check_all(g, c, four);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].status, b[i].status);
    if (std::isfinite(a[i].slack)) EXPECT_EQ(a[i].slack, b[i].slack) << a[i].edge_id;
  }
}

TEST(Implications, MissingInputAndUnknownEdge) {
  const GramMatrix g(Mat::Identity(6, 6));
  const ConeSpec c{{0, 1}, 1, 2};
  auto rep = analyze(g, c, quick());
  rep.entries.erase("irr_uniform[s]");
  EXPECT_THROW(check_edge("E4", g, c, rep), MissingInput);
  rep.errors["irr_uniform[s]"] = "removed";
  EXPECT_EQ(check_edge("E4", g, c, rep).status, EdgeStatus::Skipped);
  try {
    check_edge("E99", g, c, rep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Implications, ReportKeys) {
  const GramMatrix g(oracle::random_psd(6, 4));
  const auto rep = analyze(g, ConeSpec{{0, 2}, 1, 3}, quick());
  for (const char* k : {"lambda2[s]", "lambda2[N]", "lambda2[2s]", "theta_uniform[s,s]", "rip", "mutual", "cumulative",
                        "phi_compat", "phi_re[2s]", "phi_re_adaptive[N]", "theta_rr[s]", "irr_part3[N]", "alpha"})
    EXPECT_TRUE(rep.has(k) || rep.errors.count(k)) << k;
  for (const auto& [k, v] : rep.entries) EXPECT_TRUE(v.lower <= v.upper || std::isnan(v.lower)) << k;
}

TEST(Transfer, ZeroDistanceKeepsValue) {
  const GramMatrix g(oracle::random_psd(6, 2));
  const ConeSpec c{{0, 1}, 1, 2};
  const auto phi = compatibility_constant(g, c);
  const auto t = perturbation_transfer(PerturbationPair(g, g), c, phi, TransferKind::compat);
  EXPECT_NEAR(t.lower, phi.lower, 1e-11);
  EXPECT_EQ(t.certificate, Certificate::CertifiedLower);
}

TEST(Transfer, SmallPerturbationOfIdentity) {
  const int p = 10;
  Mat e = Mat::Identity(p, p);
  const Vec r = oracle::random_vec(p * p, 3);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) e(i, j) = e(j, i) = 1e-4 * std::tanh(r[i * p + j]);
  const GramMatrix g0(Mat::Identity(p, p)), g1(e);
  const ConeSpec c{{0, 1, 2, 3}, 1, 4};
  const PerturbationPair pair(g0, g1);
  EXPECT_LE(pair.d_inf, 1e-4);
  const auto t = perturbation_transfer(pair, c, compatibility_constant(g0, c), TransferKind::compat);
  EXPECT_GE(std::sqrt(t.lower), 0.96);
  EXPECT_LE(t.lower, compatibility_constant(g1, c).upper);
}

TEST(Transfer, MonotoneInDistanceAndBelowTarget) {
  const GramMatrix g0(oracle::random_psd(6, 8));
  const ConeSpec c{{1, 3}, 1, 2};
  const auto phi0 = compatibility_constant(g0, c);
  double prev = kInf;
  for (double eps : {0.0, 1e-4, 1e-3, 1e-2, 5e-2}) {
    Mat m = g0.matrix();
    const Vec r = oracle::random_vec(36, 11);
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) m(i, j) = m(j, i) = m(i, j) + eps * std::tanh(r[i * 6 + j]);
    if (oracle::eig_min(m) <= 0) continue;
    const GramMatrix g1(m);
    const auto t = perturbation_transfer(PerturbationPair(g0, g1), c, phi0, TransferKind::compat);
    EXPECT_LE(t.lower, prev + 1e-15);
    EXPECT_LE(t.lower, compatibility_constant(g1, c).upper + 1e-12);
    prev = t.lower;
  }
}
