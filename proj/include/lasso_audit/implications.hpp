#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "estimators.hpp"
#include "lasso.hpp"

namespace lasso_audit {

// ---------------------------------------------------------------- perturbation transfer

enum class TransferKind { compat, re, re_adaptive };

inline const char* to_string(TransferKind k) {
  return k == TransferKind::compat ? "compat" : k == TransferKind::re ? "re" : "re_adaptive";
}

// phi0 holds a certified lower bound on the squared constant of sigma0; the
// result bounds the squared constant of sigma1 from below
inline BoundedValue perturbation_transfer(const PerturbationPair& pair, const ConeSpec& cone,
                                          const BoundedValue& phi0, TransferKind which) {
  cone.validate(pair.sigma0.p());
  const double s = static_cast<double>(cone.s());
  const double l0 = std::max(0.0, phi0.lower);
  const double c = (cone.L + 1.0) * std::sqrt(pair.d_inf * s);
  const double by_root = std::pow(std::max(0.0, std::sqrt(l0) - c), 2);
  const double by_ratio = std::max(0.0, l0 - c * c);
  BoundedValue v;
  v.lower_routes = {{"transfer", detail::widen_down(by_root)}, {"transfer:ratio", detail::widen_down(by_ratio)}};
  v.settle();
  v.lower = std::max(0.0, v.lower);
  v.estimate = v.lower;
  v.upper = kInf;
  v.certificate = Certificate::CertifiedLower;
  v.note = std::string(to_string(which)) + ": d_inf = " + std::to_string(pair.d_inf) +
           "; ratio factor bound " + std::to_string(l0 > 0.0 ? c * c / l0 : kInf);
  return v;
}

// ---------------------------------------------------------------- report assembly

namespace detail {

struct SizeLabel {
  std::string label;
  Index N;
};

inline std::vector<SizeLabel> report_sizes(const ConeSpec& cone, Index p) {
  std::vector<SizeLabel> out{{"s", cone.s()}, {"N", cone.N}};
  if (2 * cone.s() <= p) out.push_back({"2s", 2 * cone.s()});
  return out;
}

inline std::string key(const std::string& base, const std::string& label) { return base + "[" + label + "]"; }

template <class F>
void try_entry(ConditionReport& r, const std::string& k, F&& f) {
  try {
    r.entries[k] = f();
  } catch (const std::exception& e) {
    r.errors[k] = e.what();
  }
}

inline BoundedValue decision_value(double value, bool holds, const std::string& what) {
  BoundedValue v = BoundedValue::exact(value, what + (holds ? ": holds" : ": fails"));
  return v;
}

}  // namespace detail

// every constant the implication edges consume; failures are kept in `errors`
inline ConditionReport analyze(const GramMatrix& g, const ConeSpec& cone, const SolverConfig& cfg = {},
                               const std::vector<RouteBound>& transfer_routes = {}) {
  const Index p = g.p();
  cone.validate(p);
  ConditionReport r;
  r.cone = cone;
  r.p = p;
  r.fingerprint = g.fingerprint();
  const auto& caps = cfg.caps;
  const Index s = cone.s();
  const ConeSpec unit = cone.with_L(1.0);
  const auto sizes = detail::report_sizes(cone, p);

  for (const auto& sz : sizes) {
    const ConeSpec c = cone.with_N(sz.N);
    detail::try_entry(r, detail::key("lambda2", sz.label), [&] { return uniform_eigenvalue(g, c, caps); });
    detail::try_entry(r, detail::key("delta_N", sz.label), [&] { return restricted_isometry(g, sz.N, caps); });
    detail::try_entry(r, detail::key("theta", sz.label), [&] { return restricted_orthogonality(g, c, caps); });
    detail::try_entry(r, detail::key("weak_rip", sz.label), [&] { return weak_rip_constant(g, c, caps); });
  }
  if (2 * s <= p) {
    detail::try_entry(r, "theta_uniform[s,s]", [&] { return theta_uniform(g, s, s, caps); });
    detail::try_entry(r, "theta_uniform[s,2s]", [&] { return theta_uniform(g, s, 2 * s, caps); });
    detail::try_entry(r, "rip", [&] { return rip_constant(g, s, caps); });
  } else {
    r.errors["rip"] = "needs 2s <= p";
  }

  for (const std::string lab : {"s", "N"}) {
    const ConeSpec c = unit.with_N(lab == "s" ? s : cone.N);
    detail::try_entry(r, detail::key("irr_uniform", lab), [&] { return irrepresentable_uniform(g, c, caps); });
    detail::try_entry(r, detail::key("irr_part2", lab), [&] {
      const auto d = irrepresentable_signed(g, c, IrrPart::Part2, caps);
      return detail::decision_value(d.value, d.holds, "weak irrepresentable, sign vertices");
    });
  }
  for (const auto& sz : sizes) {
    if (sz.label == "s") continue;
    const ConeSpec c = unit.with_N(sz.N);
    detail::try_entry(r, detail::key("irr_part3", sz.label), [&] {
      const auto d = irrepresentable_signed(g, c, IrrPart::Part3, caps);
      return detail::decision_value(d.value, d.holds, "weak irrepresentable, sign extensions");
    });
  }
  detail::try_entry(r, "mutual", [&] { return coherence(g, unit.with_N(s), CoherenceKind::mutual); });
  detail::try_entry(r, "cumulative", [&] { return coherence(g, unit.with_N(s), CoherenceKind::cumulative); });

  for (const auto& sz : sizes) {
    const ConeSpec c = unit.with_N(sz.N);
    detail::try_entry(r, detail::key("theta_rr", sz.label),
                      [&] { return restricted_regression(g, c, ConeVariant::plain, cfg); });
    detail::try_entry(r, detail::key("theta_rr_adaptive", sz.label),
                      [&] { return restricted_regression(g, c, ConeVariant::adaptive, cfg); });
  }

  Vec compat_arg;
  detail::try_entry(r, "phi_compat", [&] {
    CompatibilityResult cr = compatibility_detail(g, cone.with_N(s), cfg);
    compat_arg = cr.argmin;
    BoundedValue v = cr.value;
    if (r.has("irr_uniform[s]") && r.has("lambda2[s]")) {
      const double th = cone.L * r.at("irr_uniform[s]").upper;
      if (th < 1.0)
        v.lower_routes.push_back(
            {"E8", detail::widen_down((1.0 - th) * (1.0 - th) * r.at("lambda2[s]").lower)});
    }
    for (const auto& t : transfer_routes) v.lower_routes.push_back(t);
    if (v.lower_routes.empty()) v.lower_routes.push_back({"exact", v.lower});
    if (v.upper_routes.empty()) v.upper_routes.push_back({"exact", v.upper});
    v.settle();
    if (v.certificate == Certificate::Exact && v.lower > v.estimate) v.certificate = Certificate::Interval;
    return v;
  });

  for (const auto& sz : sizes) {
    const ConeSpec c = cone.with_N(sz.N);
    Vec plain_arg;
    std::vector<Vec> hints;
    if (compat_arg.size() == p) hints.push_back(compat_arg);
    detail::try_entry(r, detail::key("phi_re", sz.label), [&] {
      auto res = restricted_eigenvalue_detail(g, c, ConeVariant::plain, cfg, hints, transfer_routes);
      plain_arg = res.argmin;
      return res.value;
    });
    std::vector<Vec> hints2 = hints;
    if (plain_arg.size() == p) hints2.push_back(plain_arg);
    detail::try_entry(r, detail::key("phi_re_adaptive", sz.label), [&] {
      return restricted_eigenvalue_detail(g, c, ConeVariant::adaptive, cfg, hints2, transfer_routes).value;
    });
    detail::try_entry(r, detail::key("phi_lower_routes", sz.label),
                      [&] { return certified_lower_phi(g, c, ConeVariant::plain, caps, transfer_routes); });
  }

  if (2 * s <= p) {
    detail::try_entry(r, "alpha", [&] {
      const double l2 = cone.L == 1.0 && r.has("phi_re[2s]")
                            ? r.at("phi_re[2s]").lower
                            : certified_lower_phi(g, unit.with_N(2 * s), ConeVariant::plain, caps).lower;
      return alpha_constant(g, unit.with_N(s), std::sqrt(std::max(0.0, l2)), caps);
    });
  } else {
    r.errors["alpha"] = "needs 2s <= p";
  }
  return r;
}

// ---------------------------------------------------------------- verdicts

enum class EdgeStatus { Verified, Inconclusive, Violated, Skipped };

inline const char* to_string(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::Verified: return "Verified";
    case EdgeStatus::Inconclusive: return "Inconclusive";
    case EdgeStatus::Violated: return "Violated";
    case EdgeStatus::Skipped: return "Skipped";
  }
  return "Skipped";
}

// one inequality  ge >= le  between two intervals
struct EdgePart {
  std::string label;
  double lhs_value = kNaN;  // lower endpoint of the >= side
  double rhs_value = kNaN;  // upper endpoint of the <= side
  double lhs_upper = kNaN;
  double rhs_lower = kNaN;
  double slack = kNaN;      // lhs_value - rhs_value
  EdgeStatus status = EdgeStatus::Skipped;
  std::string note;
};

struct ImplicationVerdict {
  std::string edge_id;
  double lhs_value = kNaN;
  double rhs_value = kNaN;
  bool holds = true;      // not violated
  bool verified = false;  // every evaluated part verified
  double slack = kNaN;
  EdgeStatus status = EdgeStatus::Skipped;
  std::string bound_direction_note;
  std::string skip_reason;
  std::vector<EdgePart> parts;
};

namespace detail {

struct Side {
  std::string name;
  double lower = kNaN;
  double upper = kNaN;
};

inline Side exact_side(std::string name, double v) { return {std::move(name), v, v}; }

inline double edge_tol(double a, double b) {
  double m = 1.0;
  if (std::isfinite(a)) m = std::max(m, std::abs(a));
  if (std::isfinite(b)) m = std::max(m, std::abs(b));
  return 1e-9 * m;
}

inline EdgePart compare(std::string label, const Side& ge, const Side& le) {
  EdgePart part;
  part.label = std::move(label);
  part.lhs_value = ge.lower;
  part.lhs_upper = ge.upper;
  part.rhs_value = le.upper;
  part.rhs_lower = le.lower;
  part.slack = ge.lower - le.upper;
  part.note = "lhs " + ge.name + ".lower >= rhs " + le.name + ".upper";
  const double tol = edge_tol(ge.lower, le.upper);
  if (ge.upper < le.lower - edge_tol(ge.upper, le.lower)) part.status = EdgeStatus::Violated;
  else if (ge.lower >= le.upper - tol) part.status = EdgeStatus::Verified;
  else part.status = EdgeStatus::Inconclusive;
  return part;
}

inline EdgePart skipped(std::string label, std::string reason) {
  EdgePart part;
  part.label = std::move(label);
  part.status = EdgeStatus::Skipped;
  part.note = std::move(reason);
  return part;
}

inline void finalize(ImplicationVerdict& v) {
  bool any_eval = false, all_verified = true, violated = false;
  const EdgePart* worst = nullptr;
  for (const auto& p : v.parts) {
    if (p.status == EdgeStatus::Skipped) continue;
    any_eval = true;
    if (p.status == EdgeStatus::Violated) violated = true;
    if (p.status != EdgeStatus::Verified) all_verified = false;
    if (!worst || p.slack < worst->slack || (std::isnan(worst->slack) && !std::isnan(p.slack))) worst = &p;
  }
  if (!any_eval) {
    v.status = EdgeStatus::Skipped;
    v.holds = true;
    v.verified = false;
    if (v.skip_reason.empty()) {
      for (const auto& p : v.parts) v.skip_reason += (v.skip_reason.empty() ? "" : "; ") + p.label + ": " + p.note;
    }
    return;
  }
  v.status = violated ? EdgeStatus::Violated : all_verified ? EdgeStatus::Verified : EdgeStatus::Inconclusive;
  v.holds = !violated;
  v.verified = all_verified;
  v.skip_reason.clear();
  if (worst) {
    v.lhs_value = worst->lhs_value;
    v.rhs_value = worst->rhs_value;
    v.slack = worst->slack;
    v.bound_direction_note = worst->label + ": " + worst->note;
  }
}

// report lookups: MissingInput when a key was never requested, nullptr when
// the computation failed (the part is then skipped)
class Inputs {
 public:
  Inputs(const ConditionReport& r, std::string edge) : r_(r), edge_(std::move(edge)) {}
  const BoundedValue* get(const std::string& k) const {
    auto it = r_.entries.find(k);
    if (it != r_.entries.end()) return &it->second;
    if (r_.errors.count(k)) return nullptr;
    throw MissingInput(edge_, k);
  }
  std::string why(const std::string& k) const {
    auto it = r_.errors.find(k);
    return it == r_.errors.end() ? "missing " + k : k + " unavailable: " + it->second;
  }

 private:
  const ConditionReport& r_;
  std::string edge_;
};

inline double max_block_norm_2q(const GramMatrix& g, const ConeSpec& cone, NormQ q, bool& exact_out,
                                double& lower_out, const EnumerationCaps& caps) {
  double up = 0.0, lo = 0.0;
  exact_out = true;
  for (auto st = enumerate_supersets(cone, g.p(), caps.subsets); st.valid(); st.advance()) {
    BoundedValue b;
    try {
      b = block_norm_2q(g, st.current(), q, NormMode::exact, caps);
    } catch (const CapExceeded&) {
      b = block_norm_2q(g, st.current(), q, NormMode::paper_bound, caps);
      exact_out = false;
    }
    up = std::max(up, b.upper);
    lo = std::max(lo, b.lower);
  }
  lower_out = lo;
  return up;
}

}  // namespace detail

inline const std::vector<std::string>& edge_ids() {
  static const std::vector<std::string> ids{"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E11"};
  return ids;
}

inline ImplicationVerdict check_edge(const std::string& edge_id, const GramMatrix& g, const ConeSpec& cone,
                                     const ConditionReport& rep, const SolverConfig& cfg = {}) {
  using detail::compare;
  using detail::exact_side;
  using detail::Side;
  using detail::skipped;
  ImplicationVerdict v;
  v.edge_id = edge_id;
  const detail::Inputs in(rep, edge_id);
  const Index p = g.p();
  const Index s = cone.s();
  const double sd = static_cast<double>(s);
  const double L = cone.L;
  const bool has2s = 2 * s <= p;
  const auto sizes = detail::report_sizes(cone, p);
  auto side = [](const std::string& name, const BoundedValue& b, double lo, double up) { return Side{name, lo, up}; };

  if (edge_id == "E1") {
    for (const auto& sz : sizes)
      for (ConeVariant var : {ConeVariant::plain, ConeVariant::adaptive}) {
        const std::string suffix = var == ConeVariant::plain ? "" : "_adaptive";
        const std::string kphi = detail::key("phi_re" + suffix, sz.label);
        const std::string kth = detail::key("theta_rr" + suffix, sz.label);
        const std::string klam = detail::key("lambda2", sz.label);
        const std::string label = kphi;
        const auto* phi = in.get(kphi);
        const auto* th = in.get(kth);
        const auto* lam = in.get(klam);
        if (!phi || !th || !lam) {
          v.parts.push_back(skipped(label, in.why(!phi ? kphi : !th ? kth : klam)));
          continue;
        }
        const double thu = L * th->upper, thl = std::max(0.0, L * th->lower);
        if (!(thu < 1.0)) {
          v.parts.push_back(skipped(label, "premise L*theta.upper < 1 not certified"));
          continue;
        }
        const Side ge = side(kphi, *phi, phi->lower_without({"E1"}), phi->upper);
        const Side le{"(1-L*" + kth + ")^2*" + klam, (1.0 - thu) * (1.0 - thu) * lam->lower,
                      (1.0 - thl) * (1.0 - thl) * lam->upper};
        v.parts.push_back(compare(label, ge, le));
      }
  } else if (edge_id == "E2") {
    if (const auto* th = in.get("theta_rr_adaptive[s]"); th && in.get("lambda2[s]")) {
      const double lam = in.get("lambda2[s]")->lower;
      const double b = std::sqrt(sd) * block_norm_2q(g, cone.S, NormQ::inf).estimate / lam;
      v.parts.push_back(compare("N=s, q=inf", exact_side("sqrt(s)*norm_2inf(S)/lambda2[s]", b),
                                side("theta_rr_adaptive[s]", *th, th->lower,
                                     th->upper_without({"E2", "elementary:holder"}))));
    } else {
      v.parts.push_back(skipped("N=s", "theta_rr_adaptive[s] or lambda2[s] unavailable"));
    }
    if (!has2s) {
      v.parts.push_back(skipped("N=2s", "2s > p"));
    } else {
      const auto* th = in.get("theta_rr_adaptive[2s]");
      const auto* lam = in.get("lambda2[2s]");
      if (!th || !lam || !(lam->lower > 0.0)) {
        v.parts.push_back(skipped("N=2s", "theta_rr_adaptive[2s] or lambda2[2s] unavailable"));
      } else {
        const ConeSpec c2 = cone.with_N(2 * s);
        for (NormQ q : {NormQ::inf, NormQ::two, NormQ::one}) {
          const double sq = q == NormQ::inf ? 1.0 : q == NormQ::two ? std::sqrt(sd) : sd;
          bool exact = true;
          double lo = 0.0;
          const double up = detail::max_block_norm_2q(g, c2, q, exact, lo, cfg.caps);
          const double f = std::sqrt(sd) / (sq * lam->lower);
          Side ge{std::string("lemma bound q=") + to_string(q), (exact ? up : lo) * f, up * f};
          v.parts.push_back(compare(std::string("N=2s, q=") + to_string(q), ge,
                                    side("theta_rr_adaptive[2s]", *th, th->lower, th->upper_without({"E2"}))));
        }
      }
    }
  } else if (edge_id == "E3") {
    const auto* mutual = in.get("mutual");
    const auto* cum = in.get("cumulative");
    const auto* th = in.get("theta_rr_adaptive[s]");
    const auto* lam = in.get("lambda2[s]");
    if (mutual && lam) {
      const double mid = std::sqrt(sd) * block_norm_2q(g, cone.S, NormQ::inf).estimate / lam->lower;
      v.parts.push_back(compare("q=inf: mid <= mutual", exact_side("mutual", mutual->estimate),
                                exact_side("sqrt(s)*norm_2inf(S)/lambda2[s]", mid)));
      if (th)
        v.parts.push_back(compare("q=inf: adaptive <= mid", exact_side("sqrt(s)*norm_2inf(S)/lambda2[s]", mid),
                                  side("theta_rr_adaptive[s]", *th, th->lower,
                                       th->upper_without({"E2", "elementary:holder"}))));
    } else {
      v.parts.push_back(skipped("q=inf", "mutual or lambda2[s] unavailable"));
    }
    if (cum && th)
      v.parts.push_back(compare("q=1: adaptive <= cumulative", exact_side("cumulative", cum->estimate),
                                side("theta_rr_adaptive[s]", *th, th->lower, th->upper_without({"E3"}))));
    else
      v.parts.push_back(skipped("q=1, N=s", "cumulative or theta_rr_adaptive[s] unavailable"));
    if (!has2s) {
      v.parts.push_back(skipped("N=2s", "2s > p"));
    } else {
      const auto* th2 = in.get("theta_rr[2s]");
      const auto* tha2 = in.get("theta_rr_adaptive[2s]");
      const auto* lam2 = in.get("lambda2[2s]");
      if (!th2 || !tha2 || !lam2 || !(lam2->lower > 0.0)) {
        v.parts.push_back(skipped("N=2s", "2s constants unavailable"));
      } else {
        double cumb = 0.0, spec = 0.0;
        for (auto st = enumerate_supersets(cone.with_N(2 * s), p, cfg.caps.subsets); st.valid(); st.advance()) {
          const Mat b = block(g, st.current(), Block::B12);
          if (b.size()) cumb = std::max(cumb, b.cwiseAbs().rowwise().sum().norm());
          spec = std::max(spec, block_norm_2q(g, st.current(), NormQ::two).estimate);
        }
        v.parts.push_back(compare("q=1: plain 2s <= cumulative 2s",
                                  exact_side("cumulative_2s", cumb / (std::sqrt(sd) * lam2->lower)),
                                  side("theta_rr[2s]", *th2, th2->lower, th2->upper_without({"E3"}))));
        v.parts.push_back(compare("q=2: adaptive 2s <= spectral", exact_side("spectral_2s", spec / lam2->lower),
                                  side("theta_rr_adaptive[2s]", *tha2, tha2->lower, tha2->upper_without({"E2"}))));
      }
    }
  } else if (edge_id == "E4") {
    const auto* th = in.get("theta_rr_adaptive[s]");
    const auto* irr = in.get("irr_uniform[s]");
    if (th && irr)
      v.parts.push_back(compare("irr <= adaptive", side("theta_rr_adaptive[s]", *th, th->lower, th->upper),
                                side("irr_uniform[s]", *irr, irr->lower, irr->upper)));
    else
      v.parts.push_back(skipped("irr <= adaptive", in.why(!th ? "theta_rr_adaptive[s]" : "irr_uniform[s]")));
  } else if (edge_id == "E5") {
    if (!has2s) {
      v.parts.push_back(skipped("N=2s", "2s > p"));
    } else {
      const auto* w = in.get("weak_rip[2s]");
      const auto* th = in.get("theta_rr_adaptive[2s]");
      if (w && th)
        v.parts.push_back(compare("adaptive 2s <= weak rip", side("weak_rip[2s]", *w, w->lower, w->upper),
                                  side("theta_rr_adaptive[2s]", *th, th->lower, th->upper_without({"E5"}))));
      else
        v.parts.push_back(skipped("N=2s", in.why(!w ? "weak_rip[2s]" : "theta_rr_adaptive[2s]")));
    }
  } else if (edge_id == "E6") {
    if (!has2s) {
      v.parts.push_back(skipped("N=2s", "2s > p"));
    } else {
      const auto* w = in.get("weak_rip[2s]");
      const auto* phi = in.get("phi_re[2s]");
      const auto* lam = in.get("lambda2[2s]");
      if (!w || !phi || !lam) {
        v.parts.push_back(skipped("N=2s", in.why(!w ? "weak_rip[2s]" : !phi ? "phi_re[2s]" : "lambda2[2s]")));
      } else if (!(L * w->upper < 1.0)) {
        v.parts.push_back(skipped("N=2s", "premise L*weak_rip[2s] < 1 fails"));
      } else {
        const double wl = L * w->lower, wu = L * w->upper;
        const Side le{"(1-L*weak_rip[2s])^2*lambda2[2s]", (1.0 - wu) * (1.0 - wu) * lam->lower,
                      (1.0 - wl) * (1.0 - wl) * lam->upper};
        v.parts.push_back(compare("phi^2(L,S,2s)", side("phi_re[2s]", *phi, phi->lower_without({"E6"}), phi->upper), le));
      }
    }
  } else if (edge_id == "E7") {
    const auto* compat = in.get("phi_compat");
    for (const auto& sz : sizes) {
      const std::string kp = detail::key("phi_re", sz.label), ka = detail::key("phi_re_adaptive", sz.label);
      const auto* re = in.get(kp);
      const auto* ad = in.get(ka);
      if (re && ad)
        v.parts.push_back(compare(ka + " <= " + kp, side(kp, *re, re->lower, re->upper), side(ka, *ad, ad->lower, ad->upper)));
      else
        v.parts.push_back(skipped(ka + " <= " + kp, in.why(!re ? kp : ka)));
      if (re && compat)
        v.parts.push_back(compare(kp + " <= phi_compat", side("phi_compat", *compat, compat->lower, compat->upper),
                                  side(kp, *re, re->lower, re->upper)));
      else
        v.parts.push_back(skipped(kp + " <= phi_compat", in.why(!re ? kp : "phi_compat")));
    }
  } else if (edge_id == "E8") {
    const auto* compat = in.get("phi_compat");
    const auto* irr = in.get("irr_uniform[s]");
    const auto* lam = in.get("lambda2[s]");
    if (!compat || !irr || !lam) {
      v.parts.push_back(skipped("compat", in.why(!compat ? "phi_compat" : !irr ? "irr_uniform[s]" : "lambda2[s]")));
    } else if (!(L * irr->upper < 1.0)) {
      v.parts.push_back(skipped("compat", "premise L*irr_uniform[s] < 1 fails"));
    } else {
      const double tl = L * irr->lower, tu = L * irr->upper;
      const Side le{"(1-L*irr_uniform[s])^2*lambda2[s]", (1.0 - tu) * (1.0 - tu) * lam->lower,
                    (1.0 - tl) * (1.0 - tl) * lam->upper};
      v.parts.push_back(compare("compat", side("phi_compat", *compat, compat->lower_without({"E8"}), compat->upper), le));
    }
  } else if (edge_id == "E9") {
    for (const auto& sz : sizes) {
      const std::string kw = detail::key("weak_rip", sz.label);
      if (!has2s || sz.N > 2 * s) {
        v.parts.push_back(skipped(kw + " <= rip", "needs N <= 2s <= p"));
      } else {
        const auto* rip = in.get("rip");
        const auto* w = in.get(kw);
        if (rip && w)
          v.parts.push_back(compare(kw + " <= rip", side("rip", *rip, rip->lower, rip->upper), side(kw, *w, w->lower, w->upper)));
        else
          v.parts.push_back(skipped(kw + " <= rip", in.why(!rip ? "rip" : kw)));
      }
      const std::string kd = detail::key("delta_N", sz.label), kl = detail::key("lambda2", sz.label);
      const auto* d = in.get(kd);
      const auto* lam = in.get(kl);
      if (d && lam)
        v.parts.push_back(compare("1-" + kd + " <= " + kl, side(kl, *lam, lam->lower, lam->upper),
                                  Side{"1-" + kd, 1.0 - d->upper, 1.0 - d->lower}));
      else
        v.parts.push_back(skipped("1-" + kd + " <= " + kl, in.why(!d ? kd : kl)));
    }
  } else if (edge_id == "E10") {
    if (!has2s) {
      v.parts.push_back(skipped("alpha", "2s > p"));
    } else {
      const auto* alpha = in.get("alpha");
      const auto* ds = in.get("delta_N[s]");
      const auto* tss = in.get("theta_uniform[s,s]");
      const auto* ts2 = in.get("theta_uniform[s,2s]");
      if (!alpha || !ds || !tss || !ts2) {
        v.parts.push_back(skipped("alpha", in.why(!alpha ? "alpha" : !ds ? "delta_N[s]" : !tss ? "theta_uniform[s,s]" : "theta_uniform[s,2s]")));
      } else {
        const double den = 1.0 - ds->upper - tss->upper - ts2->upper;
        if (!(den > 0.0)) {
          v.parts.push_back(skipped("alpha", "premise 1 - delta_s - theta_ss - theta_s2s > 0 fails"));
        } else {
          const double t = tss->estimate;
          const double bound = std::sqrt(2.0) * (t + std::sqrt(t)) / den;
          v.parts.push_back(compare("alpha", exact_side("rip_arithmetic", bound), side("alpha", *alpha, alpha->lower, alpha->upper)));
        }
      }
    }
  } else if (edge_id == "E11") {
    if (!has2s) {
      v.parts.push_back(skipped("part3[2s]", "2s > p"));
    } else if (const auto* alpha = in.get("alpha"); !alpha) {
      v.parts.push_back(skipped("part3[2s]", in.why("alpha")));
    } else if (!(alpha->upper < 1.0)) {
      v.parts.push_back(skipped("part3[2s]", "premise alpha.upper < 1 not certified"));
    } else {
      if (const auto* p3 = in.get("irr_part3[2s]"))
        v.parts.push_back(compare("part3[2s]", exact_side("one", 1.0 + part3_tolerance()),
                                  side("irr_part3[2s]", *p3, p3->lower, p3->upper)));
      else
        v.parts.push_back(skipped("part3[2s]", in.why("irr_part3[2s]")));
      // noiseless Lasso with strong signal on S: fewer than s false positives
      const ConeSpec unit2 = cone.with_L(1.0).with_N(2 * s);
      const double phi2 = certified_lower_phi(g, unit2, ConeVariant::plain, cfg.caps).lower;
      const double lambda = 0.1;
      const double amp = phi2 > 0.0 ? 2.0 * lambda * std::sqrt(sd) / phi2 : 1.0;
      const std::uint64_t patterns = std::min<std::uint64_t>(pow2_saturating(s), 16);
      double worst = 0.0;
      bool ok = true;
      for (std::uint64_t m = 0; m < patterns; ++m) {
        Vec b0 = Vec::Zero(p);
        const auto tau = sign_vector(m, s);
        for (Index i = 0; i < s; ++i) b0[cone.S[static_cast<std::size_t>(i)]] = amp * tau[static_cast<std::size_t>(i)];
        try {
          const LassoSolution sol = solve_noiseless(g, b0, lambda, cfg);
          worst = std::max(worst, static_cast<double>(set_difference(sol.active_set, cone.S).size()));
        } catch (const Error&) {
          ok = false;
        }
      }
      if (ok)
        v.parts.push_back(compare("false positives < s", exact_side("s-1", sd - 1.0), exact_side("max |S*\\S|", worst)));
      else
        v.parts.push_back(skipped("false positives < s", "Lasso solve failed"));
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown edge " + edge_id);
  }
  detail::finalize(v);
  return v;
}

inline std::vector<ImplicationVerdict> check_all(const GramMatrix& g, const ConeSpec& cone, const ConditionReport& rep,
                                                 const SolverConfig& cfg = {}) {
  std::vector<ImplicationVerdict> out(edge_ids().size());
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) { out[i] = check_edge(edge_ids()[i], g, cone, rep, cfg); });
  return out;
}

inline std::vector<ImplicationVerdict> check_all(const GramMatrix& g, const ConeSpec& cone, const SolverConfig& cfg = {}) {
  return check_all(g, cone, analyze(g, cone, cfg), cfg);
}

}  // namespace lasso_audit
