#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lasso_audit/io.hpp"

using namespace lasso_audit;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string gram, design, response, beta0_path, config, out, response_out;
  std::string S;
  double L = 1.0;
  Index N = 0;
  double lambda = 0.1;
  std::vector<double> t{1.0, 2.0, 4.0};
  Index reps = 2000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::uint64_t cap_subsets = EnumerationCaps{}.subsets;
  std::uint64_t cap_signs = EnumerationCaps{}.signs;
  double tol = 1e-9;
  unsigned threads = 1;
  bool no_timing = false;
  std::string profile = "standard";
  // generate / montecarlo
  std::string kind = "identity";
  std::string experiment = "concentration";
  std::string format = "json";
  Index p = 0, s = 0, n = 0, rank = 0;
  double rho = 0.0;
  std::vector<Index> blocks;
  double noise_sd = 1.0;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed_given) return o.seed;
  if (const char* env = std::getenv("LASSO_AUDIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, std::string("LASSO_AUDIT_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

SolverConfig solver_config(const Options& o, std::uint64_t seed) {
  SolverConfig c = o.profile == "reduced" ? SolverConfig::reduced() : SolverConfig::standard();
  c.tol = o.tol;
  c.seed = seed;
  c.threads = std::max(1u, o.threads);
  c.caps.subsets = o.cap_subsets;
  c.caps.signs = o.cap_signs;
  c.validate();
  return c;
}

GramMatrix load_gram(const Options& o) {
  if (o.gram.empty()) throw Error(ErrorCode::InvalidArgument, "--gram is required");
  return checked_gram(read_csv_matrix(o.gram));
}

ConeSpec load_cone(const Options& o, Index p) {
  if (o.S.empty()) throw Error(ErrorCode::InvalidArgument, "--S is required and must be non-empty");
  ConeSpec c{parse_index_list(o.S), o.L, o.N};
  std::sort(c.S.begin(), c.S.end());
  if (c.N == 0) c.N = c.s();
  c.validate(p);
  return c;
}

json echo(const Options& o, const std::string& cmd) {
  json c = {{"command", cmd}};
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) c[k] = v;
  };
  put("gram", o.gram);
  put("design", o.design);
  put("response", o.response);
  put("beta0", o.beta0_path);
  put("config", o.config);
  put("S", o.S);
  c["L"] = o.L;
  c["N"] = o.N;
  c["lambda"] = o.lambda;
  c["t"] = o.t;
  c["reps"] = o.reps;
  c["cap_subsets"] = o.cap_subsets;
  c["cap_signs"] = o.cap_signs;
  c["tol"] = o.tol;
  c["threads"] = o.threads;
  c["profile"] = o.profile;
  if (cmd == "generate" || cmd == "montecarlo") {
    c["kind"] = o.kind;
    c["experiment"] = o.experiment;
    c["p"] = o.p;
    c["s"] = o.s;
    c["n"] = o.n;
    c["rho"] = o.rho;
    c["rank"] = o.rank;
    c["blocks"] = o.blocks;
    c["noise_sd"] = o.noise_sd;
  }
  return c;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + o.out);
  f << text;
}

struct Outcome {
  json result;
  int code = 0;
  std::optional<MonteCarloResult> mc;
};

Outcome run_analyze(const Options& o, const SolverConfig& cfg) {
  const GramMatrix g = load_gram(o);
  const ConeSpec cone = load_cone(o, g.p());
  const ConditionReport rep = analyze(g, cone, cfg);
  // entries cut off by a cap or iteration limit make the report partial;
  // an undefined constant (singular block, bad denominator) is a real answer
  bool partial = false;
  for (const auto& [k, why] : rep.errors)
    for (const char* c : {"CapExceeded", "MaxItersExceeded", "IterationLimit"})
      if (why.rfind(c, 0) == 0) partial = true;
  return {to_json(rep), partial ? 2 : 0};
}

Outcome run_implications(const Options& o, const SolverConfig& cfg) {
  const GramMatrix g = load_gram(o);
  const ConeSpec cone = load_cone(o, g.p());
  const auto verdicts = check_all(g, cone, cfg);
  int code = 0;
  for (const auto& v : verdicts) {
    if (v.status == EdgeStatus::Violated) code = 1;
    else if (v.status == EdgeStatus::Skipped && code == 0) code = 2;
  }
  return {to_json(verdicts), code};
}

Outcome run_lasso(const Options& o, const SolverConfig& cfg) {
  if (!(o.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "--lambda must be > 0");
  if (!o.design.empty()) {
    NoisyProblem np;
    np.X = read_csv_matrix(o.design);
    if (o.response.empty()) throw Error(ErrorCode::InvalidArgument, "--response is required with --design");
    np.Y = read_csv_vector(o.response);
    if (!o.beta0_path.empty()) {
      np.beta0 = read_csv_vector(o.beta0_path);
      np.validate();
      np.epsilon = Vec(np.Y - np.X * *np.beta0);
    }
    np.validate();
    json r;
    int code = 0;
    if (!o.S.empty()) {
      ConeSpec cone = load_cone(o, np.p());
      const NoisySolve ns = solve_noisy(np, cone.S, o.lambda, cfg);
      r["solution"] = to_json(ns.solution);
      if (ns.verdict) {
        r["noisy_verdict"] = to_json(*ns.verdict);
        if (!ns.verdict->premise) code = 2;
        else if (!ns.verdict->holds) code = 1;
      } else {
        r["noisy_verdict"] = nullptr;
      }
    } else {
      r["solution"] = to_json(solve_noisy_only(np, o.lambda, cfg));
    }
    return {r, code};
  }
  const GramMatrix g = load_gram(o);
  if (o.beta0_path.empty()) throw Error(ErrorCode::InvalidArgument, "--beta0 is required");
  const Vec b0 = read_csv_vector(o.beta0_path);
  const LassoSolution sol = solve_noiseless(g, b0, o.lambda, cfg);
  json r;
  r["solution"] = to_json(sol);
  int code = 0;
  if (!o.S.empty()) {
    const ConeSpec cone = load_cone(o, g.p());
    const double phi2 = compatibility_constant(g, cone.with_L(1.0).with_N(cone.s()), cfg).lower;
    std::optional<double> phi2_2s;
    if (2 * cone.s() <= g.p())
      phi2_2s = certified_lower_phi(g, cone.with_L(1.0).with_N(2 * cone.s()), ConeVariant::plain, cfg.caps).lower;
    const OracleVerdict ov = oracle_verdict(g, sol, cone.with_L(1.0), b0, phi2, phi2_2s);
    r["oracle"] = to_json(ov);
    r["selection"] = to_json(selection_report(g, sol, cone, b0, phi2, std::nullopt, cfg.caps));
    if (!ov.holds || !ov.l1_holds || (ov.l2_holds && !*ov.l2_holds)) code = 1;
  }
  return {r, code};
}

Outcome run_recover(const Options& o, const SolverConfig& cfg) {
  const GramMatrix g = load_gram(o);
  if (o.beta0_path.empty()) throw Error(ErrorCode::InvalidArgument, "--beta0 is required");
  return {to_json(basis_pursuit_recover(g, read_csv_vector(o.beta0_path), cfg)), 0};
}

Outcome run_montecarlo(const Options& o, const SolverConfig& cfg) {
  if (o.n < 1 || o.p < 1) throw Error(ErrorCode::InvalidArgument, "--n and --p are required");
  MonteCarloResult r;
  if (o.experiment == "concentration") {
    const GramMatrix pop = o.gram.empty() ? GramMatrix(Mat::Identity(o.p, o.p)) : load_gram(o);
    r = concentration_experiment(o.n, o.p, pop, o.reps, o.t, cfg.seed, cfg.threads);
  } else if (o.experiment == "noise") {
    r = noise_bound_experiment(o.n, o.p, o.reps, o.t, cfg.seed, o.noise_sd, cfg.threads);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--experiment must be concentration or noise");
  }
  int code = 0;
  for (bool ok : r.pass)
    if (!ok) code = 1;
  return {to_json(r), code, r};
}

GeneratorSpec generator_spec(const Options& o, std::uint64_t seed) {
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + o.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(o.config, 1, e.byte, e.what());
    }
    return generator_spec_from_json(j);
  }
  GeneratorSpec sp;
  sp.kind = parse_generator_kind(o.kind);
  sp.p = o.p;
  sp.s = o.s;
  sp.n = o.n;
  sp.rho = o.rho;
  sp.rank = o.rank;
  sp.blocks = o.blocks;
  sp.seed = seed;
  sp.noise_sd = o.noise_sd;
  if (!o.beta0_path.empty()) sp.beta0 = read_csv_vector(o.beta0_path);
  return sp;
}

int run_generate(const Options& o, std::uint64_t seed) {
  const Generated g = generate(generator_spec(o, seed));
  std::ostringstream out;
  if (const auto* gm = std::get_if<GramMatrix>(&g)) {
    write_csv_matrix(out, gm->matrix());
  } else {
    const auto& np = std::get<NoisyProblem>(g);
    write_csv_matrix(out, np.X);
    if (!o.response_out.empty()) {
      std::ofstream f(o.response_out);
      if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + o.response_out);
      write_csv_matrix(f, Mat(np.Y));
    }
  }
  emit(o, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit sparsity conditions of Gram matrices and check the inequalities linking them"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--gram", o.gram, "Gram matrix CSV (symmetric, p x p)");
    c->add_option("--S", o.S, "active set, 0-based comma separated");
    c->add_option("--L", o.L, "cone stretch L");
    c->add_option("--N", o.N, "superset size N (default s)");
    c->add_option("--seed", o.seed, "seed (falls back to LASSO_AUDIT_SEED)")->each([&](const std::string&) { o.seed_given = true; });
    c->add_option("--cap-subsets", o.cap_subsets, "max subsets enumerated");
    c->add_option("--cap-signs", o.cap_signs, "max sign patterns enumerated");
    c->add_option("--tol", o.tol, "solver tolerance");
    c->add_option("--threads", o.threads, "worker threads");
    c->add_option("--profile", o.profile, "standard or reduced")->check(CLI::IsMember({"standard", "reduced"}));
    c->add_option("--out", o.out, "output file (default stdout)");
    c->add_flag("--no-timing", o.no_timing, "write null wall time so output is reproducible byte for byte");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "condition report for (Sigma, S, L, N)");
  common(analyze_cmd);
  auto* lasso_cmd = app.add_subcommand("lasso", "solve a noiseless (--gram --beta0) or noisy (--design --response) Lasso");
  common(lasso_cmd);
  lasso_cmd->add_option("--lambda", o.lambda, "tuning parameter");
  lasso_cmd->add_option("--beta0", o.beta0_path, "true coefficients CSV");
  lasso_cmd->add_option("--design", o.design, "design matrix X CSV (n x p)");
  lasso_cmd->add_option("--response", o.response, "response Y CSV");
  auto* recover_cmd = app.add_subcommand("recover", "basis pursuit from Sigma beta0");
  common(recover_cmd);
  recover_cmd->add_option("--beta0", o.beta0_path, "true coefficients CSV");
  auto* impl_cmd = app.add_subcommand("implications", "verdict for every implication edge");
  common(impl_cmd);
  auto* mc_cmd = app.add_subcommand("montecarlo", "Monte Carlo check of the concentration or noise bound");
  common(mc_cmd);
  mc_cmd->add_option("--experiment", o.experiment, "concentration or noise");
  mc_cmd->add_option("--n", o.n, "sample size");
  mc_cmd->add_option("--p", o.p, "dimension");
  mc_cmd->add_option("--reps", o.reps, "repetitions");
  mc_cmd->add_option("--t", o.t, "t values, comma separated")->delimiter(',');
  mc_cmd->add_option("--noise-sd", o.noise_sd, "noise standard deviation");
  mc_cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  auto* gen_cmd = app.add_subcommand("generate", "write a generated matrix as CSV");
  common(gen_cmd);
  gen_cmd->add_option("--kind", o.kind, "generator kind");
  gen_cmd->add_option("--config", o.config, "generator spec as JSON");
  gen_cmd->add_option("--p", o.p, "dimension");
  gen_cmd->add_option("--s", o.s, "size of S for the example generators");
  gen_cmd->add_option("--n", o.n, "rows for gaussian_design");
  gen_cmd->add_option("--rho", o.rho, "correlation parameter");
  gen_cmd->add_option("--rank", o.rank, "rank for random_psd (0 = full)");
  gen_cmd->add_option("--blocks", o.blocks, "block sizes for block_diag")->delimiter(',');
  gen_cmd->add_option("--beta0", o.beta0_path, "coefficients for gaussian_design");
  gen_cmd->add_option("--noise-sd", o.noise_sd, "noise standard deviation for gaussian_design");
  gen_cmd->add_option("--response-out", o.response_out, "where to write Y for gaussian_design");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const std::uint64_t seed = resolve_seed(o);
    if (cmd == "generate") return run_generate(o, seed);
    const SolverConfig cfg = solver_config(o, seed);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res;
    if (cmd == "analyze") res = run_analyze(o, cfg);
    else if (cmd == "lasso") res = run_lasso(o, cfg);
    else if (cmd == "recover") res = run_recover(o, cfg);
    else if (cmd == "implications") res = run_implications(o, cfg);
    else res = run_montecarlo(o, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.mc && o.format == "csv") {
      std::ostringstream out;
      write_monte_carlo_csv(out, *res.mc);
      emit(o, out.str());
      return res.code;
    }
    json doc = {{"tool", "lasso_audit"},
                {"version", kVersion},
                {"command", cmd},
                {"config", echo(o, cmd)},
                {"seed", seed},
                {"wall_time_s", o.no_timing ? json(nullptr) : json(secs)},
                {"exit_code", res.code},
                {"result", res.result}};
    emit(o, doc.dump(2) + "\n");
    return res.code;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << " (raise with --cap-subsets or --cap-signs to at least " << e.needed()
              << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
