#pragma once

// CSV and JSON plumbing; needs nlohmann json.hpp on the include path

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lasso_audit.hpp"

namespace lasso_audit {

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorCode::ParseError,
              source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// ---------------------------------------------------------------- CSV

// numeric rows separated by commas; blank lines and lines starting with '#' skipped
inline Mat parse_csv_matrix(std::istream& in, const std::string& source = "<csv>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      std::string field = line.substr(pos, end - pos);
      const auto a = field.find_first_not_of(" \t");
      const auto b = field.find_last_not_of(" \t");
      const std::size_t col = pos + 1 + (a == std::string::npos ? 0 : a);
      if (a == std::string::npos) throw ParseError(source, lineno, col, "empty field");
      field = field.substr(a, b - a + 1);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        throw ParseError(source, lineno, col, "not a number: '" + field + "'");
      }
      if (used != field.size()) throw ParseError(source, lineno, col + used, "trailing characters in '" + field + "'");
      row.push_back(v);
      if (end == line.size()) break;
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(source, lineno, 1,
                       "expected " + std::to_string(rows.front().size()) + " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source, lineno == 0 ? 1 : lineno, 1, "no data rows");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

inline Mat read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return parse_csv_matrix(in, path);
}

// one row or one column
inline Vec read_csv_vector(const std::string& path) {
  const Mat m = read_csv_matrix(path);
  if (m.rows() != 1 && m.cols() != 1)
    throw Error(ErrorCode::DimensionMismatch, path + ": expected a single row or column");
  return m.rows() == 1 ? Vec(m.row(0).transpose()) : Vec(m.col(0));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_matrix(std::ostream& out, const Mat& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
}

inline IndexSet parse_index_list(const std::string& text) {
  IndexSet out;
  std::stringstream ss(text);
  std::string item;
  std::size_t col = 1;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw ParseError("--S", 1, col, "not an index: '" + item + "'");
    }
    if (used != item.size() || v < 0) throw ParseError("--S", 1, col, "not an index: '" + item + "'");
    out.push_back(static_cast<Index>(v));
    col += item.size() + 1;
  }
  return out;
}

// ---------------------------------------------------------------- JSON

using json = nlohmann::ordered_json;

namespace detail {

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline json set_json(const IndexSet& s) {
  json a = json::array();
  for (Index i : s) a.push_back(i);
  return a;
}

inline json routes_json(const std::vector<RouteBound>& r) {
  json a = json::array();
  for (const auto& x : r) a.push_back({{"tag", x.tag}, {"value", num(x.value)}});
  return a;
}

template <class T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, double>) return num(*v);
  else return json(*v);
}

}  // namespace detail

inline json to_json(const BoundedValue& b) {
  return {{"estimate", detail::num(b.estimate)},
          {"lower", detail::num(b.lower)},
          {"upper", detail::num(b.upper)},
          {"certificate", to_string(b.certificate)},
          {"note", b.note},
          {"lower_routes", detail::routes_json(b.lower_routes)},
          {"upper_routes", detail::routes_json(b.upper_routes)}};
}

inline json to_json(const ConeSpec& c) {
  return {{"S", detail::set_json(c.S)}, {"L", detail::num(c.L)}, {"N", c.N}};
}

inline json to_json(const ConditionReport& r) {
  json entries = json::object();
  for (const auto& [k, v] : r.entries) entries[k] = to_json(v);
  json errors = json::object();
  for (const auto& [k, v] : r.errors) errors[k] = v;
  return {{"p", r.p}, {"cone", to_json(r.cone)}, {"fingerprint", r.fingerprint}, {"entries", entries}, {"errors", errors}};
}

inline json to_json(const EdgePart& p) {
  return {{"label", p.label},
          {"status", to_string(p.status)},
          {"lhs_value", detail::num(p.lhs_value)},
          {"rhs_value", detail::num(p.rhs_value)},
          {"lhs_upper", detail::num(p.lhs_upper)},
          {"rhs_lower", detail::num(p.rhs_lower)},
          {"slack", detail::num(p.slack)},
          {"note", p.note}};
}

inline json to_json(const ImplicationVerdict& v) {
  json parts = json::array();
  for (const auto& p : v.parts) parts.push_back(to_json(p));
  return {{"edge_id", v.edge_id},
          {"status", to_string(v.status)},
          {"holds", v.holds},
          {"verified", v.verified},
          {"lhs_value", detail::num(v.lhs_value)},
          {"rhs_value", detail::num(v.rhs_value)},
          {"slack", detail::num(v.slack)},
          {"bound_direction_note", v.bound_direction_note},
          {"skip_reason", v.skip_reason},
          {"parts", parts}};
}

inline json to_json(const std::vector<ImplicationVerdict>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

inline json to_json(const LassoSolution& s) {
  return {{"lambda", detail::num(s.lambda)},
          {"beta_star", detail::vec_json(s.beta_star)},
          {"tau_star", detail::vec_json(s.tau_star)},
          {"active_set", detail::set_json(s.active_set)},
          {"objective", detail::num(s.objective)},
          {"kkt_residual", detail::num(s.kkt_residual)}};
}

inline json to_json(const OracleVerdict& v) {
  return {{"lhs", detail::num(v.lhs)},
          {"rhs", detail::num(v.rhs)},
          {"holds", v.holds},
          {"empirical_phi0", detail::num(v.empirical_phi0)},
          {"phi2_lower", detail::num(v.phi2_lower)},
          {"l1_lhs", detail::num(v.l1_lhs)},
          {"l1_rhs", detail::num(v.l1_rhs)},
          {"l1_holds", v.l1_holds},
          {"l2_lhs", detail::opt(v.l2_lhs)},
          {"l2_rhs", detail::opt(v.l2_rhs)},
          {"l2_holds", detail::opt(v.l2_holds)}};
}

inline json to_json(const SelectionReport& r) {
  return {{"false_positives", r.false_positives},
          {"contains_S", r.contains_S},
          {"equals_S", r.equals_S},
          {"beta0_min", detail::num(r.beta0_min)},
          {"part1_premise", detail::opt(r.part1_premise)},
          {"part1_holds", detail::opt(r.part1_holds)},
          {"part2_threshold", detail::num(r.part2_threshold)},
          {"part2_premise", r.part2_premise},
          {"part3_checked", r.part3_checked},
          {"part3_value", detail::num(r.part3_value)},
          {"part3_holds", r.part3_holds},
          {"sign_threshold", detail::num(r.sign_threshold)},
          {"signs_match", detail::opt(r.signs_match)},
          {"note", r.note}};
}

inline json to_json(const BasisPursuitResult& r) {
  return {{"status", to_string(r.status)},
          {"recovered", r.recovered},
          {"value", detail::num(r.value)},
          {"beta_lp", detail::vec_json(r.beta_lp)}};
}

inline json to_json(const NoisyVerdict& v) {
  return {{"lambda", detail::num(v.lambda)},
          {"lambda0", detail::num(v.lambda0)},
          {"L", detail::num(v.L)},
          {"premise", v.premise},
          {"lhs", detail::num(v.lhs)},
          {"rhs", detail::num(v.rhs)},
          {"holds", v.holds},
          {"phi2_lower", detail::num(v.phi2_lower)},
          {"cone_ok", v.cone_ok}};
}

inline json to_json(const MonteCarloResult& r) {
  json a = json::array();
  for (std::size_t k = 0; k < r.t_values.size(); ++k)
    a.push_back({{"t", r.t_values[k]},
                 {"threshold", detail::num(r.threshold[k])},
                 {"empirical_tail", r.empirical_tail[k]},
                 {"bound", r.bound[k]},
                 {"slack", r.slack[k]},
                 {"pass", static_cast<bool>(r.pass[k])}});
  return {{"experiment", r.experiment}, {"reps", r.reps}, {"n", r.n}, {"p", r.p}, {"seed", r.seed}, {"rows", a}};
}

inline void write_monte_carlo_csv(std::ostream& out, const MonteCarloResult& r) {
  out << "t,threshold,empirical_tail,bound,slack,pass\n";
  for (std::size_t k = 0; k < r.t_values.size(); ++k)
    out << format_double(r.t_values[k]) << "," << format_double(r.threshold[k]) << ","
        << format_double(r.empirical_tail[k]) << "," << format_double(r.bound[k]) << ","
        << format_double(r.slack[k]) << "," << (r.pass[k] ? "true" : "false") << "\n";
}

// generator spec from a JSON config
inline GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  GeneratorSpec sp;
  try {
    sp.kind = parse_generator_kind(j.at("kind").get<std::string>());
    sp.p = j.value("p", Index{0});
    sp.s = j.value("s", Index{0});
    sp.n = j.value("n", Index{0});
    sp.rho = j.value("rho", 0.0);
    sp.rank = j.value("rank", Index{0});
    sp.seed = j.value("seed", std::uint64_t{0});
    sp.noise_sd = j.value("noise_sd", 1.0);
    if (j.contains("blocks")) sp.blocks = j.at("blocks").get<std::vector<Index>>();
    if (j.contains("block_rho")) sp.block_rho = j.at("block_rho").get<std::vector<double>>();
    auto vec = [&](const char* k) {
      const auto v = j.at(k).get<std::vector<double>>();
      return Vec(Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size())));
    };
    if (j.contains("b1")) sp.b1 = vec("b1");
    if (j.contains("b2")) sp.b2 = vec("b2");
    if (j.contains("beta0")) sp.beta0 = vec("beta0");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("generator config: ") + e.what());
  }
  return sp;
}

}  // namespace lasso_audit
