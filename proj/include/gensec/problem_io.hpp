#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gensec/bench.hpp"
#include "gensec/errors.hpp"
#include "gensec/numerics.hpp"
#include "gensec/solver.hpp"

namespace gensec {

/// Shortest decimal string that parses back to the same double. Data files
/// built from this are byte-stable across runs.
inline std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // fold -0 into 0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

struct BuiltinF {
  std::size_t dimension = 0;
  VectorFn f;
  JacobianFn jacobian;
};

/// Named smooth maps available to problem files.
inline const std::map<std::string, BuiltinF>& builtin_f_registry() {
  static const std::map<std::string, BuiltinF> reg = [] {
    std::map<std::string, BuiltinF> m;
    BuiltinF circle_line;
    circle_line.dimension = 2;
    circle_line.f = [](const Vector& x) {
      return Vector{x[0] + x[1] - 3.0, x[0] * x[0] + x[1] * x[1] - 9.0};
    };
    circle_line.jacobian = [](const Vector& x) {
      Matrix J(2, 2);
      J(0, 0) = 1.0;
      J(0, 1) = 1.0;
      J(1, 0) = 2.0 * x[0];
      J(1, 1) = 2.0 * x[1];
      return J;
    };
    m.emplace("circle_line", std::move(circle_line));
    return m;
  }();
  return reg;
}

/// Named continuous (possibly nonsmooth) maps available to problem files.
inline const std::map<std::string, VectorFn>& builtin_g_registry() {
  static const std::map<std::string, VectorFn> reg = [] {
    std::map<std::string, VectorFn> m;
    m.emplace("abs", [](const Vector& x) {
      Vector out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i]);
      return out;
    });
    return m;
  }();
  return reg;
}

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& field, const std::string& what) {
  throw InvalidProblem("problem file: field '" + field + "' " + what);
}

inline void reject_unknown_keys(const Json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
  if (!obj.is_object()) schema_error(where, "must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (item.key() == k) known = true;
    if (!known) schema_error(where + "." + item.key(), "is not a recognized field");
  }
}

inline const Json& require_field(const Json& obj, const std::string& field,
                                 const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) schema_error(where.empty() ? field : where + "." + field, "is missing");
  return *it;
}

inline double parse_number(const Json& j, const std::string& field) {
  if (!j.is_number()) schema_error(field, "must be a number");
  return j.get<double>();
}

inline Vector parse_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) schema_error(field, "must be an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) schema_error(field, "must contain only numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

/// Bound arrays accept null entries for unbounded coordinates.
inline Vector parse_bound(const Json& j, const std::string& field, bool is_lower) {
  if (!j.is_array()) schema_error(field, "must be an array of numbers or nulls");
  const double inf = std::numeric_limits<double>::infinity();
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null())
      v[i] = is_lower ? -inf : inf;
    else if (j[i].is_number())
      v[i] = j[i].get<double>();
    else
      schema_error(field, "must contain only numbers or nulls");
  }
  return v;
}

inline Matrix parse_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) schema_error(field, "must be a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) schema_error(field, "rows must be arrays");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) schema_error(field, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) schema_error(field, "must contain only numbers");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

struct Variant {
  std::string key;
  Json value;
};

inline Variant single_variant(const Json& j, const std::string& field) {
  if (!j.is_object() || j.size() != 1)
    schema_error(field, "must be an object with exactly one variant key");
  const auto it = j.items().begin();
  return Variant{it.key(), it.value()};
}

}  // namespace detail

/// Parses a feasible-set description, e.g. {"box": {"lower": [...], "upper": [...]}}.
inline FeasibleSet parse_set_json(const nlohmann::json& j, std::size_t dimension,
                                  const std::string& where = "set") {
  const auto& [kind, body] = detail::single_variant(j, where);
  if (kind == "whole") {
    detail::reject_unknown_keys(body, {}, where + ".whole");
    return FeasibleSet::whole_space(dimension);
  }
  if (kind == "box") {
    detail::reject_unknown_keys(body, {"lower", "upper"}, where + ".box");
    return FeasibleSet::box(
        detail::parse_bound(detail::require_field(body, "lower", where + ".box"),
                            where + ".box.lower", true),
        detail::parse_bound(detail::require_field(body, "upper", where + ".box"),
                            where + ".box.upper", false));
  }
  if (kind == "ball") {
    detail::reject_unknown_keys(body, {"center", "radius"}, where + ".ball");
    return FeasibleSet::ball(
        detail::parse_vector(detail::require_field(body, "center", where + ".ball"),
                             where + ".ball.center"),
        detail::parse_number(detail::require_field(body, "radius", where + ".ball"),
                             where + ".ball.radius"));
  }
  if (kind == "simplex") {
    detail::reject_unknown_keys(body, {"scale"}, where + ".simplex");
    return FeasibleSet::simplex(
        detail::parse_number(detail::require_field(body, "scale", where + ".simplex"),
                             where + ".simplex.scale"),
        dimension);
  }
  if (kind == "polytope") {
    detail::reject_unknown_keys(body, {"vertices"}, where + ".polytope");
    const auto& jverts = detail::require_field(body, "vertices", where + ".polytope");
    if (!jverts.is_array() || jverts.empty())
      detail::schema_error(where + ".polytope.vertices", "must be a nonempty array");
    std::vector<Vector> verts;
    for (const auto& jv : jverts)
      verts.push_back(detail::parse_vector(jv, where + ".polytope.vertices"));
    return FeasibleSet::polytope(std::move(verts));
  }
  detail::schema_error(where + "." + kind, "is not a recognized set variant");
}

/// Parses a full problem description. Every field is schema-checked before
/// any numerics run; unknown fields are rejected.
inline ProblemSpec parse_problem_json(const nlohmann::json& root) {
  using detail::require_field;
  using detail::schema_error;
  if (!root.is_object()) schema_error("(root)", "must be an object");
  detail::reject_unknown_keys(
      root, {"dimension", "f", "g", "term", "set", "known_solution", "lipschitz_L", "dd_bound_M"},
      "(root)");

  ProblemSpec p;
  const auto& jdim = require_field(root, "dimension", "");
  if (!jdim.is_number_integer() || jdim.get<long long>() <= 0)
    schema_error("dimension", "must be a positive integer");
  p.dimension = jdim.get<std::size_t>();

  {
    const auto& [kind, body] = detail::single_variant(require_field(root, "f", ""), "f");
    if (kind == "affine") {
      detail::reject_unknown_keys(body, {"matrix", "offset"}, "f.affine");
      Matrix M = detail::parse_matrix(require_field(body, "matrix", "f.affine"), "f.affine.matrix");
      Vector c = detail::parse_vector(require_field(body, "offset", "f.affine"), "f.affine.offset");
      if (M.rows() != p.dimension || M.cols() != p.dimension || c.size() != p.dimension)
        schema_error("f.affine", "has shapes inconsistent with 'dimension'");
      p.f = detail::affine_map(M, c);
      p.jacobian_f = detail::constant_jacobian(M);
    } else if (kind == "builtin") {
      if (!body.is_string()) schema_error("f.builtin", "must be a string");
      const auto it = builtin_f_registry().find(body.get<std::string>());
      if (it == builtin_f_registry().end()) schema_error("f.builtin", "names an unknown map");
      if (it->second.dimension != p.dimension)
        schema_error("f.builtin", "has a dimension inconsistent with 'dimension'");
      p.f = it->second.f;
      p.jacobian_f = it->second.jacobian;
    } else {
      schema_error("f." + kind, "is not a recognized variant");
    }
  }

  {
    const auto& [kind, body] = detail::single_variant(require_field(root, "g", ""), "g");
    if (kind == "none") {
      detail::reject_unknown_keys(body, {}, "g.none");
      p.g = zero_map();
    } else if (kind == "scaled_abs") {
      detail::reject_unknown_keys(body, {"scale"}, "g.scaled_abs");
      p.g = detail::scaled_abs_map(
          detail::parse_number(require_field(body, "scale", "g.scaled_abs"), "g.scaled_abs.scale"));
    } else if (kind == "builtin") {
      if (!body.is_string()) schema_error("g.builtin", "must be a string");
      const auto it = builtin_g_registry().find(body.get<std::string>());
      if (it == builtin_g_registry().end()) schema_error("g.builtin", "names an unknown map");
      p.g = it->second;
    } else {
      schema_error("g." + kind, "is not a recognized variant");
    }
  }

  {
    const auto& [kind, body] = detail::single_variant(require_field(root, "term", ""), "term");
    if (kind == "zero") {
      detail::reject_unknown_keys(body, {}, "term.zero");
      p.term = SetValuedTerm::zero();
    } else if (kind == "normal_cone_box") {
      detail::reject_unknown_keys(body, {"lower", "upper"}, "term.normal_cone_box");
      Vector lo = detail::parse_bound(require_field(body, "lower", "term.normal_cone_box"),
                                      "term.normal_cone_box.lower", true);
      Vector hi = detail::parse_bound(require_field(body, "upper", "term.normal_cone_box"),
                                      "term.normal_cone_box.upper", false);
      if (lo.size() != p.dimension || hi.size() != p.dimension)
        schema_error("term.normal_cone_box", "has bounds inconsistent with 'dimension'");
      p.term = SetValuedTerm::normal_cone_box(std::move(lo), std::move(hi));
    } else if (kind == "product_cone") {
      detail::reject_unknown_keys(body, {"s"}, "term.product_cone");
      const auto& js = require_field(body, "s", "term.product_cone");
      if (!js.is_number_integer() || js.get<long long>() < 0)
        schema_error("term.product_cone.s", "must be a nonnegative integer");
      const std::size_t s = js.get<std::size_t>();
      if (s > p.dimension) schema_error("term.product_cone.s", "exceeds 'dimension'");
      p.term = SetValuedTerm::product_cone(s);
    } else {
      schema_error("term." + kind, "is not a recognized variant");
    }
  }

  p.set = parse_set_json(require_field(root, "set", ""), p.dimension);
  if (p.set.dim() != p.dimension) schema_error("set", "has a dimension inconsistent with 'dimension'");

  if (root.contains("known_solution")) {
    Vector xs = detail::parse_vector(root["known_solution"], "known_solution");
    if (xs.size() != p.dimension)
      schema_error("known_solution", "has a size inconsistent with 'dimension'");
    p.known_solution = std::move(xs);
  }
  if (root.contains("lipschitz_L")) p.lipschitz_L = detail::parse_number(root["lipschitz_L"], "lipschitz_L");
  if (root.contains("dd_bound_M")) p.dd_bound_M = detail::parse_number(root["dd_bound_M"], "dd_bound_M");
  return p;
}

inline ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidProblem("problem file: cannot open '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidProblem(std::string("problem file: invalid JSON: ") + e.what());
  }
  return parse_problem_json(root);
}

/// Writes the iteration trace with the fixed header
/// k,residual,step_norm,theta,condg_iters,took_projection,secant_gap,err_to_xstar.
inline void write_trace_csv(std::ostream& out, const SolveOutcome& outcome,
                            const std::optional<Vector>& known_solution) {
  out << "k,residual,step_norm,theta,condg_iters,took_projection,secant_gap,err_to_xstar\n";
  for (const auto& rec : outcome.trace) {
    out << rec.k << ',' << format_double(rec.residual_before) << ','
        << format_double(rec.step_norm) << ',' << format_double(rec.theta_used) << ','
        << rec.condg_iterations << ',' << (rec.took_projection ? 1 : 0) << ','
        << format_double(rec.secant_gap) << ',';
    if (known_solution) out << format_double(norm(rec.x - *known_solution));
    out << '\n';
  }
}

inline void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "case,start,status,matched,iterations,final_residual,dist_to_solution,"
         "median_tail_ratio,secant_pass,secant_total,projection_pass,projection_total,"
         "deterioration_pass,deterioration_total\n";
  for (const auto& row : report.rows) {
    out << row.case_name << ',' << row.start_index << ',' << to_string(row.status) << ','
        << (row.matched_expected ? 1 : 0) << ',' << row.iterations << ','
        << format_double(row.final_residual) << ',';
    if (!std::isnan(row.dist_to_solution)) out << format_double(row.dist_to_solution);
    out << ',';
    if (!std::isnan(row.median_tail_ratio)) out << format_double(row.median_tail_ratio);
    out << ',' << row.secant_pass << ',' << row.secant_total << ',' << row.projection_pass << ','
        << row.projection_total << ',' << row.deterioration_pass << ','
        << row.deterioration_total << '\n';
  }
}

inline void write_bench_json(std::ostream& out, const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["case"] = row.case_name;
    r["start"] = row.start_index;
    r["status"] = to_string(row.status);
    r["matched"] = row.matched_expected;
    r["iterations"] = row.iterations;
    r["final_residual"] = row.final_residual;
    if (!std::isnan(row.dist_to_solution)) r["dist_to_solution"] = row.dist_to_solution;
    if (!std::isnan(row.median_tail_ratio)) r["median_tail_ratio"] = row.median_tail_ratio;
    r["secant_pass"] = row.secant_pass;
    r["secant_total"] = row.secant_total;
    r["projection_pass"] = row.projection_pass;
    r["projection_total"] = row.projection_total;
    r["deterioration_pass"] = row.deterioration_pass;
    r["deterioration_total"] = row.deterioration_total;
    rows.push_back(std::move(r));
  }
  nlohmann::json doc;
  doc["rows"] = std::move(rows);
  doc["all_matched"] = report.all_matched;
  out << doc.dump(2) << '\n';
}

}  // namespace gensec
