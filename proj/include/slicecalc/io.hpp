#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <slicecalc/algebra.hpp>
#include <slicecalc/calculus.hpp>
#include <slicecalc/paths.hpp>
#include <slicecalc/region.hpp>

namespace slicecalc::io {

using json = nlohmann::json;

inline json to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vec vec_from_json(const json& j, const std::string& what) {
  require(j.is_array(), ErrorCode::BadInput, what + ": expected a flat array");
  Vec v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), ErrorCode::BadInput, what + ": entries must be numbers");
    v[static_cast<long>(i)] = j[i].get<double>();
  }
  return v;
}

/// Matrices carry explicit dimensions; data is row-major.
inline json to_json(const Mat& m) {
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Mat mat_from_json(const json& j, const std::string& what) {
  require(j.is_object() && j.contains("rows") && j.contains("cols") && j.contains("data"),
          ErrorCode::BadInput, what + ": expected {rows, cols, data}");
  long rows = j.at("rows").get<long>();
  long cols = j.at("cols").get<long>();
  const json& data = j.at("data");
  require(rows > 0 && cols > 0 && data.is_array() &&
              static_cast<long>(data.size()) == rows * cols,
          ErrorCode::BadInput, what + ": data length must equal rows*cols");
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

/// Structures serialize as their matrix; on input, a flat array is also
/// accepted and read as an algebra element u with I = L_u (needs a table).
inline json to_json(const ComplexStructure& s) { return to_json(s.mat); }

inline ComplexStructure structure_from_json(const json& j, const AlgebraSpec& spec,
                                            const std::string& what) {
  if (j.is_array()) {
    require(spec.has_table(), ErrorCode::UnsupportedAlgebra,
            what + ": element form needs an algebra with multiplication");
    Vec u = vec_from_json(j, what);
    require(u.size() == spec.dim, ErrorCode::DimensionMismatch,
            what + ": element length must match the algebra dimension");
    return ComplexStructure(left_mult_operator(u, spec));
  }
  return ComplexStructure(mat_from_json(j, what));
}

inline json to_json(const SlicePoint& p) {
  return json{{"x", to_json(p.x)}, {"y", to_json(p.y)}, {"I", to_json(p.I)}};
}

inline SlicePoint point_from_json(const json& j, const AlgebraSpec& spec,
                                  const std::string& what) {
  require(j.is_object() && j.contains("x") && j.contains("y") && j.contains("I"),
          ErrorCode::BadInput, what + ": expected {x, y, I}");
  return make_point(vec_from_json(j.at("x"), what + ".x"),
                    vec_from_json(j.at("y"), what + ".y"),
                    structure_from_json(j.at("I"), spec, what + ".I"));
}

inline json to_json(const SliceFunction::Coefficients& coeffs) {
  json out = json::array();
  for (const auto& [alpha, a] : coeffs)
    out.push_back(json{{"alpha", alpha.idx}, {"value", to_json(a)}});
  return out;
}

inline SliceFunction::Coefficients coefficients_from_json(const json& j,
                                                          const std::string& what) {
  require(j.is_array(), ErrorCode::BadInput, what + ": expected a coefficient list");
  SliceFunction::Coefficients coeffs;
  for (const auto& term : j) {
    require(term.is_object() && term.contains("alpha") && term.contains("value"),
            ErrorCode::BadInput, what + ": each term needs {alpha, value}");
    MultiIndex alpha(term.at("alpha").get<std::vector<int>>());
    for (int e : alpha.idx)
      require(e >= 0, ErrorCode::BadInput, what + ": exponents must be nonnegative");
    coeffs[alpha] = vec_from_json(term.at("value"), what + ".value");
  }
  return coeffs;
}

/// Only stem-polynomial data has a stable serial form; callable and tabulated
/// functions are rejected rather than lossily approximated.
inline json function_to_json(const SliceFunction& f) {
  require(f.kind() == SliceFunction::Kind::StemPolynomial, ErrorCode::NotSerializable,
          "only stem-polynomial functions serialize");
  return json{{"kind", "stem-polynomial"},
              {"d", f.d()},
              {"two_n", f.two_n()},
              {"coefficients", to_json(f.coefficients())}};
}

inline SliceFunction function_from_json(const json& j, const std::string& what) {
  require(j.is_object() && j.value("kind", "") == std::string("stem-polynomial"),
          ErrorCode::BadInput, what + ": expected kind \"stem-polynomial\"");
  require(j.contains("d") && j.contains("two_n") && j.contains("coefficients"),
          ErrorCode::BadInput, what + ": expected {kind, d, two_n, coefficients}");
  int d = j.at("d").get<int>(), two_n = j.at("two_n").get<int>();
  require(d >= 1 && two_n >= 2 && two_n % 2 == 0, ErrorCode::BadInput,
          what + ": invalid shape");
  auto coeffs = coefficients_from_json(j.at("coefficients"), what + ".coefficients");
  for (const auto& [alpha, a] : coeffs) {
    require(alpha.d() == d, ErrorCode::DimensionMismatch, what + ": index arity mismatch");
    require(a.size() == two_n, ErrorCode::DimensionMismatch, what + ": value length mismatch");
  }
  return SliceFunction::stem_polynomial(d, two_n, std::move(coeffs));
}

inline json to_json(const TaylorSeries& s) {
  return json{{"center", to_json(s.center)},
              {"radius", to_json(s.radius)},
              {"max_order", s.max_order},
              {"sup_bound", s.sup_bound},
              {"coefficients", to_json(s.coefficients)}};
}

inline TaylorSeries taylor_from_json(const json& j, const AlgebraSpec& spec,
                                     const std::string& what) {
  require(j.is_object() && j.contains("center") && j.contains("radius") &&
              j.contains("max_order") && j.contains("coefficients"),
          ErrorCode::BadInput, what + ": expected {center, radius, max_order, coefficients}");
  TaylorSeries s;
  s.center = point_from_json(j.at("center"), spec, what + ".center");
  s.radius = vec_from_json(j.at("radius"), what + ".radius");
  s.max_order = j.at("max_order").get<int>();
  s.sup_bound = j.value("sup_bound", 0.0);
  s.coefficients = coefficients_from_json(j.at("coefficients"), what + ".coefficients");
  require(s.radius.size() == s.center.d(), ErrorCode::DimensionMismatch,
          what + ": radius arity must match the center");
  for (const auto& [alpha, a] : s.coefficients) {
    require(alpha.d() == s.center.d(), ErrorCode::DimensionMismatch,
            what + ": index arity mismatch");
    require(a.size() == s.center.two_n(), ErrorCode::DimensionMismatch,
            what + ": value length mismatch");
  }
  return s;
}

/// Region specs are shape lists with centers and radii as flat arrays:
///   {"shape": "ball", "center_x": [...], "center_y": [...], "radius": 0.5}
///   {"shape": "polydisc", "center_x": ..., "center_y": ..., "radius": [...]}
///   {"shape": "ellipse", "center_x": ..., "center_y": ..., "axes_x": ..., "axes_y": ...}
///   {"shape": "half-plane", "a_x": [...], "a_y": [...], "c": 0.0}
///   {"shape": "all" | "empty", "d": 1}
/// composed with {"op": "union" | "intersect" | "minus" | "conjugate", "args": [...]}.
inline Region region_from_json(const json& j, const std::string& what) {
  require(j.is_object(), ErrorCode::BadInput, what + ": expected a region object");
  if (j.contains("op")) {
    std::string op = j.at("op").get<std::string>();
    require(j.contains("args") && j.at("args").is_array() && !j.at("args").empty(),
            ErrorCode::BadInput, what + ": op needs a nonempty args list");
    const json& args = j.at("args");
    Region acc = region_from_json(args[0], what + ".args[0]");
    if (op == "conjugate") {
      require(args.size() == 1, ErrorCode::BadInput, what + ": conjugate takes one arg");
      return acc.conjugated();
    }
    require(op != "minus" || args.size() == 2, ErrorCode::BadInput,
            what + ": minus takes exactly two args");
    for (std::size_t i = 1; i < args.size(); ++i) {
      Region next = region_from_json(args[i], what + ".args[" + std::to_string(i) + "]");
      if (op == "union") acc = acc | next;
      else if (op == "intersect") acc = acc & next;
      else if (op == "minus") acc = acc - next;
      else fail(ErrorCode::BadInput, what + ": unknown op \"" + op + "\"");
    }
    return acc;
  }
  std::string shape = j.value("shape", "");
  if (shape == "all") return Region::all(j.at("d").get<int>());
  if (shape == "empty") return Region::empty(j.at("d").get<int>());
  if (shape == "half-plane")
    return Region::half_plane(vec_from_json(j.at("a_x"), what + ".a_x"),
                              vec_from_json(j.at("a_y"), what + ".a_y"),
                              j.at("c").get<double>());
  if (shape == "ellipse")
    return Region::ellipse(vec_from_json(j.at("center_x"), what + ".center_x"),
                           vec_from_json(j.at("center_y"), what + ".center_y"),
                           vec_from_json(j.at("axes_x"), what + ".axes_x"),
                           vec_from_json(j.at("axes_y"), what + ".axes_y"));
  if (shape == "ball" || shape == "polydisc") {
    Vec cx = vec_from_json(j.at("center_x"), what + ".center_x");
    Vec cy = vec_from_json(j.at("center_y"), what + ".center_y");
    bool closed = j.value("closed", false);
    if (shape == "ball") return Region::ball(cx, cy, j.at("radius").get<double>(), closed);
    const json& r = j.at("radius");
    Vec radius = r.is_number() ? Vec(Vec::Constant(cx.size(), r.get<double>()))
                               : vec_from_json(r, what + ".radius");
    return Region::polydisc(cx, cy, radius, closed);
  }
  fail(ErrorCode::BadInput, what + ": unknown shape \"" + shape + "\"");
}

/// Sampled paths serialize as arrays of (t, re[], im[]) triples.
inline json path_to_json(const std::vector<double>& ts, const std::vector<Vec>& re,
                         const std::vector<Vec>& im) {
  require(ts.size() == re.size() && ts.size() == im.size(), ErrorCode::BadInput,
          "path samples need matching t, re, im lengths");
  json out = json::array();
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.push_back(json::array({ts[i], to_json(re[i]), to_json(im[i])}));
  return out;
}

inline json parse_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), ErrorCode::BadInput, what + ": invalid JSON");
  return j;
}

}  // namespace slicecalc::io
