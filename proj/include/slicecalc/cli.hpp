#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <slicecalc/calculus.hpp>
#include <slicecalc/extension.hpp>
#include <slicecalc/io.hpp>
#include <slicecalc/representation.hpp>
#include <slicecalc/topology.hpp>

namespace slicecalc::cli {

namespace detail {

using io::json;

/// All numeric CLI output carries 12 significant digits; JSON payloads are
/// rounded through the same formatter so files and printed values agree.
inline double sig12(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_sig(v));
}

inline void round_numbers(json& j) {
  if (j.is_number_float()) j = sig12(j.get<double>());
  else if (j.is_array() || j.is_object())
    for (auto& item : j) round_numbers(item);
}

inline std::string dump(json j) {
  round_numbers(j);
  return j.dump(2) + "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), ErrorCode::IoError, "cannot read " + path);
  return buf.str();
}

inline void write_output(const std::string& text, const std::string& path,
                         std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  out.flush();
  require(out.good(), ErrorCode::IoError, "failed writing " + path);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  require(end == begin + s.size() && !s.empty(), ErrorCode::BadInput,
          what + ": \"" + s + "\" is not a number");
  return v;
}

inline Vec parse_double_list(const std::string& s, const std::string& what) {
  auto parts = split(s, ',');
  Vec v(static_cast<long>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i)
    v[static_cast<long>(i)] = parse_double(parts[i], what);
  return v;
}

/// Element literals: either comma-separated coordinates matching the algebra
/// dimension, or quaternion expressions built from signed terms with optional
/// i/j/k units ("i", "-j", "1+2i-0.3k", "0.5").
inline Vec parse_element(const std::string& raw, const AlgebraSpec& spec,
                         const std::string& what) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  require(!s.empty(), ErrorCode::BadInput, what + ": empty element literal");
  if (s.find(',') != std::string::npos) {
    Vec v = parse_double_list(s, what);
    require(v.size() == spec.dim, ErrorCode::DimensionMismatch,
            what + ": expected " + std::to_string(spec.dim) + " coordinates");
    return v;
  }
  require(spec.unit >= 0, ErrorCode::BadInput,
          what + ": this algebra has no unit; use comma-separated coordinates");
  Vec v = Vec::Zero(spec.dim);
  std::size_t pos = 0;
  while (pos < s.size()) {
    double sign = 1.0;
    if (s[pos] == '+' || s[pos] == '-') {
      if (s[pos] == '-') sign = -1.0;
      ++pos;
      require(pos < s.size(), ErrorCode::BadInput, what + ": dangling sign");
    }
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    double num = std::strtod(begin, &end);
    bool has_num = end > begin;
    pos += static_cast<std::size_t>(end - begin);
    int unit_idx = -1;
    if (pos < s.size() && (s[pos] == 'i' || s[pos] == 'j' || s[pos] == 'k')) {
      require(spec.name == "quaternion", ErrorCode::BadInput,
              what + ": i/j/k literals are quaternion-only; use coordinates");
      unit_idx = 1 + (s[pos] - 'i');
      ++pos;
    }
    require(has_num || unit_idx >= 0, ErrorCode::BadInput,
            what + ": malformed literal \"" + raw + "\"");
    double coeff = sign * (has_num ? num : 1.0);
    if (unit_idx < 0) v[spec.unit] += coeff;
    else v[unit_idx] += coeff;
  }
  return v;
}

inline ComplexStructure default_structure(const AlgebraSpec& spec) {
  if (!spec.has_table()) return standard_structure(spec.dim);
  int idx = spec.unit == 0 ? 1 : 0;
  return ComplexStructure(left_mult_operator(Vec(Vec::Unit(spec.dim, idx)), spec));
}

/// Splits an element into a d = 1 slice point: scalar part, imaginary norm,
/// and the structure of the imaginary direction (a default slice for reals).
inline SlicePoint parse_point(const std::string& raw, const AlgebraSpec& spec,
                              const std::string& what) {
  Vec v = parse_element(raw, spec, what);
  require(spec.has_table() && spec.unit >= 0, ErrorCode::BadInput,
          what + ": point literals need an algebra with a unit");
  double scalar = v[spec.unit];
  Vec imag = v;
  imag[spec.unit] = 0.0;
  double y = imag.norm();
  auto d1 = [](double t) { return Vec(Vec::Constant(1, t)); };
  if (y <= 1e-14) return make_point(d1(scalar), d1(0.0), default_structure(spec));
  return make_point(d1(scalar), d1(y),
                    ComplexStructure(left_mult_operator(Vec(imag / y), spec)));
}

inline ComplexStructure parse_structure(const std::string& raw, const AlgebraSpec& spec,
                                        const std::string& what) {
  Vec v = parse_element(raw, spec, what);
  require(spec.has_table() && spec.unit >= 0, ErrorCode::BadInput,
          what + ": structure literals need an algebra with a unit");
  require(std::abs(v[spec.unit]) <= 1e-12 * std::max(1.0, v.norm()), ErrorCode::BadInput,
          what + ": structures come from imaginary units (nonzero scalar part)");
  v[spec.unit] = 0.0;
  double n = v.norm();
  require(n > 1e-14, ErrorCode::BadInput, what + ": zero imaginary part");
  return ComplexStructure(left_mult_operator(Vec(v / n), spec));
}

/// "--tuple i,-i" style lists; coordinate-vector entries go through JSON files.
inline StructureTuple parse_tuple(const std::string& raw, const AlgebraSpec& spec,
                                  const std::string& what) {
  std::vector<ComplexStructure> entries;
  for (const auto& tok : split(raw, ','))
    entries.push_back(parse_structure(tok, spec, what));
  return make_structure_tuple(entries);
}

inline StructureTuple tuple_from_file(const std::string& path, const AlgebraSpec& spec) {
  json j = io::parse_text(read_file(path), path);
  require(j.is_array() && !j.empty(), ErrorCode::BadInput,
          path + ": expected a nonempty array of structures");
  std::vector<ComplexStructure> entries;
  for (std::size_t i = 0; i < j.size(); ++i)
    entries.push_back(io::structure_from_json(j[i], spec, path + "[" + std::to_string(i) + "]"));
  return make_structure_tuple(entries);
}

inline Vec broadcast_radius(const std::string& raw, int d, const std::string& what) {
  Vec r = parse_double_list(raw, what);
  if (r.size() == 1 && d > 1) return Vec(Vec::Constant(d, r[0]));
  require(r.size() == d, ErrorCode::DimensionMismatch,
          what + ": radius arity must match the point arity");
  for (int l = 0; l < r.size(); ++l)
    require(r[l] > 0.0, ErrorCode::RadiusError, what + ": radii must be positive");
  return r;
}

/// Runs batch evaluations in deterministic index order while keeping worker
/// exceptions from escaping the thread pool.
template <typename Body>
inline void indexed_batch(std::size_t n, const Body& body) {
  std::mutex mu;
  std::optional<Error> first;
  parallel_for(n, [&](std::size_t idx) {
    std::unique_lock<std::mutex> peek(mu);
    if (first) return;
    peek.unlock();
    try {
      body(idx);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(mu);
      if (!first) first.emplace(e);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      if (!first) first.emplace(ErrorCode::BadInput, e.what());
    }
  });
  if (first) throw *first;
}

inline std::vector<SlicePoint> points_from_file(const std::string& path,
                                                const AlgebraSpec& spec) {
  json j = io::parse_text(read_file(path), path);
  require(j.is_array() && !j.empty(), ErrorCode::BadInput,
          path + ": expected a nonempty array of points");
  std::vector<SlicePoint> pts;
  pts.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    pts.push_back(io::point_from_json(j[i], spec, path + "[" + std::to_string(i) + "]"));
  return pts;
}

}  // namespace detail

/// Self-contained invariant suite behind `slicecalc check`: each entry returns
/// an empty optional on success or a short failure description.
namespace checks {

using Check = std::pair<std::string, std::function<std::optional<std::string>()>>;

inline Vec d1(double t) { return Vec::Constant(1, t); }

inline std::optional<std::string> moore_penrose(const AlgebraSpec&, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (int c = 0; c < 20; ++c) {
    int rows = 3 + static_cast<int>(rng() % 4);
    int cols = 3 + static_cast<int>(rng() % 4);
    Mat m(rows, cols);
    int mode = c % 3;
    if (mode == 2) {
      m.setZero();
    } else {
      for (int r = 0; r < rows; ++r)
        for (int cc = 0; cc < cols; ++cc) m(r, cc) = gaussian(rng);
      if (mode == 1 && rows > 1 && cols > 1) {
        Mat a(rows, 1), b(1, cols);
        for (int r = 0; r < rows; ++r) a(r, 0) = gaussian(rng);
        for (int cc = 0; cc < cols; ++cc) b(0, cc) = gaussian(rng);
        m = a * b;
      }
    }
    Mat p = mp_inverse(m);
    double scale = std::max(1.0, m.norm());
    double worst = std::max(
        {(m * p * m - m).norm() / scale, (p * m * p - p).norm() / std::max(1.0, p.norm()),
         (Mat(m * p) - Mat((m * p).transpose())).norm(),
         (Mat(p * m) - Mat((p * m).transpose())).norm()});
    if (worst > 1e-9) return "MP condition residual " + format_sig(worst);
  }
  return {};
}

inline std::optional<std::string> zeta_mirror_pair(const AlgebraSpec& spec, std::uint64_t seed) {
  ComplexStructure i = cone_for_algebra(spec).sample(seed, 1)[0];
  auto si = slice_inverse(make_structure_tuple({i, i.negated()}));
  int n = spec.dim;
  Mat expected(2 * n, 2 * n);
  expected << 0.5 * Mat::Identity(n, n), 0.5 * Mat::Identity(n, n), -0.5 * i.mat,
      0.5 * i.mat;
  double diff = (si.zeta_plus - expected).cwiseAbs().maxCoeff();
  if (diff > 1e-10) return "closed-form deviation " + format_sig(diff);
  return {};
}

inline std::optional<std::string> representation_polynomials(const AlgebraSpec& spec,
                                                             std::uint64_t seed) {
  Rng rng = make_rng(seed);
  ConeSpec cone = cone_for_algebra(spec);
  ComplexStructure j1 = cone.sample(seed + 1, 1)[0];
  auto si = slice_inverse(make_structure_tuple({j1, j1.negated()}));
  Vec c = random_unit_vector(rng, spec.dim), cp = random_unit_vector(rng, spec.dim);
  auto poly = [&](const Vec& q) {
    Vec q2 = spec.mul(q, q);
    return Vec(spec.mul(q2, q) + spec.mul(q2, c) + spec.mul(q, cp));
  };
  auto element = [&](double x, double y, const ComplexStructure& s) {
    return Vec(x * spec.unit_vector() + y * structure_to_element(s, spec));
  };
  auto targets = cone.sample(seed + 2, 10);
  for (const auto& target : targets) {
    double x = uniform(rng, -1.0, 1.0), y = uniform(rng, 0.1, 1.0);
    std::vector<Vec> values = {poly(element(x, y, j1)), poly(element(x, -y, j1))};
    Vec got = represent(values, si, target);
    Vec want = poly(element(x, y, target));
    if ((got - want).norm() > 1e-9)
      return "representation defect " + format_sig((got - want).norm());
  }
  return {};
}

inline std::optional<std::string> kernel_characterization(const AlgebraSpec& spec,
                                                          std::uint64_t seed) {
  ConeSpec cone = cone_for_algebra(spec);
  ComplexStructure j = cone.sample(seed, 1)[0];
  auto single = slice_inverse(make_structure_tuple({j}));
  if (!kernel_membership(j, single)) return "defining slice missing from its own kernel";
  auto others = cone.sample(seed + 1, 25);
  for (const auto& k : others) {
    if (same_up_to_sign(k, j)) continue;
    if (kernel_membership(k, single))
      return "foreign structure accepted by a single-slice kernel";
  }
  auto pair = slice_inverse(make_structure_tuple({j, j.negated()}));
  for (const auto& k : others)
    if (!kernel_membership(k, pair)) return "mirror-pair kernel is not universal";
  return {};
}

inline std::optional<std::string> sigma_metric(const AlgebraSpec& spec, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  auto structures = cone_for_algebra(spec).sample(seed + 1, 24);
  auto sample_point = [&]() {
    double x = uniform(rng, -2.0, 2.0);
    double y = (rng() % 5 == 0) ? 0.0 : uniform(rng, 0.0, 2.0);
    const auto& s = structures[rng() % structures.size()];
    return make_point(d1(x), d1(y), s);
  };
  for (int t = 0; t < 2000; ++t) {
    SlicePoint p = sample_point(), q = sample_point(), r = sample_point();
    if (sigma_distance(p, q) != sigma_distance(q, p)) return "symmetry broken";
    if (sigma_distance(p, p) != 0.0) return "nonzero self-distance";
    double lhs = sigma_distance(p, r);
    double rhs = sigma_distance(p, q) + sigma_distance(q, r);
    if (lhs > rhs + 1e-12)
      return "triangle violated by " + format_sig(lhs - rhs);
  }
  return {};
}

inline std::optional<std::string> metrizability_law(const AlgebraSpec& spec,
                                                    std::uint64_t seed) {
  auto structures = cone_for_algebra(spec).sample(seed, 10);
  auto rep = metrizability_witness(structures);
  for (int k = 1; k <= 10; ++k)
    if (std::abs(rep.distances[k - 1] - 1.0 / k) > 1e-12)
      return "distance law broken at k=" + std::to_string(k);
  return {};
}

inline std::optional<std::string> tau_sigma_decay(const AlgebraSpec& spec,
                                                  std::uint64_t seed) {
  ConeSpec cone = cone_for_algebra(spec);
  ComplexStructure i = cone.sample(seed, 1)[0];
  Rng rng = make_rng(seed + 0x517cc1b7ULL);
  std::vector<ComplexStructure> probes;
  for (int k = 1; k <= 10; ++k)
    probes.push_back(probe_at_distance(i, cone, std::pow(4.0, -k), rng));
  auto rep = tau_sigma_witness(i, probes);
  for (int k = 1; k <= 10; ++k) {
    double want = std::min(1.0, std::pow(2.0, -k));
    if (std::abs(rep.distances[k - 1] - want) > 1e-12)
      return "sigma gap law broken at k=" + std::to_string(k);
  }
  if (!rep.verdict) return "witness did not reach its threshold";
  return {};
}

inline std::optional<std::string> derivative_orientation(const AlgebraSpec& spec,
                                                         std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int two_n = spec.dim;
  Vec e0 = Vec::Unit(two_n, 0);  // any coefficient direction works
  SliceFunction f = SliceFunction::stem_polynomial(1, two_n, {{MultiIndex({3}), e0}});
  SliceFunction df = SliceFunction::stem_polynomial(1, two_n, {{MultiIndex({2}), Vec(3.0 * e0)}});
  for (const auto& i : cone_for_algebra(spec).sample(seed + 3, 4)) {
    Vec x = d1(uniform(rng, -1.0, 1.0)), y = d1(uniform(rng, 0.2, 1.0));
    Vec fd = islice_derivative(f, i, 0, x, y);
    Vec want = df.eval(make_point(x, y, i));
    if ((fd - want).norm() > 1e-6)
      return "finite difference defect " + format_sig((fd - want).norm());
    Vec flipped = islice_derivative(f, i.negated(), 0, x, Vec(-y));
    if ((fd - flipped).norm() > 1e-6) return "orientation mismatch";
  }
  return {};
}

inline std::optional<std::string> taylor_exactness(const AlgebraSpec& spec,
                                                   std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int two_n = spec.dim;
  Vec e0 = Vec::Unit(two_n, 0);  // any coefficient direction works
  SliceFunction f = SliceFunction::stem_polynomial(
      1, two_n, {{MultiIndex({1}), Vec(-2.0 * e0)}, {MultiIndex({3}), e0}});
  auto structures = cone_for_algebra(spec).sample(seed + 4, 6);
  SlicePoint center = make_point(d1(0.1), d1(0.2), structures[0]);
  TaylorSeries series = taylor_coefficients(f, center, 3, d1(1.5));
  for (int t = 0; t < 5; ++t) {
    SlicePoint q = make_point(d1(0.1 + uniform(rng, -0.4, 0.4)),
                              d1(uniform(rng, 0.0, 0.5)), structures[1 + t]);
    Vec got = taylor_eval(series, q).value;
    Vec want = f.eval(q);
    if ((got - want).norm() > 1e-9)
      return "series defect " + format_sig((got - want).norm());
  }
  return {};
}

inline std::optional<std::string> star_slice_identity(const AlgebraSpec& spec,
                                                      std::uint64_t seed) {
  Rng rng = make_rng(seed);
  ComplexStructure i = cone_for_algebra(spec).sample(seed + 5, 1)[0];
  int two_n = spec.dim;
  for (int t = 0; t < 5; ++t) {
    std::complex<double> z{uniform(rng, -1.0, 1.0), uniform(rng, 0.1, 1.0)};
    std::complex<double> w{uniform(rng, -1.0, 1.0), uniform(rng, 0.1, 1.0)};
    SlicePoint q = make_point(d1(z.real()), d1(z.imag()), i);
    SlicePoint p = make_point(d1(w.real()), d1(w.imag()), i);
    Mat op = star_power(q, p, MultiIndex({3}));
    Mat lz = (z.real() - w.real()) * Mat::Identity(two_n, two_n) +
             (z.imag() - w.imag()) * i.mat;
    Mat classical = lz * lz * lz;
    if ((op - classical).norm() > 1e-10)
      return "slice restriction defect " + format_sig((op - classical).norm());
  }
  return {};
}

inline std::optional<std::string> extension_round_trip(const AlgebraSpec& spec,
                                                       std::uint64_t seed) {
  Rng rng = make_rng(seed);
  auto structures = cone_for_algebra(spec).sample(seed + 6, 12);
  int two_n = spec.dim;
  Vec e0 = Vec::Unit(two_n, 0);  // any coefficient direction works
  SliceFunction data = SliceFunction::stem_polynomial(1, two_n, {{MultiIndex({2}), e0}});
  auto u = make_slice_open_tuple(make_structure_tuple({structures[0]}, true),
                                 {Region::ball(d1(0.0), d1(0.0), 1.2)});
  auto result = extend(data, u);
  for (int t = 0; t < 10; ++t) {
    double ang = uniform(rng, 0.0, 2 * M_PI), rad = uniform(rng, 0.05, 0.9);
    SlicePoint q = make_point(d1(rad * std::cos(ang)), d1(std::abs(rad * std::sin(ang))),
                              structures[2 + (t % 10)]);
    Vec got = result.extension.eval(q);
    Vec want = data.eval(q);
    if ((got - want).norm() > 1e-9)
      return "round-trip defect " + format_sig((got - want).norm());
  }
  if (result.input_cr_residual > 1e-6)
    return "input CR residual " + format_sig(result.input_cr_residual);
  return {};
}

inline std::optional<std::string> hyper_polydisc_sigma_ball(const AlgebraSpec& spec,
                                                            std::uint64_t seed) {
  Rng rng = make_rng(seed);
  ConeSpec cone = cone_for_algebra(spec);
  auto structures = cone.sample(seed + 7, 32);
  SlicePoint center = make_point(d1(0.3), d1(0.0), structures[0]);
  double radius = 0.8;
  auto hp = hyper_sigma_polydisc(center, d1(radius), make_structure_tuple({structures[0]}),
                                 cone.sample(seed + 8, 64));
  for (int t = 0; t < 2000; ++t) {
    SlicePoint q = make_point(d1(uniform(rng, -1.0, 1.5)), d1(uniform(rng, 0.0, 1.2)),
                              structures[rng() % structures.size()]);
    bool a = hp.contains(q);
    bool b = sigma_ball_contains(center, radius, q);
    if (a != b) return "membership disagreement at probe " + std::to_string(t);
  }
  return {};
}

inline ComplexStructure default_from_cone(const AlgebraSpec& spec) {
  return cone_for_algebra(spec).sample(1, 1)[0];
}

inline std::optional<std::string> lacunary_oracle(const AlgebraSpec& spec, std::uint64_t) {
  Vec e0 = spec.unit_vector();
  SlicePoint p = make_point(d1(0.0), d1(0.0), default_from_cone(spec));
  SlicePoint q = make_point(d1(0.5), d1(0.0), p.I);
  auto res = lacunary_boundary_function(p, d1(1.0), e0, q, 6);
  double oracle = 0.0;
  for (int j = 0; j <= 6; ++j) oracle += std::pow(0.5, std::pow(2.0, j));
  double diff = std::abs(res.value[0] - oracle);
  if (diff > 1e-9) return "oracle deviation " + format_sig(diff);
  double rest = 0.0;
  for (int j = 7; j <= 12; ++j) rest += std::pow(0.5, std::pow(2.0, j));
  if (res.tail < rest) return "tail bound below the true remainder";
  return {};
}

inline std::vector<Check> build(const AlgebraSpec& spec, std::uint64_t seed) {
  std::vector<Check> out;
  auto add = [&](const std::string& name, auto fn) {
    out.emplace_back(name, [fn, &spec, seed]() { return fn(spec, seed); });
  };
  add("moore-penrose-conditions", moore_penrose);
  add("zeta-inverse-mirror-pair", zeta_mirror_pair);
  if (spec.has_table()) add("representation-polynomials", representation_polynomials);
  if (spec.name == "quaternion") add("kernel-characterization", kernel_characterization);
  add("sigma-metric-laws", sigma_metric);
  add("metrizability-distance-law", metrizability_law);
  add("tau-sigma-decay", tau_sigma_decay);
  add("derivative-orientation", derivative_orientation);
  add("taylor-polynomial-exactness", taylor_exactness);
  add("star-power-slice-identity", star_slice_identity);
  add("extension-round-trip", extension_round_trip);
  if (spec.name == "quaternion") add("hyper-polydisc-sigma-ball", hyper_polydisc_sigma_ball);
  if (spec.has_table()) add("lacunary-series-oracle", lacunary_oracle);
  return out;
}

}  // namespace checks

/// Entry point shared by the binary and the tests: parses `args` (without the
/// program name), writes artifacts to --out or `out`, and reports errors as
/// one-line JSON on `err`. Exit codes: 0 on success, 2 for malformed command
/// lines, 10 + error-code for library errors (distinct per code).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using detail::json;

  CLI::App app{"weak slice analysis toolkit"};
  app.require_subcommand(1);

  std::string algebra = "quaternion";
  std::uint64_t seed = 1;
  double tol = -1.0;
  std::string out_path;
  auto add_common = [&](CLI::App* sub, bool with_tol = false) {
    sub->add_option("--algebra", algebra, "algebra name (quaternion, octonion, clifford:m, endo:2n)");
    sub->add_option("--seed", seed, "deterministic seed");
    sub->add_option("--out", out_path, "write output to this file instead of stdout");
    if (with_tol) sub->add_option("--tol", tol, "tolerance override");
  };
  auto spec_of = [&]() { return algebra_from_name(algebra); };
  auto emit = [&](const std::string& text) { detail::write_output(text, out_path, out); };

  // sigma-dist ---------------------------------------------------------
  std::string p_lit, q_lit;
  auto* sigma_cmd = app.add_subcommand("sigma-dist", "sigma distance between two points");
  sigma_cmd->add_option("--p", p_lit, "first point literal")->required();
  sigma_cmd->add_option("--q", q_lit, "second point literal")->required();
  add_common(sigma_cmd);
  sigma_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    SlicePoint p = detail::parse_point(p_lit, spec, "--p");
    SlicePoint q = detail::parse_point(q_lit, spec, "--q");
    emit(format_sig(sigma_distance(p, q)) + "\n");
  });

  // witness ------------------------------------------------------------
  auto* witness_cmd = app.add_subcommand("witness", "topology witness sequences (CSV)");
  witness_cmd->require_subcommand(1);
  int witness_k = 10;
  double witness_threshold = 1e-3;
  auto* tau_cmd = witness_cmd->add_subcommand(
      "tau-sigma", "slices near C_I in tau_s stay sigma-far: distance column ~ sqrt");
  tau_cmd->add_option("--k", witness_k, "number of probes");
  tau_cmd->add_option("--threshold", witness_threshold, "verdict threshold");
  add_common(tau_cmd);
  tau_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    require(witness_k >= 1, ErrorCode::BadInput, "--k must be positive");
    ConeSpec cone = cone_for_algebra(spec);
    ComplexStructure i = cone.sample(seed, 1)[0];
    Rng rng = make_rng(seed + 0x517cc1b7ULL);
    std::vector<ComplexStructure> probes;
    for (int k = 1; k <= witness_k; ++k)
      probes.push_back(probe_at_distance(i, cone, std::pow(4.0, -k), rng));
    emit(tau_sigma_witness(i, probes, witness_threshold).csv());
  });
  auto* metr_cmd = witness_cmd->add_subcommand(
      "metrizability", "first-countability failure: sigma distances decay as 1/k");
  metr_cmd->add_option("--k", witness_k, "number of structures");
  metr_cmd->add_option("--threshold", witness_threshold, "verdict threshold");
  add_common(metr_cmd);
  metr_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    require(witness_k >= 1, ErrorCode::BadInput, "--k must be positive");
    auto structures = cone_for_algebra(spec).sample(seed, witness_k);
    emit(metrizability_witness(structures, witness_threshold).csv());
  });

  // represent ----------------------------------------------------------
  std::string tuple_lit, tuple_file, point_lit, values_file;
  auto* rep_cmd = app.add_subcommand(
      "represent", "evaluate the path-representation formula on a target slice");
  rep_cmd->add_option("--tuple", tuple_lit, "comma-separated structure literals");
  rep_cmd->add_option("--tuple-file", tuple_file, "JSON array of structures");
  rep_cmd->add_option("--point", point_lit, "target point literal (its slice is the target)")
      ->required();
  rep_cmd->add_option("--values-file", values_file, "JSON array: one value per tuple slice")
      ->required();
  add_common(rep_cmd);
  rep_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    require(tuple_lit.empty() != tuple_file.empty(), ErrorCode::BadInput,
            "provide exactly one of --tuple / --tuple-file");
    StructureTuple t = tuple_file.empty() ? detail::parse_tuple(tuple_lit, spec, "--tuple")
                                          : detail::tuple_from_file(tuple_file, spec);
    json vals = io::parse_text(detail::read_file(values_file), values_file);
    require(vals.is_array(), ErrorCode::BadInput, values_file + ": expected an array");
    std::vector<Vec> values;
    for (std::size_t i = 0; i < vals.size(); ++i)
      values.push_back(io::vec_from_json(vals[i], values_file + "[" + std::to_string(i) + "]"));
    SlicePoint target = detail::parse_point(point_lit, spec, "--point");
    Vec value = represent(values, slice_inverse(t), target.I);
    emit(detail::dump(json{{"value", io::to_json(value)}}));
  });

  // zeta-inverse ---------------------------------------------------------
  auto* zeta_cmd = app.add_subcommand("zeta-inverse", "dump the slice inverse as JSON");
  zeta_cmd->add_option("--tuple", tuple_lit, "comma-separated structure literals");
  zeta_cmd->add_option("--tuple-file", tuple_file, "JSON array of structures");
  add_common(zeta_cmd);
  zeta_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    require(tuple_lit.empty() != tuple_file.empty(), ErrorCode::BadInput,
            "provide exactly one of --tuple / --tuple-file");
    StructureTuple t = tuple_file.empty() ? detail::parse_tuple(tuple_lit, spec, "--tuple")
                                          : detail::tuple_from_file(tuple_file, spec);
    SliceInverse si = slice_inverse(t);
    emit(detail::dump(json{{"zeta", io::to_json(si.zeta)},
                           {"zeta_plus", io::to_json(si.zeta_plus)},
                           {"kernel_dimension", si.kernel_basis.cols()},
                           {"distinct_up_to_sign", t.distinct_up_to_sign}}));
  });

  // extend ---------------------------------------------------------------
  std::string spec_file, eval_file;
  auto* extend_cmd = app.add_subcommand(
      "extend", "extend slice data off its tuple and evaluate at points");
  extend_cmd->add_option("--spec", spec_file, "JSON: {algebra, tuple, regions, data}")
      ->required();
  extend_cmd->add_option("--eval", eval_file, "JSON array of evaluation points")->required();
  add_common(extend_cmd, true);
  extend_cmd->callback([&]() {
    json sj = io::parse_text(detail::read_file(spec_file), spec_file);
    require(sj.is_object() && sj.contains("tuple") && sj.contains("regions") &&
                sj.contains("data"),
            ErrorCode::BadInput, spec_file + ": expected {algebra, tuple, regions, data}");
    AlgebraSpec spec = algebra_from_name(sj.value("algebra", algebra));
    std::vector<ComplexStructure> entries;
    for (std::size_t i = 0; i < sj.at("tuple").size(); ++i)
      entries.push_back(io::structure_from_json(sj.at("tuple")[i], spec,
                                                "tuple[" + std::to_string(i) + "]"));
    std::vector<Region> regions;
    for (std::size_t i = 0; i < sj.at("regions").size(); ++i)
      regions.push_back(io::region_from_json(sj.at("regions")[i],
                                             "regions[" + std::to_string(i) + "]"));
    SliceFunction data = io::function_from_json(sj.at("data"), "data");
    auto u = make_slice_open_tuple(make_structure_tuple(entries, true), std::move(regions));
    double cr_tol = tol > 0 ? tol : 1e-6;
    ExtendResult result = extend(data, u, GridSpec{}, cr_tol, seed);
    auto points = detail::points_from_file(eval_file, spec);
    std::vector<Vec> values(points.size());
    detail::indexed_batch(points.size(),
                          [&](std::size_t idx) { values[idx] = result.extension.eval(points[idx]); });
    json jv = json::array();
    for (const auto& v : values) jv.push_back(io::to_json(v));
    emit(detail::dump(json{{"values", std::move(jv)},
                           {"input_cr_residual", result.input_cr_residual},
                           {"real_trace_residual", result.real_trace_residual}}));
  });

  // polydisc ---------------------------------------------------------------
  std::string center_lit, radius_lit = "1", variant = "sigma", probe_file;
  auto* poly_cmd = app.add_subcommand("polydisc", "polydisc membership table (CSV)");
  poly_cmd->add_option("--center", center_lit, "center point literal")->required();
  poly_cmd->add_option("--radius", radius_lit, "radius (scalar or comma list)");
  poly_cmd->add_option("--variant", variant, "sigma | plain | hyper");
  poly_cmd->add_option("--tuple", tuple_lit, "defining tuple (hyper variant)");
  poly_cmd->add_option("--probe", probe_file, "JSON array of probe points")->required();
  add_common(poly_cmd);
  poly_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    SlicePoint center = detail::parse_point(center_lit, spec, "--center");
    Vec radius = detail::broadcast_radius(radius_lit, center.d(), "--radius");
    auto points = detail::points_from_file(probe_file, spec);
    std::vector<double> ratios(points.size());
    std::vector<char> member(points.size());
    if (variant == "hyper") {
      require(!tuple_lit.empty(), ErrorCode::BadInput, "hyper variant needs --tuple");
      StructureTuple t = detail::parse_tuple(tuple_lit, spec, "--tuple");
      auto hp = hyper_sigma_polydisc(center, radius, t,
                                     cone_for_algebra(spec).sample(seed, 64));
      detail::indexed_batch(points.size(), [&](std::size_t idx) {
        const SlicePoint& q = points[idx];
        double direct = 0.0, mirrored = 0.0;
        for (int l = 0; l < q.d(); ++l) {
          std::complex<double> w{q.x[l], q.y[l]}, z{center.x[l], center.y[l]};
          direct = std::max(direct, std::abs(w - z) / radius[l]);
          mirrored = std::max(mirrored, std::abs(std::conj(w) - z) / radius[l]);
        }
        ratios[idx] = std::min(direct, mirrored);
        member[idx] = hp.contains(q) ? 1 : 0;
      });
    } else {
      require(variant == "sigma" || variant == "plain", ErrorCode::BadInput,
              "--variant must be sigma, plain, or hyper");
      PolydiscSpec pd = make_polydisc(center, radius, variant == "sigma");
      detail::indexed_batch(points.size(), [&](std::size_t idx) {
        const SlicePoint& q = points[idx];
        ratios[idx] = sigma_polydisc_ratio(pd, q);
        member[idx] = sigma_polydisc_contains(pd, q) ? 1 : 0;
      });
    }
    std::string csv = "probe_index,ratio,member\n";
    for (std::size_t i = 0; i < points.size(); ++i)
      csv += std::to_string(i) + "," + format_sig(ratios[i]) + "," +
             std::to_string(static_cast<int>(member[i])) + "\n";
    emit(csv);
  });

  // psi-phi -----------------------------------------------------------------
  double shift = 0.5;
  std::string branch_lit = "i", slice_lit = "j", from_lit, to_lit, trace, format = "csv";
  int samples = 65;
  auto* psi_cmd = app.add_subcommand(
      "psi-phi", "branch square-root extension along a segment (CSV)");
  psi_cmd->add_option("--s", shift, "branch shift in [0,1]");
  psi_cmd->add_option("--branch", branch_lit, "branch structure J");
  psi_cmd->add_option("--slice", slice_lit, "evaluation slice I");
  psi_cmd->add_option("--from", from_lit, "segment start \"x,y\"");
  psi_cmd->add_option("--to", to_lit, "segment end \"x,y\"");
  psi_cmd->add_option("--samples", samples, "number of samples");
  psi_cmd->add_option("--trace", trace, "emit the cut-avoiding curve instead: ray | segments");
  psi_cmd->add_option("--format", format, "trace output: csv | json (t, re[], im[] triples)");
  add_common(psi_cmd);
  psi_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    require(samples >= 2, ErrorCode::BadInput, "--samples must be at least 2");
    require(format == "csv" || format == "json", ErrorCode::BadInput,
            "--format must be csv or json");
    if (!trace.empty()) {
      require(trace == "ray" || trace == "segments", ErrorCode::BadInput,
              "--trace must be ray or segments");
      std::vector<double> ts;
      std::vector<Vec> re, im;
      for (int n = 0; n < samples; ++n) {
        double t = static_cast<double>(n) / samples;  // curves live on [0, 1)
        auto w = trace == "ray" ? gamma_ray(shift, t) : gamma_segments(shift, t);
        ts.push_back(t);
        re.push_back(Vec::Constant(1, w.real()));
        im.push_back(Vec::Constant(1, w.imag()));
      }
      if (format == "json") {
        emit(detail::dump(io::path_to_json(ts, re, im)));
        return;
      }
      std::string csv = "t,re,im\n";
      for (std::size_t n = 0; n < ts.size(); ++n)
        csv += format_sig(ts[n]) + "," + format_sig(re[n][0]) + "," +
               format_sig(im[n][0]) + "\n";
      emit(csv);
      return;
    }
    require(!from_lit.empty() && !to_lit.empty(), ErrorCode::BadInput,
            "provide --from and --to (or --trace)");
    Vec a = detail::parse_double_list(from_lit, "--from");
    Vec b = detail::parse_double_list(to_lit, "--to");
    require(a.size() == 2 && b.size() == 2, ErrorCode::BadInput,
            "--from/--to take plane coordinates \"x,y\"");
    ComplexStructure j = detail::parse_structure(branch_lit, spec, "--branch");
    ComplexStructure i = detail::parse_structure(slice_lit, spec, "--slice");
    std::string csv = "t,x,y";
    for (int c = 0; c < spec.dim; ++c) csv += ",v" + std::to_string(c);
    csv += "\n";
    for (int n = 0; n < samples; ++n) {
      double t = static_cast<double>(n) / (samples - 1);
      double x = a[0] + t * (b[0] - a[0]), y = a[1] + t * (b[1] - a[1]);
      Vec v = branch_psi(shift, j, i, x, y);
      csv += format_sig(t) + "," + format_sig(x) + "," + format_sig(y);
      for (int c = 0; c < v.size(); ++c) csv += "," + format_sig(v[c]);
      csv += "\n";
    }
    emit(csv);
  });

  // taylor --------------------------------------------------------------------
  std::string data_file, series_file, sweep_lit;
  int order = 8, nodes = kQuadratureNodes;
  auto* taylor_cmd = app.add_subcommand(
      "taylor", "star-power Taylor coefficients of stem-polynomial data (JSON)");
  taylor_cmd->add_option("--center", center_lit, "expansion center literal")->required();
  taylor_cmd->add_option("--radius", radius_lit, "polydisc radius");
  taylor_cmd->add_option("--order", order, "maximum total order");
  taylor_cmd->add_option("--data", data_file, "stem-polynomial JSON")->required();
  taylor_cmd->add_option("--nodes", nodes, "quadrature nodes per circle");
  add_common(taylor_cmd);
  taylor_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    SlicePoint center = detail::parse_point(center_lit, spec, "--center");
    SliceFunction f =
        io::function_from_json(io::parse_text(detail::read_file(data_file), data_file), data_file);
    require(f.d() == center.d() && f.two_n() == center.two_n(), ErrorCode::DimensionMismatch,
            "data shape must match the center");
    Vec radius = detail::broadcast_radius(radius_lit, center.d(), "--radius");
    emit(detail::dump(io::to_json(taylor_coefficients(f, center, order, radius, nodes))));
  });

  auto* teval_cmd = app.add_subcommand(
      "taylor-eval", "evaluate a stored Taylor series with its tail estimate");
  teval_cmd->add_option("--series", series_file, "series JSON from `taylor`")->required();
  teval_cmd->add_option("--point", point_lit, "evaluation point literal");
  teval_cmd->add_option("--sweep", sweep_lit,
                        "CSV convergence sweep \"x0,y0,x1,y1\" on the center slice");
  teval_cmd->add_option("--samples", samples, "sweep sample count");
  add_common(teval_cmd);
  teval_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    TaylorSeries series = io::taylor_from_json(
        io::parse_text(detail::read_file(series_file), series_file), spec, series_file);
    require(point_lit.empty() != sweep_lit.empty(), ErrorCode::BadInput,
            "provide exactly one of --point / --sweep");
    if (!point_lit.empty()) {
      SlicePoint q = detail::parse_point(point_lit, spec, "--point");
      auto res = taylor_eval(series, q);
      emit(detail::dump(json{{"value", io::to_json(res.value)},
                             {"tail", res.tail_estimate},
                             {"ratio", res.ratio}}));
      return;
    }
    require(series.center.d() == 1, ErrorCode::BadInput, "--sweep needs one-variable series");
    Vec seg = detail::parse_double_list(sweep_lit, "--sweep");
    require(seg.size() == 4, ErrorCode::BadInput, "--sweep takes \"x0,y0,x1,y1\"");
    require(samples >= 2, ErrorCode::BadInput, "--samples must be at least 2");
    std::string csv = "probe_index,t,ratio,tail";
    for (int c = 0; c < series.center.two_n(); ++c) csv += ",v" + std::to_string(c);
    csv += "\n";
    for (int n = 0; n < samples; ++n) {
      double t = static_cast<double>(n) / (samples - 1);
      double x = seg[0] + t * (seg[2] - seg[0]), y = seg[1] + t * (seg[3] - seg[1]);
      SlicePoint q = make_point(Vec::Constant(1, x), Vec::Constant(1, y), series.center.I);
      auto res = taylor_eval(series, q);
      csv += std::to_string(n) + "," + format_sig(t) + "," + format_sig(res.ratio) + "," +
             format_sig(res.tail_estimate);
      for (int c = 0; c < res.value.size(); ++c) csv += "," + format_sig(res.value[c]);
      csv += "\n";
    }
    emit(csv);
  });

  // check -----------------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "run the invariant suite");
  add_common(check_cmd);
  int check_result = 0;
  check_cmd->callback([&]() {
    AlgebraSpec spec = spec_of();
    auto suite = checks::build(spec, seed);
    std::string table;
    int failed = 0;
    for (const auto& [name, fn] : suite) {
      std::optional<std::string> detail;
      try {
        detail = fn();
      } catch (const Error& e) {
        detail = std::string(error_code_name(e.code())) + ": " + e.what();
      }
      if (detail) {
        ++failed;
        table += "FAIL  " + name + "  (" + *detail + ")\n";
      } else {
        table += "PASS  " + name + "\n";
      }
    }
    table += std::to_string(suite.size() - failed) + "/" + std::to_string(suite.size()) +
             " checks passed\n";
    emit(table);
    check_result = failed;
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help and friends
    err << json{{"error", "bad-arguments"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    err << json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump() << "\n";
    return 10 + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 70;
  }
  if (check_result > 0) {
    err << json{{"error", error_code_name(ErrorCode::CheckFailed)},
                {"message", std::to_string(check_result) + " invariant(s) failed"}}
               .dump()
        << "\n";
    return 10 + static_cast<int>(ErrorCode::CheckFailed);
  }
  return 0;
}

}  // namespace slicecalc::cli
