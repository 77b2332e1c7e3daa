#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "slicecalc/calculus.hpp"
#include "slicecalc/paths.hpp"
#include "slicecalc/region.hpp"
#include "slicecalc/representation.hpp"
#include "slicecalc/topology.hpp"

namespace slicecalc {

/// A tuple of pairwise distinct (up to sign) structures together with one
/// open plane region per entry: the slice-open data extension starts from.
struct SliceOpenTuple {
  StructureTuple tuple;
  std::vector<Region> regions;

  int k() const { return tuple.k(); }
  int two_n() const { return tuple.two_n(); }
  int d() const { return regions.front().d(); }
};

inline SliceOpenTuple make_slice_open_tuple(StructureTuple tuple,
                                            std::vector<Region> regions) {
  require(tuple.distinct_up_to_sign, ErrorCode::TupleNotDistinct,
          "tuple entries must be distinct up to sign");
  require(static_cast<int>(regions.size()) == tuple.k(), ErrorCode::DimensionMismatch,
          "need one region per tuple entry");
  for (const auto& r : regions) {
    require(r.valid(), ErrorCode::BadInput, "regions must be constructed");
    require(r.d() == regions.front().d(), ErrorCode::DimensionMismatch,
            "regions must share one arity");
  }
  return SliceOpenTuple{std::move(tuple), std::move(regions)};
}

/// One representative per +-pair of cone structures: tuple entries keep their
/// own sign, everything else takes the canonical positive representative.
struct HalfCone {
  StructureTuple tuple;

  bool contains(const ComplexStructure& k) const {
    for (int l = 0; l < tuple.k(); ++l)
      if (same_up_to_sign(k, tuple[l])) return same_structure(k, tuple[l]);
    return canonical_sign(k) > 0;
  }
};

/// Membership oracles for the sets derived from a slice-open tuple. The plane
/// sets live in C^d; the descriptors answer for ambient points, checking both
/// representations (x, y, K) and (x, -y, -K) where the defining set is not
/// symmetric.
struct DerivedSets {
  Region u_c, u_c_star;
  std::function<bool(const Vec&, const Vec&)> u_r_star;
  SliceSetDescriptor u_delta, u_delta_plus, u_delta_star, u_delta_tilde;
  HalfCone half_cone;
  bool slice_solution = false;
};

namespace detail {

inline Aabb symmetrized_y(Aabb b) {
  Vec lo = b.y_lo.cwiseMin(-b.y_hi), hi = b.y_hi.cwiseMax(Vec(-b.y_lo));
  b.y_lo = lo;
  b.y_hi = hi;
  return b;
}

/// Component filter behind U_R^*: for d = 1 a flood fill of U_C^* at the
/// caller's grid resolution keeps the components meeting the real axis; for
/// d >= 2 we fall back to probing the straight segment down to (x, 0), an
/// approximation that is exact for sets star-shaped around their real trace.
inline std::function<bool(const Vec&, const Vec&)> real_component_filter(
    const Region& u_c_star, const GridSpec& grid) {
  if (u_c_star.d() == 1) {
    require(grid.y_lo < 0.0 && grid.y_hi > 0.0, ErrorCode::BadInput,
            "component grid must straddle the real axis");
    auto labels = std::make_shared<GridLabels>(flood_fill(
        [&](double x, double y) { return u_c_star.contains(x, y); }, grid));
    auto real_labels = std::make_shared<std::set<int>>();
    for (int i = 0; i < grid.nx; ++i) {
      int lab = labels->label_of(grid.x_at(i), 0.0);
      if (lab >= 0 && u_c_star.contains(grid.x_at(i), 0.0)) real_labels->insert(lab);
    }
    return [labels, real_labels, u_c_star](const Vec& x, const Vec& y) {
      if (!u_c_star.contains(x, y)) return false;
      int lab = labels->label_of(x[0], y[0]);
      return lab >= 0 && real_labels->count(lab) > 0;
    };
  }
  return [u_c_star](const Vec& x, const Vec& y) {
    if (!u_c_star.contains(x, y)) return false;
    const int steps = 32;
    for (int s = 0; s <= steps; ++s)
      if (!u_c_star.contains(x, Vec(y * (static_cast<double>(s) / steps)))) return false;
    return true;
  };
}

}  // namespace detail

/// Builds every derived set of the tuple. The grid only matters for the
/// connected-component filter of U_R^* (d = 1).
inline DerivedSets derived_sets(const SliceOpenTuple& u, const GridSpec& grid = GridSpec{}) {
  DerivedSets out;
  out.half_cone = HalfCone{u.tuple};
  SliceInverse si = slice_inverse(u.tuple);
  out.slice_solution = is_slice_solution(si);

  out.u_c = u.regions.front();
  for (std::size_t l = 1; l < u.regions.size(); ++l) out.u_c = out.u_c & u.regions[l];
  out.u_c_star = out.u_c & out.u_c.conjugated();
  out.u_r_star = detail::real_component_filter(out.u_c_star, grid);

  int d = u.d();
  ComplexStructure rep = u.tuple[0];
  Region u_c = out.u_c;
  Aabb sym_box = detail::symmetrized_y(u_c.bbox());

  auto delta_pred = [si, u_c](const ComplexStructure& i) {
    return [si, u_c, i](const Vec& x, const Vec& y) {
      if (kernel_membership(i, si) && u_c.contains(x, y)) return true;
      return kernel_membership(i.negated(), si) && u_c.contains(x, Vec(-y));
    };
  };
  HalfCone half = out.half_cone;
  auto plus_pred = [half, u_c](const ComplexStructure& i) {
    return [half, u_c, i](const Vec& x, const Vec& y) {
      if (half.contains(i) && u_c.contains(x, y)) return true;
      return half.contains(i.negated()) && u_c.contains(x, Vec(-y));
    };
  };
  auto star_fn = out.u_r_star;
  auto star_pred = [star_fn](const Vec& x, const Vec& y) {
    return star_fn(x, y) || star_fn(x, Vec(-y));
  };

  out.u_delta = SliceSetDescriptor{
      d,
      [delta_pred, sym_box](const ComplexStructure& i) {
        return Region::predicate(delta_pred(i), sym_box);
      },
      rep, false, {}};
  out.u_delta_plus = SliceSetDescriptor{
      d,
      [plus_pred, sym_box](const ComplexStructure& i) {
        return Region::predicate(plus_pred(i), sym_box);
      },
      rep, false, {}};
  out.u_delta_star = SliceSetDescriptor{
      d,
      [star_pred, sym_box](const ComplexStructure&) {
        return Region::predicate(star_pred, sym_box);
      },
      rep, true, {}};

  StructureTuple tuple = u.tuple;
  std::vector<Region> regions = u.regions;
  bool slice_solution = out.slice_solution;
  auto tilde_pred = [=](const ComplexStructure& i) {
    std::function<bool(const Vec&, const Vec&)> base =
        slice_solution ? std::function<bool(const Vec&, const Vec&)>(plus_pred(i))
                       : std::function<bool(const Vec&, const Vec&)>(delta_pred(i));
    return [=](const Vec& x, const Vec& y) {
      bool off_real = y.lpNorm<Eigen::Infinity>() > 0.0;
      for (int l = 0; l < tuple.k(); ++l) {
        if (!off_real) break;
        if (same_structure(i, tuple[l]) && regions[static_cast<std::size_t>(l)].contains(x, y))
          return true;
        if (same_structure(i, tuple[l].negated()) &&
            regions[static_cast<std::size_t>(l)].contains(x, Vec(-y)))
          return true;
      }
      if (base(x, y)) return true;
      return !slice_solution && star_pred(x, y);
    };
  };
  Aabb tilde_box = sym_box;
  for (const auto& r : u.regions) tilde_box = tilde_box.merged(detail::symmetrized_y(r.bbox()));
  out.u_delta_tilde = SliceSetDescriptor{
      d,
      [tilde_pred, tilde_box](const ComplexStructure& i) {
        return Region::predicate(tilde_pred(i), tilde_box);
      },
      rep, false, {}};
  return out;
}

/// The gluing formula (1, I) zeta^+(J) g(x + yJ): per-slice holomorphic data
/// stacked over the tuple, read back on the slice of I. Unlike represent(),
/// no kernel membership is enforced; the caller owns that guarantee.
inline Vec extension_lemma_g(const ComplexStructure& i, const SliceInverse& si,
                             const std::vector<Vec>& values) {
  int two_n = si.tuple.two_n(), k = si.tuple.k();
  require(static_cast<int>(values.size()) == k, ErrorCode::DimensionMismatch,
          "need one value per tuple entry");
  Vec stacked(static_cast<long>(two_n) * k);
  for (int l = 0; l < k; ++l) {
    require(values[static_cast<std::size_t>(l)].size() == two_n,
            ErrorCode::DimensionMismatch, "value length mismatch");
    stacked.segment(static_cast<long>(l) * two_n, two_n) = values[static_cast<std::size_t>(l)];
  }
  Vec a = si.zeta_plus * stacked;
  return a.head(two_n) + i.mat * a.tail(two_n);
}

struct ExtendResult {
  SliceFunction extension;
  DerivedSets sets;
  double input_cr_residual = 0.0;
  double real_trace_residual = 0.0;
};

/// Extends per-slice holomorphic data on the U_l to a slice regular function
/// on U_Delta-tilde. Case order: the tuple's own slices keep the input data;
/// kernel slices go through the stacked gluing formula; everything else uses
/// the mirror pair (J_1, -J_1), which reaches the whole cone.
inline ExtendResult extend(const SliceFunction& data, const SliceOpenTuple& u,
                           const GridSpec& grid = GridSpec{}, double cr_tol = 1e-6,
                           std::uint64_t seed = 20) {
  require(data.d() == u.d(), ErrorCode::DimensionMismatch,
          "data arity must match the regions");
  require(data.two_n() == u.two_n(), ErrorCode::DimensionMismatch,
          "data values must match the tuple's ambient dimension");

  ExtendResult out;
  out.sets = derived_sets(u, grid);
  SliceInverse si = slice_inverse(u.tuple);
  StructureTuple pair_tuple =
      make_structure_tuple({u.tuple[0], u.tuple[0].negated()});
  SliceInverse si_pair = slice_inverse(pair_tuple);

  // Input validation where the regions allow sampling: holomorphy of each
  // f|_{U_l} and agreement of the real traces.
  auto rng = make_rng(seed);
  for (int l = 0; l < u.k(); ++l) {
    const Region& r = u.regions[static_cast<std::size_t>(l)];
    if (!r.bbox().finite()) continue;
    auto samples = sample_region(r, rng, 6);
    double res = cr_residual(data, u.tuple[l], samples);
    out.input_cr_residual = std::max(out.input_cr_residual, res);
  }
  require(out.input_cr_residual <= cr_tol, ErrorCode::CheckFailed,
          "input data fails the holomorphy residual check");
  if (out.sets.u_c.bbox().finite()) {
    int found = 0;
    for (int t = 0; t < 400 && found < 12; ++t) {
      Aabb box = out.sets.u_c.bbox();
      Vec x(u.d());
      for (int c = 0; c < u.d(); ++c) x[c] = uniform(rng, box.x_lo[c], box.x_hi[c]);
      Vec zero = Vec::Zero(u.d());
      if (!out.sets.u_c.contains(x, zero)) continue;
      ++found;
      Vec ref = data.eval(make_point(x, zero, u.tuple[0]));
      for (int l = 1; l < u.k(); ++l) {
        Vec alt = data.eval(make_point(x, zero, u.tuple[l]));
        double scale = std::max(1.0, ref.norm());
        out.real_trace_residual =
            std::max(out.real_trace_residual, (alt - ref).norm() / scale);
      }
    }
  }

  StructureTuple tuple = u.tuple;
  HalfCone half = out.sets.half_cone;
  bool slice_solution = out.sets.slice_solution;
  SliceFunction inner = data;
  auto evaluator = [=](const ComplexStructure& i, const Vec& x, const Vec& y) -> Vec {
    if (y.lpNorm<Eigen::Infinity>() <= 1e-13)
      return inner.eval(make_point(x, Vec(Vec::Zero(y.size())), tuple[0]));
    for (int l = 0; l < tuple.k(); ++l) {
      if (same_structure(i, tuple[l])) return inner.eval(make_point(x, y, tuple[l]));
      if (same_structure(i, tuple[l].negated()))
        return inner.eval(make_point(x, Vec(-y), tuple[l]));
    }
    auto g_at = [&](const ComplexStructure& k, const Vec& ys) {
      std::vector<Vec> vals;
      vals.reserve(static_cast<std::size_t>(tuple.k()));
      for (int l = 0; l < tuple.k(); ++l)
        vals.push_back(inner.eval(make_point(x, ys, tuple[l])));
      return extension_lemma_g(k, si, vals);
    };
    if (slice_solution)
      return half.contains(i) ? g_at(i, y) : g_at(i.negated(), Vec(-y));
    if (kernel_membership(i, si)) return g_at(i, y);
    if (kernel_membership(i.negated(), si)) return g_at(i.negated(), Vec(-y));
    std::vector<Vec> pair_vals = {inner.eval(make_point(x, y, tuple[0])),
                                  inner.eval(make_point(x, Vec(-y), tuple[0]))};
    return extension_lemma_g(i, si_pair, pair_vals);
  };
  out.extension =
      SliceFunction::per_slice(u.d(), u.two_n(), evaluator, out.sets.u_delta_tilde);
  return out;
}

struct QuaternionicExtension {
  SliceSetDescriptor v_plus, v_delta, v_plus_delta;
  SliceFunction extension;
  double real_trace_residual = 0.0;
};

/// Two-slice extension for quaternionic data: holomorphic pieces on the upper
/// halves of two slice planes glue across the spheres x + y S whose two
/// defining coordinates both lie in the data regions. Passing an invalid
/// (default) u2 mirrors u1 onto the opposite orientation, which extends
/// single-disc data to its symmetrized completion.
inline QuaternionicExtension quaternionic_extension(const Region& u1_in,
                                                    const ComplexStructure& i1,
                                                    const Region& u2_in,
                                                    const ComplexStructure& i2_in,
                                                    const SliceFunction& data) {
  require(i1.dim() == 4 && data.two_n() == 4, ErrorCode::UnsupportedAlgebra,
          "two-slice extension is quaternionic");
  require(u1_in.valid() && u1_in.d() == 1 && data.d() == 1, ErrorCode::DimensionMismatch,
          "regions and data must be one-variable");
  Region u1 = u1_in, u2 = u2_in;
  ComplexStructure i2 = i2_in;
  SliceFunction inner = data;
  if (!u2.valid()) {
    // Mirror a single slice of data onto the opposite orientation: the point
    // x + y(-I1) is x - y I1, so the mirrored datum re-reads the original.
    u2 = u1.conjugated();
    i2 = i1.negated();
    SliceFunction base = data;
    ComplexStructure j1 = i1;
    inner = SliceFunction::per_slice(
        1, 4, [base, j1](const ComplexStructure& i, const Vec& x, const Vec& y) {
          if (same_structure(i, j1)) return base.eval(make_point(x, y, j1));
          return base.eval(make_point(x, Vec(-y), j1));
        });
  } else {
    require(!same_structure(i1, i2), ErrorCode::BadInput,
            "the two slices must be distinct");
    require(u2.d() == 1, ErrorCode::DimensionMismatch, "regions must be one-variable");
  }

  QuaternionicExtension out;
  auto upper_pred = [u1, u2, i1, i2](const ComplexStructure& i) {
    return [u1, u2, i1, i2, i](const Vec& x, const Vec& y) {
      if (y[0] == 0.0) return u1.contains(x, y) && u2.contains(x, y);
      if (same_structure(i, i1) && y[0] > 0.0 && u1.contains(x, y)) return true;
      if (same_structure(i, i1.negated()) && y[0] < 0.0 && u1.contains(x, Vec(-y)))
        return true;
      if (same_structure(i, i2) && y[0] > 0.0 && u2.contains(x, y)) return true;
      if (same_structure(i, i2.negated()) && y[0] < 0.0 && u2.contains(x, Vec(-y)))
        return true;
      return false;
    };
  };
  auto sphere_pred = [u1, u2](const Vec& x, const Vec& y) {
    Vec ya = y.cwiseAbs();
    return u1.contains(x, ya) && u2.contains(x, ya);
  };
  Aabb box = detail::symmetrized_y(u1.bbox().merged(u2.bbox()));
  out.v_plus = SliceSetDescriptor{
      1,
      [upper_pred, box](const ComplexStructure& i) {
        return Region::predicate(upper_pred(i), box);
      },
      i1, false, {}};
  out.v_delta = SliceSetDescriptor{
      1,
      [sphere_pred, box](const ComplexStructure&) {
        return Region::predicate(sphere_pred, box);
      },
      i1, true, {}};
  out.v_plus_delta = SliceSetDescriptor{
      1,
      [upper_pred, sphere_pred, box](const ComplexStructure& i) {
        auto up = upper_pred(i);
        return Region::predicate(
            [up, sphere_pred](const Vec& x, const Vec& y) {
              return up(x, y) || sphere_pred(x, y);
            },
            box);
      },
      i1, false, {}};

  if (u1.bbox().finite()) {
    auto rng = make_rng(21);
    Aabb b = u1.bbox();
    int found = 0;
    for (int t = 0; t < 400 && found < 12; ++t) {
      Vec x = Vec::Constant(1, uniform(rng, b.x_lo[0], b.x_hi[0]));
      Vec zero = Vec::Zero(1);
      if (!u1.contains(x, zero) || !u2.contains(x, zero)) continue;
      ++found;
      Vec a = inner.eval(make_point(x, zero, i1));
      Vec c = inner.eval(make_point(x, zero, i2));
      out.real_trace_residual = std::max(
          out.real_trace_residual, (a - c).norm() / std::max(1.0, a.norm()));
    }
  }

  auto evaluator = [=](const ComplexStructure& i, const Vec& x, const Vec& y) -> Vec {
    if (y[0] == 0.0) return inner.eval(make_point(x, y, i1));
    if (same_structure(i, i1) && y[0] > 0.0 && u1.contains(x, y))
      return inner.eval(make_point(x, y, i1));
    if (same_structure(i, i1.negated()) && y[0] < 0.0 && u1.contains(x, Vec(-y)))
      return inner.eval(make_point(x, Vec(-y), i1));
    if (same_structure(i, i2) && y[0] > 0.0 && u2.contains(x, y))
      return inner.eval(make_point(x, y, i2));
    if (same_structure(i, i2.negated()) && y[0] < 0.0 && u2.contains(x, Vec(-y)))
      return inner.eval(make_point(x, Vec(-y), i2));
    Vec ya = y.cwiseAbs();
    ComplexStructure k = y[0] >= 0.0 ? i : i.negated();
    StemValue stem = stem_from_two_slices(inner.eval(make_point(x, ya, i1)),
                                          inner.eval(make_point(x, ya, i2)), i1, i2);
    return eval_stem(stem, k);
  };
  out.extension = SliceFunction::per_slice(1, 4, evaluator, out.v_plus_delta);
  return out;
}

/// Membership oracle for the union of full polydiscs over kernel slices and
/// the two-sided lens over the whole cone.
struct HyperSigmaPolydisc {
  SlicePoint center;
  Vec radius;
  SliceInverse si;
  SliceSetDescriptor membership;

  bool contains(const SlicePoint& q) const {
    require(q.d() == center.d(), ErrorCode::DimensionMismatch, "point arity mismatch");
    bool lens = true, plus = true, minus = true;
    for (int l = 0; l < center.d(); ++l) {
      if (std::isinf(radius[l])) continue;
      std::complex<double> z{center.x[l], center.y[l]};
      std::complex<double> w{q.x[l], q.y[l]};
      double dp = std::abs(w - z), dm = std::abs(std::conj(w) - z);
      lens = lens && std::max(dp, dm) < radius[l];
      plus = plus && dp < radius[l];
      minus = minus && dm < radius[l];
    }
    if (lens) return true;
    if (q.is_real()) return plus;
    if (plus && kernel_membership(q.I, si)) return true;
    return minus && kernel_membership(q.I.negated(), si);
  }
};

inline HyperSigmaPolydisc hyper_sigma_polydisc(const SlicePoint& center, Vec radius,
                                               const StructureTuple& tuple,
                                               const std::vector<ComplexStructure>& cone_sample) {
  require(center.two_n() == tuple.two_n(), ErrorCode::DimensionMismatch,
          "center must live in the tuple's ambient space");
  require(center.d() == radius.size(), ErrorCode::DimensionMismatch,
          "radius arity must match the center");
  for (int l = 0; l < radius.size(); ++l)
    require(radius[l] > 0.0, ErrorCode::RadiusError, "radii must be positive");
  require(center.is_real() || same_structure(center.I, tuple[0]),
          ErrorCode::BadInput, "center must lie on the tuple's first slice");
  HyperSigmaPolydisc out{center, std::move(radius), slice_inverse(tuple), {}};
  require(is_hyper_solution(out.si, cone_sample), ErrorCode::BadInput,
          "tuple is not a hyper-solution (sampled test)");

  SlicePoint c = center;
  Vec r = out.radius;
  SliceInverse si = out.si;
  Aabb box;
  box.x_lo = c.x - r;
  box.x_hi = c.x + r;
  box.y_hi = Vec(c.y.cwiseAbs() + r);
  box.y_lo = -box.y_hi;
  out.membership = SliceSetDescriptor{
      c.d(),
      [c, r, si, box](const ComplexStructure& i) {
        HyperSigmaPolydisc probe{c, r, si, {}};
        return Region::predicate(
            [probe, i](const Vec& x, const Vec& y) {
              return probe.contains(make_point(x, y, i));
            },
            box);
      },
      c.is_real() ? si.tuple[0] : c.I, false, {}};
  return out;
}

/// The cut ray from i/2 at angle pi/4 + s pi/2 off the positive real axis,
/// parametrized over [0, 1).
inline std::complex<double> gamma_ray(double s, double t) {
  require(s >= 0.0 && s <= 1.0 && t >= 0.0 && t < 1.0, ErrorCode::BadInput,
          "ray parameters live in [0,1] x [0,1)");
  double theta = M_PI / 4 + s * M_PI / 2;
  return std::complex<double>(0.0, 0.5) +
         (t / (1.0 - t)) * std::polar(1.0, theta);
}

/// Three-part curve: i/2 down to s i/6, across to i - 1, then the upward ray
/// i/(1-t) - 2i - 1.
inline std::complex<double> gamma_segments(double s, double t) {
  require(s > 0.0 && s <= 1.0 && t >= 0.0 && t < 1.0, ErrorCode::BadInput,
          "curve parameters live in (0,1] x [0,1)");
  if (t <= 1.0 / 3)
    return std::complex<double>(0.0, (1.0 - (3.0 - s) * t) / 2.0);
  if (t <= 2.0 / 3)
    return 3.0 * (2.0 / 3 - t) * std::complex<double>(0.0, s / 6.0) +
           3.0 * (t - 1.0 / 3) * std::complex<double>(-1.0, 1.0);
  return std::complex<double>(0.0, 1.0) / (1.0 - t) + std::complex<double>(-1.0, -2.0);
}

namespace detail {

inline double ray_distance(std::complex<double> w, double s) {
  std::complex<double> a{0.0, 0.5};
  double theta = M_PI / 4 + s * M_PI / 2;
  std::complex<double> rel = (w - a) * std::polar(1.0, -theta);
  if (rel.real() <= 0.0) return std::abs(w - a);
  return std::abs(rel.imag());
}

}  // namespace detail

/// Branch of sqrt(2z - J) on the slice plane, cut along the ray of angle
/// pi/4 + s pi/2 from the branch point i/2 (and its mirror), seeded positive
/// on J/2 + R_+.
inline std::complex<double> branch_sqrt(std::complex<double> w, double s) {
  double cut = std::min(detail::ray_distance(w, s), detail::ray_distance(std::conj(w), s));
  require(cut > 1e-9, ErrorCode::BranchCut, "point sits on the branch cut");
  std::complex<double> zeta = 2.0 * w - std::complex<double>(0.0, 1.0);
  double theta_cut = M_PI / 4 + s * M_PI / 2;
  double a = std::arg(zeta);
  if (a >= theta_cut) a -= 2.0 * M_PI;
  return std::polar(std::sqrt(std::abs(zeta)), a / 2.0);
}

/// Slice regular extension of sqrt(2z - J): the two-orientation blend
/// (1 - IJ)/2 psi(x + yJ) + (1 + IJ)/2 psi(x - yJ) on the slice of I.
inline Vec branch_psi(double s, const ComplexStructure& j, const ComplexStructure& i,
                      double x, double y) {
  require(j.dim() == 4 && i.dim() == 4, ErrorCode::UnsupportedAlgebra,
          "branch extension is quaternionic");
  ComplexStructure k = i;
  if (y < 0.0) {
    k = i.negated();
    y = -y;
  }
  std::complex<double> w{x, y};
  std::complex<double> up = branch_sqrt(w, s), down = branch_sqrt(std::conj(w), s);
  Vec e0 = Vec::Unit(4, 0);
  Vec v_up = up.real() * e0 + up.imag() * (j.mat * e0);
  Vec v_down = down.real() * e0 + down.imag() * (j.mat * e0);
  Mat id = Mat::Identity(4, 4);
  return 0.5 * ((id - k.mat * j.mat) * v_up + (id + k.mat * j.mat) * v_down);
}

struct LacunaryResult {
  Vec value;
  double tail = 0.0;
  double ratio = 0.0;
  int terms = 0;
};

/// Truncation of the boundary-blocking series [sum_l sum_j ((q_l - p_l)/r_l)^{2^j}] a2
/// on the slice of the center. The gap structure gives the geometric tail
/// bound d rho^{2^{N+1}} / (1 - rho).
inline LacunaryResult lacunary_boundary_function(const SlicePoint& p, const Vec& r,
                                                 const Vec& a2, const SlicePoint& q,
                                                 int truncation) {
  require(p.d() == q.d() && r.size() == p.d(), ErrorCode::DimensionMismatch,
          "center, radius and point must share arity");
  require(a2.size() == p.two_n(), ErrorCode::DimensionMismatch, "vector length mismatch");
  require(truncation >= 0, ErrorCode::BadInput, "truncation must be nonnegative");
  bool mirrored = !q.is_real() && !p.is_real() && !same_structure(q.I, p.I);
  if (mirrored)
    require(same_up_to_sign(q.I, p.I), ErrorCode::DomainViolation,
            "evaluation point must lie on the center's slice");

  std::complex<double> total = 0.0;
  double rho = 0.0;
  for (int l = 0; l < p.d(); ++l) {
    std::complex<double> z{p.x[l], p.y[l]};
    std::complex<double> w{q.x[l], mirrored ? -q.y[l] : q.y[l]};
    std::complex<double> ul = (w - z) / r[l];
    rho = std::max(rho, std::abs(ul));
    for (int j = 0; j <= truncation; ++j) total += ipow(ul, 1 << j);
  }
  require(rho < 1.0, ErrorCode::ConvergenceDomain,
          "the lacunary series diverges at ratio >= 1");

  LacunaryResult out;
  const ComplexStructure& rep = p.is_real() ? q.I : p.I;
  out.value = total.real() * a2 + total.imag() * (rep.mat * a2);
  out.ratio = rho;
  out.terms = (truncation + 1) * p.d();
  double gap = std::pow(rho, static_cast<double>(1L << (truncation + 1)));
  out.tail = p.d() * gap / (1.0 - rho) * a2.norm();
  return out;
}

/// Star-power variant: sum_n (q - center)^{*2^n} a, valid off the center
/// slice; the tail inflates the same gap bound by the slice factor.
inline LacunaryResult lacunary_star_sum(const SlicePoint& q, const SlicePoint& center,
                                        int truncation, const Vec& a) {
  require(q.d() == center.d() && q.two_n() == center.two_n(),
          ErrorCode::DimensionMismatch, "points must share shape");
  require(a.size() == q.two_n(), ErrorCode::DimensionMismatch, "vector length mismatch");
  require(q.d() == 1, ErrorCode::DimensionMismatch,
          "the star-power series is one-variable");
  require(truncation >= 0, ErrorCode::BadInput, "truncation must be nonnegative");

  PolydiscSpec unit{center, Vec::Constant(1, 1.0), true};
  double rho = sigma_polydisc_ratio(unit, q);
  require(rho < 1.0, ErrorCode::ConvergenceDomain,
          "the lacunary series diverges at ratio >= 1");

  LacunaryResult out;
  out.value = Vec::Zero(q.two_n());
  for (int n = 0; n <= truncation; ++n)
    out.value += star_power(q, center, MultiIndex({1 << n})) * a;
  out.ratio = rho;
  out.terms = truncation + 1;
  double factor = operator_norm(q.I.mat) * operator_norm(center.I.mat) + 1.0;
  double gap = std::pow(rho, static_cast<double>(1L << (truncation + 1)));
  out.tail = factor * gap / (1.0 - rho) * a.norm();
  return out;
}

}  // namespace slicecalc
