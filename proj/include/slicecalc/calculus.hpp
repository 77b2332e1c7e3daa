#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "slicecalc/algebra.hpp"
#include "slicecalc/multiindex.hpp"
#include "slicecalc/paths.hpp"

namespace slicecalc {

inline double operator_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

namespace detail {

using PlaneFn = std::function<Vec(const Vec&, const Vec&)>;

inline void check_plane_margin(const SliceFunction& f, const ComplexStructure& I,
                               const Vec& x, const Vec& y, int l, double h, bool with_y) {
  if (!f.domain()) return;
  auto ok = [&](double dx, double dy) {
    Vec xs = x, ys = y;
    xs[l] += dx;
    ys[l] += dy;
    return f.domain()->contains(make_point(xs, ys, I));
  };
  bool inside = ok(0, 0) && ok(h, 0) && ok(-h, 0) && ok(2 * h, 0) && ok(-2 * h, 0);
  if (with_y) inside = inside && ok(0, h) && ok(0, -h) && ok(0, 2 * h) && ok(0, -2 * h);
  require(inside, ErrorCode::StepSizeError,
          "differentiation stencil exceeds the domain margin");
}

/// Central difference with one Richardson step: (4 D(h/2) - D(h)) / 3.
inline Vec central_derivative(const PlaneFn& g, const Vec& x, const Vec& y, int l,
                              bool along_y, double h) {
  auto probe = [&](double step) {
    Vec xp = x, xm = x, yp = y, ym = y;
    if (along_y) {
      yp[l] += step;
      ym[l] -= step;
    } else {
      xp[l] += step;
      xm[l] -= step;
    }
    return Vec(((g(xp, yp) - g(xm, ym)) / (2 * step)).eval());
  };
  Vec coarse = probe(h), fine = probe(h / 2);
  return (4.0 * fine - coarse) / 3.0;
}

inline double derivative_step(const Vec& x, const Vec& y, double h) {
  if (h > 0) return h;
  double scale = std::max({1.0, x.lpNorm<Eigen::Infinity>(), y.lpNorm<Eigen::Infinity>()});
  return kDerivativeStep * scale;
}

}  // namespace detail

/// The complex slice derivative 1/2 (d/dx_l - I d/dy_l) of the restriction
/// to the slice of I, by Richardson-extrapolated central differences.
inline Vec islice_derivative(const SliceFunction& f, const ComplexStructure& I, int l,
                             const Vec& x, const Vec& y, double h = 0.0) {
  require(l >= 0 && l < f.d(), ErrorCode::DimensionMismatch, "coordinate index out of range");
  double step = detail::derivative_step(x, y, h);
  detail::check_plane_margin(f, I, x, y, l, step, true);
  detail::PlaneFn g = [&](const Vec& xs, const Vec& ys) {
    return f.eval(make_point(xs, ys, I));
  };
  Vec dx = detail::central_derivative(g, x, y, l, false, step);
  Vec dy = detail::central_derivative(g, x, y, l, true, step);
  return 0.5 * (dx - I.mat * dy);
}

/// The real slice derivative d/dx_l at fixed imaginary part.
inline Vec slice_derivative(const SliceFunction& f, int l, const SlicePoint& p,
                            double h = 0.0) {
  require(l >= 0 && l < f.d(), ErrorCode::DimensionMismatch, "coordinate index out of range");
  double step = detail::derivative_step(p.x, p.y, h);
  detail::check_plane_margin(f, p.I, p.x, p.y, l, step, false);
  detail::PlaneFn g = [&](const Vec& xs, const Vec& ys) {
    return f.eval(make_point(xs, ys, p.I));
  };
  return detail::central_derivative(g, p.x, p.y, l, false, step);
}

namespace detail {

inline Vec iterate_plane_derivative(const PlaneFn& g, const ComplexStructure& I,
                                    const MultiIndex& alpha, const Vec& x, const Vec& y,
                                    double h, bool complex_form) {
  int l = -1;
  for (int c = 0; c < alpha.d(); ++c)
    if (alpha[c] > 0) {
      l = c;
      break;
    }
  if (l < 0) return g(x, y);
  std::vector<int> rest = alpha.idx;
  rest[static_cast<std::size_t>(l)] -= 1;
  MultiIndex reduced(rest);
  PlaneFn inner = [&](const Vec& xs, const Vec& ys) {
    return iterate_plane_derivative(g, I, reduced, xs, ys, h, complex_form);
  };
  if (!complex_form) return central_derivative(inner, x, y, l, false, h);
  Vec dx = central_derivative(inner, x, y, l, false, h);
  Vec dy = central_derivative(inner, x, y, l, true, h);
  return 0.5 * (dx - I.mat * dy);
}

}  // namespace detail

/// Iterated complex slice derivative of order alpha (outermost first). The
/// default step keeps polynomial data exact through degree four (Richardson
/// kills the h^2 term) while staying wide enough to damp subtractive noise.
inline Vec islice_derivative_iterated(const SliceFunction& f, const ComplexStructure& I,
                                      const MultiIndex& alpha, const Vec& x, const Vec& y,
                                      double h = 0.03) {
  detail::PlaneFn g = [&](const Vec& xs, const Vec& ys) {
    return f.eval(make_point(xs, ys, I));
  };
  return detail::iterate_plane_derivative(g, I, alpha, x, y, h, true);
}

/// Iterated real slice derivative along the x coordinates.
inline Vec slice_derivative_iterated(const SliceFunction& f, const ComplexStructure& I,
                                     const MultiIndex& alpha, const Vec& x, const Vec& y,
                                     double h = 0.03) {
  detail::PlaneFn g = [&](const Vec& xs, const Vec& ys) {
    return f.eval(make_point(xs, ys, I));
  };
  return detail::iterate_plane_derivative(g, I, alpha, x, y, h, false);
}

/// Operator realization of (q - p)^{*alpha}: sum over beta <= alpha of
/// (alpha choose beta) L_q^beta L_{-p}^{alpha - beta}, with q's factors kept
/// left. On a common slice this collapses to the classical power of the
/// difference.
inline Mat star_power(const SlicePoint& q, const SlicePoint& p, const MultiIndex& alpha) {
  require(q.d() == p.d() && q.two_n() == p.two_n(), ErrorCode::DimensionMismatch,
          "points must share shape");
  require(alpha.d() == q.d(), ErrorCode::DimensionMismatch, "index arity mismatch");
  int two_n = q.two_n();
  Mat id = Mat::Identity(two_n, two_n);

  // Precompute per-coordinate powers of L_{q_l} and L_{-p_l}.
  auto powers = [&](const SlicePoint& pt, double sign, int l, int top) {
    Mat base = sign * pt.x[l] * id + sign * pt.y[l] * pt.I.mat;
    std::vector<Mat> out(static_cast<std::size_t>(top) + 1);
    out[0] = id;
    for (int e = 1; e <= top; ++e) out[static_cast<std::size_t>(e)] = out[e - 1] * base;
    return out;
  };
  std::vector<std::vector<Mat>> qp(static_cast<std::size_t>(q.d()));
  std::vector<std::vector<Mat>> pp(static_cast<std::size_t>(q.d()));
  for (int l = 0; l < q.d(); ++l) {
    qp[static_cast<std::size_t>(l)] = powers(q, 1.0, l, alpha[l]);
    pp[static_cast<std::size_t>(l)] = powers(p, -1.0, l, alpha[l]);
  }

  Mat acc = Mat::Zero(two_n, two_n);
  std::vector<int> beta(static_cast<std::size_t>(q.d()), 0);
  auto rec = [&](auto&& self, int l) -> void {
    if (l == q.d()) {
      Mat term = id;
      for (int c = 0; c < q.d(); ++c)
        term = term * qp[static_cast<std::size_t>(c)][static_cast<std::size_t>(beta[c])];
      for (int c = 0; c < q.d(); ++c)
        term = term *
               pp[static_cast<std::size_t>(c)][static_cast<std::size_t>(alpha[c] - beta[c])];
      acc += binomial(alpha, MultiIndex(beta)) * term;
      return;
    }
    for (int b = 0; b <= alpha[l]; ++b) {
      beta[static_cast<std::size_t>(l)] = b;
      self(self, l + 1);
    }
  };
  rec(rec, 0);
  return acc;
}

/// Right-hand side of the slice bound: (|J| |I| + 1) times the larger of the
/// two same-slice evaluations at x0 +- y0 I.
inline double star_power_bound(const SlicePoint& q, const SlicePoint& p,
                               const MultiIndex& alpha, const Vec& a) {
  double nj = operator_norm(q.I.mat), ni = operator_norm(p.I.mat);
  SlicePoint plus = make_point(q.x, q.y, p.I);
  SlicePoint minus = make_point(q.x, Vec(-q.y), p.I);
  double m = std::max((star_power(plus, p, alpha) * a).norm(),
                      (star_power(minus, p, alpha) * a).norm());
  return (nj * ni + 1.0) * m;
}

/// Polydisc around a slice point; sigma_variant selects the slice-symmetric
/// set that tests both w and conj(w) against the center's plane coordinates.
/// Radii may be +inf (unconstrained coordinate).
struct PolydiscSpec {
  SlicePoint center;
  Vec radius;
  bool sigma_variant = true;
};

inline PolydiscSpec make_polydisc(SlicePoint center, Vec radius, bool sigma_variant = true) {
  require(center.d() == radius.size(), ErrorCode::DimensionMismatch,
          "radius arity must match the center");
  for (int l = 0; l < radius.size(); ++l)
    require(radius[l] > 0.0, ErrorCode::RadiusError, "radii must be positive");
  return PolydiscSpec{std::move(center), std::move(radius), sigma_variant};
}

/// Componentwise ratio of q to the polydisc boundary in the sigma sense:
/// max(|w - z|, |conj(w) - z|) / r per coordinate; membership is ratio < 1.
inline double sigma_polydisc_ratio(const PolydiscSpec& spec, const SlicePoint& q) {
  require(q.d() == spec.center.d(), ErrorCode::DimensionMismatch, "point arity mismatch");
  double worst = 0.0;
  for (int l = 0; l < q.d(); ++l) {
    if (std::isinf(spec.radius[l])) continue;
    std::complex<double> z{spec.center.x[l], spec.center.y[l]};
    std::complex<double> w{q.x[l], q.y[l]};
    double m = std::max(std::abs(w - z), std::abs(std::conj(w) - z));
    worst = std::max(worst, m / spec.radius[l]);
  }
  return worst;
}

inline bool sigma_polydisc_contains(const PolydiscSpec& spec, const SlicePoint& q) {
  if (spec.sigma_variant) return sigma_polydisc_ratio(spec, q) < 1.0;
  // Plain polydisc: membership requires the center's slice (or a real point)
  // and the oriented coordinates inside each disc.
  bool on_slice = q.is_real() || spec.center.is_real() ||
                  same_up_to_sign(q.I, spec.center.I);
  if (!on_slice) return false;
  bool flipped = !q.is_real() && !spec.center.is_real() &&
                 !same_structure(q.I, spec.center.I);
  for (int l = 0; l < q.d(); ++l) {
    if (std::isinf(spec.radius[l])) continue;
    std::complex<double> z{spec.center.x[l], spec.center.y[l]};
    std::complex<double> w{q.x[l], flipped ? -q.y[l] : q.y[l]};
    if (std::abs(w - z) >= spec.radius[l]) return false;
  }
  return true;
}

/// Truncated expansion around a slice point. Coefficients hold
/// f^(alpha)(q0) / alpha!; radius and sup_bound carry the quadrature data
/// that the tail estimate reuses.
struct TaylorSeries {
  SlicePoint center;
  std::map<MultiIndex, Vec> coefficients;
  int max_order = 0;
  Vec radius;
  double sup_bound = 0.0;
};

/// Coefficients via tensor trapezoid quadrature of the Cauchy integral on
/// circles of the given radii inside the center's slice. The trapezoid rule
/// on a full circle is spectrally accurate for holomorphic integrands.
inline TaylorSeries taylor_coefficients(const SliceFunction& f, const SlicePoint& q0,
                                        int max_order, const Vec& radius,
                                        int nodes = kQuadratureNodes) {
  int d = f.d(), two_n = f.two_n();
  require(q0.d() == d, ErrorCode::DimensionMismatch, "center arity mismatch");
  require(radius.size() == d, ErrorCode::DimensionMismatch, "radius arity mismatch");
  require((radius.array() > 0.0).all() && radius.allFinite(), ErrorCode::RadiusError,
          "quadrature radii must be positive and finite");
  require(max_order >= 0, ErrorCode::BadInput, "order must be nonnegative");
  double total = std::pow(static_cast<double>(nodes), d);
  require(total <= 1e7, ErrorCode::BadInput, "quadrature grid too large");

  const ComplexStructure& I0 = q0.I;
  long count = static_cast<long>(total);
  Mat values(two_n, count);
  std::vector<double> theta(static_cast<std::size_t>(nodes));
  for (int m = 0; m < nodes; ++m)
    theta[static_cast<std::size_t>(m)] = 2.0 * M_PI * m / nodes;

  std::vector<int> digits(static_cast<std::size_t>(d), 0);
  double sup = 0.0;
  for (long idx = 0; idx < count; ++idx) {
    long rem = idx;
    Vec x(d), y(d);
    for (int l = 0; l < d; ++l) {
      digits[static_cast<std::size_t>(l)] = static_cast<int>(rem % nodes);
      rem /= nodes;
      double th = theta[static_cast<std::size_t>(digits[static_cast<std::size_t>(l)])];
      x[l] = q0.x[l] + radius[l] * std::cos(th);
      y[l] = q0.y[l] + radius[l] * std::sin(th);
    }
    SlicePoint node = make_point(x, y, I0);
    if (f.domain() && !f.domain()->contains(node))
      fail(ErrorCode::RadiusError, "quadrature circle leaves the function domain");
    Vec v = f.eval(node);
    sup = std::max(sup, v.norm());
    values.col(idx) = v;
  }

  TaylorSeries series;
  series.center = q0;
  series.max_order = max_order;
  series.radius = radius;
  series.sup_bound = sup;

  for (const auto& alpha : multi_indices_up_to(d, max_order)) {
    Vec acc = Vec::Zero(two_n);
    for (long idx = 0; idx < count; ++idx) {
      long rem = idx;
      double phase = 0.0;
      for (int l = 0; l < d; ++l) {
        int m = static_cast<int>(rem % nodes);
        rem /= nodes;
        phase += alpha[l] * theta[static_cast<std::size_t>(m)];
      }
      // Multiply the node value by e^{-i phase} through the center slice.
      acc += std::cos(phase) * values.col(idx) -
             std::sin(phase) * (I0.mat * values.col(idx));
    }
    acc /= total;
    for (int l = 0; l < d; ++l) acc /= std::pow(radius[l], alpha[l]);
    series.coefficients[alpha] = acc;
  }
  return series;
}

struct TaylorEvalResult {
  Vec value;
  double tail_estimate = 0.0;
  double ratio = 0.0;
};

/// Evaluates the truncated star-power expansion at q, in the deterministic
/// (|alpha|, lex) term order, with the geometric tail bound inflated by the
/// slice factor |J||I0| + 1. Evaluation requires q strictly inside the
/// sigma-polydisc of the quadrature radii.
inline TaylorEvalResult taylor_eval(const TaylorSeries& series, const SlicePoint& q) {
  int two_n = series.center.two_n();
  PolydiscSpec domain{series.center, series.radius, true};
  double rho = sigma_polydisc_ratio(domain, q);
  require(rho < 1.0, ErrorCode::ConvergenceDomain,
          "point lies outside the series' sigma-polydisc");

  TaylorEvalResult out;
  out.ratio = rho;
  out.value = Vec::Zero(two_n);
  for (const auto& [alpha, coeff] : series.coefficients)
    out.value += star_power(q, series.center, alpha) * coeff;

  // Per-coordinate ratios drive the multivariate geometric remainder.
  int d = series.center.d();
  Vec rho_l(d);
  for (int l = 0; l < d; ++l) {
    std::complex<double> z{series.center.x[l], series.center.y[l]};
    std::complex<double> w{q.x[l], q.y[l]};
    rho_l[l] = std::max(std::abs(w - z), std::abs(std::conj(w) - z)) / series.radius[l];
  }
  double full = 1.0;
  for (int l = 0; l < d; ++l) full /= (1.0 - rho_l[l]);
  double partial = 0.0;
  for (const auto& [alpha, coeff] : series.coefficients) {
    double term = 1.0;
    for (int l = 0; l < d; ++l) term *= std::pow(rho_l[l], alpha[l]);
    partial += term;
  }
  double factor = operator_norm(q.I.mat) * operator_norm(series.center.I.mat) + 1.0;
  out.tail_estimate = series.sup_bound * factor * std::max(0.0, full - partial);
  return out;
}

}  // namespace slicecalc
