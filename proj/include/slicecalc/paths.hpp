#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "slicecalc/algebra.hpp"
#include "slicecalc/multiindex.hpp"
#include "slicecalc/topology.hpp"

namespace slicecalc {

/// Piecewise-linear path in C^d starting at a real point; columns of re/im
/// are the samples, t the matching parameter grid running from 0 to 1.
struct PlanePath {
  Vec t;
  Mat re, im;  // d x m
  bool positive_interior = false;  // every sample past t=0 has all im > 0

  int d() const { return static_cast<int>(re.rows()); }
  int size() const { return static_cast<int>(re.cols()); }

  std::pair<Vec, Vec> at(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    int m = size();
    int hi = 1;
    while (hi < m - 1 && t[hi] < s) ++hi;
    double w = (s - t[hi - 1]) / (t[hi] - t[hi - 1]);
    w = std::clamp(w, 0.0, 1.0);
    return {re.col(hi - 1) * (1 - w) + re.col(hi) * w,
            im.col(hi - 1) * (1 - w) + im.col(hi) * w};
  }
};

inline PlanePath make_path(Vec t, Mat re, Mat im) {
  require(re.rows() == im.rows() && re.cols() == im.cols(), ErrorCode::InvalidPath,
          "re and im sample blocks must agree in shape");
  require(t.size() == re.cols() && t.size() >= 2, ErrorCode::InvalidPath,
          "parameter grid must match the samples and hold both endpoints");
  require(std::abs(t[0]) <= 1e-12 && std::abs(t[t.size() - 1] - 1.0) <= 1e-12,
          ErrorCode::InvalidPath, "parameter grid must run from 0 to 1");
  for (int i = 1; i < t.size(); ++i)
    require(t[i] > t[i - 1], ErrorCode::InvalidPath, "parameter grid must increase strictly");
  require(im.col(0).lpNorm<Eigen::Infinity>() <= 1e-12, ErrorCode::InvalidPath,
          "paths must start at a real point");
  PlanePath p{std::move(t), std::move(re), std::move(im), false};
  p.positive_interior = true;
  for (int c = 1; c < p.size(); ++c)
    if (!(p.im.col(c).array() > 0.0).all()) p.positive_interior = false;
  return p;
}

/// Straight path from a real start to the target, sampled uniformly.
inline PlanePath segment_path(const Vec& start_re, const Vec& end_re, const Vec& end_im,
                              int samples = 17) {
  int d = static_cast<int>(start_re.size());
  Vec t(samples);
  Mat re(d, samples), im(d, samples);
  for (int c = 0; c < samples; ++c) {
    double s = static_cast<double>(c) / (samples - 1);
    t[c] = s;
    re.col(c) = (1 - s) * start_re + s * end_re;
    im.col(c) = s * end_im;
  }
  return make_path(std::move(t), std::move(re), std::move(im));
}

struct LiftedPath {
  Vec t;
  std::vector<SlicePoint> points;
};

inline LiftedPath lift_path(const PlanePath& path, const ComplexStructure& I) {
  LiftedPath out;
  out.t = path.t;
  out.points.reserve(path.size());
  for (int c = 0; c < path.size(); ++c)
    out.points.push_back(make_point(path.re.col(c), path.im.col(c), I));
  return out;
}

inline PlanePath unlift_path(const LiftedPath& lifted) {
  int m = static_cast<int>(lifted.points.size());
  require(m >= 2, ErrorCode::InvalidPath, "lifted path too short");
  int d = lifted.points.front().d();
  Mat re(d, m), im(d, m);
  for (int c = 0; c < m; ++c) {
    re.col(c) = lifted.points[c].x;
    im.col(c) = lifted.points[c].y;
  }
  return make_path(lifted.t, std::move(re), std::move(im));
}

/// Candidates whose lifted path stays inside the descriptor; membership is
/// sampled at the path points and the segment midpoints.
inline std::vector<ComplexStructure> structures_containing(
    const SliceSetDescriptor& desc, const PlanePath& path,
    const std::vector<ComplexStructure>& candidates) {
  std::vector<ComplexStructure> kept;
  for (const auto& I : candidates) {
    bool inside = true;
    for (int c = 0; c < path.size() && inside; ++c) {
      if (!desc.contains(make_point(path.re.col(c), path.im.col(c), I))) inside = false;
      if (inside && c + 1 < path.size()) {
        Vec mx = 0.5 * (path.re.col(c) + path.re.col(c + 1));
        Vec my = 0.5 * (path.im.col(c) + path.im.col(c + 1));
        if (!desc.contains(make_point(mx, my, I))) inside = false;
      }
    }
    if (inside) kept.push_back(I);
  }
  return kept;
}

/// Value pair (F1, F2) of a stem; the function value on the slice of I is
/// F1 + I F2.
struct StemValue {
  Vec F1, F2;
};

inline Vec eval_stem(const StemValue& f, const ComplexStructure& I) {
  return f.F1 + I.mat * f.F2;
}

/// Holomorphic data on a slice set, in one of three representations: a
/// polynomial with right coefficients (through its stem), a per-slice
/// callable, or tabulated grid values per slice (d = 1).
class SliceFunction {
 public:
  enum class Kind { StemPolynomial, PerSliceCallable, Tabulated };
  using Coefficients = std::map<MultiIndex, Vec>;
  using Callable = std::function<Vec(const ComplexStructure&, const Vec&, const Vec&)>;

  static SliceFunction stem_polynomial(int d, int two_n, Coefficients coeffs,
                                       std::optional<SliceSetDescriptor> domain = {}) {
    SliceFunction f;
    f.kind_ = Kind::StemPolynomial;
    f.d_ = d;
    f.two_n_ = two_n;
    f.coeffs_ = std::move(coeffs);
    f.domain_ = std::move(domain);
    for (const auto& [alpha, a] : f.coeffs_) {
      require(alpha.d() == d, ErrorCode::DimensionMismatch, "coefficient index arity");
      require(a.size() == two_n, ErrorCode::DimensionMismatch, "coefficient length");
    }
    return f;
  }

  static SliceFunction per_slice(int d, int two_n, Callable fn,
                                 std::optional<SliceSetDescriptor> domain = {}) {
    SliceFunction f;
    f.kind_ = Kind::PerSliceCallable;
    f.d_ = d;
    f.two_n_ = two_n;
    f.fn_ = std::move(fn);
    f.domain_ = std::move(domain);
    return f;
  }

  /// values[s] holds one column per grid cell (row-major in (i, j)).
  static SliceFunction tabulated(std::vector<ComplexStructure> slices, GridSpec grid,
                                 std::vector<Mat> values,
                                 std::optional<SliceSetDescriptor> domain = {}) {
    require(!slices.empty() && slices.size() == values.size(), ErrorCode::BadInput,
            "tabulated data needs matching slices and value blocks");
    SliceFunction f;
    f.kind_ = Kind::Tabulated;
    f.d_ = 1;
    f.two_n_ = slices.front().dim();
    for (const auto& block : values)
      require(block.rows() == f.two_n_ &&
                  block.cols() == static_cast<long>(grid.nx) * grid.ny,
              ErrorCode::BadInput, "tabulated block shape mismatch");
    f.slices_ = std::move(slices);
    f.grid_ = grid;
    f.values_ = std::move(values);
    f.domain_ = std::move(domain);
    return f;
  }

  Kind kind() const { return kind_; }
  int d() const { return d_; }
  int two_n() const { return two_n_; }
  const std::optional<SliceSetDescriptor>& domain() const { return domain_; }
  const Coefficients& coefficients() const { return coeffs_; }

  /// Stem of polynomial data at a plane point: F(z) = sum_alpha z^alpha a_alpha
  /// split into real and imaginary parts.
  StemValue stem_at(const Vec& x, const Vec& y) const {
    require(kind_ == Kind::StemPolynomial, ErrorCode::BadInput,
            "stem evaluation needs stem-polynomial data");
    StemValue out{Vec::Zero(two_n_), Vec::Zero(two_n_)};
    for (const auto& [alpha, a] : coeffs_) {
      auto z = monomial(x, y, alpha);
      out.F1 += z.real() * a;
      out.F2 += z.imag() * a;
    }
    return out;
  }

  Vec eval(const SlicePoint& p) const {
    require(p.d() == d_ && p.two_n() == two_n_, ErrorCode::DimensionMismatch,
            "evaluation point shape mismatch");
    if (domain_)
      require(domain_->contains(p), ErrorCode::DomainViolation,
              "point lies outside the function domain");
    switch (kind_) {
      case Kind::StemPolynomial: return eval_stem(stem_at(p.x, p.y), p.I);
      case Kind::PerSliceCallable: return fn_(p.I, p.x, p.y);
      case Kind::Tabulated: return eval_tabulated(p);
    }
    fail(ErrorCode::BadInput, "unreachable");
  }

 private:
  Vec eval_tabulated(const SlicePoint& p) const {
    for (std::size_t s = 0; s < slices_.size(); ++s) {
      if (!same_up_to_sign(p.I, slices_[s])) continue;
      bool flip = !p.is_real() && !same_structure(p.I, slices_[s]);
      double x = p.x[0], y = flip ? -p.y[0] : p.y[0];
      return bilinear(values_[s], x, y);
    }
    fail(ErrorCode::DomainViolation, "point slice is not tabulated");
  }

  Vec bilinear(const Mat& block, double x, double y) const {
    const GridSpec& g = grid_;
    require(g.inside(x, y), ErrorCode::DomainViolation, "point outside tabulated window");
    double fx = (x - g.x_at(0)) / (g.x_at(1) - g.x_at(0));
    double fy = (y - g.y_at(0)) / (g.y_at(1) - g.y_at(0));
    int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
    double u = std::clamp(fx - i0, 0.0, 1.0), v = std::clamp(fy - j0, 0.0, 1.0);
    auto cell = [&](int i, int j) { return block.col(static_cast<long>(j) * g.nx + i); };
    return (1 - u) * (1 - v) * cell(i0, j0) + u * (1 - v) * cell(i0 + 1, j0) +
           (1 - u) * v * cell(i0, j0 + 1) + u * v * cell(i0 + 1, j0 + 1);
  }

  Kind kind_ = Kind::PerSliceCallable;
  int d_ = 1, two_n_ = 4;
  Coefficients coeffs_;
  Callable fn_;
  std::vector<ComplexStructure> slices_;
  GridSpec grid_;
  std::vector<Mat> values_;
  std::optional<SliceSetDescriptor> domain_;
};

/// Relative residual of (d/dx_l + I d/dy_l) f at the sample points by central
/// differences; holomorphic slice data stays below about 1e-6.
inline double cr_residual(const SliceFunction& f, const ComplexStructure& I,
                          const std::vector<std::pair<Vec, Vec>>& samples,
                          double h = 1e-5) {
  double worst = 0.0, scale = 1.0;
  for (const auto& [x, y] : samples) {
    for (int l = 0; l < f.d(); ++l) {
      Vec xp = x, xm = x, yp = y, ym = y;
      xp[l] += h;
      xm[l] -= h;
      yp[l] += h;
      ym[l] -= h;
      Vec dfdx = (f.eval(make_point(xp, y, I)) - f.eval(make_point(xm, y, I))) / (2 * h);
      Vec dfdy = (f.eval(make_point(x, yp, I)) - f.eval(make_point(x, ym, I))) / (2 * h);
      worst = std::max(worst, (dfdx + I.mat * dfdy).norm());
      scale = std::max(scale, f.eval(make_point(x, y, I)).norm());
    }
  }
  return worst / scale;
}

/// Recovers the stem along a path from values on two slices by inverting
/// (1 L_J; 1 L_K): F1 = (J-K)^{-1}(J fJ - K fK), F2 = (J-K)^{-1}(fJ - fK).
inline StemValue stem_from_two_slices(const Vec& fJ, const Vec& fK,
                                      const ComplexStructure& J, const ComplexStructure& K) {
  require(fJ.size() == fK.size() && fJ.size() == J.dim(), ErrorCode::DimensionMismatch,
          "value length must match the structures");
  Mat s = J.mat - K.mat;
  Eigen::FullPivLU<Mat> lu(s);
  require(lu.isInvertible(), ErrorCode::SingularPair,
          "structure difference is singular; slices carry no joint stem");
  StemValue out;
  out.F1 = lu.solve(J.mat * fJ - K.mat * fK);
  out.F2 = lu.solve(fJ - fK);
  return out;
}

inline std::vector<StemValue> stem_from_two_slices(const std::vector<Vec>& fJ,
                                                   const std::vector<Vec>& fK,
                                                   const ComplexStructure& J,
                                                   const ComplexStructure& K) {
  require(fJ.size() == fK.size(), ErrorCode::DimensionMismatch,
          "value sequences must have equal length");
  std::vector<StemValue> out;
  out.reserve(fJ.size());
  for (std::size_t i = 0; i < fJ.size(); ++i)
    out.push_back(stem_from_two_slices(fJ[i], fK[i], J, K));
  return out;
}

struct PathSliceResult {
  bool path_slice = false;
  StemValue stem;
  double residual = 0.0;
  int probes_used = 0;
};

/// Tests whether the endpoint values over many slices are explained by one
/// stem: least-squares fit of (1, I_m) q = f(gamma^{I_m}(1)) over the usable
/// probes, accepted when the residual stays below 1e-8 of the value scale.
inline PathSliceResult is_path_slice(const SliceFunction& f, const PlanePath& path,
                                     const std::vector<ComplexStructure>& probes) {
  std::vector<ComplexStructure> usable =
      f.domain() ? structures_containing(*f.domain(), path, probes) : probes;
  require(usable.size() >= 2, ErrorCode::InsufficientProbes,
          "need at least two probe structures containing the path");
  int two_n = f.two_n();
  auto [x1, y1] = path.at(1.0);
  int m = static_cast<int>(usable.size());
  Mat a(static_cast<long>(two_n) * m, 2 * two_n);
  Vec b(static_cast<long>(two_n) * m);
  double scale = 0.0;
  for (int k = 0; k < m; ++k) {
    Vec v = f.eval(make_point(x1, y1, usable[static_cast<std::size_t>(k)]));
    scale = std::max(scale, v.norm());
    a.block(static_cast<long>(k) * two_n, 0, two_n, two_n) =
        Mat::Identity(two_n, two_n);
    a.block(static_cast<long>(k) * two_n, two_n, two_n, two_n) =
        usable[static_cast<std::size_t>(k)].mat;
    b.segment(static_cast<long>(k) * two_n, two_n) = v;
  }
  Vec q = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  double residual = (a * q - b).lpNorm<Eigen::Infinity>();
  PathSliceResult out;
  out.stem = StemValue{q.head(two_n), q.tail(two_n)};
  out.residual = residual;
  out.probes_used = m;
  out.path_slice = residual <= 1e-8 * std::max(scale, 1e-12);
  return out;
}

}  // namespace slicecalc
