#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "slicecalc/common.hpp"

namespace slicecalc {

/// Axis-aligned bounds in (x, y) plane coordinates of C^d; entries may be
/// infinite for unbounded shapes.
struct Aabb {
  Vec x_lo, x_hi, y_lo, y_hi;

  static Aabb unbounded(int d) {
    double inf = std::numeric_limits<double>::infinity();
    Aabb b;
    b.x_lo = Vec::Constant(d, -inf);
    b.x_hi = Vec::Constant(d, inf);
    b.y_lo = Vec::Constant(d, -inf);
    b.y_hi = Vec::Constant(d, inf);
    return b;
  }
  static Aabb empty(int d) {
    Aabb b;
    b.x_lo = Vec::Constant(d, 0.0);
    b.x_hi = Vec::Constant(d, 0.0);
    b.y_lo = Vec::Constant(d, 0.0);
    b.y_hi = Vec::Constant(d, 0.0);
    return b;
  }
  Aabb merged(const Aabb& o) const {
    Aabb b = *this;
    b.x_lo = x_lo.cwiseMin(o.x_lo);
    b.x_hi = x_hi.cwiseMax(o.x_hi);
    b.y_lo = y_lo.cwiseMin(o.y_lo);
    b.y_hi = y_hi.cwiseMax(o.y_hi);
    return b;
  }
  bool finite() const {
    return x_lo.allFinite() && x_hi.allFinite() && y_lo.allFinite() && y_hi.allFinite();
  }
};

namespace detail {

struct RegionNode {
  virtual ~RegionNode() = default;
  virtual bool contains(const Vec& x, const Vec& y) const = 0;
  virtual Aabb bbox() const = 0;
  virtual int d() const = 0;
};

}  // namespace detail

/// Finite boolean combination of primitive shapes in C^d, identified with
/// pairs (x, y) of real d-vectors. Open by default; immutable value type.
class Region {
 public:
  Region() = default;

  bool valid() const { return node_ != nullptr; }
  int d() const { return node_->d(); }
  bool contains(const Vec& x, const Vec& y) const { return node_->contains(x, y); }
  bool contains(double x, double y) const {
    Vec vx(1), vy(1);
    vx << x;
    vy << y;
    return contains(vx, vy);
  }
  Aabb bbox() const { return node_->bbox(); }

  static Region all(int d);
  static Region empty(int d);
  /// Componentwise |w_l - z_l| < r_l (or <= when closed); +inf radius leaves
  /// the coordinate unconstrained.
  static Region polydisc(Vec cx, Vec cy, Vec r, bool closed = false);
  /// Euclidean ball in R^{2d}.
  static Region ball(Vec cx, Vec cy, double r, bool closed = false);
  /// sum_l ((x_l-cx_l)/ax_l)^2 + ((y_l-cy_l)/ay_l)^2 < 1.
  static Region ellipse(Vec cx, Vec cy, Vec ax, Vec ay);
  /// a . (x, y) < c.
  static Region half_plane(Vec a_x, Vec a_y, double c);
  /// Complement of an eps-neighborhood of a polyline; pts is 2d x m, one
  /// column per vertex (x stacked over y).
  static Region curve_complement(Mat pts, double eps);
  /// Arbitrary membership test; bbox must be supplied for sampling/grids.
  static Region predicate(std::function<bool(const Vec&, const Vec&)> fn, Aabb box);

  Region operator|(const Region& o) const;
  Region operator&(const Region& o) const;
  Region operator-(const Region& o) const;
  /// Mirror y -> -y (the same set seen from the opposite orientation).
  Region conjugated() const;

 private:
  explicit Region(std::shared_ptr<const detail::RegionNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::RegionNode> node_;
};

namespace detail {

struct AllNode : RegionNode {
  int dim;
  explicit AllNode(int d_) : dim(d_) {}
  bool contains(const Vec&, const Vec&) const override { return true; }
  Aabb bbox() const override { return Aabb::unbounded(dim); }
  int d() const override { return dim; }
};

struct EmptyNode : RegionNode {
  int dim;
  explicit EmptyNode(int d_) : dim(d_) {}
  bool contains(const Vec&, const Vec&) const override { return false; }
  Aabb bbox() const override { return Aabb::empty(dim); }
  int d() const override { return dim; }
};

struct PolydiscNode : RegionNode {
  Vec cx, cy, r;
  bool closed;
  PolydiscNode(Vec a, Vec b, Vec rr, bool cl)
      : cx(std::move(a)), cy(std::move(b)), r(std::move(rr)), closed(cl) {}
  bool contains(const Vec& x, const Vec& y) const override {
    for (int l = 0; l < cx.size(); ++l) {
      if (std::isinf(r[l])) continue;
      double dx = x[l] - cx[l], dy = y[l] - cy[l];
      double dist = std::sqrt(dx * dx + dy * dy);
      if (closed ? dist > r[l] : dist >= r[l]) return false;
    }
    return true;
  }
  Aabb bbox() const override {
    Aabb b;
    b.x_lo = cx - r;
    b.x_hi = cx + r;
    b.y_lo = cy - r;
    b.y_hi = cy + r;
    return b;
  }
  int d() const override { return static_cast<int>(cx.size()); }
};

struct BallNode : RegionNode {
  Vec cx, cy;
  double r;
  bool closed;
  BallNode(Vec a, Vec b, double rr, bool cl)
      : cx(std::move(a)), cy(std::move(b)), r(rr), closed(cl) {}
  bool contains(const Vec& x, const Vec& y) const override {
    double s = (x - cx).squaredNorm() + (y - cy).squaredNorm();
    return closed ? s <= r * r : s < r * r;
  }
  Aabb bbox() const override {
    Aabb b;
    b.x_lo = cx.array() - r;
    b.x_hi = cx.array() + r;
    b.y_lo = cy.array() - r;
    b.y_hi = cy.array() + r;
    return b;
  }
  int d() const override { return static_cast<int>(cx.size()); }
};

struct EllipseNode : RegionNode {
  Vec cx, cy, ax, ay;
  EllipseNode(Vec a, Vec b, Vec c, Vec d_)
      : cx(std::move(a)), cy(std::move(b)), ax(std::move(c)), ay(std::move(d_)) {}
  bool contains(const Vec& x, const Vec& y) const override {
    double s = 0.0;
    for (int l = 0; l < cx.size(); ++l) {
      double u = (x[l] - cx[l]) / ax[l];
      double v = (y[l] - cy[l]) / ay[l];
      s += u * u + v * v;
    }
    return s < 1.0;
  }
  Aabb bbox() const override {
    Aabb b;
    b.x_lo = cx - ax;
    b.x_hi = cx + ax;
    b.y_lo = cy - ay;
    b.y_hi = cy + ay;
    return b;
  }
  int d() const override { return static_cast<int>(cx.size()); }
};

struct HalfPlaneNode : RegionNode {
  Vec a_x, a_y;
  double c;
  HalfPlaneNode(Vec ax, Vec ay, double cc) : a_x(std::move(ax)), a_y(std::move(ay)), c(cc) {}
  bool contains(const Vec& x, const Vec& y) const override {
    return a_x.dot(x) + a_y.dot(y) < c;
  }
  Aabb bbox() const override { return Aabb::unbounded(static_cast<int>(a_x.size())); }
  int d() const override { return static_cast<int>(a_x.size()); }
};

struct CurveComplementNode : RegionNode {
  Mat pts;  // 2d x m
  double eps;
  CurveComplementNode(Mat p, double e) : pts(std::move(p)), eps(e) {}
  bool contains(const Vec& x, const Vec& y) const override {
    Vec p(pts.rows());
    p << x, y;
    for (int s = 0; s + 1 < pts.cols(); ++s) {
      Vec a = pts.col(s), b = pts.col(s + 1);
      Vec ab = b - a;
      double t = ab.squaredNorm() > 0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      if ((p - (a + t * ab)).norm() <= eps) return false;
    }
    return true;
  }
  Aabb bbox() const override { return Aabb::unbounded(static_cast<int>(pts.rows() / 2)); }
  int d() const override { return static_cast<int>(pts.rows() / 2); }
};

struct PredicateNode : RegionNode {
  std::function<bool(const Vec&, const Vec&)> fn;
  Aabb box;
  PredicateNode(std::function<bool(const Vec&, const Vec&)> f, Aabb b)
      : fn(std::move(f)), box(std::move(b)) {}
  bool contains(const Vec& x, const Vec& y) const override { return fn(x, y); }
  Aabb bbox() const override { return box; }
  int d() const override { return static_cast<int>(box.x_lo.size()); }
};

enum class BoolOp { Union, Intersect, Difference };

struct BoolNode : RegionNode {
  BoolOp op;
  std::shared_ptr<const RegionNode> a, b;
  BoolNode(BoolOp o, std::shared_ptr<const RegionNode> aa, std::shared_ptr<const RegionNode> bb)
      : op(o), a(std::move(aa)), b(std::move(bb)) {}
  bool contains(const Vec& x, const Vec& y) const override {
    switch (op) {
      case BoolOp::Union: return a->contains(x, y) || b->contains(x, y);
      case BoolOp::Intersect: return a->contains(x, y) && b->contains(x, y);
      case BoolOp::Difference: return a->contains(x, y) && !b->contains(x, y);
    }
    return false;
  }
  Aabb bbox() const override {
    if (op == BoolOp::Union) return a->bbox().merged(b->bbox());
    return a->bbox();  // intersect/difference are no larger than a
  }
  int d() const override { return a->d(); }
};

struct ConjNode : RegionNode {
  std::shared_ptr<const RegionNode> a;
  explicit ConjNode(std::shared_ptr<const RegionNode> aa) : a(std::move(aa)) {}
  bool contains(const Vec& x, const Vec& y) const override { return a->contains(x, -y); }
  Aabb bbox() const override {
    Aabb b = a->bbox();
    Vec lo = -b.y_hi, hi = -b.y_lo;
    b.y_lo = lo;
    b.y_hi = hi;
    return b;
  }
  int d() const override { return a->d(); }
};

struct RegionAccess;

}  // namespace detail

inline Region Region::all(int d) { return Region(std::make_shared<detail::AllNode>(d)); }
inline Region Region::empty(int d) { return Region(std::make_shared<detail::EmptyNode>(d)); }
inline Region Region::polydisc(Vec cx, Vec cy, Vec r, bool closed) {
  require(cx.size() == cy.size() && cx.size() == r.size(), ErrorCode::DimensionMismatch,
          "polydisc parameter sizes differ");
  require((r.array() > 0.0).all(), ErrorCode::RadiusError, "polydisc radii must be positive");
  return Region(std::make_shared<detail::PolydiscNode>(std::move(cx), std::move(cy),
                                                       std::move(r), closed));
}
inline Region Region::ball(Vec cx, Vec cy, double r, bool closed) {
  require(r > 0.0, ErrorCode::RadiusError, "ball radius must be positive");
  return Region(std::make_shared<detail::BallNode>(std::move(cx), std::move(cy), r, closed));
}
inline Region Region::ellipse(Vec cx, Vec cy, Vec ax, Vec ay) {
  require((ax.array() > 0.0).all() && (ay.array() > 0.0).all(), ErrorCode::RadiusError,
          "ellipse semi-axes must be positive");
  return Region(std::make_shared<detail::EllipseNode>(std::move(cx), std::move(cy),
                                                      std::move(ax), std::move(ay)));
}
inline Region Region::half_plane(Vec a_x, Vec a_y, double c) {
  return Region(std::make_shared<detail::HalfPlaneNode>(std::move(a_x), std::move(a_y), c));
}
inline Region Region::curve_complement(Mat pts, double eps) {
  require(pts.rows() % 2 == 0 && pts.cols() >= 1, ErrorCode::BadInput,
          "curve points must stack x over y");
  return Region(std::make_shared<detail::CurveComplementNode>(std::move(pts), eps));
}
inline Region Region::predicate(std::function<bool(const Vec&, const Vec&)> fn, Aabb box) {
  return Region(std::make_shared<detail::PredicateNode>(std::move(fn), std::move(box)));
}
inline Region Region::operator|(const Region& o) const {
  return Region(std::make_shared<detail::BoolNode>(detail::BoolOp::Union, node_, o.node_));
}
inline Region Region::operator&(const Region& o) const {
  return Region(std::make_shared<detail::BoolNode>(detail::BoolOp::Intersect, node_, o.node_));
}
inline Region Region::operator-(const Region& o) const {
  return Region(std::make_shared<detail::BoolNode>(detail::BoolOp::Difference, node_, o.node_));
}
inline Region Region::conjugated() const {
  return Region(std::make_shared<detail::ConjNode>(node_));
}

/// Rectangular sampling grid over a plane window (d = 1 usage: x across, y
/// down). Cell centers are sampled.
struct GridSpec {
  double x_lo = -2, x_hi = 2, y_lo = -2, y_hi = 2;
  int nx = 128, ny = 128;

  double x_at(int i) const { return x_lo + (i + 0.5) * (x_hi - x_lo) / nx; }
  double y_at(int j) const { return y_lo + (j + 0.5) * (y_hi - y_lo) / ny; }
  int x_index(double x) const {
    return static_cast<int>(std::floor((x - x_lo) / (x_hi - x_lo) * nx));
  }
  int y_index(double y) const {
    return static_cast<int>(std::floor((y - y_lo) / (y_hi - y_lo) * ny));
  }
  bool inside(double x, double y) const {
    return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
  }
};

/// 4-connected component labels of a d = 1 region sampled on a grid.
/// label(i, j) is -1 outside the set.
struct GridLabels {
  GridSpec grid;
  std::vector<int> labels;  // nx * ny, row-major in (i, j)
  int component_count = 0;

  int at(int i, int j) const {
    if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return -1;
    return labels[static_cast<std::size_t>(j) * grid.nx + i];
  }
  int label_of(double x, double y) const {
    if (!grid.inside(x, y)) return -1;
    return at(grid.x_index(x), grid.y_index(y));
  }
};

inline GridLabels flood_fill(const std::function<bool(double, double)>& member,
                             const GridSpec& grid) {
  GridLabels out;
  out.grid = grid;
  out.labels.assign(static_cast<std::size_t>(grid.nx) * grid.ny, -1);
  std::vector<char> in(out.labels.size(), 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      in[static_cast<std::size_t>(j) * grid.nx + i] = member(grid.x_at(i), grid.y_at(j)) ? 1 : 0;
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * grid.nx + i;
      if (!in[idx] || out.labels[idx] >= 0) continue;
      stack.push_back({i, j});
      out.labels[idx] = next;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int ni = ci + di[k], nj = cj + dj[k];
          if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny) continue;
          std::size_t nidx = static_cast<std::size_t>(nj) * grid.nx + ni;
          if (in[nidx] && out.labels[nidx] < 0) {
            out.labels[nidx] = next;
            stack.push_back({ni, nj});
          }
        }
      }
      ++next;
    }
  }
  out.component_count = next;
  return out;
}

/// Rejection-samples interior points of a region with a finite bounding box.
inline std::vector<std::pair<Vec, Vec>> sample_region(const Region& region, Rng& rng,
                                                      int count, int max_tries = 100000) {
  Aabb box = region.bbox();
  require(box.finite(), ErrorCode::DomainViolation,
          "sampling needs a finite bounding box");
  std::vector<std::pair<Vec, Vec>> pts;
  int d = region.d();
  for (int t = 0; t < max_tries && static_cast<int>(pts.size()) < count; ++t) {
    Vec x(d), y(d);
    for (int l = 0; l < d; ++l) {
      x[l] = uniform(rng, box.x_lo[l], box.x_hi[l]);
      y[l] = uniform(rng, box.y_lo[l], box.y_hi[l]);
    }
    if (region.contains(x, y)) pts.emplace_back(std::move(x), std::move(y));
  }
  require(static_cast<int>(pts.size()) == count, ErrorCode::DomainViolation,
          "region sampling failed; set may be too thin");
  return pts;
}

}  // namespace slicecalc
