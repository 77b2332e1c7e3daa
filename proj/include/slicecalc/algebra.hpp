#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slicecalc/common.hpp"

namespace slicecalc {

/// Finite-dimensional real algebra given by structure constants, or a bare
/// End(R^{2n}) setting without multiplication. table[i] is the matrix of left
/// multiplication by basis vector e_i: column j holds the coordinates of
/// e_i * e_j.
struct AlgebraSpec {
  int dim = 0;            // always even, written 2n
  int unit = -1;          // basis index of the multiplicative unit, -1 if none
  std::vector<Mat> table; // empty for the bare endomorphism setting
  std::string name;

  bool has_table() const { return !table.empty(); }
  int n() const { return dim / 2; }

  /// Coordinates of a*b. Requires a multiplication table.
  Vec mul(const Vec& a, const Vec& b) const;

  Vec unit_vector() const {
    require(unit >= 0, ErrorCode::UnsupportedAlgebra, "algebra has no unit");
    Vec e = Vec::Zero(dim);
    e[unit] = 1.0;
    return e;
  }

  static AlgebraSpec quaternion();
  static AlgebraSpec octonion();
  static AlgebraSpec clifford(int m);
  static AlgebraSpec endomorphism(int two_n);
};

/// Matrix of x -> a*x on the algebra.
inline Mat left_mult_operator(const Vec& a, const AlgebraSpec& spec) {
  require(spec.has_table(), ErrorCode::UnsupportedAlgebra,
          "left multiplication needs a multiplication table");
  require(a.size() == spec.dim, ErrorCode::DimensionMismatch,
          "element has wrong dimension");
  Mat m = Mat::Zero(spec.dim, spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    if (a[i] != 0.0) m += a[i] * spec.table[i];
  }
  return m;
}

inline Vec AlgebraSpec::mul(const Vec& a, const Vec& b) const {
  return left_mult_operator(a, *this) * b;
}

/// True when T*T = -identity within tol (Frobenius) on an even-dimensional
/// square matrix.
inline bool validate_complex_structure(const Mat& t, double tol = kStructureTol) {
  if (t.rows() != t.cols() || t.rows() == 0 || t.rows() % 2 != 0) return false;
  Mat sq = t * t;
  sq += Mat::Identity(t.rows(), t.cols());
  return sq.norm() <= tol;
}

/// A complex structure on R^{2n}: T with T^2 = -identity. Not required to be
/// orthogonal.
struct ComplexStructure {
  Mat mat;

  ComplexStructure() = default;
  explicit ComplexStructure(Mat m, double tol = kStructureTol) : mat(std::move(m)) {
    require(mat.rows() == mat.cols() && mat.rows() > 0, ErrorCode::DimensionMismatch,
            "complex structure must be square");
    require(mat.rows() % 2 == 0, ErrorCode::DimensionMismatch,
            "complex structure needs even dimension");
    require(validate_complex_structure(mat, tol), ErrorCode::NotAComplexStructure,
            "matrix does not square to -identity");
  }

  static ComplexStructure unchecked(Mat m) {
    ComplexStructure s;
    s.mat = std::move(m);
    return s;
  }

  int dim() const { return static_cast<int>(mat.rows()); }
  ComplexStructure negated() const { return unchecked(-mat); }
};

/// Standard structure J0 = [[0,-I],[I,0]] on R^{2n}.
inline ComplexStructure standard_structure(int two_n) {
  int n = two_n / 2;
  Mat j = Mat::Zero(two_n, two_n);
  j.block(0, n, n, n) = -Mat::Identity(n, n);
  j.block(n, 0, n, n) = Mat::Identity(n, n);
  return ComplexStructure::unchecked(j);
}

inline double structure_distance(const ComplexStructure& a, const ComplexStructure& b) {
  return (a.mat - b.mat).norm();
}

inline bool same_structure(const ComplexStructure& a, const ComplexStructure& b,
                           double tol = kStructureTol) {
  return a.mat.rows() == b.mat.rows() && structure_distance(a, b) <= tol;
}

inline bool same_up_to_sign(const ComplexStructure& a, const ComplexStructure& b,
                            double tol = kStructureTol) {
  return same_structure(a, b, tol) || same_structure(a, b.negated(), tol);
}

/// Sign of the first row-major entry of T exceeding 1e-12 in magnitude.
/// Total on valid structures (T != 0), and flips under negation.
inline int canonical_sign(const ComplexStructure& s) {
  for (int r = 0; r < s.mat.rows(); ++r) {
    for (int c = 0; c < s.mat.cols(); ++c) {
      double v = s.mat(r, c);
      if (std::abs(v) > 1e-12) return v > 0 ? 1 : -1;
    }
  }
  fail(ErrorCode::NotAComplexStructure, "zero matrix has no canonical sign");
}

/// True when a*a = -1 in the algebra, within tol.
inline bool imaginary_unit_check(const Vec& a, const AlgebraSpec& spec,
                                 double tol = kStructureTol) {
  Vec sq = spec.mul(a, a);
  return (sq + spec.unit_vector()).norm() <= tol;
}

/// Point x + yI of a slice cone: x, y in R^d, I a complex structure on
/// R^{2n}. The pair (y, I) and (-y, -I) name the same point; y = 0 points
/// coincide across all structures. Immutable by convention.
struct SlicePoint {
  Vec x, y;
  ComplexStructure I;

  int d() const { return static_cast<int>(x.size()); }
  int two_n() const { return I.dim(); }
  bool is_real(double tol = 1e-13) const { return y.lpNorm<Eigen::Infinity>() <= tol; }
};

inline SlicePoint make_point(Vec x, Vec y, ComplexStructure I) {
  require(x.size() == y.size(), ErrorCode::DimensionMismatch,
          "x and y must have equal length");
  require(x.size() > 0, ErrorCode::DimensionMismatch, "point needs d >= 1");
  return SlicePoint{std::move(x), std::move(y), std::move(I)};
}

/// Canonical representative: when y != 0 the structure's canonical sign is
/// forced positive by flipping (y, I) -> (-y, -I); real points keep I as given
/// but compare equal across structures.
inline SlicePoint canonicalize(const SlicePoint& p) {
  if (p.is_real()) {
    SlicePoint q = p;
    q.y = Vec::Zero(p.y.size());
    return q;
  }
  if (canonical_sign(p.I) < 0) return SlicePoint{p.x, -p.y, p.I.negated()};
  return p;
}

inline bool point_equal(const SlicePoint& a, const SlicePoint& b,
                        double tol = kStructureTol) {
  if (a.d() != b.d() || a.two_n() != b.two_n()) return false;
  SlicePoint ca = canonicalize(a), cb = canonicalize(b);
  if ((ca.x - cb.x).norm() > tol) return false;
  if (ca.is_real() && cb.is_real()) return true;
  if (ca.is_real() != cb.is_real()) return false;
  return (ca.y - cb.y).norm() <= tol && same_structure(ca.I, cb.I, tol);
}

/// Ambient matrix x_l id + y_l I of the l-th component; the normalized
/// Frobenius norm ||M||_F / sqrt(2n) makes the embedding an isometry of the
/// slice plane.
inline Mat embed_component(const SlicePoint& p, int l) {
  return p.x[l] * Mat::Identity(p.two_n(), p.two_n()) + p.y[l] * p.I.mat;
}

inline double normalized_frobenius(const Mat& m) {
  return m.norm() / std::sqrt(static_cast<double>(m.rows()));
}

/// Half-basis of R^{2n} adapted to a structure: vectors theta_1..theta_n with
/// (theta, I theta) a basis of R^{2n}.
struct IBasis {
  ComplexStructure structure;
  Mat vectors;  // 2n x n, columns theta_l
};

namespace detail {
inline double min_singular_value(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().size() > 0
             ? svd.singularValues()(svd.singularValues().size() - 1)
             : 0.0;
}
}  // namespace detail

/// Greedy scan over the standard basis e_1..e_{2n}: accept e_k when appending
/// {e_k, I e_k} keeps the assembled column set well conditioned. The threshold
/// relaxes deterministically if a valid structure is so skewed that 1e-8
/// rejects everything.
inline IBasis i_basis(const ComplexStructure& I) {
  const int two_n = I.dim();
  const int n = two_n / 2;
  double threshold = 1e-8;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<int> chosen;
    Mat cols(two_n, 0);
    for (int k = 0; k < two_n && static_cast<int>(chosen.size()) < n; ++k) {
      Vec e = Vec::Zero(two_n);
      e[k] = 1.0;
      Mat trial(two_n, cols.cols() + 2);
      trial.leftCols(cols.cols()) = cols;
      trial.col(cols.cols()) = e;
      trial.col(cols.cols() + 1) = I.mat * e;
      if (detail::min_singular_value(trial) > threshold) {
        cols = std::move(trial);
        chosen.push_back(k);
      }
    }
    if (static_cast<int>(chosen.size()) == n) {
      Mat theta(two_n, n);
      for (int l = 0; l < n; ++l) {
        theta.col(l).setZero();
        theta(chosen[l], l) = 1.0;
      }
      return IBasis{I, theta};
    }
    threshold *= 1e-2;
  }
  fail(ErrorCode::NotAComplexStructure, "no adapted basis found");
}

/// D_I with columns (theta_1..theta_n, I theta_1..I theta_n); satisfies
/// D_I^{-1} I D_I = J0.
inline Mat d_matrix(const IBasis& basis) {
  const int two_n = basis.structure.dim();
  const int n = two_n / 2;
  require(basis.vectors.rows() == two_n && basis.vectors.cols() == n,
          ErrorCode::DimensionMismatch, "basis has wrong shape");
  Mat d(two_n, two_n);
  d.leftCols(n) = basis.vectors;
  d.rightCols(n) = basis.structure.mat * basis.vectors;
  require(detail::min_singular_value(d) > 0.0, ErrorCode::NotAComplexStructure,
          "adapted basis is singular");
  return d;
}

/// Family of complex structures, closed under negation. Either an explicit
/// list or a parametric sampler keyed by the algebra kind.
struct ConeSpec {
  enum class Kind { Quaternion, Octonion, Clifford, Endomorphism, Explicit };

  Kind kind = Kind::Quaternion;
  int two_n = 4;
  int clifford_m = 0;
  std::vector<ComplexStructure> list;  // Kind::Explicit

  static ConeSpec quaternion() { return ConeSpec{Kind::Quaternion, 4, 0, {}}; }
  static ConeSpec octonion() { return ConeSpec{Kind::Octonion, 8, 0, {}}; }
  static ConeSpec clifford(int m) {
    require(m >= 1, ErrorCode::UnsupportedAlgebra, "clifford order must be >= 1");
    return ConeSpec{Kind::Clifford, 1 << m, m, {}};
  }
  static ConeSpec endomorphism(int two_n) {
    require(two_n >= 2 && two_n % 2 == 0, ErrorCode::DimensionMismatch,
            "endomorphism cone needs even dimension");
    return ConeSpec{Kind::Endomorphism, two_n, 0, {}};
  }
  static ConeSpec explicit_list(std::vector<ComplexStructure> structures);

  /// Negation closure for explicit lists; parametric families are symmetric
  /// by construction.
  bool closed_under_negation(double tol = kStructureTol) const {
    if (kind != Kind::Explicit) return true;
    for (const auto& s : list) {
      bool found = false;
      for (const auto& t : list) {
        if (same_structure(s.negated(), t, tol)) { found = true; break; }
      }
      if (!found) return false;
    }
    return true;
  }

  std::vector<ComplexStructure> sample(std::uint64_t seed, int count) const;
};

inline ConeSpec ConeSpec::explicit_list(std::vector<ComplexStructure> structures) {
  require(!structures.empty(), ErrorCode::BadInput, "explicit cone must be nonempty");
  ConeSpec c;
  c.kind = Kind::Explicit;
  c.two_n = structures.front().dim();
  for (const auto& s : structures)
    require(s.dim() == c.two_n, ErrorCode::DimensionMismatch,
            "cone structures must share a dimension");
  c.list = std::move(structures);
  require(c.closed_under_negation(), ErrorCode::BadInput,
          "explicit cone must be closed under negation");
  return c;
}

// ---------------------------------------------------------------------------
// Built-in algebra tables.

namespace detail {

inline std::vector<Mat> table_from_products(
    int dim, const std::function<Vec(int, int)>& basis_product) {
  std::vector<Mat> table(dim, Mat::Zero(dim, dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) table[i].col(j) = basis_product(i, j);
  return table;
}

/// Graded-lexicographic blade order for R_m: subsets of {1..m} sorted by
/// (cardinality, lexicographic on the sorted index tuple).
inline std::vector<std::vector<int>> clifford_blades(int m) {
  std::vector<std::vector<int>> blades;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> s;
    for (int b = 0; b < m; ++b)
      if (mask & (1 << b)) s.push_back(b + 1);
    blades.push_back(std::move(s));
  }
  std::sort(blades.begin(), blades.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return blades;
}

/// Product of basis blades with e_i e_j + e_j e_i = -2 delta_ij. Returns the
/// resulting blade (sorted) and the accumulated sign.
inline std::pair<std::vector<int>, int> blade_product(std::vector<int> s,
                                                      const std::vector<int>& t) {
  int sign = 1;
  for (int gen : t) {
    int greater = 0;
    for (int v : s)
      if (v > gen) ++greater;
    if (greater % 2 != 0) sign = -sign;
    auto it = std::find(s.begin(), s.end(), gen);
    if (it != s.end()) {
      s.erase(it);
      sign = -sign;  // e_gen^2 = -1
    } else {
      s.insert(std::upper_bound(s.begin(), s.end(), gen), gen);
    }
  }
  return {std::move(s), sign};
}

}  // namespace detail

inline AlgebraSpec AlgebraSpec::quaternion() {
  AlgebraSpec spec;
  spec.dim = 4;
  spec.unit = 0;
  spec.name = "quaternion";
  // Hamilton's table on (1, i, j, k); rows select the product sign/index.
  static const int idx[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static const int sgn[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
  spec.table = detail::table_from_products(4, [&](int i, int j) {
    Vec v = Vec::Zero(4);
    v[idx[i][j]] = sgn[i][j];
    return v;
  });
  return spec;
}

inline AlgebraSpec AlgebraSpec::octonion() {
  AlgebraSpec q = quaternion();
  AlgebraSpec spec;
  spec.dim = 8;
  spec.unit = 0;
  spec.name = "octonion";
  auto conj = [](const Vec& a) {
    Vec c = a;
    for (int i = 1; i < 4; ++i) c[i] = -c[i];
    return c;
  };
  // Cayley-Dickson doubling: (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c)).
  spec.table = detail::table_from_products(8, [&](int i, int j) {
    Vec a = Vec::Zero(4), b = Vec::Zero(4), c = Vec::Zero(4), d = Vec::Zero(4);
    (i < 4 ? a : b)[i % 4] = 1.0;
    (j < 4 ? c : d)[j % 4] = 1.0;
    Vec first = q.mul(a, c) - q.mul(conj(d), b);
    Vec second = q.mul(d, a) + q.mul(b, conj(c));
    Vec out(8);
    out << first, second;
    return out;
  });
  return spec;
}

inline AlgebraSpec AlgebraSpec::clifford(int m) {
  require(m >= 1 && m <= 12, ErrorCode::UnsupportedAlgebra,
          "clifford order out of supported range");
  AlgebraSpec spec;
  spec.dim = 1 << m;
  spec.unit = 0;
  spec.name = "clifford:" + std::to_string(m);
  auto blades = detail::clifford_blades(m);
  auto index_of = [&](const std::vector<int>& b) {
    for (std::size_t i = 0; i < blades.size(); ++i)
      if (blades[i] == b) return static_cast<int>(i);
    fail(ErrorCode::UnsupportedAlgebra, "blade lookup failed");
  };
  spec.table = detail::table_from_products(spec.dim, [&](int i, int j) {
    auto [blade, sign] = detail::blade_product(blades[i], blades[j]);
    Vec v = Vec::Zero(spec.dim);
    v[index_of(blade)] = sign;
    return v;
  });
  return spec;
}

inline AlgebraSpec AlgebraSpec::endomorphism(int two_n) {
  require(two_n >= 2 && two_n % 2 == 0, ErrorCode::DimensionMismatch,
          "endomorphism algebra needs even dimension");
  AlgebraSpec spec;
  spec.dim = two_n;
  spec.unit = -1;
  spec.name = "endo:" + std::to_string(two_n);
  return spec;
}

/// Parses "quaternion" | "octonion" | "clifford:m" | "endo:2n".
inline AlgebraSpec algebra_from_name(const std::string& name) {
  if (name == "quaternion") return AlgebraSpec::quaternion();
  if (name == "octonion") return AlgebraSpec::octonion();
  if (name.rfind("clifford:", 0) == 0)
    return AlgebraSpec::clifford(std::stoi(name.substr(9)));
  if (name.rfind("endo:", 0) == 0)
    return AlgebraSpec::endomorphism(std::stoi(name.substr(5)));
  fail(ErrorCode::UnsupportedAlgebra, "unknown algebra name: " + name);
}

inline ConeSpec cone_for_algebra(const AlgebraSpec& spec) {
  if (spec.name == "quaternion") return ConeSpec::quaternion();
  if (spec.name == "octonion") return ConeSpec::octonion();
  if (spec.name.rfind("clifford:", 0) == 0)
    return ConeSpec::clifford(std::stoi(spec.name.substr(9)));
  return ConeSpec::endomorphism(spec.dim);
}

/// Left multiplication by a random unit of the algebra's imaginary sphere, or
/// a conjugated standard structure in the endomorphism setting.
inline std::vector<ComplexStructure> ConeSpec::sample(std::uint64_t seed,
                                                      int count) const {
  Rng rng = make_rng(seed);
  std::vector<ComplexStructure> out;
  out.reserve(count);
  auto push_unit = [&](const AlgebraSpec& spec, int imag_dim, int offset) {
    Vec u = Vec::Zero(spec.dim);
    Vec dir = random_unit_vector(rng, imag_dim);
    for (int i = 0; i < imag_dim; ++i) u[offset + i] = dir[i];
    out.emplace_back(left_mult_operator(u, spec));
  };
  for (int c = 0; c < count; ++c) {
    switch (kind) {
      case Kind::Quaternion:
        push_unit(AlgebraSpec::quaternion(), 3, 1);
        break;
      case Kind::Octonion:
        push_unit(AlgebraSpec::octonion(), 7, 1);
        break;
      case Kind::Clifford:
        // Vector-grade units e = sum c_i e_i, |c| = 1, square to -1.
        push_unit(AlgebraSpec::clifford(clifford_m), clifford_m, 1);
        break;
      case Kind::Endomorphism: {
        Mat j0 = standard_structure(two_n).mat;
        for (;;) {
          Mat a = Mat::Identity(two_n, two_n);
          for (int r = 0; r < two_n; ++r)
            for (int s = 0; s < two_n; ++s) a(r, s) += 0.4 * gaussian(rng);
          Eigen::JacobiSVD<Mat> svd(a);
          double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
          if (cond < 20.0) {
            out.push_back(ComplexStructure::unchecked(a * j0 * a.inverse()));
            break;
          }
        }
        break;
      }
      case Kind::Explicit: {
        std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
        out.push_back(list[pick(rng)]);
        break;
      }
    }
  }
  return out;
}

/// First column of L_u recovers u for unital algebras: convenience for
/// translating a structure back to the algebra element it multiplies by.
inline Vec structure_to_element(const ComplexStructure& s, const AlgebraSpec& spec) {
  require(spec.unit >= 0, ErrorCode::UnsupportedAlgebra,
          "element extraction needs a unital algebra");
  return s.mat.col(spec.unit);
}

/// Checks x(xy) = (xx)y over all basis triples plus unit behavior. Exact for
/// the shipped integer tables; tol guards float accumulation only.
inline bool validate_algebra(const AlgebraSpec& spec, double tol = 0.0) {
  if (!spec.has_table()) return true;
  const int d = spec.dim;
  if (spec.unit >= 0) {
    Vec one = spec.unit_vector();
    for (int j = 0; j < d; ++j) {
      Vec e = Vec::Zero(d);
      e[j] = 1.0;
      if ((spec.mul(one, e) - e).norm() > tol) return false;
      if ((spec.mul(e, one) - e).norm() > tol) return false;
    }
  }
  for (int i = 0; i < d; ++i) {
    Vec x = Vec::Zero(d);
    x[i] = 1.0;
    Vec xx = spec.mul(x, x);
    for (int j = 0; j < d; ++j) {
      Vec y = Vec::Zero(d);
      y[j] = 1.0;
      if ((spec.mul(x, spec.mul(x, y)) - spec.mul(xx, y)).norm() > tol) return false;
    }
  }
  return true;
}

}  // namespace slicecalc
