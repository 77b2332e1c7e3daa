#pragma once

#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "slicecalc/algebra.hpp"

namespace slicecalc {

/// Ordered tuple (J_1, ..., J_k) of complex structures on one R^{2n}.
/// distinct_up_to_sign records J_a != +-J_b for a != b.
struct StructureTuple {
  std::vector<ComplexStructure> entries;
  bool distinct_up_to_sign = false;

  int k() const { return static_cast<int>(entries.size()); }
  int two_n() const { return entries.front().dim(); }
  const ComplexStructure& operator[](int l) const {
    return entries[static_cast<std::size_t>(l)];
  }
};

inline StructureTuple make_structure_tuple(std::vector<ComplexStructure> entries,
                                           bool require_distinct = false) {
  require(!entries.empty(), ErrorCode::BadInput, "tuple needs at least one structure");
  for (const auto& e : entries)
    require(e.dim() == entries.front().dim(), ErrorCode::DimensionMismatch,
            "tuple structures must share one ambient dimension");
  StructureTuple t{std::move(entries), true};
  for (std::size_t a = 0; a < t.entries.size() && t.distinct_up_to_sign; ++a)
    for (std::size_t b = a + 1; b < t.entries.size(); ++b)
      if (same_up_to_sign(t.entries[a], t.entries[b])) {
        t.distinct_up_to_sign = false;
        break;
      }
  require(!require_distinct || t.distinct_up_to_sign, ErrorCode::TupleNotDistinct,
          "tuple entries must be distinct up to sign");
  return t;
}

/// Moore-Penrose pseudoinverse by SVD; singular values at or below
/// tol * sigma_max count as zero.
inline Mat mp_inverse(const Mat& m, double tol = kSvdCutoff) {
  if (m.size() == 0) return Mat(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? tol * sv[0] : 0.0;
  Vec inv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff && sv[i] > 0.0) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Stacked block rows (id | J_l), a real (2nk) x (4n) matrix.
inline Mat zeta(const StructureTuple& t) {
  int two_n = t.two_n(), k = t.k();
  Mat z(static_cast<long>(two_n) * k, 2 * two_n);
  for (int l = 0; l < k; ++l) {
    z.block(static_cast<long>(l) * two_n, 0, two_n, two_n) = Mat::Identity(two_n, two_n);
    z.block(static_cast<long>(l) * two_n, two_n, two_n, two_n) = t[l].mat;
  }
  return z;
}

/// The tuple's slice inverse and the kernel data that measures how much of a
/// function the tuple's slices pin down.
struct SliceInverse {
  StructureTuple tuple;
  Mat zeta;                // (2nk) x (4n)
  Mat zeta_plus;           // (4n) x (2nk)
  Mat kernel_basis;        // (4n) x dim ker, orthonormal
  Mat residual_projector;  // (4n) x (4n), id - zeta_plus * zeta
};

/// Builds the slice inverse: the pseudoinverse is taken in the coordinates
/// of the adapted bases D_{J_l} (block diagonal change of real coordinates),
/// then mapped back. The kernel of the coordinate-changed matrix equals
/// ker zeta, read off the SVD with the standard cutoff.
inline SliceInverse slice_inverse(const StructureTuple& t, double tol = kSvdCutoff) {
  int two_n = t.two_n(), k = t.k();
  SliceInverse si;
  si.tuple = t;
  si.zeta = zeta(t);

  Mat m_inv = Mat::Zero(static_cast<long>(two_n) * k, static_cast<long>(two_n) * k);
  for (int l = 0; l < k; ++l) {
    Mat d = d_matrix(i_basis(t[l]));
    m_inv.block(static_cast<long>(l) * two_n, static_cast<long>(l) * two_n, two_n, two_n) =
        d.partialPivLu().inverse();
  }
  Mat a = m_inv * si.zeta;

  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? tol * sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff && sv[i] > 0.0) ++rank;

  Vec inv = Vec::Zero(sv.size());
  for (int i = 0; i < rank; ++i) inv[i] = 1.0 / sv[i];
  Mat a_plus = svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
               svd.matrixU().transpose();

  si.zeta_plus = a_plus * m_inv;
  si.kernel_basis = svd.matrixV().rightCols(2 * two_n - rank);
  si.residual_projector = Mat::Identity(2 * two_n, 2 * two_n) - a_plus * a;
  return si;
}

/// Whether ker(1, I) contains ker zeta(J), i.e. the slice of I sees a
/// well-defined value through the tuple.
inline bool kernel_membership(const ComplexStructure& I, const SliceInverse& si,
                              double tol = 1e-9) {
  int two_n = si.tuple.two_n();
  require(I.dim() == two_n, ErrorCode::DimensionMismatch, "structure dimension mismatch");
  for (int c = 0; c < si.kernel_basis.cols(); ++c) {
    Vec v = si.kernel_basis.col(c);
    if ((v.head(two_n) + I.mat * v.tail(two_n)).norm() > tol) return false;
  }
  return true;
}

inline bool is_slice_solution(const SliceInverse& si) { return si.kernel_basis.cols() == 0; }

/// Sampled test of the hyper-solution property: the tuple must fail to be a
/// slice-solution, yet appending any sampled structure outside its kernel
/// set must produce one. Appending I adds the row (1, I); the enlarged
/// kernel is trivial exactly when (1 | I) restricted to the old kernel has
/// full column rank.
inline bool is_hyper_solution(const SliceInverse& si,
                              const std::vector<ComplexStructure>& cone_sample,
                              double tol = 1e-9) {
  if (is_slice_solution(si)) return false;
  int two_n = si.tuple.two_n();
  long dim = si.kernel_basis.cols();
  for (const auto& I : cone_sample) {
    if (kernel_membership(I, si, tol)) continue;
    Mat restricted(two_n, dim);
    for (long c = 0; c < dim; ++c) {
      Vec v = si.kernel_basis.col(c);
      restricted.col(c) = v.head(two_n) + I.mat * v.tail(two_n);
    }
    Eigen::JacobiSVD<Mat> svd(restricted);
    const Vec& sv = svd.singularValues();
    bool full_rank = sv.size() == dim && sv[static_cast<int>(dim) - 1] > kSvdCutoff * sv[0];
    if (!full_rank) return false;
  }
  return true;
}

/// Basis of the affine ambiguity in the representation formula: the span
/// that must be added to zeta_plus * values when I falls outside the kernel
/// set.
inline const Mat& residual_subspace(const SliceInverse& si) { return si.kernel_basis; }

/// f(gamma^I) = (1, I) zeta_plus (stacked slice values). Exact when the tuple
/// is a slice-solution; otherwise requires I in the kernel set.
inline Vec represent(const std::vector<Vec>& values, const SliceInverse& si,
                     const ComplexStructure& I) {
  int two_n = si.tuple.two_n(), k = si.tuple.k();
  require(static_cast<int>(values.size()) == k, ErrorCode::DimensionMismatch,
          "need one value per tuple entry");
  for (const auto& v : values)
    require(v.size() == two_n, ErrorCode::DimensionMismatch, "value length mismatch");
  if (!is_slice_solution(si))
    require(kernel_membership(I, si), ErrorCode::KernelViolation,
            "structure outside the kernel set; representation is set-valued here");
  Vec b(static_cast<long>(two_n) * k);
  for (int l = 0; l < k; ++l) b.segment(static_cast<long>(l) * two_n, two_n) = values[l];
  Vec q = si.zeta_plus * b;
  return q.head(two_n) + I.mat * q.tail(two_n);
}

}  // namespace slicecalc
