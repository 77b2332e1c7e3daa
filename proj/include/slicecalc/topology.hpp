#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slicecalc/algebra.hpp"
#include "slicecalc/region.hpp"

namespace slicecalc {

/// Normalized Frobenius inner product tr(A^T B) / (2n); makes every complex
/// structure a unit vector and keeps slice distances in [0, 1].
inline double structure_inner(const Mat& a, const Mat& b) {
  return (a.transpose() * b).trace() / static_cast<double>(a.rows());
}

/// Distance from the structure J to the plane C_I = span{id, I}, i.e. the
/// normalized Frobenius distance of J from its orthogonal projection. Equals
/// sqrt(1 - <J, I>^2) when J is orthogonal to the identity, as all standard
/// cone members are.
inline double slice_plane_distance(const ComplexStructure& J, const ComplexStructure& I) {
  int two_n = I.dim();
  Mat id = Mat::Identity(two_n, two_n);
  double g00 = structure_inner(id, id), g01 = structure_inner(id, I.mat);
  double g11 = structure_inner(I.mat, I.mat);
  double b0 = structure_inner(J.mat, id), b1 = structure_inner(J.mat, I.mat);
  // Solve the 2x2 Gram system for the projection coefficients.
  double det = g00 * g11 - g01 * g01;
  require(std::abs(det) > 1e-14, ErrorCode::InvalidProbe, "slice plane is degenerate");
  double c0 = (b0 * g11 - b1 * g01) / det;
  double c1 = (b1 * g00 - b0 * g01) / det;
  // Norm of the explicit residual: the Pythagorean form <J,J> - proj_sq
  // cancels catastrophically when J sits close to the plane.
  Mat residual = J.mat - c0 * id - c1 * I.mat;
  return std::sqrt(structure_inner(residual, residual));
}

/// sigma(p, q): the Euclidean distance when both points lie in one slice
/// plane (after orientation canonicalization), otherwise the slice-crossing
/// value sqrt(|x_p - x_q|^2 + |y_p|^2 + |y_q|^2).
inline double sigma_distance(const SlicePoint& p, const SlicePoint& q,
                             double tol = kStructureTol) {
  require(p.d() == q.d() && p.two_n() == q.two_n(), ErrorCode::DimensionMismatch,
          "sigma distance needs points of matching shape");
  SlicePoint a = canonicalize(p), b = canonicalize(q);
  bool common = a.is_real() || b.is_real() || same_structure(a.I, b.I, tol);
  if (common) {
    return std::sqrt((a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm());
  }
  // Summands ordered so that swapping the arguments is bit-exact symmetric.
  double sa = a.y.squaredNorm(), sb = b.y.squaredNorm();
  return std::sqrt((a.x - b.x).squaredNorm() + std::min(sa, sb) + std::max(sa, sb));
}

inline bool sigma_ball_contains(const SlicePoint& center, double radius, const SlicePoint& q,
                                double tol = kStructureTol) {
  return sigma_distance(center, q, tol) < radius;
}

/// A subset of a slice cone, described through its intersection with each
/// slice plane. per_slice(I) must give the same set for I and -I after the
/// mirror y -> -y; rep is any structure of the ambient cone, used to probe
/// real points (where the slice choice cannot matter).
struct SliceSetDescriptor {
  int d = 1;
  std::function<Region(const ComplexStructure&)> per_slice;
  ComplexStructure rep;
  bool axially_symmetric = false;
  std::optional<std::vector<std::pair<double, double>>> real_trace;  // d = 1 intervals

  bool contains(const SlicePoint& p) const {
    require(p.d() == d, ErrorCode::DimensionMismatch, "descriptor dimension mismatch");
    if (p.is_real()) return per_slice(rep).contains(p.x, Vec::Zero(d));
    return per_slice(p.I).contains(p.x, p.y);
  }
  bool contains_real(const Vec& x) const { return per_slice(rep).contains(x, Vec::Zero(d)); }
};

/// Spot check that a descriptor respects the orientation identification
/// (x, y, I) ~ (x, -y, -I); returns the worst disagreement count.
inline int descriptor_orientation_defects(const SliceSetDescriptor& desc,
                                          const std::vector<ComplexStructure>& slices,
                                          const GridSpec& grid) {
  int defects = 0;
  for (const auto& I : slices) {
    Region r_pos = desc.per_slice(I);
    Region r_neg = desc.per_slice(I.negated());
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        Vec x(1), y(1);
        x << grid.x_at(i);
        y << grid.y_at(j);
        if (r_pos.contains(x, y) != r_neg.contains(x, -y)) ++defects;
      }
  }
  return defects;
}

/// One row per probe: the ellipse parameter (squared slice-plane distance)
/// and the reported boundary distance min(1, sqrt(parameter)).
struct WitnessReport {
  std::vector<ComplexStructure> probes;
  Vec parameters;
  Vec distances;
  bool verdict = false;
  SliceSetDescriptor family;

  std::string csv() const {
    std::string out = "probe_index,parameter,distance\n";
    for (int k = 0; k < parameters.size(); ++k) {
      out += std::to_string(k) + "," + format_sig(parameters[k]) + "," +
             format_sig(distances[k]) + "\n";
    }
    return out;
  }
};

/// Neighborhood of the unit interval of C_I built from flattened ellipses:
/// on the slice of J it is { x + yJ : x^2 + y^2 / dist(J, C_I) < 1 }. For
/// probes drifting toward +-I the in-slice clearance of the origin from the
/// complement, min(1, sqrt(dist)), collapses to 0, witnessing that no sigma
/// ball around 0 fits inside the set.
inline WitnessReport tau_sigma_witness(const ComplexStructure& I,
                                       const std::vector<ComplexStructure>& probes,
                                       double threshold = 1e-3) {
  require(!probes.empty(), ErrorCode::InsufficientProbes, "need at least one probe");
  WitnessReport rep;
  rep.probes = probes;
  rep.parameters = Vec(static_cast<int>(probes.size()));
  rep.distances = Vec(static_cast<int>(probes.size()));
  for (std::size_t k = 0; k < probes.size(); ++k) {
    require(probes[k].dim() == I.dim(), ErrorCode::DimensionMismatch,
            "probe dimension mismatch");
    require(!same_up_to_sign(probes[k], I), ErrorCode::InvalidProbe,
            "probe coincides with the base slice");
    double delta = slice_plane_distance(probes[k], I);
    require(delta > 0.0, ErrorCode::InvalidProbe, "probe lies in the base slice plane");
    rep.parameters[static_cast<int>(k)] = delta;
    rep.distances[static_cast<int>(k)] = std::min(1.0, std::sqrt(delta));
  }
  rep.verdict = rep.distances.minCoeff() < threshold;

  ComplexStructure base = I;
  rep.family.d = 1;
  rep.family.rep = I;
  rep.family.axially_symmetric = false;
  rep.family.real_trace = {{{-1.0, 1.0}}};
  rep.family.per_slice = [base](const ComplexStructure& K) -> Region {
    Vec c = Vec::Zero(1), one = Vec::Constant(1, 1.0);
    if (same_up_to_sign(K, base)) return Region::ball(c, c, 1.0);
    double delta = slice_plane_distance(K, base);
    if (delta <= 0.0) return Region::ball(c, c, 1.0);
    return Region::ellipse(c, c, one, Vec::Constant(1, std::sqrt(delta)));
  };
  return rep;
}

/// Family U[J_k] = { x + y J_k : x^2 + k^2 y^2 < 1 } over the given
/// structures (k = 1, 2, ...). Every U[J_k] is a neighborhood of the closed
/// unit interval, yet the in-slice clearance of 0 is exactly 1/k, so no
/// single sigma ball around 0 sits inside all of them.
inline WitnessReport metrizability_witness(const std::vector<ComplexStructure>& structures,
                                           double threshold = 1e-3) {
  require(!structures.empty(), ErrorCode::InsufficientProbes, "need at least one structure");
  for (std::size_t a = 0; a < structures.size(); ++a)
    for (std::size_t b = a + 1; b < structures.size(); ++b)
      require(!same_up_to_sign(structures[a], structures[b]), ErrorCode::DuplicateStructure,
              "family structures must be distinct up to sign");
  WitnessReport rep;
  rep.probes = structures;
  int m = static_cast<int>(structures.size());
  rep.parameters = Vec(m);
  rep.distances = Vec(m);
  for (int k = 1; k <= m; ++k) {
    rep.parameters[k - 1] = static_cast<double>(k) * k;
    // In-slice clearance along the y axis is the semi-minor axis itself.
    rep.distances[k - 1] = std::min(1.0, 1.0 / k);
  }
  rep.verdict = rep.distances.minCoeff() < threshold;

  std::vector<ComplexStructure> family = structures;
  rep.family.d = 1;
  rep.family.rep = structures.front();
  rep.family.axially_symmetric = false;
  rep.family.real_trace = {{{-1.0, 1.0}}};
  rep.family.per_slice = [family](const ComplexStructure& K) -> Region {
    Vec c = Vec::Zero(1), one = Vec::Constant(1, 1.0);
    for (std::size_t idx = 0; idx < family.size(); ++idx) {
      if (same_up_to_sign(K, family[idx]))
        return Region::ellipse(c, c, one, Vec::Constant(1, 1.0 / (idx + 1.0)));
    }
    return Region::empty(1);
  };
  return rep;
}

/// Builds a probe at prescribed slice-plane distance delta from I. For the
/// algebra cones the imaginary unit sphere is flat in the Frobenius metric,
/// so the blend J = sqrt(1 - delta^2) I + delta E with a unit direction E
/// orthogonal to span{id, I} lands on the cone at exactly distance delta.
/// The full endomorphism cone has no such linear structure; there the probe
/// is found on a conjugation path (id + tX) I (id + tX)^{-1} by bisecting
/// the plane distance, which stays inside the cone for every invertible
/// factor.
inline ComplexStructure probe_at_distance(const ComplexStructure& I,
                                          const ConeSpec& cone, double delta, Rng& rng,
                                          int max_tries = 64) {
  require(delta > 0.0 && delta <= 1.0, ErrorCode::InvalidProbe,
          "probe distance must lie in (0, 1]");
  require(cone.kind != ConeSpec::Kind::Explicit, ErrorCode::InvalidProbe,
          "explicit cones carry no probe construction");
  const int two_n = I.dim();
  const Mat id = Mat::Identity(two_n, two_n);

  if (cone.kind != ConeSpec::Kind::Endomorphism) {
    for (int t = 0; t < max_tries; ++t) {
      auto pool = cone.sample(static_cast<std::uint64_t>(uniform(rng, 0, 1e9)), 1);
      const Mat& cand = pool.front().mat;
      Mat e = cand - structure_inner(cand, id) * id - structure_inner(cand, I.mat) * I.mat;
      double norm = std::sqrt(structure_inner(e, e));
      if (norm < 1e-6) continue;
      e /= norm;
      double u = std::sqrt(std::max(0.0, 1.0 - delta * delta));
      Mat j = u * I.mat + delta * e;
      if (!validate_complex_structure(j, 1e-8)) continue;
      ComplexStructure probe = ComplexStructure::unchecked(j);
      if (same_up_to_sign(probe, I)) continue;
      return probe;
    }
    fail(ErrorCode::InvalidProbe, "could not construct probe at requested distance");
  }

  for (int t = 0; t < max_tries; ++t) {
    Mat x(two_n, two_n);
    for (int r = 0; r < two_n; ++r)
      for (int c = 0; c < two_n; ++c) x(r, c) = gaussian(rng);
    x /= x.norm();
    auto structure_at = [&](double s) -> std::optional<Mat> {
      Mat a = id + s * x;
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) return std::nullopt;
      Mat j = a * I.mat * lu.inverse();
      return j;
    };
    // Expand until the path crosses the target distance, then bisect.
    double hi = 1.0, f_hi = 0.0;
    bool found = false;
    for (int e = 0; e < 12; ++e) {
      auto j = structure_at(hi);
      if (!j) break;
      f_hi = slice_plane_distance(ComplexStructure::unchecked(*j), I);
      if (f_hi >= delta) {
        found = true;
        break;
      }
      hi *= 2.0;
    }
    if (!found) continue;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      auto j = structure_at(mid);
      if (!j) break;
      double f = slice_plane_distance(ComplexStructure::unchecked(*j), I);
      if (f < delta)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-16 * std::max(1.0, hi)) break;
    }
    auto j = structure_at(hi);
    if (!j || !validate_complex_structure(*j, 1e-8)) continue;
    return ComplexStructure::unchecked(*j);
  }
  fail(ErrorCode::InvalidProbe, "could not construct probe at requested distance");
}

enum class Connectivity { Connected, Disconnected, Unknown };

inline const char* connectivity_name(Connectivity c) {
  switch (c) {
    case Connectivity::Connected: return "connected";
    case Connectivity::Disconnected: return "disconnected";
    case Connectivity::Unknown: return "unknown";
  }
  return "unknown";
}

struct ConnectivityReport {
  Connectivity verdict = Connectivity::Unknown;
  int components = 0;
  std::string note;
};

/// Sampling evidence for connectedness of the real trace of a descriptor.
/// d = 1 counts runs on a 1-D grid; d = 2 flood-fills the (x_1, x_2) plane.
/// Higher d is reported as unknown.
inline ConnectivityReport is_real_connected(const SliceSetDescriptor& desc,
                                            const GridSpec& grid) {
  ConnectivityReport rep;
  if (desc.d == 1) {
    int runs = 0;
    bool prev = false;
    for (int i = 0; i < grid.nx; ++i) {
      Vec x(1);
      x << grid.x_at(i);
      bool cur = desc.contains_real(x);
      if (cur && !prev) ++runs;
      prev = cur;
    }
    rep.components = runs;
    if (runs == 0) {
      rep.verdict = Connectivity::Unknown;
      rep.note = "no real points sampled in the window";
    } else if (runs == 1) {
      rep.verdict = Connectivity::Connected;
    } else {
      rep.verdict = Connectivity::Disconnected;
    }
    return rep;
  }
  if (desc.d == 2) {
    auto member = [&](double x0, double x1) {
      Vec x(2);
      x << x0, x1;
      return desc.contains_real(x);
    };
    GridLabels labels = flood_fill(member, grid);
    rep.components = labels.component_count;
    if (labels.component_count == 0) {
      rep.verdict = Connectivity::Unknown;
      rep.note = "no real points sampled in the window";
    } else if (labels.component_count == 1) {
      rep.verdict = Connectivity::Connected;
    } else {
      rep.verdict = Connectivity::Disconnected;
    }
    return rep;
  }
  rep.verdict = Connectivity::Unknown;
  rep.note = "real-trace sampling implemented for d <= 2";
  return rep;
}

struct StDomainReport {
  bool connected = false;
  bool each_slice_real_anchored = true;  // every slice component meets R
  int slices_checked = 0;
  int total_components = 0;
  std::string note;
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Sampling check of the gluing property behind slice domains: every plane
/// component of every tested slice must reach the real axis, and the
/// components of different slices must be linked through shared real cells
/// into a single piece. Only d = 1 descriptors are supported.
inline StDomainReport st_domain_check(const SliceSetDescriptor& desc,
                                      const std::vector<ComplexStructure>& slices,
                                      const GridSpec& grid) {
  require(desc.d == 1, ErrorCode::DimensionMismatch,
          "slice-domain sampling implemented for d = 1");
  require(!slices.empty(), ErrorCode::InsufficientProbes, "need at least one slice");
  require(grid.y_lo < 0.0 && grid.y_hi > 0.0, ErrorCode::BadInput,
          "grid window must straddle the real axis");

  StDomainReport rep;
  rep.slices_checked = static_cast<int>(slices.size());

  // Global node ids: (slice, component) pairs discovered in order.
  std::vector<std::vector<int>> real_cells_of_node;  // x-cell indices on the real row
  std::vector<int> node_offset(slices.size() + 1, 0);

  // The grid row nearest y = 0 carries the gluing: memberships there are
  // slice independent, so equal x-cells in different slices are the same
  // real points.
  std::vector<std::vector<int>> label_rows(slices.size());
  for (std::size_t s = 0; s < slices.size(); ++s) {
    Region r = desc.per_slice(slices[s]);
    auto member = [&](double x, double y) {
      Vec vx(1), vy(1);
      vx << x;
      vy << y;
      return r.contains(vx, vy);
    };
    GridLabels labels = flood_fill(member, grid);
    node_offset[s + 1] = node_offset[s] + labels.component_count;
    int zero_row = std::clamp(grid.y_index(0.0), 0, grid.ny - 1);
    std::vector<std::vector<int>> cells(labels.component_count);
    for (int i = 0; i < grid.nx; ++i) {
      int lab = labels.at(i, zero_row);
      if (lab >= 0) cells[lab].push_back(i);
    }
    for (auto& c : cells) real_cells_of_node.push_back(std::move(c));
    label_rows[s].assign(grid.nx, -1);
    for (int i = 0; i < grid.nx; ++i) label_rows[s][i] = labels.at(i, zero_row);
  }

  rep.total_components = node_offset.back();
  if (rep.total_components == 0) {
    rep.note = "no points sampled in the window";
    return rep;
  }
  for (const auto& cells : real_cells_of_node) {
    if (cells.empty()) rep.each_slice_real_anchored = false;
  }

  detail::UnionFind uf(rep.total_components);
  // Link components of different slices through common real cells.
  std::vector<int> owner_of_cell(grid.nx, -1);
  for (std::size_t s = 0; s < slices.size(); ++s) {
    for (int i = 0; i < grid.nx; ++i) {
      int lab = label_rows[s][i];
      if (lab < 0) continue;
      int node = node_offset[s] + lab;
      if (owner_of_cell[i] < 0) {
        owner_of_cell[i] = node;
      } else {
        uf.unite(owner_of_cell[i], node);
      }
    }
  }
  int root = uf.find(0);
  bool one_piece = true;
  for (int v = 1; v < rep.total_components; ++v)
    if (uf.find(v) != root) one_piece = false;
  rep.connected = one_piece && rep.each_slice_real_anchored;
  if (!rep.each_slice_real_anchored)
    rep.note = "a slice component does not reach the real axis";
  else if (!one_piece)
    rep.note = "slice components do not glue through the real trace";
  return rep;
}

}  // namespace slicecalc
