#pragma once

// Hand-rolled reference arithmetic used to cross-check the table-driven
// library path. Deliberately independent: no slicecalc headers except the
// Eigen aliases, no multiplication tables.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

struct Quat {
  double w = 0, x = 0, y = 0, z = 0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat from_vec(const Eigen::VectorXd& v) { return {v[0], v[1], v[2], v[3]}; }
  Eigen::VectorXd to_vec() const {
    Eigen::VectorXd v(4);
    v << w, x, y, z;
    return v;
  }

  Quat operator+(const Quat& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quat operator-(const Quat& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quat conj() const { return {w, -x, -y, -z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Quat inverse() const {
    double n = norm2();
    return {w / n, -x / n, -y / n, -z / n};
  }
  Quat pow_int(int k) const {
    Quat r{1, 0, 0, 0};
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }
};

inline Quat qi() { return {0, 1, 0, 0}; }
inline Quat qj() { return {0, 0, 1, 0}; }
inline Quat qk() { return {0, 0, 0, 1}; }

// Polynomial sum q^n c_n with right coefficients.
inline Quat poly_eval(const std::vector<Quat>& coeffs, const Quat& q) {
  Quat acc{0, 0, 0, 0};
  for (std::size_t n = 0; n < coeffs.size(); ++n) acc = acc + q.pow_int(static_cast<int>(n)) * 1.0 * coeffs[n];
  return acc;
}

// Clifford blade product oracle: indices are sorted generator lists; sign via
// explicit inversion counting on the concatenation (independent of the
// library's incremental insert algorithm).
inline std::pair<std::vector<int>, int> blade_mul(const std::vector<int>& s,
                                                  const std::vector<int>& t) {
  std::vector<int> cat = s;
  cat.insert(cat.end(), t.begin(), t.end());
  int sign = 1;
  // Bubble sort, counting swaps of distinct neighbors.
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i = 0; i + 1 < cat.size(); ++i) {
      if (cat[i] > cat[i + 1]) {
        std::swap(cat[i], cat[i + 1]);
        sign = -sign;
        moved = true;
      }
    }
  }
  // Contract equal neighbors with e*e = -1.
  std::vector<int> out;
  for (std::size_t i = 0; i < cat.size();) {
    if (i + 1 < cat.size() && cat[i] == cat[i + 1]) {
      sign = -sign;
      i += 2;
    } else {
      out.push_back(cat[i]);
      ++i;
    }
  }
  return {out, sign};
}

// sigma distance oracle for quaternions written directly from the two-branch
// definition, with quaternions as 4-vectors.
inline double sigma_quat(const Quat& p, const Quat& q) {
  Eigen::Vector3d ip(p.x, p.y, p.z), iq(q.x, q.y, q.z);
  double ni = ip.norm(), nq = iq.norm();
  bool common_slice = ni < 1e-14 || nq < 1e-14 ||
                      ip.cross(iq).norm() <= 1e-12 * ni * nq;
  if (common_slice) return (p - q).norm();
  double dre = p.w - q.w;
  return std::sqrt(dre * dre + ni * ni + nq * nq);
}

}  // namespace oracle
