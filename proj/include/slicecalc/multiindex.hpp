#pragma once

#include <complex>
#include <compare>
#include <numeric>
#include <vector>

#include "slicecalc/common.hpp"

namespace slicecalc {

/// Exponent tuple for d-variable monomials, ordered by total degree first and
/// lexicographically within a degree.
struct MultiIndex {
  std::vector<int> idx;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> v) : idx(std::move(v)) {}
  static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(d, 0)); }
  static MultiIndex unit(int d, int l) {
    std::vector<int> v(d, 0);
    v[l] = 1;
    return MultiIndex(std::move(v));
  }

  int d() const { return static_cast<int>(idx.size()); }
  int order() const { return std::accumulate(idx.begin(), idx.end(), 0); }
  int operator[](int l) const { return idx[l]; }

  bool operator==(const MultiIndex& o) const { return idx == o.idx; }
  std::strong_ordering operator<=>(const MultiIndex& o) const {
    if (auto c = order() <=> o.order(); c != 0) return c;
    return idx <=> o.idx;
  }
};

/// Componentwise beta <= alpha.
inline bool divides(const MultiIndex& beta, const MultiIndex& alpha) {
  if (beta.d() != alpha.d()) return false;
  for (int l = 0; l < alpha.d(); ++l)
    if (beta[l] > alpha[l]) return false;
  return true;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
  double r = 1.0;
  for (int l = 0; l < alpha.d(); ++l) r *= binomial(alpha[l], beta[l]);
  return r;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double multi_factorial(const MultiIndex& alpha) {
  double r = 1.0;
  for (int l = 0; l < alpha.d(); ++l) r *= factorial(alpha[l]);
  return r;
}

/// All multi-indices with |alpha| <= max_order in (order, lex) order.
inline std::vector<MultiIndex> multi_indices_up_to(int d, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(d, 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == d - 1) {
      cur[pos] = remaining;
      out.push_back(MultiIndex(cur));
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      // Descending here yields ascending lex order of the tail.
      cur[pos] = remaining - v;
      self(self, pos + 1, v);
    }
  };
  for (int total = 0; total <= max_order; ++total) {
    if (d == 0) break;
    rec(rec, 0, total);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::complex<double> ipow(std::complex<double> z, int n) {
  std::complex<double> r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

/// prod_l (x_l + i y_l)^{alpha_l}.
inline std::complex<double> monomial(const Vec& x, const Vec& y, const MultiIndex& alpha) {
  std::complex<double> r{1.0, 0.0};
  for (int l = 0; l < alpha.d(); ++l) r *= ipow({x[l], y[l]}, alpha[l]);
  return r;
}

}  // namespace slicecalc
