#include "slicecalc/algebra.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace slicecalc;

namespace {
Vec quat_vec(double w, double x, double y, double z) {
  Vec v(4);
  v << w, x, y, z;
  return v;
}
}  // namespace

TEST_CASE("left multiplication by i has the fixed matrix") {
  auto spec = AlgebraSpec::quaternion();
  Mat li = left_mult_operator(quat_vec(0, 1, 0, 0), spec);
  Mat expect(4, 4);
  expect << 0, -1, 0, 0,
            1,  0, 0, 0,
            0,  0, 0, -1,
            0,  0, 1, 0;
  REQUIRE((li - expect).norm() == 0.0);
}

TEST_CASE("quaternion table matches independent Hamilton product") {
  auto spec = AlgebraSpec::quaternion();
  Rng rng = make_rng(11);
  for (int t = 0; t < 50; ++t) {
    Vec a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = uniform(rng, -2, 2);
      b[i] = uniform(rng, -2, 2);
    }
    Vec got = spec.mul(a, b);
    Vec want = (oracle::Quat::from_vec(a) * oracle::Quat::from_vec(b)).to_vec();
    REQUIRE((got - want).norm() <= 1e-14);
    // Associative algebra: operator composition respects the product.
    Mat lab = left_mult_operator(got, spec);
    Mat la_lb = left_mult_operator(a, spec) * left_mult_operator(b, spec);
    REQUIRE((lab - la_lb).norm() <= 1e-13);
  }
}

TEST_CASE("octonion table is left alternative, unital, not associative") {
  auto spec = AlgebraSpec::octonion();
  REQUIRE(validate_algebra(spec, 0.0));  // exact on integer structure constants
  // Quaternions embed as the first four coordinates.
  auto q = AlgebraSpec::quaternion();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Vec a = Vec::Zero(8), b = Vec::Zero(8);
      a[i] = 1;
      b[j] = 1;
      Vec big = spec.mul(a, b);
      Vec small = q.mul(Vec(a.head(4)), Vec(b.head(4)));
      REQUIRE((big.head(4) - small).norm() == 0.0);
      REQUIRE(big.tail(4).norm() == 0.0);
    }
  // A witness that full associativity fails.
  Vec e1 = Vec::Zero(8), e2 = Vec::Zero(8), e4 = Vec::Zero(8);
  e1[1] = e2[2] = e4[4] = 1;
  Vec left = spec.mul(spec.mul(e1, e2), e4);
  Vec right = spec.mul(e1, spec.mul(e2, e4));
  REQUIRE((left - right).norm() > 1.0);
}

TEST_CASE("clifford tables match the blade oracle and anticommute") {
  for (int m : {1, 2, 3, 4}) {
    auto spec = AlgebraSpec::clifford(m);
    REQUIRE(spec.dim == (1 << m));
    REQUIRE(validate_algebra(spec, 0.0));
    auto blades = slicecalc::detail::clifford_blades(m);
    for (std::size_t i = 0; i < blades.size(); ++i)
      for (std::size_t j = 0; j < blades.size(); ++j) {
        auto [blade, sign] = oracle::blade_mul(blades[i], blades[j]);
        Vec got = spec.table[i].col(j);
        int idx = -1;
        for (std::size_t b = 0; b < blades.size(); ++b)
          if (blades[b] == blade) idx = static_cast<int>(b);
        REQUIRE(idx >= 0);
        Vec want = Vec::Zero(spec.dim);
        want[idx] = sign;
        REQUIRE((got - want).norm() == 0.0);
      }
    // Generator relations e_i e_j + e_j e_i = -2 delta_ij.
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j) {
        Vec ei = Vec::Zero(spec.dim), ej = Vec::Zero(spec.dim);
        ei[i] = 1;
        ej[j] = 1;
        Vec anti = spec.mul(ei, ej) + spec.mul(ej, ei);
        Vec want = Vec::Zero(spec.dim);
        if (i == j) want[0] = -2;
        REQUIRE((anti - want).norm() == 0.0);
      }
  }
}

TEST_CASE("clifford order two is the quaternions") {
  auto c2 = AlgebraSpec::clifford(2);
  auto h = AlgebraSpec::quaternion();
  // Basis map 1, e1, e2, e12 -> 1, i, j, k preserves all products.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      REQUIRE((c2.table[i].col(j) - h.table[i].col(j)).norm() == 0.0);
}

TEST_CASE("imaginary unit check") {
  auto spec = AlgebraSpec::quaternion();
  REQUIRE(imaginary_unit_check(quat_vec(0, 1, 0, 0), spec));
  REQUIRE(imaginary_unit_check(quat_vec(0, 0, 1, 0), spec));
  double s = 1.0 / std::sqrt(2.0);
  REQUIRE(imaginary_unit_check(quat_vec(0, s, s, 0), spec));
  REQUIRE_FALSE(imaginary_unit_check(quat_vec(1, 0, 0, 0), spec));
  REQUIRE_FALSE(imaginary_unit_check(quat_vec(0, 1, 1, 0), spec));
  auto endo = AlgebraSpec::endomorphism(4);
  REQUIRE_THROWS_AS(imaginary_unit_check(quat_vec(0, 1, 0, 0), endo), Error);
}

TEST_CASE("complex structure validation") {
  auto spec = AlgebraSpec::quaternion();
  Mat li = left_mult_operator(quat_vec(0, 1, 0, 0), spec);
  REQUIRE(validate_complex_structure(li));
  REQUIRE_FALSE(validate_complex_structure(Mat::Identity(4, 4)));
  Mat odd = Mat::Zero(3, 3);
  REQUIRE_FALSE(validate_complex_structure(odd));
  // Tolerance behavior: a 1e-6 perturbation passes at 1e-4, fails at 1e-10.
  Mat j0 = standard_structure(4).mat;
  Mat perturbed = j0;
  perturbed(0, 2) += 1e-6;
  REQUIRE(validate_complex_structure(perturbed, 1e-4));
  REQUIRE_FALSE(validate_complex_structure(perturbed, 1e-10));
  // Conjugated standard structures are valid but generally non-orthogonal.
  auto cone = ConeSpec::endomorphism(6);
  for (const auto& s : cone.sample(5, 10)) {
    REQUIRE(validate_complex_structure(s.mat, 1e-9));
  }
}

TEST_CASE("adapted basis for L_i picks 1 and j") {
  auto spec = AlgebraSpec::quaternion();
  ComplexStructure li(left_mult_operator(quat_vec(0, 1, 0, 0), spec));
  IBasis basis = i_basis(li);
  REQUIRE(basis.vectors.cols() == 2);
  Vec e0 = Vec::Zero(4), e2 = Vec::Zero(4);
  e0[0] = 1;
  e2[2] = 1;
  REQUIRE((basis.vectors.col(0) - e0).norm() == 0.0);
  REQUIRE((basis.vectors.col(1) - e2).norm() == 0.0);

  Mat d = d_matrix(basis);
  // Columns are the coordinates of (1, j, i, k).
  Mat expect(4, 4);
  expect << 1, 0, 0, 0,
            0, 0, 1, 0,
            0, 1, 0, 0,
            0, 0, 0, 1;
  REQUIRE((d - expect).norm() == 0.0);
}

TEST_CASE("d_matrix conjugates the structure to the standard one") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    for (const auto& cone : {ConeSpec::quaternion(), ConeSpec::endomorphism(8)}) {
      for (const auto& s : cone.sample(seed, 7)) {
        Mat d = d_matrix(i_basis(s));
        Mat j0 = standard_structure(s.dim()).mat;
        Mat conj = d.inverse() * s.mat * d;
        REQUIRE((conj - j0).norm() <= 1e-9);
      }
    }
  }
}

TEST_CASE("canonical sign and point canonicalization") {
  auto spec = AlgebraSpec::quaternion();
  ComplexStructure li(left_mult_operator(quat_vec(0, 1, 0, 0), spec));
  // Row-major scan of L_i starts with -1 at (0,1), so -L_i is canonical.
  REQUIRE(canonical_sign(li) == -1);
  REQUIRE(canonical_sign(li.negated()) == 1);

  Vec x1(1), ym(1), yp(1);
  x1 << 1.0;
  ym << -2.0;
  yp << 2.0;
  SlicePoint p = make_point(x1, ym, li);
  SlicePoint c = canonicalize(p);
  // (y, I) -> (-y, -I) lands on the canonical-sign representative.
  REQUIRE(c.y[0] == 2.0);
  REQUIRE(same_structure(c.I, li.negated()));
  SlicePoint q = make_point(x1, yp, li);
  SlicePoint cq = canonicalize(q);
  REQUIRE(cq.y[0] == -2.0);
  REQUIRE(same_structure(cq.I, li.negated()));

  // The two representations of one point compare equal.
  REQUIRE(point_equal(p, make_point(x1, yp, li.negated())));
  REQUIRE_FALSE(point_equal(p, q));

  // Real points agree across structures.
  ComplexStructure lj(left_mult_operator(quat_vec(0, 0, 1, 0), spec));
  Vec zero1 = Vec::Zero(1);
  REQUIRE(point_equal(make_point(x1, zero1, li), make_point(x1, zero1, lj)));
  REQUIRE_FALSE(point_equal(make_point(x1, yp, li), make_point(x1, yp, lj)));
}

TEST_CASE("canonicalize is idempotent on random points") {
  Rng rng = make_rng(99);
  auto cone = ConeSpec::quaternion();
  auto structures = cone.sample(21, 50);
  for (const auto& s : structures) {
    Vec x(2), y(2);
    for (int i = 0; i < 2; ++i) {
      x[i] = uniform(rng, -3, 3);
      y[i] = uniform(rng, -3, 3);
    }
    SlicePoint p = make_point(x, y, s);
    SlicePoint c1 = canonicalize(p);
    SlicePoint c2 = canonicalize(c1);
    REQUIRE((c1.x - c2.x).norm() == 0.0);
    REQUIRE((c1.y - c2.y).norm() == 0.0);
    REQUIRE(same_structure(c1.I, c2.I, 0.0));
    REQUIRE(point_equal(p, c1));
  }
}

TEST_CASE("explicit cones enforce closure under negation") {
  auto spec = AlgebraSpec::quaternion();
  ComplexStructure li(left_mult_operator(quat_vec(0, 1, 0, 0), spec));
  REQUIRE_THROWS_AS(ConeSpec::explicit_list({li}), Error);
  auto cone = ConeSpec::explicit_list({li, li.negated()});
  REQUIRE(cone.closed_under_negation());
  auto picks = cone.sample(3, 5);
  for (const auto& s : picks) REQUIRE(same_up_to_sign(s, li));
}

TEST_CASE("algebra name parsing") {
  REQUIRE(algebra_from_name("quaternion").dim == 4);
  REQUIRE(algebra_from_name("octonion").dim == 8);
  REQUIRE(algebra_from_name("clifford:3").dim == 8);
  REQUIRE(algebra_from_name("endo:6").dim == 6);
  REQUIRE_FALSE(algebra_from_name("endo:6").has_table());
  REQUIRE_THROWS_AS(algebra_from_name("sedenion"), Error);
}

TEST_CASE("structure to element round trip") {
  auto spec = AlgebraSpec::quaternion();
  Rng rng = make_rng(7);
  for (int t = 0; t < 20; ++t) {
    Vec u = Vec::Zero(4);
    Vec dir = random_unit_vector(rng, 3);
    u.tail(3) = dir;
    ComplexStructure s(left_mult_operator(u, spec));
    REQUIRE((structure_to_element(s, spec) - u).norm() <= 1e-14);
  }
}
