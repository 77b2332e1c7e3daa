#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slicecalc/topology.hpp"
#include "oracles.hpp"

using namespace slicecalc;

namespace {

AlgebraSpec quat() { return AlgebraSpec::quaternion(); }

ComplexStructure axis_structure(double a, double b, double c) {
  Vec u(4);
  u << 0.0, a, b, c;
  u /= u.norm();
  return ComplexStructure(left_mult_operator(u, quat()));
}

SlicePoint qpoint(double x, double y, const ComplexStructure& I) {
  Vec vx(1), vy(1);
  vx << x;
  vy << y;
  return make_point(vx, vy, I);
}

oracle::Quat to_quat(const SlicePoint& p) {
  Vec u = structure_to_element(p.I, quat());
  Vec v = p.x[0] * Vec::Unit(4, 0) + p.y[0] * u;
  return oracle::Quat::from_vec(v);
}

}  // namespace

TEST_CASE("sigma distance on textbook pairs") {
  ComplexStructure Li = axis_structure(1, 0, 0);
  ComplexStructure Lj = axis_structure(0, 1, 0);

  SECTION("unit points on different slices") {
    double s = sigma_distance(qpoint(0, 1, Li), qpoint(0, 1, Lj));
    REQUIRE(s == Catch::Approx(std::sqrt(2.0)).margin(1e-12).epsilon(0));
  }
  SECTION("conjugate pair shares its slice") {
    double s = sigma_distance(qpoint(1, 2, Li), qpoint(1, -2, Li));
    REQUIRE(s == Catch::Approx(4.0).margin(1e-12).epsilon(0));
  }
  SECTION("real endpoints use the euclidean distance") {
    double s = sigma_distance(qpoint(3, 0, Li), qpoint(-1, 0, Lj));
    REQUIRE(s == Catch::Approx(4.0).margin(1e-12).epsilon(0));
    s = sigma_distance(qpoint(1, 0, Li), qpoint(0, 2, Lj));
    REQUIRE(s == Catch::Approx(std::sqrt(5.0)).margin(1e-12).epsilon(0));
  }
  SECTION("opposite orientations describe the same slice") {
    double s = sigma_distance(qpoint(0.5, 1, Li), qpoint(0.5, -1, Li.negated()));
    REQUIRE(s == Catch::Approx(0.0).margin(1e-12).epsilon(0));
  }
}

TEST_CASE("sigma distance matches the quaternion oracle") {
  Rng rng = make_rng(1201);
  auto cone = ConeSpec::quaternion();
  auto structures = cone.sample(77, 40);
  for (int t = 0; t < 200; ++t) {
    const auto& I1 = structures[static_cast<std::size_t>(uniform(rng, 0, 39.999))];
    const auto& I2 = structures[static_cast<std::size_t>(uniform(rng, 0, 39.999))];
    SlicePoint p = qpoint(uniform(rng, -2, 2), uniform(rng, -2, 2), I1);
    SlicePoint q = qpoint(uniform(rng, -2, 2), uniform(rng, -2, 2), I2);
    double expect = oracle::sigma_quat(to_quat(p), to_quat(q));
    REQUIRE(sigma_distance(p, q) == Catch::Approx(expect).margin(1e-9).epsilon(0));
  }
}

TEST_CASE("sigma distance is a metric on sampled triples") {
  Rng rng = make_rng(1301);
  auto cone = ConeSpec::quaternion();
  auto structures = cone.sample(99, 60);
  auto rand_point = [&]() {
    const auto& I = structures[static_cast<std::size_t>(uniform(rng, 0, 59.999))];
    return qpoint(uniform(rng, -2, 2), uniform(rng, -2, 2), I);
  };
  for (int t = 0; t < 500; ++t) {
    SlicePoint a = rand_point(), b = rand_point(), c = rand_point();
    double ab = sigma_distance(a, b), ba = sigma_distance(b, a);
    double ac = sigma_distance(a, c), cb = sigma_distance(c, b);
    REQUIRE(ab == Catch::Approx(ba).margin(1e-12).epsilon(0));
    REQUIRE(ab <= ac + cb + 1e-12);
    REQUIRE(sigma_distance(a, a) == Catch::Approx(0.0).margin(1e-12).epsilon(0));
    if (ab < 1e-12) REQUIRE(point_equal(a, b, 1e-9));
  }
}

TEST_CASE("slice plane distance from the frobenius projection") {
  ComplexStructure Li = axis_structure(1, 0, 0);
  ComplexStructure Jd = axis_structure(1, 1, 0);  // (i + j)/sqrt(2)
  double d = slice_plane_distance(Jd, Li);
  REQUIRE(d == Catch::Approx(std::sqrt(0.5)).margin(1e-12).epsilon(0));
  REQUIRE(slice_plane_distance(axis_structure(0, 1, 0), Li) == Catch::Approx(1.0).margin(1e-12).epsilon(0));
  // Distance vanishes only on the plane itself.
  REQUIRE(slice_plane_distance(Li, Li) == Catch::Approx(0.0).margin(1e-12).epsilon(0));
  REQUIRE(slice_plane_distance(Li.negated(), Li) == Catch::Approx(0.0).margin(1e-12).epsilon(0));
}

TEST_CASE("probe construction hits a prescribed plane distance") {
  Rng rng = make_rng(4242);
  ComplexStructure Li = axis_structure(1, 0, 0);
  auto cone = ConeSpec::quaternion();
  for (int k = 1; k <= 10; ++k) {
    double delta = std::pow(4.0, -k);
    ComplexStructure J = probe_at_distance(Li, cone, delta, rng);
    REQUIRE(slice_plane_distance(J, Li) == Catch::Approx(delta).margin(1e-12).epsilon(0));
  }
  ComplexStructure endo_base = ConeSpec::endomorphism(6).sample(5, 1).front();
  ComplexStructure probe = probe_at_distance(endo_base, ConeSpec::endomorphism(6), 0.25, rng);
  REQUIRE(slice_plane_distance(probe, endo_base) == Catch::Approx(0.25).margin(1e-9).epsilon(0));
}

TEST_CASE("flattening witness reports shrinking in-slice clearance") {
  Rng rng = make_rng(511);
  ComplexStructure Li = axis_structure(1, 0, 0);
  auto cone = ConeSpec::quaternion();
  std::vector<ComplexStructure> probes;
  for (int k = 1; k <= 10; ++k) probes.push_back(probe_at_distance(Li, cone, std::pow(4.0, -k), rng));

  WitnessReport rep = tau_sigma_witness(Li, probes);
  REQUIRE(rep.distances.size() == 10);
  for (int k = 1; k <= 10; ++k) {
    REQUIRE(rep.parameters[k - 1] == Catch::Approx(std::pow(4.0, -k)).margin(1e-12).epsilon(0));
    REQUIRE(rep.distances[k - 1] == Catch::Approx(std::pow(2.0, -k)).margin(1e-12).epsilon(0));
    if (k > 1) REQUIRE(rep.distances[k - 1] < rep.distances[k - 2]);
  }
  REQUIRE(rep.verdict);  // final clearance 2^-10 < 1e-3

  SECTION("family descriptor matches the ellipse law") {
    const ComplexStructure& J = probes[3];  // delta = 4^-4
    double delta = rep.parameters[3];
    double semi_minor = std::sqrt(delta);
    REQUIRE(rep.family.contains(qpoint(0.0, 0.9 * semi_minor, J)));
    REQUIRE_FALSE(rep.family.contains(qpoint(0.0, 1.1 * semi_minor, J)));
    REQUIRE(rep.family.contains(qpoint(0.5, 0.0, J)));        // real segment
    REQUIRE(rep.family.contains(qpoint(0.0, 0.99, Li)));      // base slice disc
    REQUIRE_FALSE(rep.family.contains(qpoint(0.0, 1.01, Li)));
  }
  SECTION("csv rows carry the mandated header") {
    std::string csv = rep.csv();
    REQUIRE(csv.rfind("probe_index,parameter,distance\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 11);
  }
  SECTION("error paths") {
    REQUIRE_THROWS_AS(tau_sigma_witness(Li, {}), Error);
    REQUIRE_THROWS_AS(tau_sigma_witness(Li, {Li.negated()}), Error);
    try {
      tau_sigma_witness(Li, {Li});
    } catch (const Error& e) {
      REQUIRE(std::string(error_code_name(e.code())) == "invalid-probe");
    }
  }
}

TEST_CASE("metrizability family yields clearance exactly 1/k") {
  auto structures = ConeSpec::quaternion().sample(31, 7);
  WitnessReport rep = metrizability_witness(structures);
  for (int k = 1; k <= 7; ++k) {
    REQUIRE(rep.parameters[k - 1] == Catch::Approx(k * k).margin(0).epsilon(0));
    REQUIRE(rep.distances[k - 1] == 1.0 / k);
  }
  REQUIRE_FALSE(rep.verdict);  // 1/7 has not crossed the 1e-3 threshold yet

  SECTION("per-slice ellipses flatten with the index") {
    const auto& J3 = structures[2];  // k = 3
    REQUIRE(rep.family.contains(qpoint(0.0, 0.30, J3)));
    REQUIRE_FALSE(rep.family.contains(qpoint(0.0, 0.34, J3)));
    REQUIRE(rep.family.contains(qpoint(0.0, 0.30, J3.negated())));
    REQUIRE_FALSE(rep.family.contains(qpoint(0.9, 0.30, J3)));
  }
  SECTION("duplicated structures are rejected") {
    std::vector<ComplexStructure> bad = {structures[0], structures[0].negated()};
    try {
      metrizability_witness(bad);
      FAIL("expected duplicate-structure error");
    } catch (const Error& e) {
      REQUIRE(std::string(error_code_name(e.code())) == "duplicate-structure");
    }
  }
}

TEST_CASE("region primitives and combinators") {
  Vec z1 = Vec::Zero(1), one = Vec::Constant(1, 1.0);

  SECTION("ellipse membership and bbox") {
    Region e = Region::ellipse(z1, z1, one, Vec::Constant(1, 0.5));
    REQUIRE(e.contains(0.9, 0.0));
    REQUIRE(e.contains(0.0, 0.49));
    REQUIRE_FALSE(e.contains(0.0, 0.51));
    REQUIRE(e.bbox().y_hi[0] == Catch::Approx(0.5).margin(1e-12).epsilon(0));
  }
  SECTION("polydisc with an unconstrained coordinate") {
    Vec cx = Vec::Zero(2), cy = Vec::Zero(2), r(2);
    r << 1.0, std::numeric_limits<double>::infinity();
    Region p = Region::polydisc(cx, cy, r);
    Vec x(2), y(2);
    x << 0.5, 100.0;
    y << 0.0, -50.0;
    REQUIRE(p.contains(x, y));
    x[0] = 1.5;
    REQUIRE_FALSE(p.contains(x, y));
  }
  SECTION("closed versus open boundaries") {
    Region open = Region::ball(z1, z1, 1.0);
    Region closed = Region::ball(z1, z1, 1.0, true);
    REQUIRE_FALSE(open.contains(1.0, 0.0));
    REQUIRE(closed.contains(1.0, 0.0));
  }
  SECTION("difference builds a tube from a curve complement") {
    Mat seg(2, 2);
    seg << 0.0, 0.0,   // x coordinates of the endpoints
           0.0, 1.0;   // y coordinates
    Region tube = Region::all(1) - Region::curve_complement(seg, 0.2);
    REQUIRE(tube.contains(0.1, 0.5));
    REQUIRE(tube.contains(0.0, 1.15));
    REQUIRE_FALSE(tube.contains(0.5, 0.5));
  }
  SECTION("conjugation mirrors the y axis") {
    Region upper = Region::half_plane(Vec::Zero(1), Vec::Constant(1, -1.0), 0.0);  // y > 0
    REQUIRE(upper.contains(0.0, 0.5));
    REQUIRE_FALSE(upper.contains(0.0, -0.5));
    Region lower = upper.conjugated();
    REQUIRE(lower.contains(0.0, -0.5));
    REQUIRE_FALSE(lower.contains(0.0, 0.5));
  }
  SECTION("sampling requires a finite box") {
    Rng rng = make_rng(9);
    Region hp = Region::half_plane(one, z1, 0.0);
    REQUIRE_THROWS_AS(sample_region(hp, rng, 5), Error);
    Region ball = Region::ball(z1, z1, 1.0);
    auto pts = sample_region(ball, rng, 50);
    for (const auto& [x, y] : pts) REQUIRE(x[0] * x[0] + y[0] * y[0] < 1.0);
  }
}

namespace {

SliceSetDescriptor constant_descriptor(Region r, const ComplexStructure& rep) {
  SliceSetDescriptor desc;
  desc.d = r.d();
  desc.rep = rep;
  desc.per_slice = [r](const ComplexStructure&) { return r; };
  return desc;
}

}  // namespace

TEST_CASE("real trace connectivity sampling") {
  ComplexStructure Li = axis_structure(1, 0, 0);
  GridSpec grid;
  grid.x_lo = -2.5;
  grid.x_hi = 2.5;
  grid.nx = 500;

  SECTION("one ball is connected") {
    auto desc = constant_descriptor(Region::ball(Vec::Zero(1), Vec::Zero(1), 1.0), Li);
    auto rep = is_real_connected(desc, grid);
    REQUIRE(rep.verdict == Connectivity::Connected);
    REQUIRE(rep.components == 1);
  }
  SECTION("two separated balls are not") {
    Region two = Region::ball(Vec::Constant(1, -1.5), Vec::Zero(1), 0.5) |
                 Region::ball(Vec::Constant(1, 1.5), Vec::Zero(1), 0.5);
    auto rep = is_real_connected(constant_descriptor(two, Li), grid);
    REQUIRE(rep.verdict == Connectivity::Disconnected);
    REQUIRE(rep.components == 2);
  }
  SECTION("a set missing the real axis gives no verdict") {
    Region lifted = Region::ball(Vec::Zero(1), Vec::Constant(1, 1.5), 0.5);
    auto rep = is_real_connected(constant_descriptor(lifted, Li), grid);
    REQUIRE(rep.verdict == Connectivity::Unknown);
  }
  SECTION("two dimensional annulus flood fill") {
    Aabb box = Aabb::unbounded(2);
    box.x_lo = Vec::Constant(2, -2.0);
    box.x_hi = Vec::Constant(2, 2.0);
    box.y_lo = Vec::Constant(2, -2.0);
    box.y_hi = Vec::Constant(2, 2.0);
    Region annulus = Region::predicate(
        [](const Vec& x, const Vec&) {
          double r = x.norm();
          return r > 0.5 && r < 1.5;
        },
        box);
    SliceSetDescriptor desc = constant_descriptor(annulus, Li);
    GridSpec g2;
    g2.x_lo = -2;
    g2.x_hi = 2;
    g2.y_lo = -2;
    g2.y_hi = 2;
    g2.nx = 160;
    g2.ny = 160;
    auto rep = is_real_connected(desc, g2);
    REQUIRE(rep.verdict == Connectivity::Connected);

    Region split = Region::predicate(
        [](const Vec& x, const Vec&) {
          return std::abs(x[0]) > 0.5 && x.cwiseAbs().maxCoeff() < 1.5;
        },
        box);
    rep = is_real_connected(constant_descriptor(split, Li), g2);
    REQUIRE(rep.verdict == Connectivity::Disconnected);
    REQUIRE(rep.components == 2);
  }
}

TEST_CASE("slice domain gluing check") {
  auto structures = ConeSpec::quaternion().sample(17, 6);
  GridSpec grid;
  grid.x_lo = -2.5;
  grid.x_hi = 2.5;
  grid.y_lo = -2.0;
  grid.y_hi = 2.0;
  grid.nx = 125;
  grid.ny = 81;

  SECTION("slice-dependent tube stays glued through the disc") {
    // Unit disc plus a slice-dependent vertical tube anchored inside it: every
    // slice is one piece and all slices share the real diameter.
    SliceSetDescriptor desc;
    desc.d = 1;
    desc.rep = structures.front();
    desc.per_slice = [](const ComplexStructure& J) {
      double reach = canonical_sign(J) * (0.8 + 0.6 * std::abs(J.mat(0, 1)));
      Mat seg(2, 2);
      seg << 0.8, 0.8, 0.0, reach;
      Region tube = Region::all(1) - Region::curve_complement(seg, 0.15);
      return Region::ball(Vec::Zero(1), Vec::Zero(1), 1.0) | tube;
    };
    auto rep = st_domain_check(desc, structures, grid);
    REQUIRE(rep.connected);
    REQUIRE(rep.each_slice_real_anchored);
    REQUIRE(rep.slices_checked == 6);
  }
  SECTION("two real-anchored islands do not glue") {
    Region two = Region::ball(Vec::Constant(1, -1.5), Vec::Zero(1), 0.5) |
                 Region::ball(Vec::Constant(1, 1.5), Vec::Zero(1), 0.5);
    auto rep = st_domain_check(constant_descriptor(two, structures.front()), structures, grid);
    REQUIRE_FALSE(rep.connected);
    REQUIRE(rep.each_slice_real_anchored);
    REQUIRE(rep.total_components == 12);
  }
  SECTION("a component floating off the real axis fails the anchor test") {
    Region blob = Region::ball(Vec::Zero(1), Vec::Zero(1), 1.0) |
                  Region::ball(Vec::Zero(1), Vec::Constant(1, 1.6), 0.3);
    auto rep = st_domain_check(constant_descriptor(blob, structures.front()), structures, grid);
    REQUIRE_FALSE(rep.connected);
    REQUIRE_FALSE(rep.each_slice_real_anchored);
  }
  SECTION("axially symmetric ball passes") {
    auto desc = constant_descriptor(Region::ball(Vec::Zero(1), Vec::Zero(1), 1.2),
                                    structures.front());
    desc.axially_symmetric = true;
    auto rep = st_domain_check(desc, structures, grid);
    REQUIRE(rep.connected);
  }
  SECTION("orientation defects are caught by the spot check") {
    SliceSetDescriptor skew;
    skew.d = 1;
    skew.rep = structures.front();
    skew.per_slice = [](const ComplexStructure& J) {
      // Deliberately orientation-sensitive: upper half disc for every J.
      (void)J;
      return Region::ball(Vec::Zero(1), Vec::Zero(1), 1.0) &
             Region::half_plane(Vec::Zero(1), Vec::Constant(1, -1.0), 0.0);
    };
    GridSpec small;
    small.nx = 24;
    small.ny = 24;
    REQUIRE(descriptor_orientation_defects(skew, {structures.front()}, small) > 0);

    auto good = constant_descriptor(Region::ball(Vec::Zero(1), Vec::Zero(1), 1.0),
                                    structures.front());
    REQUIRE(descriptor_orientation_defects(good, {structures.front()}, small) == 0);
  }
}
