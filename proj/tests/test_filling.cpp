#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "reeb/error.hpp"
#include "reeb/filling.hpp"

using namespace reeb;
using fixtures::kPi;

namespace {

const double kSqrt2 = std::sqrt(2.0);

TransverseKnot trefoil() { return torus_orbit_knot(2, 3, 1.0, std::sqrt(2.0 / 3.0)); }

TransverseKnot z1_circle() {
  const auto e = StarShapedSurface::ellipsoid(1, kSqrt2);
  return knot_from_orbit(find_periodic_orbit(e, Vec4d(1, 0, 0, 0), kPi));
}

FillingOptions small_grid() {
  FillingOptions o;
  o.n_r = 32;
  o.n_theta = 128;
  return o;
}

double max_z2(const ImmersedDisc& d) {
  double m = 0;
  for (int i = 0; i < d.nodes_u(); ++i)
    for (int j = 0; j < d.nodes_v(); ++j) m = std::max(m, d.f(i, j).tail<2>().norm());
  return m;
}

}  // namespace

TEST_CASE("linear filling of planar circles is the flat disc") {
  for (const TransverseKnot& k : {hopf_fiber(), z1_circle()}) {
    const ImmersedDisc d = linear_filling(k, small_grid());
    CHECK(d.kind() == DiscKind::Chord);
    CHECK(max_z2(d) < 1e-12);
    CHECK(boundary_error(d, k) < 1e-8);
    CHECK(symplectic_check(d) > 0);
    CHECK(tangential_index(d).value == 0);
    const auto pts = complex_points(d);
    REQUIRE(pts.size() == 1);
    CHECK(pts.front().whole_disc);
    CHECK(pts.front().holomorphic);
  }
}

TEST_CASE("linear filling of the (2,3) torus orbit") {
  const TransverseKnot k = trefoil();
  const ImmersedDisc d = linear_filling(k);
  CHECK(boundary_error(d, k) < 1e-8);
  CHECK(max_surface_value(d, k.surface()) <= 1 + 1e-9);
  CHECK(symplectic_check(d) > 0);
  CHECK(immersion_margin(d) > 1e-6);
  CHECK(anti_holomorphic_count(complex_points(d)) == 0);
  // Strictly inside away from the boundary arcs and the two corners.
  double inner = 0;
  for (int i = 2; i <= d.n_u() - 2; ++i)
    for (int j = 2; j <= d.n_v() - 2; ++j) inner = std::max(inner, k.surface().value(d.f(i, j)));
  CHECK(inner < 1 - 1e-8);

  const TangentialIndex t = tangential_index(d);
  CHECK(t.value == 1);
  REQUIRE(t.records.size() == 1);
  const IntersectionRecord& r = t.records.front();
  CHECK(r.sign == 1);
  CHECK(r.residual < 1e-9);
  // Both branches sit on the middle chord at t = pi / 6 and 5 pi / 6.
  CHECK(r.params_p(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.params_q(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::min(r.params_p(1), r.params_q(1)) == doctest::Approx(kPi / 6).epsilon(1e-6));
  CHECK(std::max(r.params_p(1), r.params_q(1)) == doctest::Approx(5 * kPi / 6).epsilon(1e-6));
  CHECK((d.map(r.params_p(0), r.params_p(1)) - d.map(r.params_q(0), r.params_q(1))).norm() < 1e-9);
}

TEST_CASE("tangential index is stable under grid refinement") {
  const ImmersedDisc d = linear_filling(trefoil());
  const TangentialIndex coarse = tangential_index(d);
  const TangentialIndex fine = tangential_index(d.refined(2));
  CHECK(fine.value == coarse.value);
  REQUIRE(fine.records.size() == coarse.records.size());
  for (std::size_t i = 0; i < fine.records.size(); ++i)
    CHECK((fine.records[i].point - coarse.records[i].point).norm() < 1e-6);
}

TEST_CASE("linear filling input checks") {
  CHECK_THROWS_AS(linear_filling(trefoil(), 1.0, 1.0 + 1e-4), DomainError);
  const TransverseKnot generic = knot_from_orbit(find_periodic_orbit(fixtures::perturbed_ellipsoid(), Vec4d(1, 0, 0, 0), kPi));
  CHECK_THROWS_AS(linear_filling(generic), DomainError);
  FillingOptions convex = small_grid();
  convex.assume_convex = true;
  CHECK(symplectic_check(linear_filling(generic, convex)) > 0);
}

TEST_CASE("embedded fillings") {
  for (const TransverseKnot& k : {hopf_fiber(), z1_circle()}) {
    const FillingDirection dir = find_filling_direction(k);
    REQUIRE(dir.found);
    const EmbeddedFilling e = embedded_filling(k, dir);
    CHECK(e.injectivity_margin > kInjectivityThreshold);
    CHECK(max_z2(e.disc) < 1e-12);
    CHECK(boundary_error(e.disc, k) < 1e-8);
    CHECK(symplectic_check(e.disc) > 0);
    CHECK(tangential_index(e.disc).value == 0);
  }
  // Height matching needs a direction with two critical points.
  const TransverseKnot t = trefoil();
  const FillingDirection bad = find_filling_direction(t);
  CHECK_THROWS_AS(embedded_filling(t, bad), DomainError);
}

TEST_CASE("embedded filling of a pinched ellipsoid orbit") {
  const auto e = StarShapedSurface::ellipsoid(1, 1.2);
  REQUIRE(pinching_scan(e, 1000).pass);
  const TransverseKnot k = knot_from_orbit(find_periodic_orbit(e, Vec4d(1, 0, 0, 0), kPi));
  const EmbeddedFilling f = embedded_filling(k, find_filling_direction(k));
  CHECK(f.injectivity_margin > kInjectivityThreshold);
  CHECK(tangential_index(f.disc).value == 0);
}

TEST_CASE("symplectic check and orientation") {
  CHECK(symplectic_check(flat_disc(1.0, false, 16, 64)) == doctest::Approx(1.0));
  CHECK(symplectic_check(flat_disc(1.0, true, 16, 64)) < 0);
}

TEST_CASE("complex points") {
  const auto pts = complex_points(flat_disc(1.0, false, 16, 64));
  REQUIRE(pts.size() == 1);
  CHECK(pts.front().whole_disc);

  const auto anti = complex_points(fixtures::anti_holomorphic_disc());
  CHECK(anti_holomorphic_count(anti) == 1);
  for (const ComplexPoint& p : anti) {
    if (p.holomorphic) continue;
    const Vec2d z = p.u * Vec2d(std::cos(p.v), std::sin(p.v));
    CHECK((z - Vec2d(0.3, 0.2)).norm() < 1e-5);
    CHECK(p.defect < 1e-7);
  }
  // Defect oracle: zero on complex lines, one on totally real planes.
  CHECK(complex_defect(Vec4d(1, 0, 0, 0), Vec4d(0, 1, 0, 0)) < 1e-15);
  CHECK(complex_defect(Vec4d(1, 0, 0, 0), Vec4d(0, 0, 1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("synthetic double points") {
  for (int sign : {1, -1}) {
    const ImmersedDisc d = fixtures::double_point_disc(sign);
    CHECK(immersion_margin(d) > 1e-6);
    const TangentialIndex t = tangential_index(d);
    CHECK(t.value == sign);
    REQUIRE(t.records.size() == 1);
    const IntersectionRecord& r = t.records.front();
    CHECK(r.point.norm() < 1e-9);
    const Vec2d p = d.disc_coordinates(r.params_p(0), r.params_p(1));
    const Vec2d q = d.disc_coordinates(r.params_q(0), r.params_q(1));
    CHECK(std::abs(std::abs(p(0)) - 0.5) < 1e-8);
    CHECK((p + q).norm() < 1e-8);
    CHECK(tangential_index(d.refined(2)).value == sign);
  }
  CHECK(tangential_index(flat_disc()).value == 0);
  CHECK(tangential_index(flat_disc()).records.empty());
}

TEST_CASE("non-transverse self-intersections are reported") {
  // Two sheets of (x, y) -> (x^2, 0, y, 0) touch along a whole curve.
  const ImmersedDisc d = planar_map_disc(
      [](const Vec2d& z) { return Vec4d(z(0) * z(0) - 0.25, z(0) * (z(0) * z(0) - 0.25), z(1), 0); },
      [](const Vec2d& z) {
        Eigen::Matrix<double, 4, 2> j;
        j << 2 * z(0), 0, 3 * z(0) * z(0) - 0.25, 0, 0, 1, 0, 0;
        return j;
      },
      32, 128);
  CHECK_THROWS_AS(tangential_index(d), DomainError);
}

TEST_CASE("Theorem 1 relation on the fixtures") {
  const Theorem1Report hopf = verify_theorem1(hopf_fiber(), flat_disc());
  CHECK(hopf.lk == -1);
  CHECK(hopf.tan == 0);
  CHECK(hopf.pass);

  const TransverseKnot t = trefoil();
  const Theorem1Report tr = verify_theorem1(t, linear_filling(t));
  CHECK(tr.lk == 1);
  CHECK(tr.tan == 1);
  CHECK(tr.lk == 2 * tr.tan - 1);
  CHECK(tr.pass);

  CHECK_THROWS_AS(verify_theorem1(hopf_fiber(), flat_disc(1.0, true)), DomainError);
}

TEST_CASE("self-intersection number") {
  const SelfIntersectionNumber h = self_intersection_number(hopf_fiber());
  CHECK(h.value == 0);
  CHECK(h.value - h.lk == 1);
  const TransverseKnot t = trefoil();
  const ImmersedDisc d = linear_filling(t);
  const SelfIntersectionNumber s = self_intersection_number(t, &d);
  CHECK(s.value == 2);
  CHECK(s.cross_checked);
  CHECK(s.twice_tan == 2);
  // A filling of another knot cannot match.
  const ImmersedDisc flat = flat_disc();
  CHECK_THROWS_AS(self_intersection_number(t, &flat), VerificationError);
}

TEST_CASE("disc CSV dump") {
  const ImmersedDisc d = flat_disc(1.0, false, 4, 8);
  std::ostringstream os;
  write_disc_csv(os, d);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "r,theta,x1,y1,x2,y2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == d.nodes_u() * d.nodes_v());
}
