#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "reeb/core4.hpp"
#include "reeb/error.hpp"

using namespace reeb;

namespace {

bool near(const Vec4d& a, const Vec4d& b, double tol = 1e-15) { return (a - b).norm() <= tol; }

}  // namespace

TEST_CASE("J multiplies both coordinates by i") {
  CHECK(near(j_mul(Vec4d(1, 0, 0, 0)), Vec4d(0, 1, 0, 0)));
  CHECK(near(j_mul(Vec4d(0, 1, 0, 0)), Vec4d(-1, 0, 0, 0)));
  CHECK((j_matrix() * Vec4d(1, 2, 3, 4) - j_mul(Vec4d(1, 2, 3, 4))).norm() == 0.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vec4d v = fixtures::random_unit(rng);
    CHECK(near(j_mul(j_mul(v)), -v));
    const auto z = from_complex(std::complex<double>(0, 1) * z1(v), std::complex<double>(0, 1) * z2(v));
    CHECK(near(z, j_mul(v)));
  }
}

TEST_CASE("Mhat is conjugate linear, squares to -1 and is orthogonal to v and Jv") {
  CHECK(near(mhat(Vec4d(1, 0, 0, 0)), Vec4d(0, 0, 1, 0)));
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vec4d v = fixtures::random_unit(rng);
    CHECK(near(mhat(mhat(v)), -v));
    CHECK(std::abs(mhat(v).dot(v)) < 1e-15);
    CHECK(std::abs(mhat(v).dot(j_mul(v))) < 1e-15);
    CHECK(near(mhat(j_mul(v)), -j_mul(mhat(v))));
  }
}

TEST_CASE("omega0 and lambda0") {
  CHECK(omega0(Vec4d(1, 0, 0, 0), Vec4d(0, 1, 0, 0)) == 1.0);
  CHECK(lambda0(Vec4d(1, 0, 0, 0), Vec4d(0, 1, 0, 0)) == 0.5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    const Vec4d u(g(rng), g(rng), g(rng), g(rng));
    const Vec4d v(g(rng), g(rng), g(rng), g(rng));
    CHECK(omega0(u, u) == 0.0);
    CHECK(omega0(u, j_mul(u)) == doctest::Approx(u.squaredNorm()).epsilon(1e-14));
    CHECK(omega0(u, v) == doctest::Approx(j_mul(u).dot(v)).epsilon(1e-14));
    CHECK(std::abs(lambda0(u, u)) < 1e-14);
  }
}

TEST_CASE("d lambda0 equals omega0 by central differences") {
  // d lambda(u, v) = u(lambda(v)) - v(lambda(u)) for constant fields u, v.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const double h = 1e-4;
  for (int k = 0; k < 20; ++k) {
    const Vec4d p(g(rng), g(rng), g(rng), g(rng));
    const Vec4d u(g(rng), g(rng), g(rng), g(rng));
    const Vec4d v(g(rng), g(rng), g(rng), g(rng));
    const double du = (lambda0(p + h * u, v) - lambda0(p - h * u, v)) / (2 * h);
    const double dv = (lambda0(p + h * v, u) - lambda0(p - h * v, u)) / (2 * h);
    CHECK(std::abs((du - dv) - omega0(u, v)) < 1e-6);
  }
}

TEST_CASE("det4 follows the (x1, y1, x2, y2) orientation") {
  const Vec4d e1(1, 0, 0, 0), e2(0, 1, 0, 0), e3(0, 0, 1, 0), e4(0, 0, 0, 1);
  CHECK(det4(e1, e2, e3, e4) == 1.0);
  CHECK(det4(e2, e1, e3, e4) == -1.0);
  // A complex line and its J image span positively.
  CHECK(det4(e1, j_mul(e1), e3, j_mul(e3)) > 0);
}

TEST_CASE("stereographic projection") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Vec4d pole = fixtures::random_unit(rng);
    CHECK(stereographic(Vec4d(-pole), pole).norm() < 1e-15);
    const auto frame = stereographic_frame(pole);
    Mat4d m;
    m << -pole, frame;
    CHECK(m.determinant() == doctest::Approx(1.0));
    CHECK((frame.transpose() * frame - Eigen::Matrix3d::Identity()).norm() < 1e-14);
    for (int i = 0; i < 10; ++i) {
      const Vec4d p = fixtures::random_unit(rng);
      if ((p - pole).norm() < 0.1) continue;
      CHECK((inverse_stereographic(stereographic(p, pole), pole) - p).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(stereographic(Vec4d(1, 0, 0, 0), Vec4d(1, 0, 0, 0)), DomainError);
  CHECK_THROWS_AS(stereographic(Vec4d(2, 0, 0, 0), Vec4d(0, 1, 0, 0)), DomainError);
}

TEST_CASE("image distance grows with spherical distance for a fixed pole distance") {
  // Points c(theta) = cos(theta) q + sin(theta) w with q, w orthogonal to the pole stay at
  // pole distance sqrt(2); images of q and c(theta) separate monotonically in theta.
  const Vec4d pole(0, 0, 0, 1);
  const Vec4d q(1, 0, 0, 0), w(0, 1, 0, 0);
  double prev = 0.0;
  for (int i = 1; i <= 30; ++i) {
    const double theta = fixtures::kPi * i / 31;
    const Vec4d c = std::cos(theta) * q + std::sin(theta) * w;
    const double d = (stereographic(c, pole) - stereographic(q, pole)).norm();
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("templated core works with long double") {
  using V = Vec4<long double>;
  const V v(1, 2, 3, 4);
  CHECK(j_mul(j_mul(v)) == -v);
  CHECK(omega0(v, j_mul(v)) == v.squaredNorm());
}
