#pragma once

// Linear algebra of R^4 = C^2 with coordinates (x1, y1, x2, y2), z_k = x_k + i y_k.
// Everything here is a pure function of its arguments and works for any real
// scalar type Eigen accepts.

#include <cmath>
#include <complex>

#include <Eigen/Core>
#include <Eigen/LU>

#include "reeb/error.hpp"

namespace reeb {

template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Complex2x2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

using Vec4d = Vec4<double>;
using Vec3d = Vec3<double>;
using Mat4d = Mat4<double>;
using Mat2d = Eigen::Matrix2d;
using Vec2d = Eigen::Vector2d;

// Complex views. The real 4-vector is the only stored representation.
template <typename Derived>
std::complex<typename Derived::Scalar> z1(const Eigen::MatrixBase<Derived>& v) {
  return {v(0), v(1)};
}
template <typename Derived>
std::complex<typename Derived::Scalar> z2(const Eigen::MatrixBase<Derived>& v) {
  return {v(2), v(3)};
}
template <typename Scalar>
Vec4<Scalar> from_complex(std::complex<Scalar> a, std::complex<Scalar> b) {
  return Vec4<Scalar>(a.real(), a.imag(), b.real(), b.imag());
}

/// Complex structure: (z1, z2) -> (i z1, i z2).
template <typename Derived>
Vec4<typename Derived::Scalar> j_mul(const Eigen::MatrixBase<Derived>& v) {
  return Vec4<typename Derived::Scalar>(-v(1), v(0), -v(3), v(2));
}

/// Matrix of j_mul in the standard basis.
template <typename Scalar = double>
Mat4<Scalar> j_matrix() {
  Mat4<Scalar> J = Mat4<Scalar>::Zero();
  J(1, 0) = 1;
  J(0, 1) = -1;
  J(3, 2) = 1;
  J(2, 3) = -1;
  return J;
}

/// Conjugate-linear structure (z1, z2) -> (-conj z2, conj z1).
template <typename Derived>
Vec4<typename Derived::Scalar> mhat(const Eigen::MatrixBase<Derived>& v) {
  return Vec4<typename Derived::Scalar>(-v(2), v(3), v(0), -v(1));
}

/// omega0 = dx1^dy1 + dx2^dy2, equal to <J u, v>.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar omega0(const Eigen::MatrixBase<DerivedU>& u,
                                 const Eigen::MatrixBase<DerivedV>& v) {
  return u(0) * v(1) - u(1) * v(0) + u(2) * v(3) - u(3) * v(2);
}

/// Radial one-form (lambda0)_p(v) = 1/2 <J p, v>.
template <typename DerivedP, typename DerivedV>
typename DerivedP::Scalar lambda0(const Eigen::MatrixBase<DerivedP>& p,
                                  const Eigen::MatrixBase<DerivedV>& v) {
  return typename DerivedP::Scalar(0.5) * j_mul(p).dot(v);
}

/// Determinant of four column vectors against the orientation (x1, y1, x2, y2).
template <typename Scalar>
Scalar det4(const Vec4<Scalar>& a, const Vec4<Scalar>& b, const Vec4<Scalar>& c,
            const Vec4<Scalar>& d) {
  Mat4<Scalar> m;
  m << a, b, c, d;
  return m.determinant();
}

/// Orthonormal frame (u1, u2, u3) of T_{-pole} S^3 such that the stereographic
/// chart built from it preserves the boundary orientation of S^3 = dB^4.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 3> stereographic_frame(const Vec4<Scalar>& pole) {
  Mat4<Scalar> basis;
  basis.col(0) = pole;
  int filled = 1;
  for (int k = 0; k < 4 && filled < 4; ++k) {
    Vec4<Scalar> e = Vec4<Scalar>::Unit(k);
    for (int j = 0; j < filled; ++j) e -= basis.col(j).dot(e) * basis.col(j);
    if (e.norm() > Scalar(0.1)) basis.col(filled++) = e.normalized();
  }
  // The tangent frame at -pole is positive iff det(-pole, u1, u2, u3) > 0.
  if (basis.determinant() > 0) basis.col(1) = -basis.col(1);
  return basis.template rightCols<3>();
}

/// Stereographic projection of p in S^3 from `pole`; -pole goes to the origin.
template <typename Scalar>
Vec3<Scalar> stereographic(const Vec4<Scalar>& p, const Vec4<Scalar>& pole,
                           const Eigen::Matrix<Scalar, 4, 3>& frame) {
  using std::abs;
  if (abs(p.norm() - 1) > Scalar(1e-9) || abs(pole.norm() - 1) > Scalar(1e-9))
    throw DomainError("stereographic: points must lie on the unit sphere");
  if ((p - pole).norm() < Scalar(1e-9))
    throw DomainError("stereographic: point coincides with the pole");
  return frame.transpose() * p / (Scalar(1) - pole.dot(p));
}

template <typename Scalar>
Vec3<Scalar> stereographic(const Vec4<Scalar>& p, const Vec4<Scalar>& pole) {
  return stereographic(p, pole, stereographic_frame(pole));
}

template <typename Scalar>
Vec4<Scalar> inverse_stereographic(const Vec3<Scalar>& y, const Vec4<Scalar>& pole,
                                   const Eigen::Matrix<Scalar, 4, 3>& frame) {
  const Scalar r2 = y.squaredNorm();
  return (Scalar(2) * (frame * y) + (r2 - Scalar(1)) * pole) / (r2 + Scalar(1));
}

template <typename Scalar>
Vec4<Scalar> inverse_stereographic(const Vec3<Scalar>& y, const Vec4<Scalar>& pole) {
  return inverse_stereographic(y, pole, stereographic_frame(pole));
}

/// The U(2) matrix with columns a and b read as vectors of C^2.
template <typename Scalar>
Complex2x2<Scalar> complex_columns(const Vec4<Scalar>& a, const Vec4<Scalar>& b) {
  Complex2x2<Scalar> m;
  m << z1(a), z1(b), z2(a), z2(b);
  return m;
}

}  // namespace reeb
