#pragma once

// Star-shaped hypersurfaces Sigma = F^{-1}(1) in R^4 and their pointwise geometry:
// normal, shape operator, principal curvatures, Reeb field, contact plane and the
// global symplectic trivialization of the contact plane.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reeb/core4.hpp"
#include "reeb/polynomial.hpp"

namespace reeb {

enum class SurfaceKind { RoundSphere, Ellipsoid, ImplicitPolynomial, Generic };

class StarShapedSurface {
 public:
  using ValueFn = std::function<double(const Vec4d&)>;
  using GradientFn = std::function<Vec4d(const Vec4d&)>;
  using HessianFn = std::function<Mat4d(const Vec4d&)>;

  static StarShapedSurface round_sphere();
  /// F(z) = |z1|^2 / r1^2 + |z2|^2 / r2^2.
  static StarShapedSurface ellipsoid(double r1, double r2);
  static StarShapedSurface implicit_polynomial(Polynomial4 poly);
  /// Missing derivative oracles are replaced by central differences
  /// (step 1e-5 for the gradient, 1e-4 for the Hessian).
  static StarShapedSurface generic(ValueFn value, GradientFn gradient = {}, HessianFn hessian = {});

  double value(const Vec4d& p) const { return value_(p); }
  Vec4d gradient(const Vec4d& p) const { return gradient_(p); }
  Mat4d hessian(const Vec4d& p) const { return hessian_(p); }

  SurfaceKind kind() const { return kind_; }
  /// Semi-axes of the builtin ellipsoid family (1, 1 for the sphere).
  double r1() const { return r1_; }
  double r2() const { return r2_; }
  /// Sphere and ellipsoids: F is homogeneous of degree 2, radial projection is closed-form.
  bool is_quadratic_builtin() const {
    return kind_ == SurfaceKind::RoundSphere || kind_ == SurfaceKind::Ellipsoid;
  }
  const Polynomial4* polynomial() const { return poly_.get(); }
  std::string description() const;

 private:
  StarShapedSurface() = default;

  SurfaceKind kind_ = SurfaceKind::Generic;
  double r1_ = 1.0;
  double r2_ = 1.0;
  std::shared_ptr<const Polynomial4> poly_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

/// Shape operator of Sigma at p in the orthonormal tangent basis (J N, M, J M).
struct ShapeOperator {
  Vec4d point;
  Vec4d normal;
  Eigen::Matrix<double, 4, 3> basis;
  Eigen::Matrix3d matrix;

  /// Second fundamental form II(u, v) = <A u, v> for ambient tangent vectors.
  double second_fundamental_form(const Vec4d& u, const Vec4d& v) const {
    return (matrix * (basis.transpose() * u)).dot(basis.transpose() * v);
  }
};

struct CurvatureData {
  Vec4d point;
  Eigen::Vector3d curvatures;             // a >= b >= c
  Eigen::Matrix<double, 4, 3> directions;  // matching unit tangent vectors
  double margin = 0.0;                     // b + c - a
};

struct PinchingReport {
  double min_margin = 0.0;
  Vec4d argmin;
  int samples = 0;
  bool pass = false;
};

/// Frame of the contact plane xi_p = ker(lambda) cap T_p Sigma.
struct ContactFrame {
  Vec4d point;
  Vec4d normal;  // N
  Vec4d m;       // M = Mhat N
  Vec4d jm;      // J M
  Vec4d xi_m;    // pi(M)
  Vec4d xi_jm;   // pi(J M)
  double phi = 0.0;  // 2 / <p, N>

  Vec4d reeb() const { return phi * j_mul(normal); }
};

Vec4d project_radial(const StarShapedSurface& surface, const Vec4d& p);
Vec4d normal(const StarShapedSurface& surface, const Vec4d& p);
ShapeOperator shape_operator(const StarShapedSurface& surface, const Vec4d& p);
CurvatureData principal_curvatures(const StarShapedSurface& surface, const Vec4d& p);
PinchingReport pinching_scan(const StarShapedSurface& surface, int n_samples = 4096);

Vec4d reeb_field(const StarShapedSurface& surface, const Vec4d& p);
/// Ambient Jacobian of the Reeb field extended off Sigma by X = 2 J grad F / <p, grad F>.
Mat4d reeb_jacobian(const StarShapedSurface& surface, const Vec4d& p);
/// Same Jacobian by central differences of the extended field.
Mat4d reeb_jacobian_fd(const StarShapedSurface& surface, const Vec4d& p, double h = 1e-5);

ContactFrame contact_frame(const StarShapedSurface& surface, const Vec4d& p);
/// Coordinates of v in the basis (pi M, pi J M). Throws if v is not in xi.
Vec2d trivialize(const ContactFrame& frame, const Vec4d& v);
/// Removes the N and Reeb components of v, leaving its xi component.
Vec4d project_to_xi(const ContactFrame& frame, const Vec4d& v);

/// Deterministic low-discrepancy points on the unit sphere S^3.
std::vector<Vec4d> sphere_lattice(int n);

}  // namespace reeb
