#include "reeb/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "reeb/optimize.hpp"

namespace reeb {

namespace {

Vec4d fd_gradient(const StarShapedSurface::ValueFn& f, const Vec4d& p, double h) {
  Vec4d g;
  for (int k = 0; k < 4; ++k) {
    Vec4d e = Vec4d::Unit(k) * h;
    g(k) = (f(p + e) - f(p - e)) / (2 * h);
  }
  return g;
}

Mat4d fd_hessian_from_gradient(const StarShapedSurface::GradientFn& g, const Vec4d& p, double h) {
  Mat4d H;
  for (int k = 0; k < 4; ++k) {
    Vec4d e = Vec4d::Unit(k) * h;
    H.col(k) = (g(p + e) - g(p - e)) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

Mat4d fd_hessian_from_value(const StarShapedSurface::ValueFn& f, const Vec4d& p, double h) {
  Mat4d H;
  const double f0 = f(p);
  for (int i = 0; i < 4; ++i) {
    const Vec4d ei = Vec4d::Unit(i) * h;
    H(i, i) = (f(p + ei) - 2 * f0 + f(p - ei)) / (h * h);
    for (int j = i + 1; j < 4; ++j) {
      const Vec4d ej = Vec4d::Unit(j) * h;
      H(i, j) = H(j, i) =
          (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * h * h);
    }
  }
  return H;
}

double pinching_margin(const StarShapedSurface& s, const Vec4d& p) {
  return principal_curvatures(s, p).margin;
}

}  // namespace

StarShapedSurface StarShapedSurface::round_sphere() {
  StarShapedSurface s = ellipsoid(1.0, 1.0);
  s.kind_ = SurfaceKind::RoundSphere;
  return s;
}

StarShapedSurface StarShapedSurface::ellipsoid(double r1, double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !std::isfinite(r1) || !std::isfinite(r2))
    throw DomainError("ellipsoid: semi-axes must be positive and finite");
  StarShapedSurface s;
  s.kind_ = SurfaceKind::Ellipsoid;
  s.r1_ = r1;
  s.r2_ = r2;
  const Vec4d w(1 / (r1 * r1), 1 / (r1 * r1), 1 / (r2 * r2), 1 / (r2 * r2));
  s.value_ = [w](const Vec4d& p) { return p.cwiseAbs2().dot(w); };
  s.gradient_ = [w](const Vec4d& p) -> Vec4d { return 2.0 * p.cwiseProduct(w); };
  s.hessian_ = [w](const Vec4d&) -> Mat4d { return (2.0 * w).asDiagonal(); };
  return s;
}

StarShapedSurface StarShapedSurface::implicit_polynomial(Polynomial4 poly) {
  StarShapedSurface s;
  s.kind_ = SurfaceKind::ImplicitPolynomial;
  auto shared = std::make_shared<const Polynomial4>(std::move(poly));
  if (!(shared->value(Vec4d::Zero()) < 1.0))
    throw DomainError("implicit polynomial: the origin must lie inside {F < 1}");
  s.poly_ = shared;
  s.value_ = [shared](const Vec4d& p) { return shared->value(p); };
  s.gradient_ = [shared](const Vec4d& p) { return shared->gradient(p); };
  s.hessian_ = [shared](const Vec4d& p) { return shared->hessian(p); };
  return s;
}

StarShapedSurface StarShapedSurface::generic(ValueFn value, GradientFn gradient, HessianFn hessian) {
  if (!value) throw DomainError("generic surface: a value oracle is required");
  StarShapedSurface s;
  s.kind_ = SurfaceKind::Generic;
  s.value_ = value;
  if (gradient) {
    s.gradient_ = gradient;
  } else {
    s.gradient_ = [value](const Vec4d& p) { return fd_gradient(value, p, 1e-5); };
  }
  if (hessian) {
    s.hessian_ = hessian;
  } else if (gradient) {
    s.hessian_ = [gradient](const Vec4d& p) { return fd_hessian_from_gradient(gradient, p, 1e-4); };
  } else {
    s.hessian_ = [value](const Vec4d& p) { return fd_hessian_from_value(value, p, 1e-4); };
  }
  return s;
}

std::string StarShapedSurface::description() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case SurfaceKind::RoundSphere: return "sphere";
    case SurfaceKind::Ellipsoid: os << "ellipsoid(" << r1_ << ", " << r2_ << ")"; return os.str();
    case SurfaceKind::ImplicitPolynomial: return "implicit-polynomial(" + poly_->to_string() + ")";
    case SurfaceKind::Generic: return "generic-implicit";
  }
  return "unknown";
}

Vec4d project_radial(const StarShapedSurface& surface, const Vec4d& p) {
  if (!p.allFinite() || p.norm() == 0.0) throw DomainError("project_radial: point must be nonzero");
  if (surface.is_quadratic_builtin()) return p / std::sqrt(surface.value(p));

  auto g = [&](double t) { return surface.value(t * p) - 1.0; };
  if (!(g(0.0) < 0.0)) throw DomainError("project_radial: origin is not inside the domain");
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) throw ConvergenceError("project_radial: ray does not meet the surface");
  }
  double t = 0.5 * (lo + hi);
  double val = g(t);
  for (int it = 0; it < 100; ++it) {
    if (val < 0.0) lo = t; else hi = t;
    if (std::abs(val) <= 1e-15 || hi - lo <= 1e-16 * hi) break;
    const double slope = surface.gradient(t * p).dot(p);
    double next = slope > 0.0 ? t - val / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    val = g(t);
  }
  if (std::abs(val) > 1e-12)
    throw ConvergenceError("project_radial: no convergence after 100 iterations");
  const Vec4d q = t * p;
  if (!(q.dot(surface.gradient(q)) > 0.0))
    throw DomainError("project_radial: surface is not star-shaped at this point");
  return q;
}

Vec4d normal(const StarShapedSurface& surface, const Vec4d& p) {
  const Vec4d g = surface.gradient(p);
  const double n = g.norm();
  if (!(n >= 1e-12)) throw DomainError("normal: gradient is degenerate");
  return g / n;
}

ShapeOperator shape_operator(const StarShapedSurface& surface, const Vec4d& p) {
  const Vec4d g = surface.gradient(p);
  const double gn = g.norm();
  if (!(gn >= 1e-12)) throw DomainError("shape_operator: gradient is degenerate");
  ShapeOperator out;
  out.point = p;
  out.normal = g / gn;
  const Vec4d m = mhat(out.normal);
  out.basis.col(0) = j_mul(out.normal);
  out.basis.col(1) = m;
  out.basis.col(2) = j_mul(m);
  // dN = (I - N N^T) Hess F / |grad F|; the projection drops out against tangent vectors.
  out.matrix = out.basis.transpose() * surface.hessian(p) * out.basis / gn;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

CurvatureData principal_curvatures(const StarShapedSurface& surface, const Vec4d& p) {
  const ShapeOperator A = shape_operator(surface, p);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A.matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("principal_curvatures: eigensolver failed");
  CurvatureData out;
  out.point = p;
  for (int k = 0; k < 3; ++k) {
    out.curvatures(k) = es.eigenvalues()(2 - k);
    out.directions.col(k) = A.basis * es.eigenvectors().col(2 - k);
  }
  out.margin = out.curvatures(1) + out.curvatures(2) - out.curvatures(0);
  return out;
}

std::vector<Vec4d> sphere_lattice(int n) {
  // Kronecker sequence with the generalized golden ratio for dimension 3
  // (real root of x^4 = x + 1), mapped to S^3 by an area-preserving chart.
  constexpr double g = 1.2207440846057596;
  const Eigen::Vector3d alpha(1 / g, 1 / (g * g), 1 / (g * g * g));
  constexpr double two_pi = 6.283185307179586;
  std::vector<Vec4d> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) {
    Eigen::Vector3d u = (Eigen::Vector3d::Constant(0.5) + k * alpha).unaryExpr([](double x) {
      return x - std::floor(x);
    });
    const double r1 = std::sqrt(1.0 - u(0));
    const double r2 = std::sqrt(u(0));
    out.emplace_back(r1 * std::cos(two_pi * u(1)), r1 * std::sin(two_pi * u(1)),
                     r2 * std::cos(two_pi * u(2)), r2 * std::sin(two_pi * u(2)));
  }
  return out;
}

PinchingReport pinching_scan(const StarShapedSurface& surface, int n_samples) {
  if (n_samples < 10) throw DomainError("pinching_scan: need at least 10 samples");
  const auto dirs = sphere_lattice(n_samples);
  std::vector<std::pair<double, Vec4d>> samples;
  samples.reserve(dirs.size());
  for (const auto& d : dirs) {
    const Vec4d p = project_radial(surface, d);
    samples.emplace_back(pinching_margin(surface, p), p);
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(4, order.size()), order.end(),
                    [&](std::size_t a, std::size_t b) { return samples[a].first < samples[b].first; });

  PinchingReport out;
  out.samples = n_samples;
  out.min_margin = samples[order[0]].first;
  out.argmin = samples[order[0]].second;

  // Polish the best lattice samples by a local search in a tangent chart.
  for (std::size_t r = 0; r < std::min<std::size_t>(4, order.size()); ++r) {
    const Vec4d base = samples[order[r]].second;
    const ShapeOperator frame = shape_operator(surface, base);
    const auto chart = [&](const Eigen::Vector3d& a) -> Vec4d {
      return project_radial(surface, base + frame.basis * a);
    };
    const auto res = nelder_mead<3>(
        [&](const Eigen::Vector3d& a) {
          if (a.norm() > 0.5) return 1e300;
          return pinching_margin(surface, chart(a));
        },
        Eigen::Vector3d::Zero(), 0.1, 600);
    if (res.value < out.min_margin) {
      out.min_margin = res.value;
      out.argmin = chart(res.x);
    }
  }
  out.pass = out.min_margin >= -1e-9;
  return out;
}

Vec4d reeb_field(const StarShapedSurface& surface, const Vec4d& p) {
  const Vec4d n = normal(surface, p);
  const double s = p.dot(n);
  if (!(s > 0.0)) throw DomainError("reeb_field: <p, N> <= 0, surface is not star-shaped here");
  return (2.0 / s) * j_mul(n);
}

namespace {
Vec4d reeb_extension(const StarShapedSurface& surface, const Vec4d& p) {
  const Vec4d g = surface.gradient(p);
  const double s = p.dot(g);
  if (!(s > 0.0)) throw DomainError("reeb_field: <p, grad F> <= 0");
  return (2.0 / s) * j_mul(g);
}
}  // namespace

Mat4d reeb_jacobian(const StarShapedSurface& surface, const Vec4d& p) {
  const Vec4d g = surface.gradient(p);
  const Mat4d H = surface.hessian(p);
  const double s = p.dot(g);
  if (!(s > 0.0)) throw DomainError("reeb_jacobian: <p, grad F> <= 0");
  const Mat4d J = j_matrix<double>();
  const Vec4d ds = g + H * p;
  return (2.0 / s) * J * H - (2.0 / (s * s)) * (J * g) * ds.transpose();
}

Mat4d reeb_jacobian_fd(const StarShapedSurface& surface, const Vec4d& p, double h) {
  Mat4d D;
  for (int k = 0; k < 4; ++k) {
    const Vec4d e = Vec4d::Unit(k) * h;
    D.col(k) = (reeb_extension(surface, p + e) - reeb_extension(surface, p - e)) / (2 * h);
  }
  return D;
}

ContactFrame contact_frame(const StarShapedSurface& surface, const Vec4d& p) {
  ContactFrame f;
  f.point = p;
  f.normal = normal(surface, p);
  const double s = p.dot(f.normal);
  if (!(s > 0.0)) throw DomainError("contact_frame: <p, N> <= 0, surface is not star-shaped here");
  f.phi = 2.0 / s;
  f.m = mhat(f.normal);
  f.jm = j_mul(f.m);
  const Vec4d jn = j_mul(f.normal);
  const Vec4d jp = j_mul(p);
  // pi(v) = v + c J N with c chosen so that lambda(pi(v)) = 0; <Jp, JN> = <p, N>.
  f.xi_m = f.m - (jp.dot(f.m) / s) * jn;
  f.xi_jm = f.jm - (jp.dot(f.jm) / s) * jn;
  return f;
}

Vec2d trivialize(const ContactFrame& frame, const Vec4d& v) {
  const double scale = std::max(1.0, v.norm());
  if (std::abs(lambda0(frame.point, v)) > 1e-8 * scale || std::abs(frame.normal.dot(v)) > 1e-8 * scale)
    throw DomainError("trivialize: vector is not in the contact plane");
  return {frame.m.dot(v), frame.jm.dot(v)};
}

Vec4d project_to_xi(const ContactFrame& frame, const Vec4d& v) {
  const Vec4d w = v - frame.normal.dot(v) * frame.normal;
  // lambda(X) = 1, so the Reeb component of w is lambda(w).
  return w - lambda0(frame.point, w) * frame.reeb();
}

}  // namespace reeb
