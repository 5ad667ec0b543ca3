#include "reeb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "reeb/ode.hpp"

namespace reeb {

namespace {

using Vec12 = Eigen::Matrix<double, 12, 1>;

OdeOptions flow_options(double tol) {
  OdeOptions opt;
  opt.atol = tol;
  opt.rtol = tol;
  return opt;
}

Vec4d flow_with_step(const StarShapedSurface& surface, const Vec4d& p0, double t0, double t1,
                     double tol, double& h) {
  auto rhs = [&](const Vec4d& p) { return reeb_field(surface, p); };
  auto post = [&](Vec4d& p) { p = project_radial(surface, p); };
  const Vec4d p = integrate_dp45<4>(rhs, p0, t0, t1, flow_options(tol), post, h);
  if (std::abs(surface.value(p) - 1.0) > 1e-10)
    throw ConvergenceError("flow: trajectory drifted off the surface");
  return p;
}

// Smallest a with a / b = x for b <= 64, or 0 if x is not such a rational.
int rational_numerator(double x) {
  for (int b = 1; b <= 64; ++b) {
    const double a = std::round(x * b);
    if (a >= 1 && std::abs(a / b - x) < 1e-12 * std::max(1.0, x)) return static_cast<int>(a);
  }
  return 0;
}

PeriodicOrbit closed_form_orbit(const StarShapedSurface& surface, const Vec4d& p0) {
  const double r1 = surface.r1(), r2 = surface.r2();
  const double t1 = std::numbers::pi * r1 * r1;
  const double t2 = std::numbers::pi * r2 * r2;
  const double a1 = std::abs(z1(p0)), a2 = std::abs(z2(p0));
  double period;
  if (a2 < 1e-12) {
    period = t1;
  } else if (a1 < 1e-12) {
    period = t2;
  } else {
    const int a = rational_numerator(t2 / t1);
    if (a == 0)
      throw ConvergenceError(
          "find_periodic_orbit: the orbit through this point is not closed (irrational axis ratio)");
    period = a * t1;
  }
  PeriodicOrbit orbit{surface, p0, period, {}, 0.0, {}};
  const std::complex<double> w1(0.0, 2.0 / (r1 * r1)), w2(0.0, 2.0 / (r2 * r2));
  const std::complex<double> c1 = z1(p0), c2 = z2(p0);
  orbit.closed_form = [=](double t) {
    return from_complex(std::exp(w1 * t) * c1, std::exp(w2 * t) * c2);
  };
  return orbit;
}

void fill_samples(PeriodicOrbit& orbit, int n, double tol) {
  if (n < 4) throw DomainError("periodic orbit: need at least 4 samples");
  n += n % 2;  // even, for composite Simpson
  orbit.samples.clear();
  orbit.samples.reserve(n + 1);
  const double dt = orbit.period / n;
  Vec4d p = orbit.base;
  double h = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    if (orbit.closed_form) {
      p = orbit.closed_form(t);
    } else if (i > 0) {
      p = flow_with_step(orbit.surface, p, (i - 1) * dt, t, tol, h);
    }
    orbit.samples.push_back({t, p, reeb_field(orbit.surface, p)});
  }
  if (orbit.closed_form) {
    double h2 = 0.0;
    const Vec4d end = flow_with_step(orbit.surface, orbit.base, 0.0, orbit.period, tol, h2);
    orbit.closure_residual = (end - orbit.base).norm();
  } else {
    orbit.closure_residual = (orbit.samples.back().p - orbit.base).norm();
  }
}

}  // namespace

Vec4d flow(const StarShapedSurface& surface, const Vec4d& p0, double t, double tol) {
  if (t == 0.0) return p0;
  double h = 0.0;
  return flow_with_step(surface, p0, 0.0, t, tol, h);
}

Vec4d PeriodicOrbit::position(double t) const {
  if (closed_form) return closed_form(t);
  if (samples.size() < 2) throw DomainError("PeriodicOrbit: no samples");
  t = std::fmod(t, period);
  if (t < 0) t += period;
  const double dt = period / static_cast<double>(samples.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(t / dt), samples.size() - 2);
  const double s = (t - samples[i].t) / dt;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  const Vec4d q = h00 * samples[i].p + h10 * dt * samples[i].reeb + h01 * samples[i + 1].p +
                  h11 * dt * samples[i + 1].reeb;
  return project_radial(surface, q);
}

PeriodicOrbit find_periodic_orbit(const StarShapedSurface& surface, const Vec4d& guess,
                                  double period_guess, const OrbitOptions& options) {
  if (!(period_guess > 0.0)) throw DomainError("find_periodic_orbit: period guess must be positive");
  const Vec4d p0 = project_radial(surface, guess);

  if (surface.is_quadratic_builtin()) {
    PeriodicOrbit orbit = closed_form_orbit(surface, p0);
    fill_samples(orbit, options.n_samples, options.tol);
    return orbit;
  }

  // Section: p0 + span(M, JM), which is orthogonal to X(p0).
  const ContactFrame frame = contact_frame(surface, p0);
  const Vec4d xhat = frame.reeb().normalized();
  const Eigen::Matrix<double, 4, 3> chart = (Eigen::Matrix<double, 4, 3>() << frame.m, frame.jm, xhat).finished();

  auto start_point = [&](const Eigen::Vector3d& u) {
    return project_radial(surface, p0 + u(0) * frame.m + u(1) * frame.jm);
  };
  auto residual = [&](const Eigen::Vector3d& u) -> Eigen::Vector3d {
    const Vec4d q = start_point(u);
    return chart.transpose() * (flow(surface, q, u(2), options.tol) - q);
  };

  Eigen::Vector3d u(0.0, 0.0, period_guess);
  Eigen::Vector3d r = residual(u);
  constexpr double fd_step = 1e-6;
  bool converged = false;
  for (int it = 0; it < options.max_newton; ++it) {
    const Vec4d q = start_point(u);
    const double closure = (flow(surface, q, u(2), options.tol) - q).norm();
    if (closure < 1e-9) {
      converged = true;
      break;
    }
    Eigen::Matrix3d jac;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d du = Eigen::Vector3d::Zero();
      du(k) = fd_step;
      jac.col(k) = (residual(u + du) - residual(u - du)) / (2 * fd_step);
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-8);
    if (svd.singularValues()(0) == 0.0)
      throw ConvergenceError("find_periodic_orbit: degenerate section");
    Eigen::Vector3d step = svd.solve(-r);
    // Damped update: accept the first step length that reduces the residual.
    double alpha = 1.0;
    Eigen::Vector3d trial_r;
    for (; alpha > 1e-3; alpha *= 0.5) {
      const Eigen::Vector3d trial = u + alpha * step;
      if (!(trial(2) > 0.0)) continue;
      trial_r = residual(trial);
      if (trial_r.norm() < r.norm()) break;
    }
    u += alpha * step;
    r = residual(u);
    if (!(u(2) > 0.0)) throw ConvergenceError("find_periodic_orbit: period became nonpositive");
  }
  if (!converged) throw ConvergenceError("find_periodic_orbit: no convergence in Newton budget");

  PeriodicOrbit orbit{surface, start_point(u), u(2), {}, 0.0, {}};
  fill_samples(orbit, options.n_samples, options.tol);
  if (orbit.closure_residual >= 1e-8)
    throw ConvergenceError("find_periodic_orbit: closure residual above 1e-8");
  return orbit;
}

PeriodicOrbit resample(const PeriodicOrbit& orbit, int n_samples, double tol) {
  PeriodicOrbit out{orbit.surface, orbit.base, orbit.period, {}, 0.0, orbit.closed_form};
  fill_samples(out, n_samples, tol);
  return out;
}

ActionReport action(const PeriodicOrbit& orbit) {
  const std::size_t n = orbit.samples.size() - 1;
  if (n < 2 || n % 2 != 0) throw DomainError("action: need an even number of sample intervals");
  const double dt = orbit.period / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * lambda0(orbit.samples[i].p, orbit.samples[i].reeb);
  }
  ActionReport rep;
  rep.period = orbit.period;
  rep.quadrature = sum * dt / 3.0;
  rep.difference = std::abs(rep.quadrature - rep.period);
  if (rep.difference > 1e-6) throw VerificationError("action: quadrature disagrees with the period");
  return rep;
}

SL2Path linearized_path(const PeriodicOrbit& orbit, double tol) {
  const StarShapedSurface& surface = orbit.surface;
  auto rhs = [&](const Vec12& y) {
    const Vec4d p = y.head<4>();
    const Mat4d dx = reeb_jacobian(surface, p);
    Vec12 out;
    out << reeb_field(surface, p), dx * y.segment<4>(4), dx * y.segment<4>(8);
    return out;
  };
  auto post = [&](Vec12& y) { y.head<4>() = project_radial(surface, y.head<4>().eval()); };

  SL2Path path;
  const ContactFrame f0 = contact_frame(surface, orbit.samples.front().p);
  Vec12 y;
  y << orbit.samples.front().p, f0.xi_m, f0.xi_jm;
  double h = 0.0;
  const OdeOptions opt = flow_options(tol);
  for (std::size_t i = 0; i < orbit.samples.size(); ++i) {
    const OrbitSample& s = orbit.samples[i];
    if (i > 0) {
      y = integrate_dp45<12>(rhs, y, orbit.samples[i - 1].t, s.t, opt, post, h);
      y.head<4>() = s.p;
    }
    const ContactFrame frame = contact_frame(surface, s.p);
    const Vec4d w1 = project_to_xi(frame, y.segment<4>(4));
    const Vec4d w2 = project_to_xi(frame, y.segment<4>(8));
    Mat2d phi;
    phi << trivialize(frame, w1), trivialize(frame, w2);
    const double det = phi.determinant();
    if (!(std::abs(det - 1.0) <= 1e-4))
      throw ConvergenceError("linearized_path: determinant drift above 1e-4, refine the orbit samples");
    path.max_det_correction = std::max(path.max_det_correction, std::abs(det - 1.0));
    const double scale = 1.0 / std::sqrt(det);
    phi *= scale;
    y.segment<4>(4) = scale * w1;
    y.segment<4>(8) = scale * w2;
    if (!path.matrices.empty()) {
      const double jump = (phi - path.matrices.back()).operatorNorm();
      if (jump >= 0.5)
        throw ConvergenceError("linearized_path: samples too coarse for rotation tracking");
    }
    path.times.push_back(s.t);
    path.matrices.push_back(phi);
  }
  return path;
}

void write_orbit_csv(std::ostream& os, const PeriodicOrbit& orbit, const SL2Path* path) {
  if (path && path->size() != orbit.samples.size())
    throw DomainError("write_orbit_csv: path and orbit sample counts differ");
  os.precision(17);
  os << "t,x1,y1,x2,y2";
  if (path) os << ",phi11,phi12,phi21,phi22";
  os << '\n';
  for (std::size_t i = 0; i < orbit.samples.size(); ++i) {
    const OrbitSample& s = orbit.samples[i];
    os << s.t << ',' << s.p(0) << ',' << s.p(1) << ',' << s.p(2) << ',' << s.p(3);
    if (path) {
      const Mat2d& m = path->matrices[i];
      os << ',' << m(0, 0) << ',' << m(0, 1) << ',' << m(1, 0) << ',' << m(1, 1);
    }
    os << '\n';
  }
}

}  // namespace reeb
