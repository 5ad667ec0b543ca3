#pragma once

// Reeb flow, periodic orbits and the linearized flow on the contact plane.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "reeb/sl2_path.hpp"
#include "reeb/surface.hpp"

namespace reeb {

/// Default local tolerance of the Reeb-flow integrator.
inline constexpr double kFlowTolerance = 1e-10;

/// Reeb flow Psi_t(p0) with radial re-projection onto Sigma after every step.
Vec4d flow(const StarShapedSurface& surface, const Vec4d& p0, double t, double tol = kFlowTolerance);

struct OrbitSample {
  double t = 0.0;
  Vec4d p;
  Vec4d reeb;
};

struct PeriodicOrbit {
  StarShapedSurface surface;
  Vec4d base;
  double period = 0.0;
  /// Uniform samples t_i = i T / n, i = 0..n; the last one closes the loop.
  std::vector<OrbitSample> samples;
  double closure_residual = 0.0;
  /// Exact parametrization t -> gamma(t) when one is known (ellipsoids).
  std::function<Vec4d(double)> closed_form;

  /// Position at time t in [0, T] (closed form or cubic Hermite on the samples).
  Vec4d position(double t) const;
};

struct OrbitOptions {
  double tol = kFlowTolerance;
  int n_samples = 512;
  int max_newton = 50;
};

/// Shooting on a hyperplane section through the radial projection of `guess`,
/// normal to X there. Ellipsoid orbits are returned in closed form.
PeriodicOrbit find_periodic_orbit(const StarShapedSurface& surface, const Vec4d& guess,
                                  double period_guess, const OrbitOptions& options = {});

/// Resamples an orbit on a finer uniform grid (the period is kept).
PeriodicOrbit resample(const PeriodicOrbit& orbit, int n_samples, double tol = kFlowTolerance);

struct ActionReport {
  double period = 0.0;
  double quadrature = 0.0;  // integral of gamma^* lambda
  double difference = 0.0;
};

ActionReport action(const PeriodicOrbit& orbit);

/// Phi(t) = T_{Psi_t p} o dPsi_t(p) o T_p^{-1} on the orbit's sample times.
SL2Path linearized_path(const PeriodicOrbit& orbit, double tol = kFlowTolerance);

/// CSV with columns t,x1,y1,x2,y2 and, when a path is given, phi11,phi12,phi21,phi22.
void write_orbit_csv(std::ostream& os, const PeriodicOrbit& orbit, const SL2Path* path = nullptr);

}  // namespace reeb
