#include "reeb/knot.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "reeb/parallel.hpp"

namespace reeb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double t) {
  double w = std::fmod(t, kTwoPi);
  return w < 0 ? w + kTwoPi : w;
}

std::vector<Vec4d> sample_curve(const TransverseKnot& knot, int n) {
  std::vector<Vec4d> out(n);
  for (int i = 0; i < n; ++i) out[i] = knot.position(kTwoPi * i / n);
  return out;
}

// Knot and its pi M pushoff, both radially normalized to the unit sphere. Radial
// projection to Sigma followed by normalization is plain normalization.
struct SpherePair {
  std::vector<Vec4d> knot;
  std::vector<Vec4d> pushoff;
  double min_separation = std::numeric_limits<double>::infinity();
};

SpherePair sphere_pair(const TransverseKnot& knot, int n, double eps, bool separation) {
  SpherePair out;
  out.knot.resize(n);
  out.pushoff.resize(n);
  std::vector<Vec4d> raw_knot(n), raw_push(n);
  for (int i = 0; i < n; ++i) {
    const Vec4d g = project_radial(knot.surface(), knot.position(kTwoPi * i / n));
    const ContactFrame frame = contact_frame(knot.surface(), g);
    raw_knot[i] = g;
    raw_push[i] = project_radial(knot.surface(), g + eps * frame.xi_m);
    out.knot[i] = g.normalized();
    out.pushoff[i] = raw_push[i].normalized();
  }
  if (separation) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.min_separation = std::min(out.min_separation, (raw_knot[i] - raw_push[j]).norm());
  }
  return out;
}

double pole_distance(const Vec4d& pole, const SpherePair& pair) {
  double d = std::numeric_limits<double>::infinity();
  for (const Vec4d& x : pair.knot) d = std::min(d, (x - pole).norm());
  for (const Vec4d& x : pair.pushoff) d = std::min(d, (x - pole).norm());
  return d;
}

double linking_at(const TransverseKnot& knot, const Vec4d& pole, int n, double eps) {
  const SpherePair pair = sphere_pair(knot, n, eps, false);
  const auto frame = stereographic_frame(pole);
  std::vector<Vec3d> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = stereographic(pair.knot[i], pole, frame);
    b[i] = stereographic(pair.pushoff[i], pole, frame);
  }
  return gauss_linking(a, b);
}

// Adaptive doubling of the node count until two successive values agree to 1e-2.
double converged_linking(const TransverseKnot& knot, const Vec4d& pole, double eps,
                         const LinkingOptions& opt, int& n_used) {
  int n = opt.n_quad;
  double prev = linking_at(knot, pole, n, eps);
  while (2 * n <= opt.max_quad) {
    n *= 2;
    const double cur = linking_at(knot, pole, n, eps);
    const double delta = std::abs(cur - prev);
    prev = cur;
    if (delta < 1e-2) break;
  }
  n_used = n;
  return prev;
}

}  // namespace

TransverseKnot TransverseKnot::analytic(StarShapedSurface surface, CurveFn gamma, CurveFn d_gamma,
                                        CurveFn dd_gamma, std::string name) {
  if (!gamma || !d_gamma || !dd_gamma)
    throw DomainError("TransverseKnot: analytic knots need the curve and two derivatives");
  TransverseKnot k(std::move(surface), std::move(name));
  k.gamma_ = std::move(gamma);
  k.d_gamma_ = std::move(d_gamma);
  k.dd_gamma_ = std::move(dd_gamma);
  return k;
}

TransverseKnot TransverseKnot::from_samples(StarShapedSurface surface, std::vector<Vec4d> samples,
                                            std::string name) {
  for (const Vec4d& s : samples)
    if (!s.allFinite()) throw DomainError("TransverseKnot: non-finite sample");
  TransverseKnot k(std::move(surface), std::move(name));
  k.spline_ = std::make_shared<const PeriodicSpline>(std::move(samples), kTwoPi);
  return k;
}

Vec4d TransverseKnot::position(double t) const { return spline_ ? spline_->value(t) : gamma_(t); }

Vec4d TransverseKnot::derivative(double t) const {
  return spline_ ? spline_->derivative(t) : d_gamma_(t);
}

Vec4d TransverseKnot::second_derivative(double t) const {
  return spline_ ? spline_->second_derivative(t) : dd_gamma_(t);
}

TransverseKnot TransverseKnot::reversed() const {
  auto self = std::make_shared<const TransverseKnot>(*this);
  return analytic(
      surface_, [self](double t) { return self->position(kTwoPi - t); },
      [self](double t) { return Vec4d(-self->derivative(kTwoPi - t)); },
      [self](double t) { return self->second_derivative(kTwoPi - t); }, name_ + "-reversed");
}

TransverseKnot TransverseKnot::reparametrized(std::function<double(double)> sigma,
                                              std::function<double(double)> d_sigma,
                                              std::function<double(double)> dd_sigma) const {
  auto self = std::make_shared<const TransverseKnot>(*this);
  return analytic(
      surface_, [self, sigma](double t) { return self->position(sigma(t)); },
      [self, sigma, d_sigma](double t) { return Vec4d(d_sigma(t) * self->derivative(sigma(t))); },
      [self, sigma, d_sigma, dd_sigma](double t) {
        const double s = sigma(t), ds = d_sigma(t);
        return Vec4d(ds * ds * self->second_derivative(s) + dd_sigma(t) * self->derivative(s));
      },
      name_ + "-reparametrized");
}

TransverseKnot hopf_fiber() {
  return TransverseKnot::analytic(
      StarShapedSurface::round_sphere(),
      [](double t) { return Vec4d(std::cos(t), std::sin(t), 0, 0); },
      [](double t) { return Vec4d(-std::sin(t), std::cos(t), 0, 0); },
      [](double t) { return Vec4d(-std::cos(t), -std::sin(t), 0, 0); }, "hopf");
}

TransverseKnot torus_orbit_knot(int p, int q, double r1, double r2) {
  if (!(r1 > 0 && r2 > 0)) throw DomainError("torus_orbit_knot: radii must be positive");
  if (p == 0 || q == 0) throw DomainError("torus_orbit_knot: p and q must be nonzero");
  const double a = r1 / std::sqrt(2.0), b = r2 / std::sqrt(2.0);
  using C = std::complex<double>;
  const double fp = p, fq = q;
  auto curve = [=](int order) {
    return [=](double t) {
      const C u = std::pow(C(0, fp), order) * a * std::exp(C(0, fp * t));
      const C w = std::pow(C(0, fq), order) * b * std::exp(C(0, fq * t));
      return from_complex(u, w);
    };
  };
  std::ostringstream name;
  name << "torus-orbit(" << p << "," << q << ")";
  return TransverseKnot::analytic(StarShapedSurface::ellipsoid(r1, r2), curve(0), curve(1), curve(2),
                                  name.str());
}

TransverseKnot knot_from_orbit(const PeriodicOrbit& orbit) {
  auto o = std::make_shared<const PeriodicOrbit>(orbit);
  const double c = orbit.period / kTwoPi;
  return TransverseKnot::analytic(
      orbit.surface, [o, c](double t) { return o->position(c * wrap_2pi(t)); },
      [o, c](double t) { return Vec4d(c * reeb_field(o->surface, o->position(c * wrap_2pi(t)))); },
      [o, c](double t) {
        const Vec4d p = o->position(c * wrap_2pi(t));
        return Vec4d(c * c * (reeb_jacobian(o->surface, p) * reeb_field(o->surface, p)));
      },
      "orbit");
}

TransverseKnot read_knot_csv(std::istream& is, StarShapedSurface surface, std::string name) {
  std::vector<double> ts;
  std::vector<Vec4d> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double v[5];
    int got = 0;
    while (got < 5 && row >> v[got]) ++got;
    if (got == 0 && line_no == 1) continue;  // header
    if (got != 5)
      throw DomainError("knot CSV line " + std::to_string(line_no) + ": expected t,x1,y1,x2,y2");
    ts.push_back(v[0]);
    pts.emplace_back(v[1], v[2], v[3], v[4]);
  }
  if (pts.size() < 8) throw DomainError("knot CSV: need at least 8 samples");
  // A repeated closing sample is dropped.
  if ((pts.back() - pts.front()).norm() < 1e-12) {
    pts.pop_back();
    ts.pop_back();
  }
  const double dt = ts[1] - ts[0];
  if (!(dt > 0)) throw DomainError("knot CSV: t must increase");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (std::abs(ts[i] - ts[i - 1] - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
      throw DomainError("knot CSV: t must be uniformly spaced");
  return TransverseKnot::from_samples(std::move(surface), std::move(pts), std::move(name));
}

double check_transverse(const TransverseKnot& knot, int n_samples) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double t = kTwoPi * i / n_samples;
    const Vec4d d = knot.derivative(t);
    best = std::min(best, lambda0(knot.position(t), d) / d.norm());
  }
  return best;
}

double embedding_margin(const TransverseKnot& knot, int n_samples) {
  const std::vector<Vec4d> pts = sample_curve(knot, n_samples);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i)
    for (int j = i + 1; j < n_samples; ++j) {
      const double sep = kTwoPi * (j - i) / n_samples;
      if (std::min(sep, kTwoPi - sep) <= 0.1) continue;
      best = std::min(best, (pts[i] - pts[j]).norm());
    }
  return best;
}

double gauss_linking(const std::vector<Vec3d>& a, const std::vector<Vec3d>& b) {
  const std::size_t na = a.size(), nb = b.size();
  if (na < 5 || nb < 5) throw DomainError("gauss_linking: need at least 5 nodes per curve");
  // Derivatives per node index (fourth-order periodic differences); the node spacing
  // cancels against the quadrature weights.
  auto diff = [](const std::vector<Vec3d>& c) {
    const std::size_t n = c.size();
    std::vector<Vec3d> d(n);
    for (std::size_t i = 0; i < n; ++i)
      d[i] = (-c[(i + 2) % n] + 8.0 * c[(i + 1) % n] - 8.0 * c[(i + n - 1) % n] +
              c[(i + n - 2) % n]) /
             12.0;
    return d;
  };
  const std::vector<Vec3d> da = diff(a), db = diff(b);
  // det(da_i, db_j, a_i - b_j) = db_j . (a_i x da_i) - da_i . (db_j x b_j)
  std::vector<Vec3d> ea(na), cb(nb);
  for (std::size_t i = 0; i < na; ++i) ea[i] = a[i].cross(da[i]);
  for (std::size_t j = 0; j < nb; ++j) cb[j] = db[j].cross(b[j]);

  constexpr std::size_t chunk = 64;
  std::vector<double> partial((na + chunk - 1) / chunk, 0.0);
  parallel_chunks(na, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3d ai = a[i], dai = da[i], eai = ea[i];
      for (std::size_t j = 0; j < nb; ++j) {
        const Vec3d d = ai - b[j];
        const double r2 = d.squaredNorm();
        acc += (db[j].dot(eai) - dai.dot(cb[j])) / (r2 * std::sqrt(r2));
      }
    }
    partial[c] = acc;
  });
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum / (4.0 * std::numbers::pi);
}

LinkingComputation self_linking_with_pole(const TransverseKnot& knot, const Vec4d& pole,
                                          const LinkingOptions& opt) {
  if (!(opt.epsilon > 0.0)) throw DomainError("self_linking: epsilon must be positive");
  if (opt.n_quad < 16) throw DomainError("self_linking: n_quad must be at least 16");
  if (check_transverse(knot) <= 0.0)
    throw DomainError("self_linking: knot is not positively transverse to the contact planes");
  if (embedding_margin(knot) <= 1e-4) throw DomainError("self_linking: knot is not embedded");

  LinkingComputation out;
  out.epsilon = opt.epsilon;
  out.pole = pole.normalized();
  const SpherePair coarse = sphere_pair(knot, std::min(opt.n_quad, 1024), opt.epsilon, true);
  out.min_separation = coarse.min_separation;
  if (out.min_separation < opt.epsilon / 10)
    throw VerificationError("self_linking: pushoff collides with the knot");
  out.pole_distance = pole_distance(out.pole, coarse);
  if (out.pole_distance <= 0.3) throw DomainError("self_linking: pole too close to the curves");

  out.raw = converged_linking(knot, out.pole, opt.epsilon, opt, out.n_quad);
  out.value = static_cast<int>(std::lround(out.raw));
  out.residual = std::abs(out.raw - out.value);
  if (out.residual >= 0.1)
    throw ConvergenceError("self_linking: Gauss integral residual above 0.1");

  if (opt.check_half_epsilon) {
    int n_half = 0;
    out.raw_half_epsilon = converged_linking(knot, out.pole, opt.epsilon / 2, opt, n_half);
    out.value_half_epsilon = static_cast<int>(std::lround(out.raw_half_epsilon));
    if (out.value_half_epsilon != out.value)
      throw VerificationError("self_linking: value changes when epsilon is halved");
  } else {
    out.raw_half_epsilon = out.raw;
    out.value_half_epsilon = out.value;
  }
  return out;
}

LinkingComputation self_linking(const TransverseKnot& knot, const LinkingOptions& opt) {
  if (opt.n_poles < 1) throw DomainError("self_linking: need at least one candidate pole");
  const SpherePair coarse = sphere_pair(knot, 256, opt.epsilon, false);
  Vec4d best = Vec4d::Zero();
  double best_d = -1.0;
  for (const Vec4d& c : sphere_lattice(opt.n_poles)) {
    const double d = pole_distance(c, coarse);
    if (d > best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d <= 0.3) throw DomainError("self_linking: no admissible pole found");
  return self_linking_with_pole(knot, best, opt);
}

CurvatureIntegral total_curvature(const TransverseKnot& knot) {
  auto integrand = [&](double t) {
    const Vec4d d1 = knot.derivative(t), d2 = knot.second_derivative(t);
    const double s = d1.norm();
    // |T'| with T = gamma' / |gamma'|.
    return (d2 * s * s - d1 * d1.dot(d2)).norm() / (s * s * s);
  };
  int n = 1024;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += integrand(kTwoPi * i / n);
  double value = sum * kTwoPi / n;
  double delta = std::numeric_limits<double>::infinity();
  while (n < (1 << 21)) {
    for (int i = 0; i < n; ++i) sum += integrand(kTwoPi * (i + 0.5) / n);
    n *= 2;
    const double next = sum * kTwoPi / n;
    delta = std::abs(next - value);
    value = next;
    if (delta < 1e-10 * std::max(1.0, value)) break;
  }
  if (delta > 1e-6) throw ConvergenceError("total_curvature: quadrature does not converge");
  return {value, n, delta};
}

namespace {

struct Run {
  double value;
  int length;
  int first;
};

struct HeightProfile {
  std::vector<double> h;
  std::vector<Run> runs;  // cyclic
  double tol = 0.0;
  bool constant = false;
};

HeightProfile height_profile(const std::vector<Vec4d>& pts, const Vec4d& v) {
  HeightProfile prof;
  const int n = static_cast<int>(pts.size());
  prof.h.resize(n);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    prof.h[i] = pts[i].dot(v);
    lo = std::min(lo, prof.h[i]);
    hi = std::max(hi, prof.h[i]);
    scale = std::max(scale, std::abs(prof.h[i]));
  }
  prof.tol = 1e-12 * std::max(1.0, scale);
  if (hi - lo <= prof.tol) {
    prof.constant = true;
    return prof;
  }
  int start = 0;
  while (std::abs(prof.h[start] - prof.h[(start + n - 1) % n]) <= prof.tol) ++start;
  for (int k = 0; k < n; ++k) {
    const int i = (start + k) % n;
    if (!prof.runs.empty() && std::abs(prof.h[i] - prof.runs.back().value) <= prof.tol)
      ++prof.runs.back().length;
    else
      prof.runs.push_back({prof.h[i], 1, i});
  }
  return prof;
}

}  // namespace

Crookedness crookedness(const TransverseKnot& knot, const Vec4d& v, int n_samples) {
  if (std::abs(v.norm() - 1.0) > 1e-9) throw DomainError("crookedness: direction must be a unit vector");
  if (n_samples < 16) throw DomainError("crookedness: need at least 16 samples");
  const HeightProfile prof = height_profile(sample_curve(knot, n_samples), v);
  Crookedness out;
  if (prof.constant) {
    out.degenerate = true;
    return out;
  }
  const std::size_t m = prof.runs.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Run& r = prof.runs[k];
    const double prev = prof.runs[(k + m - 1) % m].value, next = prof.runs[(k + 1) % m].value;
    const bool is_min = prev > r.value && next > r.value;
    const bool is_max = prev < r.value && next < r.value;
    out.minima += is_min;
    out.maxima += is_max;
    if ((is_min || is_max) && r.length >= 5) out.degenerate = true;
  }
  return out;
}

FillingDirection find_filling_direction(const TransverseKnot& knot, int n_dirs, int n_samples) {
  if (n_dirs < 1) throw DomainError("find_filling_direction: n_dirs must be positive");
  const std::vector<Vec4d> pts = sample_curve(knot, n_samples);
  const double dt = kTwoPi / n_samples;

  FillingDirection best;
  best.defect = std::numeric_limits<int>::max();
  best.conditioning = -1.0;
  for (const Vec4d& v : sphere_lattice(n_dirs)) {
    const HeightProfile prof = height_profile(pts, v);
    if (prof.constant) continue;
    int minima = 0, maxima = 0, i_min = -1, i_max = -1;
    bool wide = false;
    const std::size_t m = prof.runs.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Run& r = prof.runs[k];
      const double prev = prof.runs[(k + m - 1) % m].value, next = prof.runs[(k + 1) % m].value;
      if (prev > r.value && next > r.value) {
        ++minima;
        i_min = r.first + r.length / 2;
        wide |= r.length >= 5;
      } else if (prev < r.value && next < r.value) {
        ++maxima;
        i_max = r.first + r.length / 2;
        wide |= r.length >= 5;
      }
    }
    const int defect = std::abs(minima - 1) + std::abs(maxima - 1);
    double cond = 0.0;
    if (defect == 0 && !wide) {
      auto second = [&](int i) {
        const int n = n_samples;
        i %= n;
        return std::abs(prof.h[(i + 1) % n] - 2 * prof.h[i] + prof.h[(i + n - 1) % n]) / (dt * dt);
      };
      cond = std::min(second(i_min), second(i_max));
    }
    const bool ok = defect == 0 && !wide && cond > 1e-6;
    const bool better = ok ? (!best.found || cond > best.conditioning)
                           : (!best.found && defect < best.defect);
    if (!better) continue;
    best.direction = v;
    best.found = ok;
    best.minima = minima;
    best.defect = defect;
    best.conditioning = cond;
    best.t_min = i_min >= 0 ? dt * (i_min % n_samples) : 0.0;
    best.t_max = i_max >= 0 ? dt * (i_max % n_samples) : 0.0;
  }
  if (best.defect == std::numeric_limits<int>::max())
    throw ConvergenceError("find_filling_direction: every sampled height function is constant");

  // Newton polish of both critical parameters on <gamma'(t), v> = 0.
  auto polish = [&](double t) {
    for (int it = 0; it < 50; ++it) {
      const double g = knot.derivative(t).dot(best.direction);
      const double dg = knot.second_derivative(t).dot(best.direction);
      if (dg == 0.0) break;
      const double step = std::clamp(g / dg, -dt, dt);
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return wrap_2pi(t);
  };
  if (best.found) {
    best.t_min = polish(best.t_min);
    best.t_max = polish(best.t_max);
  }
  return best;
}

}  // namespace reeb
