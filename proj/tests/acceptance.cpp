// Acceptance suite. `acceptance N` runs criterion N, `acceptance` runs all nine.
// One line per criterion: "criterion N: PASS|FAIL  <summary>"; exit status 1 on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "reeb/cli/config.hpp"
#include "reeb/cli/run.hpp"
#include "reeb/dynamics.hpp"
#include "reeb/filling.hpp"
#include "reeb/knot.hpp"
#include "reeb/maslov.hpp"

using namespace reeb;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

/// Collects sub-checks; the first failures are kept for the summary line.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (failed_ <= 4) failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  bool pass() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << (total_ - failed_) << "/" << total_ << " checks";
    if (!notes_.empty()) os << " [" << notes_ << "]";
    if (!failures_.empty()) os << " failed: " << failures_;
    return os.str();
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string failures_;
  std::string notes_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PeriodicOrbit axis_orbit(const StarShapedSurface& s, bool first) {
  const double r = first ? s.r1() : s.r2();
  return find_periodic_orbit(s, first ? Vec4d(r, 0, 0, 0) : Vec4d(0, 0, r, 0), kPi * r * r);
}

bool all_within(const RotationReport& r, double target, double tol) {
  for (double x : r.rotations)
    if (std::abs(x - target) > tol) return false;
  return true;
}

void criterion1(Verdict& v) {
  const auto s = StarShapedSurface::round_sphere();
  const PeriodicOrbit o = axis_orbit(s, true);
  v.check(std::abs(o.period - kPi) <= 1e-8, "period");
  v.check(std::abs(action(o).quadrature - o.period) <= 1e-8, "action");
  const SL2Path path = linearized_path(o);
  const RotationReport rep = rotation_report(path, 64);
  v.check(all_within(rep, 4 * kPi, 1e-6), "rotation in some direction differs from 4 pi");
  const double via = rotation_via_curvature(o, path).value;
  v.check(std::abs(via - 4 * kPi) <= 1e-8, "curvature integral " + fmt(via - 4 * kPi));
  const MaslovResult m = maslov_index(path);
  v.check(m.index == 4 && m.degenerate, "maslov " + std::to_string(m.index));
  v.note("rot-4pi in [" + fmt(rep.rot_min - 4 * kPi) + ", " + fmt(rep.rot_max - 4 * kPi) + "]");
}

void criterion2(Verdict& v) {
  const auto e = StarShapedSurface::ellipsoid(1, kSqrt2);
  const PeriodicOrbit shorter = axis_orbit(e, true);
  const PeriodicOrbit longer = axis_orbit(e, false);
  v.check(std::abs(shorter.period - kPi) <= 1e-8, "short period");
  v.check(std::abs(longer.period - 2 * kPi) <= 1e-8, "long period");
  const SL2Path path = linearized_path(shorter);
  const RotationReport rep = rotation_report(path, 64);
  v.check(all_within(rep, 3 * kPi, 1e-5), "linearized rotation");
  const double via = rotation_via_curvature(shorter, path).value;
  v.check(std::abs(via - 3 * kPi) <= 1e-5, "curvature integral " + fmt(via - 3 * kPi));
  const MaslovResult m = maslov_index(path);
  v.check(m.index == 3 && !m.degenerate, "maslov " + std::to_string(m.index));
  const PinchingReport p = pinching_scan(e);
  v.check(std::abs(p.min_margin) <= 1e-6, "pinching margin " + fmt(p.min_margin));
  v.note("pinching min " + fmt(p.min_margin));
}

void criterion3(Verdict& v) {
  const auto e = StarShapedSurface::ellipsoid(1, std::sqrt(1 / 0.7));
  const SL2Path path = linearized_path(axis_orbit(e, true));
  const RotationReport rep = rotation_report(path, 64);
  v.check(all_within(rep, 3.4 * kPi, 1e-5), "rotation differs from 3.4 pi");
  const MaslovResult m = maslov_index(path);
  v.check(!m.degenerate, "degenerate");
  v.check(m.index == 3, "maslov " + std::to_string(m.index));
}

void criterion4(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_s = [&](double lo, double hi) {
    const double l1 = (lo + (hi - lo) * unit(rng)) * (unit(rng) < 0.5 ? -1 : 1);
    const double l2 = (lo + (hi - lo) * unit(rng)) * (unit(rng) < 0.5 ? -1 : 1);
    const double a = kPi * unit(rng);
    Mat2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    Mat2d s = r * Vec2d(l1, l2).asDiagonal() * r.transpose();
    s(1, 0) = s(0, 1);
    return s;
  };
  int bound_failures = 0;
  auto bounds = [&](const SL2Path& p, const MaslovResult& m) {
    const RotationReport r = rotation_report(p, 64);
    bool ok = r.spread() < kPi;
    for (double x : r.rotations) ok = ok && x < (m.index + 1) * kPi;
    bound_failures += !ok;
  };

  const SL2Path hopf = linearized_path(axis_orbit(StarShapedSurface::round_sphere(), true));
  for (const SL2Path& base : {hopf, exp_js_path(random_s(0.2, 6.0))}) {
    const MaslovResult mb = maslov_index(base);
    bounds(base, mb);
    for (int k = -2; k <= 2; ++k) {
      const SL2Path shifted = prepend_loops(base, k);
      const MaslovResult m = maslov_index(shifted);
      bounds(shifted, m);
      v.check(m.index - mb.index == 2 * k, "loop shift k=" + std::to_string(k));
    }
  }
  int inverse_ok = 0;
  for (int i = 0; i < 20; ++i) {
    const SL2Path p = product(exp_js_path(random_s(0.2, 2.0), 1024), exp_js_path(random_s(0.2, 2.0), 1024));
    const MaslovResult m = maslov_index(p);
    const MaslovResult mi = maslov_index(inverse(p));
    bounds(p, m);
    bounds(inverse(p), mi);
    inverse_ok += mi.index == -m.index;
  }
  v.check(inverse_ok == 20, "inverse " + std::to_string(inverse_ok) + "/20");
  int signature_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const Mat2d s = random_s(0.1, 2 * kPi - 0.1);
    const SL2Path p = exp_js_path(s, 1024);
    const MaslovResult m = maslov_index(p);
    bounds(p, m);
    const Vec2d ev = Eigen::SelfAdjointEigenSolver<Mat2d>(s).eigenvalues();
    signature_ok += 2 * m.index == (ev(0) > 0 ? 1 : -1) + (ev(1) > 0 ? 1 : -1);
  }
  v.check(signature_ok == 50, "signature " + std::to_string(signature_ok) + "/50");
  v.check(bound_failures == 0, std::to_string(bound_failures) + " paths break the spread or upper bound");
}

TransverseKnot trefoil() { return torus_orbit_knot(2, 3, 1.0, std::sqrt(2.0 / 3.0)); }

void criterion5(Verdict& v) {
  const LinkingComputation h = self_linking(hopf_fiber());
  v.check(h.value == -1, "hopf " + std::to_string(h.value));
  v.check(h.residual < 0.05, "hopf residual " + fmt(h.residual));
  v.check(h.value_half_epsilon == h.value, "hopf epsilon/2");
  v.check(self_linking_with_pole(hopf_fiber(), Vec4d(0, 0, 0, 1)).value == h.value, "hopf pole change");
  const LinkingComputation t = self_linking(trefoil());
  v.check(t.value == 1, "trefoil " + std::to_string(t.value));
  v.check(t.value_half_epsilon == t.value, "trefoil epsilon/2");
  v.check(h.value % 2 != 0 && t.value % 2 != 0, "parity");
  v.note("residuals " + fmt(h.residual) + ", " + fmt(t.residual));
}

struct Fixture {
  std::string name;
  TransverseKnot knot;
  ImmersedDisc disc;
};

std::vector<Fixture> theorem1_fixtures() {
  std::vector<Fixture> out;
  out.push_back({"hopf+flat", hopf_fiber(), flat_disc()});
  const TransverseKnot t = trefoil();
  out.push_back({"trefoil+linear", t, linear_filling(t)});
  const auto e = StarShapedSurface::ellipsoid(1, 1.2);
  const TransverseKnot k = knot_from_orbit(axis_orbit(e, true));
  out.push_back({"pinched+embedded", k, embedded_filling(k, find_filling_direction(k)).disc});
  return out;
}

void criterion6(Verdict& v) {
  for (const Fixture& f : theorem1_fixtures()) {
    const Theorem1Report r = verify_theorem1(f.knot, f.disc);
    v.check(r.symplectic_min > 0, f.name + " symplectic");
    v.check(r.anti_holomorphic == 0, f.name + " anti-holomorphic points");
    v.check(r.lk == 2 * r.tan - 1, f.name + " lk=" + std::to_string(r.lk) + " tan=" + std::to_string(r.tan));
    const SelfIntersectionNumber n = self_intersection_number(f.knot, &f.disc);
    v.check(n.value == r.lk + 1 && n.value == 2 * r.tan, f.name + " Int");
    v.note(f.name + " lk=" + std::to_string(r.lk) + " tan=" + std::to_string(r.tan));
  }
}

void criterion7(Verdict& v) {
  for (const char* ratio : {"1.0", "1.2", "1.4"}) {
    const cli::RunResult r = cli::run(cli::parse_config(
        std::string("[surface] kind=ellipsoid r1=1 r2=") + ratio + " [task] name=verify-thm2"));
    const auto& d = r.verdict;
    const std::string tag = std::string("ratio ") + ratio;
    if (d.contains("error")) {
      v.check(false, tag + " error: " + d["error"]["message"].get<std::string>());
      continue;
    }
    v.check(d["pinching"]["pass"].get<bool>(), tag + " pinching");
    if (!d.contains("maslov")) continue;
    const int mu = d["maslov"]["index"].get<int>();
    v.check(mu == 3, tag + " maslov " + std::to_string(mu) +
                         (d["maslov"]["degenerate"].get<bool>() ? " (degenerate)" : ""));
    v.check(d["embedded"].get<bool>(), tag + " embedded filling");
    v.check(d["sl"].get<int>() == -1, tag + " sl " + std::to_string(d["sl"].get<int>()));
    const double margin = d["total_curvature"]["margin_4pi"].get<double>();
    v.check(margin > 0, tag + " total curvature");
    v.note(tag + ": 4pi-kappa=" + fmt(margin));
  }
}

void criterion8(Verdict& v) {
  const auto e = StarShapedSurface::ellipsoid(1, 3);
  const double pole = principal_curvatures(e, Vec4d(1, 0, 0, 0)).margin;
  v.check(std::abs(pole + 7.0 / 9.0) <= 1e-6, "margin at (1,0,0,0) " + fmt(pole));
  const PinchingReport p = pinching_scan(e);
  v.check(!p.pass, "pinching passes");
  const cli::RunResult r = cli::run(cli::parse_config("[surface] kind=ellipsoid r1=1 r2=3 [task] name=verify-thm2"));
  v.check(r.exit_code == cli::kExitVerification, "exit code " + std::to_string(r.exit_code));
  v.note("scan min " + fmt(p.min_margin));
}

void criterion9(Verdict& v) {
  for (const Fixture& f : theorem1_fixtures()) {
    const TangentialIndex a = tangential_index(f.disc);
    const TangentialIndex b = tangential_index(f.disc.refined(2));
    bool same_points = a.records.size() == b.records.size();
    for (std::size_t i = 0; same_points && i < a.records.size(); ++i)
      same_points = (a.records[i].point - b.records[i].point).norm() < 1e-6;
    v.check(a.value == b.value && same_points, f.name + " tangential index");
    LinkingOptions fine;
    fine.n_quad = 1024;
    v.check(self_linking(f.knot).value == self_linking(f.knot, fine).value, f.name + " self-linking");
  }
  LinkingOptions fine;
  fine.n_quad = 1024;
  for (const TransverseKnot& k : {hopf_fiber(), trefoil()})
    v.check(self_linking(k).value == self_linking(k, fine).value, k.name() + " self-linking");
}

const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> kCriteria = {
    {"round S^3 period, action, rotation, Maslov 4", criterion1},
    {"ellipsoid(1, sqrt 2) periods, rotation 3 pi, Maslov 3, pinching 0", criterion2},
    {"ellipsoid r1^2/r2^2 = 0.7 rotation 3.4 pi, Maslov 3", criterion3},
    {"Maslov axioms", criterion4},
    {"self-linking of Hopf fiber and (2,3) orbit", criterion5},
    {"lk = 2 tan - 1 and Int = lk + 1 on three fillings", criterion6},
    {"verify-thm2 over ratios 1.0, 1.2, 1.4", criterion7},
    {"ellipsoid(1, 3) negative control", criterion8},
    {"refinement robustness", criterion9},
};

bool run_one(int n) {
  const auto& [title, body] = kCriteria.at(static_cast<std::size_t>(n - 1));
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << n << ": " << (v.pass() ? "PASS" : "FAIL") << "  " << title << "  ("
            << v.summary() << ")" << std::endl;
  return v.pass();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::cerr << "usage: acceptance [1-9]\n";
    return 2;
  }
  if (argc == 2) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 9) {
      std::cerr << "criterion must be 1..9\n";
      return 2;
    }
    return run_one(n) ? 0 : 1;
  }
  bool all = true;
  for (int n = 1; n <= 9; ++n) all = run_one(n) && all;
  return all ? 0 : 1;
}
