#pragma once

// Run configuration: a flat key=value file with [section] headers.
//
//   [surface] kind=ellipsoid r1=1 r2=1.4142
//   [task]    name=orbit-maslov
//
// Several pairs may share a line; values containing spaces are double-quoted.

#include <array>
#include <string>
#include <string_view>

namespace reeb::cli {

enum class Task {
  SurfacePinching,
  OrbitFind,
  OrbitMaslov,
  KnotSl,
  KnotCurvature,
  FillLinear,
  FillEmbedded,
  VerifyThm1,
  VerifyThm2,
  MaslovAxioms,
};

std::string_view task_name(Task task);

struct SurfaceSpec {
  std::string kind = "sphere";  // sphere | ellipsoid | implicit-polynomial
  double r1 = 1.0;
  double r2 = 1.0;
  std::string polynomial;
};

struct TaskSpec {
  Task name = Task::SurfacePinching;
  std::string orbit = "short";  // short | long | guess
  std::array<double, 4> guess = {1.0, 0.0, 0.0, 0.0};
  double period = 3.141592653589793;
  double split_a = 0.0;
  double split_b = 3.141592653589793;
  std::string filling = "linear";  // linear | embedded | flat (verify-thm1)
};

struct KnotSpec {
  std::string kind = "orbit";  // orbit | hopf | torus-orbit | csv
  int p = 2;
  int q = 3;
  double r1 = 1.0;
  double r2 = 0.816496580927726;
  std::string path;
};

struct Numerics {
  double flow_tol = 1e-10;
  int orbit_samples = 512;
  int n_dirs = 64;
  double degeneracy_tol = 1e-5;
  int pinching_samples = 4096;
  int n_quad = 512;
  double epsilon = 1e-2;
  int n_poles = 32;
  int n_r = 96;
  int n_theta = 384;
  int filling_dirs = 256;
  double transverse_tol = 1e-6;
  int axiom_paths = 20;
  int axiom_matrices = 50;
  unsigned long long seed = 1;
};

struct OutputSpec {
  std::string dump_dir;  // empty: no dumps
};

struct RunConfig {
  SurfaceSpec surface;
  TaskSpec task;
  KnotSpec knot;
  Numerics numerics;
  OutputSpec output;
};

/// Throws DomainError with the offending line number.
RunConfig parse_config(std::string_view text);

}  // namespace reeb::cli
