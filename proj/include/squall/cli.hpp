#pragma once

#include <string>
#include <vector>

#include "squall/system.hpp"

namespace squall {

inline constexpr const char* kToolVersion = "0.1.0";

// process exit statuses shared by run() and the executable
enum ExitStatus : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_parse = 2,
  exit_admissibility = 3,
  exit_iteration_limit = 4,
  exit_left_set = 5,
  exit_closure_failure = 6,
};

enum class LoadKind { constant, singular, csv };

struct RunConfig {
  std::string command;    // solve | barriers | fixpoint | validate | sweep
  std::string spec_path;  // problem config; every command except solve
  int dim = 1;
  int mesh_n = 65;  // nodes per axis
  // {a, b} in 1D, {ax, bx, ay, by} in 2D; empty means the unit box
  std::vector<double> extent;
  double p = 2.0;  // solve only
  LoadKind load_kind = LoadKind::constant;
  double load_value = 1.0;
  double load_c0 = 0.0;
  double load_c1 = 1.0;
  double load_mu = 0.0;
  std::string load_csv;
  double tol = 1e-6;      // outer iteration tolerance
  int max_iter = 200;     // outer iteration cap
  double damping = 0.5;
  double solver_tol = 1e-10;  // inner stationarity tolerance
  int samples = 12;           // calibration sample count (validate)
  std::string out_dir = "out";
  bool plots = false;
  int workers = 1;
  unsigned seed = 20260814u;
  std::vector<std::string> sweep_params;  // name=lo:hi:count
};

// Runs one command end to end and writes its artifacts (manifest.json,
// report.txt, CSV tables, optional SVG plots) under out_dir. Returns an
// ExitStatus instead of throwing; outputs are deterministic for a fixed
// config and seed.
int run(const RunConfig& cfg);

struct SweepParam {
  std::string name;
  std::vector<double> values;
};

// "name=lo:hi:count" with count >= 1; count == 1 collapses to {lo}.
SweepParam parse_sweep_param(const std::string& text);

// Spec parameters addressable in sweeps: p1 p2 alpha1 alpha2 beta1 beta2
// gamma1 gamma2 theta1 theta2 m1 m2 M1 M2 r1 r2. Auto rules are rebuilt
// after the assignment.
void apply_param(SystemSpec& spec, const std::string& name, double value);

}  // namespace squall
