#pragma once

#include <string>
#include <vector>

#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/system.hpp"

namespace squall {

struct CalibrationSample {
  std::string id;
  double grad_sup = 0.0;   // sup-norm of the discrete gradient
  double load_norm = 0.0;  // L^r norm of the load
  double ratio = 0.0;      // grad_sup / load_norm^(1/(p-1))
  bool ok = false;
  std::string note;  // reason when the sample was skipped
};

struct CalibrationReport {
  double k_p = 0.0;    // safety * max recorded ratio
  double safety = 1.5;
  double hardy_constant = 0.0;  // largest Hardy ratio over the solved samples
  std::vector<CalibrationSample> samples;
};

// Solves every problem at exponent p, records the gradient-to-load ratios,
// and fits k_p as safety times the largest one. Samples whose solve fails or
// whose load norm vanishes are skipped with a note (and a stderr warning);
// if nothing survives, CalibrationError is thrown. hardy_mu selects the
// weight exponent for the recorded Hardy constant.
CalibrationReport calibrate_kp(MeshPtr mesh, double p,
                               const std::vector<Load>& problems, double r,
                               double safety = 1.5, const PlapConfig& cfg = {},
                               double hardy_mu = 0.0);

struct ValidationRow {
  std::string id;
  double grad_sup = 0.0;
  double bound = 0.0;  // k_p * load_norm^(1/(p-1))
  bool pass = false;
};

// Checks the fitted bound on a holdout set (problems the calibration never
// saw). Failed solves are skipped with a note in the id.
std::vector<ValidationRow> validate_kp(MeshPtr mesh, double p, double r,
                                       double k_p,
                                       const std::vector<Load>& holdout,
                                       const PlapConfig& cfg = {});

// Deterministic mixed family of constant and distance-power loads for
// calibration sweeps; exponents stay above mu_min.
std::vector<Load> default_calibration_loads(int count, unsigned seed,
                                            double mu_min = -0.3);

// integrate_singular(mu, |u|) / (sum over nodes |grad u|^p * weight)^(1/p).
// Returns 0 for u identically zero. Requires mu > -1.
double check_hardy(double p, double mu, const ScalarField& u);

struct ChainRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;  // lhs <= rhs up to a small relative slack
};

struct EnergyChainReport {
  std::vector<ChainRow> rows;
  // fitted factor max over cell centers of (u/d)^alpha * (v/d)^beta per
  // equation, linking the power integral to the distance-weight integral
  std::array<double, 2> distance_factor{0.0, 0.0};
  bool all_hold = false;
};

// Evaluates, per equation, the discrete chain
//   integral |grad u_i|^{p_i}  =  integral f_i * u_i
//     <= M_i int s1^a s2^b u_i + int |grad u|^{gamma_i} u_i + int |grad v|^{theta_i} u_i
//   and M_i int s1^a s2^b u_i <= M_i * k_i * int d^{a+b} u_i
// with every integrand sampled at cell centers (corner means for fields).
// Report-only: violated rows mark holds = false, nothing throws.
EnergyChainReport energy_chain_report(const SystemSpec& spec, MeshPtr mesh,
                                      const ScalarField& u,
                                      const ScalarField& v,
                                      const PlapConfig& cfg = {});

}  // namespace squall
