#pragma once

#include <array>
#include <string>
#include <vector>

#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/system.hpp"

namespace squall {

// Solution of -lap_p u = 1 + d^s with zero boundary values.
// Requires -1 < s < p - 1; throws HypothesisViolation otherwise.
ScalarField build_y(MeshPtr mesh, double p, double s,
                    const PlapConfig& cfg = {});

// Solution of -lap_p z = { d^s where d >= delta, -1 where d < delta }.
// The band load makes z negative for too-thick bands, so delta is halved
// up to max_halvings times until min over interior nodes of z/d > 0.
// Requires the build_y exponent window and 0 < delta < inradius/2.
// Throws BarrierFailure when positivity is still violated after the last
// halving. delta_used receives the accepted thickness when non-null.
ScalarField build_z(MeshPtr mesh, double p, double s, double delta,
                    const PlapConfig& cfg = {}, double* delta_used = nullptr,
                    int max_halvings = 6);

struct TorsionResult {
  ScalarField w;
  double L_hat = 0.0;  // sup-norm of the discrete gradient
};

// Solution of -lap_p w = 1 with its gradient bound.
TorsionResult build_torsion(MeshPtr mesh, double p, const PlapConfig& cfg = {});

struct SingularBarrier {
  ScalarField w;
  int iterations = 0;
  // successive sup-differences of the outer iterates
  std::vector<double> sup_diffs;
};

// Solution of -lap_p w = w^(-gamma) by an outer fixed-point loop seeded with
// the torsion solution: each step solves with cell load
// max(mean corner w, floor)^(-gamma), floor = 1e-4 * min interior distance.
// Stops when the sup-difference drops below 1e-8; throws PlapIterationLimit
// after 100 outer iterations. Requires 0 < gamma < 1.
SingularBarrier build_singular_barrier(MeshPtr mesh, double p, double gamma,
                                       const PlapConfig& cfg = {});

// The full comparison set for a two-equation problem. Index i uses exponent
// p_i and load exponent s_i = alpha_i + beta_i. The constants are fitted on
// the mesh: c0 = 0.9 * min_i min(z_i/d), c1 = max_i max(y_i/d), and likewise
// c2 (with the 0.9 margin), c3 for the singular barrier fields.
struct BarrierSet {
  MeshPtr mesh;
  std::array<ScalarField, 2> y;
  std::array<ScalarField, 2> z;
  std::array<ScalarField, 2> w_hat;
  std::array<ScalarField, 2> w_sing;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double delta = 0.0;       // band thickness shared by both z fields
  double gamma_sing = 0.0;  // exponent of the singular barrier equation
  double L_hat = 0.0;       // max_i sup-norm gradient of the torsion fields
};

// Builds every field. gamma_sing <= 0 selects the default
// (max_i |s_i| + 1) / 2; the exponent must satisfy max_i |s_i| < gamma < 1
// or HypothesisViolation is thrown.
BarrierSet build_barrier_set(MeshPtr mesh, const SystemSpec& spec,
                             double gamma_sing = -1.0,
                             const PlapConfig& cfg = {});

struct Lemma2Row {
  double min_z_over_d = 0.0;
  double max_z_over_d = 0.0;
  double min_y_over_d = 0.0;
  double max_y_over_d = 0.0;
  bool z_le_y = false;          // z <= y at every node
  bool z_positive = false;      // min interior z/d > 0
  bool c0_bound_holds = false;  // stored c0 * d <= z
  bool c1_bound_holds = false;  // y <= stored c1 * d
  bool squeeze_holds = false;   // stored c2 * d <= w_sing <= stored c3 * d
};

struct Lemma2Report {
  std::array<Lemma2Row, 2> rows;
  bool pass = false;
};

// Re-verifies the stored constants against the stored fields (report-only).
Lemma2Report verify_lemma2(const BarrierSet& bs);

struct Lemma2Drift {
  // relative change of min z/d and max y/d per equation between two builds
  std::array<double, 2> c0_drift{0.0, 0.0};
  std::array<double, 2> c1_drift{0.0, 0.0};
  bool stable = false;  // all drifts below 20%
};

Lemma2Drift lemma2_refinement_drift(const BarrierSet& coarse,
                                    const BarrierSet& fine);

// Flat key = value block with the fitted constants and verification rows.
std::string barrier_report_text(const BarrierSet& bs);

}  // namespace squall
