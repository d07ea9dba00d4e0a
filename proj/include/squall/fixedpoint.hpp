#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "squall/barriers.hpp"
#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/system.hpp"

namespace squall {

// Product box of fields: component i ranges over [C^-1 z_i, C y_i] with the
// gradient capped at C. The scaled fields are stored, not recomputed.
struct Rectangle {
  double C = 1.0;
  std::array<ScalarField, 2> lower;
  std::array<ScalarField, 2> upper;
  double grad_cap = 1.0;
};

// Scales the barrier fields into the box; requires C > 1 and checks
// lower < upper strictly at interior nodes.
Rectangle make_rectangle(const BarrierSet& bs, double C);

// Per-scale closure test behind select_C. The three inequality families,
// checked for both equations at every interior node:
//   sub side:   C^-(p-1) * load_z(x) <= m * env_min(C) * d^(a+b)
//   super side: C^(p-1) * (1 + d^(a+b)) >= M * env_max(C) * d^(a+b)
//               + 2 C^max(gamma,theta)
//   norm side:  M * env_max(C) * mu_hat + 2 |domain| C^max(gamma,theta)
//               <= (C / k_grad)^(p-1)
// where env_min/env_max bound w1^a w2^b over the box through the fitted
// ratios c0, c1, and mu_hat = (integral d^(r(a+b)))^(1/r).
// On failure, blocker (when non-null) names the first failing inequality.
bool closure_holds(const SystemSpec& spec, const BarrierSet& bs, double k_grad,
                   double C, std::string* blocker = nullptr);

// Smallest C in {2, 4, 8, ..., 2^20} for which closure_holds passes.
// Requires an admissible spec (AdmissibilityError otherwise) and k_grad > 0;
// throws ClosureFailure naming the blocking inequality when the search
// range is exhausted.
double select_C(const SystemSpec& spec, const BarrierSet& bs, double k_grad);

// Slack (rhs - lhs) of the gradient norm closure at scale C, minimized over
// the two equations; positive means the bound holds with that much room.
double closure_norm_slack(const SystemSpec& spec, const BarrierSet& bs,
                          double k_grad, double C);

// The frozen-coefficient solve: given (w1, w2), evaluate the nonlinearities
// at cell centers (corner means of the fields and of the nodal gradient
// magnitudes) and solve the two decoupled problems
//   -lap_{p_i} u_i = f_i(w1, w2, grad w1, grad w2).
// Holds one solver per equation so repeated applications reuse the cached
// linear factorization.
class FrozenOperator {
 public:
  FrozenOperator(const SystemSpec& spec, MeshPtr mesh,
                 const PlapConfig& cfg = {});

  // Cell loads f_i evaluated at the given pair; DomainError when w1 or w2
  // is nonpositive at an interior node.
  std::array<std::vector<double>, 2> frozen_loads(const ScalarField& w1,
                                                  const ScalarField& w2) const;

  std::pair<ScalarField, ScalarField> apply(const ScalarField& w1,
                                            const ScalarField& w2) const;

  const PlapSolver& solver(int i) const { return i == 0 ? s1_ : s2_; }
  const SystemSpec& spec() const { return spec_; }
  MeshPtr mesh() const { return mesh_; }

 private:
  SystemSpec spec_;
  MeshPtr mesh_;
  PlapSolver s1_;
  PlapSolver s2_;
};

// One-shot convenience wrapper around FrozenOperator::apply.
std::pair<ScalarField, ScalarField> apply_T(const SystemSpec& spec,
                                            MeshPtr mesh,
                                            const ScalarField& w1,
                                            const ScalarField& w2,
                                            const PlapConfig& cfg = {});

struct MembershipReport {
  bool in_rectangle = false;
  bool grad_within_cap = false;
  // positive numbers mean violation by that amount
  double worst_lower = 0.0;  // sup(lower - u) over both components
  double worst_upper = 0.0;  // sup(u - upper)
  double worst_grad = 0.0;   // max sup-gradient minus the cap
};

// Nodewise box check with tolerance 1e-10 plus the gradient cap.
MembershipReport membership(const Rectangle& rect, const ScalarField& u,
                            const ScalarField& v);

enum class FixpointStatus { running, converged, iteration_limit, left_set };

const char* to_string(FixpointStatus s);

struct FixpointState {
  std::array<ScalarField, 2> iterate;
  int k = 0;
  // successive sup value-difference + sup gradient-difference
  std::vector<double> residual_history;
  // worst clamp distance applied at each step
  std::vector<double> clamp_history;
  // box membership of the operator output at each step
  std::vector<MembershipReport> membership_history;
  bool in_rectangle = false;
  bool grad_within_cap = false;
  // stationarity residual of each converged component against the load
  // frozen at the converged pair itself
  std::array<double, 2> certificate{0.0, 0.0};
  FixpointStatus status = FixpointStatus::running;
};

// Damped iteration w <- (1 - damping) w + damping T(w) from the box
// midpoint. Steps are clamped into the box; clamping beyond 1e-10 ends with
// status left_set. Convergence requires the successive residual below tol
// AND a certificate: one further application of T whose components satisfy
// the discrete equations with the loads frozen at that application's output
// (residual <= 10 tol per component) while staying in the box; the certified
// pair becomes the final iterate. Never throws for terminal conditions; the
// status field reports them.
FixpointState iterate(const SystemSpec& spec, MeshPtr mesh,
                      const Rectangle& rect, double damping, double tol,
                      int max_iter, const PlapConfig& cfg = {});

}  // namespace squall
