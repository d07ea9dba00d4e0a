#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "squall/errors.hpp"
#include "squall/mesh.hpp"

namespace squall {

struct PlapConfig {
  // Gradient regularization; negative means auto:
  // 1e-6 * min_spacing / diameter.
  double eps_reg = -1.0;
  // Stop when the volume-normalized stationarity residual drops below tol.
  double tol = 1e-10;
  int max_iter = 200;
  double line_search_shrink = 0.5;
  bool collect_history = true;
};

struct ConstantLoad {
  double value = 1.0;
};

// c0 + c1 * dist(x)^mu, evaluated at cell centers.
struct SingularLoad {
  double c0 = 0.0;
  double c1 = 1.0;
  double mu = 0.0;
};

// dist^s away from the boundary, -1 on the band {dist < band}.
struct BandedLoad {
  double s = 0.0;
  double band = 0.1;
};

struct NodalLoad {
  ScalarField field;
};

struct CellLoad {
  std::vector<double> values;
};

using Load =
    std::variant<ConstantLoad, SingularLoad, BandedLoad, NodalLoad, CellLoad>;

// Load sampled at cell centers; nodal fields are corner-averaged.
std::vector<double> cell_load_values(const Mesh& mesh, const Load& g);
// (sum over cells |g_c|^r * cellvolume)^(1/r).
double load_lr_norm(const Mesh& mesh, const Load& g, double r);

struct PlapHistoryRow {
  int iteration;
  double energy;
  double residual;
};

struct PlapInfo {
  int iterations = 0;
  double residual = 0.0;
  std::vector<PlapHistoryRow> history;
};

// Newton ran out of iterations; carries the last iterate and its residual.
struct PlapIterationLimit : Error {
  PlapIterationLimit(const std::string& msg, ScalarField last_iterate,
                     double last_residual)
      : Error(msg), last(std::move(last_iterate)), residual(last_residual) {}
  ScalarField last;
  double residual;
};

// Minimizes J(u) = sum over cells of
//   (1/p) * (|grad u|^2 + eps^2)^(p/2) * cellvolume - g_c * u_c * cellvolume
// over fields vanishing on the boundary.  The principal term samples the
// multilinear gradient at cell corners, the load at cell centers; in 2D
// with p = 2 this reduces to the classical 5-point scheme.
class PlapSolver {
 public:
  PlapSolver(MeshPtr mesh, double p, PlapConfig cfg = {});
  ~PlapSolver();
  PlapSolver(PlapSolver&&) noexcept;

  const Mesh& mesh() const;
  MeshPtr mesh_ptr() const;
  double p() const;
  double eps() const;
  const PlapConfig& config() const;

  ScalarField solve(const Load& g, PlapInfo* info = nullptr) const;

  // Volume-normalized stationarity residual of u against load g:
  // max over interior nodes of |dJ_principal/du_i - b_i| / node_weight.
  double residual(const ScalarField& u, const Load& g) const;

  // sum over quadrature points of |grad u|^q * weight.
  double grad_power_integral(const ScalarField& u, double q) const;
  // sum over cells of g_c * mean(u)_c * cellvolume.
  double load_pairing(const Load& g, const ScalarField& u) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ScalarField plap_solve(MeshPtr mesh, double p, const Load& g,
                       const PlapConfig& cfg = {}, PlapInfo* info = nullptr);
double plap_residual(MeshPtr mesh, double p, const ScalarField& u,
                     const Load& g, const PlapConfig& cfg = {});

}  // namespace squall
