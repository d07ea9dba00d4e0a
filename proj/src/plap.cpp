#include "squall/plap.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <optional>

namespace squall {

std::vector<double> cell_load_values(const Mesh& mesh, const Load& g) {
  std::vector<double> out(mesh.cell_count());
  if (const auto* c = std::get_if<ConstantLoad>(&g)) {
    std::fill(out.begin(), out.end(), c->value);
    return out;
  }
  if (const auto* s = std::get_if<SingularLoad>(&g)) {
    if (s->c1 != 0.0 && s->mu <= -1.0)
      throw NonIntegrableExponent("singular load exponent must exceed -1");
    for (int cell = 0; cell < mesh.cell_count(); ++cell) {
      const double d = mesh.dist_at(mesh.cell_center(cell));
      out[cell] = s->c0 + s->c1 * std::pow(d, s->mu);
    }
    return out;
  }
  if (const auto* b = std::get_if<BandedLoad>(&g)) {
    if (b->s <= -1.0)
      throw NonIntegrableExponent("banded load exponent must exceed -1");
    for (int cell = 0; cell < mesh.cell_count(); ++cell) {
      const double d = mesh.dist_at(mesh.cell_center(cell));
      out[cell] = d >= b->band ? std::pow(d, b->s) : -1.0;
    }
    return out;
  }
  if (const auto* n = std::get_if<NodalLoad>(&g)) {
    if (static_cast<int>(n->field.values.size()) != mesh.node_count())
      throw ConfigError("nodal load does not match the mesh");
    const auto& v = n->field.values;
    for (int cell = 0; cell < mesh.cell_count(); ++cell) {
      const auto c = mesh.cell_corners(cell);
      out[cell] = mesh.dim() == 1
                      ? 0.5 * (v[c[0]] + v[c[1]])
                      : 0.25 * (v[c[0]] + v[c[1]] + v[c[2]] + v[c[3]]);
    }
    return out;
  }
  const auto& cl = std::get<CellLoad>(g);
  if (static_cast<int>(cl.values.size()) != mesh.cell_count())
    throw ConfigError("cell load does not match the mesh");
  return cl.values;
}

double load_lr_norm(const Mesh& mesh, const Load& g, double r) {
  if (!(r >= 1.0)) throw ConfigError("load_lr_norm needs r >= 1");
  const auto vals = cell_load_values(mesh, g);
  const double vol = mesh.cell_volume();
  double acc = 0.0;
  for (double v : vals) acc += std::pow(std::abs(v), r) * vol;
  return std::pow(acc, 1.0 / r);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

struct QuadPoint {
  // physical shape-function gradients at this quadrature point, one per
  // cell corner
  std::array<Vec2, 4> shape_grad;
  double weight;  // share of the cell volume
};

}  // namespace

struct PlapSolver::Impl {
  MeshPtr mesh;
  double p;
  PlapConfig cfg;
  double eps;

  std::vector<int> dof_of_node;  // -1 on the boundary
  std::vector<int> node_of_dof;
  int ndof = 0;

  std::vector<QuadPoint> quad;  // shared by every cell (uniform grid)
  int nquad = 0;

  mutable std::optional<Eigen::SimplicialLDLT<SpMat>> p2_factor;

  Impl(MeshPtr m, double pp, PlapConfig c) : mesh(std::move(m)), p(pp), cfg(c) {
    if (!(p > 1.0)) throw ConfigError("plap exponent p must exceed 1");
    if (cfg.eps_reg == 0.0 || (cfg.eps_reg < 0.0 && cfg.eps_reg != -1.0))
      throw ConfigError("eps_reg must be positive (or -1 for auto)");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(cfg.line_search_shrink > 0.0 && cfg.line_search_shrink < 1.0))
      throw ConfigError("line_search_shrink must lie in (0,1)");
    eps = cfg.eps_reg > 0.0
              ? cfg.eps_reg
              : 1e-6 * mesh->min_spacing() / mesh->diameter();

    dof_of_node.assign(mesh->node_count(), -1);
    for (int n = 0; n < mesh->node_count(); ++n)
      if (!mesh->is_boundary(n)) {
        dof_of_node[n] = ndof++;
        node_of_dof.push_back(n);
      }

    const double vol = mesh->cell_volume();
    if (mesh->dim() == 1) {
      const double ih = 1.0 / mesh->spacing(0);
      QuadPoint q;
      q.shape_grad = {Vec2{-ih, 0.0}, Vec2{ih, 0.0}, Vec2{0, 0}, Vec2{0, 0}};
      q.weight = 0.5 * vol;
      quad = {q, q};  // both endpoint samples see the same P1 gradient
      nquad = 2;
    } else {
      const double ix = 1.0 / mesh->spacing(0);
      const double iy = 1.0 / mesh->spacing(1);
      // corner order SW, SE, NW, NE; samples at the same corners
      const double corner_xi[4] = {0, 1, 0, 1};
      const double corner_eta[4] = {0, 0, 1, 1};
      quad.resize(4);
      for (int c = 0; c < 4; ++c) {
        const double xi = corner_xi[c], eta = corner_eta[c];
        quad[c].shape_grad[0] = {-(1 - eta) * ix, -(1 - xi) * iy};
        quad[c].shape_grad[1] = {(1 - eta) * ix, -xi * iy};
        quad[c].shape_grad[2] = {-eta * ix, (1 - xi) * iy};
        quad[c].shape_grad[3] = {eta * ix, xi * iy};
        quad[c].weight = 0.25 * vol;
      }
      nquad = 4;
    }
  }

  int corners() const { return mesh->corners_per_cell(); }

  // Load functional: b_i = sum over adjacent cells of g_c * vol / corners.
  Eigen::VectorXd load_vector(const std::vector<double>& gc) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ndof);
    const double share = mesh->cell_volume() / corners();
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const auto c = mesh->cell_corners(cell);
      for (int k = 0; k < corners(); ++k) {
        const int dof = dof_of_node[c[k]];
        if (dof >= 0) b[dof] += gc[cell] * share;
      }
    }
    return b;
  }

  double density_energy(double s2, double p_eff) const {
    return std::pow(s2, 0.5 * p_eff) / p_eff;
  }

  double energy(const std::vector<double>& u, const Eigen::VectorXd& b,
                const Eigen::VectorXd& udof, double p_eff) const {
    double acc = 0.0;
    const int nc = corners();
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const auto c = mesh->cell_corners(cell);
      for (int q = 0; q < nquad; ++q) {
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < nc; ++k) {
          gx += u[c[k]] * quad[q].shape_grad[k][0];
          gy += u[c[k]] * quad[q].shape_grad[k][1];
        }
        acc += quad[q].weight * density_energy(gx * gx + gy * gy + eps * eps,
                                               p_eff);
      }
    }
    return acc - b.dot(udof);
  }

  // Gradient of the principal (Dirichlet) part with respect to interior
  // nodal values.
  Eigen::VectorXd principal_gradient(const std::vector<double>& u,
                                     double p_eff) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(ndof);
    const int nc = corners();
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const auto c = mesh->cell_corners(cell);
      for (int q = 0; q < nquad; ++q) {
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < nc; ++k) {
          gx += u[c[k]] * quad[q].shape_grad[k][0];
          gy += u[c[k]] * quad[q].shape_grad[k][1];
        }
        const double s2 = gx * gx + gy * gy + eps * eps;
        const double a = std::pow(s2, 0.5 * p_eff - 1.0) * quad[q].weight;
        for (int k = 0; k < nc; ++k) {
          const int dof = dof_of_node[c[k]];
          if (dof < 0) continue;
          g[dof] += a * (gx * quad[q].shape_grad[k][0] +
                         gy * quad[q].shape_grad[k][1]);
        }
      }
    }
    return g;
  }

  // bscale=1 gives the exact Hessian; bscale=0 drops the (p-2) rank-one
  // term, leaving the SPD lagged-coefficient matrix whose full step is the
  // classical secant update u <- K(u)^{-1} b.
  SpMat hessian(const std::vector<double>& u, double p_eff,
                double bscale = 1.0) const {
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(mesh->cell_count()) * 12);
    const int nc = corners();
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const auto c = mesh->cell_corners(cell);
      for (int q = 0; q < nquad; ++q) {
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < nc; ++k) {
          gx += u[c[k]] * quad[q].shape_grad[k][0];
          gy += u[c[k]] * quad[q].shape_grad[k][1];
        }
        const double s2 = gx * gx + gy * gy + eps * eps;
        const double a = std::pow(s2, 0.5 * p_eff - 1.0);
        const double bcoef =
            bscale * (p_eff - 2.0) * std::pow(s2, 0.5 * p_eff - 2.0);
        for (int k = 0; k < nc; ++k) {
          const int dk = dof_of_node[c[k]];
          if (dk < 0) continue;
          const double pk = gx * quad[q].shape_grad[k][0] +
                            gy * quad[q].shape_grad[k][1];
          for (int l = 0; l < nc; ++l) {
            const int dl = dof_of_node[c[l]];
            if (dl < 0) continue;
            const double dot =
                quad[q].shape_grad[k][0] * quad[q].shape_grad[l][0] +
                quad[q].shape_grad[k][1] * quad[q].shape_grad[l][1];
            const double pl = gx * quad[q].shape_grad[l][0] +
                              gy * quad[q].shape_grad[l][1];
            const double val = quad[q].weight * (a * dot + bcoef * pk * pl);
            if (val != 0.0) trips.emplace_back(dk, dl, val);
          }
        }
      }
    }
    SpMat H(ndof, ndof);
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
  }

  double normalized_residual(const Eigen::VectorXd& grad,
                             const Eigen::VectorXd& b) const {
    double worst = 0.0;
    for (int d = 0; d < ndof; ++d) {
      const double w = mesh->node_weight(node_of_dof[d]);
      worst = std::max(worst, std::abs(grad[d] - b[d]) / w);
    }
    return worst;
  }

  void scatter(const Eigen::VectorXd& udof, std::vector<double>& u) const {
    std::fill(u.begin(), u.end(), 0.0);
    for (int d = 0; d < ndof; ++d) u[node_of_dof[d]] = udof[d];
  }

  Eigen::VectorXd solve_linear(const Eigen::VectorXd& b) const {
    if (!p2_factor) {
      std::vector<double> zero(mesh->node_count(), 0.0);
      SpMat K = hessian(zero, 2.0);
      p2_factor.emplace();
      p2_factor->compute(K);
      if (p2_factor->info() != Eigen::Success)
        throw Error("linear stiffness factorization failed");
    }
    return p2_factor->solve(b);
  }

  // Newton with Armijo backtracking at a fixed exponent.
  void newton(double p_eff, const Eigen::VectorXd& b, Eigen::VectorXd& udof,
              PlapInfo* info, bool record) const {
    std::vector<double> u(mesh->node_count(), 0.0);
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double res_prev = std::numeric_limits<double>::infinity();
    double res_best = std::numeric_limits<double>::infinity();
    int flat = 0;
    bool lagged = false;
    for (int it = 0; it <= cfg.max_iter; ++it) {
      scatter(udof, u);
      Eigen::VectorXd grad = principal_gradient(u, p_eff) - b;
      const double res = normalized_residual(grad + b, b);
      if (record && info) {
        if (cfg.collect_history)
          info->history.push_back(
              {info->iterations, energy(u, b, udof, p_eff), res});
        info->residual = res;
      }
      if (res <= cfg.tol) return;
      // rounding floor: on fine or strongly degenerate problems the
      // assembled residual bottoms out above tol; five iterations without
      // halving the best value below sqrt(eps) is converged
      flat = res <= 0.5 * res_best ? 0 : flat + 1;
      res_best = std::min(res_best, res);
      if (flat >= 5 && res_best <= 1.5e-8) return;
      if (it == cfg.max_iter) break;
      // alternate between the exact Hessian and the lagged-coefficient
      // matrix whenever the current direction family stops making progress
      if (res > 0.9 * res_prev) lagged = !lagged;
      res_prev = res;

      SpMat H = hessian(u, p_eff, lagged ? 0.0 : 1.0);
      ldlt.compute(H);
      Eigen::VectorXd dir;
      bool ok = ldlt.info() == Eigen::Success;
      if (ok) {
        dir = ldlt.solve(-grad);
        ok = ldlt.info() == Eigen::Success && grad.dot(dir) < 0.0;
      }
      if (!ok) {
        // diagonal-preconditioned steepest descent fallback
        Eigen::VectorXd diag = H.diagonal();
        dir = -grad.cwiseQuotient(diag.cwiseMax(1e-300));
      }

      const double j0 = energy(u, b, udof, p_eff);
      const double slope = grad.dot(dir);
      // absolute slack keeps the search from rejecting steps whose true
      // decrease is below the rounding noise of the energy sum
      const double noise = 1e-14 * (1.0 + std::abs(j0));
      double t = 1.0;
      std::vector<double> utrial(mesh->node_count(), 0.0);
      while (true) {
        Eigen::VectorXd cand = udof + t * dir;
        scatter(cand, utrial);
        if (energy(utrial, b, cand, p_eff) <= j0 + 1e-4 * t * slope + noise) {
          udof = cand;
          break;
        }
        t *= cfg.line_search_shrink;
        if (t < 1e-16) {
          udof = cand;  // stagnated; residual check will report honestly
          break;
        }
      }
      if (info) ++info->iterations;
    }
    ScalarField last = make_field(mesh);
    scatter(udof, last.values);
    Eigen::VectorXd grad = principal_gradient(last.values, p_eff) - b;
    throw PlapIterationLimit(
        "plap solve hit the iteration limit (residual " +
            std::to_string(normalized_residual(grad + b, b)) + ")",
        std::move(last), normalized_residual(grad + b, b));
  }
};

PlapSolver::PlapSolver(MeshPtr mesh, double p, PlapConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(mesh), p, cfg)) {}
PlapSolver::~PlapSolver() = default;
PlapSolver::PlapSolver(PlapSolver&&) noexcept = default;

const Mesh& PlapSolver::mesh() const { return *impl_->mesh; }
MeshPtr PlapSolver::mesh_ptr() const { return impl_->mesh; }
double PlapSolver::p() const { return impl_->p; }
double PlapSolver::eps() const { return impl_->eps; }
const PlapConfig& PlapSolver::config() const { return impl_->cfg; }

ScalarField PlapSolver::solve(const Load& g, PlapInfo* info) const {
  const auto gc = cell_load_values(*impl_->mesh, g);
  const Eigen::VectorXd b = impl_->load_vector(gc);

  PlapInfo local;
  PlapInfo* out = info ? info : &local;
  out->iterations = 0;
  out->residual = 0.0;
  out->history.clear();

  // start from the linear solution, then walk the exponent toward p in
  // unit steps when it is far from 2
  Eigen::VectorXd udof = impl_->solve_linear(b);
  if (impl_->p != 2.0) {
    std::vector<double> stages;
    double q = 2.0;
    while (std::abs(impl_->p - q) > 1.0) {
      q += impl_->p > q ? 1.0 : -1.0;
      stages.push_back(q);
    }
    stages.push_back(impl_->p);
    for (size_t s = 0; s < stages.size(); ++s)
      impl_->newton(stages[s], b, udof, out, s + 1 == stages.size());
  } else {
    impl_->newton(2.0, b, udof, out, true);
  }

  ScalarField u = make_field(impl_->mesh);
  impl_->scatter(udof, u.values);
  return u;
}

double PlapSolver::residual(const ScalarField& u, const Load& g) const {
  if (u.mesh.get() != impl_->mesh.get() &&
      static_cast<int>(u.values.size()) != impl_->mesh->node_count())
    throw ConfigError("field does not match the solver mesh");
  const auto gc = cell_load_values(*impl_->mesh, g);
  const Eigen::VectorXd b = impl_->load_vector(gc);
  const Eigen::VectorXd grad = impl_->principal_gradient(u.values, impl_->p);
  return impl_->normalized_residual(grad, b);
}

double PlapSolver::grad_power_integral(const ScalarField& u, double q) const {
  double acc = 0.0;
  const int nc = impl_->corners();
  for (int cell = 0; cell < impl_->mesh->cell_count(); ++cell) {
    const auto c = impl_->mesh->cell_corners(cell);
    for (int qp = 0; qp < impl_->nquad; ++qp) {
      double gx = 0.0, gy = 0.0;
      for (int k = 0; k < nc; ++k) {
        gx += u.values[c[k]] * impl_->quad[qp].shape_grad[k][0];
        gy += u.values[c[k]] * impl_->quad[qp].shape_grad[k][1];
      }
      acc += impl_->quad[qp].weight *
             std::pow(gx * gx + gy * gy, 0.5 * q);
    }
  }
  return acc;
}

double PlapSolver::load_pairing(const Load& g, const ScalarField& u) const {
  const auto gc = cell_load_values(*impl_->mesh, g);
  const double vol = impl_->mesh->cell_volume();
  double acc = 0.0;
  for (int cell = 0; cell < impl_->mesh->cell_count(); ++cell) {
    const auto c = impl_->mesh->cell_corners(cell);
    const double mean =
        impl_->mesh->dim() == 1
            ? 0.5 * (u.values[c[0]] + u.values[c[1]])
            : 0.25 * (u.values[c[0]] + u.values[c[1]] + u.values[c[2]] +
                      u.values[c[3]]);
    acc += gc[cell] * mean * vol;
  }
  return acc;
}

ScalarField plap_solve(MeshPtr mesh, double p, const Load& g,
                       const PlapConfig& cfg, PlapInfo* info) {
  PlapSolver solver(std::move(mesh), p, cfg);
  return solver.solve(g, info);
}

double plap_residual(MeshPtr mesh, double p, const ScalarField& u,
                     const Load& g, const PlapConfig& cfg) {
  PlapSolver solver(std::move(mesh), p, cfg);
  return solver.residual(u, g);
}

}  // namespace squall
