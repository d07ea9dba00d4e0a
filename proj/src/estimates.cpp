#include "squall/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace squall {
namespace {

std::string load_label(const Load& g, int index) {
  struct Visitor {
    int index;
    std::string operator()(const ConstantLoad& c) const {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "const(%g)", c.value);
      return buf;
    }
    std::string operator()(const SingularLoad& s) const {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "singular(%g,%g,%g)", s.c0, s.c1, s.mu);
      return buf;
    }
    std::string operator()(const BandedLoad& b) const {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "banded(%g,%g)", b.s, b.band);
      return buf;
    }
    std::string operator()(const NodalLoad&) const {
      return "nodal#" + std::to_string(index);
    }
    std::string operator()(const CellLoad&) const {
      return "cell#" + std::to_string(index);
    }
  };
  return std::visit(Visitor{index}, g);
}

// corner mean of a nodal field on one cell
double cell_mean(const Mesh& mesh, const std::vector<double>& values,
                 int cell) {
  const auto c = mesh.cell_corners(cell);
  const int corners = mesh.dim() == 1 ? 2 : 4;
  double mean = 0.0;
  for (int k = 0; k < corners; ++k) mean += values[c[k]];
  return mean / corners;
}

double cell_mean_mag(const Mesh& mesh, const std::vector<Vec2>& grads,
                     int cell) {
  const auto c = mesh.cell_corners(cell);
  const int corners = mesh.dim() == 1 ? 2 : 4;
  double mean = 0.0;
  for (int k = 0; k < corners; ++k)
    mean += std::hypot(grads[c[k]][0], grads[c[k]][1]);
  return mean / corners;
}

}  // namespace

CalibrationReport calibrate_kp(MeshPtr mesh, double p,
                               const std::vector<Load>& problems, double r,
                               double safety, const PlapConfig& cfg,
                               double hardy_mu) {
  if (problems.empty()) throw CalibrationError("calibration set is empty");
  if (!(safety >= 1.0)) throw ConfigError("safety factor must be at least 1");
  PlapSolver solver(mesh, p, cfg);
  CalibrationReport rep;
  rep.safety = safety;
  double max_ratio = -1.0;
  for (size_t k = 0; k < problems.size(); ++k) {
    CalibrationSample sample;
    sample.id = load_label(problems[k], static_cast<int>(k));
    sample.load_norm = load_lr_norm(*mesh, problems[k], r);
    if (sample.load_norm <= 0.0) {
      sample.note = "skipped: load norm is zero";
      std::fprintf(stderr, "calibrate_kp: %s %s\n", sample.id.c_str(),
                   sample.note.c_str());
      rep.samples.push_back(std::move(sample));
      continue;
    }
    try {
      const ScalarField u = solver.solve(problems[k]);
      sample.grad_sup = norm_sup_grad(u);
      sample.ratio = sample.grad_sup / std::pow(sample.load_norm, 1.0 / (p - 1.0));
      sample.ok = true;
      max_ratio = std::max(max_ratio, sample.ratio);
      rep.hardy_constant =
          std::max(rep.hardy_constant, check_hardy(p, hardy_mu, u));
    } catch (const Error& e) {
      sample.note = std::string("skipped: ") + e.what();
      std::fprintf(stderr, "calibrate_kp: %s %s\n", sample.id.c_str(),
                   sample.note.c_str());
    }
    rep.samples.push_back(std::move(sample));
  }
  if (max_ratio < 0.0)
    throw CalibrationError("no calibration problem could be solved");
  rep.k_p = safety * max_ratio;
  return rep;
}

std::vector<ValidationRow> validate_kp(MeshPtr mesh, double p, double r,
                                       double k_p,
                                       const std::vector<Load>& holdout,
                                       const PlapConfig& cfg) {
  PlapSolver solver(mesh, p, cfg);
  std::vector<ValidationRow> rows;
  for (size_t k = 0; k < holdout.size(); ++k) {
    ValidationRow row;
    row.id = load_label(holdout[k], static_cast<int>(k));
    const double norm = load_lr_norm(*mesh, holdout[k], r);
    if (norm <= 0.0) {
      row.id += " (skipped: zero load norm)";
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const ScalarField u = solver.solve(holdout[k]);
      row.grad_sup = norm_sup_grad(u);
      row.bound = k_p * std::pow(norm, 1.0 / (p - 1.0));
      row.pass = row.grad_sup <= row.bound;
    } catch (const Error& e) {
      row.id += std::string(" (skipped: ") + e.what() + ")";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Load> default_calibration_loads(int count, unsigned seed,
                                            double mu_min) {
  if (count <= 0) throw ConfigError("load count must be positive");
  std::vector<Load> loads;
  loads.reserve(count);
  // deterministic low-discrepancy walk over the parameter boxes
  auto frac = [seed](int k, double stride) {
    double x = std::fmod(0.5 + (seed % 1000) * 1e-3 + k * stride, 1.0);
    return x;
  };
  for (int k = 0; k < count; ++k) {
    if (k % 2 == 0) {
      const double c = std::pow(4.0, 2.0 * frac(k, 0.6180339887498949) - 1.0);
      loads.push_back(ConstantLoad{c});
    } else {
      const double c0 = frac(k, 0.7548776662466927);
      const double c1 = 0.5 + 1.5 * frac(k, 0.5698402909980532);
      const double mu = mu_min + (0.5 - mu_min) * frac(k, 0.3247179572447458);
      loads.push_back(SingularLoad{c0, c1, mu});
    }
  }
  return loads;
}

double check_hardy(double p, double mu, const ScalarField& u) {
  const Mesh& mesh = *u.mesh;
  ScalarField mag = make_field(u.mesh);
  for (size_t n = 0; n < u.values.size(); ++n)
    mag.values[n] = std::abs(u.values[n]);
  const double numer = integrate_singular(mesh, mu, mag);

  const std::vector<Vec2> grads = gradient(u);
  double denom = 0.0;
  for (int n = 0; n < mesh.node_count(); ++n)
    denom += std::pow(std::hypot(grads[n][0], grads[n][1]), p) *
             mesh.node_weight(n);
  if (denom == 0.0) return 0.0;
  return numer / std::pow(denom, 1.0 / p);
}

EnergyChainReport energy_chain_report(const SystemSpec& spec, MeshPtr mesh,
                                      const ScalarField& u,
                                      const ScalarField& v,
                                      const PlapConfig& cfg) {
  EnergyChainReport rep;
  rep.all_hold = true;
  const std::vector<Vec2> gu = gradient(u);
  const std::vector<Vec2> gv = gradient(v);
  const std::array<const ScalarField*, 2> fields = {&u, &v};

  for (int i = 0; i < 2; ++i) {
    PlapSolver solver(mesh, spec.p[i], cfg);
    const ScalarField& ui = *fields[i];
    const double s_exp = spec.alpha[i] + spec.beta[i];

    // cell-center samples
    double f_pairing = 0.0;     // int f_i * u_i
    double power_term = 0.0;    // int s1^a s2^b * u_i
    double grad_u_term = 0.0;   // int |grad u|^gamma_i * u_i
    double grad_v_term = 0.0;   // int |grad v|^theta_i * u_i
    double dist_term = 0.0;     // int d^(a+b) * u_i
    double factor = 0.0;        // max (u/d)^a (v/d)^b at cell centers
    const double vol = mesh->cell_volume();
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const double s1 = cell_mean(*mesh, u.values, cell);
      const double s2 = cell_mean(*mesh, v.values, cell);
      const double wi = cell_mean(*mesh, ui.values, cell);
      const double x1 = cell_mean_mag(*mesh, gu, cell);
      const double x2 = cell_mean_mag(*mesh, gv, cell);
      const double d = mesh->dist_at(mesh->cell_center(cell));
      const double fv = eval_f(spec, i, s1, s2, x1, x2);
      const double base = std::pow(s1, spec.alpha[i]) * std::pow(s2, spec.beta[i]);
      f_pairing += fv * wi * vol;
      power_term += base * wi * vol;
      grad_u_term += std::pow(x1, spec.gamma[i]) * wi * vol;
      grad_v_term += std::pow(x2, spec.theta[i]) * wi * vol;
      dist_term += std::pow(d, s_exp) * wi * vol;
      factor = std::max(factor, std::pow(s1 / d, spec.alpha[i]) *
                                    std::pow(s2 / d, spec.beta[i]));
    }
    rep.distance_factor[i] = factor;

    const std::string tag = std::to_string(i + 1);
    auto push = [&rep](const std::string& name, double lhs, double rhs) {
      const double slack = 1e-6 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
      rep.rows.push_back({name, lhs, rhs, lhs <= rhs + slack});
      rep.all_hold = rep.all_hold && rep.rows.back().holds;
    };

    const double dirichlet = solver.grad_power_integral(ui, spec.p[i]);
    push("grad power " + tag + " vs load pairing", dirichlet, f_pairing);
    push("load pairing " + tag + " vs envelope terms", f_pairing,
         spec.M[i] * power_term + grad_u_term + grad_v_term);
    push("power integral " + tag + " vs distance form", spec.M[i] * power_term,
         spec.M[i] * factor * dist_term);
  }

  // exponent inequalities behind the gradient-growth absorption
  const auto pconj = [&spec](int i) { return spec.p[i] / (spec.p[i] - 1.0); };
  const double g_lhs =
      std::max(spec.gamma[0] * pconj(0), spec.gamma[1] * pconj(1));
  const double t_lhs =
      std::max(spec.theta[0] * pconj(0), spec.theta[1] * pconj(1));
  rep.rows.push_back({"max gamma_i*p_i' vs p1", g_lhs, spec.p[0], g_lhs < spec.p[0]});
  rep.all_hold = rep.all_hold && rep.rows.back().holds;
  rep.rows.push_back({"max theta_i*p_i' vs p2", t_lhs, spec.p[1], t_lhs < spec.p[1]});
  rep.all_hold = rep.all_hold && rep.rows.back().holds;
  return rep;
}

}  // namespace squall
