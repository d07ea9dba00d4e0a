#include "squall/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "squall/errors.hpp"

namespace squall {

namespace {

constexpr double kBoxTol = 1e-10;

double band_load_at(double d, double s, double delta) {
  return d >= delta ? std::pow(d, s) : -1.0;
}

// Bounds of w1^a * w2^b over the box through the fitted distance ratios:
// box fields sit between c0*d/C and c1*d*C, so the product sits between
// cmin * C^-abs_pow * d^(a+b) and cmax * C^abs_pow * d^(a+b).
struct EnvelopeFactors {
  double cmin = 1.0;
  double cmax = 1.0;
  double abs_pow = 0.0;
};

EnvelopeFactors envelope_factors(const SystemSpec& spec, const BarrierSet& bs,
                                 int i) {
  const double a = spec.alpha[i];
  const double b = spec.beta[i];
  EnvelopeFactors e;
  e.cmin = std::pow(a > 0 ? bs.c0 : bs.c1, a) *
           std::pow(b > 0 ? bs.c0 : bs.c1, b);
  e.cmax = std::pow(a > 0 ? bs.c1 : bs.c0, a) *
           std::pow(b > 0 ? bs.c1 : bs.c0, b);
  e.abs_pow = std::abs(a) + std::abs(b);
  return e;
}

}  // namespace

bool closure_holds(const SystemSpec& spec, const BarrierSet& bs, double k_grad,
                   double C, std::string* blocker) {
  const Mesh& mesh = *bs.mesh;
  auto fail = [&](const char* what, int i) {
    if (blocker) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s (equation %d, C=%g)", what, i + 1,
                    C);
      *blocker = buf;
    }
    return false;
  };
  for (int i = 0; i < 2; ++i) {
    const double pm1 = spec.p[i] - 1.0;
    const double s = spec.alpha[i] + spec.beta[i];
    const double gt = std::max(spec.gamma[i], spec.theta[i]);
    const EnvelopeFactors env = envelope_factors(spec, bs, i);
    const double low_env = spec.m[i] * env.cmin * std::pow(C, -env.abs_pow);
    const double high_env = spec.M[i] * env.cmax * std::pow(C, env.abs_pow);
    const double sub_scale = std::pow(C, -pm1);
    const double super_scale = std::pow(C, pm1);
    const double grad_term = 2.0 * std::pow(C, gt);
    for (int n = 0; n < mesh.node_count(); ++n) {
      if (mesh.is_boundary(n)) continue;
      const double d = mesh.dist(n);
      const double ds = std::pow(d, s);
      const double sub_lhs = sub_scale * band_load_at(d, s, bs.delta);
      const double sub_rhs = low_env * ds;
      if (sub_lhs > sub_rhs + 1e-12 * (1.0 + std::abs(sub_rhs)))
        return fail("sub-side load inequality", i);
      const double super_lhs = super_scale * (1.0 + ds);
      const double super_rhs = high_env * ds + grad_term;
      if (super_lhs < super_rhs - 1e-12 * (1.0 + std::abs(super_rhs)))
        return fail("super-side envelope inequality", i);
    }
    const double mu_hat =
        std::pow(integrate_singular(mesh, spec.r[i] * s), 1.0 / spec.r[i]);
    const double norm_lhs =
        high_env * mu_hat + 2.0 * mesh.volume() * std::pow(C, gt);
    const double norm_rhs = std::pow(C / k_grad, pm1);
    if (norm_lhs > norm_rhs + 1e-12 * (1.0 + std::abs(norm_rhs)))
      return fail("gradient norm closure", i);
  }
  return true;
}

double closure_norm_slack(const SystemSpec& spec, const BarrierSet& bs,
                          double k_grad, double C) {
  const Mesh& mesh = *bs.mesh;
  double slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    const double s = spec.alpha[i] + spec.beta[i];
    const double gt = std::max(spec.gamma[i], spec.theta[i]);
    const EnvelopeFactors env = envelope_factors(spec, bs, i);
    const double high_env = spec.M[i] * env.cmax * std::pow(C, env.abs_pow);
    const double mu_hat =
        std::pow(integrate_singular(mesh, spec.r[i] * s), 1.0 / spec.r[i]);
    const double lhs =
        high_env * mu_hat + 2.0 * mesh.volume() * std::pow(C, gt);
    const double rhs = std::pow(C / k_grad, spec.p[i] - 1.0);
    slack = std::min(slack, rhs - lhs);
  }
  return slack;
}

double select_C(const SystemSpec& spec, const BarrierSet& bs, double k_grad) {
  validate_spec_shape(spec);
  const AdmissibilityReport rep = validate_cdt(spec);
  if (!rep.admissible) {
    std::string msg = "exponents fail admissibility:";
    for (const auto& c : rep.checks)
      if (!c.pass) msg += " [" + c.name + "]";
    throw AdmissibilityError(msg);
  }
  if (!(k_grad > 0.0))
    throw ConfigError("gradient constant must be positive");
  std::string blocker;
  for (int e = 1; e <= 20; ++e) {
    const double C = std::ldexp(1.0, e);
    if (closure_holds(spec, bs, k_grad, C, &blocker)) return C;
  }
  throw ClosureFailure("no scale in {2, ..., 2^20} closes the box; blocked by " +
                       blocker);
}

Rectangle make_rectangle(const BarrierSet& bs, double C) {
  if (!(C > 1.0)) throw ConfigError("box scale must exceed 1");
  const Mesh& mesh = *bs.mesh;
  Rectangle rect;
  rect.C = C;
  rect.grad_cap = C;
  for (int i = 0; i < 2; ++i) {
    rect.lower[i] = bs.z[i];
    rect.upper[i] = bs.y[i];
    for (int n = 0; n < mesh.node_count(); ++n) {
      rect.lower[i].values[n] /= C;
      rect.upper[i].values[n] *= C;
    }
    for (int n = 0; n < mesh.node_count(); ++n) {
      if (mesh.is_boundary(n)) continue;
      if (!(rect.lower[i].values[n] < rect.upper[i].values[n]))
        throw BarrierFailure("box degenerate at an interior node");
    }
  }
  return rect;
}

FrozenOperator::FrozenOperator(const SystemSpec& spec, MeshPtr mesh,
                               const PlapConfig& cfg)
    : spec_(spec),
      mesh_(std::move(mesh)),
      s1_(mesh_, spec.p[0], cfg),
      s2_(mesh_, spec.p[1], cfg) {
  validate_spec_shape(spec_);
}

std::array<std::vector<double>, 2> FrozenOperator::frozen_loads(
    const ScalarField& w1, const ScalarField& w2) const {
  const Mesh& mesh = *mesh_;
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (mesh.is_boundary(n)) continue;
    if (!(w1.values[n] > 0.0) || !(w2.values[n] > 0.0)) {
      const Vec2 x = mesh.node_coords(n);
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "frozen pair nonpositive at interior node %d (%.6g, %.6g)",
                    n, x[0], x[1]);
      throw DomainError(buf);
    }
  }
  const auto g1 = gradient(w1);
  const auto g2 = gradient(w2);
  const int cpc = mesh.corners_per_cell();
  std::array<std::vector<double>, 2> loads;
  loads[0].resize(mesh.cell_count());
  loads[1].resize(mesh.cell_count());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto corners = mesh.cell_corners(c);
    double s1 = 0.0, s2 = 0.0, x1 = 0.0, x2 = 0.0;
    for (int k = 0; k < cpc; ++k) {
      const int n = corners[k];
      s1 += w1.values[n];
      s2 += w2.values[n];
      x1 += std::hypot(g1[n][0], g1[n][1]);
      x2 += std::hypot(g2[n][0], g2[n][1]);
    }
    s1 /= cpc;
    s2 /= cpc;
    x1 /= cpc;
    x2 /= cpc;
    loads[0][c] = eval_f(spec_, 0, s1, s2, x1, x2);
    loads[1][c] = eval_f(spec_, 1, s1, s2, x1, x2);
  }
  return loads;
}

std::pair<ScalarField, ScalarField> FrozenOperator::apply(
    const ScalarField& w1, const ScalarField& w2) const {
  auto loads = frozen_loads(w1, w2);
  ScalarField u = s1_.solve(CellLoad{std::move(loads[0])});
  ScalarField v = s2_.solve(CellLoad{std::move(loads[1])});
  return {std::move(u), std::move(v)};
}

std::pair<ScalarField, ScalarField> apply_T(const SystemSpec& spec,
                                            MeshPtr mesh,
                                            const ScalarField& w1,
                                            const ScalarField& w2,
                                            const PlapConfig& cfg) {
  return FrozenOperator(spec, std::move(mesh), cfg).apply(w1, w2);
}

MembershipReport membership(const Rectangle& rect, const ScalarField& u,
                            const ScalarField& v) {
  if (u.values.size() != rect.lower[0].values.size() ||
      v.values.size() != rect.lower[1].values.size())
    throw ConfigError("field does not match the box mesh");
  MembershipReport rep;
  double lo = std::numeric_limits<double>::lowest();
  double hi = std::numeric_limits<double>::lowest();
  const std::array<const ScalarField*, 2> fields{&u, &v};
  for (int i = 0; i < 2; ++i) {
    const auto& f = fields[i]->values;
    const auto& lov = rect.lower[i].values;
    const auto& hiv = rect.upper[i].values;
    for (std::size_t n = 0; n < f.size(); ++n) {
      lo = std::max(lo, lov[n] - f[n]);
      hi = std::max(hi, f[n] - hiv[n]);
    }
  }
  rep.worst_lower = lo;
  rep.worst_upper = hi;
  rep.in_rectangle = lo <= kBoxTol && hi <= kBoxTol;
  const double g = std::max(norm_sup_grad(u), norm_sup_grad(v));
  rep.worst_grad = g - rect.grad_cap;
  rep.grad_within_cap = rep.worst_grad <= kBoxTol;
  return rep;
}

const char* to_string(FixpointStatus s) {
  switch (s) {
    case FixpointStatus::running:
      return "running";
    case FixpointStatus::converged:
      return "converged";
    case FixpointStatus::iteration_limit:
      return "iteration-limit";
    case FixpointStatus::left_set:
      return "left-set";
  }
  return "unknown";
}

FixpointState iterate(const SystemSpec& spec, MeshPtr mesh,
                      const Rectangle& rect, double damping, double tol,
                      int max_iter, const PlapConfig& cfg) {
  if (!(damping > 0.0 && damping <= 1.0))
    throw ConfigError("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  const FrozenOperator T(spec, mesh, cfg);
  const int nn = mesh->node_count();

  FixpointState st;
  st.iterate[0] = make_field(mesh);
  st.iterate[1] = make_field(mesh);
  for (int i = 0; i < 2; ++i)
    for (int n = 0; n < nn; ++n)
      st.iterate[i].values[n] =
          0.5 * (rect.lower[i].values[n] + rect.upper[i].values[n]);

  while (st.k < max_iter) {
    auto [tu, tv] = T.apply(st.iterate[0], st.iterate[1]);
    st.membership_history.push_back(membership(rect, tu, tv));

    std::array<ScalarField, 2> next{make_field(mesh), make_field(mesh)};
    const std::array<const ScalarField*, 2> image{&tu, &tv};
    double worst_clamp = 0.0;
    double val_diff = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int n = 0; n < nn; ++n) {
        const double w = st.iterate[i].values[n];
        const double step =
            (1.0 - damping) * w + damping * image[i]->values[n];
        const double clamped =
            std::min(std::max(step, rect.lower[i].values[n]),
                     rect.upper[i].values[n]);
        worst_clamp = std::max(worst_clamp, std::abs(clamped - step));
        val_diff = std::max(val_diff, std::abs(clamped - w));
        next[i].values[n] = clamped;
      }
    }
    double grad_diff = 0.0;
    for (int i = 0; i < 2; ++i) {
      ScalarField diff = next[i];
      for (int n = 0; n < nn; ++n) diff.values[n] -= st.iterate[i].values[n];
      grad_diff = std::max(grad_diff, norm_sup_grad(diff));
    }
    st.residual_history.push_back(val_diff + grad_diff);
    st.clamp_history.push_back(worst_clamp);
    st.iterate = std::move(next);
    ++st.k;

    if (worst_clamp > kBoxTol) {
      st.status = FixpointStatus::left_set;
      break;
    }
    if (st.residual_history.back() < tol) {
      // Certificate: one more application, checked as a discrete solution
      // with the loads frozen at its own output.
      auto [cu, cv] = T.apply(st.iterate[0], st.iterate[1]);
      const MembershipReport mem = membership(rect, cu, cv);
      auto self_loads = T.frozen_loads(cu, cv);
      const double r0 =
          T.solver(0).residual(cu, CellLoad{std::move(self_loads[0])});
      const double r1 =
          T.solver(1).residual(cv, CellLoad{std::move(self_loads[1])});
      if (r0 <= 10.0 * tol && r1 <= 10.0 * tol && mem.in_rectangle &&
          mem.grad_within_cap) {
        st.iterate[0] = std::move(cu);
        st.iterate[1] = std::move(cv);
        st.certificate = {r0, r1};
        st.membership_history.push_back(mem);
        st.status = FixpointStatus::converged;
        break;
      }
    }
  }
  if (st.status == FixpointStatus::running)
    st.status = FixpointStatus::iteration_limit;
  const MembershipReport fin = membership(rect, st.iterate[0], st.iterate[1]);
  st.in_rectangle = fin.in_rectangle;
  st.grad_within_cap = fin.grad_within_cap;
  return st;
}

}  // namespace squall
