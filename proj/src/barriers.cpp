#include "squall/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace squall {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void require_load_exponent(double p, double s) {
  if (!(p > 1.0)) throw HypothesisViolation("p must exceed 1, got " + fmt17(p));
  if (!(s > -1.0 && s < p - 1.0))
    throw HypothesisViolation("load exponent " + fmt17(s) +
                              " outside (-1, p-1) = (-1, " + fmt17(p - 1.0) + ")");
}

struct RatioExtrema {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

// min and max of field/dist over interior nodes
RatioExtrema interior_ratio(const ScalarField& u) {
  RatioExtrema ext;
  const Mesh& mesh = *u.mesh;
  for (int n = 0; n < mesh.node_count(); ++n) {
    const double d = mesh.dist(n);
    if (d <= 0.0) continue;
    const double ratio = u.values[n] / d;
    ext.min = std::min(ext.min, ratio);
    ext.max = std::max(ext.max, ratio);
  }
  return ext;
}

bool nodewise_le(const ScalarField& a, const ScalarField& b, double slack) {
  for (size_t n = 0; n < a.values.size(); ++n)
    if (a.values[n] > b.values[n] + slack) return false;
  return true;
}

// c_lo * d <= u <= c_hi * d at interior nodes, with relative slack for the
// fitted endpoints
bool squeeze_ok(const ScalarField& u, double c_lo, double c_hi) {
  const RatioExtrema ext = interior_ratio(u);
  return ext.min >= c_lo * (1.0 - 1e-12) && ext.max <= c_hi * (1.0 + 1e-12);
}

}  // namespace

ScalarField build_y(MeshPtr mesh, double p, double s, const PlapConfig& cfg) {
  require_load_exponent(p, s);
  return plap_solve(mesh, p, SingularLoad{1.0, 1.0, s}, cfg);
}

ScalarField build_z(MeshPtr mesh, double p, double s, double delta,
                    const PlapConfig& cfg, double* delta_used,
                    int max_halvings) {
  require_load_exponent(p, s);
  if (!(delta > 0.0) || delta >= 0.5 * mesh->inradius())
    throw ConfigError("band thickness " + fmt17(delta) +
                      " outside (0, inradius/2) = (0, " +
                      fmt17(0.5 * mesh->inradius()) + ")");
  double cur = delta;
  for (int attempt = 0; attempt <= max_halvings; ++attempt) {
    ScalarField z = plap_solve(mesh, p, BandedLoad{s, cur}, cfg);
    if (interior_ratio(z).min > 0.0) {
      if (delta_used) *delta_used = cur;
      return z;
    }
    cur *= 0.5;
  }
  throw BarrierFailure("band solution stayed nonpositive after " +
                       std::to_string(max_halvings) +
                       " halvings from thickness " + fmt17(delta));
}

TorsionResult build_torsion(MeshPtr mesh, double p, const PlapConfig& cfg) {
  TorsionResult out{plap_solve(mesh, p, ConstantLoad{1.0}, cfg), 0.0};
  out.L_hat = norm_sup_grad(out.w);
  return out;
}

SingularBarrier build_singular_barrier(MeshPtr mesh, double p, double gamma,
                                       const PlapConfig& cfg) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw HypothesisViolation("singular exponent " + fmt17(gamma) +
                              " outside (0, 1)");
  double min_d = std::numeric_limits<double>::infinity();
  for (int n = 0; n < mesh->node_count(); ++n) {
    const double d = mesh->dist(n);
    if (d > 0.0) min_d = std::min(min_d, d);
  }
  const double floor = 1e-4 * min_d;

  PlapSolver solver(mesh, p, cfg);
  SingularBarrier out;
  out.w = plap_solve(mesh, p, ConstantLoad{1.0}, cfg);
  const int corners = mesh->dim() == 1 ? 2 : 4;
  std::vector<double> load(mesh->cell_count(), 0.0);
  for (out.iterations = 0; out.iterations < 100; ++out.iterations) {
    for (int cell = 0; cell < mesh->cell_count(); ++cell) {
      const auto c = mesh->cell_corners(cell);
      double mean = 0.0;
      for (int k = 0; k < corners; ++k) mean += out.w.values[c[k]];
      mean /= corners;
      load[cell] = std::pow(std::max(mean, floor), -gamma);
    }
    ScalarField next = solver.solve(CellLoad{load});
    double diff = 0.0;
    for (size_t n = 0; n < next.values.size(); ++n)
      diff = std::max(diff, std::abs(next.values[n] - out.w.values[n]));
    out.w = std::move(next);
    out.sup_diffs.push_back(diff);
    if (diff < 1e-8) return out;
  }
  throw PlapIterationLimit(
      "singular barrier loop still moving by " + fmt17(out.sup_diffs.back()) +
          " after 100 outer iterations",
      std::move(out.w), out.sup_diffs.back());
}

BarrierSet build_barrier_set(MeshPtr mesh, const SystemSpec& spec,
                             double gamma_sing, const PlapConfig& cfg) {
  BarrierSet bs;
  bs.mesh = mesh;
  const std::array<double, 2> s = {spec.alpha[0] + spec.beta[0],
                                   spec.alpha[1] + spec.beta[1]};
  for (int i = 0; i < 2; ++i) require_load_exponent(spec.p[i], s[i]);

  const double smax = std::max(std::abs(s[0]), std::abs(s[1]));
  if (gamma_sing <= 0.0) gamma_sing = 0.5 * (smax + 1.0);
  if (!(gamma_sing > smax && gamma_sing < 1.0))
    throw HypothesisViolation("singular exponent " + fmt17(gamma_sing) +
                              " outside (max_i |alpha_i+beta_i|, 1) = (" +
                              fmt17(smax) + ", 1)");
  bs.gamma_sing = gamma_sing;

  for (int i = 0; i < 2; ++i) bs.y[i] = build_y(mesh, spec.p[i], s[i], cfg);

  // shared band thickness: halve until both z fields are positive
  double delta = 0.1 * mesh->inradius();
  bool placed = false;
  for (int attempt = 0; attempt <= 6 && !placed; ++attempt) {
    try {
      for (int i = 0; i < 2; ++i)
        bs.z[i] = build_z(mesh, spec.p[i], s[i], delta, cfg, nullptr, 0);
      placed = true;
    } catch (const BarrierFailure&) {
      delta *= 0.5;
    }
  }
  if (!placed)
    throw BarrierFailure("no band thickness kept both z fields positive");
  bs.delta = delta;

  bs.L_hat = 0.0;
  for (int i = 0; i < 2; ++i) {
    TorsionResult tor = build_torsion(mesh, spec.p[i], cfg);
    bs.w_hat[i] = std::move(tor.w);
    bs.L_hat = std::max(bs.L_hat, tor.L_hat);
    bs.w_sing[i] = build_singular_barrier(mesh, spec.p[i], gamma_sing, cfg).w;
  }

  double z_min = std::numeric_limits<double>::infinity();
  double y_max = 0.0;
  double w_min = std::numeric_limits<double>::infinity();
  double w_max = 0.0;
  for (int i = 0; i < 2; ++i) {
    const RatioExtrema zr = interior_ratio(bs.z[i]);
    const RatioExtrema yr = interior_ratio(bs.y[i]);
    const RatioExtrema wr = interior_ratio(bs.w_sing[i]);
    z_min = std::min(z_min, zr.min);
    y_max = std::max(y_max, yr.max);
    w_min = std::min(w_min, wr.min);
    w_max = std::max(w_max, wr.max);
  }
  bs.c0 = 0.9 * z_min;
  bs.c1 = y_max;
  bs.c2 = 0.9 * w_min;
  bs.c3 = w_max;
  return bs;
}

Lemma2Report verify_lemma2(const BarrierSet& bs) {
  Lemma2Report rep;
  rep.pass = true;
  for (int i = 0; i < 2; ++i) {
    Lemma2Row& row = rep.rows[i];
    const RatioExtrema zr = interior_ratio(bs.z[i]);
    const RatioExtrema yr = interior_ratio(bs.y[i]);
    row.min_z_over_d = zr.min;
    row.max_z_over_d = zr.max;
    row.min_y_over_d = yr.min;
    row.max_y_over_d = yr.max;
    row.z_positive = zr.min > 0.0;
    row.z_le_y = nodewise_le(bs.z[i], bs.y[i], 1e-12);
    row.c0_bound_holds = zr.min >= bs.c0 * (1.0 - 1e-12);
    row.c1_bound_holds = yr.max <= bs.c1 * (1.0 + 1e-12);
    row.squeeze_holds = squeeze_ok(bs.w_sing[i], bs.c2, bs.c3);
    rep.pass = rep.pass && row.z_positive && row.z_le_y && row.c0_bound_holds &&
               row.c1_bound_holds && row.squeeze_holds;
  }
  return rep;
}

Lemma2Drift lemma2_refinement_drift(const BarrierSet& coarse,
                                    const BarrierSet& fine) {
  Lemma2Drift drift;
  drift.stable = true;
  for (int i = 0; i < 2; ++i) {
    const double c0c = interior_ratio(coarse.z[i]).min;
    const double c0f = interior_ratio(fine.z[i]).min;
    const double c1c = interior_ratio(coarse.y[i]).max;
    const double c1f = interior_ratio(fine.y[i]).max;
    drift.c0_drift[i] = std::abs(c0f - c0c) / std::abs(c0c);
    drift.c1_drift[i] = std::abs(c1f - c1c) / std::abs(c1c);
    drift.stable = drift.stable && drift.c0_drift[i] < 0.2 &&
                   drift.c1_drift[i] < 0.2;
  }
  return drift;
}

std::string barrier_report_text(const BarrierSet& bs) {
  const Lemma2Report rep = verify_lemma2(bs);
  std::ostringstream out;
  out << "c0 = " << fmt17(bs.c0) << "\n";
  out << "c1 = " << fmt17(bs.c1) << "\n";
  out << "c2 = " << fmt17(bs.c2) << "\n";
  out << "c3 = " << fmt17(bs.c3) << "\n";
  out << "delta = " << fmt17(bs.delta) << "\n";
  out << "gamma_sing = " << fmt17(bs.gamma_sing) << "\n";
  out << "L_hat = " << fmt17(bs.L_hat) << "\n";
  for (int i = 0; i < 2; ++i) {
    const Lemma2Row& row = rep.rows[i];
    const std::string t = std::to_string(i + 1);
    out << "min_z" << t << "_over_d = " << fmt17(row.min_z_over_d) << "\n";
    out << "max_z" << t << "_over_d = " << fmt17(row.max_z_over_d) << "\n";
    out << "min_y" << t << "_over_d = " << fmt17(row.min_y_over_d) << "\n";
    out << "max_y" << t << "_over_d = " << fmt17(row.max_y_over_d) << "\n";
    out << "z" << t << "_le_y" << t << " = " << (row.z_le_y ? "true" : "false")
        << "\n";
  }
  out << "pass = " << (rep.pass ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace squall
