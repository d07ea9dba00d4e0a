// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// with its key numbers and wall time; the process exits nonzero if any
// criterion fails or overruns its time budget.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "squall/barriers.hpp"
#include "squall/errors.hpp"
#include "squall/estimates.hpp"
#include "squall/fixedpoint.hpp"
#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/system.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using namespace squall;

namespace {

std::string g_cli;
fs::path g_scratch;
int g_failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <typename Body>
void criterion(const char* id, const char* label, double budget_s,
               Body&& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = fmt("exception: %s", e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++g_failures;
  std::printf("%-3s %-34s %s (%s)%s [%.1fs < %.0fs]\n", id, label,
              ok ? "PASS" : "FAIL", o.detail.c_str(),
              in_time ? "" : " over time budget", secs, budget_s);
  std::fflush(stdout);
}

double torsion_closed(double p, double x) {
  const double q = p / (p - 1.0);
  return (p - 1.0) / p *
         (std::pow(0.5, q) - std::pow(std::abs(x - 0.5), q));
}

SystemSpec competitive_spec() {
  SystemSpec spec;
  spec.alpha = {-0.2, 0.25};
  spec.beta = {0.3, -0.15};
  apply_auto_rules(spec);
  return spec;
}

struct PipelineRun {
  MeshPtr mesh;
  double C = 0.0;
  FixpointState state;
};

// Shared by criteria 5 and 6: full box pipeline on the competitive spec.
PipelineRun run_pipeline(int n, int calibration_loads) {
  PipelineRun run;
  run.mesh = rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n);
  const SystemSpec spec = competitive_spec();
  const BarrierSet bs = build_barrier_set(run.mesh, spec);
  const auto loads = default_calibration_loads(calibration_loads, 20260814u);
  const double k_grad = calibrate_kp(run.mesh, spec.p[0], loads, spec.r[0]).k_p;
  run.C = select_C(spec, bs, k_grad);
  run.state = iterate(spec, run.mesh, make_rectangle(bs, run.C), 0.5, 1e-6, 200);
  return run;
}

double min_interior(const ScalarField& f) {
  double lo = std::numeric_limits<double>::infinity();
  for (int n = 0; n < f.mesh->node_count(); ++n)
    if (!f.mesh->is_boundary(n)) lo = std::min(lo, f.values[n]);
  return lo;
}

Outcome criterion_closed_form() {
  const MeshPtr mesh = interval_mesh(0.0, 1.0, 257);
  double secs[2] = {0.0, 0.0};
  double sup[2] = {0.0, 0.0};
  const double ps[2] = {2.0, 3.0};
  for (int k = 0; k < 2; ++k) {
    const auto t0 = Clock::now();
    const ScalarField u = plap_solve(mesh, ps[k], ConstantLoad{1.0});
    secs[k] = std::chrono::duration<double>(Clock::now() - t0).count();
    for (int n = 0; n < mesh->node_count(); ++n) {
      const double x = mesh->node_coords(n)[0];
      sup[k] = std::max(sup[k], std::abs(u.values[n] - torsion_closed(ps[k], x)));
    }
  }
  const bool pass =
      sup[0] <= 1e-8 && sup[1] <= 1e-3 && secs[0] < 5.0 && secs[1] < 5.0;
  return {pass, fmt("sup p2=%.2e p3=%.2e, %.2fs/%.2fs per solve", sup[0],
                    sup[1], secs[0], secs[1])};
}

Outcome criterion_comparison() {
  std::mt19937 rng(20260814u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  int pairs = 0;
  for (int dim = 1; dim <= 2; ++dim) {
    const MeshPtr mesh = dim == 1 ? interval_mesh(0.0, 1.0, 129)
                                  : rectangle_mesh(0.0, 1.0, 0.0, 1.0, 33, 33);
    for (double p : {1.5, 2.0, 3.0}) {
      for (int k = 0; k < 100; ++k) {
        std::vector<double> g1(mesh->cell_count()), g2(mesh->cell_count());
        for (size_t c = 0; c < g1.size(); ++c) {
          g1[c] = unit(rng) < 0.15 ? 0.0 : unit(rng);
          g2[c] = g1[c] + unit(rng);
        }
        const ScalarField u1 = plap_solve(mesh, p, CellLoad{g1});
        const ScalarField u2 = plap_solve(mesh, p, CellLoad{g2});
        for (int n = 0; n < mesh->node_count(); ++n)
          worst = std::max(worst, u1.values[n] - u2.values[n]);
        ++pairs;
      }
    }
  }
  return {worst <= 1e-8,
          fmt("%d ordered pairs, worst inversion %.2e", pairs, worst)};
}

Outcome criterion_linear_barriers() {
  bool all = true;
  double worst_drift = 0.0;
  for (double p : {2.0, 3.0}) {
    for (double s : {-0.5, 0.0, 0.5}) {
      SystemSpec spec;
      spec.p = {p, p};
      spec.alpha = {s, s};
      spec.beta = {0.0, 0.0};
      apply_auto_rules(spec);
      const BarrierSet coarse =
          build_barrier_set(interval_mesh(0.0, 1.0, 129), spec);
      const BarrierSet fine =
          build_barrier_set(interval_mesh(0.0, 1.0, 257), spec);
      const Lemma2Report rep = verify_lemma2(coarse);
      const Lemma2Drift drift = lemma2_refinement_drift(coarse, fine);
      for (const Lemma2Row& row : rep.rows)
        all = all && row.z_le_y && row.z_positive;
      all = all && coarse.c0 > 0.0 && drift.stable;
      for (int i = 0; i < 2; ++i)
        worst_drift = std::max({worst_drift, drift.c0_drift[i],
                                drift.c1_drift[i]});
    }
  }
  return {all, fmt("6 parameter sets, worst constant drift %.1f%%",
                   100.0 * worst_drift)};
}

Outcome criterion_singular_barrier() {
  const MeshPtr coarse = interval_mesh(0.0, 1.0, 513);
  const MeshPtr fine = interval_mesh(0.0, 1.0, 4097);
  const SingularBarrier cb = build_singular_barrier(coarse, 2.0, 0.5);
  const SingularBarrier fb = build_singular_barrier(fine, 2.0, 0.5);
  double sup = 0.0;
  for (int n = 0; n < coarse->node_count(); ++n)
    sup = std::max(sup, std::abs(cb.w.values[n] - fb.w.values[8 * n]));
  double c2 = std::numeric_limits<double>::infinity(), c3 = 0.0;
  for (int n = 0; n < coarse->node_count(); ++n) {
    if (coarse->is_boundary(n)) continue;
    const double ratio = cb.w.values[n] / coarse->dist(n);
    c2 = std::min(c2, ratio);
    c3 = std::max(c3, ratio);
  }
  // coarse-fitted slopes must keep squeezing the fine field
  bool fine_squeeze = true;
  for (int n = 0; n < fine->node_count(); ++n) {
    if (fine->is_boundary(n)) continue;
    const double d = fine->dist(n);
    fine_squeeze = fine_squeeze && 0.9 * c2 * d <= fb.w.values[n] &&
                   fb.w.values[n] <= 1.1 * c3 * d;
  }
  const bool pass = sup <= 5e-3 && c2 > 0.0 && std::isfinite(c3) &&
                    fine_squeeze;
  return {pass, fmt("sup diff %.2e, slopes [%.3f, %.3f], fine squeeze %s",
                    sup, c2, c3, fine_squeeze ? "holds" : "broken")};
}

PipelineRun g_run65;

Outcome criterion_invariance() {
  g_run65 = run_pipeline(65, 8);
  const auto& hist = g_run65.state.membership_history;
  size_t inside = 0;
  for (const MembershipReport& m : hist)
    if (m.in_rectangle && m.grad_within_cap) ++inside;
  const bool pass = g_run65.C > 1.0 && !hist.empty() && inside == hist.size();
  return {pass, fmt("C=%g, %zu/%zu iterates inside the box", g_run65.C,
                    inside, hist.size())};
}

Outcome criterion_certificate() {
  const FixpointState& st = g_run65.state;
  if (st.status != FixpointStatus::converged)
    return {false, fmt("coarse run status %s after %d iterations",
                       to_string(st.status), st.k)};
  const double cert = std::max(st.certificate[0], st.certificate[1]);
  const double pos = std::min(min_interior(st.iterate[0]),
                              min_interior(st.iterate[1]));
  const PipelineRun fine = run_pipeline(257, 8);
  if (fine.state.status != FixpointStatus::converged)
    return {false, fmt("fine run status %s after %d iterations",
                       to_string(fine.state.status), fine.state.k)};
  double sup = 0.0;
  const int n65 = 65;
  for (int j = 0; j < n65; ++j)
    for (int i = 0; i < n65; ++i) {
      const int a = j * n65 + i;
      const int b = 4 * j * 257 + 4 * i;
      for (int c = 0; c < 2; ++c)
        sup = std::max(sup, std::abs(st.iterate[c].values[a] -
                                     fine.state.iterate[c].values[b]));
    }
  const bool pass = st.k <= 200 && cert <= 1e-5 && pos > 0.0 && sup <= 5e-3;
  return {pass,
          fmt("%d iterations, certificate %.2e, interior min %.2e, "
              "fine-grid sup diff %.2e",
              st.k, cert, pos, sup)};
}

Outcome criterion_gradient_holdout() {
  const MeshPtr mesh = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 33, 33);
  const auto train = default_calibration_loads(20, 101u);
  const auto hold = default_calibration_loads(10, 202u);
  bool all = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (double p : {2.0, 3.0}) {
    const CalibrationReport rep = calibrate_kp(mesh, p, train, 3.0);
    const auto rows = validate_kp(mesh, p, 3.0, rep.k_p, hold);
    all = all && rows.size() == 10;
    for (const ValidationRow& row : rows) {
      all = all && row.pass && row.id.find("skipped") == std::string::npos;
      if (row.bound > 0.0)
        worst_margin = std::min(worst_margin, 1.0 - row.grad_sup / row.bound);
    }
  }
  return {all, fmt("20 calibration / 10 holdout problems at p=2,3; "
                   "tightest holdout margin %.1f%%",
                   100.0 * worst_margin)};
}

Outcome criterion_admissibility_edge() {
  const double thr = (2.0 - 1.0) / 3.0;
  bool flip_exact = true;
  for (int k = -10; k <= 10; ++k) {
    SystemSpec spec = competitive_spec();
    const double g = thr + k * 1e-10;
    spec.gamma = {g, 0.0};
    apply_auto_rules(spec);
    const bool admissible = validate_cdt(spec).admissible;
    flip_exact = flip_exact && admissible == (g < thr);
  }

  SystemSpec bad = competitive_spec();
  bad.gamma = {0.5, 0.0};
  apply_auto_rules(bad);
  const fs::path spec_path = g_scratch / "edge_spec.ini";
  const fs::path out_dir = g_scratch / "edge_out";
  const fs::path log = g_scratch / "edge.log";
  save_spec_config(bad, spec_path.string());
  const std::string cmd = "'" + g_cli + "' fixpoint --spec '" +
                          spec_path.string() + "' --dim 1 --mesh-n 17 --out '" +
                          out_dir.string() + "' > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  const bool pass = flip_exact && status == 3;
  return {pass, fmt("flip at threshold %s, driver exit status %d",
                    flip_exact ? "exact" : "off", status)};
}

Outcome criterion_hardy_stability() {
  bool all = true;
  std::string detail;
  for (double mu : {0.0, -0.3}) {
    double ratios[3];
    const int sizes[3] = {65, 129, 257};
    for (int k = 0; k < 3; ++k) {
      const MeshPtr mesh = interval_mesh(0.0, 1.0, sizes[k]);
      ScalarField u = make_field(mesh);
      for (int n = 0; n < mesh->node_count(); ++n) {
        const double x = mesh->node_coords(n)[0];
        u.values[n] = torsion_closed(2.0, x);
      }
      ratios[k] = check_hardy(2.0, mu, u);
    }
    const double d1 = std::abs(ratios[1] - ratios[0]) / ratios[0];
    const double d2 = std::abs(ratios[2] - ratios[1]) / ratios[1];
    all = all && d1 < 0.10 && d2 < 0.10 && ratios[2] > 0.0;
    if (!detail.empty()) detail += ", ";
    detail += fmt("mu=%g drifts %.2f%%/%.2f%%", mu, 100.0 * d1, 100.0 * d2);
  }
  return {all, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <cli-path> <scratch-dir>\n");
    return 2;
  }
  g_cli = argv[1];
  g_scratch = argv[2];
  fs::create_directories(g_scratch);

  criterion("AC1", "closed-form solver accuracy", 10.0, criterion_closed_form);
  criterion("AC2", "weak comparison suite", 120.0, criterion_comparison);
  criterion("AC3", "linear barrier squeeze", 300.0, criterion_linear_barriers);
  criterion("AC4", "singular barrier squeeze", 120.0,
            criterion_singular_barrier);
  criterion("AC5", "rectangle invariance", 600.0, criterion_invariance);
  criterion("AC6", "fixed-point certificate", 1800.0, criterion_certificate);
  criterion("AC7", "gradient-bound holdout", 600.0,
            criterion_gradient_holdout);
  criterion("AC8", "admissibility boundary", 60.0,
            criterion_admissibility_edge);
  criterion("AC9", "weighted-ratio stability", 120.0,
            criterion_hardy_stability);

  std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
