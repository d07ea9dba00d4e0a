#include <cmath>

#include "doctest.h"
#include "squall/barriers.hpp"

using namespace squall;

namespace {

// closed form for -z'' = (1 outside the band, -1 inside), band d < 0.1 on [0,1]
double banded_interval_solution(double x) {
  const double d = std::min(x, 1.0 - x);
  if (d < 0.1) return 0.3 * d + 0.5 * d * d;
  return 0.5 * d - 0.5 * d * d - 0.01;
}

SystemSpec reference_spec() {
  SystemSpec s;
  s.N = 2;
  s.p = {2.0, 2.0};
  s.r = {3.0, 3.0};
  s.alpha = {-0.2, 0.25};
  s.beta = {0.3, -0.15};
  apply_auto_rules(s);
  return s;
}

}  // namespace

TEST_SUITE("barriers") {

TEST_CASE("constant-exponent upper field matches the parabola") {
  auto mesh = interval_mesh(0.0, 1.0, 129);
  const ScalarField y = build_y(mesh, 2.0, 0.0);
  for (int n = 0; n < mesh->node_count(); ++n) {
    const double x = mesh->node_coords(n)[0];
    CHECK(std::abs(y.values[n] - x * (1.0 - x)) < 1e-8);
  }
}

TEST_CASE("upper field with singular load is refinement-consistent") {
  auto coarse = interval_mesh(0.0, 1.0, 129);
  auto fine = interval_mesh(0.0, 1.0, 257);
  const ScalarField yc = build_y(coarse, 2.0, -0.5);
  const ScalarField yf = build_y(fine, 2.0, -0.5);
  double worst = 0.0;
  for (int n = 0; n < coarse->node_count(); ++n)
    worst = std::max(worst, std::abs(yc.values[n] - yf.values[2 * n]));
  CHECK(worst < 5e-3);
  for (int n = 1; n + 1 < coarse->node_count(); ++n) CHECK(yc.values[n] > 0.0);
}

TEST_CASE("upper field rejects exponents outside the admissible window") {
  auto mesh = interval_mesh(0.0, 1.0, 33);
  CHECK_THROWS_AS(build_y(mesh, 2.0, -1.0), HypothesisViolation);
  CHECK_THROWS_AS(build_y(mesh, 2.0, 1.0), HypothesisViolation);
  CHECK_THROWS_AS(build_y(mesh, 3.0, 2.0), HypothesisViolation);
  CHECK_NOTHROW(build_y(mesh, 3.0, 1.5));
}

TEST_CASE("band solution matches the piecewise closed form") {
  auto mesh = interval_mesh(0.0, 1.0, 161);
  double used = 0.0;
  const ScalarField z = build_z(mesh, 2.0, 0.0, 0.1, {}, &used);
  CHECK(used == 0.1);
  for (int n = 0; n < mesh->node_count(); ++n) {
    const double x = mesh->node_coords(n)[0];
    CHECK(std::abs(z.values[n] - banded_interval_solution(x)) < 1e-3);
  }
  // center value and worst ratio frozen from the closed form
  const int mid = mesh->node_count() / 2;
  CHECK(z.values[mid] == doctest::Approx(0.115).epsilon(5e-3));

  const ScalarField y = build_y(mesh, 2.0, 0.0);
  for (int n = 0; n < mesh->node_count(); ++n)
    CHECK(z.values[n] <= y.values[n] + 1e-12);
}

TEST_CASE("band thickness halves until the field turns positive") {
  auto mesh = interval_mesh(0.0, 1.0, 201);
  double used = 0.0;
  const ScalarField z = build_z(mesh, 2.0, 0.5, 0.24, {}, &used);
  CHECK(used == doctest::Approx(0.12));
  double worst = 1e300;
  for (int n = 1; n + 1 < mesh->node_count(); ++n)
    worst = std::min(worst, z.values[n] / mesh->dist(n));
  CHECK(worst > 0.0);

  // with halving disabled the same start fails loudly
  CHECK_THROWS_AS(build_z(mesh, 2.0, 0.5, 0.24, {}, nullptr, 0),
                  BarrierFailure);
}

TEST_CASE("band thickness outside its window is rejected") {
  auto mesh = interval_mesh(0.0, 1.0, 33);
  CHECK_THROWS_AS(build_z(mesh, 2.0, 0.0, 0.5, {}), ConfigError);
  CHECK_THROWS_AS(build_z(mesh, 2.0, 0.0, 0.25, {}), ConfigError);
  CHECK_THROWS_AS(build_z(mesh, 2.0, 0.0, 0.0, {}), ConfigError);
  CHECK_THROWS_AS(build_z(mesh, 2.0, 0.0, -0.1, {}), ConfigError);
}

TEST_CASE("torsion fields match closed forms and record the slope") {
  auto mesh = interval_mesh(0.0, 1.0, 129);
  const TorsionResult lin = build_torsion(mesh, 2.0);
  for (int n = 0; n < mesh->node_count(); ++n) {
    const double x = mesh->node_coords(n)[0];
    CHECK(std::abs(lin.w.values[n] - 0.5 * x * (1.0 - x)) < 1e-10);
  }
  CHECK(std::abs(lin.L_hat - 0.5) < 2.0 / 128.0);

  auto fine = interval_mesh(0.0, 1.0, 257);
  const TorsionResult cub = build_torsion(fine, 3.0);
  CHECK(std::abs(cub.L_hat - std::sqrt(0.5)) < 0.01);

  auto square = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 33, 33);
  const TorsionResult sq = build_torsion(square, 2.0);
  CHECK(sq.L_hat > 0.25);
  CHECK(sq.L_hat < 0.5);
}

TEST_CASE("singular barrier converges, squeezes, and refines consistently") {
  auto coarse = interval_mesh(0.0, 1.0, 129);
  auto fine = interval_mesh(0.0, 1.0, 257);
  const SingularBarrier wc = build_singular_barrier(coarse, 2.0, 0.5);
  const SingularBarrier wf = build_singular_barrier(fine, 2.0, 0.5);
  CHECK(wc.iterations < 100);
  CHECK(wc.sup_diffs.back() < 1e-8);

  double worst = 0.0;
  for (int n = 0; n < coarse->node_count(); ++n)
    worst = std::max(worst, std::abs(wc.w.values[n] - wf.w.values[2 * n]));
  CHECK(worst < 5e-3);

  // linear squeeze with positive slope on both sides
  double rmin = 1e300, rmax = 0.0;
  for (int n = 1; n + 1 < coarse->node_count(); ++n) {
    const double ratio = wc.w.values[n] / coarse->dist(n);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  CHECK(rmin > 0.0);
  CHECK(rmax < 1e300);

  // the outer loop settles monotonically
  const auto& d = wc.sup_diffs;
  REQUIRE(d.size() >= 5);
  for (size_t k = d.size() - 4; k < d.size(); ++k) CHECK(d[k] <= d[k - 1]);
}

TEST_CASE("weak singularity stays near the torsion field away from the edge") {
  auto mesh = interval_mesh(0.0, 1.0, 257);
  const SingularBarrier w = build_singular_barrier(mesh, 2.0, 1e-3);
  const TorsionResult tor = build_torsion(mesh, 2.0);
  for (int n = 0; n < mesh->node_count(); ++n) {
    if (mesh->dist(n) <= 0.1) continue;
    CHECK(std::abs(w.w.values[n] - tor.w.values[n]) < 1e-2);
  }
}

TEST_CASE("singular exponent outside (0,1) is rejected") {
  auto mesh = interval_mesh(0.0, 1.0, 33);
  CHECK_THROWS_AS(build_singular_barrier(mesh, 2.0, 1.0), HypothesisViolation);
  CHECK_THROWS_AS(build_singular_barrier(mesh, 2.0, 0.0), HypothesisViolation);
  CHECK_THROWS_AS(build_singular_barrier(mesh, 2.0, -0.5), HypothesisViolation);
}

TEST_CASE("full comparison set passes its own verification") {
  auto mesh = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 33, 33);
  const auto spec = reference_spec();
  const BarrierSet bs = build_barrier_set(mesh, spec);
  CHECK(bs.gamma_sing == doctest::Approx(0.55));
  CHECK(bs.c0 > 0.0);
  CHECK(bs.c1 > bs.c0);
  CHECK(bs.c2 > 0.0);
  CHECK(bs.c3 > bs.c2);
  CHECK(bs.L_hat > 0.0);
  CHECK(bs.delta == doctest::Approx(0.05));

  const Lemma2Report rep = verify_lemma2(bs);
  CHECK(rep.pass);
  for (int i = 0; i < 2; ++i) {
    CHECK(rep.rows[i].z_positive);
    CHECK(rep.rows[i].z_le_y);
    CHECK(rep.rows[i].c0_bound_holds);
    CHECK(rep.rows[i].c1_bound_holds);
    CHECK(rep.rows[i].squeeze_holds);
    CHECK(rep.rows[i].min_z_over_d > 0.0);
    CHECK(rep.rows[i].max_y_over_d >= rep.rows[i].min_y_over_d);
  }

  // torsion fields stay under the composite linear bound
  for (int i = 0; i < 2; ++i) {
    double slope = bs.L_hat;
    for (int n = 0; n < mesh->node_count(); ++n) {
      const double d = mesh->dist(n);
      if (d >= bs.delta) slope = std::max(slope, bs.w_hat[i].values[n] / d);
    }
    for (int n = 0; n < mesh->node_count(); ++n)
      CHECK(bs.w_hat[i].values[n] <=
            slope * mesh->dist(n) * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("perturbing a stored field flips the verification") {
  auto mesh = interval_mesh(0.0, 1.0, 65);
  SystemSpec spec = reference_spec();
  spec.N = 1;
  BarrierSet bs = build_barrier_set(mesh, spec);
  REQUIRE(verify_lemma2(bs).pass);
  for (int n = 0; n < mesh->node_count(); ++n)
    bs.z[0].values[n] -= 0.1 * mesh->dist(n);
  const Lemma2Report rep = verify_lemma2(bs);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.rows[0].c0_bound_holds);
  CHECK(rep.rows[1].c0_bound_holds);
}

TEST_CASE("explicit singular exponent must clear the load exponents") {
  auto mesh = interval_mesh(0.0, 1.0, 33);
  SystemSpec spec = reference_spec();
  spec.N = 1;
  CHECK_THROWS_AS(build_barrier_set(mesh, spec, 0.05), HypothesisViolation);
  CHECK_THROWS_AS(build_barrier_set(mesh, spec, 1.0), HypothesisViolation);
  CHECK_NOTHROW(build_barrier_set(mesh, spec, 0.8));
}

TEST_CASE("fitted ratios are stable under refinement") {
  auto coarse = interval_mesh(0.0, 1.0, 65);
  auto fine = interval_mesh(0.0, 1.0, 129);
  SystemSpec spec;
  spec.N = 1;
  apply_auto_rules(spec);
  const BarrierSet bc = build_barrier_set(coarse, spec);
  const BarrierSet bf = build_barrier_set(fine, spec);
  const Lemma2Drift drift = lemma2_refinement_drift(bc, bf);
  CHECK(drift.stable);
  for (int i = 0; i < 2; ++i) {
    CHECK(drift.c0_drift[i] < 0.2);
    CHECK(drift.c1_drift[i] < 0.2);
  }
}

TEST_CASE("report text lists the fitted constants") {
  auto mesh = interval_mesh(0.0, 1.0, 33);
  SystemSpec spec;
  spec.N = 1;
  apply_auto_rules(spec);
  const BarrierSet bs = build_barrier_set(mesh, spec);
  const std::string text = barrier_report_text(bs);
  CHECK(text.find("c0 = ") != std::string::npos);
  CHECK(text.find("c3 = ") != std::string::npos);
  CHECK(text.find("gamma_sing = ") != std::string::npos);
  CHECK(text.find("min_z1_over_d = ") != std::string::npos);
  CHECK(text.find("pass = true") != std::string::npos);
}

}  // TEST_SUITE
