#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "squall/errors.hpp"
#include "squall/mesh.hpp"

using namespace squall;

namespace {

// Closed form of the distance-weighted volume integral on [0,1]:
// int_0^1 min(x, 1-x)^mu dx = 2 * (1/2)^(mu+1) / (mu+1).
double interval_dist_integral(double mu) {
  return 2.0 * std::pow(0.5, mu + 1.0) / (mu + 1.0);
}

ScalarField sample(MeshPtr mesh, double (*fn)(double, double)) {
  ScalarField f = make_field(mesh);
  for (int n = 0; n < mesh->node_count(); ++n) {
    const auto x = mesh->node_coords(n);
    f[n] = fn(x[0], x[1]);
  }
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("mesh");

TEST_CASE("interval mesh has exact boundary distances") {
  auto m = interval_mesh(0.0, 1.0, 5);
  const double expect[] = {0.0, 0.25, 0.5, 0.25, 0.0};
  for (int n = 0; n < 5; ++n) CHECK(m->dist(n) == doctest::Approx(expect[n]));
  CHECK(m->is_boundary(0));
  CHECK(m->is_boundary(4));
  CHECK_FALSE(m->is_boundary(2));
}

TEST_CASE("square mesh center distance") {
  auto m = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3);
  CHECK(m->dist(m->node_id(1, 1)) == doctest::Approx(0.5));
  int boundary = 0;
  for (int n = 0; n < m->node_count(); ++n) boundary += m->is_boundary(n);
  CHECK(boundary == 8);
}

TEST_CASE("anisotropic rectangle distance picks nearest side") {
  auto m = rectangle_mesh(0.0, 2.0, 0.0, 1.0, 9, 5);
  CHECK(m->dist_at({1.0, 0.5}) == doctest::Approx(0.5));
  CHECK(m->dist_at({0.25, 0.5}) == doctest::Approx(0.25));
  CHECK(m->inradius() == doctest::Approx(0.5));
  CHECK(m->volume() == doctest::Approx(2.0));
}

TEST_CASE("distance is zero exactly on the boundary and positive inside") {
  for (auto m : {interval_mesh(-1.0, 2.0, 17),
                 rectangle_mesh(0.0, 2.0, -0.5, 0.5, 9, 7)}) {
    for (int n = 0; n < m->node_count(); ++n) {
      if (m->is_boundary(n))
        CHECK(m->dist(n) == 0.0);
      else
        CHECK(m->dist(n) > 0.0);
    }
  }
}

TEST_CASE("distance is 1-Lipschitz across neighbor nodes") {
  auto m = rectangle_mesh(0.0, 1.5, 0.0, 1.0, 13, 9);
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i + 1 < 13; ++i)
      CHECK(std::abs(m->dist(m->node_id(i + 1, j)) -
                     m->dist(m->node_id(i, j))) <=
            m->spacing(0) + 1e-15);
  for (int j = 0; j + 1 < 9; ++j)
    for (int i = 0; i < 13; ++i)
      CHECK(std::abs(m->dist(m->node_id(i, j + 1)) -
                     m->dist(m->node_id(i, j))) <=
            m->spacing(1) + 1e-15);
}

TEST_CASE("invalid mesh requests are rejected") {
  CHECK_THROWS_AS(build_mesh(3, {0, 1, 0, 1, 0, 1}, {4, 4, 4}), ConfigError);
  CHECK_THROWS_AS(build_mesh(1, {0, 1}, {2}), ConfigError);
  CHECK_THROWS_AS(build_mesh(1, {1, 1}, {5}), ConfigError);
  CHECK_THROWS_AS(build_mesh(2, {0, 1}, {5, 5}), ConfigError);
}

TEST_CASE("gradient is exact for affine fields") {
  auto m1 = interval_mesh(0.0, 1.0, 9);
  auto f1 = sample(m1, [](double x, double) { return 3.0 * x - 1.0; });
  for (const auto& g : gradient(f1)) CHECK(g[0] == doctest::Approx(3.0));

  auto m2 = rectangle_mesh(0.0, 2.0, 0.0, 1.0, 9, 5);
  auto f2 = sample(m2, [](double x, double y) { return 2.0 * x - y + 0.25; });
  for (const auto& g : gradient(f2)) {
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(-1.0));
  }
}

TEST_CASE("gradient of x^2 at interior nodes is exact") {
  auto m = interval_mesh(0.0, 1.0, 11);
  auto f = sample(m, [](double x, double) { return x * x; });
  auto g = gradient(f);
  CHECK(g[5][0] == doctest::Approx(1.0));  // node at x = 0.5
  // the one-sided boundary stencil is second order, so quadratics are exact
  CHECK(g[0][0] == doctest::Approx(0.0));
  CHECK(g[10][0] == doctest::Approx(2.0));
}

TEST_CASE("gradient is linear to machine precision") {
  auto m = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 9, 9);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f = make_field(m), g = make_field(m), h = make_field(m);
  const double a = 1.7, b = -0.4;
  for (int n = 0; n < m->node_count(); ++n) {
    f[n] = u(rng);
    g[n] = u(rng);
    h[n] = a * f[n] + b * g[n];
  }
  auto gf = gradient(f), gg = gradient(g), gh = gradient(h);
  for (int n = 0; n < m->node_count(); ++n) {
    CHECK(gh[n][0] == doctest::Approx(a * gf[n][0] + b * gg[n][0])
                          .epsilon(1e-12));
    CHECK(gh[n][1] == doctest::Approx(a * gf[n][1] + b * gg[n][1])
                          .epsilon(1e-12));
  }
}

TEST_CASE("sup gradient norm of the parabola x(1-x)/2") {
  auto m = interval_mesh(0.0, 1.0, 257);
  auto f = sample(m, [](double x, double) { return 0.5 * x * (1.0 - x); });
  CHECK(norm_sup_grad(f) == doctest::Approx(0.5).epsilon(2.0 / 256));
  CHECK(norm_sup_grad(make_field(m)) == 0.0);
}

TEST_CASE("Lr norm of constants is exact") {
  auto m1 = interval_mesh(0.0, 1.0, 33);
  auto one = make_field(m1, 1.0);
  for (double r : {1.0, 2.0, 3.7})
    CHECK(norm_lr(one, r) == doctest::Approx(1.0).epsilon(1e-12));

  auto m2 = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 17, 17);
  auto two = make_field(m2, 2.0);
  CHECK(norm_lr(two, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("L2 norm of x on [0,1] approaches 1/sqrt(3)") {
  auto m = interval_mesh(0.0, 1.0, 257);
  auto f = sample(m, [](double x, double) { return x; });
  CHECK(norm_lr(f, 2.0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-3));
  CHECK_THROWS_AS(norm_lr(f, 0.5), ConfigError);
}

TEST_CASE("Lr norm is monotone in |f|") {
  auto m = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 9, 9);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> bump(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarField f = make_field(m), g = make_field(m);
    for (int n = 0; n < m->node_count(); ++n) {
      f[n] = u(rng);
      g[n] = f[n] + (f[n] >= 0 ? bump(rng) : -bump(rng));
    }
    for (double r : {1.0, 2.0, 3.0})
      CHECK(norm_lr(f, r) <= norm_lr(g, r) + 1e-13);
  }
}

TEST_CASE("distance-weighted integral matches closed forms") {
  auto m = interval_mesh(0.0, 1.0, 513);
  CHECK(integrate_singular(*m, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // mu = -1/2: exact value 2*sqrt(2); the cell-center rule converges at
  // rate sqrt(h), so the coarse error is a few percent
  const double exact = interval_dist_integral(-0.5);
  CHECK(exact == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(integrate_singular(*m, -0.5) == doctest::Approx(exact).epsilon(0.03));

  CHECK(integrate_singular(*m, -0.25) ==
        doctest::Approx(interval_dist_integral(-0.25)).epsilon(0.01));

  auto sq = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 65, 65);
  CHECK(integrate_singular(*sq, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance-weighted integral converges under refinement") {
  for (double mu : {-0.5, -0.25}) {
    const double exact = interval_dist_integral(mu);
    double prev_err = -1.0;
    for (int n : {513, 1025, 2049}) {
      auto m = interval_mesh(0.0, 1.0, n);
      const double err = std::abs(integrate_singular(*m, mu) - exact);
      if (prev_err > 0.0) CHECK(err < 0.85 * prev_err);
      prev_err = err;
    }
  }
}

TEST_CASE("integrable-exponent precondition") {
  auto m = interval_mesh(0.0, 1.0, 9);
  CHECK_THROWS_AS(integrate_singular(*m, -1.0), NonIntegrableExponent);
  CHECK_THROWS_AS(integrate_singular(*m, -1.5, make_field(m, 1.0)),
                  NonIntegrableExponent);
}

TEST_CASE("weighted integral of a nodal field uses cell means") {
  auto m = interval_mesh(0.0, 1.0, 257);
  auto f = sample(m, [](double x, double) { return x; });
  // int_0^1 x dx = 1/2 with mu = 0
  CHECK(integrate_singular(*m, 0.0, f) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("field CSV round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "squall_mesh_csv";
  fs::create_directories(dir);
  auto path = (dir / "f.csv").string();

  auto m = rectangle_mesh(0.0, 1.0, 0.0, 0.5, 5, 4);
  auto f = sample(m, [](double x, double y) { return x * x - 3.0 * y; });
  write_field_csv(path, f);
  auto g = read_field_csv(path, m);
  for (int n = 0; n < m->node_count(); ++n)
    CHECK(g[n] == doctest::Approx(f[n]).epsilon(1e-15));
}

TEST_CASE("refine preserves shared nodes") {
  auto m = interval_mesh(0.0, 1.0, 9);
  auto fine = refine(*m);
  CHECK(fine->nodes_per_axis(0) == 17);
  for (int i = 0; i < 9; ++i)
    CHECK(fine->node_coords(2 * i)[0] ==
          doctest::Approx(m->node_coords(i)[0]));
}

TEST_SUITE_END();
