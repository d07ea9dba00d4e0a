#include "squall/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "squall/errors.hpp"

namespace squall {

Mesh::Mesh(int dim, Vec2 lo, Vec2 hi, std::array<int, 2> n)
    : dim_(dim), lo_(lo), hi_(hi), n_(n) {
  if (dim != 1 && dim != 2) throw ConfigError("mesh dim must be 1 or 2");
  if (dim == 1) {
    n_[1] = 1;
    lo_[1] = hi_[1] = 0.0;
  }
  for (int a = 0; a < dim_; ++a) {
    if (n_[a] < 3)
      throw ConfigError("mesh needs at least 3 nodes per axis");
    if (!(hi_[a] > lo_[a]))
      throw ConfigError("mesh extent is degenerate");
  }
  h_[0] = (hi_[0] - lo_[0]) / (n_[0] - 1);
  h_[1] = dim_ == 2 ? (hi_[1] - lo_[1]) / (n_[1] - 1) : 0.0;

  const int total = node_count();
  boundary_.resize(total);
  dist_.resize(total);
  for (int node = 0; node < total; ++node) {
    const auto ij = node_ij(node);
    bool bdry = ij[0] == 0 || ij[0] == n_[0] - 1;
    if (dim_ == 2) bdry = bdry || ij[1] == 0 || ij[1] == n_[1] - 1;
    boundary_[node] = bdry ? 1 : 0;
    dist_[node] = dist_at(node_coords(node));
    if (bdry) dist_[node] = 0.0;
  }
}

double Mesh::min_spacing() const {
  return dim_ == 1 ? h_[0] : std::min(h_[0], h_[1]);
}

double Mesh::cell_volume() const {
  return dim_ == 1 ? h_[0] : h_[0] * h_[1];
}

double Mesh::volume() const {
  double v = hi_[0] - lo_[0];
  if (dim_ == 2) v *= hi_[1] - lo_[1];
  return v;
}

double Mesh::inradius() const {
  double r = 0.5 * (hi_[0] - lo_[0]);
  if (dim_ == 2) r = std::min(r, 0.5 * (hi_[1] - lo_[1]));
  return r;
}

double Mesh::diameter() const {
  const double dx = hi_[0] - lo_[0];
  if (dim_ == 1) return dx;
  const double dy = hi_[1] - lo_[1];
  return std::sqrt(dx * dx + dy * dy);
}

Vec2 Mesh::node_coords(int node) const {
  const auto ij = node_ij(node);
  return {lo_[0] + ij[0] * h_[0],
          dim_ == 2 ? lo_[1] + ij[1] * h_[1] : 0.0};
}

double Mesh::dist_at(const Vec2& x) const {
  double d = std::min(x[0] - lo_[0], hi_[0] - x[0]);
  if (dim_ == 2) d = std::min(d, std::min(x[1] - lo_[1], hi_[1] - x[1]));
  return d;
}

double Mesh::node_weight(int node) const {
  const auto ij = node_ij(node);
  double w = (ij[0] == 0 || ij[0] == n_[0] - 1) ? 0.5 * h_[0] : h_[0];
  if (dim_ == 2)
    w *= (ij[1] == 0 || ij[1] == n_[1] - 1) ? 0.5 * h_[1] : h_[1];
  return w;
}

Vec2 Mesh::cell_center(int cell) const {
  const auto ij = cell_ij(cell);
  return {lo_[0] + (ij[0] + 0.5) * h_[0],
          dim_ == 2 ? lo_[1] + (ij[1] + 0.5) * h_[1] : 0.0};
}

std::array<int, 4> Mesh::cell_corners(int cell) const {
  const auto ij = cell_ij(cell);
  if (dim_ == 1) return {node_id(ij[0]), node_id(ij[0] + 1), -1, -1};
  return {node_id(ij[0], ij[1]), node_id(ij[0] + 1, ij[1]),
          node_id(ij[0], ij[1] + 1), node_id(ij[0] + 1, ij[1] + 1)};
}

MeshPtr build_mesh(int dim, const std::vector<double>& extents,
                   const std::vector<int>& counts) {
  if (dim != 1 && dim != 2) throw ConfigError("mesh dim must be 1 or 2");
  if (static_cast<int>(extents.size()) != 2 * dim)
    throw ConfigError("mesh needs 2 extent values per axis");
  if (static_cast<int>(counts.size()) != dim)
    throw ConfigError("mesh needs one node count per axis");
  Vec2 lo{extents[0], dim == 2 ? extents[2] : 0.0};
  Vec2 hi{extents[1], dim == 2 ? extents[3] : 0.0};
  std::array<int, 2> n{counts[0], dim == 2 ? counts[1] : 1};
  return std::make_shared<Mesh>(dim, lo, hi, n);
}

MeshPtr interval_mesh(double a, double b, int n) {
  return build_mesh(1, {a, b}, {n});
}

MeshPtr rectangle_mesh(double ax, double bx, double ay, double by, int nx,
                       int ny) {
  return build_mesh(2, {ax, bx, ay, by}, {nx, ny});
}

MeshPtr refine(const Mesh& mesh) {
  if (mesh.dim() == 1)
    return build_mesh(1, {mesh.lo()[0], mesh.hi()[0]},
                      {2 * mesh.nodes_per_axis(0) - 1});
  return build_mesh(2,
                    {mesh.lo()[0], mesh.hi()[0], mesh.lo()[1], mesh.hi()[1]},
                    {2 * mesh.nodes_per_axis(0) - 1,
                     2 * mesh.nodes_per_axis(1) - 1});
}

ScalarField make_field(MeshPtr mesh, double fill) {
  ScalarField f;
  f.values.assign(mesh->node_count(), fill);
  f.mesh = std::move(mesh);
  return f;
}

namespace {

// One-dimensional three-point derivative along one axis.
inline double axis_derivative(const std::vector<double>& v, int idx, int pos,
                              int count, int stride, double h) {
  if (pos == 0)
    return (-3.0 * v[idx] + 4.0 * v[idx + stride] - v[idx + 2 * stride]) /
           (2.0 * h);
  if (pos == count - 1)
    return (3.0 * v[idx] - 4.0 * v[idx - stride] + v[idx - 2 * stride]) /
           (2.0 * h);
  return (v[idx + stride] - v[idx - stride]) / (2.0 * h);
}

}  // namespace

std::vector<Vec2> gradient(const ScalarField& f) {
  const Mesh& m = *f.mesh;
  std::vector<Vec2> g(m.node_count(), Vec2{0.0, 0.0});
  const int nx = m.nodes_per_axis(0);
  const int ny = m.dim() == 2 ? m.nodes_per_axis(1) : 1;
  for (int node = 0; node < m.node_count(); ++node) {
    const auto ij = m.node_ij(node);
    g[node][0] = axis_derivative(f.values, node, ij[0], nx, 1, m.spacing(0));
    if (m.dim() == 2)
      g[node][1] =
          axis_derivative(f.values, node, ij[1], ny, nx, m.spacing(1));
  }
  return g;
}

double norm_sup_grad(const ScalarField& f) {
  double best = 0.0;
  for (const auto& g : gradient(f))
    best = std::max(best, std::hypot(g[0], g[1]));
  return best;
}

double norm_lr(const ScalarField& f, double r) {
  if (!(r >= 1.0)) throw ConfigError("norm_lr needs r >= 1");
  const Mesh& m = *f.mesh;
  double acc = 0.0;
  for (int node = 0; node < m.node_count(); ++node)
    acc += std::pow(std::abs(f.values[node]), r) * m.node_weight(node);
  return std::pow(acc, 1.0 / r);
}

namespace {

double cell_mean(const Mesh& m, const std::vector<double>& v, int cell) {
  const auto c = m.cell_corners(cell);
  if (m.dim() == 1) return 0.5 * (v[c[0]] + v[c[1]]);
  return 0.25 * (v[c[0]] + v[c[1]] + v[c[2]] + v[c[3]]);
}

}  // namespace

double integrate_singular(const Mesh& mesh, double mu, const ScalarField& f) {
  if (mu <= -1.0)
    throw NonIntegrableExponent(
        "distance-weight exponent must exceed -1, got " + std::to_string(mu));
  const double vol = mesh.cell_volume();
  double acc = 0.0;
  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const double d = mesh.dist_at(mesh.cell_center(cell));
    acc += std::pow(d, mu) * cell_mean(mesh, f.values, cell) * vol;
  }
  return acc;
}

double integrate_singular(const Mesh& mesh, double mu) {
  if (mu <= -1.0)
    throw NonIntegrableExponent(
        "distance-weight exponent must exceed -1, got " + std::to_string(mu));
  const double vol = mesh.cell_volume();
  double acc = 0.0;
  for (int cell = 0; cell < mesh.cell_count(); ++cell)
    acc += std::pow(mesh.dist_at(mesh.cell_center(cell)), mu) * vol;
  return acc;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const Mesh& m = *f.mesh;
  out << (m.dim() == 1 ? "x,dist,value\n" : "x,y,dist,value\n");
  char buf[128];
  for (int node = 0; node < m.node_count(); ++node) {
    const auto x = m.node_coords(node);
    if (m.dim() == 1)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0],
                    m.dist(node), f.values[node]);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x[0], x[1],
                    m.dist(node), f.values[node]);
    out << buf;
  }
}

ScalarField read_field_csv(const std::string& path, MeshPtr mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty field CSV " + path);
  ScalarField f = make_field(std::move(mesh));
  int node = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (node >= f.mesh->node_count())
      throw ConfigError("field CSV has more rows than mesh nodes: " + path);
    const auto pos = line.find_last_of(',');
    if (pos == std::string::npos)
      throw ConfigError("malformed field CSV row in " + path);
    f.values[node++] = std::stod(line.substr(pos + 1));
  }
  if (node != f.mesh->node_count())
    throw ConfigError("field CSV row count does not match mesh: " + path);
  return f;
}

}  // namespace squall
