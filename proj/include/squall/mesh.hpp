#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace squall {

using Vec2 = std::array<double, 2>;

// Uniform tensor grid over an axis-aligned interval (1D) or rectangle (2D).
// Node numbering is x-fastest.  The distance-to-boundary table is evaluated
// analytically, so it is exact rather than a mesh-dependent approximation.
class Mesh {
 public:
  Mesh(int dim, Vec2 lo, Vec2 hi, std::array<int, 2> n);

  int dim() const { return dim_; }
  int nodes_per_axis(int axis) const { return n_[axis]; }
  int node_count() const { return n_[0] * n_[1]; }
  int cells_per_axis(int axis) const { return dim_ > axis ? n_[axis] - 1 : 1; }
  int cell_count() const { return cells_per_axis(0) * cells_per_axis(1); }
  double spacing(int axis) const { return h_[axis]; }
  double min_spacing() const;
  double cell_volume() const;
  double volume() const;
  double inradius() const;
  double diameter() const;
  Vec2 lo() const { return lo_; }
  Vec2 hi() const { return hi_; }

  int node_id(int i, int j = 0) const { return j * n_[0] + i; }
  std::array<int, 2> node_ij(int node) const {
    return {node % n_[0], node / n_[0]};
  }
  Vec2 node_coords(int node) const;
  bool is_boundary(int node) const { return boundary_[node] != 0; }
  double dist(int node) const { return dist_[node]; }
  // Exact distance from an arbitrary point of the closed domain to the
  // boundary.
  double dist_at(const Vec2& x) const;
  // Lumped (trapezoidal) volume attached to a node.
  double node_weight(int node) const;

  int cell_id(int i, int j = 0) const { return j * cells_per_axis(0) + i; }
  std::array<int, 2> cell_ij(int cell) const {
    return {cell % cells_per_axis(0), cell / cells_per_axis(0)};
  }
  Vec2 cell_center(int cell) const;
  // Corner nodes of a cell: {left, right} in 1D, {SW, SE, NW, NE} in 2D
  // (unused slots are -1).
  std::array<int, 4> cell_corners(int cell) const;
  int corners_per_cell() const { return dim_ == 1 ? 2 : 4; }

  const std::vector<std::uint8_t>& boundary_mask() const { return boundary_; }
  const std::vector<double>& dist_table() const { return dist_; }

 private:
  int dim_;
  Vec2 lo_, hi_;
  std::array<int, 2> n_;
  Vec2 h_;
  std::vector<std::uint8_t> boundary_;
  std::vector<double> dist_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// extents: {a, b} in 1D, {ax, bx, ay, by} in 2D.  counts: nodes per axis,
// each >= 3.
MeshPtr build_mesh(int dim, const std::vector<double>& extents,
                   const std::vector<int>& counts);
MeshPtr interval_mesh(double a, double b, int n);
MeshPtr rectangle_mesh(double ax, double bx, double ay, double by, int nx,
                       int ny);
// Same domain with 2n-1 nodes per axis: existing nodes are preserved.
MeshPtr refine(const Mesh& mesh);

// Nodal scalar field bound to the mesh it lives on.
struct ScalarField {
  MeshPtr mesh;
  std::vector<double> values;

  double operator[](int node) const { return values[node]; }
  double& operator[](int node) { return values[node]; }
};

ScalarField make_field(MeshPtr mesh, double fill = 0.0);

// Nodal gradient: centered differences at interior nodes, second-order
// one-sided stencils on the boundary.  Exact for affine fields.
std::vector<Vec2> gradient(const ScalarField& f);

// Max Euclidean gradient magnitude over all nodes.
double norm_sup_grad(const ScalarField& f);

// (sum |f|^r * weight)^(1/r) with trapezoidal node weights; r >= 1.
double norm_lr(const ScalarField& f, double r);

// sum over cells of dist(center)^mu * f(center) * cellvolume, with f
// interpolated to cell centers.  Cell centers keep dist > 0, so mu may be
// singular; mu <= -1 is rejected.
double integrate_singular(const Mesh& mesh, double mu, const ScalarField& f);
double integrate_singular(const Mesh& mesh, double mu);

// One row per node: coordinates, dist, value.
void write_field_csv(const std::string& path, const ScalarField& f);
// Reads the value column of a field CSV written for a matching mesh.
ScalarField read_field_csv(const std::string& path, MeshPtr mesh);

}  // namespace squall
