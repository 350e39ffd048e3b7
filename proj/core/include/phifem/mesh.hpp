#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace phifem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Conforming simplicial P1 mesh on an interval (dim 1) or a polygon (dim 2).
/// The exact domain geometry is retained so boundary distances can be
/// computed geometrically rather than from the mesh graph.
class Mesh {
 public:
  int dim = 1;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> cells;  // 1D cells use {a, b, -1}
  std::vector<char> on_boundary;          // per-vertex flag
  std::vector<int> boundary_vertices;
  std::vector<int> interior_vertices;
  std::vector<int> free_index;  // vertex -> free dof (-1 on boundary)
  double h_max = 0.0;

  // Domain geometry: interval endpoints or the polygon loop.
  double x0 = 0.0, x1 = 1.0;
  std::vector<Point> boundary_loop;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_free() const { return static_cast<int>(interior_vertices.size()); }
  int cell_size() const { return dim + 1; }

  double cell_measure(int c) const;
  Point cell_centroid(int c) const;
  double domain_measure() const;
  double diameter() const;

  /// Exact distance from an arbitrary point to the domain boundary.
  double distance_to_boundary(const Point& p) const;
};

Mesh build_interval_mesh(double x0, double x1, int n_cells);

/// Distance from a point to a closed polygonal loop.
double point_to_loop_distance(const std::vector<Point>& loop, const Point& p);

/// Triangulates a simple polygon (counter-clockwise or clockwise vertex
/// loop) by ear clipping, then refines uniformly until h_max <= target_h.
Mesh build_polygon_mesh(const std::vector<Point>& loop, double target_h);

/// Nodal distances to the boundary, d_i = dist(vertex_i, boundary).
struct DistanceField {
  std::vector<double> values;
};

DistanceField distance_field(const Mesh& mesh);

/// One quadrature node: location, weight (already scaled by the cell
/// measure), and barycentric coordinates for P1 interpolation.
struct QuadPoint {
  Point x;
  double w = 0.0;
  std::array<double, 3> lambda{};
};

/// Degree-4 rule on a cell (3-point Gauss on segments, 6-point on triangles).
void cell_quadrature(const Mesh& mesh, int cell, std::vector<QuadPoint>& out);

/// Mesh dump as two CSV files (vertices, cells) under the given prefix.
void write_mesh_csv(const Mesh& mesh, const std::string& prefix, int precision = 12);

}  // namespace phifem
