#include "phifem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "phifem/csv.hpp"

namespace phifem {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point q{a.x + t * vx, a.y + t * vy};
  return dist(p, q);
}

bool point_in_triangle(const Point& p, const Point& a, const Point& b, const Point& c) {
  const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  const bool neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  const bool pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  return !(neg && pos);
}

void finalize(Mesh& m) {
  const int nv = m.n_vertices();
  m.boundary_vertices.clear();
  m.interior_vertices.clear();
  m.free_index.assign(nv, -1);
  for (int i = 0; i < nv; ++i) {
    if (m.on_boundary[i]) {
      m.boundary_vertices.push_back(i);
    } else {
      m.free_index[i] = static_cast<int>(m.interior_vertices.size());
      m.interior_vertices.push_back(i);
    }
  }
  m.h_max = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto& cell = m.cells[c];
    const int k = m.cell_size();
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        m.h_max = std::max(m.h_max, dist(m.vertices[cell[i]], m.vertices[cell[j]]));
    if (!(m.cell_measure(c) > 0.0)) throw std::runtime_error("mesh: degenerate cell");
  }
}

}  // namespace

double Mesh::cell_measure(int c) const {
  const auto& cell = cells[c];
  if (dim == 1) return std::abs(vertices[cell[1]].x - vertices[cell[0]].x);
  return 0.5 * std::abs(cross(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]));
}

Point Mesh::cell_centroid(int c) const {
  const auto& cell = cells[c];
  Point p;
  const int k = cell_size();
  for (int i = 0; i < k; ++i) {
    p.x += vertices[cell[i]].x / k;
    p.y += vertices[cell[i]].y / k;
  }
  return p;
}

double Mesh::domain_measure() const {
  double s = 0.0;
  for (int c = 0; c < n_cells(); ++c) s += cell_measure(c);
  return s;
}

double Mesh::diameter() const {
  if (dim == 1) return x1 - x0;
  double d = 0.0;
  for (std::size_t i = 0; i < boundary_loop.size(); ++i)
    for (std::size_t j = i + 1; j < boundary_loop.size(); ++j)
      d = std::max(d, dist(boundary_loop[i], boundary_loop[j]));
  return d;
}

double point_to_loop_distance(const std::vector<Point>& loop, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(p, loop[i], loop[(i + 1) % n]));
  return d;
}

double Mesh::distance_to_boundary(const Point& p) const {
  if (dim == 1) return std::min(p.x - x0, x1 - p.x);
  return point_to_loop_distance(boundary_loop, p);
}

Mesh build_interval_mesh(double x0, double x1, int n_cells) {
  if (!(x1 > x0)) throw std::invalid_argument("interval mesh: need x1 > x0");
  if (n_cells < 2) throw std::invalid_argument("interval mesh: need >= 2 cells");
  Mesh m;
  m.dim = 1;
  m.x0 = x0;
  m.x1 = x1;
  const double h = (x1 - x0) / n_cells;
  m.vertices.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) m.vertices[i] = {x0 + i * h, 0.0};
  m.vertices.back().x = x1;
  m.cells.resize(n_cells);
  for (int c = 0; c < n_cells; ++c) m.cells[c] = {c, c + 1, -1};
  m.on_boundary.assign(n_cells + 1, 0);
  m.on_boundary.front() = m.on_boundary.back() = 1;
  finalize(m);
  return m;
}

Mesh build_polygon_mesh(const std::vector<Point>& loop, double target_h) {
  if (loop.size() < 3) throw std::invalid_argument("polygon mesh: need >= 3 vertices");
  if (!(target_h > 0.0)) throw std::invalid_argument("polygon mesh: target_h must be > 0");

  // Normalize orientation to counter-clockwise.
  std::vector<Point> poly = loop;
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    area2 += a.x * b.y - b.x * a.y;
  }
  if (area2 < 0.0) std::reverse(poly.begin(), poly.end());

  // Ear clipping on the vertex loop.
  Mesh m;
  m.dim = 2;
  m.boundary_loop = loop;
  m.vertices = poly;
  std::vector<int> ring(poly.size());
  for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);
  int stall = 0;
  while (ring.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int ip = ring[(i + ring.size() - 1) % ring.size()];
      const int ic = ring[i];
      const int in = ring[(i + 1) % ring.size()];
      if (cross(poly[ip], poly[ic], poly[in]) <= 1e-14) continue;  // reflex or flat
      bool blocked = false;
      for (int v : ring) {
        if (v == ip || v == ic || v == in) continue;
        if (point_in_triangle(poly[v], poly[ip], poly[ic], poly[in])) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      m.cells.push_back({ip, ic, in});
      ring.erase(ring.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped && ++stall > 2) throw std::runtime_error("polygon mesh: ear clipping failed");
  }
  m.cells.push_back({ring[0], ring[1], ring[2]});

  // Uniform refinement (each triangle into 4) until h_max <= target_h.
  const auto max_edge = [&]() {
    double h = 0.0;
    for (const auto& c : m.cells)
      for (int i = 0; i < 3; ++i)
        h = std::max(h, dist(m.vertices[c[i]], m.vertices[c[(i + 1) % 3]]));
    return h;
  };
  while (max_edge() > target_h) {
    std::map<std::pair<int, int>, int> midpoint;
    const auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back(
          {0.5 * (m.vertices[a].x + m.vertices[b].x), 0.5 * (m.vertices[a].y + m.vertices[b].y)});
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> fine;
    fine.reserve(m.cells.size() * 4);
    for (const auto& c : m.cells) {
      const int m01 = mid(c[0], c[1]), m12 = mid(c[1], c[2]), m02 = mid(c[0], c[2]);
      fine.push_back({c[0], m01, m02});
      fine.push_back({m01, c[1], m12});
      fine.push_back({m02, m12, c[2]});
      fine.push_back({m01, m12, m02});
    }
    m.cells = std::move(fine);
    if (m.vertices.size() > 4'000'000) throw std::runtime_error("polygon mesh: too fine");
  }

  // Boundary vertices lie on an original polygon segment.
  double diam = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) diam = std::max(diam, dist(poly[i], poly[j]));
  const double tol = 1e-12 * std::max(1.0, diam);
  m.on_boundary.assign(m.vertices.size(), 0);
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (m.distance_to_boundary(m.vertices[v]) <= tol) m.on_boundary[v] = 1;

  finalize(m);
  return m;
}

DistanceField distance_field(const Mesh& mesh) {
  DistanceField d;
  d.values.resize(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    d.values[v] = mesh.on_boundary[v] ? 0.0 : mesh.distance_to_boundary(mesh.vertices[v]);
  return d;
}

void cell_quadrature(const Mesh& mesh, int cell, std::vector<QuadPoint>& out) {
  out.clear();
  const auto& c = mesh.cells[cell];
  const double meas = mesh.cell_measure(cell);
  if (mesh.dim == 1) {
    // 3-point Gauss-Legendre, exact to degree 5.
    static const double xi[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double wt[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double a = mesh.vertices[c[0]].x, b = mesh.vertices[c[1]].x;
    for (int k = 0; k < 3; ++k) {
      const double u = 0.5 * (xi[k] + 1.0);
      QuadPoint q;
      q.x = {a + u * (b - a), 0.0};
      q.w = 0.5 * wt[k] * meas;
      q.lambda = {1.0 - u, u, 0.0};
      out.push_back(q);
    }
    return;
  }
  // 6-point degree-4 triangle rule (two symmetric orbits).
  static const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  static const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  static const double L[6][3] = {
      {1 - 2 * a1, a1, a1}, {a1, 1 - 2 * a1, a1}, {a1, a1, 1 - 2 * a1},
      {1 - 2 * a2, a2, a2}, {a2, 1 - 2 * a2, a2}, {a2, a2, 1 - 2 * a2},
  };
  static const double W[6] = {w1, w1, w1, w2, w2, w2};
  const Point& p0 = mesh.vertices[c[0]];
  const Point& p1 = mesh.vertices[c[1]];
  const Point& p2 = mesh.vertices[c[2]];
  for (int k = 0; k < 6; ++k) {
    QuadPoint q;
    q.lambda = {L[k][0], L[k][1], L[k][2]};
    q.x = {L[k][0] * p0.x + L[k][1] * p1.x + L[k][2] * p2.x,
           L[k][0] * p0.y + L[k][1] * p1.y + L[k][2] * p2.y};
    q.w = W[k] * meas;
    out.push_back(q);
  }
}

void write_mesh_csv(const Mesh& mesh, const std::string& prefix, int precision) {
  {
    CsvWriter w(prefix + "_vertices.csv", {"id", "x", "y", "on_boundary"}, precision);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      w.cell(v);
      w.cell(mesh.vertices[v].x);
      w.cell(mesh.vertices[v].y);
      w.cell(static_cast<int>(mesh.on_boundary[v]));
      w.end_row();
    }
  }
  {
    CsvWriter w(prefix + "_cells.csv", {"id", "v0", "v1", "v2"}, precision);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      w.cell(c);
      w.cell(mesh.cells[c][0]);
      w.cell(mesh.cells[c][1]);
      w.cell(mesh.cells[c][2]);
      w.end_row();
    }
  }
}

}  // namespace phifem
