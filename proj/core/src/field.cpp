#include "phifem/field.hpp"

#include <limits>
#include <stdexcept>

namespace phifem {

DiscreteField::DiscreteField(std::shared_ptr<const Mesh> mesh, double init, bool dirichlet)
    : mesh_(std::move(mesh)), dirichlet_(dirichlet) {
  if (!mesh_) throw std::invalid_argument("DiscreteField: null mesh");
  values_ = Eigen::VectorXd::Constant(mesh_->n_vertices(), init);
  enforce_dirichlet();
}

DiscreteField DiscreteField::interpolate(std::shared_ptr<const Mesh> mesh,
                                         const std::function<double(const Point&)>& f,
                                         bool dirichlet) {
  DiscreteField u(mesh, 0.0, dirichlet);
  for (int v = 0; v < u.mesh().n_vertices(); ++v) u[v] = f(u.mesh().vertices[v]);
  u.enforce_dirichlet();
  return u;
}

void DiscreteField::enforce_dirichlet() {
  if (!dirichlet_) return;
  for (int v : mesh_->boundary_vertices) values_[v] = 0.0;
}

double DiscreteField::at(int cell, const QuadPoint& q) const {
  const auto& c = mesh_->cells[cell];
  double v = 0.0;
  for (int i = 0; i < mesh_->cell_size(); ++i) v += q.lambda[i] * values_[c[i]];
  return v;
}

double DiscreteField::min_interior() const {
  double m = std::numeric_limits<double>::infinity();
  for (int v : mesh_->interior_vertices) m = std::min(m, values_[v]);
  return m;
}

void DiscreteField::cell_gradient(int cell, double grad[2]) const {
  const auto& c = mesh_->cells[cell];
  const auto& vs = mesh_->vertices;
  if (mesh_->dim == 1) {
    grad[0] = (values_[c[1]] - values_[c[0]]) / (vs[c[1]].x - vs[c[0]].x);
    grad[1] = 0.0;
    return;
  }
  // P1 gradient from the edge vectors: solve the 2x2 system
  //   (p1-p0).g = u1-u0,  (p2-p0).g = u2-u0.
  const double ax = vs[c[1]].x - vs[c[0]].x, ay = vs[c[1]].y - vs[c[0]].y;
  const double bx = vs[c[2]].x - vs[c[0]].x, by = vs[c[2]].y - vs[c[0]].y;
  const double du1 = values_[c[1]] - values_[c[0]];
  const double du2 = values_[c[2]] - values_[c[0]];
  const double det = ax * by - ay * bx;
  grad[0] = (du1 * by - du2 * ay) / det;
  grad[1] = (ax * du2 - bx * du1) / det;
}

}  // namespace phifem
