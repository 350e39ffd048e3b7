#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "phifem/mesh.hpp"

namespace phifem {

/// Nodal P1 field with a homogeneous Dirichlet mask: boundary values are
/// pinned to exactly 0 whenever the mask is active.
class DiscreteField {
 public:
  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const Mesh> mesh, double init = 0.0,
                         bool dirichlet = true);

  static DiscreteField interpolate(std::shared_ptr<const Mesh> mesh,
                                   const std::function<double(const Point&)>& f,
                                   bool dirichlet = true);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  bool dirichlet() const { return dirichlet_; }

  /// Re-pins boundary nodes to 0 (no-op when the mask is inactive).
  void enforce_dirichlet();

  /// Value at a quadrature point of a cell via barycentric interpolation.
  double at(int cell, const QuadPoint& q) const;

  double max_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }
  double min_interior() const;

  /// Constant P1 gradient on a cell.
  void cell_gradient(int cell, double grad[2]) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
  bool dirichlet_ = true;
};

}  // namespace phifem
