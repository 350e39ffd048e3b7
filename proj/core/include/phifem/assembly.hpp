#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>

#include "phifem/field.hpp"
#include "phifem/problem.hpp"

namespace phifem {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssemblyOptions {
  /// Gradient smoothing |g| <- sqrt(|g|^2 + kappa^2) inside assembly only;
  /// diagnostics use raw gradients.
  double kappa = 1e-10;
};

/// Galerkin residual of the regularized operator, one entry per free node:
///   R_j = int phi(|grad u|) grad u . grad l_j
///       - int a_eps l_j / (|u| + eps)^alpha - int b_eps (u+)^gamma l_j.
Eigen::VectorXd assemble_residual(const RegularizedProblem& rp, const DiscreteField& u,
                                  const AssemblyOptions& opt = {});

/// Exact Jacobian of assemble_residual (same smoothing), sparse over free nodes.
Eigen::SparseMatrix<double> assemble_jacobian(const RegularizedProblem& rp,
                                              const DiscreteField& u,
                                              const AssemblyOptions& opt = {});

/// Discrete W^{1,ell} seminorm (sum_cells |grad u|^ell |cell|)^{1/ell}.
/// `where` restricts the sum to cells whose centroid satisfies it.
double sobolev_seminorm_ell(const DiscreteField& u, double ell,
                            const std::function<bool(const Point&)>& where = {});

/// Luxemburg norm of |grad u| with cell measures as weights.
double luxemburg_gradient_norm(const DiscreteField& u, const NFunction& nf);

/// Degree-4 quadrature of a scalar field over the mesh.
double integrate(const Mesh& mesh, const ScalarField& f);

/// L^p norm of a scalar field by degree-4 quadrature.
double lp_norm(const Mesh& mesh, const ScalarField& f, double p);

/// log of the L^beta norm of a nodal field, computed in log space
/// (log-sum-exp over quadrature points) so large beta cannot overflow.
/// Returns -inf for the zero field.
double log_lp_norm(const DiscreteField& u, double beta);

/// Quadrature with geometric refinement toward the boundary (n_layers
/// halvings), for integrands that blow up at the boundary.  `layer` is 0
/// for bulk points and grows toward the boundary; the innermost layer is
/// n_layers.
struct LayeredQuadrature {
  std::vector<QuadPoint> points;
  std::vector<int> layer;
  int n_layers = 10;
};

LayeredQuadrature boundary_layered_quadrature(const Mesh& mesh, int n_layers = 10,
                                              double ratio = 0.5);

struct LayeredIntegral {
  double value = 0.0;
  double last_layer_share = 0.0;
  bool suspected_divergent = false;  // innermost layer carries > 10% of the total
};

LayeredIntegral layered_integral(const LayeredQuadrature& lq, const ScalarField& f);

}  // namespace phifem
