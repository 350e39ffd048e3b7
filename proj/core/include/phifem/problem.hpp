#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "phifem/mesh.hpp"
#include "phifem/nfunction.hpp"

namespace phifem {

using ScalarField = std::function<double(const Point&)>;

/// Domain description independent of any mesh: an interval or a polygon.
struct Domain {
  int dim = 1;
  double x0 = 0.0, x1 = 1.0;       // dim == 1
  std::vector<Point> loop;         // dim == 2
  double diameter() const;
};

/// The singular Dirichlet problem
///   -div(phi(|grad u|) grad u) = a(x) u^{-alpha} + b(x) u^{gamma},  u > 0, u|_boundary = 0.
struct SingularProblem {
  Domain domain;
  ScalarField a;
  double alpha = 1.0;
  ScalarField b;          // empty => b == 0
  double gamma = 0.0;
  double sigma = 0.0;     // integrability exponent for b (0 = unset)
  double q = 0.0;         // integrability exponent for a (0 = unset)
  std::shared_ptr<const NFunction> nfun;

  bool has_b() const { return static_cast<bool>(b); }
  double b_at(const Point& p) const { return b ? b(p) : 0.0; }

  /// Structural invariants (exponent windows, index sanity). Field-level
  /// positivity is sampled in check_problem.
  void validate() const;
};

/// The truncated family: a_eps = min(a, 1/eps), b_eps = min(b, 1/eps), and
/// the right-hand side uses (|u| + eps)^{-alpha}.
struct RegularizedProblem {
  SingularProblem parent;
  double eps = 1.0;

  double a_eps(const Point& p) const;
  double b_eps(const Point& p) const;
};

RegularizedProblem regularize(const SingularProblem& p, double eps);

/// Admissible integrability window (q_min, q_max] for the exponent q, where
/// q_max = ell_star/s for s <= 1 and (ell_star + (alpha-1) ell_star/ell)/s
/// for s > 1, with s = alpha + gamma and q_min = N/ell.
struct QWindow {
  double q_min = 0.0;
  double q_max = 0.0;
  bool unbounded_above = false;
  bool empty = false;
  bool contains(double q) const { return q > q_min && (unbounded_above || q <= q_max); }
};

QWindow q_window(double alpha_plus_gamma, double ell, double em, int dimN, double alpha);

/// Quadrature proxy for one integrability hypothesis.  `value` is the
/// discrete integral (or Luxemburg norm); `last_layer_share` the fraction
/// contributed by the innermost boundary refinement layer.
struct ProxyFlag {
  std::string name;
  bool evaluated = false;
  double value = 0.0;
  double last_layer_share = 0.0;
  bool suspected_divergent = false;
  bool pass = false;
};

/// Named results the checker can certify applicable.
enum class ResultTag {
  ExistenceEnergy,      // global weak solution in the energy space
  ExistenceLocal,       // locally-finite-energy solution (alpha >= 1)
  ExistenceConvex,      // existence with the convex perturbation b u^gamma
  UniqueEnergySolution, // uniqueness of the energy-space solution
  BoundedSolution,      // L-infinity bound via the exponent window
  ContinuousSolution,   // continuity up to the boundary (a bounded)
};

std::string to_string(ResultTag tag);

struct HypothesisReport {
  ProxyFlag a_L1;              // a integrable
  ProxyFlag a_dist_conjugate;  // a d^{-alpha} in the conjugate Orlicz class
  ProxyFlag a_Lcrit;           // a in L^{ell_star/(ell_star+alpha-1)}
  ProxyFlag a_Lq;              // a in L^q
  ProxyFlag a_Linf;            // a bounded
  ProxyFlag b_Lsigma;          // b in L^sigma

  bool alpha_le_1 = false;
  bool alpha_ge_1 = false;
  bool gamma_ok = false;       // gamma < ell - 1 (when b != 0)
  bool sigma_ok = false;       // sigma > ell/(ell - gamma - 1) (when b != 0)
  QWindow window;
  bool q_in_window = false;

  std::vector<ResultTag> applicable;
  bool applies(ResultTag tag) const;
  std::string summary() const;
};

/// Evaluates every integrability hypothesis as a boundary-layer-refined
/// quadrature proxy on the given mesh and lists the applicable results.
HypothesisReport check_problem(const SingularProblem& p, const Mesh& mesh);

}  // namespace phifem
