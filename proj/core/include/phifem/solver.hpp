#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phifem/assembly.hpp"
#include "phifem/field.hpp"
#include "phifem/problem.hpp"

namespace phifem {

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton failed to reach the residual tolerance; carries the best iterate.
class NonConvergence : public SolveError {
 public:
  NonConvergence(std::string what, DiscreteField best, double eps, double residual)
      : SolveError(std::move(what)), best_iterate(std::move(best)), eps(eps),
        residual_norm(residual) {}
  DiscreteField best_iterate;
  double eps;
  double residual_norm;
};

/// The converged iterate has a non-positive interior node: the mesh is too
/// coarse or the problem violates the positivity hypotheses.
class PositivityViolation : public SolveError {
 public:
  PositivityViolation(std::string what, DiscreteField iterate, int node)
      : SolveError(std::move(what)), iterate(std::move(iterate)), node(node) {}
  DiscreteField iterate;
  int node;
};

struct NewtonConfig {
  double tol_residual = 1e-10;   // max-norm stopping tolerance
  int max_iters = 80;
  double damping_factor = 0.5;   // backtracking contraction
  double min_step = 1e-12;
  bool positivity_guard = true;  // clip trial iterates at u >= -eps/2
  std::string linear_solver = "direct";  // "direct" or "cg"
  AssemblyOptions assembly{};
};

struct NewtonStep {
  int iter = 0;
  double residual_norm = 0.0;
  double step = 0.0;
};

struct NewtonTrace {
  std::vector<NewtonStep> steps;
  double final_residual = 0.0;
  bool converged = false;
};

/// Solves the finite-dimensional equation at one regularization level by
/// damped Newton.  The returned field has residual max-norm <= tol and is
/// strictly positive at interior nodes.
DiscreteField solve_level(const RegularizedProblem& rp, std::shared_ptr<const Mesh> mesh,
                          const DiscreteField& init, const NewtonConfig& cfg,
                          NewtonTrace* trace = nullptr);

struct LadderLevel {
  double eps = 0.0;
  DiscreteField u;
  NewtonTrace trace;
  double residual_norm = 0.0;
  double cauchy_max = -1.0;  // vs previous level (-1 on the first level)
  double cauchy_lux = -1.0;  // Luxemburg gradient norm of the difference
};

struct LadderConfig {
  std::vector<double> schedule;     // strictly decreasing eps values
  NewtonConfig newton{};
  double tol_cauchy_max = 2e-2;
  double tol_cauchy_lux = 5e-2;
};

struct SolveLadder {
  std::vector<LadderLevel> levels;
  bool converged = false;
  const LadderLevel& first() const { return levels.front(); }
  const LadderLevel& last() const { return levels.back(); }
};

/// A level solve failed partway along the schedule; carries the completed
/// levels and the failing eps.
class LadderFailure : public SolveError {
 public:
  LadderFailure(std::string what, SolveLadder partial, double failed_eps)
      : SolveError(std::move(what)), partial(std::move(partial)), failed_eps(failed_eps) {}
  SolveLadder partial;
  double failed_eps;
};

/// eps_n = 1/n for n in {1, 2, 4, ..., n_max} (geometric subsample).
std::vector<double> default_schedule(int n_max);

/// Runs the regularization ladder, warm-starting each level from the
/// previous solution (the first level starts from the boundary-distance
/// interpolant).  Convergence requires both Cauchy measures to fall below
/// their tolerances on two consecutive level transitions.
SolveLadder run_ladder(const SingularProblem& p, std::shared_ptr<const Mesh> mesh,
                       const LadderConfig& cfg);

/// Certificate that the finite-dimensional coercivity inequality
///   ell * min(r^ell, r^em) - C1 r - C2 r^{gamma+1} > 0
/// holds at r0, with C1, C2 computed from the discrete data.
struct CoercivityCertificate {
  double r0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double margin = 0.0;
};

CoercivityCertificate coercivity_radius(const RegularizedProblem& rp, const Mesh& mesh,
                                        double tol = 1e-10);

struct MultistartReport {
  int n_starts = 0;
  double tol = 0.0;
  double max_pairwise = 0.0;
  std::vector<double> pairwise;  // row-major upper triangle
  int n_failed = 0;              // starts that did not converge
  bool pass = false;
};

/// Solves the final level from n_starts random positive initial fields and
/// reports pairwise max-norm discrepancies; passes iff all <= 10 * tol_residual.
MultistartReport multistart_uniqueness_check(const SingularProblem& p,
                                             std::shared_ptr<const Mesh> mesh,
                                             const std::vector<double>& schedule,
                                             const NewtonConfig& cfg, int n_starts,
                                             std::uint64_t seed = 0);

}  // namespace phifem
