#pragma once

#include <cstdint>
#include <vector>

#include "phifem/assembly.hpp"
#include "phifem/solver.hpp"

namespace phifem {

/// Largest constant C with u >= C*d at every interior node.
struct BoundaryLowerBound {
  double C_fit = 0.0;
  int argmin_node = -1;
  double argmin_distance = 0.0;
  bool argmin_in_strip = false;  // within the configured boundary strip
};

BoundaryLowerBound fit_boundary_lowerbound(const DiscreteField& u, const DistanceField& d,
                                           double strip_delta = 0.125);

/// Discrete W^{1,ell} seminorm of the transform
///   v = (u + eps)^{(alpha+ell-1)/ell} - eps^{(alpha+ell-1)/ell},
/// which vanishes on the boundary along with u.
double power_seminorm(const DiscreteField& u, double eps, double alpha, double ell);

struct PowerSeminormTrace {
  std::vector<double> eps;
  std::vector<double> value;
};

PowerSeminormTrace power_seminorm_trace(const SolveLadder& ladder, double alpha, double ell);

/// Data constants entering the iteration constant B; either measured from a
/// ladder or supplied directly.
struct MoserConstants {
  double omega_measure = 1.0;  // |domain|
  double u1_L1 = 1.0;          // L1 norm of the first-level solution
  double a_Lq = 1.0;           // ||a||_q
  double b_Linf = 0.0;         // ||b||_inf
  double c0 = 1.0;             // bound on ||u^{alpha+gamma}||_q
};

MoserConstants measure_moser_constants(const SingularProblem& p, const SolveLadder& ladder,
                                       const Mesh& mesh);

/// Sharp Sobolev embedding constant for W^{1,ell} -> L^{ell*} on R^N
/// (Talenti); the documented default for mu.
double sobolev_embedding_constant(int dimN, double ell);

/// The exponent bootstrap ladder: beta_1 = (ell+alpha-1) q', delta =
/// ell_star/(q' ell), beta_{k+1} = delta (beta_k + beta_1), with the
/// recursion cross-checked against its closed form, and the explicit
/// bound-limit d0 of F_k/beta_k.
struct MoserSchedule {
  double q = 0.0, q_prime = 0.0;
  double beta1 = 0.0, delta = 0.0;
  double mu = 0.0, B = 0.0;
  double log_const = 0.0;  // ell_star * ln(mu B beta1)
  int k0 = 1;              // first k with beta_k and beta_k + q'(alpha-1) > 1
  std::vector<double> beta;        // beta[k-1] = beta_k
  std::vector<double> beta_star;   // beta_k + beta1
  std::vector<double> lambda;      // ell_star * ln(mu B beta_k*)
  std::vector<double> F;           // F_{k+1} = lambda_k + delta F_k, F_1 supplied
  double F1 = 0.0;
  double d0 = 0.0;                 // explicit limit bound for F_k/beta_k
  double fk_over_bk_tail = 0.0;    // recursion value at k_max (empirical limit)
  double envelope = 0.0;           // e^{d0}
  double closed_form_dev = 0.0;    // max relative recursion-vs-closed-form deviation
};

/// Requires q > N/ell (so delta > 1) and q within the admissible window.
MoserSchedule moser_schedule(const SingularProblem& p, int k_max, double mu, double F1,
                             const MoserConstants& c);

struct EnvelopeLevel {
  double eps = 0.0;
  double max_norm = 0.0;
  bool within_envelope = false;
  bool norms_monotone = false;   // normalized L^{beta_k} norms nondecreasing in k
  std::vector<double> log_norm;            // ln ||u||_{beta_k}, k = k0..k_max
  std::vector<double> log_norm_normalized; // measure-normalized variant
};

struct EnvelopeReport {
  MoserSchedule schedule;
  std::vector<EnvelopeLevel> levels;
  bool all_within = true;
  bool all_monotone = true;
};

/// Measures the constants and F1 from the ladder's first level, builds the
/// schedule, and compares per-level sup norms against the envelope e^{d0}.
/// The verdict is informational: mu is configured, not certified.
EnvelopeReport envelope_check(const SingularProblem& p, const SolveLadder& ladder,
                              const Mesh& mesh, int k_max, double mu);

struct WeakSolutionReport {
  int n_tests = 0;
  double max_defect = 0.0;
  double mean_defect = 0.0;
};

/// Defect of the UNregularized weak form a/u^alpha + b u^gamma against
/// n_tests random P1 test fields with unit Luxemburg gradient norm.
WeakSolutionReport verify_weak_solution(const SingularProblem& p, const DiscreteField& u,
                                        int n_tests, std::uint64_t seed = 0,
                                        double kappa = 1e-10);

}  // namespace phifem
