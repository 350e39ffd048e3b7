#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phifem {

/// Thrown when a supplied weight function violates one of the structural
/// growth hypotheses the calculus relies on.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A weight phi : (0,inf) -> (0,inf) together with its growth indices.
/// The generated N-function is Phi(t) = int_0^t s*phi(s) ds (even in t).
struct NFunctionSpec {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;  // optional; finite differences otherwise
  double ell = 2.0;                    // lower growth index, > 1
  double em = 2.0;                     // upper growth index, ell <= em < dimN
  int dimN = 3;                        // ambient dimension of the index calculus
  double quad_tol = 1e-12;
  std::string name = "custom";
};

/// Monomial envelopes for Phi and its conjugate:
///   zeta0(t) Phi(rho) <= Phi(rho t) <= zeta1(t) Phi(rho)
///   zeta2(t) Phi~(rho) <= Phi~(rho t) <= zeta3(t) Phi~(rho)
struct ZetaBounds {
  double ell = 2.0;
  double em = 2.0;

  double ell_tilde() const { return ell / (ell - 1.0); }
  double em_tilde() const { return em / (em - 1.0); }
  double zeta0(double t) const;
  double zeta1(double t) const;
  double zeta2(double t) const;
  double zeta3(double t) const;
};

struct ProbeCheck {
  bool pass = false;
  double worst_value = 0.0;  // the extremal measured quantity
  double worst_t = 0.0;      // probe location where it occurs
  std::string detail;
};

/// Probe-grid verdict for the growth hypotheses on phi and the derived
/// ratio bound ell <= phi(t) t^2 / Phi(t) <= em.
struct HypothesisCheck {
  ProbeCheck limit_zero;   // t*phi(t) -> 0 as t -> 0+
  ProbeCheck limit_infty;  // t*phi(t) -> inf as t -> inf
  ProbeCheck monotone;     // t*phi(t) strictly increasing
  ProbeCheck index_band;   // ell-1 <= (t phi)' / phi <= em-1
  ProbeCheck ratio_band;   // ell <= phi t^2 / Phi <= em

  bool all_pass() const {
    return limit_zero.pass && limit_infty.pass && monotone.pass &&
           index_band.pass && ratio_band.pass;
  }
};

/// Numerical N-function calculus built from a weight phi.  All maps are pure
/// after construction; the memoized quadrature checkpoints are built eagerly
/// so a const instance is safe to share across threads.
class NFunction {
 public:
  explicit NFunction(NFunctionSpec spec);

  double phi(double t) const;
  double phi_prime(double t) const;

  /// Phi(t) = int_0^|t| s*phi(s) ds.
  double Phi(double t) const;
  /// Inverse of Phi on [0,inf), by bisection.
  double Phi_inverse(double s) const;

  /// Young conjugate Phi~(t) = sup_s { t s - Phi(s) }, t >= 0.
  double conjugate(double t) const;
  /// The maximizer s* of t s - Phi(s), i.e. the root of s*phi(s) = t.
  double conjugate_argmax(double t) const;

  /// Inverse of the Sobolev conjugate: Phi_*^{-1}(t) = int_0^t Phi^{-1}(s) s^{-(N+1)/N} ds.
  double sobolev_conjugate_inverse(double t) const;
  /// Phi_*(t), by inverting sobolev_conjugate_inverse.
  double sobolev_conjugate(double t) const;

  HypothesisCheck check_hypotheses() const;
  ZetaBounds zeta_bounds() const { return ZetaBounds{spec_.ell, spec_.em}; }

  const NFunctionSpec& spec() const { return spec_; }
  double ell() const { return spec_.ell; }
  double em() const { return spec_.em; }
  int dimN() const { return spec_.dimN; }
  /// Polynomial shadow of the Sobolev conjugate, N*ell/(N-ell).
  double ell_star() const;

 private:
  double integrand(double s) const;  // s*phi(s), 0 at s=0
  double partial_integral(double a, double b) const;

  NFunctionSpec spec_;
  std::vector<double> ckpt_t_;    // increasing checkpoint abscissae
  std::vector<double> ckpt_phi_;  // cumulative integral at checkpoints
  bool capped_ = false;           // grid truncated at the overflow guard
};

/// Luxemburg norm of a sampled field: inf { lam > 0 : sum_i w_i Phi(v_i/lam) <= 1 }.
/// Returns 0 for the zero field.  Bisection stops at |modular - 1| <= 1e-10.
double luxemburg_norm(std::span<const double> values, std::span<const double> weights,
                      const std::function<double(double)>& Phi);

struct ZetaSandwichViolation {
  double rho = 0.0, t = 0.0;
  std::string which;   // which inequality failed
  double excess = 0.0; // relative margin by which it failed
};

struct ZetaSandwichReport {
  int n_samples = 0;
  double worst_excess = 0.0;
  std::vector<ZetaSandwichViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Checks both monomial sandwiches at the given (rho, t) samples, with
/// relative slack on each inequality.
ZetaSandwichReport zeta_sandwich_check(const NFunction& nf,
                                       std::span<const std::pair<double, double>> samples,
                                       double slack = 1e-8);

/// Built-in weight catalog.  Keys:
///   p-laplace(p)          phi(t) = t^{p-2}
///   pq-laplace(p,q)       phi(t) = t^{p-2} + t^{q-2}, p < q
///   anisotropic(p1,...,pk) phi(t) = sum_j t^{pj-2}
///   weighted(p,c)         phi(t) = (c + t^p/(1+t^p)) t^{p-2}
std::shared_ptr<const NFunction> nfunction_from_key(const std::string& key, int dimN,
                                                    double quad_tol = 1e-12);
std::vector<std::string> nfunction_catalog();

/// Custom weight from a tabulated (t, phi(t)) CSV, interpolated by a
/// monotone cubic spline in log-log coordinates of t*phi(t).  Growth
/// indices are measured from the table unless supplied (> 0).
std::shared_ptr<const NFunction> nfunction_from_table(const std::vector<double>& t,
                                                      const std::vector<double>& phi, int dimN,
                                                      double ell = 0.0, double em = 0.0,
                                                      double quad_tol = 1e-12);

}  // namespace phifem
