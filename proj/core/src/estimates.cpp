#include "phifem/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace phifem {

namespace {

double integrate_field(const DiscreteField& u) {
  const Mesh& mesh = u.mesh();
  std::vector<QuadPoint> quad;
  double s = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) s += q.w * std::abs(u.at(cell, q));
  }
  return s;
}

}  // namespace

BoundaryLowerBound fit_boundary_lowerbound(const DiscreteField& u, const DistanceField& d,
                                           double strip_delta) {
  const Mesh& mesh = u.mesh();
  BoundaryLowerBound out;
  out.C_fit = std::numeric_limits<double>::infinity();
  for (int v : mesh.interior_vertices) {
    if (!(u[v] > 0.0)) {
      std::ostringstream os;
      os << "fit_boundary_lowerbound: non-positive interior value u[" << v << "] = " << u[v];
      throw std::domain_error(os.str());
    }
    const double ratio = u[v] / d.values[v];
    if (ratio < out.C_fit) {
      out.C_fit = ratio;
      out.argmin_node = v;
      out.argmin_distance = d.values[v];
    }
  }
  if (out.argmin_node < 0) throw std::domain_error("fit_boundary_lowerbound: no interior nodes");
  out.argmin_in_strip = out.argmin_distance <= strip_delta;
  return out;
}

double power_seminorm(const DiscreteField& u, double eps, double alpha, double ell) {
  if (!(eps > 0.0)) throw std::domain_error("power_seminorm: eps must be > 0");
  const double r = (alpha + ell - 1.0) / ell;
  const double shift = std::pow(eps, r);
  DiscreteField v(u.mesh_ptr(), 0.0, u.dirichlet());
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0) {
      std::ostringstream os;
      os << "power_seminorm: negative nodal value u[" << i << "] = " << u[i];
      throw std::domain_error(os.str());
    }
    v[i] = std::pow(u[i] + eps, r) - shift;
  }
  return sobolev_seminorm_ell(v, ell);
}

PowerSeminormTrace power_seminorm_trace(const SolveLadder& ladder, double alpha, double ell) {
  PowerSeminormTrace tr;
  for (const LadderLevel& lvl : ladder.levels) {
    tr.eps.push_back(lvl.eps);
    tr.value.push_back(power_seminorm(lvl.u, lvl.eps, alpha, ell));
  }
  return tr;
}

MoserConstants measure_moser_constants(const SingularProblem& p, const SolveLadder& ladder,
                                       const Mesh& mesh) {
  if (ladder.levels.empty())
    throw std::invalid_argument("measure_moser_constants: empty ladder");
  if (!(p.q > 0.0))
    throw std::invalid_argument("measure_moser_constants: problem.q is unset");
  MoserConstants c;
  c.omega_measure = mesh.domain_measure();
  c.u1_L1 = integrate_field(ladder.first().u);
  c.a_Lq = lp_norm(mesh, p.a, p.q);
  c.b_Linf = 0.0;
  if (p.has_b()) {
    std::vector<QuadPoint> quad;
    for (int cell = 0; cell < mesh.n_cells(); ++cell) {
      cell_quadrature(mesh, cell, quad);
      for (const QuadPoint& q : quad) c.b_Linf = std::max(c.b_Linf, std::abs(p.b(q.x)));
    }
  }
  // c0 bounds ||u^{alpha+gamma}||_q across the ladder, computed in log space.
  const double s = p.alpha + p.gamma;
  double c0 = 0.0;
  for (const LadderLevel& lvl : ladder.levels)
    c0 = std::max(c0, std::exp(s * log_lp_norm(lvl.u, s * p.q)));
  c.c0 = c0;
  return c;
}

double sobolev_embedding_constant(int dimN, double ell) {
  const double N = dimN;
  if (!(ell > 1.0) || !(ell < N))
    throw std::domain_error("sobolev_embedding_constant: requires 1 < ell < dimN");
  // Sharp constant of || . ||_{ell*} <= C || grad . ||_ell on R^N.
  const double g = std::tgamma(1.0 + N / 2.0) * std::tgamma(N) /
                   (std::tgamma(N / ell) * std::tgamma(1.0 + N - N / ell));
  return std::pow(M_PI, -0.5) * std::pow(N, -1.0 / ell) *
         std::pow((ell - 1.0) / (N - ell), 1.0 - 1.0 / ell) * std::pow(g, 1.0 / N);
}

MoserSchedule moser_schedule(const SingularProblem& p, int k_max, double mu, double F1,
                             const MoserConstants& c) {
  if (k_max < 1) throw std::invalid_argument("moser_schedule: k_max must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("moser_schedule: mu must be > 0");
  const NFunction& nf = *p.nfun;
  const double ell = nf.ell();
  const double N = nf.dimN();
  const double ell_star = nf.ell_star();
  const double q = p.q;
  if (!(q > N / ell)) {
    std::ostringstream os;
    os << "moser_schedule: q <= N/ell (" << q << " <= " << N / ell
       << "): iteration does not close";
    throw std::domain_error(os.str());
  }
  const QWindow w = q_window(p.alpha + p.gamma, ell, nf.em(), nf.dimN(), p.alpha);
  if (!w.contains(q)) throw std::domain_error("moser_schedule: q outside the admissible window");

  MoserSchedule m;
  m.q = q;
  m.q_prime = q / (q - 1.0);
  m.beta1 = (ell + p.alpha - 1.0) * m.q_prime;
  m.delta = ell_star / (m.q_prime * ell);
  m.mu = mu;
  m.F1 = F1;

  const double A0 = ell * nf.Phi(1.0) / m.q_prime;
  if (p.alpha <= 1.0) {
    const double data = A0 * std::pow(c.omega_measure, 2.0 - p.alpha - 1.0 / m.q_prime) *
                        std::pow(c.u1_L1, p.alpha - 1.0);
    m.B = (data + c.a_Lq + c.b_Linf * c.c0) / A0;
  } else {
    const double data = A0 * std::pow(c.omega_measure + std::pow(c.c0, q), 1.0 / q);
    m.B = (data + c.a_Lq + c.b_Linf * c.c0) / A0;
  }
  m.log_const = ell_star * std::log(mu * m.B * m.beta1);

  // Recursion beta_{k+1} = delta (beta_k + beta_1), cross-checked against
  // the closed forms in terms of powers of delta.
  m.beta.resize(k_max);
  m.beta_star.resize(k_max);
  m.lambda.resize(k_max);
  m.F.resize(k_max);
  m.beta[0] = m.beta1;
  for (int i = 0; i + 1 < k_max; ++i) m.beta[i + 1] = m.delta * (m.beta[i] + m.beta1);
  double dev = 0.0;
  for (int i = 0; i < k_max; ++i) {
    const int k = i + 1;
    m.beta_star[i] = m.beta[i] + m.beta1;
    const double dk = std::pow(m.delta, k), dk1 = std::pow(m.delta, k - 1);
    const double cf = (2.0 * dk - dk1 - m.delta) / (m.delta - 1.0) * m.beta1;
    const double cf_star = (2.0 * dk - dk1 - 1.0) / (m.delta - 1.0) * m.beta1;
    dev = std::max(dev, std::abs(m.beta[i] - cf) / cf);
    dev = std::max(dev, std::abs(m.beta_star[i] - cf_star) / cf_star);
    m.lambda[i] = ell_star * std::log(mu * m.B * m.beta_star[i]);
  }
  m.closed_form_dev = dev;

  m.F[0] = F1;
  for (int i = 0; i + 1 < k_max; ++i) m.F[i + 1] = m.lambda[i] + m.delta * m.F[i];

  m.k0 = k_max;
  for (int i = 0; i < k_max; ++i) {
    const int k = i + 1;
    if (m.beta[i] > 1.0 && m.beta[i] + m.q_prime * (p.alpha - 1.0) > 1.0) {
      m.k0 = k;
      break;
    }
  }

  // Explicit limit of the bounding chain for F_k/beta_k, using
  // sum_{n>=1} n x^n = x/(1-x)^2 at x = 1/delta.
  const double d = m.delta;
  const double series = d / ((d - 1.0) * (d - 1.0));
  const double numer =
      F1 + m.log_const / (d - 1.0) +
      ell_star * (std::log(2.0 / (d - 1.0)) / (d - 1.0) + std::log(d) * series);
  m.d0 = (d - 1.0) * numer / ((2.0 * d - 1.0) * m.beta1);
  m.fk_over_bk_tail = m.F.back() / m.beta.back();
  m.envelope = std::exp(m.d0);
  return m;
}

EnvelopeReport envelope_check(const SingularProblem& p, const SolveLadder& ladder,
                              const Mesh& mesh, int k_max, double mu) {
  if (ladder.levels.empty()) throw std::invalid_argument("envelope_check: empty ladder");
  const MoserConstants c = measure_moser_constants(p, ladder, mesh);
  const double ell = p.nfun->ell();
  const double q_prime = p.q / (p.q - 1.0);
  const double beta1 = (ell + p.alpha - 1.0) * q_prime;
  const double F1 = beta1 * log_lp_norm(ladder.first().u, beta1);

  EnvelopeReport rep;
  rep.schedule = moser_schedule(p, k_max, mu, F1, c);
  const double log_meas = std::log(mesh.domain_measure());

  for (const LadderLevel& lvl : ladder.levels) {
    EnvelopeLevel el;
    el.eps = lvl.eps;
    el.max_norm = lvl.u.max_norm();
    el.within_envelope = el.max_norm <= rep.schedule.envelope;
    el.norms_monotone = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = rep.schedule.k0 - 1; i < static_cast<int>(rep.schedule.beta.size()); ++i) {
      const double beta = rep.schedule.beta[i];
      const double ln = log_lp_norm(lvl.u, beta);
      el.log_norm.push_back(ln);
      const double ln_norm = ln - log_meas / beta;  // unit-normalized measure
      el.log_norm_normalized.push_back(ln_norm);
      if (ln_norm < prev - 1e-10 * (1.0 + std::abs(prev))) el.norms_monotone = false;
      prev = ln_norm;
    }
    rep.all_within = rep.all_within && el.within_envelope;
    rep.all_monotone = rep.all_monotone && el.norms_monotone;
    rep.levels.push_back(std::move(el));
  }
  return rep;
}

WeakSolutionReport verify_weak_solution(const SingularProblem& p, const DiscreteField& u,
                                        int n_tests, std::uint64_t seed, double kappa) {
  if (n_tests < 1) throw std::invalid_argument("verify_weak_solution: n_tests must be >= 1");
  if (!(u.min_interior() > 0.0))
    throw std::domain_error("verify_weak_solution: u must be positive at interior nodes");
  const Mesh& mesh = u.mesh();
  const NFunction& nf = *p.nfun;

  // A0(u, psi) with the unregularized right-hand side a/u^alpha + b u^gamma.
  const auto defect = [&](const DiscreteField& psi) {
    double s = 0.0;
    std::vector<QuadPoint> quad;
    for (int cell = 0; cell < mesh.n_cells(); ++cell) {
      double g[2], gp[2];
      u.cell_gradient(cell, g);
      psi.cell_gradient(cell, gp);
      const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + kappa * kappa);
      s += nf.phi(gn) * (g[0] * gp[0] + g[1] * gp[1]) * mesh.cell_measure(cell);
      cell_quadrature(mesh, cell, quad);
      for (const QuadPoint& q : quad) {
        const double uq = u.at(cell, q);
        const double rhs = p.a(q.x) / std::pow(uq, p.alpha) +
                           (p.has_b() ? p.b(q.x) * std::pow(std::max(uq, 0.0), p.gamma) : 0.0);
        s -= q.w * rhs * psi.at(cell, q);
      }
    }
    return std::abs(s);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  WeakSolutionReport rep;
  rep.n_tests = n_tests;
  double sum = 0.0;
  for (int t = 0; t < n_tests; ++t) {
    DiscreteField psi(u.mesh_ptr(), 0.0);
    double norm = 0.0;
    do {
      for (int v : mesh.interior_vertices) psi[v] = dist(rng);
      norm = luxemburg_gradient_norm(psi, nf);
    } while (!(norm > 0.0));
    for (int v : mesh.interior_vertices) psi[v] /= norm;
    const double d = defect(psi);
    rep.max_defect = std::max(rep.max_defect, d);
    sum += d;
  }
  rep.mean_defect = sum / n_tests;
  return rep;
}

}  // namespace phifem
