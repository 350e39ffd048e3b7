#include "phifem/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <random>
#include <sstream>

namespace phifem {

namespace {

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs,
                             const std::string& kind) {
  if (kind == "cg") {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20 * rhs.size());
    cg.compute(J);
    Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw SolveError("linear solve (cg) did not converge");
    return x;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw SolveError("linear solve (direct): factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolveError("linear solve (direct): solve failed");
  return x;
}

void apply_update(DiscreteField& u, const DiscreteField& base, const Eigen::VectorXd& delta,
                  double step, const RegularizedProblem& rp, bool guard) {
  const Mesh& mesh = u.mesh();
  for (int v : mesh.interior_vertices) {
    double val = base[v] + step * delta[mesh.free_index[v]];
    if (guard && val < -0.5 * rp.eps) val = -0.5 * rp.eps;
    u[v] = val;
  }
}

}  // namespace

DiscreteField solve_level(const RegularizedProblem& rp, std::shared_ptr<const Mesh> mesh,
                          const DiscreteField& init, const NewtonConfig& cfg,
                          NewtonTrace* trace) {
  if (init.mesh_ptr().get() != mesh.get())
    throw std::invalid_argument("solve_level: init field lives on a different mesh");
  DiscreteField u = init;
  u.enforce_dirichlet();
  NewtonTrace local;
  NewtonTrace& tr = trace ? *trace : local;
  tr.steps.clear();
  tr.converged = false;

  Eigen::VectorXd R = assemble_residual(rp, u, cfg.assembly);
  double rn = R.size() ? R.cwiseAbs().maxCoeff() : 0.0;
  tr.steps.push_back({0, rn, 0.0});

  DiscreteField trial = u;
  int it = 0;
  while (rn > cfg.tol_residual) {
    if (++it > cfg.max_iters) {
      tr.final_residual = rn;
      std::ostringstream os;
      os << "Newton did not reach tol " << cfg.tol_residual << " in " << cfg.max_iters
         << " iterations at eps = " << rp.eps << " (residual " << rn << ")";
      throw NonConvergence(os.str(), u, rp.eps, rn);
    }
    const Eigen::SparseMatrix<double> J = assemble_jacobian(rp, u, cfg.assembly);
    const Eigen::VectorXd delta = linear_solve(J, -R, cfg.linear_solver);

    // Backtracking on the residual max-norm; each accepted step strictly
    // decreases it.
    double step = 1.0;
    bool accepted = false;
    while (step >= cfg.min_step) {
      apply_update(trial, u, delta, step, rp, cfg.positivity_guard);
      Eigen::VectorXd Rt = assemble_residual(rp, trial, cfg.assembly);
      const double rt = Rt.size() ? Rt.cwiseAbs().maxCoeff() : 0.0;
      if (rt < rn) {
        u = trial;
        R = std::move(Rt);
        rn = rt;
        accepted = true;
        break;
      }
      step *= cfg.damping_factor;
    }
    if (!accepted) {
      tr.final_residual = rn;
      std::ostringstream os;
      os << "Newton line search stalled at eps = " << rp.eps << " (residual " << rn << ")";
      throw NonConvergence(os.str(), u, rp.eps, rn);
    }
    tr.steps.push_back({it, rn, step});
  }
  tr.final_residual = rn;
  tr.converged = true;

  for (int v : u.mesh().interior_vertices) {
    if (!(u[v] > 0.0)) {
      std::ostringstream os;
      os << "converged iterate is non-positive at interior node " << v << " (u = " << u[v]
         << "); refine the mesh or revisit the problem hypotheses";
      throw PositivityViolation(os.str(), u, v);
    }
  }
  return u;
}

std::vector<double> default_schedule(int n_max) {
  if (n_max < 1) throw std::invalid_argument("default_schedule: n_max must be >= 1");
  std::vector<double> s;
  for (int n = 1; n <= n_max; n *= 2) s.push_back(1.0 / n);
  if (std::abs(s.back() - 1.0 / n_max) > 0.0) s.push_back(1.0 / n_max);
  return s;
}

SolveLadder run_ladder(const SingularProblem& p, std::shared_ptr<const Mesh> mesh,
                       const LadderConfig& cfg) {
  p.validate();
  if (cfg.schedule.empty()) throw std::invalid_argument("run_ladder: empty schedule");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    if (!(cfg.schedule[i] > 0.0))
      throw std::invalid_argument("run_ladder: schedule entries must be positive");
    if (i > 0 && !(cfg.schedule[i] < cfg.schedule[i - 1]))
      throw std::invalid_argument("run_ladder: schedule must be strictly decreasing");
  }

  SolveLadder ladder;
  DiscreteField warm = DiscreteField::interpolate(
      mesh, [&mesh](const Point& x) { return mesh->distance_to_boundary(x); });

  for (const double eps : cfg.schedule) {
    const RegularizedProblem rp = regularize(p, eps);
    LadderLevel lvl;
    lvl.eps = eps;
    try {
      lvl.u = solve_level(rp, mesh, warm, cfg.newton, &lvl.trace);
    } catch (const SolveError& e) {
      throw LadderFailure(std::string(e.what()), std::move(ladder), eps);
    }
    lvl.residual_norm = lvl.trace.final_residual;
    if (!ladder.levels.empty()) {
      const DiscreteField& prev = ladder.levels.back().u;
      DiscreteField diff(mesh, 0.0);
      for (int v = 0; v < mesh->n_vertices(); ++v) diff[v] = lvl.u[v] - prev[v];
      lvl.cauchy_max = diff.max_norm();
      lvl.cauchy_lux = luxemburg_gradient_norm(diff, *p.nfun);
    }
    warm = lvl.u;
    ladder.levels.push_back(std::move(lvl));
  }

  const auto level_ok = [&](const LadderLevel& l) {
    return l.cauchy_max >= 0.0 && l.cauchy_max <= cfg.tol_cauchy_max &&
           l.cauchy_lux <= cfg.tol_cauchy_lux;
  };
  const std::size_t n = ladder.levels.size();
  ladder.converged =
      n >= 3 && level_ok(ladder.levels[n - 1]) && level_ok(ladder.levels[n - 2]);
  return ladder;
}

CoercivityCertificate coercivity_radius(const RegularizedProblem& rp, const Mesh& mesh,
                                        double tol) {
  const SingularProblem& p = rp.parent;
  const NFunction& nf = *p.nfun;
  const double ell = nf.ell(), em = nf.em();
  if (p.has_b() && !(p.gamma + 1.0 < ell))
    throw std::domain_error("coercivity_radius: requires gamma + 1 < ell");

  // C1 = eps^{-alpha} ||a_eps||_conj * (Holder x Poincare constant 4 d_Omega).
  const double d_omega = mesh.diameter();
  std::vector<QuadPoint> quad;
  std::vector<double> vals, wts;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) {
      vals.push_back(rp.a_eps(q.x));
      wts.push_back(q.w);
    }
  }
  const double a_norm = luxemburg_norm(vals, wts, [&nf](double t) { return nf.conjugate(t); });
  const double C1 = std::pow(rp.eps, -p.alpha) * a_norm * 4.0 * d_omega;

  // C2 = ||b_eps||_inf * (embedding of the energy space into L^{gamma+1})^{gamma+1},
  // via Poincare, the L_Phi -> L^ell bound, and measure interpolation.
  double C2 = 0.0;
  if (p.has_b()) {
    double b_max = 0.0;
    for (int cell = 0; cell < mesh.n_cells(); ++cell) {
      cell_quadrature(mesh, cell, quad);
      for (const QuadPoint& q : quad) b_max = std::max(b_max, rp.b_eps(q.x));
    }
    const double meas = mesh.domain_measure();
    const double c_ell = std::pow(meas + 1.0 / nf.Phi(1.0), 1.0 / ell);
    const double c_interp = std::pow(meas, 1.0 / (p.gamma + 1.0) - 1.0 / ell);
    const double c_emb = c_interp * c_ell * 2.0 * d_omega;
    C2 = b_max * std::pow(c_emb, p.gamma + 1.0);
  }

  const auto margin = [&](double r) {
    return ell * std::min(std::pow(r, ell), std::pow(r, em)) - C1 * r -
           C2 * std::pow(r, p.gamma + 1.0);
  };

  CoercivityCertificate cert;
  cert.C1 = C1;
  cert.C2 = C2;
  double lo = 1.0, hi = 1.0 + tol;
  if (margin(hi) <= 0.0) {
    lo = hi;
    hi = 2.0;
    int guard = 0;
    while (margin(hi) <= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12 || ++guard > 80)
        throw SolveError("coercivity_radius: no positive margin up to r = 1e12");
    }
    while ((hi - lo) > tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) <= 0.0 ? lo : hi) = mid;
    }
  }
  cert.r0 = hi;
  cert.margin = margin(hi);
  return cert;
}

MultistartReport multistart_uniqueness_check(const SingularProblem& p,
                                             std::shared_ptr<const Mesh> mesh,
                                             const std::vector<double>& schedule,
                                             const NewtonConfig& cfg, int n_starts,
                                             std::uint64_t seed) {
  if (n_starts < 2) throw std::invalid_argument("multistart_uniqueness_check: need >= 2 starts");
  if (schedule.empty()) throw std::invalid_argument("multistart_uniqueness_check: empty schedule");
  MultistartReport rep;
  rep.n_starts = n_starts;
  rep.tol = 10.0 * cfg.tol_residual;

  const RegularizedProblem rp = regularize(p, schedule.back());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  std::vector<DiscreteField> sols;
  for (int s = 0; s < n_starts; ++s) {
    DiscreteField init(mesh, 0.0);
    for (int v : mesh->interior_vertices) init[v] = dist(rng);
    try {
      sols.push_back(solve_level(rp, mesh, init, cfg));
    } catch (const SolveError&) {
      ++rep.n_failed;
    }
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      const double d = (sols[i].values() - sols[j].values()).cwiseAbs().maxCoeff();
      rep.pairwise.push_back(d);
      rep.max_pairwise = std::max(rep.max_pairwise, d);
    }
  }
  rep.pass = rep.n_failed == 0 && rep.max_pairwise <= rep.tol;
  return rep;
}

}  // namespace phifem
