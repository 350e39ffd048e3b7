#include "phifem/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "phifem/csv.hpp"

namespace phifem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_solution_csv(const std::string& path, const DiscreteField& u,
                        const DistanceField& d, int precision) {
  const Mesh& mesh = u.mesh();
  CsvWriter w(path, {"vertex", "x", "y", "u", "d", "u_over_d"}, precision);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    w.cell(v);
    w.cell(mesh.vertices[v].x);
    w.cell(mesh.vertices[v].y);
    w.cell(u[v]);
    w.cell(d.values[v]);
    // The ratio column is 0 on the boundary where u = d = 0.
    w.cell(mesh.on_boundary[v] ? 0.0 : u[v] / d.values[v]);
    w.end_row();
  }
}

void write_ladder_csv(const std::string& path, const std::vector<LevelSummary>& levels,
                      int precision) {
  CsvWriter w(path,
              {"eps", "newton_iters", "residual", "cauchy_max", "cauchy_lux", "C_fit",
               "power_seminorm", "lux_grad_norm", "max_norm"},
              precision);
  for (const LevelSummary& l : levels) {
    w.cell(l.eps);
    w.cell(l.newton_iters);
    w.cell(l.residual);
    w.cell(l.cauchy_max);
    w.cell(l.cauchy_lux);
    w.cell(l.C_fit);
    w.cell(l.power_seminorm);
    w.cell(l.lux_grad_norm);
    w.cell(l.max_norm);
    w.end_row();
  }
}

void write_moser_csv(const std::string& path, const MoserSchedule& m, int precision) {
  CsvWriter w(path, {"k", "beta_k", "beta_star_k", "lambda_k", "F_k", "F_k_over_beta_k"},
              precision);
  for (std::size_t i = 0; i < m.beta.size(); ++i) {
    w.cell(static_cast<int>(i + 1));
    w.cell(m.beta[i]);
    w.cell(m.beta_star[i]);
    w.cell(m.lambda[i]);
    w.cell(m.F[i]);
    w.cell(m.F[i] / m.beta[i]);
    w.end_row();
  }
}

std::vector<LevelSummary> summarize_levels(const SolveLadder& ladder, const SingularProblem& p,
                                           const DistanceField& d, double strip_delta) {
  std::vector<LevelSummary> out;
  for (const LadderLevel& lvl : ladder.levels) {
    LevelSummary s;
    s.eps = lvl.eps;
    s.newton_iters = static_cast<int>(lvl.trace.steps.size()) - 1;
    s.residual = lvl.residual_norm;
    s.cauchy_max = lvl.cauchy_max;
    s.cauchy_lux = lvl.cauchy_lux;
    s.C_fit = fit_boundary_lowerbound(lvl.u, d, strip_delta).C_fit;
    s.power_seminorm = power_seminorm(lvl.u, lvl.eps, p.alpha, p.nfun->ell());
    s.lux_grad_norm = luxemburg_gradient_norm(lvl.u, *p.nfun);
    s.max_norm = lvl.u.max_norm();
    out.push_back(s);
  }
  return out;
}

void write_report(const std::string& path, const RunConfig& cfg, const RunReport& rep) {
  std::ofstream out(path);
  out << "phifem run report\n";
  out << "status: " << rep.status << "\n";
  out << "phi: " << cfg.phi_key << "  alpha: " << cfg.problem.alpha;
  if (cfg.problem.has_b()) out << "  gamma: " << cfg.problem.gamma;
  out << "\n\n";
  out << rep.hypotheses.summary() << "\n";
  out << "ladder: " << rep.levels.size() << " levels, converged "
      << (rep.ladder_converged ? "yes" : "no") << "\n";
  out << "comparison chain (u_eps + eps >= u_first - 10 tol): "
      << (rep.comparison_ok ? "holds" : "VIOLATED") << ", worst margin " << rep.comparison_worst
      << "\n";
  out << "boundary lower bound: C_fit " << rep.lower_bound.C_fit << " at node "
      << rep.lower_bound.argmin_node
      << (rep.lower_bound.argmin_in_strip ? " (in boundary strip)" : " (outside strip)") << "\n";
  if (!rep.envelope.levels.empty()) {
    const MoserSchedule& m = rep.envelope.schedule;
    out << "sup-norm envelope: e^{d0} = " << m.envelope << " (d0 " << m.d0 << ", delta "
        << m.delta << ", B " << m.B << ", mu " << m.mu << ", recursion tail "
        << m.fk_over_bk_tail << ")\n";
    out << "  all levels within envelope: " << (rep.envelope.all_within ? "yes" : "no")
        << ", norms monotone: " << (rep.envelope.all_monotone ? "yes" : "no") << "\n";
  }
  if (rep.multistart.n_starts > 0) {
    out << "multistart agreement: max pairwise " << rep.multistart.max_pairwise << " vs tol "
        << rep.multistart.tol << " -> " << (rep.multistart.pass ? "pass" : "FAIL") << "\n";
  }
  if (rep.weak.n_tests > 0) {
    out << "weak-form defect (" << rep.weak.n_tests << " tests): max " << rep.weak.max_defect
        << ", mean " << rep.weak.mean_defect << "\n";
  }
  out << "wall seconds: " << rep.wall_seconds << "\n";
}

}  // namespace

RunReport run_check(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  const auto t0 = Clock::now();
  std::filesystem::create_directories(out_dir);
  RunReport rep;
  const auto mesh = cfg.build_mesh();
  rep.hypotheses = check_problem(cfg.problem, *mesh);
  rep.status = "ok";
  rep.wall_seconds = seconds_since(t0);
  const std::string path = join_path(out_dir, "report.txt");
  write_report(path, cfg, rep);
  rep.artifacts.push_back(path);
  if (!quiet) std::cout << rep.hypotheses.summary();
  return rep;
}

RunReport run(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  const auto t0 = Clock::now();
  std::filesystem::create_directories(out_dir);
  RunReport rep;
  const auto mesh = cfg.build_mesh();
  const DistanceField d = distance_field(*mesh);
  rep.hypotheses = check_problem(cfg.problem, *mesh);

  SolveLadder ladder;
  bool failed = false;
  std::string failure;
  try {
    ladder = run_ladder(cfg.problem, mesh, cfg.ladder);
  } catch (const LadderFailure& e) {
    // Preserve the completed levels, emit partial outputs, then re-throw.
    ladder = e.partial;
    failed = true;
    failure = e.what();
  }
  rep.ladder_converged = ladder.converged;

  if (!ladder.levels.empty()) {
    rep.levels = summarize_levels(ladder, cfg.problem, d, cfg.diagnostics.strip_delta);

    // Discrete comparison chain against the first level.
    const DiscreteField& u1 = ladder.first().u;
    const double slack = 10.0 * cfg.ladder.newton.tol_residual;
    rep.comparison_ok = true;
    rep.comparison_worst = 0.0;
    for (const LadderLevel& lvl : ladder.levels) {
      for (int v : mesh->interior_vertices) {
        const double margin = lvl.u[v] + lvl.eps - u1[v] + slack;
        rep.comparison_worst = std::min(rep.comparison_worst, margin);
        if (margin < 0.0) rep.comparison_ok = false;
      }
    }
    rep.lower_bound =
        fit_boundary_lowerbound(ladder.last().u, d, cfg.diagnostics.strip_delta);

    const int prec = cfg.output.precision;
    const std::string sol_path = join_path(out_dir, "solution.csv");
    write_solution_csv(sol_path, ladder.last().u, d, prec);
    rep.artifacts.push_back(sol_path);
    const std::string lad_path = join_path(out_dir, "ladder.csv");
    write_ladder_csv(lad_path, rep.levels, prec);
    rep.artifacts.push_back(lad_path);

    bool estimate_error = false;
    if (!failed && cfg.diagnostics.moser && cfg.problem.q > 0.0) {
      try {
        const double mu = cfg.diagnostics.mu > 0.0
                              ? cfg.diagnostics.mu
                              : sobolev_embedding_constant(cfg.problem.nfun->dimN(),
                                                           cfg.problem.nfun->ell());
        rep.envelope = envelope_check(cfg.problem, ladder, *mesh, cfg.diagnostics.k_max, mu);
        const std::string moser_path = join_path(out_dir, "moser.csv");
        write_moser_csv(moser_path, rep.envelope.schedule, prec);
        rep.artifacts.push_back(moser_path);
      } catch (const std::exception& e) {
        estimate_error = true;
        failure = e.what();
      }
    }
    if (!failed && cfg.diagnostics.multistart >= 2) {
      rep.multistart =
          multistart_uniqueness_check(cfg.problem, mesh, cfg.ladder.schedule,
                                      cfg.ladder.newton, cfg.diagnostics.multistart, cfg.seed);
    }
    if (!failed && cfg.diagnostics.weak_tests > 0) {
      rep.weak = verify_weak_solution(cfg.problem, ladder.last().u,
                                      cfg.diagnostics.weak_tests, cfg.seed);
    }
    if (estimate_error) rep.status = "estimate-error";
  }

  if (failed)
    rep.status = "not-converged";
  else if (!ladder.converged && rep.status == "ok")
    rep.status = "not-converged";

  rep.wall_seconds = seconds_since(t0);
  const std::string report_path = join_path(out_dir, "report.txt");
  write_report(report_path, cfg, rep);
  rep.artifacts.push_back(report_path);
  if (!quiet) {
    std::cout << "status: " << rep.status << " (levels " << rep.levels.size() << ", converged "
              << (rep.ladder_converged ? "yes" : "no") << ")\n";
  }
  if (failed) throw LadderFailure(failure, std::move(ladder), 0.0);
  return rep;
}

StudyTable convergence_study(const RunConfig& cfg, const std::vector<int>& mesh_sizes,
                             const std::string& out_dir, bool quiet) {
  if (!cfg.manufactured.present)
    throw ConfigError("manufactured.u_star: required for a convergence study");
  if (cfg.problem.domain.dim != 1)
    throw ConfigError("manufactured studies are supported on intervals only");
  if (mesh_sizes.empty()) throw std::invalid_argument("convergence_study: no mesh sizes");
  std::filesystem::create_directories(out_dir);

  const Domain& dom = cfg.problem.domain;
  const Expression& ustar = cfg.manufactured.u_star;
  const bool needs_d = ustar.uses_distance();
  const auto exact = [&](const Point& p) {
    const double dd = needs_d ? std::min(p.x - dom.x0, dom.x1 - p.x) : 0.0;
    return ustar.eval(p.x, p.y, dd);
  };

  StudyTable table;
  for (const int n : mesh_sizes) {
    const auto mesh = cfg.build_mesh(n);
    const RegularizedProblem rp = regularize(cfg.problem, cfg.manufactured.eps);
    const DiscreteField init = DiscreteField::interpolate(mesh, exact);
    const DiscreteField u = solve_level(rp, mesh, init, cfg.ladder.newton);

    StudyRow row;
    row.n = n;
    row.h = mesh->h_max;
    for (int v : mesh->interior_vertices)
      row.max_error = std::max(row.max_error, std::abs(u[v] - exact(mesh->vertices[v])));
    double l2 = 0.0;
    std::vector<QuadPoint> quad;
    for (int cell = 0; cell < mesh->n_cells(); ++cell) {
      cell_quadrature(*mesh, cell, quad);
      for (const QuadPoint& q : quad) {
        const double e = u.at(cell, q) - exact(q.x);
        l2 += q.w * e * e;
      }
    }
    row.l2_error = std::sqrt(l2);
    if (!table.rows.empty()) {
      const StudyRow& prev = table.rows.back();
      const double lh = std::log(prev.h / row.h);
      row.order_max = std::log(prev.max_error / row.max_error) / lh;
      row.order_l2 = std::log(prev.l2_error / row.l2_error) / lh;
    }
    table.rows.push_back(row);
    if (!quiet)
      std::cout << "n " << row.n << "  h " << row.h << "  max " << row.max_error << "  order "
                << row.order_max << "\n";
  }

  CsvWriter w(join_path(out_dir, "study.csv"),
              {"n", "h", "max_error", "l2_error", "order_max", "order_l2"},
              cfg.output.precision);
  bool first = true;
  for (const StudyRow& r : table.rows) {
    w.cell(r.n);
    w.cell(r.h);
    w.cell(r.max_error);
    w.cell(r.l2_error);
    // No observed order on the first row.
    if (first) {
      w.cell(std::string{});
      w.cell(std::string{});
      first = false;
    } else {
      w.cell(r.order_max);
      w.cell(r.order_l2);
    }
    w.end_row();
  }
  return table;
}

}  // namespace phifem
