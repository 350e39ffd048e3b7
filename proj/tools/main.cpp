#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "phifem/runner.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  bool quiet = false;
  long long seed = -1;  // -1: keep the config's seed
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config, "run configuration file");
  if (needs_config) opt->required();
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
  cmd->add_option("--seed", args.seed, "override the RNG seed");
}

phifem::RunConfig load(const CommonArgs& args) {
  phifem::RunConfig cfg = phifem::load_run_config_file(args.config);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-element solver for singular Phi-Laplacian Dirichlet problems"};
  app.require_subcommand(1);

  CommonArgs check_args, solve_args, study_args, moser_args;
  std::string sizes_arg = "16,32,64";

  CLI::App* check = app.add_subcommand("check", "evaluate the problem hypotheses only");
  add_common(check, check_args);

  CLI::App* solve = app.add_subcommand("solve", "run the full regularization ladder");
  add_common(solve, solve_args);

  CLI::App* study = app.add_subcommand("study", "manufactured-solution convergence study");
  add_common(study, study_args);
  study->add_option("--sizes", sizes_arg, "comma-separated 1D mesh sizes");

  // Schedule-only mode: exponent ladder from flags, no PDE solve.
  CLI::App* moser = app.add_subcommand("moser", "print the L-infinity iteration schedule");
  double m_ell = 2.0, m_alpha = 1.0, m_gamma = 0.0, m_q = 2.0, m_mu = 0.0, m_F1 = 0.0;
  int m_dimN = 3, m_kmax = 25;
  phifem::MoserConstants m_const;
  moser->add_option("--ell", m_ell, "growth index ell")->required();
  moser->add_option("--dimN", m_dimN, "ambient dimension N");
  moser->add_option("--alpha", m_alpha, "singular exponent")->required();
  moser->add_option("--gamma", m_gamma, "convex exponent");
  moser->add_option("--q", m_q, "integrability exponent (q > N/ell)")->required();
  moser->add_option("--mu", m_mu, "embedding constant (0 = sharp-constant default)");
  moser->add_option("--kmax", m_kmax, "schedule length");
  moser->add_option("--F1", m_F1, "seed value F_1 = beta_1 ln||u||_{beta_1}");
  moser->add_option("--omega", m_const.omega_measure, "domain measure");
  moser->add_option("--u1-l1", m_const.u1_L1, "L1 norm of the first-level solution");
  moser->add_option("--a-lq", m_const.a_Lq, "||a||_q");
  moser->add_option("--b-linf", m_const.b_Linf, "||b||_inf");
  moser->add_option("--c0", m_const.c0, "bound on ||u^{alpha+gamma}||_q");
  add_common(moser, moser_args, /*needs_config=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      const auto rep = phifem::run_check(load(check_args), check_args.out, check_args.quiet);
      return rep.ok() ? 0 : 2;
    }
    if (solve->parsed()) {
      const auto rep = phifem::run(load(solve_args), solve_args.out, solve_args.quiet);
      if (!solve_args.quiet)
        std::cout << "wrote " << rep.artifacts.size() << " artifacts to " << solve_args.out
                  << "\n";
      return rep.ok() ? 0 : 2;
    }
    if (study->parsed()) {
      std::vector<int> sizes;
      {
        std::string s = sizes_arg;
        for (char& ch : s)
          if (ch == ',') ch = ' ';
        std::istringstream is(s);
        int v;
        while (is >> v) sizes.push_back(v);
      }
      const auto table =
          phifem::convergence_study(load(study_args), sizes, study_args.out, study_args.quiet);
      bool first = true;
      for (const auto& r : table.rows) {
        if (first)
          std::printf("n %-5d h %-10.4g max %-12.5g l2 %-12.5g\n", r.n, r.h, r.max_error,
                      r.l2_error);
        else
          std::printf("n %-5d h %-10.4g max %-12.5g l2 %-12.5g order %-8.3g %-8.3g\n", r.n, r.h,
                      r.max_error, r.l2_error, r.order_max, r.order_l2);
        first = false;
      }
      return 0;
    }
    if (moser->parsed()) {
      phifem::SingularProblem p;
      p.domain = {1, 0.0, 1.0, {}};
      p.a = [](const phifem::Point&) { return 1.0; };
      p.alpha = m_alpha;
      p.gamma = m_gamma;
      p.q = m_q;
      std::ostringstream key;
      key << "p-laplace(" << m_ell << ")";
      p.nfun = phifem::nfunction_from_key(key.str(), m_dimN);
      const double mu = m_mu > 0.0 ? m_mu : phifem::sobolev_embedding_constant(m_dimN, m_ell);
      const auto m = phifem::moser_schedule(p, m_kmax, mu, m_F1, m_const);
      std::printf("beta1 %.6g  delta %.6g  B %.6g  mu %.6g  d0 %.6g  envelope %.6g  k0 %d\n",
                  m.beta1, m.delta, m.B, m.mu, m.d0, m.envelope, m.k0);
      if (!moser_args.quiet) {
        std::printf("%4s %14s %14s %14s %14s %14s\n", "k", "beta_k", "beta_k*", "lambda_k",
                    "F_k", "F_k/beta_k");
        for (std::size_t i = 0; i < m.beta.size(); ++i)
          std::printf("%4zu %14.6g %14.6g %14.6g %14.6g %14.6g\n", i + 1, m.beta[i],
                      m.beta_star[i], m.lambda[i], m.F[i], m.F[i] / m.beta[i]);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
