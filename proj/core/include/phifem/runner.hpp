#pragma once

#include <string>
#include <vector>

#include "phifem/config.hpp"
#include "phifem/estimates.hpp"

namespace phifem {

struct LevelSummary {
  double eps = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  double cauchy_max = -1.0;
  double cauchy_lux = -1.0;
  double C_fit = 0.0;
  double power_seminorm = 0.0;
  double lux_grad_norm = 0.0;
  double max_norm = 0.0;
};

struct RunReport {
  std::string status = "ok";  // "ok" | "not-converged" | "estimate-error"
  HypothesisReport hypotheses;
  std::vector<LevelSummary> levels;
  bool ladder_converged = false;
  bool comparison_ok = false;      // u_eps + eps >= u_first - 10 tol nodewise
  double comparison_worst = 0.0;   // most negative margin observed
  BoundaryLowerBound lower_bound;  // final level
  MultistartReport multistart;     // when enabled
  EnvelopeReport envelope;         // when the moser block is enabled
  WeakSolutionReport weak;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;  // files written

  bool ok() const { return status == "ok"; }
};

/// Full pipeline: hypothesis check, ladder solve, estimate diagnostics, and
/// CSV/report emission into out_dir.  Output bytes depend only on the
/// config and seed.
RunReport run(const RunConfig& cfg, const std::string& out_dir, bool quiet = true);

/// Hypothesis check only (the `check` verb); writes report.txt.
RunReport run_check(const RunConfig& cfg, const std::string& out_dir, bool quiet = true);

struct StudyRow {
  int n = 0;
  double h = 0.0;
  double max_error = 0.0;
  double l2_error = 0.0;
  double order_max = 0.0;  // observed order vs previous row (0 on first row)
  double order_l2 = 0.0;
};

struct StudyTable {
  std::vector<StudyRow> rows;
};

/// Manufactured-solution convergence study over the given 1D mesh sizes.
StudyTable convergence_study(const RunConfig& cfg, const std::vector<int>& mesh_sizes,
                             const std::string& out_dir, bool quiet = true);

}  // namespace phifem
