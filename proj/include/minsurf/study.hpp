#pragma once

#include <string>
#include <vector>

#include "minsurf/config.hpp"
#include "minsurf/solve.hpp"
#include "minsurf/varan.hpp"

namespace minsurf {

// Refinement convergence experiment: minimize on a base mesh, then on its
// successive 4:1 refinements, and instrument every level with the
// consistency/proximity/approximation reports.
struct StudyConfig {
  std::string domain = "disk";  // disk | cylinder
  std::string curve_spec = "circle r=1";
  int levels = 4;
  int disk_rings = 2;
  int cyl_around = 8;
  int cyl_along = 2;
  double apriori_r = 8.0;
  double collar_depth = 0.5;
  std::string out_dir;  // empty: no files written
  SolverConfig solver;

  void validate() const;
};

// Reads [study] and [solver] sections; unknown keys are rejected so typos
// fail loudly.
StudyConfig study_from_config(const Config& c);

// Just the [solver] section, applied over base (unknown keys rejected).
SolverConfig solver_from_config(const Config& c, SolverConfig base = SolverConfig{});

struct LevelReport {
  int level = 0;
  int n_vertices = 0;
  int n_simplices = 0;
  double area = 0;
  double grad_norm = 0;
  double minimality = 0;
  int entries = 0;
  int failed_starts = 0;
  double value_spread = 0;
  double apriori_worst = 0;
  bool apriori_member = false;
  ErrorReport errors;
  // Hausdorff distance between this level's minimizer set and the previous
  // level's, both lifted to the finest mesh (NaN at level 0).
  double hausdorff_prev = 0;
};

struct ConvergenceReport {
  std::vector<LevelReport> levels;
  int assertion_failures = 0;  // summed over all consistency reports
  std::string csv;             // exact text written to <out>/study.csv
};

// Runs the study: per level multistart minimization, area and residual
// records, error reports against the corrected reconstruction of the best
// minimizer (joined by the analytic catenoid patch when the boundary
// matches coaxial circles of its radius), approximation errors from
// closed-form curvature probes, and successive-set Hausdorff distances on
// the finest mesh. Writes level<n>.obj and study.csv under out_dir when
// set. Reruns with the same config are byte-identical.
ConvergenceReport run_converge_study(const StudyConfig& cfg);

}  // namespace minsurf
