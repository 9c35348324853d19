#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "minsurf/functional.hpp"
#include "minsurf/immersion.hpp"

namespace minsurf {

enum class SolveMethod { GradientDescent, H1Iteration };

SolveMethod parse_method(const std::string& name);
std::string method_name(SolveMethod m);

struct SolverConfig {
  SolveMethod method = SolveMethod::H1Iteration;
  // Stopping threshold on the gradient inf-norm (max vertex row norm).
  // Nonpositive means 1e-8 times the boundary bounding-box diagonal.
  double grad_tol = -1.0;
  int max_iters = 100000;
  // Minimum allowed sigma_min/sigma_max over simplices for an accepted step.
  double quality_floor = 1e-6;
  double armijo_c = 1e-4;
  int multistart_count = 8;
  std::uint64_t seed = 0;
  // When nonempty, minimize writes one CSV row per iteration here;
  // multistart_minimize inserts ".startN" before the extension.
  std::string trace_path;
  // Bound on layout-normalization cycles after the gradient test is met.
  int gauge_max_cycles = 50;

  void validate() const;
};

struct SolveResult {
  DiscreteImmersion surface;
  double value = 0;
  double grad_norm = 0;
  int iterations = 0;
  bool converged = false;
};

// Deduplicated results of a multistart run, sorted by value then
// lexicographic positions. value_spread is max - min value over converged
// runs before dedup; dedup merges entries with dist_imm total below
// 1e-6 times the boundary bounding-box diagonal.
struct MinimizerSet {
  std::vector<SolveResult> entries;
  double value_spread = 0;
  int failed_starts = 0;
  double dedup_threshold = 0;
};

// Area descent from one initialization with pinned boundary. The
// h1-iteration preconditions the step by a cotangent-stiffness solve
// (conjugate gradients, Jacobi preconditioner, relative residual 1e-10) and,
// once the gradient test holds, normalizes the interior layout toward the
// graph-harmonic extension of the boundary, accepting such moves only when
// the value does not increase; this pins down the parameterization inside
// value-flat valleys (planar spanning configurations) and backs off to
// nothing on curved minimizers. Every accepted step keeps all simplices
// above quality_floor.
SolveResult minimize(const DiscreteImmersion& init, const BoundaryCurve& curve,
                     const SolverConfig& cfg);

// Runs minimize from multistart_count initializations: cone over the
// boundary centroid, graph-harmonic averaged interior, and seeded random
// interior jitters of those two (amplitude 10% of the boundary bounding-box
// diagonal per coordinate).
MinimizerSet multistart_minimize(std::shared_ptr<const Triangulation> mesh,
                                 const BoundaryCurve& curve, const SolverConfig& cfg);

// Scale-aware first-order optimality measure: max over interior vertices of
// the gradient row norm divided by the one-ring volume.
double minimality_residual(const DiscreteImmersion& f);

// The two deterministic starts, exposed for tests and the CLI.
DiscreteImmersion cone_start(std::shared_ptr<const Triangulation> mesh,
                             const BoundaryCurve& curve);
DiscreteImmersion averaged_start(std::shared_ptr<const Triangulation> mesh,
                                 const BoundaryCurve& curve);

// Diagonal of the axis-aligned bounding box of the boundary vertex
// positions (the scale reference for tolerances and jitters).
double boundary_bbox_diagonal(const DiscreteImmersion& f);

}  // namespace minsurf
