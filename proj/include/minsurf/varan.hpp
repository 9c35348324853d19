#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "minsurf/functional.hpp"
#include "minsurf/immersion.hpp"

namespace minsurf {

// Errors of the discretization relative to candidate immersions. deltas are
// consistency errors (functional gaps across the sampling/reconstruction
// operators), epsilons are proximity errors (shape-space distances, reported
// as exact PL distances after lifting to a common refinement). All reported
// values are maxima over the finite candidate lists handed in, hence lower
// bounds for the corresponding suprema over the full regularity classes.
struct ErrorReport {
  double delta_sampling = 0;
  double delta_reconstruction = 0;
  double delta_total() const { return delta_sampling + delta_reconstruction; }
  double eps_sampling = 0;
  double eps_reconstruction = 0;
  double eps_total() const { return std::max(eps_sampling, eps_reconstruction); }
  double rho = 0;
  double inf_discrete = 0;  // best discrete value seen
  double inf_smooth = 0;    // best smooth value seen
  double inf_gap = 0;
  // Runtime checks of the minimizer-set inclusion and of
  // |inf gap| <= max(deltas); nonzero means a broken run.
  int assertion_failures = 0;
  std::vector<std::string> failure_notes;  // per-candidate diagnostics
};

// Vertex restriction of an evaluable immersion: positions are the map's
// values at the simplex corners. Throws DomainError naming the first
// degenerate sampled simplex (the mesh is too coarse for this candidate).
DiscreteImmersion sample_op(const SampledImmersion& f);

// PL interpolant of f plus the boundary correction that restores the exact
// curve along the boundary: inside the collar (normalized boundary distance
// below collar_depth) the correction is (curve - PL boundary) at the nearest
// boundary parameter, faded by the cutoff chi(t) = exp(t^2 / (t^2 - t)).
// Validity of the corrected jacobian is probed at the construction
// quadrature nodes; a failure throws with the violating simplex.
SampledImmersion reconstruct_op(const DiscreteImmersion& f, const BoundaryCurve& curve,
                                double collar_depth);

// Consistency errors over finite candidate lists: delta_sampling is the
// worst positive part of discrete-value-after-sampling minus smooth value,
// over the smooth candidates; delta_reconstruction the worst positive part
// of smooth-value-after-reconstruction minus discrete value, over the
// discrete ones. Also fills the best values seen on each side, checks
// |inf gap| <= max(deltas), and checks the level-set inclusions (sampling
// maps rho-minimizers into (rho + delta)-minimizers relative to the imaged
// values, and reconstruction back) for rho in {0, delta, 2 delta}. The
// checks are counted, not proven: with candidate lists that include the
// surfaces the study actually produced they must hold up to slack, and a
// failure flags a broken discretization.
ErrorReport consistency_errors(const std::vector<SampledImmersion>& smooth_candidates,
                               const std::vector<DiscreteImmersion>& discrete_candidates,
                               const BoundaryCurve& curve, double collar_depth = 0.5);

// Proximity errors over the same lists: eps_sampling compares each smooth
// candidate's fine PL proxy with the lift of its vertex samples;
// eps_reconstruction compares each discrete candidate's lift with the
// sampled corrected reconstruction. Both are measured by dist_imm with
// boundary terms after lifting everything lift_levels times.
ErrorReport proximity_errors(const std::vector<SampledImmersion>& smooth_candidates,
                             const std::vector<DiscreteImmersion>& discrete_candidates,
                             const BoundaryCurve& curve, double collar_depth = 0.5,
                             int lift_levels = 1);

// Empirical relative approximation error of the triangulation: worst ratio
// over probe immersions of the PL interpolation error (values and
// derivatives, interior and boundary restriction, on a per-simplex sample
// lattice) against the probe's W^{1,inf} size (second derivatives by
// central differences of the jacobian). A lower bound for the class-wide
// supremum. Probes with vanishing derivative norm are skipped; all probes
// skipped is an error.
double rho_estimate(const Triangulation& t, const BoundaryCurve& curve,
                    const std::vector<SampledImmersion>& probes);

// Finite metric space over points 0..n-1 with an explicit distance table.
struct FiniteMetricSet {
  Eigen::MatrixXd dist;
  int size() const { return static_cast<int>(dist.rows()); }
  void validate() const;  // square, zero diagonal, symmetric within 1e-12
};

// Closed r-thickening of the subset within the finite space.
std::vector<int> thicken(const FiniteMetricSet& space, const std::vector<int>& subset,
                         double r);

struct SetLimits {
  std::vector<int> li;  // inner limit
  std::vector<int> ls;  // outer limit
};

// Inner and outer limits of a finite sequence of subsets. The last quarter
// of the sequence (at least two entries) stands in for the tail: a point is
// in li when every tail set comes within every test radius 2^-j (j = 0..40)
// of it, in ls when some tail set does. Checks that the radius schedule
// decays (or is identically zero), that li is contained in ls, and that
// thickening each set by its schedule radius leaves both limits unchanged;
// a robustness mismatch throws CertificateViolation.
SetLimits finite_limits(const FiniteMetricSet& space,
                        const std::vector<std::vector<int>>& sets,
                        const std::vector<double>& radius_schedule);

double hausdorff_distance(const FiniteMetricSet& space, const std::vector<int>& a,
                          const std::vector<int>& b);

// Classes whose fiber-minimum value is within rho of the global minimum.
// rho may be infinity (every class). Verifies against the direct
// image of the rho-argmin of the values.
std::vector<int> pushforward_argmin(const std::vector<std::pair<int, double>>& values,
                                    const std::map<int, int>& fibers, double rho);

}  // namespace minsurf
