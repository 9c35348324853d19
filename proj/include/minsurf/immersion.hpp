#pragma once

#include <memory>
#include <vector>

#include "minsurf/curves.hpp"
#include "minsurf/grassmann.hpp"
#include "minsurf/mesh.hpp"
#include "minsurf/posdef.hpp"

namespace minsurf {

// Piecewise linear map of a triangulation into R^m, given by vertex
// positions. Boundary vertices are meant to sit on an attached curve at
// their stored parameters; validate_on_curve checks that.
struct DiscreteImmersion {
  std::shared_ptr<const Triangulation> mesh;
  Eigen::MatrixXd positions;  // V x m

  int m() const { return static_cast<int>(positions.cols()); }
  void check_sizes() const;
  // Positions of one simplex as a (k+1) x m block.
  Eigen::MatrixXd simplex_positions(int s) const;
};

// Per-simplex differential of the PL map, as an m x k matrix over the
// simplex chart.
Matrix differential(const DiscreteImmersion& f, int s);

// Differential of the boundary restriction along boundary facet b
// (m x (k-1)).
Matrix boundary_differential(const DiscreteImmersion& f, int b);

// Per-simplex pullback metric D^T D of the PL map. Throws DomainError
// naming the first degenerate simplex.
struct PullbackField {
  std::vector<Matrix> gram;  // one k x k SPD matrix per simplex
};
PullbackField pullback(const DiscreteImmersion& f);

// All six parts of the immersion distance between two PL maps on the same
// mesh. For PL data every supremum is an exact maximum: the position sup
// over vertices, the metric and ray sups over simplices (boundary versions
// over boundary facets).
struct ImmersionDistance {
  double sup_pos = 0, sup_metric = 0, sup_ray = 0;
  double b_sup_pos = 0, b_sup_metric = 0, b_sup_ray = 0;
  double total() const { return sup_pos + sup_metric + sup_ray; }
  double boundary_total() const { return b_sup_pos + b_sup_metric + b_sup_ray; }
  // Distance with boundary-restriction terms, the one used for shape
  // comparisons and dedup.
  double total_cross() const { return total() + boundary_total(); }
};

ImmersionDistance dist_imm(const DiscreteImmersion& f, const DiscreteImmersion& h);

// Upper bound for the distance between unparameterized shapes: minimum of
// dist_imm(f, h o phi).total_cross over the identity and each supplied
// simplicial automorphism phi (a vertex permutation mapping simplices to
// simplices and boundary to boundary). Only an upper bound: the true
// quotient distance infimizes over the whole diffeomorphism group.
double dist_shape_upper(const DiscreteImmersion& f, const DiscreteImmersion& h,
                        const std::vector<std::vector<int>>& automorphisms);

// Is phi a simplicial automorphism of the mesh (used to validate inputs to
// dist_shape_upper)?
bool is_automorphism(const Triangulation& t, const std::vector<int>& phi);

// Membership of f in the discrete a-priori set of radius r around the
// reference metric: worst per-simplex dist_p(g_ref, pullback) <= r. A
// degenerate simplex makes worst infinite (member = false) without
// throwing.
struct AprioriResult {
  bool member = false;
  double worst = 0;
  int worst_simplex = -1;
  bool degenerate = false;
};
AprioriResult apriori_membership_discrete(const DiscreteImmersion& f,
                                          const PullbackField& g_ref, double r);

// Perturbation estimate for immersions over a reference metric field g_ref.
// With l = max_s dist_p(g_ref_s, pullback(f)_s) and the Sobolev-type norm
// |f - h|_W = sup_pos + max_s |(D_f - D_h) L_s^{-1}|_F (L_s^T L_s = g_ref_s):
// hypothesis |f - h|_W < (1/3) exp(-3 l / 2); conclusion (asserted): h is an
// immersion and dist_imm(f, h).total() <= sup_pos
//   + max_s -log(1 - exp(l_s) |pullback(h)_s - pullback(f)_s|_{g_ref_s})
//   + max_s pi sqrt(24) |(D_f - D_h) L_s^{-1}|_F / sigma_min(D_f L_s^{-1}),
// each r_s = exp(l_s) |...|_{g_ref_s} staying <= 7/9 under the hypothesis.
Certificate certify_immersion_perturbation(const DiscreteImmersion& f,
                                           const DiscreteImmersion& h,
                                           const PullbackField& g_ref);

// Reverse estimate: hypothesis dist_imm(f, h).sup_metric < 5/2; conclusion
// (asserted): |f - h|_W <= exp(l) dist_imm(f, h).total(), with ray-solver
// slack on the right.
Certificate certify_reverse_bound(const DiscreteImmersion& f, const DiscreteImmersion& h,
                                  const PullbackField& g_ref);

// Checks that boundary vertices coincide with the curve at their stored
// parameters, within tol. Throws DomainError otherwise.
void validate_on_curve(const DiscreteImmersion& f, const BoundaryCurve& curve,
                       double tol = 1e-9);

// Positions prolonged to the 4:1 refinement of the mesh (PL-exact lift, new
// vertices at edge midpoints of positions). When a curve is given, new
// boundary vertices are placed on it at their parameter midpoints instead.
DiscreteImmersion refine(const DiscreteImmersion& f, const Triangulation& fine,
                         const RefinementMap& map, const BoundaryCurve* curve = nullptr);

// Rotational automorphisms of build_disk(n_rings) / build_cylinder meshes;
// handy correspondence suppliers for dist_shape_upper.
std::vector<std::vector<int>> disk_rotations(int n_rings);
std::vector<std::vector<int>> cylinder_rotations(int n_around, int n_along);

}  // namespace minsurf
