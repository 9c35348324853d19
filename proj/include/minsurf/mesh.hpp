#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/common.hpp"

namespace minsurf {

// Simplicial k-manifold with boundary, carrying a flat parameter-domain
// chart. Each simplex stores its own corner coordinates (corner_params):
// for meshes with a global chart these duplicate vertex_params, while for
// periodic charts (cylinder seam) the seam simplices hold unwrapped copies.
// All parameter-space geometry (edge lengths, quality, quadrature points,
// boundary distance) reads corner_params, never vertex_params.
struct Triangulation {
  int k = 2;
  Eigen::MatrixXd vertex_params;               // V x k representative coords
  Eigen::MatrixXi simplices;                   // S x (k+1) vertex ids
  std::vector<Eigen::MatrixXd> corner_params;  // S entries, (k+1) x k

  // Boundary facets, each belonging to exactly one simplex. For k = 2 these
  // are edges, oriented as induced by their simplex.
  Eigen::MatrixXi boundary_simplices;  // B x k

  std::vector<int> boundary_vertices;  // sorted
  // Per vertex: boundary component id (-1 for interior) and curve parameter
  // t in [0, 1).
  std::vector<int> bparam_component;
  std::vector<double> bparam_t;
  int num_boundary_components = 0;

  // Period of the first chart coordinate (0 = aperiodic). Seam-aware
  // distance computations reduce x differences modulo this.
  double chart_period_x = 0.0;

  int n_vertices() const { return static_cast<int>(vertex_params.rows()); }
  int n_simplices() const { return static_cast<int>(simplices.rows()); }
  int n_boundary_facets() const { return static_cast<int>(boundary_simplices.rows()); }
  bool is_boundary_vertex(int v) const { return bparam_component[v] >= 0; }

  // Checks the manifold-with-boundary invariants: every (k-1)-face is shared
  // by exactly two simplices or listed as a boundary facet of exactly one;
  // orientations are consistent; boundary data covers exactly the vertices
  // incident to boundary facets; parameters lie in [0, 1). Throws
  // DomainError with the offending element.
  void validate() const;
};

// Geometric quality of one simplex from its (k+1) x m corner positions.
// volume = sqrt(det(E^T E)) / k! for the edge matrix E; aspect and the
// general-position predicate come from the singular values of E.
struct SimplexQuality {
  double volume = 0;
  double sigma_min = 0;
  double sigma_max = 0;
  double aspect = 0;  // sigma_max / sigma_min, inf when degenerate
  bool general_position = false;  // sigma_min > 1e-10 sigma_max
};
SimplexQuality simplex_quality(const Eigen::MatrixXd& corners);

// Hexagonal disk: rings of 6 r vertices at radius r / n_rings, 6 n_rings^2
// triangles, boundary parameters equally spaced on the outer ring.
Triangulation build_disk(int n_rings);

// Cylinder [0,1) x [0,1] with x periodic: n_around columns, n_along rows of
// quads split into 2 n_around n_along triangles; two boundary loops
// (component 0 at y = 0, component 1 at y = 1), parameters t = x.
Triangulation build_cylinder(int n_around, int n_along);

// 4:1 refinement bookkeeping: new vertex i came from edge (parent_a[i],
// parent_b[i]) of the coarse mesh (equal entries for carried-over coarse
// vertices). Lets callers prolong vertex fields.
struct RefinementMap {
  std::vector<int> parent_a, parent_b;
};

// Uniform 4:1 (2^k:1) subdivision: one new vertex per edge at the parameter
// midpoint; per-simplex charts are midpoint-subdivided so children tile the
// parent exactly and halve every parameter edge length. New boundary
// vertices get the curve-parameter midpoint of their edge (wraparound
// aware), so positioning them with any attached curve puts them exactly on
// it. Child simplices of simplex s occupy rows 4s..4s+3 (2s..2s+1 for
// k = 1).
Triangulation subdivide_4to1(const Triangulation& t, RefinementMap* map = nullptr);

// Affine interpolation of per-vertex data at a barycentric point of one
// simplex. Coordinates must be nonnegative (within 1e-12) and sum to 1
// within 1e-12.
Eigen::VectorXd interpolate(const Triangulation& t, const Eigen::MatrixXd& values,
                            int simplex, const Eigen::VectorXd& barycentric);

// Parameter-domain point of a barycentric location, in the simplex chart.
Eigen::VectorXd chart_point(const Triangulation& t, int simplex,
                            const Eigen::VectorXd& barycentric);

// Midpoint of two curve parameters in [0, 1), following the short way
// around (handles the wrap at 1).
double param_midpoint(double t0, double t1);

}  // namespace minsurf
