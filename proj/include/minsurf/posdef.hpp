#pragma once

#include <Eigen/Dense>

#include "minsurf/common.hpp"

namespace minsurf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric positive definite forms on R^k, stored as their Gram matrix in
// the standard basis. All metric computations below work in the affine
// invariant geometry: distances are invariant under congruence b -> A^T b A
// for invertible A.

// Throws DomainError unless m is symmetric (relative asymmetry <= 1e-12) and
// positive definite (smallest eigenvalue > 1e-14 times the largest). An
// eigenvalue magnitude below 1e-300 is reported as a hard error rather than
// silently floored.
void check_spd(const Matrix& m, const char* name);

void check_symmetric(const Matrix& m, const char* name);

// Eigendecomposition helpers for symmetric input.
Matrix matrix_exp_sym(const Matrix& x);
Matrix matrix_log_spd(const Matrix& b);

// Upper triangular u with u^T u = b. The name tags the DomainError raised
// when b is not SPD.
Matrix chol_upper(const Matrix& b, const char* name);

// Geodesic distance between SPD forms: whiten c by the Cholesky factor of b
// (L^T L = b), take symmetric eigenvalues lam_i of the whitened matrix, and
// return sqrt(sum log(lam_i)^2). The lam_i are the generalized eigenvalues
// of (c, b).
double dist_p(const Matrix& b, const Matrix& c);

// Riemannian inner product of symmetric tangents x, y at base point b:
// tr(b^{-1} x^T b^{-1} y).
double inner_product_at(const Matrix& b, const Matrix& x, const Matrix& y);

inline double norm_at(const Matrix& b, const Matrix& x) {
  return std::sqrt(inner_product_at(b, x, x));
}

// Geodesic through b with initial velocity x (symmetric), evaluated at time
// t: L^T exp(t L^{-T} x L^{-1}) L with L^T L = b. geodesic(b, x, 0) = b and
// the curve stays SPD for all t.
Matrix geodesic(const Matrix& b, const Matrix& x, double t);

// Ratio of the volume densities of b and g: sqrt(det b / det g).
double vol_ratio(const Matrix& b, const Matrix& g);

// Distance between volume densities: |log vol_ratio(b, g)|. Satisfies
// dist_vol <= (sqrt(k)/2) dist_p.
double dist_vol(const Matrix& b, const Matrix& g);

// Perturbation estimate for SPD forms. Hypothesis: |x|_g < exp(-dist_p(b,g))
// with x symmetric, measured in the metric at g, which makes
// r = exp(dist_p(g,b)) |x|_g < 1. Conclusion (asserted): b + x is SPD and
// dist_p(b, b + x) <= -log(1 - r). The bound is tight when x is a negative
// multiple of b and behaves like r as r -> 0.
// Throws CertificateViolation if the hypothesis holds but the conclusion
// fails (including b + x failing to be SPD).
Certificate certify_spd_perturbation(const Matrix& b, const Matrix& g, const Matrix& x);

}  // namespace minsurf
