#pragma once

#include <Eigen/Dense>

#include "minsurf/common.hpp"
#include "minsurf/posdef.hpp"

namespace minsurf {

// Injective linear maps R^k -> R^m (columns = images of the standard basis)
// and the metric on oriented rays they induce. Rays are oriented
// 1-dimensional subspaces: u and -u are different rays.

// Documented accuracy of dist_ray_sup: the returned value is a certified
// lower bound of the true supremum within this tolerance (radians). All
// downstream comparisons that place dist_ray_sup on the right-hand side of
// an inequality add this slack.
inline constexpr double kRaySolverTol = 1e-6;

// Angle in [0, pi] between the rays spanned by u and v. Throws DomainError
// on a zero vector.
double ray_angle(const Vector& u, const Vector& v);

// sigma_min(a) > 1e-12 sigma_max(a).
bool is_injective(const Matrix& a);

// Moore-Penrose pseudoinverse of an injective map: (a^T a)^{-1} a^T via
// Cholesky normal equations for k <= 4, SVD when k is larger or the normal
// equations are ill-conditioned (condition number above 1e8).
Matrix pseudoinverse(const Matrix& a);

// Operator norm of the pseudoinverse, 1 / sigma_min(a).
double pinv_norm(const Matrix& a);

// sup over unit directions u of ray_angle(a u, b u). For k = 1 this is a
// single angle; for k = 2 a 4096-point angular grid is refined by
// golden-section search to 1e-9; for k >= 3, 64 seeded restarts of projected
// gradient ascent with the same refinement. Result is a lower bound of the
// true sup, certified within kRaySolverTol via the Lipschitz bound
// 2 (|a| |a'| + |b| |b'|) on the direction-to-angle map.
double dist_ray_sup(const Matrix& a, const Matrix& b);

// Perturbation estimate, metric conclusion. All domain norms are weighted by
// g1: with u^T u = g1, |a - b|_g1 means |(a - b) u^{-1}|_F. Hypothesis:
// |a - b|_g1 < (1/3) exp(-3 l / 2) with l = dist_p(g1, a^T a). This forces
// r = exp(l) |b^T b - a^T a|_{g1} <= 7/9. Conclusion (asserted): b is
// injective and dist_p(a^T a, b^T b) <= -log(1 - r).
Certificate certify_map_perturbation_metric(const Matrix& a, const Matrix& b,
                                            const Matrix& g1);

// Perturbation estimate, ray conclusion. Hypothesis:
// |a - b|_F < (1/2) / |a^+|. Conclusion (asserted): b is injective and
// dist_ray_sup(a, b) <= pi sqrt(24) |a^+| |a - b|_F.
Certificate certify_map_perturbation_ray(const Matrix& a, const Matrix& b);

// Reverse direction: closeness of metrics and rays bounds closeness of maps.
// Hypothesis: dist_p(a^T a, b^T b) < 5/2. Conclusion (asserted), with the
// operator norm weighted by g1 on the domain (|(a - b) u^{-1}|_op, u^T u = g1):
// |a - b|_op,g1 <= exp(dist_p(g1, a^T a)) (dist_ray_sup(a, b) + dist_p(a^T a, b^T b)).
// Since dist_ray_sup is a lower bound of the true sup, the violation check
// adds exp(l) * kRaySolverTol of slack.
Certificate reverse_bound_linear(const Matrix& a, const Matrix& b, const Matrix& g1);

}  // namespace minsurf
