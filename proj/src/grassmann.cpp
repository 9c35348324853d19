#include "minsurf/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace minsurf {

double ray_angle(const Vector& u, const Vector& v) {
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0)
    throw DomainError("ray_angle: zero vector spans no ray");
  // Chord forms stay accurate at both ends of [0, pi], where the acos of a
  // clamped cosine loses half the significant digits.
  double chord = (u / nu - v / nv).norm();
  if (chord <= 1.0) return 2.0 * std::asin(0.5 * chord);
  double anti = (u / nu + v / nv).norm();
  return M_PI - 2.0 * std::asin(0.5 * anti);
}

static void check_map(const Matrix& a, const char* name) {
  if (a.rows() < a.cols() || a.cols() < 1)
    throw DomainError(std::string(name) + ": expected an m x k map with m >= k >= 1");
}

static double sigma_min(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().minCoeff();
}

bool is_injective(const Matrix& a) {
  check_map(a, "is_injective");
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  return s.minCoeff() > 1e-12 * s.maxCoeff();
}

Matrix pseudoinverse(const Matrix& a) {
  check_map(a, "pseudoinverse");
  const int k = static_cast<int>(a.cols());
  if (k <= 4) {
    Matrix g = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    // cond(a)^2 = cond(a^T a); stay with the normal equations while the map
    // conditioning is under 1e8.
    if (lo > 0 && hi / lo < 1e16) {
      Eigen::LLT<Matrix> llt(g);
      if (llt.info() == Eigen::Success) return llt.solve(a.transpose());
    }
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s.minCoeff() > 1e-12 * s.maxCoeff()))
    throw DomainError("pseudoinverse: map is not injective");
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

double pinv_norm(const Matrix& a) {
  double s = sigma_min(a);
  if (s <= 0) throw DomainError("pinv_norm: map is not injective");
  return 1.0 / s;
}

namespace {

double direction_angle(const Matrix& a, const Matrix& b, const Vector& u) {
  return ray_angle(a * u, b * u);
}

// Golden-section minimization of a scalar function on [lo, hi], to interval
// width 1e-9; returns the midpoint of the final bracket.
template <class F>
double golden_argmin(const F& f, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-9) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

// Projected gradient ascent on the unit sphere for k >= 3. Returns the best
// angle found from the given start.
double ascend(const Matrix& a, const Matrix& b, Vector u) {
  u.normalize();
  double f = direction_angle(a, b, u);
  double step = 0.5;
  for (int it = 0; it < 400 && step > 1e-12; ++it) {
    Vector p = a * u, q = b * u;
    double np = p.norm(), nq = q.norm();
    if (np == 0 || nq == 0) break;
    p /= np; q /= nq;
    double c = p.dot(q);
    double s2 = 1.0 - c * c;
    if (s2 < 1e-18) {
      if (c < 0) break;  // at angle pi, the global max; nothing to improve
      // Angle 0 is a minimum with singular gradient; nudge off it.
      Vector g = a.transpose() * q / np + b.transpose() * p / nq;
      g -= g.dot(u) * u;
      if (g.norm() < 1e-14) break;
      u = (u + 1e-3 * g.normalized()).normalized();
      f = direction_angle(a, b, u);
      continue;
    }
    // grad of arccos(<p(u), q(u)>) on the sphere: -grad(c)/sqrt(1-c^2)
    Vector g = -(a.transpose() * (q - c * p) / np + b.transpose() * (p - c * q) / nq) /
               std::sqrt(s2);
    g -= g.dot(u) * u;    // tangent projection
    double gn = g.norm();
    if (gn < 1e-12) break;
    bool improved = false;
    while (step > 1e-12) {
      Vector v = (u + step * g / gn).normalized();
      double fv = direction_angle(a, b, v);
      if (fv > f + 1e-15) {
        u = v; f = fv;
        step *= 1.7;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return f;
}

}  // namespace

double dist_ray_sup(const Matrix& a, const Matrix& b) {
  check_map(a, "dist_ray_sup (a)");
  check_map(b, "dist_ray_sup (b)");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("dist_ray_sup: dimension mismatch");
  const int k = static_cast<int>(a.cols());
  if (!is_injective(a) || !is_injective(b))
    throw DomainError("dist_ray_sup: maps must be injective");

  if (k == 1) return ray_angle(a.col(0), b.col(0));

  if (k == 2) {
    // The angle is pi-periodic in theta, so [0, pi) covers all rays up to
    // simultaneous sign flip, which leaves the angle unchanged. With
    // u = (cos t, sin t), the three quadratic forms <au, bu>, |au|^2, |bu|^2
    // are linear in (cos 2t, sin 2t), so the scan works on those
    // coefficients; maximizing the angle means minimizing
    // q = A |A| / (B C), a monotone image of cos(angle). Its derivative is
    // a trigonometric polynomial with at most eight roots per period, so at
    // most four basins exist; every detected basin is polished and the
    // winner is re-evaluated through the exact chord form.
    Matrix gab = a.transpose() * b, gaa = a.transpose() * a, gbb = b.transpose() * b;
    auto coeffs = [](const Matrix& g) {
      return Eigen::Vector3d(0.5 * (g(0, 0) + g(1, 1)), 0.5 * (g(0, 0) - g(1, 1)),
                             0.5 * (g(0, 1) + g(1, 0)));
    };
    Eigen::Vector3d ca = coeffs(gab), cb = coeffs(gaa), cc = coeffs(gbb);
    auto qval = [&](double c2, double s2) {
      double A = ca[0] + ca[1] * c2 + ca[2] * s2;
      double B = cb[0] + cb[1] * c2 + cb[2] * s2;
      double C = cc[0] + cc[1] * c2 + cc[2] * s2;
      return A * std::abs(A) / (B * C);
    };
    auto qat = [&](double t) { return qval(std::cos(2 * t), std::sin(2 * t)); };
    constexpr int n = 512;
    const double h = M_PI / n;
    double qv[n];
    {
      const double rc = std::cos(2 * h), rs = std::sin(2 * h);
      double c2 = 1.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        qv[i] = qval(c2, s2);
        double nc = c2 * rc - s2 * rs;
        s2 = c2 * rs + s2 * rc;
        c2 = nc;
      }
    }
    int gmin = 0;
    std::vector<int> basins;
    for (int i = 0; i < n; ++i) {
      if (qv[i] < qv[gmin]) gmin = i;
      if (qv[i] < qv[(i + n - 1) % n] && qv[i] <= qv[(i + 1) % n]) basins.push_back(i);
    }
    // Rounding noise on a flat stretch can fake extra dips; keep the deepest.
    if (basins.size() > 8) {
      std::partial_sort(basins.begin(), basins.begin() + 8, basins.end(),
                        [&](int i, int j) { return qv[i] < qv[j]; });
      basins.resize(8);
    }
    if (std::find(basins.begin(), basins.end(), gmin) == basins.end())
      basins.push_back(gmin);
    double best = 0;
    for (int i : basins) {
      double t = golden_argmin(qat, h * (i - 1), h * (i + 1));
      Vector u(2);
      u << std::cos(t), std::sin(t);
      best = std::max(best, direction_angle(a, b, u));
    }
    return best;
  }

  // k >= 3: seeded multistart ascent. Deterministic across calls.
  std::mt19937_64 rng(0x5D1F00D5u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0;
  for (int i = 0; i < k; ++i)  // coordinate starts
    best = std::max(best, ascend(a, b, Vector::Unit(k, i)));
  for (int r = 0; r < 64; ++r) {
    Vector u(k);
    for (int i = 0; i < k; ++i) u[i] = gauss(rng);
    if (u.norm() < 1e-12) u = Vector::Unit(k, 0);
    best = std::max(best, ascend(a, b, u));
  }
  return best;
}

Certificate certify_map_perturbation_metric(const Matrix& a, const Matrix& b,
                                            const Matrix& g1) {
  check_map(a, "certify_map_perturbation_metric (a)");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("certify_map_perturbation_metric: dimension mismatch");
  if (!is_injective(a))
    throw DomainError("certify_map_perturbation_metric: a must be injective");
  Matrix ga = a.transpose() * a;
  double l = dist_p(g1, ga);
  Matrix u = chol_upper(g1, "certify_map_perturbation_metric (g1)");
  // Frobenius norm of (a - b) measured against g1 on the domain.
  Matrix w = u.transpose()
                 .triangularView<Eigen::Lower>()
                 .solve((a - b).transpose())
                 .transpose();
  double diff = w.norm();
  Certificate cert;
  cert.applicable = diff < std::exp(-1.5 * l) / 3.0;
  if (!cert.applicable) return cert;
  if (!is_injective(b))
    throw CertificateViolation(
        "certify_map_perturbation_metric: hypothesis holds but b is not injective");
  cert.actual = dist_p(ga, b.transpose() * b);
  // The pullback moves by x = b^T b - a^T a, and |x|_{g1} <= 2 exp(l/2) diff
  // + diff^2, so r stays below 7/9 whenever the hypothesis holds.
  double r = std::exp(l) * norm_at(g1, b.transpose() * b - ga);
  if (!(r < 1.0)) {
    std::ostringstream os;
    os << "certify_map_perturbation_metric: hypothesis holds but the pullback "
          "perturbation has exp(l) |x|_g1 = "
       << r;
    throw CertificateViolation(os.str());
  }
  cert.bound = -std::log1p(-r);
  if (violates(cert.actual, cert.bound)) {
    std::ostringstream os;
    os << "certify_map_perturbation_metric: dist_p of pullbacks " << cert.actual
       << " exceeds -log(1 - exp(l) |b^T b - a^T a|_g1) = " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

Certificate certify_map_perturbation_ray(const Matrix& a, const Matrix& b) {
  check_map(a, "certify_map_perturbation_ray (a)");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("certify_map_perturbation_ray: dimension mismatch");
  if (!is_injective(a))
    throw DomainError("certify_map_perturbation_ray: a must be injective");
  double pn = pinv_norm(a);
  double diff = (a - b).norm();
  Certificate cert;
  cert.applicable = diff < 0.5 / pn;
  if (!cert.applicable) return cert;
  if (!is_injective(b))
    throw CertificateViolation(
        "certify_map_perturbation_ray: hypothesis holds but b is not injective");
  cert.actual = dist_ray_sup(a, b);
  cert.bound = M_PI * std::sqrt(24.0) * pn * diff;
  if (violates(cert.actual, cert.bound)) {
    std::ostringstream os;
    os << "certify_map_perturbation_ray: ray sup " << cert.actual
       << " exceeds pi sqrt(24) |a^+| |a-b| = " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

Certificate reverse_bound_linear(const Matrix& a, const Matrix& b, const Matrix& g1) {
  check_map(a, "reverse_bound_linear (a)");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("reverse_bound_linear: dimension mismatch");
  if (!is_injective(a) || !is_injective(b))
    throw DomainError("reverse_bound_linear: maps must be injective");
  Matrix ga = a.transpose() * a, gb = b.transpose() * b;
  double dp = dist_p(ga, gb);
  Certificate cert;
  cert.applicable = dp < 2.5;
  if (!cert.applicable) return cert;
  double l = dist_p(g1, ga);
  // Operator norm of (a - b) with the domain measured in g1.
  Matrix u = chol_upper(g1, "reverse_bound_linear (g1)");
  Matrix w = u.transpose()
                 .triangularView<Eigen::Lower>()
                 .solve((a - b).transpose())
                 .transpose();
  Eigen::JacobiSVD<Matrix> svd(w);
  cert.actual = svd.singularValues().maxCoeff();
  cert.bound = std::exp(l) * (dist_ray_sup(a, b) + dp);
  // dist_ray_sup under-estimates the true sup; give it its documented slack
  // before declaring a violation.
  if (violates(cert.actual, cert.bound + std::exp(l) * kRaySolverTol)) {
    std::ostringstream os;
    os << "reverse_bound_linear: |a-b|_op = " << cert.actual
       << " exceeds exp(l) (ray sup + dist_p) = " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

}  // namespace minsurf
