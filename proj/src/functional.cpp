#include "minsurf/functional.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace minsurf {

Eigen::VectorXd FlatDisk::value(int, const Eigen::VectorXd& x) const {
  return Eigen::Vector3d(s_ * x[0], s_ * x[1], 0.0);
}

Eigen::MatrixXd FlatDisk::jacobian(int, const Eigen::VectorXd&) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 2);
  j(0, 0) = s_;
  j(1, 1) = s_;
  return j;
}

Eigen::VectorXd Catenoid::value(int, const Eigen::VectorXd& x) const {
  double th = 2.0 * M_PI * x[0];
  double z = a_ * (2.0 * x[1] - 1.0);
  double c = std::cosh(z);
  return Eigen::Vector3d(c * std::cos(th), c * std::sin(th), z);
}

Eigen::MatrixXd Catenoid::jacobian(int, const Eigen::VectorXd& x) const {
  double th = 2.0 * M_PI * x[0];
  double z = a_ * (2.0 * x[1] - 1.0);
  double c = std::cosh(z), s = std::sinh(z);
  Eigen::MatrixXd j(3, 2);
  j.col(0) << -2.0 * M_PI * c * std::sin(th), 2.0 * M_PI * c * std::cos(th), 0.0;
  j.col(1) << 2.0 * a_ * s * std::cos(th), 2.0 * a_ * s * std::sin(th), 2.0 * a_;
  return j;
}

Eigen::VectorXd GraphSurface::value(int, const Eigen::VectorXd& x) const {
  return Eigen::Vector3d(x[0], x[1], g_(x[0], x[1]));
}

Eigen::MatrixXd GraphSurface::jacobian(int, const Eigen::VectorXd& x) const {
  Eigen::Vector2d g = grad_(x[0], x[1]);
  Eigen::MatrixXd j(3, 2);
  j.col(0) << 1, 0, g[0];
  j.col(1) << 0, 1, g[1];
  return j;
}

PLMap::PLMap(DiscreteImmersion f) : f_(std::move(f)) { f_.check_sizes(); }

Eigen::VectorXd PLMap::barycentric(int simplex, const Eigen::VectorXd& x) const {
  const Triangulation& t = *f_.mesh;
  if (simplex < 0 || simplex >= t.n_simplices())
    throw DomainError("PLMap: simplex out of range");
  const int k = t.k;
  Matrix p(k, k);
  for (int i = 0; i < k; ++i)
    p.col(i) = (t.corner_params[simplex].row(i + 1) - t.corner_params[simplex].row(0))
                   .transpose();
  Eigen::VectorXd rel = x - t.corner_params[simplex].row(0).transpose();
  Eigen::VectorXd sub = p.partialPivLu().solve(rel);
  Eigen::VectorXd bary(k + 1);
  bary[0] = 1.0 - sub.sum();
  bary.tail(k) = sub;
  return bary;
}

Eigen::VectorXd PLMap::value(int simplex, const Eigen::VectorXd& x) const {
  Eigen::VectorXd bary = barycentric(simplex, x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f_.positions.cols());
  for (int i = 0; i <= f_.mesh->k; ++i)
    out += bary[i] * f_.positions.row(f_.mesh->simplices(simplex, i)).transpose();
  return out;
}

Eigen::MatrixXd PLMap::jacobian(int simplex, const Eigen::VectorXd&) const {
  return differential(f_, simplex);
}

QuadratureRule quadrature_rule(int k, int degree) {
  QuadratureRule r;
  if (k == 2) {
    if (degree <= 1) {
      r.nodes.resize(1, 3);
      r.nodes << 1.0 / 3, 1.0 / 3, 1.0 / 3;
      r.weights = Eigen::VectorXd::Constant(1, 1.0);
    } else if (degree == 2) {
      r.nodes.resize(3, 3);
      r.nodes << 2.0 / 3, 1.0 / 6, 1.0 / 6,
                 1.0 / 6, 2.0 / 3, 1.0 / 6,
                 1.0 / 6, 1.0 / 6, 2.0 / 3;
      r.weights = Eigen::VectorXd::Constant(3, 1.0 / 3);
    } else if (degree <= 4) {
      const double a1 = 0.445948490915965, w1 = 0.223381589678011;
      const double a2 = 0.091576213509771, w2 = 0.109951743655322;
      r.nodes.resize(6, 3);
      r.nodes << 1 - 2 * a1, a1, a1,
                 a1, 1 - 2 * a1, a1,
                 a1, a1, 1 - 2 * a1,
                 1 - 2 * a2, a2, a2,
                 a2, 1 - 2 * a2, a2,
                 a2, a2, 1 - 2 * a2;
      r.weights.resize(6);
      r.weights << w1, w1, w1, w2, w2, w2;
    } else {
      throw DomainError("quadrature_rule: triangle degrees 1, 2, 4 are available");
    }
    return r;
  }
  if (k == 1) {
    if (degree <= 1) {
      r.nodes.resize(1, 2);
      r.nodes << 0.5, 0.5;
      r.weights = Eigen::VectorXd::Constant(1, 1.0);
    } else if (degree <= 3) {
      double c = 0.5 / std::sqrt(3.0);
      r.nodes.resize(2, 2);
      r.nodes << 0.5 + c, 0.5 - c, 0.5 - c, 0.5 + c;
      r.weights = Eigen::VectorXd::Constant(2, 0.5);
    } else if (degree <= 5) {
      double c = 0.5 * std::sqrt(3.0 / 5.0);
      r.nodes.resize(3, 2);
      r.nodes << 0.5 + c, 0.5 - c, 0.5, 0.5, 0.5 - c, 0.5 + c;
      r.weights.resize(3);
      r.weights << 5.0 / 18, 8.0 / 18, 5.0 / 18;
    } else {
      throw DomainError("quadrature_rule: segment degrees up to 5 are available");
    }
    return r;
  }
  throw DomainError("quadrature_rule: only k = 1, 2 are supported");
}

double discrete_volume(const DiscreteImmersion& f) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  Eigen::MatrixXd corners(t.k + 1, f.m());
  double total = 0;
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int i = 0; i <= t.k; ++i) corners.row(i) = f.positions.row(t.simplices(s, i));
    total += simplex_quality(corners).volume;
  }
  return total;
}

Eigen::MatrixXd discrete_volume_gradient(const DiscreteImmersion& f) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  const int k = t.k, m = f.m();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(t.n_vertices(), m);
  double fact = 1;
  for (int i = 2; i <= k; ++i) fact *= i;
  Eigen::MatrixXd corners(k + 1, m);
  Matrix e(m, k), g(k, k), ginv(k, k), dv(m, k);
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int i = 0; i <= k; ++i) corners.row(i) = f.positions.row(t.simplices(s, i));
    for (int i = 0; i < k; ++i)
      e.col(i) = (corners.row(i + 1) - corners.row(0)).transpose();
    g.noalias() = e.transpose() * e;
    double det = g.determinant();
    if (!(det > 0) || !simplex_quality(corners).general_position) {
      std::ostringstream os;
      os << "discrete_volume_gradient: simplex " << s << " is degenerate";
      throw DomainError(os.str());
    }
    double vol = std::sqrt(det) / fact;
    if (k == 2) {
      ginv(0, 0) = g(1, 1) / det;
      ginv(1, 1) = g(0, 0) / det;
      ginv(0, 1) = -g(0, 1) / det;
      ginv(1, 0) = -g(1, 0) / det;
    } else if (k == 1) {
      ginv(0, 0) = 1.0 / g(0, 0);
    } else {
      ginv = g.inverse();
    }
    dv.noalias() = e.lazyProduct(ginv);  // m x k, column j = d vol / d p_{j+1}, up to vol
    for (int i = 0; i < k; ++i)
      grad.row(t.simplices(s, i + 1)) += vol * dv.col(i).transpose();
    grad.row(t.simplices(s, 0)) -= vol * dv.rowwise().sum().transpose();
  }
  for (int v : t.boundary_vertices) grad.row(v).setZero();
  return grad;
}

double smooth_volume(const SampledImmersion& f) {
  if (!f.mesh || !f.map) throw DomainError("smooth_volume: missing mesh or map");
  const Triangulation& t = *f.mesh;
  QuadratureRule rule = quadrature_rule(t.k, f.quad_degree);
  double fact = 1;
  for (int i = 2; i <= t.k; ++i) fact *= i;
  double total = 0;
  for (int s = 0; s < t.n_simplices(); ++s) {
    double chart_vol = simplex_quality(t.corner_params[s]).volume;
    double acc = 0;
    for (int q = 0; q < rule.nodes.rows(); ++q) {
      Eigen::VectorXd x =
          t.corner_params[s].transpose() * rule.nodes.row(q).transpose();
      Eigen::MatrixXd j = f.map->jacobian(s, x);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
      const auto& sv = svd.singularValues();
      if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff())) {
        std::ostringstream os;
        os << "smooth_volume: jacobian not injective at a quadrature node of simplex "
           << s;
        throw DomainError(os.str());
      }
      acc += rule.weights[q] * sv.prod();
    }
    total += chart_vol * acc;
  }
  return total;
}

Certificate certify_volume_modulus(const DiscreteImmersion& f, const DiscreteImmersion& h) {
  double t = dist_imm(f, h).total();
  double base = discrete_volume(f);
  double sk = std::sqrt(static_cast<double>(f.mesh->k));
  Certificate cert;
  cert.applicable = true;
  cert.actual = std::abs(discrete_volume(h) - base);
  cert.bound = base * std::exp(sk * t) * sk * t;
  double ts = t + kRaySolverTol;
  double slack_bound = base * std::exp(sk * ts) * sk * ts;
  if (violates(cert.actual, slack_bound)) {
    std::ostringstream os;
    os << "certify_volume_modulus: |F(h) - F(f)| = " << cert.actual
       << " exceeds F(f) exp(sqrt(k) t) sqrt(k) t = " << cert.bound
       << " (t = " << t << ")";
    throw CertificateViolation(os.str());
  }
  return cert;
}

}  // namespace minsurf
