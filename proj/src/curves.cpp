#include "minsurf/curves.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace minsurf {

namespace {

constexpr double kTau = 2.0 * M_PI;

double wrap01(double t) {
  t -= std::floor(t);
  return t;
}

class Circle3 : public CurveComponent {
public:
  Circle3(double radius, double z) : r_(radius), z_(z) {
    if (!(radius > 0)) throw DomainError("circle: radius must be positive");
  }
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(double t) const override {
    Eigen::Vector3d p(r_ * std::cos(kTau * t), r_ * std::sin(kTau * t), z_);
    return p;
  }
  Eigen::VectorXd d1(double t) const override {
    Eigen::Vector3d p(-r_ * kTau * std::sin(kTau * t), r_ * kTau * std::cos(kTau * t), 0);
    return p;
  }
  Eigen::VectorXd d2(double t) const override {
    Eigen::Vector3d p(-r_ * kTau * kTau * std::cos(kTau * t),
                      -r_ * kTau * kTau * std::sin(kTau * t), 0);
    return p;
  }

private:
  double r_, z_;
};

class TorusKnot : public CurveComponent {
public:
  TorusKnot(int p, int q, double R, double r) : p_(p), q_(q), R_(R), r_(r) {
    if (p < 1 || q < 1) throw DomainError("torus_knot: p, q must be >= 1");
    if (!(R > r && r > 0)) throw DomainError("torus_knot: need R > r > 0");
  }
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(double t) const override {
    double u = kTau * p_ * t, v = kTau * q_ * t;
    double w = R_ + r_ * std::cos(v);
    return Eigen::Vector3d(w * std::cos(u), w * std::sin(u), r_ * std::sin(v));
  }
  Eigen::VectorXd d1(double t) const override {
    double u = kTau * p_ * t, v = kTau * q_ * t;
    double du = kTau * p_, dv = kTau * q_;
    double w = R_ + r_ * std::cos(v), dw = -r_ * std::sin(v) * dv;
    return Eigen::Vector3d(dw * std::cos(u) - w * std::sin(u) * du,
                           dw * std::sin(u) + w * std::cos(u) * du,
                           r_ * std::cos(v) * dv);
  }
  Eigen::VectorXd d2(double t) const override {
    double u = kTau * p_ * t, v = kTau * q_ * t;
    double du = kTau * p_, dv = kTau * q_;
    double w = R_ + r_ * std::cos(v);
    double dw = -r_ * std::sin(v) * dv;
    double ddw = -r_ * std::cos(v) * dv * dv;
    return Eigen::Vector3d(
        ddw * std::cos(u) - 2 * dw * std::sin(u) * du - w * std::cos(u) * du * du,
        ddw * std::sin(u) + 2 * dw * std::cos(u) * du - w * std::sin(u) * du * du,
        -r_ * std::sin(v) * dv * dv);
  }

private:
  int p_, q_;
  double R_, r_;
};

// Axis-aligned ellipse in one of the three coordinate planes.
class PlanarEllipse : public CurveComponent {
public:
  PlanarEllipse(double a, double b, int plane) : a_(a), b_(b), plane_(plane) {
    if (!(a > 0) || !(b > 0)) throw DomainError("ellipse: half-axes must be positive");
  }
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(double t) const override {
    return embed(a_ * std::cos(kTau * t), b_ * std::sin(kTau * t));
  }
  Eigen::VectorXd d1(double t) const override {
    return embed(-a_ * kTau * std::sin(kTau * t), b_ * kTau * std::cos(kTau * t));
  }
  Eigen::VectorXd d2(double t) const override {
    return embed(-a_ * kTau * kTau * std::cos(kTau * t),
                 -b_ * kTau * kTau * std::sin(kTau * t));
  }

private:
  Eigen::VectorXd embed(double x, double y) const {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    switch (plane_) {
      case 0: p << x, y, 0; break;
      case 1: p << 0, x, y; break;
      default: p << y, 0, x; break;
    }
    return p;
  }
  double a_, b_;
  int plane_;
};

// Closed uniform cubic spline through given points: C^2, evaluated from the
// solved second-derivative table (cyclic tridiagonal system).
class PeriodicSpline : public CurveComponent {
public:
  explicit PeriodicSpline(const Eigen::MatrixXd& pts) : p_(pts) {
    const int n = static_cast<int>(pts.rows());
    if (n < 3) throw DomainError("spline_loop: need at least 3 points");
    // Natural periodic cubic spline with unit knot spacing: solve
    // m_{i-1} + 4 m_i + m_{i+1} = 6 (p_{i-1} - 2 p_i + p_{i+1}) cyclically.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      a(i, (i + n - 1) % n) += 1;
      a(i, i) += 4;
      a(i, (i + 1) % n) += 1;
    }
    Eigen::MatrixXd rhs(n, pts.cols());
    for (int i = 0; i < n; ++i)
      rhs.row(i) =
          6.0 * (pts.row((i + n - 1) % n) - 2.0 * pts.row(i) + pts.row((i + 1) % n));
    m_ = a.ldlt().solve(rhs);
  }
  int ambient_dim() const override { return static_cast<int>(p_.cols()); }
  Eigen::VectorXd value(double t) const override {
    auto [i, u] = locate(t);
    int j = (i + 1) % p_.rows();
    return (p_.row(i) * (1 - u) + p_.row(j) * u +
            (cube(1 - u) - (1 - u)) / 6.0 * m_.row(i) + (cube(u) - u) / 6.0 * m_.row(j))
        .transpose();
  }
  Eigen::VectorXd d1(double t) const override {
    auto [i, u] = locate(t);
    int j = (i + 1) % p_.rows();
    double n = static_cast<double>(p_.rows());
    return n * (p_.row(j) - p_.row(i) + (1 - 3 * sq(1 - u)) / 6.0 * m_.row(i) +
                (3 * sq(u) - 1) / 6.0 * m_.row(j))
                   .transpose();
  }
  Eigen::VectorXd d2(double t) const override {
    auto [i, u] = locate(t);
    int j = (i + 1) % p_.rows();
    double n = static_cast<double>(p_.rows());
    return n * n * ((1 - u) * m_.row(i) + u * m_.row(j)).transpose();
  }

private:
  static double sq(double x) { return x * x; }
  static double cube(double x) { return x * x * x; }
  std::pair<int, double> locate(double t) const {
    double s = wrap01(t) * p_.rows();
    int i = std::min(static_cast<int>(std::floor(s)), static_cast<int>(p_.rows()) - 1);
    return {i, s - i};
  }
  Eigen::MatrixXd p_, m_;
};

void validate_component(const CurveComponent& c, int idx) {
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / n;
    if (!(c.d1(t).norm() > 1e-9)) {
      std::ostringstream os;
      os << "BoundaryCurve: component " << idx << " has |gamma'| <= 1e-9 at t = " << t;
      throw DomainError(os.str());
    }
  }
  // Coarse injectivity check: chord distances between grid samples must not
  // vanish away from the diagonal (arclength exclusion window of 2 samples).
  const int g = 512;
  Eigen::MatrixXd samples(g, c.ambient_dim());
  for (int i = 0; i < g; ++i) samples.row(i) = c.value(static_cast<double>(i) / g).transpose();
  for (int i = 0; i < g; ++i)
    for (int j = i + 3; j < g; ++j) {
      if (i == 0 && j >= g - 3) continue;  // wrap-adjacent
      if ((samples.row(i) - samples.row(j)).norm() < 1e-12) {
        std::ostringstream os;
        os << "BoundaryCurve: component " << idx << " self-intersects near t = "
           << static_cast<double>(i) / g;
        throw DomainError(os.str());
      }
    }
}

}  // namespace

Eigen::VectorXd BoundaryCurve::value(int component, double t) const {
  if (component < 0 || component >= n_components())
    throw DomainError("BoundaryCurve: component out of range");
  return components[component]->value(wrap01(t));
}

Eigen::VectorXd BoundaryCurve::d1(int component, double t) const {
  if (component < 0 || component >= n_components())
    throw DomainError("BoundaryCurve: component out of range");
  return components[component]->d1(wrap01(t));
}

Eigen::VectorXd BoundaryCurve::d2(int component, double t) const {
  if (component < 0 || component >= n_components())
    throw DomainError("BoundaryCurve: component out of range");
  return components[component]->d2(wrap01(t));
}

BoundaryCurve make_curve(std::vector<std::shared_ptr<const CurveComponent>> components) {
  if (components.empty()) throw DomainError("BoundaryCurve: no components");
  BoundaryCurve c;
  c.ambient_dim = components[0]->ambient_dim();
  for (size_t i = 0; i < components.size(); ++i) {
    if (components[i]->ambient_dim() != c.ambient_dim)
      throw DomainError("BoundaryCurve: components live in different ambient dimensions");
    validate_component(*components[i], static_cast<int>(i));
  }
  c.components = std::move(components);
  return c;
}

BoundaryCurve circle(double radius) {
  return make_curve({std::make_shared<Circle3>(radius, 0.0)});
}

BoundaryCurve coaxial_circles(double radius, double half_height) {
  return make_curve({std::make_shared<Circle3>(radius, -half_height),
                     std::make_shared<Circle3>(radius, half_height)});
}

BoundaryCurve torus_knot(int p, int q, double R, double r) {
  return make_curve({std::make_shared<TorusKnot>(p, q, R, r)});
}

BoundaryCurve borromean(double a, double b) {
  return make_curve({std::make_shared<PlanarEllipse>(a, b, 0),
                     std::make_shared<PlanarEllipse>(a, b, 1),
                     std::make_shared<PlanarEllipse>(a, b, 2)});
}

BoundaryCurve spline_loop(const Eigen::MatrixXd& points) {
  return make_curve({std::make_shared<PeriodicSpline>(points)});
}

BoundaryCurve curve_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("curve_from_file: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw DomainError("curve_from_file: need at least 3 points");
  Eigen::MatrixXd pts(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw DomainError("curve_from_file: inconsistent point dimensions");
    for (size_t j = 0; j < rows[i].size(); ++j) pts(i, j) = rows[i][j];
  }
  return spline_loop(pts);
}

BoundaryCurve parse_curve_spec(const std::string& spec) {
  std::istringstream ss(spec);
  std::string kind;
  ss >> kind;
  std::map<std::string, double> kv;
  std::string tok, file_path;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) {
      file_path = tok;
      continue;
    }
    kv[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
  }
  auto get = [&](const std::string& key, double dflt) {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
  };
  if (kind == "circle") return circle(get("r", 1.0));
  if (kind == "coaxial-circles")
    return coaxial_circles(get("r", std::cosh(0.5)), get("h", 0.5));
  if (kind == "torus-knot")
    return torus_knot(static_cast<int>(get("p", 2)), static_cast<int>(get("q", 3)),
                      get("R", 2.0), get("r", 0.5));
  if (kind == "borromean") return borromean(get("a", 1.0), get("b", 0.5));
  if (kind == "file") {
    if (file_path.empty()) throw DomainError("parse_curve_spec: file needs a path");
    return curve_from_file(file_path);
  }
  throw DomainError("parse_curve_spec: unknown curve kind '" + kind + "'");
}

}  // namespace minsurf
