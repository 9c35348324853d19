#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/common.hpp"

namespace minsurf {

// One closed boundary loop, parameterized over t in [0, 1) with exact first
// and second derivatives.
class CurveComponent {
public:
  virtual ~CurveComponent() = default;
  virtual int ambient_dim() const = 0;
  virtual Eigen::VectorXd value(double t) const = 0;
  virtual Eigen::VectorXd d1(double t) const = 0;
  virtual Eigen::VectorXd d2(double t) const = 0;
};

// Pinned boundary data: one component per boundary loop of the domain.
// Construction validates |gamma'| > 1e-9 on a 1e4-point grid per component
// and runs a coarse self-intersection (injectivity) check.
struct BoundaryCurve {
  std::vector<std::shared_ptr<const CurveComponent>> components;
  int ambient_dim = 0;

  int n_components() const { return static_cast<int>(components.size()); }
  Eigen::VectorXd value(int component, double t) const;
  Eigen::VectorXd d1(int component, double t) const;
  Eigen::VectorXd d2(int component, double t) const;
};

BoundaryCurve make_curve(std::vector<std::shared_ptr<const CurveComponent>> components);

// Planar circle of the given radius in the z = 0 plane of R^3,
// gamma(t) = r (cos 2 pi t, sin 2 pi t, 0).
BoundaryCurve circle(double radius);

// Two circles of the given radius at z = -half_height (component 0) and
// z = +half_height (component 1).
BoundaryCurve coaxial_circles(double radius, double half_height);

// (p, q) torus knot on the torus with radii (R, r), one component.
BoundaryCurve torus_knot(int p, int q, double R, double r);

// Three mutually encircling ellipses with half-axes (a, b), lying in the
// three coordinate planes. Three components.
BoundaryCurve borromean(double a, double b);

// Closed C^2 periodic cubic spline through the rows of `points`
// (n x m, n >= 3), parameterized uniformly over [0, 1).
BoundaryCurve spline_loop(const Eigen::MatrixXd& points);

// Text file loader for spline_loop: one point per line, whitespace
// separated coordinates, '#' comments allowed.
BoundaryCurve curve_from_file(const std::string& path);

// Parse a curve spec string: "circle r=1", "coaxial-circles r=1.13 h=0.5",
// "torus-knot p=2 q=3 R=2 r=0.6", "borromean a=1 b=0.5", "file PATH".
BoundaryCurve parse_curve_spec(const std::string& spec);

}  // namespace minsurf
