#pragma once

#include <functional>
#include <memory>

#include "minsurf/immersion.hpp"

namespace minsurf {

// Evaluable parameterization over a triangulation's chart. `x` is a
// parameter-domain point in the chart of `simplex` (periodic charts hand in
// unwrapped coordinates, so implementations must be periodic in x[0] when
// used on such meshes). Closed-form surfaces ignore `simplex`.
class Parameterization {
public:
  virtual ~Parameterization() = default;
  virtual int ambient_dim() const = 0;
  virtual Eigen::VectorXd value(int simplex, const Eigen::VectorXd& x) const = 0;
  // m x k jacobian with respect to the chart coordinates.
  virtual Eigen::MatrixXd jacobian(int simplex, const Eigen::VectorXd& x) const = 0;
};

// Exactly evaluable immersion to integrate and sample: a parameterization
// attached to the mesh that supplies evaluation cells and quadrature.
// quad_degree picks the rule for smooth_volume (1, 2 or 4 for k = 2;
// Gauss rules of matching degree for k = 1).
struct SampledImmersion {
  std::shared_ptr<const Triangulation> mesh;
  std::shared_ptr<const Parameterization> map;
  int quad_degree = 4;
};

// Flat inclusion (x, y) -> (x, y, 0) scaled by `scale`.
class FlatDisk : public Parameterization {
public:
  explicit FlatDisk(double scale = 1.0) : s_(scale) {}
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(int, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(int, const Eigen::VectorXd& x) const override;

private:
  double s_;
};

// Unit catenoid patch r = cosh(z) for z in [-a, a], parameterized over the
// cylinder chart: theta = 2 pi x, z = a (2 y - 1). Boundary rows y = 0, 1
// land exactly on coaxial circles of radius cosh(a) at z = -+a.
class Catenoid : public Parameterization {
public:
  explicit Catenoid(double a) : a_(a) {
    if (!(a > 0)) throw DomainError("Catenoid: half-height must be positive");
  }
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(int, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(int, const Eigen::VectorXd& x) const override;

private:
  double a_;
};

// Graph surface (x, y) -> (x, y, g(x, y)) with user-supplied g and its
// gradient.
class GraphSurface : public Parameterization {
public:
  GraphSurface(std::function<double(double, double)> g,
               std::function<Eigen::Vector2d(double, double)> grad)
      : g_(std::move(g)), grad_(std::move(grad)) {}
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(int, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(int, const Eigen::VectorXd& x) const override;

private:
  std::function<double(double, double)> g_;
  std::function<Eigen::Vector2d(double, double)> grad_;
};

// A discrete immersion as a parameterization: exact PL interpolation with
// the constant per-simplex differential. Barycentric coordinates are
// recovered from x in the simplex chart.
class PLMap : public Parameterization {
public:
  explicit PLMap(DiscreteImmersion f);
  int ambient_dim() const override { return static_cast<int>(f_.positions.cols()); }
  Eigen::VectorXd value(int simplex, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian(int simplex, const Eigen::VectorXd& x) const override;
  const DiscreteImmersion& base() const { return f_; }

private:
  Eigen::VectorXd barycentric(int simplex, const Eigen::VectorXd& x) const;
  DiscreteImmersion f_;
};

// Adapter that lets a parameterization defined on a coarse mesh be
// evaluated on its j-fold 4:1 refinement: child simplex rows are contiguous
// blocks, so the ancestor index is s / children_per_cell.
class AncestorMap : public Parameterization {
public:
  AncestorMap(std::shared_ptr<const Parameterization> inner, int children_per_cell)
      : inner_(std::move(inner)), f_(children_per_cell) {}
  int ambient_dim() const override { return inner_->ambient_dim(); }
  Eigen::VectorXd value(int simplex, const Eigen::VectorXd& x) const override {
    return inner_->value(simplex / f_, x);
  }
  Eigen::MatrixXd jacobian(int simplex, const Eigen::VectorXd& x) const override {
    return inner_->jacobian(simplex / f_, x);
  }

private:
  std::shared_ptr<const Parameterization> inner_;
  int f_;
};

// Quadrature rule on the reference simplex: barycentric nodes and weights
// summing to 1. Degrees 1, 2, 4 for triangles; Gauss rules for segments.
struct QuadratureRule {
  Eigen::MatrixXd nodes;  // Q x (k+1)
  Eigen::VectorXd weights;
};
QuadratureRule quadrature_rule(int k, int degree);

// Total simplex volume of the PL immersion: sum over simplices of
// sqrt(det(E^T E)) / k! from the embedded edge matrices.
double discrete_volume(const DiscreteImmersion& f);

// Gradient of discrete_volume with respect to vertex positions; rows of
// boundary vertices are zero (they are pinned). Throws DomainError on a
// degenerate simplex.
Eigen::MatrixXd discrete_volume_gradient(const DiscreteImmersion& f);

// Quadrature approximation of the k-volume of a parameterized immersion:
// sum over simplices of the chart volume times the weighted average of
// sqrt(det(J^T J)) at the mapped nodes. Exact for PL data with any rule.
// Throws DomainError if the jacobian fails injectivity at a node.
double smooth_volume(const SampledImmersion& f);

// Volume continuity modulus along the immersion distance. With
// t = dist_imm(f, h).total(): |discrete_volume(h) - discrete_volume(f)| <=
// discrete_volume(f) exp(sqrt(k) t) sqrt(k) t  (asserted; the violation
// check inflates t by the ray-solver tolerance).
Certificate certify_volume_modulus(const DiscreteImmersion& f, const DiscreteImmersion& h);

}  // namespace minsurf
