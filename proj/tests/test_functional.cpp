#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "minsurf/functional.hpp"
#include "support.hpp"

using namespace minsurf;
using testsup::flat_embedding;
using testsup::random_immersion;

namespace {

// Unit square split along one diagonal, boundary walked counterclockwise.
std::shared_ptr<Triangulation> make_square() {
  auto t = std::make_shared<Triangulation>();
  t->k = 2;
  t->vertex_params.resize(4, 2);
  t->vertex_params << 0, 0, 1, 0, 1, 1, 0, 1;
  t->simplices.resize(2, 3);
  t->simplices << 0, 1, 2, 0, 2, 3;
  t->corner_params = {t->vertex_params({0, 1, 2}, Eigen::all),
                      t->vertex_params({0, 2, 3}, Eigen::all)};
  t->boundary_simplices.resize(4, 2);
  t->boundary_simplices << 0, 1, 1, 2, 2, 3, 3, 0;
  t->boundary_vertices = {0, 1, 2, 3};
  t->bparam_component = {0, 0, 0, 0};
  t->bparam_t = {0.0, 0.25, 0.5, 0.75};
  t->num_boundary_components = 1;
  t->validate();
  return t;
}

// Weighted average of a monomial in the barycentric coordinates.
double quad_average(const QuadratureRule& r, const Eigen::VectorXi& powers) {
  double sum = 0;
  for (int q = 0; q < r.nodes.rows(); ++q) {
    double term = 1;
    for (int i = 0; i < powers.size(); ++i)
      term *= std::pow(r.nodes(q, i), powers(i));
    sum += r.weights(q) * term;
  }
  return sum;
}

// Exact average of prod lambda_i^{p_i} over a k-simplex:
// k! * prod(p_i!) / (k + sum p_i)!.
double monomial_average(int k, const Eigen::VectorXi& powers) {
  auto fact = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  double num = fact(k);
  for (int i = 0; i < powers.size(); ++i) num *= fact(powers(i));
  return num / fact(k + powers.sum());
}

}  // namespace

TEST_CASE("discrete areas of hand-built configurations") {
  DiscreteImmersion sq = flat_embedding(make_square());
  CHECK(discrete_volume(sq) == doctest::Approx(1.0).epsilon(1e-14));

  // hexagonal fan inscribed in the unit circle
  DiscreteImmersion hex = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  CHECK(discrete_volume(hex) == doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-13));

  // one equilateral triangle of side 1 floated into general position
  auto tri = std::make_shared<Triangulation>();
  tri->k = 2;
  tri->vertex_params.resize(3, 2);
  tri->vertex_params << 0, 0, 1, 0, 0.5, 0.8;
  tri->simplices.resize(1, 3);
  tri->simplices << 0, 1, 2;
  tri->corner_params = {tri->vertex_params};
  tri->boundary_simplices.resize(3, 2);
  tri->boundary_simplices << 0, 1, 1, 2, 2, 0;
  tri->boundary_vertices = {0, 1, 2};
  tri->bparam_component = {0, 0, 0};
  tri->bparam_t = {0.0, 1.0 / 3, 2.0 / 3};
  tri->num_boundary_components = 1;
  tri->validate();
  DiscreteImmersion f;
  f.mesh = tri;
  f.positions.resize(3, 3);
  f.positions << 1, 1, 0, 2, 1, 0, 1.5, 1 + std::sqrt(3.0) / 2, 0;
  CHECK(discrete_volume(f) == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-13));
}

TEST_CASE("area scales quadratically and ignores rigid motions") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteImmersion f = random_immersion(rng, trial % 2 == 0);
    double base = discrete_volume(f);
    DiscreteImmersion scaled = f;
    double s = testsup::uniform(rng, 0.3, 2.5);
    scaled.positions *= s;
    CHECK(discrete_volume(scaled) == doctest::Approx(s * s * base).epsilon(1e-12));

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(testsup::rand_gauss(rng, 3, 3));
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::RowVector3d c(testsup::uniform(rng, -2, 2), testsup::uniform(rng, -2, 2),
                         testsup::uniform(rng, -2, 2));
    DiscreteImmersion moved = f;
    moved.positions = f.positions * q.transpose();
    moved.positions.rowwise() += c;
    CHECK(discrete_volume(moved) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("area gradient vanishes on flat spanning configurations") {
  DiscreteImmersion flat = flat_embedding(std::make_shared<Triangulation>(build_disk(2)));
  Eigen::MatrixXd grad = discrete_volume_gradient(flat);
  CHECK(grad.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("area gradient of a lifted fan center points along the lift") {
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  f.positions(0, 2) = 0.2;  // vertex 0 is the center
  Eigen::MatrixXd grad = discrete_volume_gradient(f);
  CHECK(std::abs(grad(0, 0)) <= 1e-13);
  CHECK(std::abs(grad(0, 1)) <= 1e-13);
  CHECK(grad(0, 2) > 0.0);
  // pinned rim rows stay zero
  for (int v : f.mesh->boundary_vertices) CHECK(grad.row(v).norm() == 0.0);
}

TEST_CASE("area gradient matches central finite differences") {
  std::mt19937_64 rng(42);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteImmersion f = random_immersion(rng, trial % 2 == 1);
    Eigen::MatrixXd grad = discrete_volume_gradient(f);
    double step = 1e-6 * std::max(1.0, f.positions.cwiseAbs().maxCoeff());
    Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
    for (int v = 0; v < f.positions.rows(); ++v) {
      if (f.mesh->is_boundary_vertex(v)) continue;
      for (int c = 0; c < 3; ++c) {
        DiscreteImmersion p = f;
        p.positions(v, c) += step;
        double up = discrete_volume(p);
        p.positions(v, c) -= 2 * step;
        double dn = discrete_volume(p);
        fd(v, c) = (up - dn) / (2 * step);
      }
    }
    worst = std::max(worst, (grad - fd).norm() / std::max(grad.norm(), 1e-30));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("area gradient refuses degenerate simplices") {
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  f.positions.row(0) = f.positions.row(1);  // collapse the center onto the rim
  CHECK_THROWS_AS(discrete_volume_gradient(f), DomainError);
}

TEST_CASE("quadrature rules integrate their degree exactly") {
  for (int degree : {1, 2, 4}) {
    QuadratureRule r = quadrature_rule(2, degree);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (int q = 0; q < r.nodes.rows(); ++q) {
      CHECK(r.nodes.row(q).sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(r.nodes.row(q).minCoeff() >= 0.0);
    }
  }
  Eigen::VectorXi p(3);
  p << 1, 0, 0;
  CHECK(quad_average(quadrature_rule(2, 1), p) ==
        doctest::Approx(monomial_average(2, p)).epsilon(1e-14));
  p << 1, 1, 0;
  CHECK(quad_average(quadrature_rule(2, 2), p) ==
        doctest::Approx(monomial_average(2, p)).epsilon(1e-14));
  p << 2, 0, 0;
  CHECK(quad_average(quadrature_rule(2, 2), p) ==
        doctest::Approx(monomial_average(2, p)).epsilon(1e-14));
  p << 2, 2, 0;
  CHECK(quad_average(quadrature_rule(2, 4), p) ==
        doctest::Approx(monomial_average(2, p)).epsilon(1e-13));
  p << 4, 0, 0;
  CHECK(quad_average(quadrature_rule(2, 4), p) ==
        doctest::Approx(monomial_average(2, p)).epsilon(1e-13));

  Eigen::VectorXi s(2);
  s << 1, 0;
  CHECK(quad_average(quadrature_rule(1, 1), s) ==
        doctest::Approx(monomial_average(1, s)).epsilon(1e-14));
  s << 3, 0;
  CHECK(quad_average(quadrature_rule(1, 3), s) ==
        doctest::Approx(monomial_average(1, s)).epsilon(1e-14));
  s << 5, 0;
  CHECK(quad_average(quadrature_rule(1, 5), s) ==
        doctest::Approx(monomial_average(1, s)).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_rule(2, 5), DomainError);
  CHECK_THROWS_AS(quadrature_rule(3, 1), DomainError);
}

TEST_CASE("integrated area of closed-form surfaces") {
  // the flat chart integrates to the inscribed polygon area, near pi when fine
  SampledImmersion flat;
  flat.mesh = std::make_shared<Triangulation>(build_disk(80));
  flat.map = std::make_shared<FlatDisk>();
  double area = smooth_volume(flat);
  CHECK(std::abs(area - M_PI) <= 1e-4);

  // catenoid patch against its closed-form area
  double a = 0.5;
  SampledImmersion cat;
  cat.mesh = std::make_shared<Triangulation>(build_cylinder(32, 8));
  cat.map = std::make_shared<Catenoid>(a);
  double expect = 2 * M_PI * (a + std::sinh(a) * std::cosh(a));
  CHECK(std::abs(smooth_volume(cat) - expect) <= 1e-3);

  // the patch boundary rows land on the coaxial rings
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.37, 0.0;
  hi << 0.81, 1.0;
  Catenoid c(a);
  Eigen::VectorXd pl = c.value(0, lo), ph = c.value(0, hi);
  CHECK(pl(2) == doctest::Approx(-a).epsilon(1e-14));
  CHECK(ph(2) == doctest::Approx(a).epsilon(1e-14));
  CHECK(pl.head(2).norm() == doctest::Approx(std::cosh(a)).epsilon(1e-14));
  CHECK(ph.head(2).norm() == doctest::Approx(std::cosh(a)).epsilon(1e-14));
}

TEST_CASE("closed-form jacobians agree with finite differences") {
  std::mt19937_64 rng(43);
  auto probe = [&](const Parameterization& m, double x0, double x1) {
    Eigen::VectorXd x(2);
    x << x0, x1;
    Eigen::MatrixXd jac = m.jacobian(0, x);
    double h = 1e-6;
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      Eigen::VectorXd col = (m.value(0, xp) - m.value(0, xm)) / (2 * h);
      CHECK((jac.col(c) - col).norm() <= 1e-8 * (1 + jac.norm()));
    }
  };
  probe(FlatDisk(1.7), 0.3, -0.2);
  probe(Catenoid(0.5), 0.41, 0.73);
  probe(GraphSurface([](double x, double y) { return 0.5 * (x * x + y * y); },
                     [](double x, double y) { return Eigen::Vector2d(x, y); }),
        0.2, 0.6);
}

TEST_CASE("piecewise linear data integrates to its own discrete area") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 6; ++trial) {
    DiscreteImmersion f = random_immersion(rng, trial % 2 == 0);
    double exact = discrete_volume(f);
    for (int degree : {1, 2, 4}) {
      SampledImmersion s;
      s.mesh = f.mesh;
      s.map = std::make_shared<PLMap>(f);
      s.quad_degree = degree;
      CHECK(smooth_volume(s) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("integration rejects rank-deficient derivatives") {
  class Collapse : public Parameterization {
  public:
    int ambient_dim() const override { return 3; }
    Eigen::VectorXd value(int, const Eigen::VectorXd& x) const override {
      Eigen::VectorXd p(3);
      p << x(0) + x(1), x(0) + x(1), 0.0;
      return p;
    }
    Eigen::MatrixXd jacobian(int, const Eigen::VectorXd&) const override {
      Eigen::MatrixXd j(3, 2);
      j << 1, 1, 1, 1, 0, 0;
      return j;
    }
  };
  SampledImmersion bad;
  bad.mesh = std::make_shared<Triangulation>(build_disk(1));
  bad.map = std::make_shared<Collapse>();
  CHECK_THROWS_AS(smooth_volume(bad), DomainError);
}

TEST_CASE("volume continuity certificate on closed-form and random pairs") {
  std::mt19937_64 rng(45);
  DiscreteImmersion f = random_immersion(rng, false);
  Certificate same = certify_volume_modulus(f, f);
  CHECK(same.applicable);
  CHECK(same.actual == 0.0);
  CHECK(!violates(same.actual, same.bound));

  DiscreteImmersion h = f;
  h.positions *= 1.01;
  Certificate c = certify_volume_modulus(f, h);
  CHECK(c.applicable);
  double base = discrete_volume(f);
  CHECK(c.actual == doctest::Approx(base * (1.01 * 1.01 - 1.0)).epsilon(1e-10));
  CHECK(!violates(c.actual, c.bound));

  int done = 0;
  while (done < 100) {
    DiscreteImmersion g = random_immersion(rng, done % 2 == 0);
    DiscreteImmersion p = g;
    p.positions += testsup::uniform(rng, 0.001, 0.2) *
                   testsup::rand_gauss(rng, p.positions.rows(), 3);
    bool ok = true;
    for (int s = 0; s < g.mesh->n_simplices() && ok; ++s)
      ok = simplex_quality(p.simplex_positions(s)).general_position;
    if (!ok) continue;
    Certificate cert = certify_volume_modulus(g, p);
    CHECK(cert.applicable);
    CHECK(!violates(cert.actual, cert.bound));
    ++done;
  }
}
