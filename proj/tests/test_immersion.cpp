#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "minsurf/curves.hpp"
#include "minsurf/functional.hpp"
#include "minsurf/immersion.hpp"
#include "support.hpp"

using namespace minsurf;
using testsup::flat_embedding;
using testsup::random_immersion;

namespace {

// Precompose the position field with a vertex permutation: (f o phi)(v) =
// f(phi(v)).
DiscreteImmersion compose(const DiscreteImmersion& f, const std::vector<int>& phi) {
  DiscreteImmersion g = f;
  for (size_t v = 0; v < phi.size(); ++v)
    g.positions.row(static_cast<int>(v)) = f.positions.row(phi[v]);
  return g;
}

}  // namespace

TEST_CASE("pullback metrics of model embeddings") {
  auto mesh = std::make_shared<Triangulation>(build_disk(2));
  DiscreteImmersion plane;
  plane.mesh = mesh;
  plane.positions = mesh->vertex_params;  // identity chart embedding, m = 2
  PullbackField pb = pullback(plane);
  for (const Matrix& g : pb.gram)
    CHECK((g - Matrix::Identity(2, 2)).norm() <= 1e-13);

  DiscreteImmersion scaled = plane;
  scaled.positions *= 3.0;
  for (const Matrix& g : pullback(scaled).gram)
    CHECK((g - 9.0 * Matrix::Identity(2, 2)).norm() <= 1e-12);

  // tilted graph (x, y, a x) tilts only the first chart direction
  double a = 0.75;
  DiscreteImmersion graph = flat_embedding(mesh);
  graph.positions.col(2) = a * graph.positions.col(0);
  Matrix expect(2, 2);
  expect << 1 + a * a, 0, 0, 1;
  for (const Matrix& g : pullback(graph).gram) CHECK((g - expect).norm() <= 1e-12);

  DiscreteImmersion squashed = plane;
  squashed.positions.col(1).setZero();
  CHECK_THROWS_AS(pullback(squashed), DomainError);
}

TEST_CASE("immersion distance separates position, metric, and ray parts") {
  auto mesh = std::make_shared<Triangulation>(build_disk(1));
  DiscreteImmersion f = flat_embedding(mesh);

  ImmersionDistance zero = dist_imm(f, f);
  CHECK(zero.sup_pos == 0.0);
  CHECK(zero.sup_metric == 0.0);
  CHECK(zero.sup_ray == 0.0);
  CHECK(zero.total_cross() == 0.0);

  DiscreteImmersion moved = f;
  Eigen::RowVector3d c(0.3, -0.1, 0.7);
  moved.positions.rowwise() += c;
  ImmersionDistance d = dist_imm(f, moved);
  CHECK(d.sup_pos == doctest::Approx(c.norm()).epsilon(1e-14));
  CHECK(d.b_sup_pos == doctest::Approx(c.norm()).epsilon(1e-14));
  CHECK(d.sup_metric == 0.0);
  CHECK(d.sup_ray <= kRaySolverTol);
  CHECK(d.b_sup_metric == 0.0);

  DiscreteImmersion doubled = f;
  doubled.positions *= 2.0;
  ImmersionDistance s = dist_imm(f, doubled);
  CHECK(s.sup_metric == doctest::Approx(std::sqrt(2.0) * std::log(4.0)).epsilon(1e-12));
  CHECK(s.b_sup_metric == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(s.sup_ray <= kRaySolverTol);
  CHECK(s.total() >= s.sup_metric);
  CHECK(s.total_cross() >= s.total());
}

TEST_CASE("immersion distance is symmetric and triangular") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteImmersion a = random_immersion(rng, trial % 2 == 0);
    DiscreteImmersion b = a, c = a;
    b.positions += 0.05 * testsup::rand_gauss(rng, a.positions.rows(), 3);
    c.positions += 0.05 * testsup::rand_gauss(rng, a.positions.rows(), 3);
    b.mesh = c.mesh = a.mesh;
    double ab = dist_imm(a, b).total(), ba = dist_imm(b, a).total();
    double ac = dist_imm(a, c).total(), cb = dist_imm(c, b).total();
    CHECK(std::abs(ab - ba) <= 2 * kRaySolverTol);
    CHECK(ab <= ac + cb + 2 * kRaySolverTol);
  }
}

TEST_CASE("immersion distance rejects mismatched meshes") {
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  DiscreteImmersion g = flat_embedding(std::make_shared<Triangulation>(build_disk(2)));
  CHECK_THROWS_AS(dist_imm(f, g), DomainError);
  // same combinatorics behind different pointers is accepted
  DiscreteImmersion h = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  CHECK(dist_imm(f, h).total() == 0.0);
}

TEST_CASE("shape distance upper bound over supplied symmetries") {
  auto mesh = std::make_shared<Triangulation>(build_disk(2));
  std::vector<std::vector<int>> rots = disk_rotations(2);
  CHECK(!rots.empty());
  for (const auto& phi : rots) CHECK(is_automorphism(*mesh, phi));

  std::mt19937_64 rng(52);
  DiscreteImmersion f = flat_embedding(mesh);
  f.positions.col(2) =
      (f.positions.col(0).array().square() - f.positions.col(1).array().square())
          .matrix();
  f.positions += 0.01 * testsup::rand_gauss(rng, f.positions.rows(), 3);

  CHECK(dist_shape_upper(f, f, {}) == 0.0);
  DiscreteImmersion g = compose(f, rots.front());
  // the matching rotation is in the candidate set, so the bound collapses
  CHECK(dist_shape_upper(f, g, rots) <= 2 * kRaySolverTol);
  // without it only the identity is tried and the bound stays loose
  double loose = dist_shape_upper(f, g, {});
  CHECK(loose == doctest::Approx(dist_imm(f, g).total_cross()).epsilon(1e-12));
  CHECK(loose > 1e-3);

  std::vector<int> bogus(mesh->n_vertices());
  for (int v = 0; v < mesh->n_vertices(); ++v) bogus[v] = v;
  std::swap(bogus[0], bogus[1]);  // swaps center with a rim vertex
  CHECK(!is_automorphism(*mesh, bogus));
  CHECK_THROWS_AS(dist_shape_upper(f, g, {bogus}), DomainError);
}

TEST_CASE("a-priori membership measures worst metric deviation") {
  auto mesh = std::make_shared<Triangulation>(build_disk(1));
  DiscreteImmersion f;
  f.mesh = mesh;
  f.positions = mesh->vertex_params;
  PullbackField ref = pullback(f);

  AprioriResult self = apriori_membership_discrete(f, ref, 0.0);
  CHECK(self.member);
  CHECK(self.worst <= 1e-12);

  DiscreteImmersion scaled = f;
  scaled.positions *= std::exp(0.5);  // pullback e * I, distance sqrt(2)
  AprioriResult res = apriori_membership_discrete(scaled, ref, 1.0);
  CHECK(res.worst == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(!res.member);
  CHECK(apriori_membership_discrete(scaled, ref, std::sqrt(2.0) + 1e-9).member);

  DiscreteImmersion broken = f;
  broken.positions.row(0) = broken.positions.row(1);
  AprioriResult bad = apriori_membership_discrete(broken, ref, 100.0);
  CHECK(!bad.member);
  CHECK(bad.degenerate);
}

TEST_CASE("immersion perturbation certificate on hand and random data") {
  std::mt19937_64 rng(53);
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(2)));
  PullbackField ref = pullback(f);

  Certificate same = certify_immersion_perturbation(f, f, ref);
  CHECK(same.applicable);
  CHECK(same.actual == 0.0);

  DiscreteImmersion h = f;
  for (int v = 0; v < h.positions.rows(); ++v)
    if (!h.mesh->is_boundary_vertex(v))
      h.positions.row(v) += 0.001 * testsup::rand_gauss(rng, 1, 3);
  Certificate c = certify_immersion_perturbation(f, h, ref);
  CHECK(c.applicable);
  CHECK(c.actual == doctest::Approx(dist_imm(f, h).total()).epsilon(1e-9));
  CHECK(!violates(c.actual, c.bound));

  // far-too-large perturbations are declined rather than certified
  DiscreteImmersion wild = f;
  wild.positions *= 5.0;
  CHECK(!certify_immersion_perturbation(f, wild, ref).applicable);
}

TEST_CASE("reverse bound recovers field closeness from distance closeness") {
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  PullbackField ref = pullback(f);
  DiscreteImmersion h = f;
  Eigen::RowVector3d c(0.2, 0.1, -0.3);
  h.positions.rowwise() += c;
  Certificate cert = certify_reverse_bound(f, h, ref);
  CHECK(cert.applicable);
  CHECK(cert.actual == doctest::Approx(c.norm()).epsilon(1e-12));
  CHECK(!violates(cert.actual, cert.bound));
}

TEST_CASE("refinement lifts a surface without changing it as a map") {
  std::mt19937_64 rng(54);
  for (bool cyl : {false, true}) {
    DiscreteImmersion f = random_immersion(rng, cyl);
    RefinementMap map;
    auto fine = std::make_shared<Triangulation>(subdivide_4to1(*f.mesh, &map));
    DiscreteImmersion lifted = refine(f, *fine, map);
    lifted.mesh = fine;
    CHECK(discrete_volume(lifted) ==
          doctest::Approx(discrete_volume(f)).epsilon(1e-13));
    // new vertices interpolate their parent edge exactly
    for (int v = f.positions.rows(); v < lifted.positions.rows(); ++v) {
      Eigen::RowVector3d mid =
          0.5 * (f.positions.row(map.parent_a[v]) + f.positions.row(map.parent_b[v]));
      CHECK((lifted.positions.row(v) - mid).norm() <= 1e-14);
    }
  }
}

TEST_CASE("refinement can snap new boundary vertices onto the curve") {
  BoundaryCurve curve = circle(1.0);
  auto coarse = std::make_shared<Triangulation>(build_disk(1));
  DiscreteImmersion f;
  f.mesh = coarse;
  f.positions.setZero(coarse->n_vertices(), 3);
  for (int v = 0; v < coarse->n_vertices(); ++v) {
    if (coarse->is_boundary_vertex(v))
      f.positions.row(v) = curve.value(0, coarse->bparam_t[v]).transpose();
    else
      f.positions.row(v) << 0, 0, 0;
  }
  validate_on_curve(f, curve);

  RefinementMap map;
  auto fine = std::make_shared<Triangulation>(subdivide_4to1(*coarse, &map));
  DiscreteImmersion snapped = refine(f, *fine, map, &curve);
  snapped.mesh = fine;
  validate_on_curve(snapped, curve);  // every new rim vertex sits on the circle

  // the plain lift leaves new rim vertices on the chords instead
  DiscreteImmersion chord = refine(f, *fine, map);
  chord.mesh = fine;
  CHECK_THROWS_AS(validate_on_curve(chord, curve), DomainError);
}

TEST_CASE("curve validation notices an off-curve boundary vertex") {
  BoundaryCurve curve = circle(1.0);
  DiscreteImmersion f = flat_embedding(std::make_shared<Triangulation>(build_disk(1)));
  // flat_embedding puts rim vertices exactly on the unit circle already
  validate_on_curve(f, curve);
  f.positions(f.mesh->boundary_vertices[2], 2) += 1e-6;
  CHECK_THROWS_AS(validate_on_curve(f, curve), DomainError);
}

TEST_CASE("cylinder symmetries are automorphisms") {
  Triangulation cyl = build_cylinder(4, 2);
  std::vector<std::vector<int>> rots = cylinder_rotations(4, 2);
  CHECK(!rots.empty());
  for (const auto& phi : rots) CHECK(is_automorphism(cyl, phi));
}

TEST_CASE("geometrically convergent position fields stay immersed in the limit") {
  std::mt19937_64 rng(55);
  DiscreteImmersion f = random_immersion(rng, false);
  Eigen::MatrixXd dir = testsup::rand_gauss(rng, f.positions.rows(), 3);
  dir *= 0.05 / dir.cwiseAbs().maxCoeff();
  DiscreteImmersion prev = f;
  double last = 0;
  for (int n = 1; n <= 12; ++n) {
    DiscreteImmersion next = f;
    next.positions += (1.0 - std::pow(2.0, -n)) * dir;
    double step = dist_imm(prev, next).total();
    if (n > 2) CHECK(step <= 0.75 * last + 1e-12);
    last = step;
    prev = next;
  }
  DiscreteImmersion limit = f;
  limit.positions += dir;
  for (int s = 0; s < limit.mesh->n_simplices(); ++s)
    CHECK(simplex_quality(limit.simplex_positions(s)).general_position);
  CHECK(dist_imm(prev, limit).total() <= 0.01);
}
