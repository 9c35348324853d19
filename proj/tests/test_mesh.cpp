#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "minsurf/mesh.hpp"
#include "support.hpp"

using namespace minsurf;

namespace {

// All undirected edges of a triangulation, for subdivision count checks.
int count_edges(const Triangulation& t) {
  std::set<std::pair<int, int>> edges;
  for (int s = 0; s < t.n_simplices(); ++s)
    for (int i = 0; i <= t.k; ++i)
      for (int j = i + 1; j <= t.k; ++j) {
        int a = t.simplices(s, i), b = t.simplices(s, j);
        edges.insert({std::min(a, b), std::max(a, b)});
      }
  return static_cast<int>(edges.size());
}

double max_param_edge(const Triangulation& t) {
  double best = 0;
  for (int s = 0; s < t.n_simplices(); ++s)
    for (int i = 0; i <= t.k; ++i)
      for (int j = i + 1; j <= t.k; ++j)
        best = std::max(best,
                        (t.corner_params[s].row(i) - t.corner_params[s].row(j)).norm());
  return best;
}

}  // namespace

TEST_CASE("disk construction counts and boundary data") {
  Triangulation d1 = build_disk(1);
  CHECK(d1.n_vertices() == 7);
  CHECK(d1.n_simplices() == 6);
  CHECK(d1.n_boundary_facets() == 6);
  CHECK(d1.boundary_vertices.size() == 6);
  CHECK(d1.num_boundary_components == 1);
  d1.validate();

  Triangulation d2 = build_disk(2);
  CHECK(d2.n_vertices() == 19);
  CHECK(d2.n_simplices() == 24);
  d2.validate();

  // boundary parameters equally spaced around the rim
  std::vector<double> ts;
  for (int v : d1.boundary_vertices) ts.push_back(d1.bparam_t[v]);
  std::sort(ts.begin(), ts.end());
  for (size_t i = 0; i < ts.size(); ++i)
    CHECK(ts[i] == doctest::Approx(i / 6.0).epsilon(1e-14));
  // every triangle well shaped in the chart
  for (int s = 0; s < d2.n_simplices(); ++s) {
    SimplexQuality q = simplex_quality(d2.corner_params[s]);
    CHECK(q.general_position);
    CHECK(q.aspect <= 2.0 + 1e-12);
  }
}

TEST_CASE("cylinder construction counts and seam charts") {
  Triangulation c31 = build_cylinder(3, 1);
  CHECK(c31.n_vertices() == 6);
  CHECK(c31.n_simplices() == 6);
  CHECK(c31.num_boundary_components == 2);
  c31.validate();
  int comp0 = 0, comp1 = 0;
  for (int v : c31.boundary_vertices) {
    if (c31.bparam_component[v] == 0) ++comp0;
    if (c31.bparam_component[v] == 1) ++comp1;
  }
  CHECK(comp0 == 3);
  CHECK(comp1 == 3);

  Triangulation c42 = build_cylinder(4, 2);
  CHECK(c42.n_vertices() == 12);
  CHECK(c42.n_simplices() == 16);
  c42.validate();
  CHECK(c42.chart_period_x == 1.0);
  // corner charts may unwrap across the seam, but only by whole periods
  for (int s = 0; s < c42.n_simplices(); ++s)
    for (int i = 0; i <= c42.k; ++i) {
      double dx = c42.corner_params[s](i, 0) -
                  c42.vertex_params(c42.simplices(s, i), 0);
      CHECK(dx == doctest::Approx(std::round(dx)).epsilon(1e-14));
      CHECK(c42.corner_params[s](i, 1) ==
            doctest::Approx(c42.vertex_params(c42.simplices(s, i), 1)).epsilon(1e-14));
    }
}

TEST_CASE("validation rejects broken complexes") {
  Triangulation t = build_disk(1);
  SUBCASE("vertex id out of range") {
    t.simplices(0, 0) = 99;
    CHECK_THROWS_AS(t.validate(), DomainError);
  }
  SUBCASE("repeated vertex inside one simplex") {
    t.simplices(0, 0) = t.simplices(0, 1);
    CHECK_THROWS_AS(t.validate(), DomainError);
  }
  SUBCASE("boundary facet missing") {
    t.boundary_simplices.conservativeResize(t.n_boundary_facets() - 1, 2);
    CHECK_THROWS_AS(t.validate(), DomainError);
  }
  SUBCASE("interior vertex claimed as boundary") {
    // vertex 0 is the disk center
    t.bparam_component[0] = 0;
    t.bparam_t[0] = 0.25;
    CHECK_THROWS_AS(t.validate(), DomainError);
  }
  SUBCASE("parameter outside the unit interval") {
    t.bparam_t[t.boundary_vertices[0]] = 1.5;
    CHECK_THROWS_AS(t.validate(), DomainError);
  }
}

TEST_CASE("4:1 subdivision counts, charts, and boundary parameters") {
  for (int rings : {1, 2}) {
    Triangulation t = build_disk(rings);
    int edges = count_edges(t);
    RefinementMap map;
    Triangulation f = subdivide_4to1(t, &map);
    f.validate();
    CHECK(f.n_vertices() == t.n_vertices() + edges);
    CHECK(f.n_simplices() == 4 * t.n_simplices());
    CHECK(f.n_boundary_facets() == 2 * t.n_boundary_facets());
    // mesh size halves exactly in the chart
    CHECK(max_param_edge(f) == doctest::Approx(0.5 * max_param_edge(t)).epsilon(1e-14));

    // children tile their parent: chart areas add up and shapes carry over
    for (int s = 0; s < t.n_simplices(); ++s) {
      SimplexQuality parent = simplex_quality(t.corner_params[s]);
      double area = 0;
      for (int c = 0; c < 4; ++c) {
        SimplexQuality child = simplex_quality(f.corner_params[4 * s + c]);
        area += child.volume;
        CHECK(child.aspect == doctest::Approx(parent.aspect).epsilon(1e-12));
      }
      CHECK(area == doctest::Approx(parent.volume).epsilon(1e-12));
    }

    // prolongation bookkeeping: carried vertices name themselves, new ones
    // name a real coarse edge and sit at its parameter midpoint
    CHECK(static_cast<int>(map.parent_a.size()) == f.n_vertices());
    for (int v = 0; v < t.n_vertices(); ++v) {
      CHECK(map.parent_a[v] == v);
      CHECK(map.parent_b[v] == v);
    }
    for (int v = t.n_vertices(); v < f.n_vertices(); ++v) {
      int a = map.parent_a[v], b = map.parent_b[v];
      CHECK(a != b);
      CHECK((f.vertex_params.row(v) -
             0.5 * (t.vertex_params.row(a) + t.vertex_params.row(b)))
                .norm() <= 1e-14);
      if (f.is_boundary_vertex(v)) {
        CHECK(t.is_boundary_vertex(a));
        CHECK(t.is_boundary_vertex(b));
        CHECK(f.bparam_t[v] ==
              doctest::Approx(param_midpoint(t.bparam_t[a], t.bparam_t[b]))
                  .epsilon(1e-14));
      }
    }
  }
  // the seam-carrying mesh refines cleanly too
  Triangulation cyl = build_cylinder(4, 2);
  Triangulation fine = subdivide_4to1(cyl, nullptr);
  fine.validate();
  CHECK(fine.n_simplices() == 4 * cyl.n_simplices());
  CHECK(fine.chart_period_x == cyl.chart_period_x);
}

TEST_CASE("barycentric interpolation reproduces affine data") {
  Triangulation t = build_disk(2);
  // affine field sampled at the vertices
  Eigen::MatrixXd m(2, 3);
  m << 1.5, -0.25, 2.0, 0.5, 3.0, -1.0;
  Eigen::RowVector3d q(0.1, -2.0, 0.7);
  Eigen::MatrixXd values(t.n_vertices(), 3);
  for (int v = 0; v < t.n_vertices(); ++v)
    values.row(v) = t.vertex_params.row(v) * m + q;

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    int s = int(rng() % t.n_simplices());
    Eigen::Vector3d lam(testsup::uniform(rng, 0, 1), testsup::uniform(rng, 0, 1),
                        testsup::uniform(rng, 0, 1));
    lam /= lam.sum();
    Eigen::VectorXd at = interpolate(t, values, s, lam);
    Eigen::VectorXd x = chart_point(t, s, lam);
    Eigen::VectorXd expect = (x.transpose() * m + q).transpose();
    CHECK((at - expect).norm() <= 1e-13 * (1 + expect.norm()));
  }

  // corners and centroid in closed form
  Eigen::Vector3d corner(1, 0, 0), centroid(1.0 / 3, 1.0 / 3, 1.0 / 3);
  Eigen::VectorXd at0 = interpolate(t, values, 5, corner);
  CHECK((at0.transpose() - values.row(t.simplices(5, 0))).norm() <= 1e-15);
  Eigen::VectorXd atc = interpolate(t, values, 5, centroid);
  Eigen::RowVector3d avg = (values.row(t.simplices(5, 0)) + values.row(t.simplices(5, 1)) +
                            values.row(t.simplices(5, 2))) /
                           3.0;
  CHECK((atc.transpose() - avg).norm() <= 1e-14);

  // chart corners match the stored per-simplex chart
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(i) = 1;
    CHECK((chart_point(t, 7, e).transpose() - t.corner_params[7].row(i)).norm() <= 1e-15);
  }
}

TEST_CASE("interpolation rejects invalid barycentric input") {
  Triangulation t = build_disk(1);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(t.n_vertices(), 2);
  Eigen::Vector3d neg(1.2, -0.2, 0.0);
  CHECK_THROWS_AS(interpolate(t, values, 0, neg), DomainError);
  Eigen::Vector3d off(0.5, 0.4, 0.2);  // sums to 1.1
  CHECK_THROWS_AS(interpolate(t, values, 0, off), DomainError);
  Eigen::Vector3d ok(0.25, 0.25, 0.5);
  CHECK_THROWS_AS(interpolate(t, values, -1, ok), DomainError);
  CHECK_THROWS_AS(interpolate(t, values, t.n_simplices(), ok), DomainError);
  Eigen::Vector2d short_vec(0.5, 0.5);
  CHECK_THROWS_AS(interpolate(t, values, 0, short_vec), DomainError);
}

TEST_CASE("curve parameter midpoints take the short way around") {
  CHECK(param_midpoint(0.2, 0.4) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(param_midpoint(0.9, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(param_midpoint(0.1, 0.9) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(param_midpoint(0.95, 0.15) == doctest::Approx(0.05).epsilon(1e-13));
  CHECK(param_midpoint(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  double m = param_midpoint(0.999, 0.001);
  CHECK((m == doctest::Approx(0.0).epsilon(1e-12) || m == doctest::Approx(1.0).epsilon(1e-12)));
  CHECK(m >= 0.0);
  CHECK(m < 1.0);
}

TEST_CASE("simplex quality on hand-built shapes") {
  Eigen::MatrixXd right(3, 2);
  right << 0, 0, 1, 0, 0, 1;
  SimplexQuality q = simplex_quality(right);
  CHECK(q.volume == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.sigma_min == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q.sigma_max == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q.general_position);

  Eigen::MatrixXd equi(3, 3);
  equi << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0;
  q = simplex_quality(equi);
  CHECK(q.volume == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));
  CHECK(q.aspect == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));

  Eigen::MatrixXd flat(3, 3);
  flat << 0, 0, 0, 1, 1, 0, 2, 2, 0;
  q = simplex_quality(flat);
  CHECK(q.volume == doctest::Approx(0.0));
  CHECK(!q.general_position);

  // a segment's only singular value is its length
  Eigen::MatrixXd seg(2, 3);
  seg << 1, 1, 1, 1, 4, 5;
  q = simplex_quality(seg);
  CHECK(q.volume == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(q.sigma_min == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(q.aspect == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("simplex quality agrees with a full singular value decomposition") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 400; ++trial) {
    int m = 2 + int(rng() % 2);
    Eigen::MatrixXd corners = testsup::rand_gauss(rng, 3, m);
    // every fourth sample is squashed nearly flat to probe the sliver regime
    if (trial % 4 == 0) {
      double h = std::pow(10.0, -testsup::uniform(rng, 2, 9));
      corners.row(2) = corners.row(0) +
                       0.7 * (corners.row(1) - corners.row(0)) +
                       h * Eigen::RowVectorXd::Random(m);
    }
    SimplexQuality q = simplex_quality(corners);
    Eigen::MatrixXd e(m, 2);
    e.col(0) = (corners.row(1) - corners.row(0)).transpose();
    e.col(1) = (corners.row(2) - corners.row(0)).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    double smax = svd.singularValues()(0), smin = svd.singularValues()(1);
    CHECK(std::abs(q.sigma_max - smax) <= 1e-12 * smax);
    CHECK(std::abs(q.sigma_min - smin) <= 1e-12 * smax);
    CHECK(std::abs(q.volume - 0.5 * smax * smin) <= 1e-12 * smax * smax);
  }
}
