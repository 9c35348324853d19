#include <doctest.h>

#include <cmath>
#include <random>

#include "minsurf/grassmann.hpp"
#include "support.hpp"

using namespace minsurf;
using testsup::rand_gauss;
using testsup::rand_injective;
using testsup::rand_spd;

namespace {

// Dense directional scan over the circle of domain rays; an independent
// reference for the k = 2 optimizer.
double ray_sup_brute(const Matrix& a, const Matrix& b, int n) {
  double best = 0;
  for (int i = 0; i < n; ++i) {
    double t = M_PI * i / n;
    Vector u(2);
    u << std::cos(t), std::sin(t);
    best = std::max(best, ray_angle(a * u, b * u));
  }
  return best;
}

Matrix rotation2(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

}  // namespace

TEST_CASE("angles between rays") {
  Vector e1(2), e2(2), diag(2);
  e1 << 1, 0;
  e2 << 0, 1;
  diag << 1, 1;
  CHECK(ray_angle(e1, e2) == doctest::Approx(M_PI / 2).epsilon(1e-14));
  CHECK(ray_angle(e1, e1) == 0.0);
  CHECK(ray_angle(e1, diag) == doctest::Approx(M_PI / 4).epsilon(1e-13));
  // opposite vectors span different rays
  CHECK(ray_angle(e1, Vector(-e1)) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK_THROWS_AS(ray_angle(Vector::Zero(2), e1), DomainError);
}

TEST_CASE("ray sup distance on hand cases") {
  Matrix i2 = Matrix::Identity(2, 2);
  CHECK(dist_ray_sup(i2, i2) == doctest::Approx(0.0));
  // a plane rotation moves every ray by exactly its angle
  CHECK(dist_ray_sup(i2, rotation2(0.3)) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(dist_ray_sup(i2, rotation2(0.01)) == doctest::Approx(0.01).epsilon(1e-6));
  // positive rescaling never moves a ray
  CHECK(dist_ray_sup(i2, 3.7 * i2) <= kRaySolverTol);
  // k = 1 reduces to the angle of the two columns
  Matrix u(3, 1), v(3, 1);
  u << 1, 0, 0;
  v << 1, 1, 0;
  CHECK(dist_ray_sup(u, v) == doctest::Approx(M_PI / 4).epsilon(1e-13));
  Matrix sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(dist_ray_sup(sing, i2), DomainError);
}

TEST_CASE("ray sup optimizer matches a dense directional scan") {
  std::mt19937_64 rng(21);
  for (int m : {2, 3}) {
    for (int i = 0; i < 12; ++i) {
      Matrix a = rand_injective(rng, m, 2);
      Matrix b = rand_injective(rng, m, 2);
      double opt = dist_ray_sup(a, b);
      double brute = ray_sup_brute(a, b, 1000000);
      CHECK(std::abs(opt - brute) <= 1e-5);
    }
  }
}

TEST_CASE("ray sup distance symmetry and invariances") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 30; ++i) {
    int k = 1 + int(rng() % 3);
    int m = k + int(rng() % (4 - k));
    Matrix a = rand_injective(rng, m, k);
    Matrix b = rand_injective(rng, m, k);
    double d = dist_ray_sup(a, b);
    CHECK(std::abs(dist_ray_sup(b, a) - d) <= 2 * kRaySolverTol);
    // orthogonal maps of the target preserve all angles
    Eigen::HouseholderQR<Matrix> qr(rand_gauss(rng, m, m));
    Matrix q = qr.householderQ();
    CHECK(std::abs(dist_ray_sup(q * a, q * b) - d) <= 2 * kRaySolverTol);
    // shared invertible reparameterization of the domain permutes the rays
    Matrix g = rand_gauss(rng, k, k);
    if (std::abs(g.determinant()) < 0.2) continue;
    CHECK(std::abs(dist_ray_sup(a * g, b * g) - d) <= 2 * kRaySolverTol);
  }
}

TEST_CASE("pseudoinverse of injective maps") {
  Matrix i2 = Matrix::Identity(2, 2);
  CHECK((pseudoinverse(i2) - i2).norm() <= 1e-14);
  CHECK((pseudoinverse(2.0 * i2) - 0.5 * i2).norm() <= 1e-14);
  Matrix tall(3, 2);
  tall << 1, 0, 0, 1, 0, 0;
  CHECK((pseudoinverse(tall) - tall.transpose()).norm() <= 1e-14);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    int k = 1 + int(rng() % 3);
    int m = k + int(rng() % (4 - k));
    Matrix a = rand_injective(rng, m, k);
    Matrix pinv = pseudoinverse(a);
    CHECK((pinv * a - Matrix::Identity(k, k)).norm() <= 1e-10);
    Eigen::JacobiSVD<Matrix> svd(a);
    double smin = svd.singularValues()(k - 1);
    CHECK(pinv_norm(a) == doctest::Approx(1.0 / smin).epsilon(1e-10));
  }
  Matrix sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK(!is_injective(sing));
  CHECK_THROWS_AS(pseudoinverse(sing), DomainError);
}

TEST_CASE("map perturbation certificate, metric conclusion") {
  Matrix i2 = Matrix::Identity(2, 2);
  Matrix b = i2;
  b(0, 0) = 1.05;
  Certificate c = certify_map_perturbation_metric(i2, b, i2);
  CHECK(c.applicable);  // gap 0.05 < 1/3
  CHECK(c.actual == doctest::Approx(std::log(1.1025)).epsilon(1e-12));
  CHECK(c.bound == doctest::Approx(-std::log(1.0 - 0.1025)).epsilon(1e-12));
  CHECK(!violates(c.actual, c.bound));
  // identical maps certify trivially
  Certificate same = certify_map_perturbation_metric(i2, i2, i2);
  CHECK(same.applicable);
  CHECK(same.actual == 0.0);
}

TEST_CASE("map perturbation certificate, ray conclusion") {
  Matrix i2 = Matrix::Identity(2, 2);
  Certificate c = certify_map_perturbation_ray(i2, rotation2(0.01));
  CHECK(c.applicable);
  CHECK(c.actual == doctest::Approx(0.01).epsilon(1e-4));
  double gap = 2.0 * std::sqrt(2.0) * std::sin(0.005);
  CHECK(c.bound == doctest::Approx(M_PI * std::sqrt(24.0) * gap).epsilon(1e-10));
  CHECK(!violates(c.actual, c.bound));
}

TEST_CASE("reverse bound from metric and ray closeness") {
  Matrix i2 = Matrix::Identity(2, 2);
  Certificate c = reverse_bound_linear(i2, 1.1 * i2, i2);
  CHECK(c.applicable);  // dist_p(I, 1.21 I) well below 5/2
  CHECK(c.actual == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(c.bound >= doctest::Approx(std::sqrt(2.0) * std::log(1.21)).epsilon(1e-6));
  CHECK(!violates(c.actual, c.bound));
}

TEST_CASE("linear-map certificates hold on random sweeps") {
  std::mt19937_64 rng(24);
  int metric_done = 0, ray_done = 0, reverse_done = 0;
  while (metric_done < 150) {
    int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
    Matrix a = rand_injective(rng, m, k);
    Matrix g1 = rand_spd(rng, k);
    double cap = std::exp(-1.5 * dist_p(g1, a.transpose() * a)) / 3.0;
    Matrix e = rand_gauss(rng, m, k);
    Matrix b = a + e * (testsup::uniform(rng, 0.05, 0.95) * cap / e.norm());
    Certificate c = certify_map_perturbation_metric(a, b, g1);
    if (!c.applicable) continue;
    CHECK(!violates(c.actual, c.bound));
    ++metric_done;
  }
  while (ray_done < 150) {
    int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
    Matrix a = rand_injective(rng, m, k);
    Matrix e = rand_gauss(rng, m, k);
    Matrix b = a + e * (testsup::uniform(rng, 0.05, 0.95) * 0.5 /
                        (pinv_norm(a) * e.norm()));
    Certificate c = certify_map_perturbation_ray(a, b);
    if (!c.applicable) continue;
    CHECK(!violates(c.actual, c.bound));
    ++ray_done;
  }
  while (reverse_done < 150) {
    int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
    Matrix a = rand_injective(rng, m, k);
    Matrix g1 = rand_spd(rng, k);
    Matrix e = rand_gauss(rng, m, k);
    Matrix b = a + e * (testsup::uniform(rng, 0.01, 0.2) / e.norm());
    if (!is_injective(b)) continue;
    Certificate c = reverse_bound_linear(a, b, g1);
    if (!c.applicable) continue;
    CHECK(!violates(c.actual, c.bound));
    ++reverse_done;
  }
}
