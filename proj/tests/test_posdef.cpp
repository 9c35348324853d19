#include <doctest.h>

#include <cmath>
#include <random>

#include "minsurf/posdef.hpp"
#include "support.hpp"

using namespace minsurf;
using testsup::rand_gauss;
using testsup::rand_spd;
using testsup::rand_sym;

namespace {

// Independent distance oracle: whiten c by the Cholesky factor of b, take
// the symmetric eigendecomposition of the whitened matrix, and sum squared
// logs of the eigenvalues. Shares no code with dist_p beyond Eigen.
double dist_oracle(const Matrix& b, const Matrix& c) {
  Eigen::LLT<Matrix> llt(b);
  Matrix l = llt.matrixL();
  Matrix w = l.inverse() * c * l.transpose().inverse();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.transpose()));
  double sum = 0;
  for (int i = 0; i < w.rows(); ++i) {
    double lg = std::log(es.eigenvalues()(i));
    sum += lg * lg;
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("dist_p on hand-computed pairs") {
  Matrix i2 = Matrix::Identity(2, 2);
  CHECK(dist_p(i2, i2) == 0.0);
  CHECK(dist_p(i2, 4.0 * i2) == doctest::Approx(std::sqrt(2.0) * std::log(4.0)).epsilon(1e-12));
  Matrix c = i2;
  c(0, 0) = std::exp(2.0);
  CHECK(dist_p(i2, c) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dist_p matches an independent matrix-log oracle") {
  std::mt19937_64 rng(11);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 300; ++i) {
      Matrix b = rand_spd(rng, k), c = rand_spd(rng, k);
      double d = dist_p(b, c);
      double o = dist_oracle(b, c);
      CHECK(std::abs(d - o) <= 1e-10 * std::max(1.0, o));
    }
  }
}

TEST_CASE("dist_p metric axioms on random pairs and triples") {
  std::mt19937_64 rng(12);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 200; ++i) {
      Matrix a = rand_spd(rng, k), b = rand_spd(rng, k), c = rand_spd(rng, k);
      double ab = dist_p(a, b), ba = dist_p(b, a);
      double ac = dist_p(a, c), cb = dist_p(c, b);
      CHECK(ab >= 0.0);
      CHECK(std::abs(ab - ba) <= 1e-12 * std::max(1.0, ab));
      CHECK(ab <= ac + cb + 1e-9 * std::max(1.0, ab));
      CHECK(dist_p(a, a) <= 1e-10);
    }
  }
}

TEST_CASE("dist_p is invariant under congruence by invertible matrices") {
  std::mt19937_64 rng(13);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 100; ++i) {
      Matrix b = rand_spd(rng, k), c = rand_spd(rng, k);
      Matrix a = rand_gauss(rng, k, k);
      if (std::abs(a.determinant()) < 0.1) continue;
      double d0 = dist_p(b, c);
      double d1 = dist_p(a.transpose() * b * a, a.transpose() * c * a);
      CHECK(std::abs(d1 - d0) <= 1e-8 * std::max(1.0, d0));
    }
  }
}

TEST_CASE("inner products at a base point") {
  Matrix i2 = Matrix::Identity(2, 2);
  CHECK(inner_product_at(i2, i2, i2) == doctest::Approx(2.0).epsilon(1e-14));
  Matrix x = Matrix::Zero(2, 2), y = Matrix::Zero(2, 2);
  x(0, 0) = 1;
  y(1, 1) = 1;
  CHECK(inner_product_at(i2, x, y) == doctest::Approx(0.0));
  CHECK(inner_product_at(2.0 * i2, i2, i2) == doctest::Approx(0.5).epsilon(1e-14));
  // symmetric and bilinear in the two directions
  std::mt19937_64 rng(14);
  Matrix b = rand_spd(rng, 3);
  Matrix u = rand_sym(rng, 3), v = rand_sym(rng, 3);
  CHECK(inner_product_at(b, u, v) ==
        doctest::Approx(inner_product_at(b, v, u)).epsilon(1e-12));
  CHECK(inner_product_at(b, 2.0 * u, v) ==
        doctest::Approx(2.0 * inner_product_at(b, u, v)).epsilon(1e-12));
  CHECK(norm_at(b, u) > 0.0);
}

TEST_CASE("geodesics start at the base point and run at unit rate") {
  Matrix i2 = Matrix::Identity(2, 2);
  // velocity = identity exponentiates componentwise
  for (double t : {0.0, 0.5, -1.0, 2.0}) {
    Matrix g = geodesic(i2, i2, t);
    CHECK((g - std::exp(t) * i2).norm() <= 1e-12 * std::exp(std::abs(t)));
  }
  std::mt19937_64 rng(15);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 50; ++i) {
      Matrix b = rand_spd(rng, k);
      Matrix x = rand_sym(rng, k);
      CHECK((geodesic(b, Matrix::Zero(k, k), 1.0) - b).norm() <= 1e-12 * b.norm());
      for (double t : {0.3, 1.0, -0.7}) {
        double d = dist_p(b, geodesic(b, x, t));
        double expect = std::abs(t) * norm_at(b, x);
        CHECK(std::abs(d - expect) <= 1e-8 * std::max(1.0, expect));
      }
    }
  }
}

TEST_CASE("volume ratios and the volume distance") {
  Matrix i2 = Matrix::Identity(2, 2);
  CHECK(vol_ratio(i2, i2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(vol_ratio(4.0 * i2, i2) == doctest::Approx(4.0).epsilon(1e-13));
  Matrix d49 = Matrix::Zero(2, 2);
  d49(0, 0) = 4;
  d49(1, 1) = 9;
  CHECK(vol_ratio(d49, i2) == doctest::Approx(6.0).epsilon(1e-13));
  CHECK(dist_vol(i2, i2) == 0.0);
  CHECK(dist_vol(std::exp(2.0) * i2, i2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("volume distance is Lipschitz along dist_p") {
  std::mt19937_64 rng(16);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 200; ++i) {
      Matrix b = rand_spd(rng, k), g = rand_spd(rng, k);
      double dv = dist_vol(b, g);
      double dp = dist_p(b, g);
      CHECK(std::abs(dist_vol(g, b) - dv) <= 1e-12 * std::max(1.0, dv));
      CHECK(dv <= 0.5 * std::sqrt(double(k)) * dp + 1e-12);
      // the weaker constant-sqrt(k) bound then holds a fortiori
      CHECK(dv <= std::sqrt(double(k)) * dp + 1e-12);
    }
  }
}

TEST_CASE("matrix exp and log invert each other on symmetric input") {
  std::mt19937_64 rng(17);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 50; ++i) {
      Matrix x = rand_sym(rng, k);
      Matrix back = matrix_log_spd(matrix_exp_sym(x));
      CHECK((back - x).norm() <= 1e-10 * std::max(1.0, x.norm()));
    }
  }
}

TEST_CASE("spd validation rejects bad input") {
  Matrix a(2, 2);
  a << 1, 0.5, -0.5, 1;  // not symmetric
  CHECK_THROWS_AS(check_spd(a, "a"), DomainError);
  Matrix n(2, 2);
  n << 1, 0, 0, -1;  // negative eigenvalue
  CHECK_THROWS_AS(check_spd(n, "n"), DomainError);
  Matrix s(2, 2);
  s << 1, 1, 1, 1;  // singular
  CHECK_THROWS_AS(check_spd(s, "s"), DomainError);
  CHECK_THROWS_AS(dist_p(n, Matrix::Identity(2, 2)), DomainError);
  Matrix wrong = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(dist_p(Matrix::Identity(2, 2), wrong), DomainError);
}

TEST_CASE("spd perturbation certificate on hand cases") {
  Matrix i2 = Matrix::Identity(2, 2);
  // zero perturbation certifies trivially
  Certificate zero = certify_spd_perturbation(i2, i2, Matrix::Zero(2, 2));
  CHECK(zero.applicable);
  CHECK(zero.actual == 0.0);
  CHECK(zero.bound >= 0.0);
  // scaling the base by 1.1: both sides in closed form
  Certificate c = certify_spd_perturbation(i2, i2, 0.1 * i2);
  CHECK(c.applicable);
  CHECK(c.actual == doctest::Approx(std::sqrt(2.0) * std::log(1.1)).epsilon(1e-12));
  double r = 0.1 * std::sqrt(2.0);
  CHECK(c.bound == doctest::Approx(-std::log(1.0 - r)).epsilon(1e-12));
  CHECK(c.actual <= c.bound);
  // shrinking a 1-d form toward zero meets the bound exactly
  Matrix one = Matrix::Identity(1, 1);
  Certificate tight = certify_spd_perturbation(one, one, -0.5 * one);
  CHECK(tight.applicable);
  CHECK(tight.actual == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(tight.bound == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(!violates(tight.actual, tight.bound));
  // too-large perturbation is rejected, not certified
  Certificate big = certify_spd_perturbation(i2, i2, 0.9 * i2);
  CHECK(!big.applicable);
}

TEST_CASE("spd perturbation certificate holds on a random sweep") {
  std::mt19937_64 rng(18);
  int done = 0;
  while (done < 200) {
    int k = 1 + int(rng() % 3);
    Matrix b = rand_spd(rng, k), g = rand_spd(rng, k);
    Matrix x = rand_sym(rng, k);
    double nx = norm_at(g, x);
    if (nx < 1e-12) continue;
    x *= testsup::uniform(rng, 0.05, 0.95) * std::exp(-dist_p(b, g)) / nx;
    Certificate c = certify_spd_perturbation(b, g, x);
    if (!c.applicable) continue;
    CHECK(!violates(c.actual, c.bound));
    ++done;
  }
}
