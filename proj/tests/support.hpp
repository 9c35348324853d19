#pragma once

// Shared helpers for the test suite: random instance generators, a flat
// embedding of a mesh chart, and scratch-file paths.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "minsurf/immersion.hpp"
#include "minsurf/mesh.hpp"

namespace testsup {

inline Eigen::MatrixXd rand_gauss(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
  return m;
}

// Well-conditioned random SPD matrix (eigenvalues bounded away from 0).
inline Eigen::MatrixXd rand_spd(std::mt19937_64& rng, int k) {
  Eigen::MatrixXd a = rand_gauss(rng, k, k);
  return a.transpose() * a + 0.3 * Eigen::MatrixXd::Identity(k, k);
}

inline Eigen::MatrixXd rand_sym(std::mt19937_64& rng, int k) {
  Eigen::MatrixXd a = rand_gauss(rng, k, k);
  return 0.5 * (a + a.transpose());
}

inline Eigen::MatrixXd rand_injective(std::mt19937_64& rng, int m, int k) {
  for (;;) {
    Eigen::MatrixXd a = rand_gauss(rng, m, k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    if (svd.singularValues()(k - 1) > 0.2) return a;
  }
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Chart coordinates embedded into R^3 with zero height.
inline minsurf::DiscreteImmersion flat_embedding(
    std::shared_ptr<const minsurf::Triangulation> mesh) {
  minsurf::DiscreteImmersion f;
  f.mesh = std::move(mesh);
  const minsurf::Triangulation& t = *f.mesh;
  f.positions.setZero(t.n_vertices(), 3);
  f.positions.leftCols(t.k) = t.vertex_params;
  return f;
}

// Smooth graph or tube positions over the chart plus small noise, retried
// until every simplex is in general position.
inline minsurf::DiscreteImmersion random_immersion(std::mt19937_64& rng,
                                                   bool cylinder) {
  minsurf::DiscreteImmersion f;
  f.mesh = std::make_shared<minsurf::Triangulation>(
      cylinder ? minsurf::build_cylinder(4, 2) : minsurf::build_disk(1));
  const minsurf::Triangulation& t = *f.mesh;
  for (;;) {
    double a1 = uniform(rng, -0.3, 0.3), a2 = uniform(rng, -0.3, 0.3);
    double ph = uniform(rng, 0, 6.28);
    f.positions.resize(t.n_vertices(), 3);
    for (int v = 0; v < t.n_vertices(); ++v) {
      double x = t.vertex_params(v, 0), y = t.vertex_params(v, 1);
      if (cylinder) {
        double th = 2 * M_PI * x;
        f.positions.row(v) << std::cos(th) * (1 + a1 * y),
            std::sin(th) * (1 + a1 * y), y + a2 * std::sin(th + ph);
      } else {
        f.positions.row(v) << x, y, a1 * std::sin(3 * x + ph) + a2 * x * y;
      }
      for (int c = 0; c < 3; ++c) f.positions(v, c) += uniform(rng, -0.02, 0.02);
    }
    bool ok = true;
    for (int s = 0; s < t.n_simplices() && ok; ++s)
      ok = minsurf::simplex_quality(f.simplex_positions(s)).general_position;
    if (ok) return f;
  }
}

// Fresh path under the system temp directory; the caller owns cleanup.
inline std::string temp_path(const std::string& name) {
  static int counter = 0;
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("minsurf-tests-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / (std::to_string(counter++) + "-" + name)).string();
}

}  // namespace testsup
