#include "minsurf/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <utility>

#include "minsurf/functional.hpp"

namespace minsurf {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Relative slack for accepting value-flat moves: covers the rounding of the
// per-simplex volume sum.
constexpr double kFlatGuardRel = 1e-12;
constexpr double kMinStep = 0x1p-40;

struct InteriorIndex {
  std::vector<int> to_interior;  // V entries, -1 for boundary
  std::vector<int> to_vertex;    // interior count entries
};

InteriorIndex interior_index(const Triangulation& t) {
  InteriorIndex idx;
  idx.to_interior.assign(t.n_vertices(), -1);
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (!t.is_boundary_vertex(v)) {
      idx.to_interior[v] = static_cast<int>(idx.to_vertex.size());
      idx.to_vertex.push_back(v);
    }
  }
  return idx;
}

std::vector<std::pair<int, int>> mesh_edges(const Triangulation& t) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(t.n_simplices()) * 3);
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int a = 0; a <= t.k; ++a) {
      for (int b = a + 1; b <= t.k; ++b) {
        int i = t.simplices(s, a), j = t.simplices(s, b);
        edges.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Interior block and interior-to-boundary coupling of a weighted graph
// Laplacian. Weight w_e on edge (i, j) contributes w to both diagonals and
// -w off-diagonal.
void assemble_laplacian(const std::vector<std::pair<int, int>>& edges,
                        const std::vector<double>& weights, const InteriorIndex& idx,
                        const Eigen::MatrixXd& positions, SpMat* lap_ii,
                        Eigen::MatrixXd* rhs) {
  const int ni = static_cast<int>(idx.to_vertex.size());
  std::vector<Triplet> trips;
  trips.reserve(edges.size() * 4);
  rhs->setZero(ni, positions.cols());
  for (size_t e = 0; e < edges.size(); ++e) {
    const double w = weights[e];
    const int i = edges[e].first, j = edges[e].second;
    const int ii = idx.to_interior[i], jj = idx.to_interior[j];
    if (ii >= 0) trips.emplace_back(ii, ii, w);
    if (jj >= 0) trips.emplace_back(jj, jj, w);
    if (ii >= 0 && jj >= 0) {
      trips.emplace_back(ii, jj, -w);
      trips.emplace_back(jj, ii, -w);
    } else if (ii >= 0) {
      rhs->row(ii) += w * positions.row(j);
    } else if (jj >= 0) {
      rhs->row(jj) += w * positions.row(i);
    }
  }
  lap_ii->resize(ni, ni);
  lap_ii->setFromTriplets(trips.begin(), trips.end());
}

// Stiffness weights of the piecewise linear Dirichlet energy on the current
// embedded mesh: cotangent weights for triangles, inverse lengths for
// segments. Can be negative on obtuse triangles; the assembled form is the
// FEM energy and stays positive semidefinite.
std::vector<double> stiffness_weights(const Triangulation& t,
                                      const std::vector<std::pair<int, int>>& edges,
                                      const Eigen::MatrixXd& positions, bool* ok) {
  std::vector<double> w(edges.size(), 0.0);
  *ok = true;
  auto edge_slot = [&edges](int i, int j) {
    auto key = std::make_pair(std::min(i, j), std::max(i, j));
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return static_cast<size_t>(it - edges.begin());
  };
  if (t.k == 1) {
    for (int s = 0; s < t.n_simplices(); ++s) {
      int i = t.simplices(s, 0), j = t.simplices(s, 1);
      double len = (positions.row(i) - positions.row(j)).norm();
      if (!(len > 1e-300)) {
        *ok = false;
        return w;
      }
      w[edge_slot(i, j)] += 1.0 / len;
    }
    return w;
  }
  const int m = static_cast<int>(positions.cols());
  for (int s = 0; s < t.n_simplices(); ++s) {
    const int v0 = t.simplices(s, 0), v1 = t.simplices(s, 1), v2 = t.simplices(s, 2);
    const int tri[3] = {v0, v1, v2};
    for (int c = 0; c < 3; ++c) {
      const int a = tri[(c + 1) % 3], b = tri[(c + 2) % 3];
      double uu = 0, vv = 0, uv = 0;
      for (int i = 0; i < m; ++i) {
        const double ui = positions(a, i) - positions(tri[c], i);
        const double vi = positions(b, i) - positions(tri[c], i);
        uu += ui * ui;
        vv += vi * vi;
        uv += ui * vi;
      }
      const double cross2 = uu * vv - uv * uv;
      if (!(cross2 > 1e-300)) {
        *ok = false;
        return w;
      }
      w[edge_slot(a, b)] += 0.5 * uv / std::sqrt(cross2);
    }
  }
  return w;
}

double min_quality_ratio(const DiscreteImmersion& f) {
  const Triangulation& t = *f.mesh;
  Eigen::MatrixXd corners(t.k + 1, static_cast<int>(f.positions.cols()));
  double q = std::numeric_limits<double>::infinity();
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int i = 0; i <= t.k; ++i) corners.row(i) = f.positions.row(t.simplices(s, i));
    SimplexQuality sq = simplex_quality(corners);
    double r = sq.sigma_max > 0 ? sq.sigma_min / sq.sigma_max : 0.0;
    q = std::min(q, r);
  }
  return q;
}

double grad_inf_norm(const Eigen::MatrixXd& grad) {
  double g = 0;
  for (int v = 0; v < grad.rows(); ++v) g = std::max(g, grad.row(v).norm());
  return g;
}

struct TraceWriter {
  std::ofstream out;
  explicit TraceWriter(const std::string& path) {
    if (path.empty()) return;
    out.open(path);
    if (!out) throw DomainError("minimize: cannot open trace file " + path);
    out << "# minsurf trace v1\n";
    out << "iter,value,grad_norm,min_quality,step_length\n";
  }
  void row(int iter, double value, double grad, double quality, double step) {
    if (!out.is_open()) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", iter, value, grad,
                  quality, step);
    out << buf;
  }
};

// Pinned boundary positions from the curve; interior rows zeroed.
Eigen::MatrixXd boundary_positions(const Triangulation& t, const BoundaryCurve& curve) {
  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(t.n_vertices(), curve.ambient_dim);
  for (int v : t.boundary_vertices)
    pos.row(v) = curve.value(t.bparam_component[v], t.bparam_t[v]).transpose();
  return pos;
}

double bbox_diag_of_rows(const Eigen::MatrixXd& pts) {
  if (pts.rows() == 0) return 0;
  Eigen::VectorXd lo = pts.colwise().minCoeff();
  Eigen::VectorXd hi = pts.colwise().maxCoeff();
  return (hi - lo).norm();
}

double boundary_bbox_diag(const Triangulation& t, const Eigen::MatrixXd& positions) {
  Eigen::MatrixXd b(static_cast<int>(t.boundary_vertices.size()), positions.cols());
  for (size_t i = 0; i < t.boundary_vertices.size(); ++i)
    b.row(static_cast<int>(i)) = positions.row(t.boundary_vertices[i]);
  return bbox_diag_of_rows(b);
}

// Graph-harmonic extension of the boundary rows into the interior
// (uniform weights, one symmetric factorization).
Eigen::MatrixXd harmonic_fill(const Triangulation& t, const Eigen::MatrixXd& positions) {
  InteriorIndex idx = interior_index(t);
  if (idx.to_vertex.empty()) return positions;
  auto edges = mesh_edges(t);
  std::vector<double> w(edges.size(), 1.0);
  SpMat lap;
  Eigen::MatrixXd rhs;
  assemble_laplacian(edges, w, idx, positions, &lap, &rhs);
  Eigen::SimplicialLDLT<SpMat> solver(lap);
  if (solver.info() != Eigen::Success)
    throw DomainError("averaged start: singular interior Laplacian");
  Eigen::MatrixXd xi = solver.solve(rhs);
  Eigen::MatrixXd out = positions;
  for (size_t i = 0; i < idx.to_vertex.size(); ++i)
    out.row(idx.to_vertex[i]) = xi.row(static_cast<int>(i));
  return out;
}

std::string start_trace_path(const std::string& base, int start) {
  if (base.empty()) return base;
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, ".start%d", start);
  auto dot = base.find_last_of('.');
  auto slash = base.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return base + suffix;
  return base.substr(0, dot) + suffix + base.substr(dot);
}

bool lex_less(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    double x = a.data()[i], y = b.data()[i];
    if (x != y) return x < y;
  }
  return false;
}

}  // namespace

SolveMethod parse_method(const std::string& name) {
  if (name == "gradient-descent") return SolveMethod::GradientDescent;
  if (name == "h1-iteration") return SolveMethod::H1Iteration;
  throw DomainError("unknown solver method: " + name);
}

std::string method_name(SolveMethod m) {
  return m == SolveMethod::GradientDescent ? "gradient-descent" : "h1-iteration";
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be positive");
  if (!(quality_floor > 0)) throw DomainError("SolverConfig: quality_floor must be positive");
  if (!(armijo_c > 0 && armijo_c < 1))
    throw DomainError("SolverConfig: armijo_c must lie in (0, 1)");
  if (multistart_count < 1)
    throw DomainError("SolverConfig: multistart_count must be at least 1");
  if (gauge_max_cycles < 0)
    throw DomainError("SolverConfig: gauge_max_cycles must be nonnegative");
}

double boundary_bbox_diagonal(const DiscreteImmersion& f) {
  return boundary_bbox_diag(*f.mesh, f.positions);
}

SolveResult minimize(const DiscreteImmersion& init, const BoundaryCurve& curve,
                     const SolverConfig& cfg) {
  cfg.validate();
  init.check_sizes();
  validate_on_curve(init, curve);
  const Triangulation& t = *init.mesh;
  const InteriorIndex idx = interior_index(t);
  const auto edges = mesh_edges(t);
  const int ni = static_cast<int>(idx.to_vertex.size());

  SolveResult res;
  res.surface = init;
  Eigen::MatrixXd& x = res.surface.positions;

  const double scale = std::max(boundary_bbox_diag(t, x), 1e-30);
  const double grad_tol = cfg.grad_tol > 0 ? cfg.grad_tol : 1e-8 * scale;
  const double pos_tol = grad_tol;

  double value = discrete_volume(res.surface);
  TraceWriter trace(cfg.trace_path);

  if (ni == 0) {
    res.value = value;
    res.grad_norm = 0;
    res.converged = true;
    return res;
  }

  // Fixed normalization target: graph-harmonic interior layout.
  Eigen::MatrixXd gauge_target;
  if (cfg.method == SolveMethod::H1Iteration) gauge_target = harmonic_fill(t, x);

  Eigen::MatrixXd prev_harm;  // warm start for the stiffness solves
  double alpha_gd = 1.0;
  int gauge_cycles = 0;
  const double flat_guard = kFlatGuardRel * std::max(1.0, std::abs(value));

  auto quality_ok = [&](const Eigen::MatrixXd& pos) {
    DiscreteImmersion cand{res.surface.mesh, pos};
    return min_quality_ratio(cand) >= cfg.quality_floor;
  };
  auto volume_at = [&](const Eigen::MatrixXd& pos) {
    DiscreteImmersion cand{res.surface.mesh, pos};
    return discrete_volume(cand);
  };

  int iter = 0;
  while (iter < cfg.max_iters) {
    ++iter;
    Eigen::MatrixXd grad = discrete_volume_gradient(res.surface);
    const double gnorm = grad_inf_norm(grad);
    const double quality = min_quality_ratio(res.surface);

    if (gnorm <= grad_tol) {
      if (cfg.method != SolveMethod::H1Iteration || gauge_cycles >= cfg.gauge_max_cycles) {
        res.converged = true;
        trace.row(iter, value, gnorm, quality, 0.0);
        break;
      }
      // Layout normalization: pull toward the harmonic target, never
      // increasing the value beyond rounding.
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.rows(), x.cols());
      for (int i = 0; i < ni; ++i) {
        int v = idx.to_vertex[i];
        g.row(v) = gauge_target.row(v) - x.row(v);
      }
      const double gdisp = grad_inf_norm(g);
      if (gdisp <= pos_tol) {
        res.converged = true;
        trace.row(iter, value, gnorm, quality, 0.0);
        break;
      }
      double beta = 1.0;
      bool moved = false;
      while (beta >= kMinStep) {
        Eigen::MatrixXd cand = x + beta * g;
        double cand_value = volume_at(cand);
        if (std::isfinite(cand_value) && cand_value <= value + flat_guard &&
            quality_ok(cand)) {
          x = cand;
          value = cand_value;
          moved = true;
          break;
        }
        beta *= 0.5;
      }
      ++gauge_cycles;
      if (!moved) {
        res.converged = true;
        trace.row(iter, value, gnorm, quality, 0.0);
        break;
      }
      trace.row(iter, value, gnorm, quality, beta * gdisp);
      continue;
    }

    // Descent direction on the interior rows.
    Eigen::MatrixXd dir;
    if (cfg.method == SolveMethod::GradientDescent) {
      dir = -grad;
    } else {
      bool weights_ok = true;
      auto w = stiffness_weights(t, edges, x, &weights_ok);
      dir = -grad;  // fallback when the stiffness solve is unusable
      if (weights_ok) {
        SpMat lap;
        Eigen::MatrixXd rhs;
        assemble_laplacian(edges, w, idx, x, &lap, &rhs);
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(1e-10);
        cg.compute(lap);
        Eigen::MatrixXd harm(ni, x.cols());
        bool solved = cg.info() == Eigen::Success;
        if (solved) {
          for (int c = 0; c < x.cols(); ++c) {
            Eigen::VectorXd guess(ni);
            if (prev_harm.size() == static_cast<Eigen::Index>(ni) * x.cols()) {
              guess = prev_harm.col(c);
            } else {
              for (int i = 0; i < ni; ++i) guess(i) = x(idx.to_vertex[i], c);
            }
            harm.col(c) = cg.solveWithGuess(rhs.col(c), guess);
            if (cg.info() != Eigen::Success) {
              solved = false;
              break;
            }
          }
        }
        if (solved) {
          prev_harm = harm;
          dir.setZero();
          for (int i = 0; i < ni; ++i) {
            int v = idx.to_vertex[i];
            dir.row(v) = harm.row(i) - x.row(v);
          }
        }
      }
    }

    const double slope = (grad.array() * dir.array()).sum();
    const double slope_floor = -1e-14 * std::max(1.0, std::abs(value));
    double alpha = cfg.method == SolveMethod::GradientDescent ? alpha_gd : 1.0;
    double step_len = 0;
    bool accepted = false;
    while (alpha >= kMinStep) {
      Eigen::MatrixXd cand = x + alpha * dir;
      double cand_value = volume_at(cand);
      bool value_ok;
      if (slope < slope_floor) {
        value_ok = cand_value <= value + cfg.armijo_c * alpha * slope;
      } else {
        value_ok = cand_value <= value + flat_guard;
      }
      if (std::isfinite(cand_value) && value_ok && quality_ok(cand)) {
        step_len = alpha * grad_inf_norm(dir);
        x = cand;
        value = cand_value;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (cfg.method == SolveMethod::GradientDescent && accepted)
      alpha_gd = std::min(alpha * 2.0, 1e6);

    trace.row(iter, value, gnorm, quality, step_len);
    if (!accepted) break;  // quality or rounding wall with a live gradient
  }

  res.iterations = iter;
  res.value = value;
  res.grad_norm = grad_inf_norm(discrete_volume_gradient(res.surface));
  return res;
}

DiscreteImmersion cone_start(std::shared_ptr<const Triangulation> mesh,
                             const BoundaryCurve& curve) {
  const Triangulation& t = *mesh;
  Eigen::MatrixXd pos = boundary_positions(t, curve);
  if (t.boundary_vertices.empty()) throw DomainError("cone start: mesh has no boundary");
  Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(curve.ambient_dim);
  for (int v : t.boundary_vertices) centroid += pos.row(v);
  centroid /= static_cast<double>(t.boundary_vertices.size());

  // Nearest boundary vertex in the parameter domain (seam-aware), and with
  // it a normalized depth; the 0.8 cap keeps the deepest vertices off the
  // apex so the start is nondegenerate.
  std::vector<int> nearest(t.n_vertices(), -1);
  std::vector<double> depth(t.n_vertices(), 0.0);
  double max_depth = 0;
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_boundary_vertex(v)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int b : t.boundary_vertices) {
      Eigen::VectorXd d = t.vertex_params.row(v) - t.vertex_params.row(b);
      if (t.chart_period_x > 0)
        d(0) -= t.chart_period_x * std::round(d(0) / t.chart_period_x);
      double dist = d.norm();
      if (dist < best) {
        best = dist;
        nearest[v] = b;
      }
    }
    depth[v] = best;
    max_depth = std::max(max_depth, best);
  }
  if (max_depth <= 0) max_depth = 1;
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_boundary_vertex(v)) continue;
    double d = depth[v] / max_depth;
    pos.row(v) = centroid + (1.0 - 0.8 * d) * (pos.row(nearest[v]) - centroid);
  }
  return DiscreteImmersion{std::move(mesh), std::move(pos)};
}

DiscreteImmersion averaged_start(std::shared_ptr<const Triangulation> mesh,
                                 const BoundaryCurve& curve) {
  Eigen::MatrixXd pos = harmonic_fill(*mesh, boundary_positions(*mesh, curve));
  return DiscreteImmersion{std::move(mesh), std::move(pos)};
}

MinimizerSet multistart_minimize(std::shared_ptr<const Triangulation> mesh,
                                 const BoundaryCurve& curve, const SolverConfig& cfg) {
  cfg.validate();
  DiscreteImmersion cone = cone_start(mesh, curve);
  DiscreteImmersion averaged = averaged_start(mesh, curve);
  const double scale = std::max(boundary_bbox_diagonal(cone), 1e-30);

  std::vector<DiscreteImmersion> starts;
  starts.reserve(cfg.multistart_count);
  for (int i = 0; i < cfg.multistart_count; ++i) {
    if (i == 0) {
      starts.push_back(cone);
    } else if (i == 1) {
      starts.push_back(averaged);
    } else {
      const DiscreteImmersion& base = (i % 2 == 0) ? cone : averaged;
      std::mt19937_64 rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(i));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      DiscreteImmersion jittered = base;
      for (int attempt = 0; attempt < 32; ++attempt) {
        jittered.positions = base.positions;
        for (int v = 0; v < mesh->n_vertices(); ++v) {
          if (mesh->is_boundary_vertex(v)) continue;
          for (int c = 0; c < jittered.positions.cols(); ++c)
            jittered.positions(v, c) += 0.1 * scale * u(rng);
        }
        if (min_quality_ratio(jittered) > 1e-12) break;
      }
      starts.push_back(jittered);
    }
  }

  auto run_one = [&](int i) -> SolveResult {
    SolverConfig one = cfg;
    one.trace_path = start_trace_path(cfg.trace_path, i);
    return minimize(starts[static_cast<size_t>(i)], curve, one);
  };

  std::vector<SolveResult> results(starts.size());
  std::vector<char> failed(starts.size(), 0);
  const int budget = std::max(1, thread_budget());
  if (budget == 1 || starts.size() == 1) {
    for (size_t i = 0; i < starts.size(); ++i) {
      try {
        results[i] = run_one(static_cast<int>(i));
      } catch (const DomainError&) {
        failed[i] = 1;
      }
    }
  } else {
    size_t next = 0;
    while (next < starts.size()) {
      size_t batch = std::min<size_t>(static_cast<size_t>(budget), starts.size() - next);
      std::vector<std::future<SolveResult>> futs;
      for (size_t j = 0; j < batch; ++j)
        futs.push_back(std::async(std::launch::async, run_one, static_cast<int>(next + j)));
      for (size_t j = 0; j < batch; ++j) {
        try {
          results[next + j] = futs[j].get();
        } catch (const DomainError&) {
          failed[next + j] = 1;
        }
      }
      next += batch;
    }
  }

  MinimizerSet set;
  set.dedup_threshold = 1e-6 * scale;
  std::vector<SolveResult> converged;
  for (size_t i = 0; i < results.size(); ++i) {
    if (failed[i] || !results[i].converged) {
      ++set.failed_starts;
      continue;
    }
    converged.push_back(std::move(results[i]));
  }
  if (converged.empty())
    throw DomainError("multistart_minimize: no start converged");

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (const auto& r : converged) {
    vmin = std::min(vmin, r.value);
    vmax = std::max(vmax, r.value);
  }
  set.value_spread = vmax - vmin;

  std::sort(converged.begin(), converged.end(), [](const SolveResult& a, const SolveResult& b) {
    if (a.value != b.value) return a.value < b.value;
    return lex_less(a.surface.positions, b.surface.positions);
  });

  for (auto& cand : converged) {
    bool duplicate = false;
    for (const auto& kept : set.entries) {
      // The position sup alone is a lower bound for the full distance;
      // settle cheap separations without the metric and ray parts.
      double sup_pos = (cand.surface.positions - kept.surface.positions)
                           .rowwise()
                           .norm()
                           .maxCoeff();
      if (sup_pos >= set.dedup_threshold) continue;
      if (dist_imm(kept.surface, cand.surface).total() < set.dedup_threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) set.entries.push_back(std::move(cand));
  }
  return set;
}

double minimality_residual(const DiscreteImmersion& f) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  Eigen::MatrixXd grad = discrete_volume_gradient(f);
  std::vector<double> ring(t.n_vertices(), 0.0);
  for (int s = 0; s < t.n_simplices(); ++s) {
    double vol = simplex_quality(f.simplex_positions(s)).volume;
    for (int c = 0; c <= t.k; ++c) ring[t.simplices(s, c)] += vol;
  }
  double worst = 0;
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_boundary_vertex(v)) continue;
    if (!(ring[v] > 0)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, grad.row(v).norm() / ring[v]);
  }
  return worst;
}

}  // namespace minsurf
