#include "minsurf/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/SVD>

namespace minsurf {

SimplexQuality simplex_quality(const Eigen::MatrixXd& corners) {
  const int k = static_cast<int>(corners.rows()) - 1;
  const int m = static_cast<int>(corners.cols());
  if (k < 1 || m < k) throw DomainError("simplex_quality: need k+1 corners in R^m, m >= k");
  SimplexQuality q;
  if (k == 1) {
    double a = 0;
    for (int i = 0; i < m; ++i) {
      double d = corners(1, i) - corners(0, i);
      a += d * d;
    }
    q.sigma_min = q.sigma_max = q.volume = std::sqrt(a);
  } else if (k == 2) {
    double a = 0, b = 0, c = 0;
    for (int i = 0; i < m; ++i) {
      double d1 = corners(1, i) - corners(0, i);
      double d2 = corners(2, i) - corners(0, i);
      a += d1 * d1;
      b += d2 * d2;
      c += d1 * d2;
    }
    // sigma_max^2 is the large Gram eigenvalue; sigma_min comes from the
    // rejection of the shorter edge against the longer one, which keeps it
    // accurate for slivers where the Gram determinant cancels.
    double half = 0.5 * (a + b);
    q.sigma_max = std::sqrt(half + std::hypot(0.5 * (a - b), c));
    double lead = std::max(a, b);
    double rej = 0;
    if (lead > 0) {
      double t = c / lead;
      for (int i = 0; i < m; ++i) {
        double d1 = corners(1, i) - corners(0, i);
        double d2 = corners(2, i) - corners(0, i);
        double r = a >= b ? d2 - t * d1 : d1 - t * d2;
        rej += r * r;
      }
    }
    double det = std::sqrt(lead * rej);
    q.volume = 0.5 * det;
    q.sigma_min = q.sigma_max > 0 ? det / q.sigma_max : 0.0;
  } else {
    Eigen::MatrixXd e(m, k);
    for (int i = 0; i < k; ++i)
      e.col(i) = (corners.row(i + 1) - corners.row(0)).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    q.sigma_min = svd.singularValues().minCoeff();
    q.sigma_max = svd.singularValues().maxCoeff();
    double fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    q.volume = svd.singularValues().prod() / fact;
  }
  q.aspect = q.sigma_min > 0 ? q.sigma_max / q.sigma_min
                             : std::numeric_limits<double>::infinity();
  q.general_position = q.sigma_min > 1e-10 * q.sigma_max;
  return q;
}

double param_midpoint(double t0, double t1) {
  double d = t1 - t0;
  d -= std::round(d);
  double mid = t0 + 0.5 * d;
  mid -= std::floor(mid);
  return mid;
}

Eigen::VectorXd chart_point(const Triangulation& t, int simplex,
                            const Eigen::VectorXd& barycentric) {
  if (simplex < 0 || simplex >= t.n_simplices())
    throw DomainError("chart_point: simplex id out of range");
  return t.corner_params[simplex].transpose() * barycentric;
}

Eigen::VectorXd interpolate(const Triangulation& t, const Eigen::MatrixXd& values,
                            int simplex, const Eigen::VectorXd& barycentric) {
  if (simplex < 0 || simplex >= t.n_simplices())
    throw DomainError("interpolate: simplex id out of range");
  if (values.rows() != t.n_vertices())
    throw DomainError("interpolate: values must have one row per vertex");
  if (barycentric.size() != t.k + 1)
    throw DomainError("interpolate: expected k+1 barycentric coordinates");
  double sum = barycentric.sum();
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError("interpolate: barycentric coordinates must sum to 1");
  if (barycentric.minCoeff() < -1e-12)
    throw DomainError("interpolate: barycentric coordinates must be nonnegative");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values.cols());
  for (int i = 0; i <= t.k; ++i)
    out += barycentric[i] * values.row(t.simplices(simplex, i)).transpose();
  return out;
}

namespace {

// (k-1)-facets of a simplex with induced orientation: facet i omits corner
// i; the induced orientation carries the sign (-1)^i.
std::vector<std::pair<std::vector<int>, int>> oriented_facets(
    const Eigen::MatrixXi& simplices, int s) {
  const int kp1 = static_cast<int>(simplices.cols());
  std::vector<std::pair<std::vector<int>, int>> out;
  for (int i = 0; i < kp1; ++i) {
    std::vector<int> f;
    for (int j = 0; j < kp1; ++j)
      if (j != i) f.push_back(simplices(s, j));
    out.emplace_back(std::move(f), i % 2 == 0 ? 1 : -1);
  }
  return out;
}

// Sign of the permutation sorting f; 0 if f has repeats.
int sort_sign(std::vector<int>& f) {
  int sign = 1;
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t j = i + 1; j < f.size(); ++j) {
      if (f[i] == f[j]) return 0;
      if (f[i] > f[j]) { std::swap(f[i], f[j]); sign = -sign; }
    }
  return sign;
}

}  // namespace

void Triangulation::validate() const {
  const int V = n_vertices();
  const int S = n_simplices();
  if (k < 1) throw DomainError("Triangulation: k must be >= 1");
  if (simplices.cols() != k + 1)
    throw DomainError("Triangulation: simplices must have k+1 columns");
  if (static_cast<int>(corner_params.size()) != S)
    throw DomainError("Triangulation: corner_params must have one entry per simplex");
  if (static_cast<int>(bparam_component.size()) != V ||
      static_cast<int>(bparam_t.size()) != V)
    throw DomainError("Triangulation: boundary parameter arrays must have one entry per vertex");

  // Simplices reference valid vertices; charts are nondegenerate and agree
  // with vertex_params up to the chart period in x.
  for (int s = 0; s < S; ++s) {
    if (corner_params[s].rows() != k + 1 || corner_params[s].cols() != k)
      throw DomainError("Triangulation: corner_params[" + std::to_string(s) +
                        "] must be (k+1) x k");
    for (int i = 0; i <= k; ++i) {
      int v = simplices(s, i);
      if (v < 0 || v >= V)
        throw DomainError("Triangulation: simplex " + std::to_string(s) +
                          " references vertex " + std::to_string(v));
      Eigen::RowVectorXd diff = corner_params[s].row(i) - vertex_params.row(v);
      if (chart_period_x > 0) diff[0] -= std::round(diff[0] / chart_period_x) * chart_period_x;
      if (diff.cwiseAbs().maxCoeff() > 1e-9)
        throw DomainError("Triangulation: chart corner of simplex " + std::to_string(s) +
                          " disagrees with vertex " + std::to_string(v) + " parameters");
    }
    if (!simplex_quality(corner_params[s]).general_position)
      throw DomainError("Triangulation: simplex " + std::to_string(s) +
                        " is degenerate in the parameter chart");
  }

  // Facet incidence and orientation consistency.
  std::map<std::vector<int>, std::vector<int>> occ;  // sorted facet -> signs
  for (int s = 0; s < S; ++s)
    for (auto& [f, sign] : oriented_facets(simplices, s)) {
      std::vector<int> key = f;
      int ssign = sort_sign(key);
      if (ssign == 0)
        throw DomainError("Triangulation: simplex " + std::to_string(s) +
                          " has a repeated vertex");
      occ[key].push_back(sign * ssign);
    }

  std::map<std::vector<int>, int> boundary_marked;  // sorted facet -> sign
  for (int b = 0; b < n_boundary_facets(); ++b) {
    std::vector<int> f;
    for (int j = 0; j < k; ++j) f.push_back(boundary_simplices(b, j));
    int ssign = sort_sign(f);
    if (ssign == 0 || boundary_marked.count(f))
      throw DomainError("Triangulation: invalid or duplicate boundary facet " +
                        std::to_string(b));
    boundary_marked[f] = ssign;
  }

  std::set<int> bverts_from_facets;
  for (auto& [f, signs] : occ) {
    if (signs.size() == 2) {
      if (k >= 2 && signs[0] + signs[1] != 0)
        throw DomainError("Triangulation: inconsistent orientation across an interior facet");
      if (boundary_marked.count(f))
        throw DomainError("Triangulation: interior facet listed as boundary");
    } else if (signs.size() == 1) {
      if (!boundary_marked.count(f))
        throw DomainError("Triangulation: unmatched facet not listed as boundary");
      for (int v : f) bverts_from_facets.insert(v);
    } else {
      throw DomainError("Triangulation: facet shared by more than two simplices");
    }
  }

  std::set<int> bverts(boundary_vertices.begin(), boundary_vertices.end());
  if (bverts != bverts_from_facets)
    throw DomainError("Triangulation: boundary_vertices do not match boundary facets");
  for (int v = 0; v < V; ++v) {
    bool on_b = bverts.count(v) > 0;
    if (on_b != (bparam_component[v] >= 0))
      throw DomainError("Triangulation: boundary parameter flags disagree at vertex " +
                        std::to_string(v));
    if (on_b) {
      if (bparam_component[v] >= num_boundary_components)
        throw DomainError("Triangulation: boundary component id out of range at vertex " +
                          std::to_string(v));
      if (!(bparam_t[v] >= 0.0 && bparam_t[v] < 1.0))
        throw DomainError("Triangulation: boundary parameter out of [0,1) at vertex " +
                          std::to_string(v));
    }
  }
}

namespace {

void finalize_vertex_arrays(Triangulation& t,
                            const std::map<int, std::pair<int, double>>& bparams) {
  const int V = t.n_vertices();
  t.bparam_component.assign(V, -1);
  t.bparam_t.assign(V, 0.0);
  t.boundary_vertices.clear();
  for (auto& [v, cp] : bparams) {
    t.bparam_component[v] = cp.first;
    t.bparam_t[v] = cp.second;
    t.boundary_vertices.push_back(v);
  }
}

void copy_charts_from_vertices(Triangulation& t) {
  t.corner_params.assign(t.n_simplices(), Eigen::MatrixXd(t.k + 1, t.k));
  for (int s = 0; s < t.n_simplices(); ++s)
    for (int i = 0; i <= t.k; ++i)
      t.corner_params[s].row(i) = t.vertex_params.row(t.simplices(s, i));
}

}  // namespace

Triangulation build_disk(int n_rings) {
  if (n_rings < 1) throw DomainError("build_disk: n_rings must be >= 1");
  const int n = n_rings;
  auto ring_start = [](int r) { return r == 0 ? 0 : 1 + 3 * r * (r - 1); };
  auto ring_vertex = [&](int r, int j) {
    int cnt = 6 * r;
    return ring_start(r) + ((j % cnt) + cnt) % cnt;
  };

  Triangulation t;
  t.k = 2;
  const int V = 1 + 3 * n * (n + 1);
  t.vertex_params.resize(V, 2);
  t.vertex_params.row(0) << 0.0, 0.0;
  for (int r = 1; r <= n; ++r) {
    double rad = static_cast<double>(r) / n;
    for (int j = 0; j < 6 * r; ++j) {
      double a = 2.0 * M_PI * j / (6.0 * r);
      t.vertex_params.row(ring_start(r) + j) << rad * std::cos(a), rad * std::sin(a);
    }
  }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < 6; ++j)
    tris.push_back({0, ring_vertex(1, j), ring_vertex(1, j + 1)});
  for (int r = 2; r <= n; ++r)
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < r; ++i)
        tris.push_back({ring_vertex(r - 1, s * (r - 1) + i), ring_vertex(r, s * r + i),
                        ring_vertex(r, s * r + i + 1)});
      for (int i = 0; i + 1 < r; ++i)
        tris.push_back({ring_vertex(r - 1, s * (r - 1) + i), ring_vertex(r, s * r + i + 1),
                        ring_vertex(r - 1, s * (r - 1) + i + 1)});
    }
  t.simplices.resize(static_cast<int>(tris.size()), 3);
  for (size_t i = 0; i < tris.size(); ++i)
    t.simplices.row(static_cast<int>(i)) << tris[i][0], tris[i][1], tris[i][2];

  const int nb = 6 * n;
  t.boundary_simplices.resize(nb, 2);
  std::map<int, std::pair<int, double>> bparams;
  for (int j = 0; j < nb; ++j) {
    t.boundary_simplices.row(j) << ring_vertex(n, j), ring_vertex(n, j + 1);
    bparams[ring_vertex(n, j)] = {0, static_cast<double>(j) / nb};
  }
  t.num_boundary_components = 1;
  finalize_vertex_arrays(t, bparams);
  copy_charts_from_vertices(t);
  t.validate();
  return t;
}

Triangulation build_cylinder(int n_around, int n_along) {
  if (n_around < 3 || n_along < 1)
    throw DomainError("build_cylinder: need n_around >= 3, n_along >= 1");
  Triangulation t;
  t.k = 2;
  t.chart_period_x = 1.0;
  const int V = n_around * (n_along + 1);
  t.vertex_params.resize(V, 2);
  auto vid = [&](int row, int col) { return row * n_around + ((col % n_around) + n_around) % n_around; };
  for (int i = 0; i <= n_along; ++i)
    for (int j = 0; j < n_around; ++j)
      t.vertex_params.row(vid(i, j)) << static_cast<double>(j) / n_around,
          static_cast<double>(i) / n_along;

  t.simplices.resize(2 * n_around * n_along, 3);
  t.corner_params.assign(t.simplices.rows(), Eigen::MatrixXd(3, 2));
  auto chart = [&](int row, int col) {
    // Unwrapped chart coordinate: col may equal n_around at the seam.
    return Eigen::RowVector2d(static_cast<double>(col) / n_around,
                              static_cast<double>(row) / n_along);
  };
  int s = 0;
  for (int i = 0; i < n_along; ++i)
    for (int j = 0; j < n_around; ++j) {
      int a = vid(i, j), b = vid(i, j + 1), c = vid(i + 1, j + 1), d = vid(i + 1, j);
      t.simplices.row(s) << a, b, c;
      t.corner_params[s].row(0) = chart(i, j);
      t.corner_params[s].row(1) = chart(i, j + 1);
      t.corner_params[s].row(2) = chart(i + 1, j + 1);
      ++s;
      t.simplices.row(s) << a, c, d;
      t.corner_params[s].row(0) = chart(i, j);
      t.corner_params[s].row(1) = chart(i + 1, j + 1);
      t.corner_params[s].row(2) = chart(i + 1, j);
      ++s;
    }

  t.boundary_simplices.resize(2 * n_around, 2);
  std::map<int, std::pair<int, double>> bparams;
  for (int j = 0; j < n_around; ++j) {
    t.boundary_simplices.row(j) << vid(0, j), vid(0, j + 1);
    bparams[vid(0, j)] = {0, static_cast<double>(j) / n_around};
    // Top boundary is traversed in reverse, as induced by triangle
    // orientation.
    t.boundary_simplices.row(n_around + j) << vid(n_along, j + 1), vid(n_along, j);
    bparams[vid(n_along, j)] = {1, static_cast<double>(j) / n_around};
  }
  t.num_boundary_components = 2;
  finalize_vertex_arrays(t, bparams);
  t.validate();
  return t;
}

Triangulation subdivide_4to1(const Triangulation& t, RefinementMap* map) {
  const int V = t.n_vertices();
  const int S = t.n_simplices();
  const int k = t.k;

  // Assign ids to edge midpoints: coarse vertices keep their ids, each
  // coarse edge gets one new vertex.
  std::map<std::pair<int, int>, int> edge_vertex;
  auto edge_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  int next = V;
  for (int s = 0; s < S; ++s)
    for (int i = 0; i <= k; ++i)
      for (int j = i + 1; j <= k; ++j) {
        auto key = edge_key(t.simplices(s, i), t.simplices(s, j));
        if (!edge_vertex.count(key)) edge_vertex[key] = next++;
      }

  Triangulation f;
  f.k = k;
  f.chart_period_x = t.chart_period_x;
  f.vertex_params.resize(next, k);
  f.vertex_params.topRows(V) = t.vertex_params;
  if (map) {
    map->parent_a.resize(next);
    map->parent_b.resize(next);
    for (int v = 0; v < V; ++v) map->parent_a[v] = map->parent_b[v] = v;
    for (auto& [key, id] : edge_vertex) {
      map->parent_a[id] = key.first;
      map->parent_b[id] = key.second;
    }
  }

  // Representative parameters of edge midpoints, computed in the chart of
  // one incident simplex (charts of the two sides differ only by the x
  // period, so the midpoints agree up to that period).
  std::vector<bool> placed(next, false);
  for (int s = 0; s < S; ++s)
    for (int i = 0; i <= k; ++i)
      for (int j = i + 1; j <= k; ++j) {
        int id = edge_vertex[edge_key(t.simplices(s, i), t.simplices(s, j))];
        if (placed[id]) continue;
        placed[id] = true;
        Eigen::RowVectorXd mid =
            0.5 * (t.corner_params[s].row(i) + t.corner_params[s].row(j));
        if (f.chart_period_x > 0)
          mid[0] -= std::floor(mid[0] / f.chart_period_x) * f.chart_period_x;
        f.vertex_params.row(id) = mid;
      }

  // Children: for k = 2, three corner triangles plus the medial one; for
  // k = 1, two halves.
  if (k == 2) {
    f.simplices.resize(4 * S, 3);
    f.corner_params.assign(4 * S, Eigen::MatrixXd(3, 2));
    for (int s = 0; s < S; ++s) {
      int v0 = t.simplices(s, 0), v1 = t.simplices(s, 1), v2 = t.simplices(s, 2);
      int m01 = edge_vertex[edge_key(v0, v1)];
      int m12 = edge_vertex[edge_key(v1, v2)];
      int m02 = edge_vertex[edge_key(v0, v2)];
      const Eigen::MatrixXd& cp = t.corner_params[s];
      Eigen::RowVector2d p0 = cp.row(0), p1 = cp.row(1), p2 = cp.row(2);
      Eigen::RowVector2d q01 = 0.5 * (p0 + p1), q12 = 0.5 * (p1 + p2), q02 = 0.5 * (p0 + p2);
      auto put = [&](int row, int a, int b, int c, Eigen::RowVector2d pa,
                     Eigen::RowVector2d pb, Eigen::RowVector2d pc) {
        f.simplices.row(row) << a, b, c;
        f.corner_params[row].row(0) = pa;
        f.corner_params[row].row(1) = pb;
        f.corner_params[row].row(2) = pc;
      };
      put(4 * s + 0, v0, m01, m02, p0, q01, q02);
      put(4 * s + 1, m01, v1, m12, q01, p1, q12);
      put(4 * s + 2, m02, m12, v2, q02, q12, p2);
      put(4 * s + 3, m01, m12, m02, q01, q12, q02);
    }
  } else if (k == 1) {
    f.simplices.resize(2 * S, 2);
    f.corner_params.assign(2 * S, Eigen::MatrixXd(2, 1));
    for (int s = 0; s < S; ++s) {
      int v0 = t.simplices(s, 0), v1 = t.simplices(s, 1);
      int m = edge_vertex[edge_key(v0, v1)];
      f.simplices.row(2 * s + 0) << v0, m;
      f.simplices.row(2 * s + 1) << m, v1;
      double p0 = t.corner_params[s](0, 0), p1 = t.corner_params[s](1, 0);
      f.corner_params[2 * s + 0] << p0, 0.5 * (p0 + p1);
      f.corner_params[2 * s + 1] << 0.5 * (p0 + p1), p1;
    }
  } else {
    throw DomainError("subdivide_4to1: only k = 1 and k = 2 are supported");
  }

  // Boundary facets split in two; midpoints inherit the component and take
  // the wrap-aware curve-parameter midpoint.
  std::map<int, std::pair<int, double>> bparams;
  for (int v : t.boundary_vertices) bparams[v] = {t.bparam_component[v], t.bparam_t[v]};
  if (k == 2) {
    f.boundary_simplices.resize(2 * t.n_boundary_facets(), 2);
    for (int b = 0; b < t.n_boundary_facets(); ++b) {
      int u = t.boundary_simplices(b, 0), v = t.boundary_simplices(b, 1);
      int m = edge_vertex[edge_key(u, v)];
      if (t.bparam_component[u] != t.bparam_component[v])
        throw DomainError("subdivide_4to1: boundary edge spans two components");
      bparams[m] = {t.bparam_component[u], param_midpoint(t.bparam_t[u], t.bparam_t[v])};
      f.boundary_simplices.row(2 * b + 0) << u, m;
      f.boundary_simplices.row(2 * b + 1) << m, v;
    }
  } else {
    f.boundary_simplices = t.boundary_simplices;
  }
  f.num_boundary_components = t.num_boundary_components;
  finalize_vertex_arrays(f, bparams);
  f.validate();
  return f;
}

}  // namespace minsurf
