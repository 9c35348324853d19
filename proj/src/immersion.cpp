#include "minsurf/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace minsurf {

void DiscreteImmersion::check_sizes() const {
  if (!mesh) throw DomainError("DiscreteImmersion: missing mesh");
  if (positions.rows() != mesh->n_vertices())
    throw DomainError("DiscreteImmersion: positions must have one row per vertex");
  if (positions.cols() < mesh->k)
    throw DomainError("DiscreteImmersion: ambient dimension below k");
}

Eigen::MatrixXd DiscreteImmersion::simplex_positions(int s) const {
  const Triangulation& t = *mesh;
  Eigen::MatrixXd p(t.k + 1, positions.cols());
  for (int i = 0; i <= t.k; ++i) p.row(i) = positions.row(t.simplices(s, i));
  return p;
}

Matrix differential(const DiscreteImmersion& f, int s) {
  const Triangulation& t = *f.mesh;
  if (s < 0 || s >= t.n_simplices()) throw DomainError("differential: simplex out of range");
  const int k = t.k, m = f.m();
  Matrix p(k, k), q(m, k);
  for (int i = 0; i < k; ++i) {
    p.col(i) = (t.corner_params[s].row(i + 1) - t.corner_params[s].row(0)).transpose();
    q.col(i) = (f.positions.row(t.simplices(s, i + 1)) - f.positions.row(t.simplices(s, 0)))
                   .transpose();
  }
  return q * p.inverse();
}

namespace {

// Owning simplex and local corner indices of each boundary facet.
struct FacetOwner {
  int simplex;
  std::vector<int> local;
};

std::vector<FacetOwner> boundary_owners(const Triangulation& t) {
  std::map<std::vector<int>, int> lookup;
  for (int b = 0; b < t.n_boundary_facets(); ++b) {
    std::vector<int> key;
    for (int j = 0; j < t.k; ++j) key.push_back(t.boundary_simplices(b, j));
    std::sort(key.begin(), key.end());
    lookup[key] = b;
  }
  std::vector<FacetOwner> owners(t.n_boundary_facets(), {-1, {}});
  for (int s = 0; s < t.n_simplices(); ++s)
    for (int omit = 0; omit <= t.k; ++omit) {
      std::vector<int> key;
      for (int j = 0; j <= t.k; ++j)
        if (j != omit) key.push_back(t.simplices(s, j));
      std::sort(key.begin(), key.end());
      auto it = lookup.find(key);
      if (it == lookup.end()) continue;
      FacetOwner& fo = owners[it->second];
      if (fo.simplex >= 0) continue;
      fo.simplex = s;
      // Local corner index of each facet vertex, in facet order.
      for (int j = 0; j < t.k; ++j) {
        int v = t.boundary_simplices(it->second, j);
        for (int c = 0; c <= t.k; ++c)
          if (t.simplices(s, c) == v) { fo.local.push_back(c); break; }
      }
    }
  for (auto& fo : owners)
    if (fo.simplex < 0)
      throw DomainError("boundary facet without an owning simplex");
  return owners;
}

Matrix boundary_differential_impl(const DiscreteImmersion& f, const FacetOwner& fo,
                                  int facet, const Triangulation& t) {
  const int k = t.k, m = f.m();
  Matrix q(m, k - 1);
  Matrix pk(k, k - 1);
  for (int i = 0; i + 1 < k; ++i) {
    pk.col(i) = (t.corner_params[fo.simplex].row(fo.local[i + 1]) -
                 t.corner_params[fo.simplex].row(fo.local[0]))
                    .transpose();
    q.col(i) = (f.positions.row(t.boundary_simplices(facet, i + 1)) -
                f.positions.row(t.boundary_simplices(facet, 0)))
                   .transpose();
  }
  // Arclength chart on the facet: for k = 2 the facet is an edge and the
  // 1-d chart length is the parameter-space edge length.
  if (k == 2) {
    double len = pk.col(0).norm();
    if (len <= 0) throw DomainError("boundary facet degenerate in parameters");
    return q / len;
  }
  throw DomainError("boundary_differential: only k = 2 has boundary differentials");
}

}  // namespace

Matrix boundary_differential(const DiscreteImmersion& f, int b) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  if (b < 0 || b >= t.n_boundary_facets())
    throw DomainError("boundary_differential: facet out of range");
  auto owners = boundary_owners(t);
  return boundary_differential_impl(f, owners[b], b, t);
}

PullbackField pullback(const DiscreteImmersion& f) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  PullbackField out;
  out.gram.reserve(t.n_simplices());
  for (int s = 0; s < t.n_simplices(); ++s) {
    if (!simplex_quality(f.simplex_positions(s)).general_position) {
      std::ostringstream os;
      os << "pullback: simplex " << s << " is degenerate (not in general position)";
      throw DomainError(os.str());
    }
    Matrix d = differential(f, s);
    Matrix g = d.transpose() * d;
    out.gram.push_back(0.5 * (g + g.transpose()));
  }
  return out;
}

static void check_same_mesh(const DiscreteImmersion& f, const DiscreteImmersion& h,
                            const char* name) {
  f.check_sizes();
  h.check_sizes();
  if (f.m() != h.m()) throw DomainError(std::string(name) + ": ambient dimension mismatch");
  if (f.mesh == h.mesh) return;
  if (f.mesh->k != h.mesh->k || f.mesh->simplices != h.mesh->simplices ||
      f.mesh->boundary_simplices != h.mesh->boundary_simplices)
    throw DomainError(std::string(name) + ": immersions live on different meshes");
}

ImmersionDistance dist_imm(const DiscreteImmersion& f, const DiscreteImmersion& h) {
  check_same_mesh(f, h, "dist_imm");
  const Triangulation& t = *f.mesh;
  ImmersionDistance d;
  for (int v = 0; v < t.n_vertices(); ++v) {
    double dv = (f.positions.row(v) - h.positions.row(v)).norm();
    d.sup_pos = std::max(d.sup_pos, dv);
    if (t.is_boundary_vertex(v)) d.b_sup_pos = std::max(d.b_sup_pos, dv);
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    Matrix df = differential(f, s), dh = differential(h, s);
    Matrix gf = df.transpose() * df, gh = dh.transpose() * dh;
    d.sup_metric =
        std::max(d.sup_metric, dist_p(0.5 * (gf + gf.transpose()), 0.5 * (gh + gh.transpose())));
    d.sup_ray = std::max(d.sup_ray, dist_ray_sup(df, dh));
  }
  if (t.k >= 2) {
    auto owners = boundary_owners(t);
    for (int b = 0; b < t.n_boundary_facets(); ++b) {
      Matrix df = boundary_differential_impl(f, owners[b], b, t);
      Matrix dh = boundary_differential_impl(h, owners[b], b, t);
      Matrix gf = df.transpose() * df, gh = dh.transpose() * dh;
      d.b_sup_metric = std::max(d.b_sup_metric, dist_p(gf, gh));
      d.b_sup_ray = std::max(d.b_sup_ray, dist_ray_sup(df, dh));
    }
  }
  return d;
}

bool is_automorphism(const Triangulation& t, const std::vector<int>& phi) {
  const int V = t.n_vertices();
  if (static_cast<int>(phi.size()) != V) return false;
  std::vector<int> seen(V, 0);
  for (int v : phi) {
    if (v < 0 || v >= V || seen[v]) return false;
    seen[v] = 1;
  }
  std::set<std::vector<int>> simplex_set;
  for (int s = 0; s < t.n_simplices(); ++s) {
    std::vector<int> key;
    for (int i = 0; i <= t.k; ++i) key.push_back(t.simplices(s, i));
    std::sort(key.begin(), key.end());
    simplex_set.insert(key);
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    std::vector<int> key;
    for (int i = 0; i <= t.k; ++i) key.push_back(phi[t.simplices(s, i)]);
    std::sort(key.begin(), key.end());
    if (!simplex_set.count(key)) return false;
  }
  std::set<std::vector<int>> bset;
  for (int b = 0; b < t.n_boundary_facets(); ++b) {
    std::vector<int> key;
    for (int i = 0; i < t.k; ++i) key.push_back(t.boundary_simplices(b, i));
    std::sort(key.begin(), key.end());
    bset.insert(key);
  }
  for (int b = 0; b < t.n_boundary_facets(); ++b) {
    std::vector<int> key;
    for (int i = 0; i < t.k; ++i) key.push_back(phi[t.boundary_simplices(b, i)]);
    std::sort(key.begin(), key.end());
    if (!bset.count(key)) return false;
  }
  return true;
}

double dist_shape_upper(const DiscreteImmersion& f, const DiscreteImmersion& h,
                        const std::vector<std::vector<int>>& automorphisms) {
  check_same_mesh(f, h, "dist_shape_upper");
  double best = dist_imm(f, h).total_cross();
  for (const auto& phi : automorphisms) {
    if (!is_automorphism(*f.mesh, phi))
      throw DomainError("dist_shape_upper: supplied map is not a simplicial automorphism");
    DiscreteImmersion hp{h.mesh, Eigen::MatrixXd(h.positions.rows(), h.positions.cols())};
    for (int v = 0; v < f.mesh->n_vertices(); ++v)
      hp.positions.row(v) = h.positions.row(phi[v]);
    best = std::min(best, dist_imm(f, hp).total_cross());
  }
  return best;
}

AprioriResult apriori_membership_discrete(const DiscreteImmersion& f,
                                          const PullbackField& g_ref, double r) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  if (static_cast<int>(g_ref.gram.size()) != t.n_simplices())
    throw DomainError("apriori_membership_discrete: reference field size mismatch");
  AprioriResult res;
  for (int s = 0; s < t.n_simplices(); ++s) {
    if (!simplex_quality(f.simplex_positions(s)).general_position) {
      res.degenerate = true;
      res.worst = std::numeric_limits<double>::infinity();
      res.worst_simplex = s;
      res.member = false;
      return res;
    }
    Matrix d = differential(f, s);
    Matrix g = d.transpose() * d;
    double dp = dist_p(g_ref.gram[s], 0.5 * (g + g.transpose()));
    if (dp > res.worst) {
      res.worst = dp;
      res.worst_simplex = s;
    }
  }
  res.member = res.worst <= r;
  return res;
}

namespace {

// max_s dist_p(g_ref_s, pullback(f)_s), the metric eccentricity of f over
// the reference field.
double field_eccentricity(const DiscreteImmersion& f, const PullbackField& g_ref) {
  const Triangulation& t = *f.mesh;
  double l = 0;
  for (int s = 0; s < t.n_simplices(); ++s) {
    Matrix d = differential(f, s);
    Matrix g = d.transpose() * d;
    l = std::max(l, dist_p(g_ref.gram[s], 0.5 * (g + g.transpose())));
  }
  return l;
}

// Sobolev-type distance of two PL maps over a reference field:
// sup_pos + max_s |(D_f - D_h) L_s^{-1}|_F with L_s^T L_s = g_ref_s.
double w1inf_distance(const DiscreteImmersion& f, const DiscreteImmersion& h,
                      const PullbackField& g_ref) {
  const Triangulation& t = *f.mesh;
  double sup_pos = 0;
  for (int v = 0; v < t.n_vertices(); ++v)
    sup_pos = std::max(sup_pos, (f.positions.row(v) - h.positions.row(v)).norm());
  double sup_diff = 0;
  for (int s = 0; s < t.n_simplices(); ++s) {
    Matrix diff = differential(f, s) - differential(h, s);
    Eigen::LLT<Matrix> llt(g_ref.gram[s]);
    if (llt.info() != Eigen::Success)
      throw DomainError("w1inf distance: reference metric not SPD at simplex " +
                        std::to_string(s));
    Matrix lu = Matrix(llt.matrixL()).transpose();
    Matrix w = lu.transpose().triangularView<Eigen::Lower>().solve(diff.transpose());
    sup_diff = std::max(sup_diff, w.norm());
  }
  return sup_pos + sup_diff;
}

bool all_general_position(const DiscreteImmersion& f) {
  for (int s = 0; s < f.mesh->n_simplices(); ++s)
    if (!simplex_quality(f.simplex_positions(s)).general_position) return false;
  return true;
}

}  // namespace

Certificate certify_immersion_perturbation(const DiscreteImmersion& f,
                                           const DiscreteImmersion& h,
                                           const PullbackField& g_ref) {
  check_same_mesh(f, h, "certify_immersion_perturbation");
  if (static_cast<int>(g_ref.gram.size()) != f.mesh->n_simplices())
    throw DomainError("certify_immersion_perturbation: reference field size mismatch");
  double l = field_eccentricity(f, g_ref);
  double w = w1inf_distance(f, h, g_ref);
  Certificate cert;
  cert.applicable = w < std::exp(-1.5 * l) / 3.0;
  if (!cert.applicable) return cert;
  if (!all_general_position(h))
    throw CertificateViolation(
        "certify_immersion_perturbation: hypothesis holds but h is not an immersion");
  cert.actual = dist_imm(f, h).total();
  // Bound each part of dist_imm separately over the simplices.  The metric
  // part moves by x_s = h#_s - f#_s with exp(l_s) |x_s|_{g_s} <= 7/9 under
  // the hypothesis, and the ray part obeys the pi sqrt(24) |a^+| estimate
  // applied to the whitened differentials.
  const Triangulation& t = *f.mesh;
  double sup_pos = 0;
  for (int v = 0; v < t.n_vertices(); ++v)
    sup_pos = std::max(sup_pos, (f.positions.row(v) - h.positions.row(v)).norm());
  double metric_piece = 0, ray_piece = 0;
  for (int s = 0; s < t.n_simplices(); ++s) {
    Matrix df = differential(f, s), dh = differential(h, s);
    Matrix pf = df.transpose() * df, ph = dh.transpose() * dh;
    Matrix gf = 0.5 * (pf + pf.transpose());
    Matrix gh = 0.5 * (ph + ph.transpose());
    double ls = dist_p(g_ref.gram[s], gf);
    double rs = std::exp(ls) * norm_at(g_ref.gram[s], gh - gf);
    if (!(rs < 1.0)) {
      std::ostringstream os;
      os << "certify_immersion_perturbation: hypothesis holds but simplex " << s
         << " has exp(l_s) |h# - f#|_g = " << rs;
      throw CertificateViolation(os.str());
    }
    metric_piece = std::max(metric_piece, -std::log1p(-rs));
    Matrix lu = chol_upper(g_ref.gram[s], "certify_immersion_perturbation (g_ref)");
    Matrix af = lu.transpose().triangularView<Eigen::Lower>().solve(df.transpose());
    Matrix ah = lu.transpose().triangularView<Eigen::Lower>().solve(dh.transpose());
    Eigen::JacobiSVD<Matrix> svd(af);
    double smin = svd.singularValues().minCoeff();
    double ds = (af - ah).norm();
    if (!(ds < 0.5 * smin)) {
      std::ostringstream os;
      os << "certify_immersion_perturbation: hypothesis holds but simplex " << s
         << " has whitened |df - dh| = " << ds << " against sigma_min = " << smin;
      throw CertificateViolation(os.str());
    }
    ray_piece = std::max(ray_piece, M_PI * std::sqrt(24.0) * ds / smin);
  }
  cert.bound = sup_pos + metric_piece + ray_piece;
  if (violates(cert.actual, cert.bound)) {
    std::ostringstream os;
    os << "certify_immersion_perturbation: dist_imm total " << cert.actual
       << " exceeds the per-part estimate " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

Certificate certify_reverse_bound(const DiscreteImmersion& f, const DiscreteImmersion& h,
                                  const PullbackField& g_ref) {
  check_same_mesh(f, h, "certify_reverse_bound");
  if (static_cast<int>(g_ref.gram.size()) != f.mesh->n_simplices())
    throw DomainError("certify_reverse_bound: reference field size mismatch");
  ImmersionDistance d = dist_imm(f, h);
  Certificate cert;
  cert.applicable = d.sup_metric < 2.5;
  if (!cert.applicable) return cert;
  double l = field_eccentricity(f, g_ref);
  cert.actual = w1inf_distance(f, h, g_ref);
  cert.bound = std::exp(l) * d.total();
  if (violates(cert.actual, cert.bound + std::exp(l) * kRaySolverTol)) {
    std::ostringstream os;
    os << "certify_reverse_bound: |f-h|_W = " << cert.actual
       << " exceeds exp(l) dist_imm total = " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

void validate_on_curve(const DiscreteImmersion& f, const BoundaryCurve& curve,
                       double tol) {
  f.check_sizes();
  const Triangulation& t = *f.mesh;
  if (curve.n_components() != t.num_boundary_components)
    throw DomainError("validate_on_curve: curve component count does not match mesh");
  if (curve.ambient_dim != f.m())
    throw DomainError("validate_on_curve: curve ambient dimension does not match positions");
  for (int v : t.boundary_vertices) {
    Eigen::VectorXd g = curve.value(t.bparam_component[v], t.bparam_t[v]);
    double err = (f.positions.row(v).transpose() - g).norm();
    if (err > tol) {
      std::ostringstream os;
      os << "validate_on_curve: vertex " << v << " is " << err
         << " away from its curve point (tol " << tol << ")";
      throw DomainError(os.str());
    }
  }
}

DiscreteImmersion refine(const DiscreteImmersion& f, const Triangulation& fine,
                         const RefinementMap& map, const BoundaryCurve* curve) {
  f.check_sizes();
  const int vf = fine.n_vertices();
  if (static_cast<int>(map.parent_a.size()) != vf)
    throw DomainError("refine: refinement map does not match fine mesh");
  DiscreteImmersion out;
  out.mesh = std::make_shared<Triangulation>(fine);
  out.positions.resize(vf, f.m());
  for (int v = 0; v < vf; ++v) {
    int a = map.parent_a[v], b = map.parent_b[v];
    if (a == b) {
      out.positions.row(v) = f.positions.row(a);
    } else if (curve && fine.is_boundary_vertex(v)) {
      out.positions.row(v) =
          curve->value(fine.bparam_component[v], fine.bparam_t[v]).transpose();
    } else {
      out.positions.row(v) = 0.5 * (f.positions.row(a) + f.positions.row(b));
    }
  }
  return out;
}

std::vector<std::vector<int>> disk_rotations(int n_rings) {
  auto ring_start = [](int r) { return r == 0 ? 0 : 1 + 3 * r * (r - 1); };
  const int V = 1 + 3 * n_rings * (n_rings + 1);
  std::vector<std::vector<int>> maps;
  for (int step = 1; step < 6; ++step) {
    std::vector<int> phi(V);
    phi[0] = 0;
    for (int r = 1; r <= n_rings; ++r)
      for (int j = 0; j < 6 * r; ++j)
        phi[ring_start(r) + j] = ring_start(r) + (j + step * r) % (6 * r);
    maps.push_back(std::move(phi));
  }
  return maps;
}

std::vector<std::vector<int>> cylinder_rotations(int n_around, int n_along) {
  const int V = n_around * (n_along + 1);
  std::vector<std::vector<int>> maps;
  for (int step = 1; step < n_around; ++step) {
    std::vector<int> phi(V);
    for (int i = 0; i <= n_along; ++i)
      for (int j = 0; j < n_around; ++j)
        phi[i * n_around + j] = i * n_around + (j + step) % n_around;
    maps.push_back(std::move(phi));
  }
  return maps;
}

}  // namespace minsurf
