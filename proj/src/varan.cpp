#include "minsurf/varan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "minsurf/mesh.hpp"

namespace minsurf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double positive_part(double x) { return x > 0 ? x : 0.0; }

// Cutoff exp(t^2 / (t^2 - t)) = exp(t / (t - 1)): one at t = 0, flat zero
// from t = 1 on.
double chi(double t) {
  if (t <= 0) return 1.0;
  if (t >= 1.0 - 1e-12) return 0.0;
  return std::exp(t / (t - 1.0));
}

double dchi(double t) {
  if (t <= 0) return -1.0;
  if (t >= 1.0 - 1e-12) return 0.0;
  double d = t - 1.0;
  return -chi(t) / (d * d);
}

// Wrapped parameter increment, reduced to (-1/2, 1/2]. Boundary facets are
// short pieces of the unit-parameterized loop, so the short way around is
// the right one.
double wrap_half(double d) {
  d -= std::floor(d);
  if (d > 0.5) d -= 1.0;
  return d;
}

double wrap01(double t) {
  t -= std::floor(t);
  if (t >= 1.0) t = 0.0;
  return t;
}

struct BoundarySegment {
  Eigen::VectorXd p0, p1;       // chart coordinates, coherent across a seam
  Eigen::RowVectorXd pos0, pos1;  // PL boundary positions
  int component = 0;
  double t0 = 0, dt = 0;  // curve parameter p0 -> t0, p1 -> t0 + dt
};

std::vector<BoundarySegment> boundary_segments(const DiscreteImmersion& f) {
  const Triangulation& t = *f.mesh;
  std::vector<BoundarySegment> segs(t.n_boundary_facets());
  for (int b = 0; b < t.n_boundary_facets(); ++b) {
    BoundarySegment& s = segs[b];
    int v0 = t.boundary_simplices(b, 0);
    int v1 = t.k >= 2 ? t.boundary_simplices(b, 1) : v0;
    s.p0 = t.vertex_params.row(v0);
    s.p1 = t.vertex_params.row(v1);
    if (t.chart_period_x > 0) {
      double gap = s.p1(0) - s.p0(0);
      s.p1(0) -= t.chart_period_x * std::round(gap / t.chart_period_x);
    }
    s.pos0 = f.positions.row(v0);
    s.pos1 = f.positions.row(v1);
    s.component = t.bparam_component[v0];
    s.t0 = t.bparam_t[v0];
    s.dt = t.k >= 2 ? wrap_half(t.bparam_t[v1] - s.t0) : 0.0;
  }
  return segs;
}

struct NearestHit {
  double dist = kInf;
  int segment = -1;
  double s = 0;               // position along the segment in [0, 1]
  Eigen::VectorXd foot;       // chart coordinates of the closest point
  bool clamped = false;       // nearest feature is an endpoint
};

NearestHit nearest_boundary(const std::vector<BoundarySegment>& segs, double period,
                            const Eigen::VectorXd& x) {
  NearestHit best;
  const int shifts = period > 0 ? 3 : 1;
  for (size_t i = 0; i < segs.size(); ++i) {
    const BoundarySegment& seg = segs[i];
    double base = period > 0 ? std::round((x(0) - seg.p0(0)) / period) : 0.0;
    for (int j = 0; j < shifts; ++j) {
      double shift = (base + (j - 1)) * period;
      Eigen::VectorXd q0 = seg.p0, q1 = seg.p1;
      if (period > 0) {
        q0(0) += shift;
        q1(0) += shift;
      }
      Eigen::VectorXd e = q1 - q0;
      double ee = e.squaredNorm();
      double raw = ee > 0 ? (x - q0).dot(e) / ee : 0.0;
      double s = std::clamp(raw, 0.0, 1.0);
      Eigen::VectorXd foot = q0 + s * e;
      double d = (x - foot).norm();
      if (d < best.dist) {
        best.dist = d;
        best.segment = static_cast<int>(i);
        best.s = s;
        best.foot = foot;
        best.clamped = (s != raw);
      }
    }
  }
  return best;
}

// Chart point of a barycentric weight vector in one simplex.
Eigen::VectorXd chart_of(const Triangulation& t, int s, const Eigen::VectorXd& lambda) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(t.k);
  for (int c = 0; c <= t.k; ++c) x += lambda(c) * t.corner_params[s].row(c).transpose();
  return x;
}

std::vector<Eigen::VectorXd> barycentric_lattice(int k, int q) {
  std::vector<Eigen::VectorXd> pts;
  if (k == 1) {
    for (int i = 0; i <= q; ++i) {
      Eigen::VectorXd l(2);
      l << 1.0 - double(i) / q, double(i) / q;
      pts.push_back(l);
    }
    return pts;
  }
  for (int i = 0; i <= q; ++i) {
    for (int j = 0; i + j <= q; ++j) {
      Eigen::VectorXd l(3);
      l << 1.0 - double(i + j) / q, double(i) / q, double(j) / q;
      pts.push_back(l);
    }
  }
  return pts;
}

void check_same_ground_mesh(const std::shared_ptr<const Triangulation>& a,
                            const std::shared_ptr<const Triangulation>& b,
                            const char* who) {
  if (a == b) return;
  if (!a || !b || a->k != b->k || a->simplices != b->simplices ||
      a->boundary_simplices != b->boundary_simplices)
    throw DomainError(std::string(who) + ": candidates live on different meshes");
}

}  // namespace

DiscreteImmersion sample_op(const SampledImmersion& f) {
  if (!f.mesh || !f.map) throw DomainError("sample_op: empty input");
  const Triangulation& t = *f.mesh;
  DiscreteImmersion out;
  out.mesh = f.mesh;
  out.positions.setZero(t.n_vertices(), f.map->ambient_dim());
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int c = 0; c <= t.k; ++c) {
      Eigen::VectorXd x = t.corner_params[s].row(c).transpose();
      out.positions.row(t.simplices(s, c)) = f.map->value(s, x).transpose();
    }
  }
  for (int s = 0; s < t.n_simplices(); ++s) {
    if (!simplex_quality(out.simplex_positions(s)).general_position) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "sample_op: sampled simplex %d is degenerate; refine the triangulation",
                    s);
      throw DomainError(msg);
    }
  }
  return out;
}

namespace {

class ReconstructedImmersion : public Parameterization {
public:
  ReconstructedImmersion(DiscreteImmersion f, BoundaryCurve curve, double collar_depth)
      : f_(std::move(f)), curve_(std::move(curve)), collar_(collar_depth) {
    const Triangulation& t = *f_.mesh;
    segs_ = boundary_segments(f_);
    period_ = t.chart_period_x;
    diff_.reserve(t.n_simplices());
    for (int s = 0; s < t.n_simplices(); ++s) diff_.push_back(differential(f_, s));
    // Depth normalization: the deepest chart point among vertices and
    // simplex centroids.
    depth_scale_ = 0;
    for (int v = 0; v < t.n_vertices(); ++v) {
      Eigen::VectorXd x = t.vertex_params.row(v);
      depth_scale_ = std::max(depth_scale_, nearest_boundary(segs_, period_, x).dist);
    }
    for (int s = 0; s < t.n_simplices(); ++s) {
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(t.k);
      for (int c = 0; c <= t.k; ++c) centroid += t.corner_params[s].row(c).transpose();
      centroid /= t.k + 1.0;
      depth_scale_ = std::max(depth_scale_, nearest_boundary(segs_, period_, centroid).dist);
    }
    depth_scale_ = std::max(depth_scale_, 1e-30);
  }

  int ambient_dim() const override { return f_.m(); }

  Eigen::VectorXd value(int simplex, const Eigen::VectorXd& x) const override {
    Eigen::VectorXd pl = pl_value(simplex, x);
    NearestHit hit = nearest_boundary(segs_, period_, x);
    double t = hit.dist / (depth_scale_ * collar_);
    if (t >= 1.0 - 1e-12) return pl;
    return pl + chi(t) * correction(hit);
  }

  Eigen::MatrixXd jacobian(int simplex, const Eigen::VectorXd& x) const override {
    Eigen::MatrixXd j = diff_[simplex];
    NearestHit hit = nearest_boundary(segs_, period_, x);
    double t = hit.dist / (depth_scale_ * collar_);
    if (t >= 1.0 - 1e-12) return j;
    Eigen::VectorXd w = correction(hit);
    if (hit.dist > 1e-300) {
      Eigen::RowVectorXd dt_dx =
          ((x - hit.foot) / hit.dist).transpose() / (depth_scale_ * collar_);
      j += dchi(t) * w * dt_dx;
    }
    if (!hit.clamped) {
      // Nearest feature is a segment interior point: the nearest parameter
      // moves with x. In endpoint regions the parameter is frozen and the
      // correction there is zero anyway (boundary vertices sit on the
      // curve).
      const BoundarySegment& seg = segs_[hit.segment];
      Eigen::VectorXd e = seg.p1 - seg.p0;
      double ee = e.squaredNorm();
      if (ee > 0) {
        Eigen::RowVectorXd ds_dx = e.transpose() / ee;
        double tau = wrap01(seg.t0 + hit.s * seg.dt);
        Eigen::VectorXd dw =
            curve_.d1(seg.component, tau) * seg.dt - (seg.pos1 - seg.pos0).transpose();
        j += chi(t) * dw * ds_dx;
      }
    }
    return j;
  }

private:
  Eigen::VectorXd pl_value(int simplex, const Eigen::VectorXd& x) const {
    const Triangulation& t = *f_.mesh;
    Eigen::VectorXd c0 = t.corner_params[simplex].row(0).transpose();
    Eigen::VectorXd base = f_.positions.row(t.simplices(simplex, 0)).transpose();
    return base + diff_[simplex] * (x - c0);
  }

  // gamma minus the PL boundary at the nearest boundary point.
  Eigen::VectorXd correction(const NearestHit& hit) const {
    const BoundarySegment& seg = segs_[hit.segment];
    double tau = wrap01(seg.t0 + hit.s * seg.dt);
    Eigen::VectorXd on_curve = curve_.value(seg.component, tau);
    Eigen::VectorXd on_pl = (seg.pos0 + hit.s * (seg.pos1 - seg.pos0)).transpose();
    return on_curve - on_pl;
  }

  DiscreteImmersion f_;
  BoundaryCurve curve_;
  double collar_;
  double period_ = 0;
  double depth_scale_ = 1;
  std::vector<BoundarySegment> segs_;
  std::vector<Eigen::MatrixXd> diff_;
};

}  // namespace

SampledImmersion reconstruct_op(const DiscreteImmersion& f, const BoundaryCurve& curve,
                                double collar_depth) {
  f.check_sizes();
  if (!(collar_depth > 0 && collar_depth <= 1))
    throw DomainError("reconstruct_op: collar_depth must lie in (0, 1]");
  validate_on_curve(f, curve);
  auto map = std::make_shared<ReconstructedImmersion>(f, curve, collar_depth);

  // The correction must not destroy injectivity anywhere we will integrate.
  const Triangulation& t = *f.mesh;
  QuadratureRule rule = quadrature_rule(t.k, 4);
  for (int s = 0; s < t.n_simplices(); ++s) {
    for (int q = 0; q < rule.nodes.rows(); ++q) {
      Eigen::VectorXd x = chart_of(t, s, rule.nodes.row(q).transpose());
      Eigen::MatrixXd j = map->jacobian(s, x);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
      double smin = svd.singularValues().minCoeff();
      double smax = svd.singularValues().maxCoeff();
      if (!(smin > 1e-12 * smax) || !(smin > 0)) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "reconstruct_op: correction breaks the immersion at simplex %d "
                      "(sigma ratio %.3e)",
                      s, smax > 0 ? smin / smax : 0.0);
        throw DomainError(msg);
      }
    }
  }
  return SampledImmersion{f.mesh, map, 4};
}

ErrorReport consistency_errors(const std::vector<SampledImmersion>& smooth_candidates,
                               const std::vector<DiscreteImmersion>& discrete_candidates,
                               const BoundaryCurve& curve, double collar_depth) {
  if (smooth_candidates.empty() || discrete_candidates.empty())
    throw DomainError("consistency_errors: candidate lists must be nonempty");
  ErrorReport rep;

  struct SmoothEntry {
    double value;    // F(a)
    double sampled;  // F_T(S_T a)
  };
  struct DiscreteEntry {
    double value;          // F_T(b)
    double reconstructed;  // F(reconstruct b)
  };
  std::vector<SmoothEntry> smooth_ok;
  std::vector<DiscreteEntry> discrete_ok;

  auto note = [&rep](const std::string& what) { rep.failure_notes.push_back(what); };

  for (size_t i = 0; i < smooth_candidates.size(); ++i) {
    try {
      double fa = smooth_volume(smooth_candidates[i]);
      double fts = discrete_volume(sample_op(smooth_candidates[i]));
      rep.delta_sampling = std::max(rep.delta_sampling, positive_part(fts - fa));
      smooth_ok.push_back({fa, fts});
    } catch (const DomainError& e) {
      note("smooth candidate " + std::to_string(i) + ": " + e.what());
    }
  }
  for (size_t i = 0; i < discrete_candidates.size(); ++i) {
    try {
      double ftb = discrete_volume(discrete_candidates[i]);
      double frb =
          smooth_volume(reconstruct_op(discrete_candidates[i], curve, collar_depth));
      rep.delta_reconstruction =
          std::max(rep.delta_reconstruction, positive_part(frb - ftb));
      discrete_ok.push_back({ftb, frb});
    } catch (const DomainError& e) {
      note("discrete candidate " + std::to_string(i) + ": " + e.what());
    }
  }

  rep.inf_discrete = kInf;
  rep.inf_smooth = kInf;
  double inf_sampled = kInf, inf_reconstructed = kInf;
  for (const auto& s : smooth_ok) {
    rep.inf_smooth = std::min(rep.inf_smooth, s.value);
    inf_sampled = std::min(inf_sampled, s.sampled);
  }
  for (const auto& d : discrete_ok) {
    rep.inf_discrete = std::min(rep.inf_discrete, d.value);
    inf_reconstructed = std::min(inf_reconstructed, d.reconstructed);
  }
  if (!std::isfinite(rep.inf_discrete) || !std::isfinite(rep.inf_smooth)) {
    rep.inf_gap = kInf;
    note("no usable candidates on one side; infimum comparison skipped");
    return rep;
  }
  rep.inf_gap = std::abs(rep.inf_discrete - rep.inf_smooth);

  const double slack = 1e-9 * std::max(1.0, std::abs(rep.inf_smooth));
  if (rep.inf_gap > std::max(rep.delta_sampling, rep.delta_reconstruction) + slack) {
    ++rep.assertion_failures;
    note("infimum gap exceeds max(delta_S, delta_R)");
  }

  // Level-set inclusions: sampling must send near-minimizers among the
  // smooth candidates to near-minimizers among their sampled images, with
  // the level relaxed by delta_total; reconstruction symmetrically.
  const double delta = rep.delta_total();
  for (double rho : {0.0, delta, 2.0 * delta}) {
    for (const auto& s : smooth_ok) {
      if (s.value <= rep.inf_smooth + rho + slack &&
          s.sampled > inf_sampled + rho + delta + slack) {
        ++rep.assertion_failures;
        note("sampling broke a minimizer-set inclusion");
      }
    }
    for (const auto& d : discrete_ok) {
      if (d.value <= rep.inf_discrete + rho + slack &&
          d.reconstructed > inf_reconstructed + rho + delta + slack) {
        ++rep.assertion_failures;
        note("reconstruction broke a minimizer-set inclusion");
      }
    }
  }
  return rep;
}

ErrorReport proximity_errors(const std::vector<SampledImmersion>& smooth_candidates,
                             const std::vector<DiscreteImmersion>& discrete_candidates,
                             const BoundaryCurve& curve, double collar_depth,
                             int lift_levels) {
  if (smooth_candidates.empty() || discrete_candidates.empty())
    throw DomainError("proximity_errors: candidate lists must be nonempty");
  if (lift_levels < 0) throw DomainError("proximity_errors: lift_levels must be >= 0");
  std::shared_ptr<const Triangulation> base = smooth_candidates[0].mesh;
  for (const auto& a : smooth_candidates)
    check_same_ground_mesh(base, a.mesh, "proximity_errors");
  for (const auto& b : discrete_candidates)
    check_same_ground_mesh(base, b.mesh, "proximity_errors");

  std::vector<std::shared_ptr<const Triangulation>> chain{base};
  std::vector<RefinementMap> maps;
  for (int l = 0; l < lift_levels; ++l) {
    RefinementMap rm;
    auto fine = std::make_shared<Triangulation>(subdivide_4to1(*chain.back(), &rm));
    chain.push_back(fine);
    maps.push_back(std::move(rm));
  }
  const int children = base->k == 2 ? 4 : 2;

  auto lift_discrete = [&](DiscreteImmersion f) {
    for (int l = 0; l < lift_levels; ++l) {
      f = refine(f, *chain[l + 1], maps[l], nullptr);
      f.mesh = chain[l + 1];
    }
    return f;
  };
  auto lift_map = [&](const SampledImmersion& f) {
    std::shared_ptr<const Parameterization> map = f.map;
    for (int l = 0; l < lift_levels; ++l)
      map = std::make_shared<AncestorMap>(map, children);
    return SampledImmersion{chain.back(), map, f.quad_degree};
  };

  ErrorReport rep;
  auto note = [&rep](const std::string& what) { rep.failure_notes.push_back(what); };

  for (size_t i = 0; i < smooth_candidates.size(); ++i) {
    try {
      DiscreteImmersion fine_proxy = sample_op(lift_map(smooth_candidates[i]));
      SampledImmersion back =
          reconstruct_op(sample_op(smooth_candidates[i]), curve, collar_depth);
      DiscreteImmersion back_fine = sample_op(lift_map(back));
      rep.eps_sampling =
          std::max(rep.eps_sampling, dist_imm(fine_proxy, back_fine).total_cross());
    } catch (const DomainError& e) {
      note("smooth candidate " + std::to_string(i) + ": " + e.what());
    }
  }
  for (size_t i = 0; i < discrete_candidates.size(); ++i) {
    try {
      DiscreteImmersion lifted = lift_discrete(discrete_candidates[i]);
      SampledImmersion corrected =
          reconstruct_op(discrete_candidates[i], curve, collar_depth);
      DiscreteImmersion corrected_fine = sample_op(lift_map(corrected));
      rep.eps_reconstruction = std::max(
          rep.eps_reconstruction, dist_imm(lifted, corrected_fine).total_cross());
    } catch (const DomainError& e) {
      note("discrete candidate " + std::to_string(i) + ": " + e.what());
    }
  }
  return rep;
}

double rho_estimate(const Triangulation& t, const BoundaryCurve& curve,
                    const std::vector<SampledImmersion>& probes) {
  (void)curve;  // the comparison is purely chart-side
  if (probes.empty()) throw DomainError("rho_estimate: no probes");
  const int q = 4;
  auto lattice = barycentric_lattice(t.k, q);
  double rho = 0;
  int used = 0;

  for (size_t pi = 0; pi < probes.size(); ++pi) {
    const SampledImmersion& probe = probes[pi];
    if (!probe.mesh || probe.mesh->k != t.k || probe.mesh->simplices != t.simplices ||
        probe.mesh->boundary_simplices != t.boundary_simplices)
      throw DomainError("rho_estimate: probe lives on a different mesh");
    // Interpolation error against the plain PL interpolant of the vertex
    // samples (no boundary correction; that operator is measured by the
    // epsilons instead).
    auto back = std::make_shared<PLMap>(sample_op(probe));
    double val_err = 0, jac_err = 0, jac_norm = 0, hess_norm = 0;

    for (int s = 0; s < t.n_simplices(); ++s) {
      double edge_scale = 0;
      for (int c = 1; c <= t.k; ++c)
        edge_scale = std::max(
            edge_scale, (t.corner_params[s].row(c) - t.corner_params[s].row(0)).norm());
      const double h = 1e-5 * std::max(edge_scale, 1e-12);
      for (const auto& lambda : lattice) {
        Eigen::VectorXd x = chart_of(t, s, lambda);
        Eigen::VectorXd fv = probe.map->value(s, x);
        Eigen::MatrixXd fj = probe.map->jacobian(s, x);
        val_err = std::max(val_err, (fv - back->value(s, x)).norm());
        jac_err = std::max(jac_err, (fj - back->jacobian(s, x)).norm());
        jac_norm = std::max(jac_norm, fj.norm());
        for (int d = 0; d < t.k; ++d) {
          Eigen::VectorXd xp = x, xm = x;
          xp(d) += h;
          xm(d) -= h;
          hess_norm = std::max(
              hess_norm,
              (probe.map->jacobian(s, xp) - probe.map->jacobian(s, xm)).norm() / (2 * h));
        }
      }
    }

    // Boundary restriction: the same comparison along each boundary facet,
    // with the derivative taken in the facet direction.
    if (t.k == 2) {
      for (int b = 0; b < t.n_boundary_facets(); ++b) {
        int v0 = t.boundary_simplices(b, 0), v1 = t.boundary_simplices(b, 1);
        int owner = -1;
        for (int s = 0; s < t.n_simplices() && owner < 0; ++s) {
          bool has0 = false, has1 = false;
          for (int c = 0; c <= t.k; ++c) {
            if (t.simplices(s, c) == v0) has0 = true;
            if (t.simplices(s, c) == v1) has1 = true;
          }
          if (has0 && has1) owner = s;
        }
        if (owner < 0) continue;
        Eigen::VectorXd q0(2), q1(2);
        for (int c = 0; c <= t.k; ++c) {
          if (t.simplices(owner, c) == v0) q0 = t.corner_params[owner].row(c).transpose();
          if (t.simplices(owner, c) == v1) q1 = t.corner_params[owner].row(c).transpose();
        }
        Eigen::VectorXd e = q1 - q0;
        double len = e.norm();
        if (!(len > 0)) continue;
        Eigen::VectorXd ehat = e / len;
        for (int j = 0; j <= 4; ++j) {
          Eigen::VectorXd x = q0 + (j / 4.0) * e;
          Eigen::VectorXd fv = probe.map->value(owner, x);
          Eigen::MatrixXd fj = probe.map->jacobian(owner, x);
          val_err = std::max(val_err, (fv - back->value(owner, x)).norm());
          jac_err = std::max(
              jac_err, ((fj - back->jacobian(owner, x)) * ehat).norm());
          jac_norm = std::max(jac_norm, (fj * ehat).norm());
        }
      }
    }

    double denom = std::max(jac_norm, hess_norm);
    if (!(denom > 1e-14)) continue;  // excluded: derivative-free probe
    rho = std::max(rho, std::max(val_err, jac_err) / denom);
    ++used;
  }
  if (used == 0) throw DomainError("rho_estimate: all probes excluded (zero derivative)");
  return rho;
}

void FiniteMetricSet::validate() const {
  if (dist.rows() != dist.cols()) throw DomainError("FiniteMetricSet: table not square");
  for (int i = 0; i < size(); ++i) {
    if (std::abs(dist(i, i)) > 1e-12)
      throw DomainError("FiniteMetricSet: nonzero self-distance");
    for (int j = 0; j < size(); ++j) {
      if (dist(i, j) < -1e-15) throw DomainError("FiniteMetricSet: negative distance");
      if (std::abs(dist(i, j) - dist(j, i)) > 1e-12 * std::max(1.0, std::abs(dist(i, j))))
        throw DomainError("FiniteMetricSet: asymmetric table");
    }
  }
}

namespace {

void check_subset(const FiniteMetricSet& space, const std::vector<int>& a,
                  const char* who) {
  for (int x : a)
    if (x < 0 || x >= space.size())
      throw DomainError(std::string(who) + ": point id out of range");
}

double dist_to_set(const FiniteMetricSet& space, int x, const std::vector<int>& a) {
  double d = kInf;
  for (int y : a) d = std::min(d, space.dist(x, y));
  return d;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Limits over the tail window, quantified over the test radius grid.
SetLimits limits_core(const FiniteMetricSet& space,
                      const std::vector<std::vector<int>>& sets) {
  const int n = static_cast<int>(sets.size());
  const int window = std::min(n, std::max(2, n / 4));
  SetLimits out;
  for (int x = 0; x < space.size(); ++x) {
    bool in_li = true, in_ls = true;
    for (int j = 0; j <= 40 && (in_li || in_ls); ++j) {
      const double eps = std::ldexp(1.0, -j);
      bool all = true, some = false;
      for (int i = n - window; i < n; ++i) {
        double d = dist_to_set(space, x, sets[static_cast<size_t>(i)]);
        all = all && d <= eps;
        some = some || d <= eps;
      }
      in_li = in_li && all;
      in_ls = in_ls && some;
    }
    if (in_li) out.li.push_back(x);
    if (in_ls) out.ls.push_back(x);
  }
  return out;
}

}  // namespace

std::vector<int> thicken(const FiniteMetricSet& space, const std::vector<int>& subset,
                         double r) {
  space.validate();
  check_subset(space, subset, "thicken");
  if (r < 0) throw DomainError("thicken: radius must be nonnegative");
  std::vector<int> out;
  for (int x = 0; x < space.size(); ++x)
    if (dist_to_set(space, x, subset) <= r) out.push_back(x);
  return out;
}

SetLimits finite_limits(const FiniteMetricSet& space,
                        const std::vector<std::vector<int>>& sets,
                        const std::vector<double>& radius_schedule) {
  space.validate();
  if (sets.empty()) throw DomainError("finite_limits: empty sequence");
  if (radius_schedule.size() != sets.size())
    throw DomainError("finite_limits: schedule length mismatch");
  for (const auto& a : sets) check_subset(space, a, "finite_limits");

  double rmax = 0;
  for (double r : radius_schedule) {
    if (r < 0) throw DomainError("finite_limits: negative thickening radius");
    rmax = std::max(rmax, r);
  }
  const size_t quarter = std::max<size_t>(1, radius_schedule.size() / 4);
  double first_min = kInf, last_max = 0;
  for (size_t i = 0; i < quarter; ++i) first_min = std::min(first_min, radius_schedule[i]);
  for (size_t i = radius_schedule.size() - quarter; i < radius_schedule.size(); ++i)
    last_max = std::max(last_max, radius_schedule[i]);
  if (rmax > 0 && !(last_max < first_min))
    throw DomainError("finite_limits: radius schedule does not decay");

  SetLimits plain = limits_core(space, sets);
  for (int x : plain.li)
    if (!std::binary_search(plain.ls.begin(), plain.ls.end(), x))
      throw CertificateViolation("finite_limits: inner limit escaped the outer limit");

  std::vector<std::vector<int>> thickened(sets.size());
  for (size_t i = 0; i < sets.size(); ++i)
    thickened[i] = thicken(space, sets[i], radius_schedule[i]);
  SetLimits fat = limits_core(space, thickened);
  if (fat.li != plain.li || fat.ls != plain.ls)
    throw CertificateViolation(
        "finite_limits: limits changed under vanishing thickenings");
  return plain;
}

double hausdorff_distance(const FiniteMetricSet& space, const std::vector<int>& a,
                          const std::vector<int>& b) {
  space.validate();
  if (a.empty() || b.empty()) throw DomainError("hausdorff_distance: empty set");
  check_subset(space, a, "hausdorff_distance");
  check_subset(space, b, "hausdorff_distance");
  double d = 0;
  for (int x : a) d = std::max(d, dist_to_set(space, x, b));
  for (int y : b) d = std::max(d, dist_to_set(space, y, a));
  return d;
}

std::vector<int> pushforward_argmin(const std::vector<std::pair<int, double>>& values,
                                    const std::map<int, int>& fibers, double rho) {
  if (values.empty()) throw DomainError("pushforward_argmin: no values");
  if (std::isnan(rho) || rho < 0)
    throw DomainError("pushforward_argmin: rho must be nonnegative or infinite");
  std::map<int, double> class_min;
  double global = kInf;
  for (const auto& [id, v] : values) {
    if (!std::isfinite(v)) throw DomainError("pushforward_argmin: nonfinite value");
    auto it = fibers.find(id);
    if (it == fibers.end())
      throw DomainError("pushforward_argmin: element without a class");
    auto [slot, fresh] = class_min.try_emplace(it->second, v);
    if (!fresh) slot->second = std::min(slot->second, v);
    global = std::min(global, v);
  }
  std::vector<int> result;
  for (const auto& [cls, v] : class_min)
    if (std::isinf(rho) || v <= global + rho) result.push_back(cls);

  // The pushforward argmin must be the image of the elementwise argmin.
  std::vector<int> direct;
  for (const auto& [id, v] : values)
    if (std::isinf(rho) || v <= global + rho) direct.push_back(fibers.at(id));
  direct = sorted_unique(direct);
  if (direct != result)
    throw CertificateViolation("pushforward_argmin: fiber minima disagree with image");
  return result;
}

}  // namespace minsurf
