// Command-line front end: solve, refine, metric, consistency,
// converge-study, gradcheck, certify. Exit codes: 0 success, 2 domain
// error (bad input, degenerate data), 3 certificate violation.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minsurf/config.hpp"
#include "minsurf/functional.hpp"
#include "minsurf/mesh_io.hpp"
#include "minsurf/study.hpp"

namespace {

using namespace minsurf;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

DiscreteImmersion load_immersion(const std::string& path) {
  MeshData md = read_mesh(path);
  DiscreteImmersion f;
  f.mesh = std::make_shared<Triangulation>(std::move(md.mesh));
  f.positions = std::move(md.positions);
  f.check_sizes();
  return f;
}

// ---------------------------------------------------------------- solve --

struct SolveArgs {
  std::string mesh_path, domain = "disk", curve_spec, config_path, out_path, trace;
  int rings = 2, around = 8, along = 2;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_solve(const SolveArgs& a) {
  std::shared_ptr<const Triangulation> mesh;
  if (!a.mesh_path.empty()) {
    MeshData md = read_mesh(a.mesh_path);
    mesh = std::make_shared<Triangulation>(std::move(md.mesh));
  } else if (a.domain == "disk") {
    mesh = std::make_shared<Triangulation>(build_disk(a.rings));
  } else if (a.domain == "cylinder") {
    mesh = std::make_shared<Triangulation>(build_cylinder(a.around, a.along));
  } else {
    throw DomainError("solve: domain must be disk or cylinder");
  }
  BoundaryCurve curve = parse_curve_spec(a.curve_spec);
  SolverConfig cfg;
  if (!a.config_path.empty()) cfg = solver_from_config(load_config(a.config_path), cfg);
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.trace.empty()) cfg.trace_path = a.trace;
  MinimizerSet ms = multistart_minimize(mesh, curve, cfg);
  const SolveResult& best = ms.entries.front();
  std::cout << "value " << num(best.value) << "\n"
            << "grad_norm " << num(best.grad_norm) << "\n"
            << "iterations " << best.iterations << "\n"
            << "minimality " << num(minimality_residual(best.surface)) << "\n"
            << "entries " << ms.entries.size() << "\n"
            << "failed_starts " << ms.failed_starts << "\n"
            << "value_spread " << num(ms.value_spread) << "\n";
  if (!a.out_path.empty()) {
    write_mesh(a.out_path, *mesh, best.surface.positions);
    std::cout << "wrote " << a.out_path << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- refine --

struct RefineArgs {
  std::string mesh_path, out_path, curve_spec;
  int levels = 1;
};

int cmd_refine(const RefineArgs& a) {
  if (a.levels < 1) throw DomainError("refine: levels must be >= 1");
  DiscreteImmersion f = load_immersion(a.mesh_path);
  std::unique_ptr<BoundaryCurve> curve;
  if (!a.curve_spec.empty())
    curve = std::make_unique<BoundaryCurve>(parse_curve_spec(a.curve_spec));
  for (int l = 0; l < a.levels; ++l) {
    RefinementMap rm;
    auto fine = std::make_shared<Triangulation>(subdivide_4to1(*f.mesh, &rm));
    f = refine(f, *fine, rm, curve.get());
    f.mesh = fine;
  }
  write_mesh(a.out_path, *f.mesh, f.positions);
  std::cout << "wrote " << a.out_path << " (" << f.mesh->n_vertices() << " vertices, "
            << f.mesh->n_simplices() << " simplices)\n";
  return 0;
}

// --------------------------------------------------------------- metric --

int cmd_metric(const std::string& pa, const std::string& pb) {
  DiscreteImmersion f = load_immersion(pa);
  DiscreteImmersion h = load_immersion(pb);
  if (f.mesh->k != h.mesh->k || f.mesh->simplices != h.mesh->simplices ||
      f.mesh->boundary_simplices != h.mesh->boundary_simplices)
    throw DomainError("metric: the two files triangulate different meshes");
  h.mesh = f.mesh;
  ImmersionDistance d = dist_imm(f, h);
  std::cout << "sup_pos " << num(d.sup_pos) << "\n"
            << "sup_metric " << num(d.sup_metric) << "\n"
            << "sup_ray " << num(d.sup_ray) << "\n"
            << "b_sup_pos " << num(d.b_sup_pos) << "\n"
            << "b_sup_metric " << num(d.b_sup_metric) << "\n"
            << "b_sup_ray " << num(d.b_sup_ray) << "\n"
            << "total " << num(d.total()) << "\n"
            << "total_cross " << num(d.total_cross()) << "\n";
  return 0;
}

// ---------------------------------------------------------- consistency --

int cmd_consistency(const std::string& mesh_path, const std::string& curve_spec,
                    double collar) {
  DiscreteImmersion f = load_immersion(mesh_path);
  BoundaryCurve curve = parse_curve_spec(curve_spec);
  std::vector<SampledImmersion> smooth = {reconstruct_op(f, curve, collar)};
  std::vector<DiscreteImmersion> discrete = {f};
  ErrorReport er = consistency_errors(smooth, discrete, curve, collar);
  ErrorReport prox = proximity_errors(smooth, discrete, curve, collar, 1);
  double rho = rho_estimate(*f.mesh, curve, smooth);
  std::cout << "delta_sampling " << num(er.delta_sampling) << "\n"
            << "delta_reconstruction " << num(er.delta_reconstruction) << "\n"
            << "delta_total " << num(er.delta_total()) << "\n"
            << "eps_sampling " << num(prox.eps_sampling) << "\n"
            << "eps_reconstruction " << num(prox.eps_reconstruction) << "\n"
            << "rho " << num(rho) << "\n"
            << "inf_discrete " << num(er.inf_discrete) << "\n"
            << "inf_smooth " << num(er.inf_smooth) << "\n"
            << "inf_gap " << num(er.inf_gap) << "\n"
            << "assertion_failures " << er.assertion_failures << "\n";
  for (const std::string& s : er.failure_notes) std::cout << "note " << s << "\n";
  for (const std::string& s : prox.failure_notes) std::cout << "note " << s << "\n";
  return 0;
}

// ------------------------------------------------------- converge-study --

struct StudyArgs {
  std::string config_path, out_dir, trace;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_converge_study(const StudyArgs& a) {
  StudyConfig cfg;
  if (!a.config_path.empty()) cfg = study_from_config(load_config(a.config_path));
  if (a.seed_set) cfg.solver.seed = a.seed;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (!a.trace.empty()) cfg.solver.trace_path = a.trace;
  ConvergenceReport rep = run_converge_study(cfg);
  std::cout << rep.csv;
  if (!cfg.out_dir.empty()) std::cout << "wrote " << cfg.out_dir << "/study.csv\n";
  if (rep.assertion_failures > 0)
    std::cout << "assertion failures: " << rep.assertion_failures << "\n";
  return 0;
}

// ------------------------------------------------------ random instances --

Matrix rand_gauss(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> gauss;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
  return m;
}

Matrix rand_spd(std::mt19937_64& rng, int k) {
  Matrix a = rand_gauss(rng, k, k);
  return a.transpose() * a + 0.3 * Matrix::Identity(k, k);
}

Matrix rand_sym(std::mt19937_64& rng, int k) {
  Matrix a = rand_gauss(rng, k, k);
  return 0.5 * (a + a.transpose());
}

Matrix rand_injective(std::mt19937_64& rng, int m, int k) {
  for (;;) {
    Matrix a = rand_gauss(rng, m, k);
    Eigen::JacobiSVD<Matrix> svd(a);
    if (svd.singularValues()(k - 1) > 0.2) return a;
  }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Smooth graph or tube positions over the chart plus small noise, retried
// until every simplex is in general position.
DiscreteImmersion random_immersion(std::mt19937_64& rng, bool cylinder) {
  DiscreteImmersion f;
  f.mesh = std::make_shared<Triangulation>(cylinder ? build_cylinder(4, 2)
                                                    : build_disk(1));
  const Triangulation& t = *f.mesh;
  for (;;) {
    double a1 = uniform(rng, -0.3, 0.3), a2 = uniform(rng, -0.3, 0.3);
    double ph = uniform(rng, 0, 6.28);
    f.positions.resize(t.n_vertices(), 3);
    for (int v = 0; v < t.n_vertices(); ++v) {
      double x = t.vertex_params(v, 0), y = t.vertex_params(v, 1);
      if (cylinder) {
        double th = 2 * M_PI * x;
        f.positions.row(v) << std::cos(th) * (1 + a1 * y), std::sin(th) * (1 + a1 * y),
            y + a2 * std::sin(th + ph);
      } else {
        f.positions.row(v) << x, y, a1 * std::sin(3 * x + ph) + a2 * x * y;
      }
      for (int c = 0; c < 3; ++c) f.positions(v, c) += uniform(rng, -0.02, 0.02);
    }
    bool ok = true;
    for (int s = 0; s < t.n_simplices() && ok; ++s)
      ok = simplex_quality(f.simplex_positions(s)).general_position;
    if (ok) return f;
  }
}

// Sobolev-type distance used by the immersion perturbation hypothesis:
// position sup plus worst differential gap measured against g_ref.
double norm_w(const DiscreteImmersion& f, const DiscreteImmersion& h,
              const PullbackField& g_ref) {
  double pos = 0;
  for (int v = 0; v < f.positions.rows(); ++v)
    pos = std::max(pos, (f.positions.row(v) - h.positions.row(v)).norm());
  double dif = 0;
  for (int s = 0; s < f.mesh->n_simplices(); ++s) {
    Matrix l = Eigen::LLT<Matrix>(g_ref.gram[s]).matrixL().transpose();
    Matrix gap = (differential(f, s) - differential(h, s)) * l.inverse();
    dif = std::max(dif, gap.norm());
  }
  return pos + dif;
}

// ------------------------------------------------------------- gradcheck --

int cmd_gradcheck(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("gradcheck: n must be >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    DiscreteImmersion f = random_immersion(rng, i % 2 == 1);
    Matrix grad = discrete_volume_gradient(f);
    double scale = std::max(1.0, f.positions.cwiseAbs().maxCoeff());
    double step = 1e-6 * scale;
    Matrix fd = Matrix::Zero(grad.rows(), grad.cols());
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
    double denom = std::max(grad.norm(), 1e-30);
    worst = std::max(worst, (grad - fd).norm() / denom);
  }
  std::cout << "max relative error " << num(worst) << " over " << n << " meshes\n";
  if (worst > 1e-6)
    throw CertificateViolation("gradient mismatch above 1e-6: " + num(worst));
  return 0;
}

// --------------------------------------------------------------- certify --

struct SweepCounts {
  long applicable = 0;
  long violations = 0;
};

template <class Gen>
SweepCounts sweep(int target, Gen make_and_check) {
  SweepCounts s;
  long guard = 0;
  while (s.applicable < target) {
    if (++guard > 100l * target + 1000)
      throw DomainError("certify: instance generator stalled (too few applicable)");
    try {
      if (make_and_check()) ++s.applicable;
    } catch (const CertificateViolation&) {
      ++s.applicable;
      ++s.violations;
    }
  }
  return s;
}

int cmd_certify(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("certify: n must be >= 1");
  std::mt19937_64 rng(seed);
  long total_violations = 0;
  auto report = [&](const char* name, const SweepCounts& s) {
    std::cout << name << ": " << s.applicable << " applicable, " << s.violations
              << " violations\n";
    total_violations += s.violations;
  };

  report("spd perturbation", sweep(n, [&] {
           int k = 1 + int(rng() % 3);
           Matrix b = rand_spd(rng, k), g = rand_spd(rng, k);
           Matrix x = rand_sym(rng, k);
           double nx = norm_at(g, x);
           if (nx < 1e-12) return false;
           x *= uniform(rng, 0.05, 0.95) * std::exp(-dist_p(b, g)) / nx;
           return certify_spd_perturbation(b, g, x).applicable;
         }));

  report("metric perturbation", sweep(n, [&] {
           int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
           Matrix a = rand_injective(rng, m, k);
           Matrix g1 = rand_spd(rng, k);
           double bound = std::exp(-1.5 * dist_p(g1, a.transpose() * a)) / 3.0;
           Matrix e = rand_gauss(rng, m, k);
           Matrix b = a + e * (uniform(rng, 0.05, 0.95) * bound / e.norm());
           return certify_map_perturbation_metric(a, b, g1).applicable;
         }));

  report("ray perturbation", sweep(n, [&] {
           int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
           Matrix a = rand_injective(rng, m, k);
           double bound = 0.5 / pinv_norm(a);
           Matrix e = rand_gauss(rng, m, k);
           Matrix b = a + e * (uniform(rng, 0.05, 0.95) * bound / e.norm());
           return certify_map_perturbation_ray(a, b).applicable;
         }));

  report("linear reverse bound", sweep(n, [&] {
           int k = 1 + int(rng() % 3), m = k + int(rng() % (4 - k));
           Matrix a = rand_injective(rng, m, k);
           Matrix g1 = rand_spd(rng, k);
           Matrix e = rand_gauss(rng, m, k);
           Matrix b = a + e * (uniform(rng, 0.01, 0.2) / e.norm());
           if (!is_injective(b)) return false;
           return reverse_bound_linear(a, b, g1).applicable;
         }));

  report("immersion perturbation", sweep(n, [&] {
           DiscreteImmersion f = random_immersion(rng, rng() % 2 == 0);
           PullbackField pb = pullback(f);
           PullbackField g_ref = pb;
           if (rng() % 2 == 0)
             for (auto& g : g_ref.gram)
               g = geodesic(g, 0.1 * rand_sym(rng, int(g.rows())), 1.0);
           double l = 0;
           for (int s = 0; s < f.mesh->n_simplices(); ++s)
             l = std::max(l, dist_p(g_ref.gram[s], pb.gram[s]));
           DiscreteImmersion h = f;
           h.positions += 0.1 * rand_gauss(rng, h.positions.rows(), 3);
           double w = norm_w(f, h, g_ref);
           if (w < 1e-12) return false;
           double target = uniform(rng, 0.05, 0.95) * std::exp(-1.5 * l) / 3.0;
           h.positions = f.positions + (h.positions - f.positions) * (target / w);
           return certify_immersion_perturbation(f, h, g_ref).applicable;
         }));

  report("immersion reverse bound", sweep(n, [&] {
           DiscreteImmersion f = random_immersion(rng, rng() % 2 == 0);
           DiscreteImmersion h = f;
           h.positions += uniform(rng, 0.001, 0.05) *
                          rand_gauss(rng, h.positions.rows(), 3);
           for (int s = 0; s < f.mesh->n_simplices(); ++s)
             if (!simplex_quality(h.simplex_positions(s)).general_position)
               return false;
           return certify_reverse_bound(f, h, pullback(f)).applicable;
         }));

  report("volume modulus", sweep(n, [&] {
           DiscreteImmersion f = random_immersion(rng, rng() % 2 == 0);
           DiscreteImmersion h = f;
           h.positions += uniform(rng, 0.001, 0.2) *
                          rand_gauss(rng, h.positions.rows(), 3);
           for (int s = 0; s < f.mesh->n_simplices(); ++s)
             if (!simplex_quality(h.simplex_positions(s)).general_position)
               return false;
           return certify_volume_modulus(f, h).applicable;
         }));

  if (total_violations > 0)
    throw CertificateViolation(std::to_string(total_violations) +
                               " certificate violations in the sweep");
  std::cout << "0 violations\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete minimal surfaces with convergence diagnostics"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "minimize area over a boundary curve");
  solve->add_option("--mesh", sa.mesh_path, "input mesh (OBJ/OFF); overrides --domain");
  solve->add_option("--domain", sa.domain, "disk or cylinder");
  solve->add_option("--rings", sa.rings, "disk base resolution");
  solve->add_option("--around", sa.around, "cylinder resolution around");
  solve->add_option("--along", sa.along, "cylinder resolution along");
  solve->add_option("--curve", sa.curve_spec, "boundary curve spec")->required();
  solve->add_option("--config", sa.config_path, "config file with a [solver] section");
  solve->add_option("--seed", sa.seed, "multistart seed")
      ->each([&](const std::string&) { sa.seed_set = true; });
  solve->add_option("--out", sa.out_path, "write the best surface here");
  solve->add_option("--trace", sa.trace, "per-iteration trace CSV");

  RefineArgs ra;
  CLI::App* refine = app.add_subcommand("refine", "4:1 subdivision of a surface");
  refine->add_option("--mesh", ra.mesh_path, "input mesh")->required();
  refine->add_option("--out", ra.out_path, "output mesh")->required();
  refine->add_option("--levels", ra.levels, "number of refinement rounds");
  refine->add_option("--curve", ra.curve_spec,
                     "snap new boundary vertices onto this curve");

  std::string ma, mb;
  CLI::App* metric = app.add_subcommand("metric", "immersion distance between two files");
  metric->add_option("--a", ma, "first surface")->required();
  metric->add_option("--b", mb, "second surface")->required();

  std::string cm, cc;
  double collar = 0.5;
  CLI::App* cons = app.add_subcommand("consistency",
                                      "consistency/proximity report for a surface");
  cons->add_option("--mesh", cm, "solved surface (boundary on the curve)")->required();
  cons->add_option("--curve", cc, "boundary curve spec")->required();
  cons->add_option("--collar", collar, "collar depth of the reconstruction");

  StudyArgs ta;
  CLI::App* study = app.add_subcommand("converge-study",
                                       "refinement convergence experiment");
  study->add_option("--config", ta.config_path, "study config file");
  study->add_option("--seed", ta.seed, "override solver seed")
      ->each([&](const std::string&) { ta.seed_set = true; });
  study->add_option("--out", ta.out_dir, "output directory");
  study->add_option("--trace", ta.trace, "per-iteration trace CSV");

  int gn = 100;
  std::uint64_t gseed = 20260814;
  CLI::App* grad = app.add_subcommand("gradcheck",
                                      "area gradient vs central differences");
  grad->add_option("--n", gn, "number of random meshes");
  grad->add_option("--seed", gseed, "generator seed");

  int cn = 1000;
  std::uint64_t cseed = 20260814;
  CLI::App* cert = app.add_subcommand("certify", "random sweeps of every certificate");
  cert->add_option("--n", cn, "applicable instances per family");
  cert->add_option("--seed", cseed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(sa);
    if (refine->parsed()) return cmd_refine(ra);
    if (metric->parsed()) return cmd_metric(ma, mb);
    if (cons->parsed()) return cmd_consistency(cm, cc, collar);
    if (study->parsed()) return cmd_converge_study(ta);
    if (grad->parsed()) return cmd_gradcheck(gn, gseed);
    if (cert->parsed()) return cmd_certify(cn, cseed);
  } catch (const CertificateViolation& e) {
    std::cerr << "certificate violation: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
