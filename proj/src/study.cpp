#include "minsurf/study.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "minsurf/functional.hpp"
#include "minsurf/mesh_io.hpp"

namespace minsurf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of("/\\");
  bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return has_ext ? path.substr(0, dot) + tag + path.substr(dot) : path + tag;
}

// First word and key=value pairs of a curve spec, for picking the analytic
// reference. parse_curve_spec performs the real validation.
struct SpecView {
  std::string kind;
  std::map<std::string, double> kv;
};

SpecView view_spec(const std::string& spec) {
  SpecView v;
  std::istringstream ss(spec);
  ss >> v.kind;
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    try {
      v.kv[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
    } catch (const std::exception&) {
    }
  }
  return v;
}

// Analytic minimizer usable as a smooth candidate. Only the cylinder case
// qualifies: its chart has straight boundary rows, so every refined
// boundary vertex samples the catenoid exactly on the circles. Disk charts
// are inscribed polygons whose refined boundary vertices leave the circle,
// so no level-independent analytic candidate restricts to that curve there.
std::shared_ptr<const Parameterization> analytic_reference(const StudyConfig& cfg) {
  SpecView v = view_spec(cfg.curve_spec);
  if (cfg.domain == "cylinder" && v.kind == "coaxial-circles" && v.kv.count("r") &&
      v.kv.count("h")) {
    double r = v.kv.at("r"), h = v.kv.at("h");
    if (h > 0 && std::abs(r - std::cosh(h)) <= 1e-9 * std::max(1.0, r))
      return std::make_shared<Catenoid>(h);
  }
  return nullptr;
}

// Closed-form probes with nonvanishing second derivatives for the
// approximation-error estimate. Graphs over the disk chart; periodic tubes
// over the cylinder chart.
class TubeProbe : public Parameterization {
 public:
  int ambient_dim() const override { return 3; }
  Eigen::VectorXd value(int, const Eigen::VectorXd& x) const override {
    const double a = 2 * M_PI * x(0);
    Eigen::VectorXd p(3);
    p << std::cos(a), std::sin(a), x(1) + 0.2 * std::sin(a);
    return p;
  }
  Eigen::MatrixXd jacobian(int, const Eigen::VectorXd& x) const override {
    const double a = 2 * M_PI * x(0);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 2);
    j(0, 0) = -2 * M_PI * std::sin(a);
    j(1, 0) = 2 * M_PI * std::cos(a);
    j(2, 0) = 0.4 * M_PI * std::cos(a);
    j(2, 1) = 1;
    return j;
  }
};

std::vector<SampledImmersion> rho_probes(const StudyConfig& cfg,
                                         std::shared_ptr<const Triangulation> mesh) {
  std::vector<SampledImmersion> probes;
  if (cfg.domain == "disk") {
    probes.push_back({mesh,
                      std::make_shared<GraphSurface>(
                          [](double x, double y) { return 0.5 * (x * x + y * y); },
                          [](double x, double y) { return Eigen::Vector2d(x, y); }),
                      4});
    probes.push_back(
        {mesh,
         std::make_shared<GraphSurface>(
             [](double x, double y) { return 0.25 * std::sin(2 * x + y); },
             [](double x, double y) {
               return Eigen::Vector2d(0.5 * std::cos(2 * x + y),
                                      0.25 * std::cos(2 * x + y));
             }),
         4});
  } else {
    probes.push_back({mesh, std::make_shared<TubeProbe>(), 4});
  }
  return probes;
}

void check_known_keys(const Config& c, const std::string& section,
                      const std::set<std::string>& known) {
  auto it = c.sections.find(section);
  if (it == c.sections.end()) return;
  for (const auto& [key, value] : it->second)
    if (!known.count(key))
      throw DomainError("config: unknown key [" + section + "] " + key);
}

}  // namespace

void StudyConfig::validate() const {
  if (domain != "disk" && domain != "cylinder")
    throw DomainError("study: domain must be disk or cylinder");
  if (levels < 0) throw DomainError("study: levels must be >= 0");
  if (disk_rings < 1 || cyl_around < 3 || cyl_along < 1)
    throw DomainError("study: base mesh resolution too small");
  if (!(apriori_r > 0)) throw DomainError("study: apriori_r must be positive");
  if (!(collar_depth > 0 && collar_depth <= 1))
    throw DomainError("study: collar_depth must lie in (0, 1]");
  solver.validate();
}

SolverConfig solver_from_config(const Config& c, SolverConfig base) {
  check_known_keys(c, "solver",
                   {"method", "grad_tol", "max_iters", "quality_floor", "armijo_c",
                    "multistart", "seed", "trace", "gauge_max_cycles"});
  base.method = parse_method(c.get("solver", "method", method_name(base.method)));
  base.grad_tol = c.get_num("solver", "grad_tol", base.grad_tol);
  base.max_iters = c.get_int("solver", "max_iters", base.max_iters);
  base.quality_floor = c.get_num("solver", "quality_floor", base.quality_floor);
  base.armijo_c = c.get_num("solver", "armijo_c", base.armijo_c);
  base.multistart_count = c.get_int("solver", "multistart", base.multistart_count);
  base.seed = static_cast<std::uint64_t>(
      c.get_num("solver", "seed", static_cast<double>(base.seed)));
  base.trace_path = c.get("solver", "trace", base.trace_path);
  base.gauge_max_cycles = c.get_int("solver", "gauge_max_cycles", base.gauge_max_cycles);
  return base;
}

StudyConfig study_from_config(const Config& c) {
  check_known_keys(c, "study",
                   {"domain", "curve", "levels", "rings", "around", "along", "apriori_r",
                    "collar_depth", "out"});
  StudyConfig cfg;
  cfg.domain = c.get("study", "domain", cfg.domain);
  cfg.curve_spec = c.get("study", "curve", cfg.curve_spec);
  cfg.levels = c.get_int("study", "levels", cfg.levels);
  cfg.disk_rings = c.get_int("study", "rings", cfg.disk_rings);
  cfg.cyl_around = c.get_int("study", "around", cfg.cyl_around);
  cfg.cyl_along = c.get_int("study", "along", cfg.cyl_along);
  cfg.apriori_r = c.get_num("study", "apriori_r", cfg.apriori_r);
  cfg.collar_depth = c.get_num("study", "collar_depth", cfg.collar_depth);
  cfg.out_dir = c.get("study", "out", cfg.out_dir);
  cfg.solver = solver_from_config(c, cfg.solver);
  cfg.validate();
  return cfg;
}

ConvergenceReport run_converge_study(const StudyConfig& cfg) {
  cfg.validate();
  BoundaryCurve curve = parse_curve_spec(cfg.curve_spec);

  std::vector<std::shared_ptr<const Triangulation>> chain;
  std::vector<RefinementMap> maps;
  chain.push_back(std::make_shared<Triangulation>(
      cfg.domain == "disk" ? build_disk(cfg.disk_rings)
                           : build_cylinder(cfg.cyl_around, cfg.cyl_along)));
  for (int n = 0; n < cfg.levels; ++n) {
    RefinementMap rm;
    chain.push_back(std::make_shared<Triangulation>(subdivide_4to1(*chain[n], &rm)));
    maps.push_back(std::move(rm));
  }

  std::shared_ptr<const Parameterization> reference = analytic_reference(cfg);

  ConvergenceReport rep;
  std::vector<MinimizerSet> sets;
  for (int n = 0; n <= cfg.levels; ++n) {
    SolverConfig scfg = cfg.solver;
    if (!scfg.trace_path.empty())
      scfg.trace_path = with_suffix(scfg.trace_path, ".level" + std::to_string(n));
    // Levels are chained by continuation: the previous minimizer, prolonged
    // with new boundary vertices snapped onto the curve, seeds this level.
    // That fixes one layout representative per level out of the gauge orbit
    // of equal-area re-parameterizations, so successive-set distances track
    // the refinement correction instead of unrelated interior re-layouts.
    // The multistart search still covers level 0 and any level whose
    // continuation fails.
    MinimizerSet ms;
    bool continued = false;
    if (n > 0 && !sets.back().entries.empty()) {
      DiscreteImmersion warm = refine(sets.back().entries.front().surface, *chain[n],
                                      maps[n - 1], &curve);
      warm.mesh = chain[n];
      SolverConfig wcfg = scfg;
      wcfg.gauge_max_cycles = 0;
      try {
        SolveResult r = minimize(warm, curve, wcfg);
        if (r.converged) {
          ms.dedup_threshold = 1e-6 * boundary_bbox_diagonal(r.surface);
          ms.entries.push_back(std::move(r));
          continued = true;
        }
      } catch (const DomainError&) {
      }
    }
    if (!continued) {
      try {
        ms = multistart_minimize(chain[n], curve, scfg);
      } catch (const DomainError& e) {
        throw DomainError("study level " + std::to_string(n) + ": " + e.what());
      }
      if (n > 0) ms.failed_starts += 1;
    }
    const SolveResult& best = ms.entries.front();

    LevelReport lr;
    lr.level = n;
    lr.n_vertices = chain[n]->n_vertices();
    lr.n_simplices = chain[n]->n_simplices();
    lr.area = best.value;
    lr.grad_norm = best.grad_norm;
    lr.minimality = minimality_residual(best.surface);
    lr.entries = static_cast<int>(ms.entries.size());
    lr.failed_starts = ms.failed_starts;
    lr.value_spread = ms.value_spread;

    PullbackField chart_metric;
    chart_metric.gram.assign(chain[n]->n_simplices(),
                             Matrix::Identity(chain[n]->k, chain[n]->k));
    AprioriResult ap =
        apriori_membership_discrete(best.surface, chart_metric, cfg.apriori_r);
    lr.apriori_worst =
        ap.degenerate ? std::numeric_limits<double>::infinity() : ap.worst;
    lr.apriori_member = ap.member;

    // Smooth candidates: the corrected reconstruction of the best minimizer
    // (always), and the analytic minimizer when the boundary admits one.
    // Sampling every smooth candidate back into the discrete list ties the
    // two infima together, which is what makes the inf-gap check sharp.
    std::vector<SampledImmersion> smooth;
    ErrorReport er;
    if (reference) smooth.push_back({chain[n], reference, 4});
    try {
      smooth.push_back(reconstruct_op(best.surface, curve, cfg.collar_depth));
    } catch (const DomainError& e) {
      er.failure_notes.push_back(std::string("reconstructing best: ") + e.what());
      smooth.push_back({chain[n], std::make_shared<PLMap>(best.surface), 4});
    }
    std::vector<DiscreteImmersion> discrete;
    for (const SolveResult& e : ms.entries) discrete.push_back(e.surface);
    for (size_t i = 0; i < smooth.size(); ++i) {
      try {
        discrete.push_back(sample_op(smooth[i]));
      } catch (const DomainError& e) {
        er.failure_notes.push_back("sampling smooth candidate " + std::to_string(i) +
                                   ": " + e.what());
      }
    }
    ErrorReport cons = consistency_errors(smooth, discrete, curve, cfg.collar_depth);
    er.delta_sampling = cons.delta_sampling;
    er.delta_reconstruction = cons.delta_reconstruction;
    er.inf_discrete = cons.inf_discrete;
    er.inf_smooth = cons.inf_smooth;
    er.inf_gap = cons.inf_gap;
    er.assertion_failures = cons.assertion_failures;
    er.failure_notes.insert(er.failure_notes.end(), cons.failure_notes.begin(),
                            cons.failure_notes.end());
    ErrorReport prox = proximity_errors(smooth, {best.surface}, curve,
                                        cfg.collar_depth, 1);
    er.eps_sampling = prox.eps_sampling;
    er.eps_reconstruction = prox.eps_reconstruction;
    er.failure_notes.insert(er.failure_notes.end(), prox.failure_notes.begin(),
                            prox.failure_notes.end());
    er.rho = rho_estimate(*chain[n], curve, rho_probes(cfg, chain[n]));
    lr.errors = er;
    rep.assertion_failures += er.assertion_failures;

    rep.levels.push_back(std::move(lr));
    sets.push_back(std::move(ms));
  }

  // Successive minimizer sets compared on the finest mesh. Lifting is plain
  // PL subdivision, which reproduces each surface exactly as a map, so the
  // identity correspondence on the finest mesh gives an upper bound for the
  // set distance between the minimizers themselves.
  auto lift_to_finest = [&](DiscreteImmersion f, int from) {
    for (int l = from; l < cfg.levels; ++l) {
      f = refine(f, *chain[l + 1], maps[l], nullptr);
      f.mesh = chain[l + 1];
    }
    return f;
  };
  std::vector<std::vector<DiscreteImmersion>> lifted(sets.size());
  for (size_t n = 0; n < sets.size(); ++n)
    for (const SolveResult& e : sets[n].entries)
      lifted[n].push_back(lift_to_finest(e.surface, static_cast<int>(n)));

  rep.levels[0].hausdorff_prev = kNaN;
  for (size_t n = 1; n < lifted.size(); ++n) {
    const auto& a = lifted[n - 1];
    const auto& b = lifted[n];
    const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
    FiniteMetricSet space;
    space.dist.setZero(na + nb, na + nb);
    auto at = [&](int i) -> const DiscreteImmersion& {
      return i < na ? a[i] : b[i - na];
    };
    for (int i = 0; i < na + nb; ++i)
      for (int j = i + 1; j < na + nb; ++j) {
        double d = dist_imm(at(i), at(j)).total_cross();
        space.dist(i, j) = d;
        space.dist(j, i) = d;
      }
    std::vector<int> ia(na), ib(nb);
    for (int i = 0; i < na; ++i) ia[i] = i;
    for (int i = 0; i < nb; ++i) ib[i] = na + i;
    rep.levels[n].hausdorff_prev = hausdorff_distance(space, ia, ib);
  }

  std::string csv = "# minsurf converge-study v1\n";
  csv += "# domain=" + cfg.domain + " curve=" + cfg.curve_spec +
         " levels=" + std::to_string(cfg.levels) +
         " seed=" + std::to_string(cfg.solver.seed) + "\n";
  csv +=
      "level,vertices,simplices,area,grad_norm,minimality,entries,failed_starts,"
      "value_spread,apriori_worst,apriori_member,delta_sampling,delta_reconstruction,"
      "delta_total,eps_sampling,eps_reconstruction,eps_total,rho,inf_discrete,"
      "inf_smooth,inf_gap,assertion_failures,hausdorff_prev\n";
  for (const LevelReport& lr : rep.levels) {
    const ErrorReport& er = lr.errors;
    csv += std::to_string(lr.level) + "," + std::to_string(lr.n_vertices) + "," +
           std::to_string(lr.n_simplices) + "," + fmt(lr.area) + "," +
           fmt(lr.grad_norm) + "," + fmt(lr.minimality) + "," +
           std::to_string(lr.entries) + "," + std::to_string(lr.failed_starts) + "," +
           fmt(lr.value_spread) + "," + fmt(lr.apriori_worst) + "," +
           (lr.apriori_member ? "1" : "0") + "," + fmt(er.delta_sampling) + "," +
           fmt(er.delta_reconstruction) + "," + fmt(er.delta_total()) + "," +
           fmt(er.eps_sampling) + "," + fmt(er.eps_reconstruction) + "," +
           fmt(er.eps_total()) + "," + fmt(er.rho) + "," + fmt(er.inf_discrete) + "," +
           fmt(er.inf_smooth) + "," + fmt(er.inf_gap) + "," +
           std::to_string(er.assertion_failures) + "," + fmt(lr.hausdorff_prev) + "\n";
  }
  rep.csv = csv;

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (size_t n = 0; n < sets.size(); ++n)
      write_mesh(cfg.out_dir + "/level" + std::to_string(n) + ".obj", *chain[n],
                 sets[n].entries.front().surface.positions);
    std::ofstream out(cfg.out_dir + "/study.csv", std::ios::binary);
    if (!out) throw DomainError("study: cannot write to " + cfg.out_dir);
    out << csv;
  }
  return rep;
}

}  // namespace minsurf
