#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "minsurf/config.hpp"
#include "minsurf/functional.hpp"
#include "minsurf/mesh_io.hpp"
#include "minsurf/study.hpp"

namespace py = pybind11;
using namespace minsurf;

namespace {

DiscreteImmersion as_immersion(std::shared_ptr<Triangulation> mesh,
                               const Eigen::MatrixXd& positions) {
  DiscreteImmersion f;
  f.mesh = std::move(mesh);
  f.positions = positions;
  f.check_sizes();
  return f;
}

FiniteMetricSet as_space(const Eigen::MatrixXd& dist) {
  FiniteMetricSet space;
  space.dist = dist;
  space.validate();
  return space;
}

py::dict distance_dict(const ImmersionDistance& d) {
  py::dict out;
  out["sup_pos"] = d.sup_pos;
  out["sup_metric"] = d.sup_metric;
  out["sup_ray"] = d.sup_ray;
  out["b_sup_pos"] = d.b_sup_pos;
  out["b_sup_metric"] = d.b_sup_metric;
  out["b_sup_ray"] = d.b_sup_ray;
  out["total"] = d.total();
  out["total_cross"] = d.total_cross();
  return out;
}

}  // namespace

PYBIND11_MODULE(_minsurf, m) {
  m.doc() = "discrete minimal surfaces with convergence diagnostics";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CertificateViolation>(m, "CertificateViolation",
                                               PyExc_RuntimeError);

  py::class_<Triangulation, std::shared_ptr<Triangulation>>(m, "Triangulation")
      .def_readonly("k", &Triangulation::k)
      .def_property_readonly("n_vertices", &Triangulation::n_vertices)
      .def_property_readonly("n_simplices", &Triangulation::n_simplices)
      .def_property_readonly("n_boundary_facets", &Triangulation::n_boundary_facets)
      .def_readonly("vertex_params", &Triangulation::vertex_params)
      .def_readonly("simplices", &Triangulation::simplices)
      .def_readonly("boundary_simplices", &Triangulation::boundary_simplices)
      .def_readonly("boundary_vertices", &Triangulation::boundary_vertices)
      .def("validate", &Triangulation::validate);

  py::class_<BoundaryCurve>(m, "BoundaryCurve")
      .def_property_readonly("n_components", &BoundaryCurve::n_components)
      .def("value", &BoundaryCurve::value, py::arg("component"), py::arg("t"));

  m.def("parse_curve", &parse_curve_spec, py::arg("spec"),
        "Boundary curve from a spec string like 'circle r=1'.");

  m.def(
      "build_disk",
      [](int n_rings) { return std::make_shared<Triangulation>(build_disk(n_rings)); },
      py::arg("n_rings"));
  m.def(
      "build_cylinder",
      [](int n_around, int n_along) {
        return std::make_shared<Triangulation>(build_cylinder(n_around, n_along));
      },
      py::arg("n_around"), py::arg("n_along"));
  m.def(
      "subdivide",
      [](const Triangulation& t) {
        return std::make_shared<Triangulation>(subdivide_4to1(t, nullptr));
      },
      py::arg("mesh"), "4:1 refinement.");

  m.def(
      "solve",
      [](std::shared_ptr<Triangulation> mesh, const std::string& curve_spec,
         std::uint64_t seed, int multistart) {
        BoundaryCurve curve = parse_curve_spec(curve_spec);
        SolverConfig cfg;
        cfg.seed = seed;
        cfg.multistart_count = multistart;
        MinimizerSet ms = multistart_minimize(mesh, curve, cfg);
        const SolveResult& best = ms.entries.front();
        py::dict out;
        out["positions"] = best.surface.positions;
        out["value"] = best.value;
        out["grad_norm"] = best.grad_norm;
        out["iterations"] = best.iterations;
        out["entries"] = static_cast<int>(ms.entries.size());
        out["failed_starts"] = ms.failed_starts;
        out["value_spread"] = ms.value_spread;
        return out;
      },
      py::arg("mesh"), py::arg("curve"), py::arg("seed") = 1, py::arg("multistart") = 8,
      "Multistart area minimization; returns the best surface and set stats.");

  m.def(
      "area",
      [](std::shared_ptr<Triangulation> mesh, const Eigen::MatrixXd& positions) {
        return discrete_volume(as_immersion(std::move(mesh), positions));
      },
      py::arg("mesh"), py::arg("positions"));
  m.def(
      "area_gradient",
      [](std::shared_ptr<Triangulation> mesh, const Eigen::MatrixXd& positions) {
        return discrete_volume_gradient(as_immersion(std::move(mesh), positions));
      },
      py::arg("mesh"), py::arg("positions"));

  m.def(
      "dist_imm",
      [](std::shared_ptr<Triangulation> mesh, const Eigen::MatrixXd& a,
         const Eigen::MatrixXd& b) {
        return distance_dict(dist_imm(as_immersion(mesh, a), as_immersion(mesh, b)));
      },
      py::arg("mesh"), py::arg("a"), py::arg("b"));

  m.def("dist_p", &dist_p, py::arg("a"), py::arg("b"),
        "Geodesic distance between SPD matrices.");
  m.def("geodesic", &geodesic, py::arg("base"), py::arg("velocity"), py::arg("t"));
  m.def("matrix_log_spd", &matrix_log_spd, py::arg("a"));
  m.def("matrix_exp_sym", &matrix_exp_sym, py::arg("x"));

  m.def(
      "hausdorff",
      [](const Eigen::MatrixXd& dist, const std::vector<int>& a,
         const std::vector<int>& b) { return hausdorff_distance(as_space(dist), a, b); },
      py::arg("dist"), py::arg("a"), py::arg("b"));
  m.def(
      "thicken",
      [](const Eigen::MatrixXd& dist, const std::vector<int>& subset, double r) {
        return thicken(as_space(dist), subset, r);
      },
      py::arg("dist"), py::arg("subset"), py::arg("r"));
  m.def(
      "finite_limits",
      [](const Eigen::MatrixXd& dist, const std::vector<std::vector<int>>& sets,
         const std::vector<double>& radii) {
        SetLimits lim = finite_limits(as_space(dist), sets, radii);
        return py::make_tuple(lim.li, lim.ls);
      },
      py::arg("dist"), py::arg("sets"), py::arg("radii"),
      "Inner and outer limits of a finite set sequence.");
  m.def("pushforward_argmin", &pushforward_argmin, py::arg("values"), py::arg("fibers"),
        py::arg("rho"));

  m.def(
      "write_mesh",
      [](const std::string& path, std::shared_ptr<Triangulation> mesh,
         const Eigen::MatrixXd& positions) {
        write_mesh(path, *mesh, positions);
      },
      py::arg("path"), py::arg("mesh"), py::arg("positions"));
  m.def(
      "read_mesh",
      [](const std::string& path) {
        MeshData md = read_mesh(path);
        return py::make_tuple(std::make_shared<Triangulation>(std::move(md.mesh)),
                              md.positions);
      },
      py::arg("path"));

  m.def(
      "converge_study",
      [](const std::string& config_text) {
        StudyConfig cfg = study_from_config(parse_config_text(config_text));
        return run_converge_study(cfg).csv;
      },
      py::arg("config_text"),
      "Runs a refinement study from config text; returns the CSV report.");
}
