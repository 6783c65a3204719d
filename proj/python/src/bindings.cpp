#include "mtdiff/config.hpp"
#include "mtdiff/experiment.hpp"
#include "mtdiff/io.hpp"
#include "mtdiff/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mtdiff;

namespace {

std::vector<Point2> to_points(const std::vector<std::array<double, 2>>& pts) {
    std::vector<Point2> out;
    for (const auto& p : pts) out.push_back({p[0], p[1]});
    return out;
}

std::vector<std::array<double, 2>> from_points(const std::vector<Point2>& pts) {
    std::vector<std::array<double, 2>> out;
    for (const auto& p : pts) out.push_back({p.x, p.y});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clustered multitask diffusion LMS: simulator and mean-square performance models";

    py::register_exception<NetworkError>(m, "NetworkError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TheoryError>(m, "TheoryError", PyExc_RuntimeError);

    py::class_<NetworkSpec>(m, "NetworkSpec")
        .def(py::init([](int n_nodes, int filter_length, const std::vector<std::pair<int, int>>& edges,
                         std::vector<int> clusters, std::optional<std::vector<std::array<double, 2>>> positions) {
                 std::optional<std::vector<Point2>> pos;
                 if (positions) pos = to_points(*positions);
                 return NetworkSpec(n_nodes, filter_length, edges, std::move(clusters), std::move(pos));
             }),
             py::arg("n_nodes"), py::arg("filter_length"), py::arg("edges"), py::arg("clusters"),
             py::arg("positions") = py::none())
        .def_property_readonly("n_nodes", &NetworkSpec::n_nodes)
        .def_property_readonly("filter_length", &NetworkSpec::filter_length)
        .def_property_readonly("n_clusters", &NetworkSpec::n_clusters)
        .def_property_readonly("clusters", &NetworkSpec::clusters)
        .def_property_readonly("positions",
                               [](const NetworkSpec& s) -> std::optional<std::vector<std::array<double, 2>>> {
                                   if (!s.positions()) return std::nullopt;
                                   return from_points(*s.positions());
                               })
        .def("neighbors", &NetworkSpec::neighbors)
        .def("intra_neighbors", &NetworkSpec::intra_neighbors)
        .def("inter_neighbors", &NetworkSpec::inter_neighbors)
        .def("edges", &NetworkSpec::edges)
        .def("with_singleton_clusters", &NetworkSpec::with_singleton_clusters)
        .def("with_single_cluster", &NetworkSpec::with_single_cluster)
        .def("to_edge_list", &NetworkSpec::to_edge_list);

    m.def("build_uniform_A", &build_uniform_A);
    m.def("build_uniform_P", &build_uniform_P);
    m.def("build_identity_C", &build_identity_C);
    m.def("build_uniform_C", &build_uniform_C);
    m.def(
        "validate",
        [](const NetworkSpec& s, const MatrixXd& A, const MatrixXd& C, const MatrixXd& P,
           double tau) -> std::optional<std::string> {
            auto v = validate(s, A, C, P, tau);
            if (!v) return std::nullopt;
            return v->message;
        },
        py::arg("network"), py::arg("A"), py::arg("C"), py::arg("P"), py::arg("tau") = 0.0,
        "Returns None when every invariant holds, else the first violation.");
    m.def(
        "random_geometric_network",
        [](int n_nodes, double radius, std::uint64_t seed, int n_clusters, std::string shape,
           std::array<double, 2> origin, double width, double height, double inner_radius, double outer_radius,
           std::string assignment) {
            Region r;
            r.shape = shape == "annulus" ? Region::Shape::Annulus : Region::Shape::Rectangle;
            r.x0 = origin[0];
            r.y0 = origin[1];
            r.width = width;
            r.height = height;
            r.inner_radius = inner_radius;
            r.outer_radius = outer_radius;
            return random_geometric_network(
                n_nodes, r, radius, seed, n_clusters, 2, 1000,
                assignment == "grow" ? ClusterAssignment::Grow : ClusterAssignment::Random);
        },
        py::arg("n_nodes"), py::arg("radius"), py::arg("seed"), py::arg("n_clusters") = 1,
        py::arg("shape") = "rectangle", py::arg("origin") = std::array<double, 2>{0.0, 0.0}, py::arg("width") = 1.0,
        py::arg("height") = 1.0, py::arg("inner_radius") = 0.0, py::arg("outer_radius") = 1.0,
        py::arg("assignment") = "random");

    py::class_<LinearModelSpec>(m, "LinearModelSpec")
        .def(py::init([](std::vector<VectorXd> optima, std::vector<double> sx, std::vector<double> sz) {
                 return LinearModelSpec{std::move(optima), std::move(sx), std::move(sz)};
             }),
             py::arg("optima"), py::arg("sigma2_x"), py::arg("sigma2_z"))
        .def_readwrite("optima", &LinearModelSpec::optima)
        .def_readwrite("sigma2_x", &LinearModelSpec::sigma2_x)
        .def_readwrite("sigma2_z", &LinearModelSpec::sigma2_z);

    py::class_<LocalizationSpec>(m, "LocalizationSpec")
        .def(py::init([](const std::vector<std::array<double, 2>>& positions,
                         const std::vector<std::array<double, 2>>& targets, std::vector<double> sa,
                         std::vector<double> sb, std::vector<double> sv) {
                 return LocalizationSpec{to_points(positions), to_points(targets), std::move(sa), std::move(sb),
                                         std::move(sv)};
             }),
             py::arg("node_positions"), py::arg("targets"), py::arg("sigma_alpha"), py::arg("sigma_beta"),
             py::arg("sigma_v"));

    py::class_<Scenario>(m, "Scenario")
        .def(py::init([](const NetworkSpec& truth, const LinearModelSpec& model) { return Scenario{truth, model}; }))
        .def(py::init([](const NetworkSpec& truth, const LocalizationSpec& model) { return Scenario{truth, model}; }))
        .def_readonly("truth", &Scenario::truth)
        .def("optimum", [](const Scenario& s) { return stacked_optimum(s.model, s.truth); });

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init([](double mu, double tau) { return Hyperparams{mu, tau}; }), py::arg("mu"),
             py::arg("tau") = 0.0)
        .def_readwrite("mu", &Hyperparams::mu)
        .def_readwrite("tau", &Hyperparams::tau)
        .def("__repr__", [](const Hyperparams& h) {
            return "Hyperparams(mu=" + std::to_string(h.mu) + ", tau=" + std::to_string(h.tau) + ")";
        });

    py::enum_<Variant>(m, "Variant")
        .value("Clustered", Variant::Clustered)
        .value("SpatialRegularized", Variant::SpatialRegularized)
        .value("NonCooperative", Variant::NonCooperative);

    py::class_<Strategy>(m, "Strategy")
        .def(py::init([](const NetworkSpec& n, MatrixXd A, MatrixXd C, MatrixXd P) {
            return Strategy{n, std::move(A), std::move(C), std::move(P)};
        }))
        .def_readonly("network", &Strategy::network)
        .def_readonly("A", &Strategy::A)
        .def_readonly("C", &Strategy::C)
        .def_readonly("P", &Strategy::P);
    m.def("make_strategy", &make_strategy, py::arg("variant"), py::arg("network"));

    py::class_<Sample>(m, "Sample").def_readonly("x", &Sample::x).def_readonly("d", &Sample::d);
    m.def("adapt_step", &adapt_step);
    m.def("combine_step", &combine_step);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("msd", &Trajectory::msd)
        .def_readonly("diverged", &Trajectory::diverged)
        .def_readonly("seed", &Trajectory::seed)
        .def_readonly("run", &Trajectory::run)
        .def_readonly("final_error", &Trajectory::final_error);
    m.def("run", &run, py::arg("strategy"), py::arg("scenario"), py::arg("hp"), py::arg("n_iters"), py::arg("seed"),
          py::arg("run") = 0);
    m.def("run_noncooperative_lms", &run_noncooperative_lms, py::arg("scenario"), py::arg("mu"), py::arg("n_iters"),
          py::arg("seed"), py::arg("run") = 0);
    m.def("run_spatial_reg_lms", &run_spatial_reg_lms, py::arg("scenario"), py::arg("hp"), py::arg("n_iters"),
          py::arg("seed"), py::arg("run") = 0);

    py::class_<MomentMatrices>(m, "MomentMatrices")
        .def_readonly("H", &MomentMatrices::H)
        .def_readonly("Q", &MomentMatrices::Q)
        .def_readonly("B", &MomentMatrices::B)
        .def_readonly("r", &MomentMatrices::r)
        .def_readonly("G", &MomentMatrices::G)
        .def_readonly("w_star", &MomentMatrices::w_star)
        .def_readonly("mu", &MomentMatrices::mu)
        .def_readonly("tau", &MomentMatrices::tau);
    m.def("build_moments", &build_moments);
    m.def("step_size_bound", py::overload_cast<const MomentMatrices&>(&step_size_bound));
    m.def("spectral_radius_B", &spectral_radius_B);
    m.def("mean_recursion", &mean_recursion);
    m.def("bias_limit", &bias_limit);
    m.def("apply_K", &apply_K);
    m.def("apply_K_transpose", &apply_K_transpose);
    m.def(
        "k_spectral_radius",
        [](const MatrixXd& B, double tol, int max_iterations) {
            auto e = k_spectral_radius(B, tol, max_iterations);
            return py::make_tuple(e.radius, e.converged);
        },
        py::arg("B"), py::arg("tol") = 1e-10, py::arg("max_iterations") = 1000000);
    m.def("transient_msd", [](const MomentMatrices& mm, int n) { return transient_msd(mm, n).zeta; });
    m.def("steady_state_msd", &steady_state_msd);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("name", &ExperimentConfig::name)
        .def_readonly("scenario", &ExperimentConfig::scenario)
        .def_readwrite("variants", &ExperimentConfig::variants)
        .def_readwrite("hyperparams", &ExperimentConfig::hyperparams)
        .def_readwrite("n_runs", &ExperimentConfig::n_runs)
        .def_readwrite("n_iters", &ExperimentConfig::n_iters)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("workers", &ExperimentConfig::workers)
        .def_readwrite("theory", &ExperimentConfig::theory);

    py::class_<CurveResult>(m, "CurveResult")
        .def_readonly("variant", &CurveResult::variant)
        .def_readonly("hp", &CurveResult::hp)
        .def_readonly("sim_msd", &CurveResult::sim_msd)
        .def_readonly("n_used", &CurveResult::n_used)
        .def_readonly("n_diverged", &CurveResult::n_diverged)
        .def_readonly("mean_final_error", &CurveResult::mean_final_error)
        .def_readonly("theory_msd", &CurveResult::theory_msd)
        .def_readonly("theory_steady", &CurveResult::theory_steady);

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_readonly("name", &ExperimentResult::name)
        .def_readonly("curves", &ExperimentResult::curves)
        .def_readonly("flagged", &ExperimentResult::flagged)
        .def_readonly("warnings", &ExperimentResult::warnings)
        .def_readonly("wall_seconds", &ExperimentResult::wall_seconds);

    m.def("load_experiment", [](const std::string& path) { return to_experiment(load_config(path)); });
    m.def("monte_carlo", &monte_carlo, py::call_guard<py::gil_scoped_release>());
    m.def("choose_horizon", &choose_horizon, py::arg("config"), py::arg("tol_db") = 0.1, py::arg("max_exponent") = 6);
    m.def("model_validation_config", &model_validation_config);
    m.def(
        "localization_config",
        [](const std::string& scale) {
            return localization_config(scale == "desk" ? LocalizationScale::Desk : LocalizationScale::Full);
        },
        py::arg("scale") = "full");
    m.def("to_db", &to_db);
}
