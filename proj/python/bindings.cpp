#include "dlasftc/analysis.hpp"
#include "dlasftc/consensus.hpp"
#include "dlasftc/experiments.hpp"
#include "dlasftc/graph.hpp"
#include "dlasftc/optimizer.hpp"
#include "dlasftc/problems.hpp"
#include "dlasftc/stepsize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

namespace py = pybind11;
using namespace dlasftc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "distributed learning with automated stepsizes and finite-time "
            "exact coordination on directed graphs";

  py::register_exception<DegenerateTraceError>(m, "DegenerateTraceError");
  py::register_exception<DegenerateDenominatorError>(m, "DegenerateDenominatorError");
  py::register_exception<UndefinedStepsizeError>(m, "UndefinedStepsizeError");

  // graph
  py::class_<Digraph>(m, "Digraph")
      .def(py::init<int, std::vector<std::pair<int, int>>>(), py::arg("node_count"),
           py::arg("edges"))
      .def_property_readonly("node_count", &Digraph::node_count)
      .def_property_readonly("edges", &Digraph::edges)
      .def("has_edge", &Digraph::has_edge)
      .def("in_neighbors", &Digraph::in_neighbors)
      .def("out_neighbors", &Digraph::out_neighbors)
      .def("in_degree", &Digraph::in_degree)
      .def("out_degree", &Digraph::out_degree)
      .def("to_edge_list", &Digraph::to_edge_list)
      .def_static("from_edge_list",
                  py::overload_cast<const std::string&>(&Digraph::from_edge_list));

  py::class_<WeightMatrix>(m, "WeightMatrix")
      .def(py::init<Eigen::MatrixXd>())
      .def_property_readonly("matrix", &WeightMatrix::matrix)
      .def_property_readonly("size", &WeightMatrix::size);

  m.def("random_strongly_connected", &random_strongly_connected,
        py::arg("node_count"), py::arg("edge_density"), py::arg("seed"));
  m.def("is_strongly_connected", &is_strongly_connected);
  m.def("default_weights", &default_weights);
  m.def("topology_hash", &topology_hash);
  m.def("diameter_upper_bound",
        [](int n_prime) { return diameter_upper_bound({n_prime}); },
        py::arg("n_prime"));

  // consensus
  m.def("ratio_consensus_step",
        [](const WeightMatrix& w, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
          return ratio_consensus_step(w, y, x);
        },
        py::arg("weights"), py::arg("y"), py::arg("x"));
  m.def("max_consensus", &max_consensus, py::arg("graph"), py::arg("inputs"),
        py::arg("steps"));

  py::class_<MinimalPolyCoeffs>(m, "MinimalPolyCoeffs")
      .def_readonly("node", &MinimalPolyCoeffs::node)
      .def_readonly("degree", &MinimalPolyCoeffs::degree)
      .def_readonly("beta", &MinimalPolyCoeffs::beta)
      .def_readonly("alpha", &MinimalPolyCoeffs::alpha);

  m.def("learn_minimal_poly", &learn_minimal_poly, py::arg("trace"), py::arg("node"),
        py::arg("rank_tol") = 1e-8);
  m.def("recurrence_residual", &recurrence_residual);
  m.def("exact_average", &exact_average, py::arg("coeffs"), py::arg("y_samples"),
        py::arg("x_samples"), py::arg("den_tol") = 1e-12);

  py::class_<FtercEngine>(m, "FtercEngine")
      .def(py::init<const Digraph&, int, double, double>(), py::arg("graph"),
           py::arg("n_prime"), py::arg("rank_tol") = 1e-8, py::arg("den_tol") = 1e-12)
      .def("round",
           py::overload_cast<const Eigen::MatrixXd&>(&FtercEngine::round),
           "average the rows of an (N x d) input matrix")
      .def("round_scalar",
           py::overload_cast<const Eigen::VectorXd&>(&FtercEngine::round))
      .def_property_readonly("learned", &FtercEngine::learned)
      .def_property_readonly("t_max", &FtercEngine::t_max)
      .def_property_readonly("steps_last_round", &FtercEngine::steps_last_round)
      .def("coeffs", &FtercEngine::coeffs, py::return_value_policy::copy)
      .def("denominator", &FtercEngine::denominator);

  // stepsize
  py::class_<StepsizeConfig>(m, "StepsizeConfig")
      .def(py::init<>())
      .def_readwrite("kappa", &StepsizeConfig::kappa)
      .def_readwrite("alpha", &StepsizeConfig::alpha)
      .def_readwrite("eta0", &StepsizeConfig::eta0);

  m.def("local_lipschitz",
        [](const Eigen::VectorXd& xc, const Eigen::VectorXd& xp,
           const Eigen::VectorXd& gc, const Eigen::VectorXd& gp) {
          return local_lipschitz(xc, xp, gc, gp);
        });
  m.def("smooth_lipschitz", &smooth_lipschitz);
  m.def("propose_stepsize", &propose_stepsize, py::arg("eta_prev"),
        py::arg("theta_prev"), py::arg("l_smoothed"), py::arg("alpha"));
  m.def("update_theta", &update_theta);

  // problems
  py::enum_<ProblemMode>(m, "ProblemMode")
      .value("Vector", ProblemMode::Vector)
      .value("Scalar", ProblemMode::Scalar);

  py::class_<RegressionConfig>(m, "RegressionConfig")
      .def(py::init<>())
      .def_readwrite("node_count", &RegressionConfig::node_count)
      .def_readwrite("samples_per_node", &RegressionConfig::samples_per_node)
      .def_readwrite("intercept", &RegressionConfig::intercept)
      .def_readwrite("slope", &RegressionConfig::slope)
      .def_readwrite("noise_sd", &RegressionConfig::noise_sd)
      .def_readwrite("mode", &RegressionConfig::mode);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("node_count", &Dataset::node_count)
      .def_property_readonly("dim", &Dataset::dim)
      .def("samples", &Dataset::samples)
      .def("sample", &Dataset::sample)
      .def("chi", &Dataset::chi)
      .def("psi", &Dataset::psi)
      .def("node_mean", &Dataset::node_mean)
      .def_property_readonly("optimum", &Dataset::optimum)
      .def("to_csv", &Dataset::to_csv);

  m.def("generate_regression_data", &generate_regression_data, py::arg("config"),
        py::arg("seed"));
  m.def("local_cost", &local_cost);
  m.def("local_gradient", &local_gradient);
  m.def("stochastic_gradient",
        [](const Dataset& data, int node, const Eigen::VectorXd& x, std::uint64_t seed) {
          std::mt19937_64 rng(seed);
          return stochastic_gradient(data, node, x, rng);
        },
        py::arg("dataset"), py::arg("node"), py::arg("x"), py::arg("seed"));

  py::class_<ProblemConstants>(m, "ProblemConstants")
      .def_readonly("smoothness", &ProblemConstants::smoothness)
      .def_readonly("strong_convexity", &ProblemConstants::strong_convexity)
      .def_readonly("grad_deviation", &ProblemConstants::grad_deviation);
  m.def("problem_constants", &problem_constants);

  // optimizer
  py::enum_<CoordinationMode>(m, "CoordinationMode")
      .value("Fterc", CoordinationMode::Fterc)
      .value("SingleGossip", CoordinationMode::SingleGossip);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("node_count", &RunConfig::node_count)
      .def_readwrite("edge_density", &RunConfig::edge_density)
      .def_readwrite("n_prime", &RunConfig::n_prime)
      .def_readwrite("problem", &RunConfig::problem)
      .def_readwrite("stepsize", &RunConfig::stepsize)
      .def_readwrite("rounds", &RunConfig::rounds)
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("deterministic_gradients", &RunConfig::deterministic_gradients)
      .def_readwrite("init_radius", &RunConfig::init_radius)
      .def_readwrite("metric_coordinate", &RunConfig::metric_coordinate)
      .def_readwrite("graph_seed", &RunConfig::graph_seed)
      .def_readwrite("data_seed", &RunConfig::data_seed)
      .def_readwrite("init_seed", &RunConfig::init_seed)
      .def_readwrite("grad_seed", &RunConfig::grad_seed);

  py::class_<RoundOutcome>(m, "RoundOutcome")
      .def_readonly("round", &RoundOutcome::round)
      .def_readonly("eta", &RoundOutcome::eta)
      .def_readonly("lambda_", &RoundOutcome::lambda)
      .def_readonly("lambda_mean", &RoundOutcome::lambda_mean)
      .def_readonly("pre_coordination", &RoundOutcome::pre_coordination)
      .def_readonly("post_coordination", &RoundOutcome::post_coordination)
      .def_readonly("post_spread", &RoundOutcome::post_spread)
      .def_readonly("error", &RoundOutcome::error)
      .def_readonly("distance_to_opt", &RoundOutcome::distance_to_opt)
      .def_readonly("grad_noise", &RoundOutcome::grad_noise)
      .def_readonly("consensus_steps", &RoundOutcome::consensus_steps);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("graph_hash", &TrajectoryRecord::graph_hash)
      .def_readonly("initial_states", &TrajectoryRecord::initial_states)
      .def_readonly("optimum", &TrajectoryRecord::optimum)
      .def_readonly("metric_target", &TrajectoryRecord::metric_target)
      .def_readonly("initial_error", &TrajectoryRecord::initial_error)
      .def_readonly("initial_distance", &TrajectoryRecord::initial_distance)
      .def_readonly("rounds", &TrajectoryRecord::rounds)
      .def_readonly("failed", &TrajectoryRecord::failed)
      .def_readonly("failure", &TrajectoryRecord::failure);

  m.def("run_experiment", &run_experiment);
  m.def("run_meta_json", &run_meta_json);

  // analysis
  m.def("error_metric", &error_metric, py::arg("states"), py::arg("initial"),
        py::arg("target"), py::arg("coordinate") = 0);

  py::class_<BoundParams>(m, "BoundParams")
      .def(py::init<>())
      .def_readwrite("lambda_", &BoundParams::lambda)
      .def_readwrite("smoothness", &BoundParams::smoothness)
      .def_readwrite("strong_convexity", &BoundParams::strong_convexity)
      .def_readwrite("grad_deviation", &BoundParams::grad_deviation)
      .def_readwrite("initial_distance", &BoundParams::initial_distance);

  m.def("zeta", &zeta);
  m.def("contraction_bound", &contraction_bound);
  m.def("conservative_bound", &conservative_bound);
  m.def("bound_params", &bound_params);
  m.def("trajectory_csv", &trajectory_csv);

#ifdef VERSION_INFO
#define DLASFTC_STR(x) #x
#define DLASFTC_XSTR(x) DLASFTC_STR(x)
  m.attr("__version__") = DLASFTC_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
