#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evasion/arbitration.hpp"
#include "evasion/config.hpp"
#include "evasion/errors.hpp"
#include "evasion/mpc_planner.hpp"
#include "evasion/msf_planner.hpp"
#include "evasion/simulation.hpp"

namespace py = pybind11;
using namespace evasion;

PYBIND11_MODULE(_evasion, m) {
  m.doc() = "Emergency evasive maneuver planning and simulation";

  auto error = py::register_exception<Error>(m, "EvasionError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<LowSpeedDomain>(m, "LowSpeedDomain", error.ptr());
  py::register_exception<OutOfTable>(m, "OutOfTable", error.ptr());

  py::enum_<BarrierMode>(m, "BarrierMode")
      .value("literal", BarrierMode::Literal)
      .value("repaired", BarrierMode::Repaired);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("I_zz", &VehicleParams::I_zz)
      .def_readwrite("r", &VehicleParams::r)
      .def_readwrite("l_f", &VehicleParams::l_f)
      .def_readwrite("l_r", &VehicleParams::l_r)
      .def_readwrite("T_max", &VehicleParams::T_max)
      .def_readwrite("delta_max", &VehicleParams::delta_max)
      .def_readwrite("delta_rate_max", &VehicleParams::delta_rate_max)
      .def_readwrite("mu", &VehicleParams::mu)
      .def_readwrite("t_s", &VehicleParams::t_s)
      .def("validate", &VehicleParams::validate);

  py::class_<Obstacle>(m, "Obstacle")
      .def(py::init<double, double>(), py::arg("x_obs") = 25.0, py::arg("w") = 4.0)
      .def_readwrite("x_obs", &Obstacle::x_obs)
      .def_readwrite("w", &Obstacle::w);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("v_des", &Scenario::v_des)
      .def_readwrite("v0", &Scenario::v0)
      .def_readwrite("obstacle", &Scenario::obstacle)
      .def_readwrite("detection_distance", &Scenario::detection_distance)
      .def_property(
          "weights", [](const Scenario& s) { return s.weights.eta; },
          [](Scenario& s, std::array<double, 4> eta) { s.weights.eta = eta; })
      .def_readwrite("N_p", &Scenario::N_p)
      .def_readwrite("barrier", &Scenario::barrier)
      .def_readwrite("nu", &Scenario::nu)
      .def_readwrite("sim_duration", &Scenario::sim_duration)
      .def_readwrite("sensor_latency", &Scenario::sensor_latency)
      .def_readwrite("gps_period", &Scenario::gps_period)
      .def("validate", &Scenario::validate);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("vehicle", &ScenarioConfig::vehicle)
      .def_readwrite("scenario", &ScenarioConfig::scenario);
  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); });
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); });

  py::class_<YMaxTable, std::shared_ptr<YMaxTable>>(m, "YMaxTable")
      .def("lookup", &YMaxTable::lookup, py::arg("t"), py::arg("v"))
      .def_property_readonly("v_grid", &YMaxTable::v_grid)
      .def_property_readonly("t_grid", &YMaxTable::t_grid);
  m.def("build_default_ymax_table",
        [](const VehicleParams& p) { return std::make_shared<YMaxTable>(build_default_ymax_table(p)); },
        py::arg("params") = VehicleParams{});
  m.def(
      "max_steer_displacement",
      [](double v_x, const std::vector<double>& times, const VehicleParams& p) {
        std::vector<double> y;
        for (const auto& s : max_steer_profile(v_x, times, p)) y.push_back(s.y);
        return y;
      },
      py::arg("v_x"), py::arg("times"), py::arg("params") = VehicleParams{});

  m.def(
      "plan_two_step",
      [](std::array<double, 4> eta, double v0, double x_obs, double w) {
        PlannerProblem p;
        p.obstacle = {x_obs, w};
        p.horizon = 2;
        p.weights.eta = eta;
        const PlannerSolution sol = plan({0.0, 0.0, v0, 0.0}, p, std::nullopt, Budget{}, PlanOptions{true});
        return py::make_tuple(sol.inputs.front().a_X, sol.inputs.front().a_Y, sol.cost,
                              to_string(sol.status));
      },
      py::arg("weights") = std::array<double, 4>{0.25, 0.25, 0.25, 0.25}, py::arg("v0") = 5.0,
      py::arg("x_obs") = 1.0, py::arg("w") = 1.0,
      "Tied-input two-step plan from the origin; returns (u_x, u_y, cost, status).");

  py::class_<ClearanceReport>(m, "ClearanceReport")
      .def_readonly("min_lateral_clearance", &ClearanceReport::min_lateral_clearance)
      .def_readonly("collided", &ClearanceReport::collided)
      .def_readonly("max_speed", &ClearanceReport::max_speed)
      .def_readonly("return_settled", &ClearanceReport::return_settled)
      .def_readonly("reached", &ClearanceReport::reached)
      .def_readonly("peak_steer", &ClearanceReport::peak_steer)
      .def_readonly("return_overshoot", &ClearanceReport::return_overshoot);

  py::class_<EpisodeTrace>(m, "EpisodeTrace")
      .def_readonly("aborted", &EpisodeTrace::aborted)
      .def_readonly("abort_reason", &EpisodeTrace::abort_reason)
      .def_readonly("plan_calls", &EpisodeTrace::plan_calls)
      .def_readonly("plan_failures", &EpisodeTrace::plan_failures)
      .def_property_readonly("scenario", [](const EpisodeTrace& t) { return t.scenario; })
      .def("__len__", [](const EpisodeTrace& t) { return t.rows.size(); })
      .def("column",
           [](const EpisodeTrace& t, const std::string& name) {
             std::vector<double> out;
             out.reserve(t.rows.size());
             for (const auto& r : t.rows) {
               if (name == "t") out.push_back(r.t);
               else if (name == "x") out.push_back(r.state.x);
               else if (name == "y") out.push_back(r.state.y);
               else if (name == "theta") out.push_back(r.state.theta);
               else if (name == "vx") out.push_back(r.state.v_x);
               else if (name == "vy") out.push_back(r.state.v_y);
               else if (name == "delta") out.push_back(r.state.delta);
               else if (name == "lambda") out.push_back(r.lambda);
               else throw py::key_error(name);
             }
             return out;
           })
      .def("statuses",
           [](const EpisodeTrace& t) {
             std::vector<std::string> out;
             for (const auto& r : t.rows) out.push_back(r.status);
             return out;
           })
      .def("to_csv", &trace_to_csv)
      .def("write", [](const EpisodeTrace& t, const std::filesystem::path& p) { write_trace(t, p); })
      .def("clearance", [](const EpisodeTrace& t) { return min_clearance(t); });

  m.def(
      "run_episode",
      [](const Scenario& s, const VehicleParams& p, std::optional<BarrierMode> barrier,
         std::optional<double> latency, bool force_plan_failure, bool msf_only,
         std::shared_ptr<YMaxTable> table) {
        EpisodeOptions o;
        o.barrier = barrier;
        o.sensor_latency = latency;
        o.force_plan_failure = force_plan_failure;
        o.force_msf_only = msf_only;
        o.table = table;
        py::gil_scoped_release release;
        return run_episode(s, p, o);
      },
      py::arg("scenario"), py::arg("params") = VehicleParams{}, py::arg("barrier") = py::none(),
      py::arg("latency") = py::none(), py::arg("force_plan_failure") = false,
      py::arg("msf_only") = false, py::arg("table") = nullptr);
}
