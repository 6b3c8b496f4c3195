#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evasion/config.hpp"
#include "evasion/errors.hpp"
#include "evasion/mpc_planner.hpp"
#include "evasion/msf_planner.hpp"
#include "evasion/simulation.hpp"

namespace fs = std::filesystem;
using namespace evasion;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCollision = 2;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw Error("empty list '" + text + "'");
  return out;
}

// "a..b" with the given step, or a plain comma list.
std::vector<double> parse_range(const std::string& text, double step) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return parse_list(text);
  const double a = std::stod(text.substr(0, dots));
  const double b = std::stod(text.substr(dots + 2));
  if (!(step > 0.0) || b < a) throw Error("bad range '" + text + "'");
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((b - a) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(a + i * step);
  if (b - out.back() > 1e-9) out.push_back(b);
  return out;
}

double peak_steer(const EpisodeTrace& trace) {
  double peak = 0.0;
  for (const auto& row : trace.rows) peak = std::max(peak, std::abs(row.state.delta));
  return peak;
}

void print_report(const EpisodeTrace& trace, const ClearanceReport& r) {
  const Scenario& s = trace.scenario;
  std::printf("w = %.4f m  tau = %.3f s  nu = %.3f\n", s.obstacle.w, trace.detection.tau,
              trace.detection.nu);
  std::printf("min clearance = %.4f m  collided = %s  peak |delta| = %.4f rad\n",
              r.min_lateral_clearance, r.collided ? "yes" : "no", r.peak_steer);
  std::printf("max speed = %.3f m/s  return settled = %s  planner calls = %d  failures = %d\n",
              r.max_speed, r.return_settled ? "yes" : "no", trace.plan_calls, trace.plan_failures);
  if (trace.aborted) std::printf("aborted: %s\n", trace.abort_reason.c_str());
}

int cmd_run(const std::string& scenario_path, const std::string& barrier, const std::string& trace_path,
            double latency, bool msf_only, bool fail_plan) {
  std::vector<std::string> warnings;
  const ScenarioConfig cfg = load_scenario(scenario_path, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  EpisodeOptions opt;
  if (!barrier.empty()) opt.barrier = barrier_mode_from_string(barrier.c_str());
  if (latency >= 0.0) opt.sensor_latency = latency;
  opt.force_msf_only = msf_only;
  opt.force_plan_failure = fail_plan;
  const EpisodeTrace trace = run_episode(cfg.scenario, cfg.vehicle, opt);
  if (!trace_path.empty()) write_trace(trace, trace_path);
  const ClearanceReport r = min_clearance(trace);
  print_report(trace, r);
  if (trace.aborted) return kExitError;
  return r.collided ? kExitCollision : kExitOk;
}

struct SweepCase {
  double v;
  double tau;
};

struct SweepResult {
  SweepCase c;
  double nu = 0.0;
  double w = 0.0;
  ClearanceReport report;
  double peak = 0.0;
  bool aborted = false;
};

int cmd_sweep(const std::string& scenario_path, const std::string& speeds, const std::string& taus,
              double tau_step, double nu, double w, const std::string& out_dir, bool traces) {
  ScenarioConfig cfg;
  if (!scenario_path.empty()) cfg = load_scenario(scenario_path);
  const VehicleParams params = cfg.vehicle;
  auto table = std::make_shared<const YMaxTable>(build_default_ymax_table(params));
  fs::create_directories(out_dir);

  std::vector<SweepCase> cases;
  for (double v : parse_list(speeds))
    for (double tau : parse_range(taus, tau_step)) cases.push_back({v, tau});

  std::vector<std::future<SweepResult>> jobs;
  for (const SweepCase& c : cases) {
    jobs.push_back(std::async(std::launch::async, [=] {
      Scenario s = cfg.scenario;
      s.v0 = c.v;
      s.v_des = c.v;
      s.detection_distance = c.tau * c.v;
      if (w > 0.0) {
        s.obstacle.w = w;
        s.nu = 0.0;
      } else {
        s.nu = nu;
      }
      EpisodeOptions opt;
      opt.table = table;
      const EpisodeTrace trace = run_episode(s, params, opt);
      if (traces) {
        char name[64];
        std::snprintf(name, sizeof name, "trace_v%g_tau%g.csv", c.v, c.tau);
        write_trace(trace, fs::path(out_dir) / name);
      }
      SweepResult r;
      r.c = c;
      r.nu = trace.detection.nu;
      r.w = trace.scenario.obstacle.w;
      r.report = min_clearance(trace);
      r.peak = peak_steer(trace);
      r.aborted = trace.aborted;
      return r;
    }));
  }

  const fs::path summary = fs::path(out_dir) / "summary.csv";
  std::ofstream f(summary);
  if (!f) throw Error("cannot open " + summary.string());
  f << "v,tau,nu,w,collided,min_clearance,peak_delta\n";
  bool any_collision = false;
  bool any_abort = false;
  for (auto& job : jobs) {
    const SweepResult r = job.get();
    char line[256];
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%d,%.9g,%.9g\n", r.c.v, r.c.tau, r.nu, r.w,
                  r.report.collided ? 1 : 0, r.report.min_lateral_clearance, r.peak);
    f << line;
    std::fputs(line, stdout);
    any_collision = any_collision || r.report.collided;
    any_abort = any_abort || r.aborted;
  }
  std::printf("summary written to %s\n", summary.string().c_str());
  if (any_abort) return kExitError;
  return any_collision ? kExitCollision : kExitOk;
}

int cmd_ymax(const std::string& out) {
  const YMaxTable table = build_default_ymax_table(VehicleParams{});
  std::ofstream f(out);
  if (!f) throw Error("cannot open " + out);
  f << "t";
  for (double v : table.v_grid()) f << ",v" << v;
  f << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.t_grid().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", table.t_grid()[i]);
    f << buf;
    for (std::size_t j = 0; j < table.v_grid().size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", table.node(i, j));
      f << buf;
    }
    f << '\n';
  }
  std::printf("wrote %zu x %zu table to %s\n", table.t_grid().size(), table.v_grid().size(),
              out.c_str());
  return kExitOk;
}

int cmd_example2() {
  const VehicleParams params;
  Scenario s;
  s.v_des = 5.0;
  s.obstacle = {1.0, 1.0};
  s.N_p = 2;
  const KinematicState s0{0.0, 0.0, 5.0, 0.0};
  struct Row {
    const char* label;
    CostWeights weights;
    KinematicInput reference;
  } rows[] = {{"uniform", CostWeights{}, {0.0, 0.53}},
              {"safety-first", CostWeights{{0.50, 0.25, 0.05, 0.20}}, {-0.35, 1.00}}};
  for (const Row& row : rows) {
    s.weights = row.weights;
    const PlannerProblem problem = make_planner_problem(s, params);
    const PlannerSolution sol = plan(s0, problem, std::nullopt, Budget{}, PlanOptions{true});
    std::printf("%-12s eta = (%.2f, %.2f, %.2f, %.2f)  u = (%+.3f, %+.3f)  reference (%+.2f, %+.2f)  %s\n",
                row.label, row.weights.eta[0], row.weights.eta[1], row.weights.eta[2],
                row.weights.eta[3], sol.inputs[0].a_X, sol.inputs[0].a_Y, row.reference.a_X,
                row.reference.a_Y, to_string(sol.status));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emergency evasion planner simulator"};
  app.require_subcommand(1);

  std::string scenario, barrier, trace_out;
  double latency = -1.0;
  bool msf_only = false, fail_plan = false;
  auto* run = app.add_subcommand("run", "Run one episode from a scenario file");
  run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--barrier", barrier, "Barrier mode")->check(CLI::IsMember({"literal", "repaired"}));
  run->add_option("--trace", trace_out, "Write the trace CSV here");
  run->add_option("--latency", latency, "Sensor latency override (s)")->check(CLI::NonNegativeNumber);
  run->add_flag("--msf-only", msf_only, "Disable the optimizer");
  run->add_flag("--fail-plan", fail_plan, "Force every plan call to fail");

  std::string speeds = "5,6,7", taus = "1.4..5", out_dir, base;
  double tau_step = 0.4, nu = 0.25, w = 0.0;
  bool traces = false;
  auto* sweep = app.add_subcommand("sweep", "Batch over speeds and times to collision");
  sweep->add_option("--speeds", speeds, "Comma-separated speeds (m/s)");
  sweep->add_option("--taus", taus, "Range a..b or comma list (s)");
  sweep->add_option("--tau-step", tau_step, "Step for a..b ranges (s)");
  auto* nu_opt = sweep->add_option("--nu", nu, "Lateral steering index of every case");
  sweep->add_option("--w", w, "Fixed obstacle half-width (m)")->excludes(nu_opt);
  sweep->add_option("--scenario", base, "Base scenario file")->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_flag("--traces", traces, "Also write one trace per case");

  std::string table_out;
  auto* ymax = app.add_subcommand("ymax-table", "Tabulate the maximum-steering displacement");
  ymax->add_option("--out", table_out, "Output CSV")->required();

  auto* ex2 = app.add_subcommand("example2", "Two-step planner check with two weight sets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return cmd_run(scenario, barrier, trace_out, latency, msf_only, fail_plan);
    if (*sweep) return cmd_sweep(base, speeds, taus, tau_step, nu, w, out_dir, traces);
    if (*ymax) return cmd_ymax(table_out);
    if (*ex2) return cmd_example2();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
