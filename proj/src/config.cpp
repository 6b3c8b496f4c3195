#include "evasion/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "evasion/errors.hpp"

namespace evasion {
namespace {

enum class Kind { Real, Integer, Barrier };

struct Key {
  const char* section;
  const char* name;
  Kind kind;
  std::function<void*(ScenarioConfig&)> field;
};

#define VEH(k) Key{"vehicle", #k, Kind::Real, [](ScenarioConfig& c) -> void* { return &c.vehicle.k; }}
#define SCN(k, kind) Key{"scenario", #k, kind, [](ScenarioConfig& c) -> void* { return &c.scenario.k; }}
#define SIM(k) Key{"sim", #k, Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.k; }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      VEH(m), VEH(I_zz), VEH(J_wr), VEH(r), VEH(l_f), VEH(l_r), VEH(T_max), VEH(delta_max),
      VEH(delta_rate_max), VEH(C_y), VEH(B_y), VEH(C_x), VEH(B_x), VEH(mu), VEH(g),
      VEH(lambda_n), VEH(t_s), VEH(K_eps),
      SCN(v_des, Kind::Real), SCN(v0, Kind::Real),
      Key{"scenario", "x_obs", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.obstacle.x_obs; }},
      Key{"scenario", "w", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.obstacle.w; }},
      SCN(detection_distance, Kind::Real), SCN(N_p, Kind::Integer), SCN(barrier, Kind::Barrier),
      SCN(accel_fraction, Kind::Real), SCN(nu, Kind::Real), SCN(dodge_direction, Kind::Integer),
      SCN(zone_depth, Kind::Real), SCN(blend_threshold, Kind::Real), SCN(blend_width, Kind::Real),
      Key{"weights", "eta_1", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.weights.eta[0]; }},
      Key{"weights", "eta_2", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.weights.eta[1]; }},
      Key{"weights", "eta_3", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.weights.eta[2]; }},
      Key{"weights", "eta_4", Kind::Real, [](ScenarioConfig& c) -> void* { return &c.scenario.weights.eta[3]; }},
      SIM(sim_duration), SIM(control_dt), SIM(planner_dt), SIM(sensor_latency), SIM(gps_period),
      SIM(approach_time),
  };
  return table;
}

#undef VEH
#undef SCN
#undef SIM

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, int line, std::string_view key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ConfigError("invalid number '" + std::string(text) + "' for " + std::string(key), line);
  return value;
}

int parse_integer(std::string_view text, int line, std::string_view key) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid integer '" + std::string(text) + "' for " + std::string(key), line);
  return value;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, std::vector<std::string>* warnings) {
  ScenarioConfig config;
  std::string section;
  bool weights_seen = false;
  int line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "vehicle" && section != "scenario" && section != "weights" && section != "sim")
        throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
    if (section.empty()) throw ConfigError("key outside of a section", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected key = value", line_no);

    const Key* match = nullptr;
    for (const auto& k : keys())
      if (section == k.section && key == k.name) match = &k;
    if (!match) throw ConfigError("unknown key '" + std::string(key) + "' in [" + section + "]", line_no);

    if (section == "weights" && !weights_seen) {
      // An explicit weights block starts from zero; unspecified etas contribute nothing.
      config.scenario.weights.eta = {0.0, 0.0, 0.0, 0.0};
      weights_seen = true;
    }

    void* field = match->field(config);
    switch (match->kind) {
      case Kind::Real:
        *static_cast<double*>(field) = parse_real(value, line_no, key);
        break;
      case Kind::Integer:
        *static_cast<int*>(field) = parse_integer(value, line_no, key);
        break;
      case Kind::Barrier:
        try {
          *static_cast<BarrierMode*>(field) = barrier_mode_from_string(std::string(value).c_str());
        } catch (const ConfigError& e) {
          throw ConfigError(e.what(), line_no);
        }
        break;
    }
  }

  auto& weights = config.scenario.weights;
  for (double e : weights.eta)
    if (e < 0.0) throw ConfigError("weights must be non-negative");
  if (!weights.is_normalized()) {
    const double s = weights.sum();
    weights = weights.normalized();
    if (warnings) warnings->push_back("weights summed to " + format_real(s) + "; renormalized to 1");
  }

  config.vehicle.validate();
  config.scenario.validate();
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str(), warnings);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_scenario(const ScenarioConfig& config) {
  ScenarioConfig copy = config;
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = ";
    void* field = k.field(copy);
    switch (k.kind) {
      case Kind::Real:
        out << format_real(*static_cast<double*>(field));
        break;
      case Kind::Integer:
        out << *static_cast<int*>(field);
        break;
      case Kind::Barrier:
        out << to_string(*static_cast<BarrierMode*>(field));
        break;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace evasion
