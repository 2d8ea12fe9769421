#pragma once

// Run configuration, CSV output and JSON metadata sidecars.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qevo/core.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/experiments.hpp"
#include "qevo/game_model.hpp"
#include "qevo/quantum_dynamics.hpp"

#ifndef QEVO_VERSION
#define QEVO_VERSION "0.1.0"
#endif

namespace qevo {

inline constexpr const char* kVersion = QEVO_VERSION;

inline constexpr const char* kClassicalHeader = "t,x_T,y_T,u_A,u_B";
inline constexpr const char* kQuantumHeader =
    "t,re_a00,im_a00,re_a01,im_a01,re_a10,im_a10,re_a11,im_a11,p_TT,p_TF,p_FT,p_FF,u_A,u_B,norm";
inline constexpr const char* kSweepHeader = "x0,y0,label,residual";

// ---------------------------------------------------------------------------
// RunConfig

struct InitConfig {
  double x0 = 0.6;
  double y0 = 0.6;
  std::optional<double> theta0;
  std::optional<double> phi0;
  double alpha0 = 0.0;

  friend bool operator==(const InitConfig&, const InitConfig&) = default;
};

struct DynamicsConfig {
  double gamma = 1.0;
  double dt = 1e-3;
  double t_max = 200.0;
  int stride = 10;
  std::string hamiltonian = "h-def";
  bool renormalize = true;

  friend bool operator==(const DynamicsConfig&, const DynamicsConfig&) = default;
};

struct ToleranceConfig {
  double eps_conv = 1e-6;
  double eps_cycle = 1e-3;

  friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

struct OutputConfig {
  std::string path;
  std::string format = "csv";

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  std::string game = "trading-farming";         // preset name, or "custom"
  std::optional<std::array<double, 4>> matrix_a;  // a, b, c, d (row-major)
  std::optional<std::array<double, 4>> matrix_b;  // omitted: B = A^T
  std::string mode = "classical";                 // classical | quantum | mixed
  InitConfig init;
  DynamicsConfig dynamics;
  ToleranceConfig tolerances;
  int grid_n = 21;
  int quantum_player = 0;
  OutputConfig output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [0, 1]");
}

inline void validate(const RunConfig& c, bool sweeping = false) {
  check_probability(c.init.x0, "x0");
  check_probability(c.init.y0, "y0");
  if (!(c.dynamics.dt > 0.0)) throw InvalidInput("dt must be positive");
  if (!(c.dynamics.t_max > 0.0)) throw InvalidInput("t_max must be positive");
  if (!(c.dynamics.gamma > 0.0)) throw InvalidInput("gamma must be positive");
  if (c.dynamics.stride < 1) throw InvalidInput("stride must be >= 1");
  if (!(c.tolerances.eps_conv > 0.0) || !(c.tolerances.eps_cycle > 0.0))
    throw InvalidInput("tolerances must be positive");
  if (sweeping && c.grid_n < 2) throw InvalidInput("grid_n must be >= 2");
  if (c.mode != "classical" && c.mode != "quantum" && c.mode != "mixed")
    throw InvalidInput("mode must be classical, quantum or mixed");
  if (c.quantum_player != 0 && c.quantum_player != 1) throw InvalidInput("quantum_player must be 0 or 1");
  parse_hamiltonian_mode(c.dynamics.hamiltonian);
  if (c.output.format != "csv") throw InvalidInput("output format must be csv");
}

inline Mat2 to_matrix(const std::array<double, 4>& e) {
  Mat2 m;
  m.data = e;
  return m;
}

inline Game resolve_game(const RunConfig& c) {
  if (c.matrix_a) {
    if (!c.matrix_b) {
      const auto& a = *c.matrix_a;
      return Game::symmetric(a[0], a[1], a[2], a[3]);
    }
    return Game::general(to_matrix(*c.matrix_a), to_matrix(*c.matrix_b));
  }
  if (c.matrix_b) throw InvalidInput("matrix_b given without matrix_a");
  return preset_game(c.game);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  j = json{{"game", c.game},
           {"matrix_a", opt(c.matrix_a)},
           {"matrix_b", opt(c.matrix_b)},
           {"mode", c.mode},
           {"init",
            {{"x0", c.init.x0},
             {"y0", c.init.y0},
             {"theta0", opt(c.init.theta0)},
             {"phi0", opt(c.init.phi0)},
             {"alpha0", c.init.alpha0}}},
           {"dynamics",
            {{"gamma", c.dynamics.gamma},
             {"dt", c.dynamics.dt},
             {"t_max", c.dynamics.t_max},
             {"stride", c.dynamics.stride},
             {"hamiltonian", c.dynamics.hamiltonian},
             {"renormalize", c.dynamics.renormalize}}},
           {"tolerances", {{"eps_conv", c.tolerances.eps_conv}, {"eps_cycle", c.tolerances.eps_cycle}}},
           {"grid_n", c.grid_n},
           {"quantum_player", c.quantum_player},
           {"output", {{"path", c.output.path}, {"format", c.output.format}}}};
}

// Missing keys keep their current values, so a partial file overlays defaults.
inline void from_json(const nlohmann::json& j, RunConfig& c) {
  auto get = [](const nlohmann::json& obj, const char* key, auto& target) {
    if (obj.contains(key)) obj.at(key).get_to(target);
  };
  auto get_opt = [](const nlohmann::json& obj, const char* key, auto& target) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
      target.reset();
    } else {
      target = obj.at(key).get<typename std::decay_t<decltype(target)>::value_type>();
    }
  };
  get(j, "game", c.game);
  get_opt(j, "matrix_a", c.matrix_a);
  get_opt(j, "matrix_b", c.matrix_b);
  get(j, "mode", c.mode);
  if (j.contains("init")) {
    const auto& i = j.at("init");
    get(i, "x0", c.init.x0);
    get(i, "y0", c.init.y0);
    get_opt(i, "theta0", c.init.theta0);
    get_opt(i, "phi0", c.init.phi0);
    get(i, "alpha0", c.init.alpha0);
  }
  if (j.contains("dynamics")) {
    const auto& d = j.at("dynamics");
    get(d, "gamma", c.dynamics.gamma);
    get(d, "dt", c.dynamics.dt);
    get(d, "t_max", c.dynamics.t_max);
    get(d, "stride", c.dynamics.stride);
    get(d, "hamiltonian", c.dynamics.hamiltonian);
    get(d, "renormalize", c.dynamics.renormalize);
  }
  if (j.contains("tolerances")) {
    get(j.at("tolerances"), "eps_conv", c.tolerances.eps_conv);
    get(j.at("tolerances"), "eps_cycle", c.tolerances.eps_cycle);
  }
  get(j, "grid_n", c.grid_n);
  get(j, "quantum_player", c.quantum_player);
  if (j.contains("output")) {
    get(j.at("output"), "path", c.output.path);
    get(j.at("output"), "format", c.output.format);
  }
}

inline std::string serialize_config(const RunConfig& c) { return nlohmann::json(c).dump(2); }

inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  try {
    from_json(nlohmann::json::parse(text), base);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invalid config: ") + e.what());
  }
  return base;
}

// ---------------------------------------------------------------------------
// CSV

// 17 significant digits: parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_double(values[i]);
  out << '\n';
}

}  // namespace detail

// Also used for mixed matches, where x_T / y_T are the induced probabilities.
inline void write_classical_csv(std::ostream& out, const Trajectory& traj) {
  out << kClassicalHeader << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k)
    detail::write_row(out, {traj.times[k], traj.positions[k][0], traj.positions[k][1], traj.payoffs[k].u_a,
                            traj.payoffs[k].u_b});
}

inline void write_quantum_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.kind != TrajectoryKind::Quantum) throw InvalidInput("quantum CSV needs a quantum trajectory");
  out << kQuantumHeader << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto amps = joint_amplitudes(traj, k);
    const auto p = born_joint_probabilities(amps);
    std::vector<double> row{traj.times[k]};
    for (const auto& a : amps) {
      row.push_back(a.real());
      row.push_back(a.imag());
    }
    row.insert(row.end(), p.begin(), p.end());
    row.push_back(traj.payoffs[k].u_a);
    row.push_back(traj.payoffs[k].u_b);
    row.push_back(traj.norms[k]);
    detail::write_row(out, row);
  }
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << kSweepHeader << '\n';
  for (const auto& p : sweep.points)
    out << format_double(p.x0) << ',' << format_double(p.y0) << ',' << p.label.name() << ','
        << format_double(p.label.residual) << '\n';
}

struct CsvTable {
  std::string header;
  std::vector<std::vector<std::string>> rows;

  // strtod rather than stod: stod rejects subnormal values.
  double number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows.at(row).at(col);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw InvalidInput("not a number: " + cell);
    return v;
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::getline(in, table.header);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Metadata sidecars

inline nlohmann::json label_json(const AttractorLabel& label) {
  nlohmann::json j{{"label", label.name()}, {"residual", label.residual}, {"terminal_position", label.terminal_position}};
  if (label.kind == AttractorKind::Cycle) j["period"] = label.period;
  return j;
}

inline nlohmann::json diagnostics_json(const RunDiagnostics& d) {
  return {{"max_drift", d.max_drift},
          {"flagged_steps", d.flagged_steps},
          {"max_product_deviation", d.max_product_deviation},
          {"stopped_early", d.stopped_early}};
}

inline nlohmann::json metadata(const RunConfig& config, nlohmann::json result) {
  return {{"version", kVersion}, {"config", config}, {"result", std::move(result)}};
}

// Writes `body` to `path` and the metadata to `path + ".meta.json"`.
template <typename Body>
void write_with_sidecar(const std::string& path, Body&& body, const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open output file: " + path);
  body(out);
  std::ofstream side(path + ".meta.json");
  if (!side) throw OutputError("cannot open metadata file: " + path + ".meta.json");
  side << meta.dump(2) << '\n';
  if (!out || !side) throw OutputError("write failed: " + path);
}

}  // namespace qevo
