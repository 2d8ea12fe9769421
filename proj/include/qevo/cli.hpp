#pragma once

// Command-line front end: analyze | simulate | sweep | match | verify.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qevo/classical_dynamics.hpp"
#include "qevo/experiments.hpp"
#include "qevo/game_model.hpp"
#include "qevo/io.hpp"
#include "qevo/quantum_dynamics.hpp"
#include "qevo/verify.hpp"

namespace qevo::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kNumericalFailure = 3, kVerifyFailure = 4 };

inline constexpr const char* kOutputDirEnv = "QEVO_OUTPUT_DIR";

namespace detail {

struct Flags {
  std::string config_path;
  std::string game;
  std::vector<double> a;
  std::vector<double> b;
  std::string mode;
  double x0 = 0, y0 = 0, theta0 = 0, phi0 = 0, alpha0 = 0;
  double gamma = 0, dt = 0, t_max = 0;
  int stride = 0;
  std::string hamiltonian;
  bool renormalize = true;
  double eps_conv = 0, eps_cycle = 0;
  int grid = 0;
  int quantum_player = 0;
  std::string out;
};

inline void add_options(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_path, "JSON run configuration; flags override its values");
  app.add_option("--game", f.game, "preset: trading-farming | prisoners-dilemma | hawk-dove | dominant");
  app.add_option("--A", f.a, "row payoff matrix a,b,c,d")->delimiter(',')->expected(4);
  app.add_option("--B", f.b, "column payoff matrix (default: transpose of A)")->delimiter(',')->expected(4);
  app.add_option("--mode", f.mode, "classical | quantum | mixed");
  app.add_option("--x0", f.x0, "initial probability of T for the row player");
  app.add_option("--y0", f.y0, "initial probability of T for the column player");
  app.add_option("--theta0", f.theta0, "row player's initial angle");
  app.add_option("--phi0", f.phi0, "column player's initial angle");
  app.add_option("--alpha0", f.alpha0, "initial relative phase");
  app.add_option("--gamma", f.gamma, "evolution rate");
  app.add_option("--dt", f.dt, "time step");
  app.add_option("--t-max", f.t_max, "time horizon");
  app.add_option("--stride", f.stride, "record every n-th step");
  app.add_option("--hamiltonian", f.hamiltonian, "h-def | hermitized | tangent");
  app.add_flag("--renormalize,!--no-renormalize", f.renormalize, "renormalize quantum states after each step");
  app.add_option("--eps-conv", f.eps_conv, "convergence tolerance");
  app.add_option("--eps-cycle", f.eps_cycle, "recurrence tolerance");
  app.add_option("--grid", f.grid, "sweep lattice size");
  app.add_option("--quantum-player", f.quantum_player, "0 = row, 1 = column");
  app.add_option("--out", f.out, "output file");
}

inline bool given(const CLI::App& app, const char* name) { return app.count(name) > 0; }

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::array<double, 4> to_array4(const std::vector<double>& v) { return {v[0], v[1], v[2], v[3]}; }

inline RunConfig build_config(const CLI::App& app, const Flags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
  if (given(app, "--game")) {
    c.game = f.game;
    c.matrix_a.reset();
    c.matrix_b.reset();
  }
  if (given(app, "--A")) {
    c.game = "custom";
    c.matrix_a = to_array4(f.a);
  }
  if (given(app, "--B")) c.matrix_b = to_array4(f.b);
  if (given(app, "--mode")) c.mode = f.mode;
  if (given(app, "--x0")) c.init.x0 = f.x0;
  if (given(app, "--y0")) c.init.y0 = f.y0;
  if (given(app, "--theta0")) c.init.theta0 = f.theta0;
  if (given(app, "--phi0")) c.init.phi0 = f.phi0;
  if (given(app, "--alpha0")) c.init.alpha0 = f.alpha0;
  if (given(app, "--gamma")) c.dynamics.gamma = f.gamma;
  if (given(app, "--dt")) c.dynamics.dt = f.dt;
  if (given(app, "--t-max")) c.dynamics.t_max = f.t_max;
  if (given(app, "--stride")) c.dynamics.stride = f.stride;
  if (given(app, "--hamiltonian")) c.dynamics.hamiltonian = f.hamiltonian;
  if (given(app, "--renormalize") || given(app, "--no-renormalize")) c.dynamics.renormalize = f.renormalize;
  if (given(app, "--eps-conv")) c.tolerances.eps_conv = f.eps_conv;
  if (given(app, "--eps-cycle")) c.tolerances.eps_cycle = f.eps_cycle;
  if (given(app, "--grid")) c.grid_n = f.grid;
  if (given(app, "--quantum-player")) c.quantum_player = f.quantum_player;
  if (given(app, "--out")) c.output.path = f.out;
  return c;
}

inline std::string output_path(const RunConfig& c, const std::string& command) {
  if (!c.output.path.empty()) return c.output.path;
  const char* dir = std::getenv(kOutputDirEnv);
  const std::filesystem::path base = dir && *dir ? dir : ".";
  return (base / ("qevo_" + command + ".csv")).string();
}

inline IntegrationParams integration(const RunConfig& c) {
  return {c.dynamics.dt, c.dynamics.t_max, c.dynamics.stride};
}

inline DetectorConfig detector(const RunConfig& c, const Game& g) {
  DetectorConfig d;
  d.eps_conv = c.tolerances.eps_conv;
  d.eps_cycle = c.tolerances.eps_cycle;
  d.internal_point = internal_point(g);
  return d;
}

// Angle whose squared cosine is p.
inline double angle_for(double p) { return std::acos(std::sqrt(p)); }

inline LocalQuantumState row_state(const RunConfig& c) {
  return LocalQuantumState::from_angles(c.init.theta0.value_or(angle_for(c.init.x0)), c.init.alpha0);
}

inline LocalQuantumState col_state(const RunConfig& c) {
  return LocalQuantumState::from_angles(c.init.phi0.value_or(angle_for(c.init.y0)), c.init.alpha0);
}

inline std::string matrix_text(const Mat2& m) {
  return "[[" + format_double(m(0, 0)) + ", " + format_double(m(0, 1)) + "], [" + format_double(m(1, 0)) + ", " +
         format_double(m(1, 1)) + "]]";
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_analyze(const RunConfig& c, std::ostream& out) {
  const Game g = resolve_game(c);
  const EquilibriumReport r = analyze(g);
  out << "game: " << c.game << '\n';
  out << "A = " << matrix_text(g.A()) << '\n';
  out << "B = " << matrix_text(g.B()) << '\n';
  out << "class: " << to_string(r.game_class) << '\n';
  out << "pure equilibria:";
  if (r.pure.empty()) out << " none";
  for (Profile p : r.pure) out << ' ' << to_string(p);
  out << '\n';
  out << "internal equilibrium: ";
  if (r.internal) {
    out << '(' << format_double(r.internal->x[0]) << ", " << format_double(r.internal->y[0]) << ")\n";
  } else {
    out << "none\n";
  }
  return kOk;
}

inline nlohmann::json match_json(const MatchResult& m) {
  nlohmann::json j{{"quantum_player", m.quantum_player == Player::Row ? 0 : 1},
                   {"hamiltonian", std::string(to_string(m.mode))},
                   {"acc_a", m.acc_a},
                   {"acc_b", m.acc_b},
                   {"attractor", label_json(m.label)},
                   {"diagnostics", diagnostics_json(m.traj.diagnostics)}};
  if (m.baseline) {
    j["baseline"] = {{"acc_a", m.baseline->acc.u_a},
                     {"acc_b", m.baseline->acc.u_b},
                     {"attractor", label_json(m.baseline->label)}};
  }
  return j;
}

inline MatchResult run_match(const RunConfig& c, const Game& g, bool baseline) {
  const Player qp = c.quantum_player == 0 ? Player::Row : Player::Column;
  const MatchInit init = qp == Player::Row ? MatchInit{row_state(c), MixedStrategy::of(c.init.y0)}
                                           : MatchInit{col_state(c), MixedStrategy::of(c.init.x0)};
  MatchParams p;
  p.gamma = c.dynamics.gamma;
  p.integration = integration(c);
  p.hamiltonian = parse_hamiltonian_mode(c.dynamics.hamiltonian);
  p.renormalize = c.dynamics.renormalize;
  p.with_baseline = baseline;
  p.detector = detector(c, g);
  return mixed_match(g, qp, init, p);
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const Game g = resolve_game(c);
  const std::string path = output_path(c, "simulate");
  const DetectorConfig det = detector(c, g);
  if (c.mode == "classical") {
    ClassicalParams p{c.dynamics.gamma, integration(c), Freeze::None};
    const Trajectory traj = evolve_classical(g, MixedStrategy::of(c.init.x0), MixedStrategy::of(c.init.y0), p);
    const AttractorLabel label = detect_attractor(traj, det);
    write_with_sidecar(
        path, [&](std::ostream& o) { write_classical_csv(o, traj); },
        metadata(c, {{"attractor", label_json(label)}, {"diagnostics", diagnostics_json(traj.diagnostics)}}));
    out << "simulate classical: " << traj.size() << " samples, " << label.name() << " -> " << path << '\n';
    return kOk;
  }
  if (c.mode == "quantum") {
    QuantumParams p;
    p.gamma = c.dynamics.gamma;
    p.integration = integration(c);
    p.mode = parse_hamiltonian_mode(c.dynamics.hamiltonian);
    p.renormalize = c.dynamics.renormalize;
    const Trajectory traj = evolve_quantum(JointQuantumState::product(row_state(c), col_state(c)), g, p);
    const AttractorLabel label = detect_attractor(traj, det);
    write_with_sidecar(
        path, [&](std::ostream& o) { write_quantum_csv(o, traj); },
        metadata(c, {{"hamiltonian", c.dynamics.hamiltonian},
                     {"attractor", label_json(label)},
                     {"diagnostics", diagnostics_json(traj.diagnostics)}}));
    out << "simulate quantum (" << c.dynamics.hamiltonian << "): " << traj.size() << " samples, " << label.name()
        << " -> " << path << '\n';
    return kOk;
  }
  const MatchResult m = run_match(c, g, false);
  write_with_sidecar(
      path, [&](std::ostream& o) { write_classical_csv(o, m.traj); }, metadata(c, match_json(m)));
  out << "simulate mixed (" << c.dynamics.hamiltonian << "): " << m.traj.size() << " samples, " << m.label.name()
      << " -> " << path << '\n';
  return kOk;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  if (c.mode == "mixed") throw InvalidInput("sweep supports classical or quantum mode");
  const Game g = resolve_game(c);
  SweepParams p;
  p.gamma = c.dynamics.gamma;
  p.integration = integration(c);
  p.hamiltonian = parse_hamiltonian_mode(c.dynamics.hamiltonian);
  p.renormalize = c.dynamics.renormalize;
  p.detector = detector(c, g);
  const SweepMode mode = c.mode == "quantum" ? SweepMode::Quantum : SweepMode::Classical;
  const SweepResult r = basin_sweep(g, mode, c.grid_n, p);
  const std::string path = output_path(c, "sweep");
  write_with_sidecar(
      path, [&](std::ostream& o) { write_sweep_csv(o, r); }, metadata(c, {{"summary", r.summary}}));
  out << "sweep " << c.mode << " grid " << c.grid_n << ":";
  for (const auto& [name, count] : r.summary) out << ' ' << name << '=' << count;
  out << " -> " << path << '\n';
  return kOk;
}

inline int cmd_match(const RunConfig& c, std::ostream& out) {
  const Game g = resolve_game(c);
  const MatchResult m = run_match(c, g, true);
  const std::string path = output_path(c, "match");
  write_with_sidecar(
      path, [&](std::ostream& o) { write_classical_csv(o, m.traj); }, metadata(c, match_json(m)));
  const double quantum_acc = m.quantum_player == Player::Row ? m.acc_a : m.acc_b;
  const double classical_acc = m.quantum_player == Player::Row ? m.baseline->acc.u_a : m.baseline->acc.u_b;
  out << "match (" << to_string(m.mode) << "): quantum player accumulated " << format_double(quantum_acc)
      << ", classical baseline " << format_double(classical_acc) << ", " << m.label.name() << " -> " << path << '\n';
  return kOk;
}

inline int cmd_verify(std::ostream& out) {
  const auto results = verify::run_invariant_suite();
  int failures = 0;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.module << ": " << r.name << " (" << r.detail << ")\n";
    failures += !r.pass;
  }
  out << results.size() - static_cast<std::size_t>(failures) << '/' << results.size() << " invariants hold\n";
  return failures == 0 ? kOk : kVerifyFailure;
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Classical and quantum replicator dynamics for 2x2 games", "qevo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  detail::Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    CLI::App* app = nullptr;
  };
  std::vector<Entry> commands = {{"analyze", "equilibria and classification of a game"},
                                 {"simulate", "integrate one trajectory and write it as CSV"},
                                 {"sweep", "label the attractor reached from each lattice start"},
                                 {"match", "quantum player against a classical player, with baseline"},
                                 {"verify", "run the invariant diagnostic suite"}};
  for (auto& e : commands) {
    e.app = app.add_subcommand(e.name, e.help);
    if (std::string(e.name) != "verify") detail::add_options(*e.app, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kInvalidInput;
  }

  try {
    for (const auto& e : commands) {
      if (!e.app->parsed()) continue;
      const std::string name = e.name;
      if (name == "verify") return detail::cmd_verify(out);
      const RunConfig config = detail::build_config(*e.app, flags);
      validate(config, name == "sweep");
      if (name == "analyze") return detail::cmd_analyze(config, out);
      if (name == "simulate") return detail::cmd_simulate(config, out);
      if (name == "sweep") return detail::cmd_sweep(config, out);
      return detail::cmd_match(config, out);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kInvalidInput;
}

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"qevo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace qevo::cli
