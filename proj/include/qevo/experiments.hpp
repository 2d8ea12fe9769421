#pragma once

// Reproduction drivers: preset games, basin-of-attraction sweeps,
// quantum-vs-classical matches and the Nash-to-fixed-point check.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qevo/classical_dynamics.hpp"
#include "qevo/core.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/game_model.hpp"
#include "qevo/quantum_dynamics.hpp"

namespace qevo {

inline constexpr std::array<std::string_view, 4> kPresetNames = {"trading-farming", "prisoners-dilemma", "hawk-dove",
                                                                 "dominant"};

inline Game preset_game(std::string_view name) {
  if (name == "trading-farming") return Game::symmetric(1.0, 0.0, 0.5, 0.5);
  if (name == "prisoners-dilemma") return Game::symmetric(0.0, 5.0, 1.0, 3.0);  // b > d > c > a
  if (name == "hawk-dove") return Game::symmetric(-1.0, 2.0, 0.0, 1.0);
  if (name == "dominant") return Game::symmetric(2.0, 1.0, 1.0, 0.0);
  throw InvalidInput("unknown preset game: " + std::string(name));
}

inline std::optional<std::array<double, 2>> internal_point(const Game& g) {
  if (auto ie = internal_equilibrium(g)) return std::array<double, 2>{ie->x[0], ie->y[0]};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Accumulated payoff

// Trapezoidal integral of the recorded payoff samples.
inline PayoffPair accumulated_payoff(const Trajectory& traj) {
  if (traj.size() < 2) throw InvalidInput("accumulated payoff needs at least two samples");
  PayoffPair acc;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double h = traj.times[k + 1] - traj.times[k];
    acc.u_a += 0.5 * h * (traj.payoffs[k].u_a + traj.payoffs[k + 1].u_a);
    acc.u_b += 0.5 * h * (traj.payoffs[k].u_b + traj.payoffs[k + 1].u_b);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Basin sweep

enum class SweepMode { Classical, Quantum };

struct SweepParams {
  double gamma = 1.0;
  IntegrationParams integration;
  HamiltonianMode hamiltonian = HamiltonianMode::HDef;
  bool renormalize = true;
  DetectorConfig detector;
};

struct SweepPoint {
  double x0 = 0.0;
  double y0 = 0.0;
  AttractorLabel label;
};

struct SweepResult {
  int grid_n = 0;
  std::vector<SweepPoint> points;  // row-major: x index outer, y index inner
  std::map<std::string, int> summary;
};

inline double lattice_coordinate(int i, int grid_n) { return (i + 0.5) / grid_n; }

inline AttractorLabel run_and_label(const Game& g, SweepMode mode, double x0, double y0, const SweepParams& params) {
  DetectorConfig detector = params.detector;
  if (!detector.internal_point) detector.internal_point = internal_point(g);
  const auto x = MixedStrategy::of(x0);
  const auto y = MixedStrategy::of(y0);
  if (mode == SweepMode::Classical) {
    ClassicalParams cp{params.gamma, params.integration, Freeze::None};
    const auto traj = evolve_classical(g, x, y, cp, ConvergenceMonitor{detector.eps_conv, detector.window});
    return detect_attractor(traj, detector);
  }
  QuantumParams qp;
  qp.gamma = params.gamma;
  qp.integration = params.integration;
  qp.mode = params.hamiltonian;
  qp.renormalize = params.renormalize;
  return detect_attractor(evolve_quantum(embed_classical(x, y), g, qp), detector);
}

// Quantum starts embed (x0, y0) with real amplitudes.
inline SweepResult basin_sweep(const Game& g, SweepMode mode, int grid_n, const SweepParams& params = {}) {
  if (grid_n < 2) throw InvalidInput("grid_n must be >= 2");
  params.integration.validate();
  SweepResult result;
  result.grid_n = grid_n;
  result.points.reserve(static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double x0 = lattice_coordinate(i, grid_n);
      const double y0 = lattice_coordinate(j, grid_n);
      try {
        SweepPoint point{x0, y0, run_and_label(g, mode, x0, y0, params)};
        ++result.summary[point.label.name()];
        result.points.push_back(std::move(point));
      } catch (const NumericalFailure& e) {
        throw NumericalFailure("sweep point (" + std::to_string(x0) + ", " + std::to_string(y0) + "): " + e.what());
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Mixed match: one quantum player against one classical player

struct MatchInit {
  LocalQuantumState quantum;
  MixedStrategy classical;
};

struct MatchParams {
  double gamma = 1.0;
  IntegrationParams integration;
  HamiltonianMode hamiltonian = HamiltonianMode::HDef;
  bool renormalize = true;
  bool with_baseline = true;
  DetectorConfig detector;
};

struct MatchBaseline {
  Trajectory traj;
  PayoffPair acc;
  AttractorLabel label;
};

struct MatchResult {
  Trajectory traj;
  double acc_a = 0.0;
  double acc_b = 0.0;
  Player quantum_player = Player::Row;
  HamiltonianMode mode = HamiltonianMode::HDef;
  AttractorLabel label;
  std::optional<MatchBaseline> baseline;
};

namespace detail {

// Row-first layout. Quantum row: (re psi_0, im psi_0, re psi_1, im psi_1, y_0, y_1).
// Quantum column: (x_0, x_1, re zeta_0, im zeta_0, re zeta_1, im zeta_1).
struct MixedLayout {
  std::size_t quantum;
  std::size_t classical;
};

inline MixedLayout mixed_layout(Player quantum_player) {
  return quantum_player == Player::Row ? MixedLayout{0, 4} : MixedLayout{2, 0};
}

inline std::array<Complex, 2> quantum_block(const State<6>& s, const MixedLayout& l) {
  return {Complex(s[l.quantum], s[l.quantum + 1]), Complex(s[l.quantum + 2], s[l.quantum + 3])};
}

}  // namespace detail

inline auto mixed_field(const Game& g, Player quantum_player, double gamma, HamiltonianMode mode) {
  const auto layout = detail::mixed_layout(quantum_player);
  return [g, quantum_player, gamma, mode, layout](double, const State<6>& s) {
    const auto psi = detail::quantum_block(s, layout);
    const std::array<double, 2> classical{s[layout.classical], s[layout.classical + 1]};
    const auto q_probs = detail::born_probabilities(psi);
    const CMat2 h = detail::local_generator(g, quantum_player, psi, classical, gamma, mode);
    const auto dpsi = detail::apply_generator(h, psi);
    const auto v = quantum_player == Player::Row ? detail::replicator_field(g, q_probs, classical, gamma)
                                                 : detail::replicator_field(g, classical, q_probs, gamma);
    const auto& dc = quantum_player == Player::Row ? v.dy : v.dx;
    State<6> d{};
    d[layout.quantum] = dpsi[0].real();
    d[layout.quantum + 1] = dpsi[0].imag();
    d[layout.quantum + 2] = dpsi[1].real();
    d[layout.quantum + 3] = dpsi[1].imag();
    d[layout.classical] = dc[0];
    d[layout.classical + 1] = dc[1];
    return d;
  };
}

inline Trajectory evolve_mixed(const Game& g, Player quantum_player, const MatchInit& init, const MatchParams& params) {
  detail::validate_gamma(params.gamma);
  const auto layout = detail::mixed_layout(quantum_player);
  State<6> s0{};
  s0[layout.quantum] = init.quantum[0].real();
  s0[layout.quantum + 1] = init.quantum[0].imag();
  s0[layout.quantum + 2] = init.quantum[1].real();
  s0[layout.quantum + 3] = init.quantum[1].imag();
  s0[layout.classical] = init.classical[0];
  s0[layout.classical + 1] = init.classical[1];

  const bool renormalize = params.renormalize;
  auto post = [layout, renormalize](State<6>& s, RunDiagnostics& diag) {
    double drift = detail::project_simplex(s[layout.classical], s[layout.classical + 1]);
    if (drift > kSimplexDriftFlag) ++diag.flagged_steps;
    if (renormalize) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 4; ++i) acc += s[layout.quantum + i] * s[layout.quantum + i];
      const double n = std::sqrt(acc);
      if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("quantum state norm collapsed");
      for (std::size_t i = 0; i < 4; ++i) s[layout.quantum + i] /= n;
      drift = std::max(drift, std::abs(n - 1.0));
    }
    diag.max_drift = std::max(diag.max_drift, drift);
  };

  auto sampler = [g, quantum_player, layout](double, const State<6>& s) {
    SampleInfo info;
    info.snapshot.assign(s.begin(), s.end());
    const auto q_probs = detail::born_probabilities(detail::quantum_block(s, layout));
    const std::array<double, 2> classical{s[layout.classical], s[layout.classical + 1]};
    const auto& x = quantum_player == Player::Row ? q_probs : classical;
    const auto& y = quantum_player == Player::Row ? classical : q_probs;
    const auto ay = row_pure_payoffs(g, y);
    const auto xb = col_pure_payoffs(g, x);
    info.payoff = {x[0] * ay[0] + x[1] * ay[1], y[0] * xb[0] + y[1] * xb[1]};
    info.norm = std::abs(std::sqrt(std::norm(Complex(s[layout.quantum], s[layout.quantum + 1])) +
                                   std::norm(Complex(s[layout.quantum + 2], s[layout.quantum + 3]))));
    info.position = {x[0], y[0]};
    return info;
  };

  Trajectory traj = integrate<6>(mixed_field(g, quantum_player, params.gamma, params.hamiltonian), s0,
                                 params.integration, post, sampler);
  traj.kind = TrajectoryKind::Mixed;
  return traj;
}

// The baseline replaces the quantum player by a classical replicator player
// starting from the quantum state's induced distribution.
inline MatchResult mixed_match(const Game& g, Player quantum_player, const MatchInit& init,
                               const MatchParams& params = {}) {
  params.integration.validate();
  DetectorConfig detector = params.detector;
  if (!detector.internal_point) detector.internal_point = internal_point(g);

  MatchResult result;
  result.quantum_player = quantum_player;
  result.mode = params.hamiltonian;
  result.traj = evolve_mixed(g, quantum_player, init, params);
  const PayoffPair acc = accumulated_payoff(result.traj);
  result.acc_a = acc.u_a;
  result.acc_b = acc.u_b;
  result.label = detect_attractor(result.traj, detector);

  if (params.with_baseline) {
    const auto probs = init.quantum.probabilities();
    const MixedStrategy induced({probs[0], probs[1]});
    const auto& x = quantum_player == Player::Row ? induced : init.classical;
    const auto& y = quantum_player == Player::Row ? init.classical : induced;
    MatchBaseline baseline;
    baseline.traj = evolve_classical(g, x, y, ClassicalParams{params.gamma, params.integration, Freeze::None});
    baseline.acc = accumulated_payoff(baseline.traj);
    baseline.label = detect_attractor(baseline.traj, detector);
    result.baseline = std::move(baseline);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Nash-to-fixed-point check

struct FixedPointReport {
  std::array<double, 4> distribution{};
  std::array<double, 2> x{};
  std::array<double, 2> y{};
  double velocity_norm = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Measures q, takes the marginals, and checks that the classical replicator
// velocity vanishes there. Passing does not certify q as a quantum equilibrium.
inline FixedPointReport nash_fixed_point_check(const JointQuantumState& q, const Game& g, double tol) {
  const JointDistribution p = induced_distribution(q);
  FixedPointReport report;
  report.distribution = p.probs();
  report.x = p.row_marginal();
  report.y = p.col_marginal();
  report.tolerance = tol;
  const auto v = detail::replicator_field(g, report.x, report.y, 1.0);
  report.velocity_norm = std::sqrt(v.dx[0] * v.dx[0] + v.dx[1] * v.dx[1] + v.dy[0] * v.dy[0] + v.dy[1] * v.dy[1]);
  report.pass = report.velocity_norm < tol;
  return report;
}

}  // namespace qevo
