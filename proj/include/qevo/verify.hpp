#pragma once

// Invariant diagnostics run by `qevo verify`. Each check samples random games
// and states from a fixed seed and reports pass/fail with its worst deviation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qevo/classical_dynamics.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/experiments.hpp"
#include "qevo/game_model.hpp"
#include "qevo/quantum_dynamics.hpp"

namespace qevo::verify {

struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Game game(bool symmetric) {
    if (symmetric) return Game::symmetric(uniform(-5, 5), uniform(-5, 5), uniform(-5, 5), uniform(-5, 5));
    Mat2 A, B;
    for (auto& v : A.data) v = uniform(-5, 5);
    for (auto& v : B.data) v = uniform(-5, 5);
    return Game::general(A, B);
  }

  // Symmetric game of class TypeI or TypeII (hence with an internal equilibrium).
  Game mixed_class_game() {
    for (;;) {
      Game g = game(true);
      const GameClass c = classify_symmetric(g);
      if ((c == GameClass::TypeI || c == GameClass::TypeII) && internal_equilibrium(g)) return g;
    }
  }

  Game game_with_internal_equilibrium() {
    for (;;) {
      Game g = game(false);
      if (internal_equilibrium(g)) return g;
    }
  }

  MixedStrategy strategy(double margin = 0.0) { return MixedStrategy::of(uniform(margin, 1.0 - margin)); }

  LocalQuantumState local_state() {
    return LocalQuantumState::normalized({Complex(uniform(-1, 1), uniform(-1, 1)), Complex(uniform(-1, 1), uniform(-1, 1))});
  }

  JointQuantumState joint_state() {
    std::array<Complex, 4> amps;
    for (auto& a : amps) a = Complex(uniform(-1, 1), uniform(-1, 1));
    const double n = norm(amps);
    for (auto& a : amps) a /= n;
    return JointQuantumState(amps);
  }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

inline CheckResult check(std::string module, std::string name, bool pass, std::string detail) {
  return {std::move(module), std::move(name), pass, std::move(detail)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// game_model

inline CheckResult payoff_bounds(Sampler& s) {
  bool ok = true;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(false);
    const PayoffPair u = expected_payoffs(s.strategy(), s.strategy(), g);
    const auto [amin, amax] = std::minmax_element(g.A().data.begin(), g.A().data.end());
    const auto [bmin, bmax] = std::minmax_element(g.B().data.begin(), g.B().data.end());
    ok = ok && u.u_a >= *amin - 1e-12 && u.u_a <= *amax + 1e-12 && u.u_b >= *bmin - 1e-12 && u.u_b <= *bmax + 1e-12;
  }
  return detail::check("game_model", "payoff bounds", ok, "1000 random games");
}

inline CheckResult bilinearity(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(false);
    const MixedStrategy x1 = s.strategy(), x2 = s.strategy(), y = s.strategy();
    const double lambda = s.uniform(0, 1);
    const MixedStrategy mix = MixedStrategy::of(lambda * x1[0] + (1 - lambda) * x2[0]);
    const double lhs = expected_payoffs(mix, y, g).u_a;
    const double rhs = lambda * expected_payoffs(x1, y, g).u_a + (1 - lambda) * expected_payoffs(x2, y, g).u_a;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return detail::check("game_model", "bilinearity", worst <= 1e-12, "max deviation " + detail::fmt(worst));
}

inline CheckResult equilibrium_indifference(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.mixed_class_game();
    const auto ie = *internal_equilibrium(g);
    const auto ay = row_pure_payoffs(g, ie.y.probs());
    const auto xb = col_pure_payoffs(g, ie.x.probs());
    worst = std::max({worst, std::abs(ay[0] - ay[1]), std::abs(xb[0] - xb[1])});
  }
  return detail::check("game_model", "internal equilibrium indifference", worst <= 1e-12,
                       "max payoff gap " + detail::fmt(worst));
}

inline CheckResult classification_total(Sampler& s) {
  bool ok = true;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(true);
    const double ac = g.A()(0, 0) - g.A()(1, 0), bd = g.A()(0, 1) - g.A()(1, 1);
    const int matches = (ac > 0 && bd > 0) + (ac < 0 && bd < 0) + (ac < 0 && bd > 0) + (ac > 0 && bd < 0) +
                        (ac == 0 || bd == 0);
    ok = ok && matches == 1 && classify_symmetric(g) != GameClass::Asymmetric;
    ok = ok && classify_symmetric(s.game(false)) == GameClass::Asymmetric;
  }
  ok = ok && classify_symmetric(Game::symmetric(1, 0, 1, 0.5)) == GameClass::Degenerate;
  return detail::check("game_model", "classification total and exhaustive", ok, "1000 random symmetric games");
}

inline CheckResult embed_roundtrip(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const MixedStrategy x = s.strategy(), y = s.strategy();
    const auto p = induced_distribution(embed_classical(x, y));
    const auto expect = kron(x.probs(), y.probs());
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(p[k] - expect[k]));
  }
  return detail::check("game_model", "induced distribution of embedding", worst <= 1e-12,
                       "max deviation " + detail::fmt(worst));
}

// ---------------------------------------------------------------------------
// classical_dynamics

inline CheckResult simplex_preservation(Sampler& s) {
  double worst = 0.0;
  std::size_t flagged = 0;
  for (int n = 0; n < 10; ++n) {
    ClassicalParams p;
    p.integration.t_max = 50;
    const auto traj = evolve_classical(s.game(false), s.strategy(0.01), s.strategy(0.01), p);
    worst = std::max(worst, traj.diagnostics.max_drift);
    flagged += traj.diagnostics.flagged_steps;
  }
  return detail::check("classical_dynamics", "simplex preservation", worst <= 1e-9 && flagged == 0,
                       "max pre-clip drift " + detail::fmt(worst));
}

inline CheckResult sign_factorization(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(false);
    const MixedStrategy x = s.strategy(), y = s.strategy();
    const double gamma = s.uniform(0.1, 3);
    const auto v = replicator_velocity(g, x, y, gamma);
    worst = std::max(worst, std::abs(v.dx[0] - gamma * x[0] * x[1] * row_delta(g, y[0])));
    worst = std::max(worst, std::abs(v.dy[0] - gamma * y[0] * y[1] * col_delta(g, x[0])));
  }
  return detail::check("classical_dynamics", "sign factorization", worst <= 1e-12,
                       "max deviation " + detail::fmt(worst));
}

inline CheckResult quadrant_constancy(Sampler& s) {
  int violations = 0;
  for (int n = 0; n < 100; ++n) {
    const Game g = s.game_with_internal_equilibrium();
    const auto ie = *internal_equilibrium(g);
    std::array<std::optional<QuadrantSignature>, 4> seen;
    for (int k = 0; k < 100; ++k) {
      const MixedStrategy x = s.strategy(1e-6), y = s.strategy(1e-6);
      if (x[0] == ie.x[0] || y[0] == ie.y[0]) continue;
      const int quadrant = 2 * (x[0] > ie.x[0]) + (y[0] > ie.y[0]);
      const auto sig = quadrant_signature(g, x, y);
      auto& slot = seen[static_cast<std::size_t>(quadrant)];
      if (slot && !(*slot == sig)) ++violations;
      if (!slot) slot = sig;
    }
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = a + 1; b < 4; ++b)
        if (seen[a] && seen[b] && *seen[a] == *seen[b]) ++violations;
  }
  return detail::check("classical_dynamics", "quadrant constancy", violations == 0,
                       std::to_string(violations) + " violations");
}

inline CheckResult symmetric_exchange(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(true);
    const MixedStrategy x = s.strategy(), y = s.strategy();
    const auto a = velocity_operator(g, x, y);
    const auto b = velocity_operator(g, y, x);
    worst = std::max({worst, std::abs(a.vx[0] - b.vy[0]), std::abs(a.vx[1] - b.vy[1])});
  }
  return detail::check("classical_dynamics", "symmetric exchange", worst <= 1e-12,
                       "max deviation " + detail::fmt(worst));
}

inline CheckResult diagonal_invariance(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 5; ++n) {
    const MixedStrategy x = s.strategy(0.01);
    ClassicalParams p;
    p.integration.t_max = 50;
    const auto traj = evolve_classical(s.game(true), x, x, p);
    for (const auto& pos : traj.positions) worst = std::max(worst, std::abs(pos[0] - pos[1]));
  }
  return detail::check("classical_dynamics", "diagonal invariance", worst < 1e-9,
                       "max |x_T - y_T| " + detail::fmt(worst));
}

inline CheckResult frozen_ascent(Sampler& s) {
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    const Game g = s.game(false);
    ClassicalParams p;
    p.integration.t_max = 20;
    p.freeze = Freeze::Column;
    const auto traj = evolve_classical(g, s.strategy(0.01), s.strategy(), p);
    worst = std::min(worst, adjustment_diagnostic(g, traj, false).min_rate_a);
  }
  return detail::check("classical_dynamics", "frozen-opponent payoff ascent", worst >= -1e-9,
                       "min du/dt " + detail::fmt(worst));
}

// ---------------------------------------------------------------------------
// quantum_dynamics

inline CheckResult norm_control(Sampler& s) {
  const Game g = s.game(true);
  const auto q0 = JointQuantumState::product(s.local_state(), s.local_state());
  QuantumParams renorm;
  renorm.integration.t_max = 20;
  double worst_renorm = 0.0;
  for (double n : evolve_quantum(q0, g, renorm).norms) worst_renorm = std::max(worst_renorm, std::abs(n - 1.0));
  QuantumParams herm;
  herm.integration.t_max = 100;
  herm.mode = HamiltonianMode::Hermitized;
  herm.renormalize = false;
  double worst_herm = 0.0;
  for (double n : evolve_quantum(q0, g, herm).norms) worst_herm = std::max(worst_herm, std::abs(n - 1.0));
  return detail::check("quantum_dynamics", "norm control", worst_renorm <= 1e-12 && worst_herm < 1e-6,
                       "renormalized " + detail::fmt(worst_renorm) + ", hermitized drift " + detail::fmt(worst_herm));
}

inline CheckResult product_preservation(Sampler& s) {
  double worst = 0.0;
  for (HamiltonianMode mode : {HamiltonianMode::HDef, HamiltonianMode::Hermitized, HamiltonianMode::Tangent}) {
    QuantumParams p;
    p.integration.t_max = 10;
    p.mode = mode;
    const auto traj = evolve_quantum(JointQuantumState::product(s.local_state(), s.local_state()), s.game(false), p);
    worst = std::max(worst, traj.diagnostics.max_product_deviation);
  }
  return detail::check("quantum_dynamics", "product preservation", worst < 1e-8, "max deviation " + detail::fmt(worst));
}

inline CheckResult payoff_consistency(Sampler& s) {
  bool ok = true;
  for (int n = 0; n < 1000; ++n) {
    const Game g = s.game(false);
    const JointQuantumState q = s.joint_state();
    const PayoffPair a = quantum_payoff(q, g);
    const PayoffPair b = expected_payoffs(induced_distribution(q), g);
    ok = ok && std::abs(a.u_a - b.u_a) <= 1e-15 && std::abs(a.u_b - b.u_b) <= 1e-15;
  }
  return detail::check("quantum_dynamics", "payoff consistency", ok, "1000 random joint states");
}

inline CheckResult zero_gap_stationarity(Sampler& s) {
  bool ok = true;
  for (int n = 0; n < 100; ++n) {
    const Game g = s.mixed_class_game();
    const auto ie = *internal_equilibrium(g);
    const auto q = embed_classical(ie.x, ie.y);
    const auto [row, col] = *q.product_tag();
    const auto ha = hamiltonian_local(g, Player::Row, row, col, 1.0, HamiltonianMode::HDef).matrix;
    const auto hb = hamiltonian_local(g, Player::Column, col, row, 1.0, HamiltonianMode::HDef).matrix;
    const auto va = quantum_partial_velocity(g, q, Player::Row);
    const auto vb = quantum_partial_velocity(g, q, Player::Column);
    const double gaps = std::max({std::abs(va[0]), std::abs(va[1]), std::abs(vb[0]), std::abs(vb[1])});
    const double h = max_abs_diff(product_hamiltonian(ha, hb), CMat4{});
    // Both vanish up to the rounding of the equilibrium coordinates.
    ok = ok && gaps <= 1e-12 && h <= 1e-12;
  }
  const Game flat = Game::symmetric(1, 1, 1, 1);
  const auto q = JointQuantumState::product(s.local_state(), s.local_state());
  const auto [row, col] = *q.product_tag();
  ok = ok && hamiltonian_local(flat, Player::Row, row, col, 1.0, HamiltonianMode::HDef).matrix == CMat2{};
  return detail::check("quantum_dynamics", "zero-gap stationarity", ok, "100 equilibrium states + flat game");
}

inline CheckResult hdef_zero_diagonal(Sampler& s) {
  bool ok = true;
  for (int n = 0; n < 1000; ++n) {
    const auto h = hamiltonian_local(s.game(false), Player::Row, s.local_state(), s.local_state(), s.uniform(0, 3),
                                     HamiltonianMode::HDef)
                       .matrix;
    ok = ok && h(0, 0) == Complex{} && h(1, 1) == Complex{};
  }
  return detail::check("quantum_dynamics", "h-def zero diagonal", ok, "1000 random generators");
}

// ---------------------------------------------------------------------------
// dynamics_engine

inline double exponential_error(double dt) {
  IntegrationParams p{dt, 1.0, 1};
  const auto traj = integrate<1>([](double, const State<1>& s) { return State<1>{-s[0]}; }, State<1>{1.0}, p);
  return std::abs(traj.states.back()[0] - std::exp(-1.0));
}

inline CheckResult integrator_order(Sampler&) {
  IntegrationParams ref_p{1e-5, 1.0, 1000};
  const auto ref = integrate<1>([](double, const State<1>& s) { return State<1>{-s[0]}; }, State<1>{1.0}, ref_p);
  const double reference = ref.states.back()[0];
  auto err = [&](double dt) {
    IntegrationParams p{dt, 1.0, 1};
    const auto t = integrate<1>([](double, const State<1>& s) { return State<1>{-s[0]}; }, State<1>{1.0}, p);
    return std::abs(t.states.back()[0] - reference);
  };
  const double ratio = err(0.1) / err(0.05);
  const double fine = exponential_error(1e-3);
  return detail::check("dynamics_engine", "order of accuracy", ratio >= 12.0 && fine < 1e-6,
                       "halving ratio " + detail::fmt(ratio) + ", error at dt=1e-3 " + detail::fmt(fine));
}

inline CheckResult determinism(Sampler& s) {
  const Game g = s.game(false);
  const MixedStrategy x = s.strategy(0.01), y = s.strategy(0.01);
  ClassicalParams p;
  p.integration.t_max = 20;
  const auto a = evolve_classical(g, x, y, p);
  const auto b = evolve_classical(g, x, y, p);
  QuantumParams qp;
  qp.integration.t_max = 5;
  const auto q0 = JointQuantumState::product(s.local_state(), s.local_state());
  const bool ok = a.states == b.states && evolve_quantum(q0, g, qp).states == evolve_quantum(q0, g, qp).states;
  return detail::check("dynamics_engine", "determinism", ok, "repeated classical and quantum runs");
}

inline CheckResult euler_oracle(Sampler&) {
  const Game g = preset_game("trading-farming");
  ClassicalParams p;
  p.integration.t_max = 10;
  const auto rk = evolve_classical(g, MixedStrategy::of(0.6), MixedStrategy::of(0.6), p);
  double x = 0.6, y = 0.6;
  const double dt = 1e-6;
  for (int k = 0; k < 10'000'000; ++k) {
    const double dx = x * (1 - x) * (y - 0.5);
    const double dy = y * (1 - y) * (x - 0.5);
    x += dt * dx;
    y += dt * dy;
  }
  const double err = std::max(std::abs(rk.positions.back()[0] - x), std::abs(rk.positions.back()[1] - y));
  return detail::check("dynamics_engine", "RK4 vs Euler oracle", err < 1e-4, "endpoint deviation " + detail::fmt(err));
}

inline std::vector<CheckResult> run_invariant_suite(std::uint64_t seed = 20240601) {
  Sampler s(seed);
  using Check = std::function<CheckResult(Sampler&)>;
  const std::vector<Check> checks = {payoff_bounds,        bilinearity,          equilibrium_indifference,
                                     classification_total, embed_roundtrip,      simplex_preservation,
                                     sign_factorization,   quadrant_constancy,   symmetric_exchange,
                                     diagonal_invariance,  frozen_ascent,        norm_control,
                                     product_preservation, payoff_consistency,   zero_gap_stationarity,
                                     hdef_zero_diagonal,   integrator_order,     determinism,
                                     euler_oracle};
  std::vector<CheckResult> results;
  for (const auto& c : checks) {
    try {
      results.push_back(c(s));
    } catch (const std::exception& e) {
      results.push_back({"?", "exception", false, e.what()});
    }
  }
  return results;
}

}  // namespace qevo::verify
