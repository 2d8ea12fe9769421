#pragma once

// Quantum replicator dynamics: embedding of classical strategies, Born-rule
// payoffs, partial traces, payoff-gap Hamiltonians and Schrodinger-equation
// evolution with a state-dependent generator (hbar = 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "qevo/classical_dynamics.hpp"
#include "qevo/core.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/game_model.hpp"
#include "qevo/quantum_state.hpp"

namespace qevo {

inline constexpr double kPurityTolerance = 1e-9;
inline const Complex kI{0.0, 1.0};

enum class Player { Row = 0, Column = 1 };

inline Player other(Player p) { return p == Player::Row ? Player::Column : Player::Row; }

inline JointQuantumState embed_classical(const MixedStrategy& x, const MixedStrategy& y) {
  const LocalQuantumState row({Complex(std::sqrt(x[0])), Complex(std::sqrt(x[1]))});
  const LocalQuantumState col({Complex(std::sqrt(y[0])), Complex(std::sqrt(y[1]))});
  return JointQuantumState::product(row, col);
}

inline PayoffPair quantum_payoff(const JointQuantumState& q, const Game& g) {
  return expected_payoffs(induced_distribution(q), g);
}

// ---------------------------------------------------------------------------
// Partial trace

struct ReducedState {
  std::optional<LocalQuantumState> ket;  // set when the reduced state is pure
  CMat2 density;
  double purity = 1.0;
  bool pure = true;
};

// Reduced density matrix of `keep`, i.e. the trace over the other player.
inline CMat2 reduced_density(const std::array<Complex, 4>& amps, Player keep) {
  CMat2 rho;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) {
      Complex acc{};
      for (std::size_t o = 0; o < 2; ++o) {
        const std::size_t ik = keep == Player::Row ? 2 * k + o : 2 * o + k;
        const std::size_t il = keep == Player::Row ? 2 * l + o : 2 * o + l;
        acc += amps[ik] * std::conj(amps[il]);
      }
      rho(k, l) = acc;
    }
  return rho;
}

// For explicit products the stored factor is returned as is. Otherwise a pure
// reduced density yields a ket (fixed up to a global phase); a mixed one sets
// pure = false and, in strict mode, throws NonProductState.
inline ReducedState reduced_state(const JointQuantumState& q, Player keep, bool strict = false) {
  ReducedState out;
  out.density = reduced_density(q.amps(), keep);
  double purity = 0.0;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) purity += std::norm(out.density(k, l));
  out.purity = purity;
  if (const auto& tag = q.product_tag()) {
    out.ket = keep == Player::Row ? tag->first : tag->second;
    return out;
  }
  out.pure = purity >= 1.0 - kPurityTolerance;
  if (!out.pure) {
    if (strict) throw NonProductState("reduced state is mixed (purity " + std::to_string(purity) + ")");
    return out;
  }
  const std::size_t pivot = out.density(0, 0).real() >= out.density(1, 1).real() ? 0 : 1;
  const double scale = std::sqrt(out.density(pivot, pivot).real());
  out.ket = LocalQuantumState::normalized({out.density(0, pivot) / scale, out.density(1, pivot) / scale});
  return out;
}

// Splits a product joint state into local factors whose tensor product equals
// the input exactly up to rounding (the global phase is carried by the row factor).
inline std::pair<LocalQuantumState, LocalQuantumState> factorize(const JointQuantumState& q) {
  if (const auto& tag = q.product_tag()) return *tag;
  const LocalQuantumState row = *reduced_state(q, Player::Row, true).ket;
  const LocalQuantumState col = *reduced_state(q, Player::Column, true).ket;
  const auto guess = kron(row.amps(), col.amps());
  Complex overlap{};
  for (std::size_t k = 0; k < 4; ++k) overlap += std::conj(guess[k]) * q[k];
  const Complex phase = overlap / std::abs(overlap);
  return {LocalQuantumState::normalized({phase * row[0], phase * row[1]}), col};
}

// ---------------------------------------------------------------------------
// Partial velocities and generators

namespace detail {

inline std::array<double, 2> born_probabilities(const std::array<Complex, 2>& amps) {
  const double p0 = std::norm(amps[0]);
  const double p1 = std::norm(amps[1]);
  const double total = p0 + p1;
  return {p0 / total, p1 / total};
}

// Payoffs of `player`'s two pure strategies against the opponent's distribution.
inline std::array<double, 2> pure_payoffs(const Game& g, Player player, const std::array<double, 2>& opp) {
  return player == Player::Row ? row_pure_payoffs(g, opp) : col_pure_payoffs(g, opp);
}

}  // namespace detail

// v_i = u(|i>, opponent's reduced state) - u(current joint state).
inline std::array<double, 2> quantum_partial_velocity(const Game& g, const JointQuantumState& q, Player player,
                                                      bool strict = true) {
  const ReducedState opp = reduced_state(q, other(player), strict);
  const std::array<double, 2> opp_probs{opp.density(0, 0).real(), opp.density(1, 1).real()};
  const auto pure = detail::pure_payoffs(g, player, opp_probs);
  const PayoffPair current = quantum_payoff(q, g);
  const double u = player == Player::Row ? current.u_a : current.u_b;
  return {pure[0] - u, pure[1] - u};
}

enum class HamiltonianMode { HDef, Hermitized, Tangent };

inline std::string_view to_string(HamiltonianMode m) {
  switch (m) {
    case HamiltonianMode::HDef: return "h-def";
    case HamiltonianMode::Hermitized: return "hermitized";
    case HamiltonianMode::Tangent: return "tangent";
  }
  return "?";
}

inline HamiltonianMode parse_hamiltonian_mode(std::string_view name) {
  if (name == "h-def") return HamiltonianMode::HDef;
  if (name == "hermitized") return HamiltonianMode::Hermitized;
  if (name == "tangent") return HamiltonianMode::Tangent;
  throw InvalidInput("unknown hamiltonian mode: " + std::string(name));
}

// A local generator together with the mode that produced it.
//
//   h-def:      H(a, b) = gamma <a|psi> (u_a - u_b), zero diagonal.
//   hermitized: (H + H^dagger) / 2.
//   tangent:    gamma (u_0 - u_1) sigma_y, for which -i H psi equals
//               gamma (u_0 - u_1) (-psi_1, psi_0): the rotation of
//               (e^{i alpha} cos theta, e^{-i alpha} sin theta) along theta.
struct LocalGenerator {
  CMat2 matrix;
  HamiltonianMode mode = HamiltonianMode::HDef;
};

namespace detail {

inline CMat2 local_generator(const Game& g, Player player, const std::array<Complex, 2>& own,
                             const std::array<double, 2>& opp_probs, double gamma, HamiltonianMode mode) {
  const auto u = pure_payoffs(g, player, opp_probs);
  CMat2 h;
  switch (mode) {
    case HamiltonianMode::Tangent: {
      const double gap = gamma * (u[0] - u[1]);
      h(0, 1) = Complex(0.0, -gap);
      h(1, 0) = Complex(0.0, gap);
      return h;
    }
    case HamiltonianMode::HDef:
    case HamiltonianMode::Hermitized:
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          if (a != b) h(a, b) = gamma * own[a] * (u[a] - u[b]);
      if (mode == HamiltonianMode::Hermitized) h = Complex(0.5) * (h + adjoint(h));
      return h;
  }
  throw InvalidInput("invalid hamiltonian mode");
}

// Experimental reading of the general generator display: entries
// -i gamma (u_i - u_j) scaled by the sum of the opponent's amplitudes.
inline CMat2 general_display_generator(const Game& g, Player player, const std::array<Complex, 2>& opp_amps,
                                       double gamma) {
  const auto u = pure_payoffs(g, player, born_probabilities(opp_amps));
  const Complex weight = opp_amps[0] + opp_amps[1];
  CMat2 h;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) h(i, j) = -kI * gamma * (u[i] - u[j]) * weight;
  return h;
}

}  // namespace detail

inline LocalGenerator hamiltonian_local(const Game& g, Player player, const LocalQuantumState& own,
                                        const std::array<double, 2>& opp_probs, double gamma,
                                        HamiltonianMode mode) {
  detail::validate_gamma(gamma);
  return {detail::local_generator(g, player, own.amps(), opp_probs, gamma, mode), mode};
}

inline LocalGenerator hamiltonian_local(const Game& g, Player player, const LocalQuantumState& own,
                                        const LocalQuantumState& opp, double gamma, HamiltonianMode mode) {
  return hamiltonian_local(g, player, own, opp.probabilities(), gamma, mode);
}

inline LocalGenerator hamiltonian_local(const Game& g, Player player, const LocalQuantumState& own,
                                        const MixedStrategy& opp, double gamma, HamiltonianMode mode) {
  return hamiltonian_local(g, player, own, opp.probs(), gamma, mode);
}

inline LocalGenerator hamiltonian_general_display(const Game& g, Player player, const LocalQuantumState& opp,
                                                  double gamma) {
  detail::validate_gamma(gamma);
  return {detail::general_display_generator(g, player, opp.amps(), gamma), HamiltonianMode::HDef};
}

// I (x) H_column + H_row (x) I
inline CMat4 product_hamiltonian(const CMat2& h_row, const CMat2& h_col) {
  return kron(CMat2::identity(), h_col) + kron(h_row, CMat2::identity());
}

// One RK4 step of d psi/dt = -i H psi with H held fixed.
template <std::size_t N>
std::array<Complex, N> schrodinger_step(const std::array<Complex, N>& state, const ComplexMatrix<N>& h, double dt,
                                        bool renormalize) {
  if (!all_finite(h)) throw NumericalFailure("hamiltonian has non-finite entries");
  if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
  const auto deriv = [&](const std::array<Complex, N>& psi) {
    auto out = h * psi;
    for (auto& c : out) c *= -kI;
    return out;
  };
  const auto axpy = [](const std::array<Complex, N>& base, double scale, const std::array<Complex, N>& dir) {
    std::array<Complex, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + scale * dir[i];
    return out;
  };
  const auto k1 = deriv(state);
  const auto k2 = deriv(axpy(state, 0.5 * dt, k1));
  const auto k3 = deriv(axpy(state, 0.5 * dt, k2));
  const auto k4 = deriv(axpy(state, dt, k3));
  std::array<Complex, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = state[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (renormalize) {
    const double n = norm(out);
    for (auto& c : out) c /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution

struct QuantumParams {
  double gamma = 1.0;
  IntegrationParams integration;
  HamiltonianMode mode = HamiltonianMode::HDef;
  bool renormalize = true;
  // Replace the h-def generator with the experimental general-display reading.
  bool general_display = false;
};

namespace detail {

template <std::size_t Offset, std::size_t N, std::size_t M>
std::array<Complex, N> unpack(const State<M>& s) {
  std::array<Complex, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = Complex(s[Offset + 2 * i], s[Offset + 2 * i + 1]);
  return out;
}

template <std::size_t Offset, std::size_t N, std::size_t M>
void pack(State<M>& s, const std::array<Complex, N>& v) {
  for (std::size_t i = 0; i < N; ++i) {
    s[Offset + 2 * i] = v[i].real();
    s[Offset + 2 * i + 1] = v[i].imag();
  }
}

template <std::size_t Offset, std::size_t N, std::size_t M>
double renormalize_block(State<M>& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 2 * N; ++i) acc += s[Offset + i] * s[Offset + i];
  const double n = std::sqrt(acc);
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("state norm collapsed during integration");
  for (std::size_t i = 0; i < 2 * N; ++i) s[Offset + i] /= n;
  return std::abs(n - 1.0);
}

inline std::array<Complex, 2> apply_generator(const CMat2& h, const std::array<Complex, 2>& psi) {
  auto out = h * psi;
  for (auto& c : out) c *= -kI;
  return out;
}

inline CMat2 generator_for(const Game& g, Player player, const std::array<Complex, 2>& own,
                           const std::array<Complex, 2>& opp, const QuantumParams& p) {
  if (p.general_display) return general_display_generator(g, player, opp, p.gamma);
  return local_generator(g, player, own, born_probabilities(opp), p.gamma, p.mode);
}

}  // namespace detail

// Integrated state (16 reals): row factor (4), column factor (4), joint (8).
// The factors drive the state-dependent generators; the joint vector is
// advanced independently under the Kronecker-sum Hamiltonian so that product
// preservation can be checked against the tensor product of the factors.
inline auto quantum_field(const Game& g, const QuantumParams& p) {
  return [g, p](double, const State<16>& s) {
    const auto psi = detail::unpack<0, 2>(s);
    const auto zeta = detail::unpack<4, 2>(s);
    const auto joint = detail::unpack<8, 4>(s);
    const CMat2 ha = detail::generator_for(g, Player::Row, psi, zeta, p);
    const CMat2 hb = detail::generator_for(g, Player::Column, zeta, psi, p);
    State<16> d{};
    detail::pack<0>(d, detail::apply_generator(ha, psi));
    detail::pack<4>(d, detail::apply_generator(hb, zeta));
    auto dj = product_hamiltonian(ha, hb) * joint;
    for (auto& c : dj) c *= -kI;
    detail::pack<8>(d, dj);
    return d;
  };
}

inline Trajectory evolve_quantum(const JointQuantumState& q0, const Game& g, const QuantumParams& params = {}) {
  detail::validate_gamma(params.gamma);
  params.integration.validate();
  const auto [row, col] = factorize(q0);
  State<16> s0{};
  detail::pack<0>(s0, row.amps());
  detail::pack<4>(s0, col.amps());
  detail::pack<8>(s0, kron(row.amps(), col.amps()));

  const bool renormalize = params.renormalize;
  auto post = [renormalize](State<16>& s, RunDiagnostics& diag) {
    if (!renormalize) return;
    detail::renormalize_block<0, 2>(s);
    detail::renormalize_block<4, 2>(s);
    const double drift = detail::renormalize_block<8, 4>(s);
    diag.max_drift = std::max(diag.max_drift, drift);
  };

  double product_dev = 0.0;
  auto sampler = [&g, &product_dev](double, const State<16>& s) {
    const auto joint = detail::unpack<8, 4>(s);
    const auto tensor = kron(detail::unpack<0, 2>(s), detail::unpack<4, 2>(s));
    for (std::size_t k = 0; k < 4; ++k) product_dev = std::max(product_dev, std::abs(joint[k] - tensor[k]));
    SampleInfo info;
    info.snapshot.assign(s.begin() + 8, s.end());
    const JointDistribution dist(born_joint_probabilities(joint));
    info.payoff = expected_payoffs(dist, g);
    info.norm = norm(joint);
    info.position = {dist.row_marginal()[0], dist.col_marginal()[0]};
    return info;
  };

  Trajectory traj = integrate<16>(quantum_field(g, params), s0, params.integration, post, sampler);
  traj.kind = TrajectoryKind::Quantum;
  traj.diagnostics.max_product_deviation = product_dev;
  return traj;
}

// Joint amplitudes of sample k of a quantum trajectory.
inline std::array<Complex, 4> joint_amplitudes(const Trajectory& traj, std::size_t k) {
  const auto& s = traj.states.at(k);
  std::array<Complex, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = Complex(s[2 * i], s[2 * i + 1]);
  return out;
}

}  // namespace qevo
