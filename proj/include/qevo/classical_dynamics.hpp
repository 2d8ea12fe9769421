#pragma once

// Classical replicator dynamics: velocity fields, velocity operators, the
// symmetric-game delta factor, quadrant signs and payoff-ascent diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qevo/core.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/game_model.hpp"

namespace qevo {

// Pre-projection drift above this is flagged on a step.
inline constexpr double kSimplexDriftFlag = 1e-9;

class BoundaryPoint : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NoInternalEquilibrium : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ReplicatorVelocity {
  std::array<double, 2> dx{};
  std::array<double, 2> dy{};
};

namespace detail {

// dx_i = gamma x_i ((A y)_i - x^T A y), dy_j = gamma y_j ((x^T B)_j - x^T B y).
// Raw arrays: used inside RK stages where iterates may sit slightly off the simplex.
inline ReplicatorVelocity replicator_field(const Game& g, const std::array<double, 2>& x,
                                           const std::array<double, 2>& y, double gamma) {
  const auto ay = row_pure_payoffs(g, y);
  const auto xb = col_pure_payoffs(g, x);
  const double ua = x[0] * ay[0] + x[1] * ay[1];
  const double ub = y[0] * xb[0] + y[1] * xb[1];
  ReplicatorVelocity v;
  for (std::size_t i = 0; i < 2; ++i) {
    v.dx[i] = gamma * x[i] * (ay[i] - ua);
    v.dy[i] = gamma * y[i] * (xb[i] - ub);
  }
  return v;
}

inline void validate_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be finite and >= 0");
}

}  // namespace detail

inline ReplicatorVelocity replicator_velocity(const Game& g, const MixedStrategy& x, const MixedStrategy& y,
                                              double gamma = 1.0) {
  detail::validate_gamma(gamma);
  return detail::replicator_field(g, x.probs(), y.probs(), gamma);
}

struct VelocityOperator {
  std::array<double, 2> vx{};
  std::array<double, 2> vy{};
  Mat2 Vx;
  Mat2 Vy;
  RealMatrix<4> Vjoint;  // I (x) Vy + Vx (x) I
};

inline VelocityOperator velocity_operator(const Game& g, const MixedStrategy& x, const MixedStrategy& y,
                                          double gamma = 1.0) {
  detail::validate_gamma(gamma);
  const auto ay = row_pure_payoffs(g, y.probs());
  const auto xb = col_pure_payoffs(g, x.probs());
  const double ua = x[0] * ay[0] + x[1] * ay[1];
  const double ub = y[0] * xb[0] + y[1] * xb[1];
  VelocityOperator op;
  for (std::size_t i = 0; i < 2; ++i) {
    op.vx[i] = gamma * (ay[i] - ua);
    op.vy[i] = gamma * (xb[i] - ub);
  }
  op.Vx = Mat2::diagonal(op.vx);
  op.Vy = Mat2::diagonal(op.vy);
  op.Vjoint = kron(Mat2::identity(), op.Vy) + kron(op.Vx, Mat2::identity());
  return op;
}

// Payoff-gap factor of a symmetric game: delta(z) = (a - c) z + (b - d)(1 - z),
// where z is the opponent's probability of the first strategy.
struct SymmetricField {
  double ac = 0.0;
  double bd = 0.0;
  double gamma = 1.0;

  static SymmetricField from_game(const Game& g, double gamma = 1.0) {
    return {g.A()(0, 0) - g.A()(1, 0), g.A()(0, 1) - g.A()(1, 1), gamma};
  }
};

inline double symmetric_delta(const SymmetricField& f, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw InvalidInput("delta argument must lie in [0, 1]");
  return f.ac * z + f.bd * (1.0 - z);
}

// Row player's gap (A y)_0 - (A y)_1 as a function of y_0, and the column
// player's gap (x^T B)_0 - (x^T B)_1 as a function of x_0.
inline double row_delta(const Game& g, double y0) {
  const Mat2& A = g.A();
  return (A(0, 0) - A(1, 0)) * y0 + (A(0, 1) - A(1, 1)) * (1.0 - y0);
}

inline double col_delta(const Game& g, double x0) {
  const Mat2& B = g.B();
  return (B(0, 0) - B(0, 1)) * x0 + (B(1, 0) - B(1, 1)) * (1.0 - x0);
}

struct QuadrantSignature {
  int dx_sign = 0;  // sign of dx_0
  int dy_sign = 0;  // sign of dy_0

  friend bool operator==(const QuadrantSignature&, const QuadrantSignature&) = default;
};

// Uses dx_0 = gamma x_0 x_1 delta_A(y_0), so the sign is that of delta_A(y_0)
// for interior points (likewise for dy_0).
inline QuadrantSignature quadrant_signature(const Game& g, const MixedStrategy& x, const MixedStrategy& y) {
  const auto interior = [](const MixedStrategy& s) { return s[0] > 0.0 && s[0] < 1.0; };
  if (!interior(x) || !interior(y)) throw BoundaryPoint("quadrant signature needs an interior point");
  if (!internal_equilibrium(g)) throw NoInternalEquilibrium("game has no internal equilibrium");
  return {sign_of(row_delta(g, y[0])), sign_of(col_delta(g, x[0]))};
}

// ---------------------------------------------------------------------------
// Integration

enum class Freeze { None, Row, Column };

struct ClassicalParams {
  double gamma = 1.0;
  IntegrationParams integration;
  Freeze freeze = Freeze::None;
};

namespace detail {

// Clips to [0, 1] and rescales to sum 1; returns the pre-projection violation.
inline double project_simplex(double& p0, double& p1) {
  double drift = std::abs(p0 + p1 - 1.0);
  drift = std::max({drift, -p0, -p1, p0 - 1.0, p1 - 1.0});
  p0 = std::clamp(p0, 0.0, 1.0);
  p1 = std::clamp(p1, 0.0, 1.0);
  const double total = p0 + p1;
  if (total > 0.0) {
    p0 /= total;
    p1 /= total;
  } else {
    p0 = p1 = 0.5;
  }
  return drift;
}

inline void project_pair(State<4>& s, RunDiagnostics& diag) {
  const double drift = std::max(project_simplex(s[0], s[1]), project_simplex(s[2], s[3]));
  diag.max_drift = std::max(diag.max_drift, drift);
  if (drift > kSimplexDriftFlag) ++diag.flagged_steps;
}

}  // namespace detail

// State layout: (x_0, x_1, y_0, y_1).
inline auto classical_field(const Game& g, double gamma, Freeze freeze = Freeze::None) {
  return [g, gamma, freeze](double, const State<4>& s) {
    const auto v = detail::replicator_field(g, {s[0], s[1]}, {s[2], s[3]}, gamma);
    State<4> d{v.dx[0], v.dx[1], v.dy[0], v.dy[1]};
    if (freeze == Freeze::Row) d[0] = d[1] = 0.0;
    if (freeze == Freeze::Column) d[2] = d[3] = 0.0;
    return d;
  };
}

inline auto classical_sampler(const Game& g) {
  return [g](double, const State<4>& s) {
    SampleInfo info;
    info.snapshot.assign(s.begin(), s.end());
    const auto ay = row_pure_payoffs(g, {s[2], s[3]});
    const auto xb = col_pure_payoffs(g, {s[0], s[1]});
    info.payoff = {s[0] * ay[0] + s[1] * ay[1], s[2] * xb[0] + s[3] * xb[1]};
    info.position = {s[0], s[2]};
    return info;
  };
}

template <typename Stop = NeverStop>
Trajectory evolve_classical(const Game& g, const MixedStrategy& x0, const MixedStrategy& y0,
                            const ClassicalParams& params = {}, Stop&& stop = {}) {
  detail::validate_gamma(params.gamma);
  Trajectory traj = integrate<4>(classical_field(g, params.gamma, params.freeze),
                                 State<4>{x0[0], x0[1], y0[0], y0[1]}, params.integration, detail::project_pair,
                                 classical_sampler(g), std::forward<Stop>(stop));
  traj.kind = TrajectoryKind::Classical;
  return traj;
}

// ---------------------------------------------------------------------------
// Adjustment property

struct AdjustmentReport {
  double min_rate_a = 0.0;  // min over samples of d u_A / dt
  double min_rate_b = 0.0;
};

// gamma * sum_i x_i ((A y)_i - u)^2: the rate of change of u_A when only x moves.
inline double frozen_ascent_rate_row(const Game& g, const std::array<double, 2>& x, const std::array<double, 2>& y,
                                     double gamma) {
  const auto ay = row_pure_payoffs(g, y);
  const double u = x[0] * ay[0] + x[1] * ay[1];
  return gamma * (x[0] * (ay[0] - u) * (ay[0] - u) + x[1] * (ay[1] - u) * (ay[1] - u));
}

inline double frozen_ascent_rate_col(const Game& g, const std::array<double, 2>& x, const std::array<double, 2>& y,
                                     double gamma) {
  const auto xb = col_pure_payoffs(g, x);
  const double u = y[0] * xb[0] + y[1] * xb[1];
  return gamma * (y[0] * (xb[0] - u) * (xb[0] - u) + y[1] * (xb[1] - u) * (xb[1] - u));
}

// frozen_opponent: evaluate the analytic single-player ascent rate at every
// sample (non-negative by construction). Otherwise: forward differences of the
// recorded payoffs along the joint trajectory, which carry no sign guarantee.
inline AdjustmentReport adjustment_diagnostic(const Game& g, const Trajectory& traj, bool frozen_opponent,
                                              double gamma = 1.0) {
  if (traj.empty()) throw InvalidInput("adjustment diagnostic needs a non-empty trajectory");
  AdjustmentReport report{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (frozen_opponent) {
    for (const auto& s : traj.states) {
      const std::array<double, 2> x{s[0], s[1]};
      const std::array<double, 2> y{s[2], s[3]};
      report.min_rate_a = std::min(report.min_rate_a, frozen_ascent_rate_row(g, x, y, gamma));
      report.min_rate_b = std::min(report.min_rate_b, frozen_ascent_rate_col(g, x, y, gamma));
    }
    return report;
  }
  if (traj.size() < 2) throw InvalidInput("payoff rate needs at least two samples");
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    report.min_rate_a = std::min(report.min_rate_a, (traj.payoffs[k + 1].u_a - traj.payoffs[k].u_a) / dt);
    report.min_rate_b = std::min(report.min_rate_b, (traj.payoffs[k + 1].u_b - traj.payoffs[k].u_b) / dt);
  }
  return report;
}

}  // namespace qevo
