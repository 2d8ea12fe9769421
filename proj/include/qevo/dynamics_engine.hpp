#pragma once

// Fixed-step RK4 integration over real state vectors, plus attractor
// detection (convergence, recurrence, timeout) on the recorded samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qevo/core.hpp"
#include "qevo/game_model.hpp"

namespace qevo {

template <std::size_t N>
using State = std::array<double, N>;

struct IntegrationParams {
  double dt = 1e-3;
  double t_max = 200.0;
  int stride = 10;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidInput("t_max must be positive");
    if (stride < 1) throw InvalidInput("sample stride must be >= 1");
  }

  std::size_t step_count() const {
    return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  }
};

enum class TrajectoryKind { Generic, Classical, Quantum, Mixed };

// Diagnostics accumulated while integrating.
struct RunDiagnostics {
  double max_drift = 0.0;           // largest pre-projection simplex/norm violation
  std::size_t flagged_steps = 0;    // steps whose drift exceeded the flag threshold
  double max_product_deviation = 0.0;
  bool stopped_early = false;
};

struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Generic;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<PayoffPair> payoffs;
  std::vector<double> norms;
  std::vector<double> residuals;
  // Probability of the first strategy for each player, (x_T, y_T).
  std::vector<std::array<double, 2>> positions;
  IntegrationParams params;
  RunDiagnostics diagnostics;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

// What the caller records for each sample.
struct SampleInfo {
  std::vector<double> snapshot;
  PayoffPair payoff;
  double norm = 1.0;
  std::array<double, 2> position{};
};

template <std::size_t N>
std::string describe_state(const State<N>& s) {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  for (std::size_t i = 0; i < N; ++i) out << (i ? ", " : "") << s[i];
  out << "]";
  return out.str();
}

template <std::size_t N>
double euclidean_norm(const State<N>& v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

// Euclidean norm of field(t, state). Throws NumericalFailure when non-finite.
template <std::size_t N, typename Field>
double velocity_norm(Field&& field, const State<N>& state, double t = 0.0) {
  const State<N> d = field(t, state);
  const double n = euclidean_norm(d);
  if (!std::isfinite(n)) throw NumericalFailure("non-finite derivative at t=" + std::to_string(t) + " state=" + describe_state(state));
  return n;
}

namespace detail {

template <std::size_t N, typename Field>
State<N> checked_eval(Field& field, double t, const State<N>& s) {
  State<N> d = field(t, s);
  for (double v : d)
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "non-finite derivative at t=" << t << " state=" << describe_state(s);
      throw NumericalFailure(msg.str());
    }
  return d;
}

}  // namespace detail

// One classical RK4 step of ds/dt = field(t, s).
template <std::size_t N, typename Field>
State<N> rk4_step(Field&& field, double t, const State<N>& s, double dt) {
  const double half = 0.5 * dt;
  const State<N> k1 = detail::checked_eval<N>(field, t, s);
  State<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + half * k1[i];
  const State<N> k2 = detail::checked_eval<N>(field, t + half, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + half * k2[i];
  const State<N> k3 = detail::checked_eval<N>(field, t + half, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + dt * k3[i];
  const State<N> k4 = detail::checked_eval<N>(field, t + dt, tmp);
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct NoPostStep {
  template <std::size_t N>
  void operator()(State<N>&, RunDiagnostics&) const {}
};

struct RawSample {
  template <std::size_t N>
  SampleInfo operator()(double, const State<N>& s) const {
    return {std::vector<double>(s.begin(), s.end()), {}, 1.0, {}};
  }
};

struct NeverStop {
  bool operator()(const Trajectory&) const { return false; }
};

// Integrates with fixed-step RK4 from t = 0 to t_max. post_step(state, diag)
// runs after every step (clipping, renormalization). Samples are recorded at
// step 0, every `stride` steps, and at the final step; stop(traj) is checked
// after each recorded sample and ends the run early when it returns true.
template <std::size_t N, typename Field, typename PostStep = NoPostStep, typename Sampler = RawSample,
          typename Stop = NeverStop>
Trajectory integrate(Field&& field, State<N> s0, const IntegrationParams& params, PostStep&& post_step = {},
                     Sampler&& sampler = {}, Stop&& stop = {}) {
  params.validate();
  Trajectory traj;
  traj.params = params;
  const std::size_t steps = params.step_count();
  const auto stride = static_cast<std::size_t>(params.stride);

  auto record = [&](std::size_t k, const State<N>& s) {
    const double t = static_cast<double>(k) * params.dt;
    SampleInfo info = sampler(t, s);
    traj.times.push_back(t);
    traj.states.push_back(std::move(info.snapshot));
    traj.payoffs.push_back(info.payoff);
    traj.norms.push_back(info.norm);
    traj.positions.push_back(info.position);
    traj.residuals.push_back(velocity_norm<N>(field, s, t));
  };

  State<N> s = s0;
  record(0, s);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k - 1) * params.dt;
    s = rk4_step<N>(field, t, s, params.dt);
    post_step(s, traj.diagnostics);
    if (k % stride == 0 || k == steps) {
      record(k, s);
      if (k != steps && stop(static_cast<const Trajectory&>(traj))) {
        traj.diagnostics.stopped_early = true;
        break;
      }
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Attractor detection

struct DetectorConfig {
  double eps_conv = 1e-6;
  double eps_cycle = 1e-3;
  std::size_t window = 100;
  double vertex_tol = 1e-3;
  std::optional<std::array<double, 2>> internal_point;
};

enum class AttractorKind { Converged, Cycle, Timeout };
enum class ConvergedTarget { Vertex, Internal, Point };

struct AttractorLabel {
  AttractorKind kind = AttractorKind::Timeout;
  ConvergedTarget target = ConvergedTarget::Point;
  Profile vertex = Profile::TT;             // valid when target == Vertex
  std::vector<double> terminal;
  std::array<double, 2> terminal_position{};
  double residual = 0.0;
  double period = 0.0;                      // recurrence time when kind == Cycle

  bool is_converged_to(Profile p) const {
    return kind == AttractorKind::Converged && target == ConvergedTarget::Vertex && vertex == p;
  }

  std::string name() const {
    switch (kind) {
      case AttractorKind::Cycle: return "Cycle";
      case AttractorKind::Timeout: return "Timeout";
      case AttractorKind::Converged:
        if (target == ConvergedTarget::Vertex) return std::string(to_string(vertex));
        if (target == ConvergedTarget::Internal) return "IE";
        return "Point";
    }
    return "?";
  }
};

namespace detail {

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// Distance from p to the segment [a, b].
inline double segment_distance(const std::vector<double>& p, const std::vector<double>& a,
                               const std::vector<double>& b) {
  double ab2 = 0.0;
  double ap_ab = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    ap_ab += (p[i] - a[i]) * (b[i] - a[i]);
  }
  const double s = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = a[i] + s * (b[i] - a[i]) - p[i];
    acc += c * c;
  }
  return std::sqrt(acc);
}

inline std::optional<double> find_recurrence(const Trajectory& traj, double eps) {
  const std::size_t n = traj.size();
  if (n < 3) return std::nullopt;
  constexpr std::size_t kAnchors = 64;
  const std::size_t anchors = std::min(kAnchors, n - 2);
  for (std::size_t a = 0; a < anchors; ++a) {
    const std::size_t ia = a * (n - 2) / anchors;
    const auto& anchor = traj.states[ia];
    bool departed = false;
    for (std::size_t k = ia + 1; k + 1 < n; ++k) {
      if (!departed) {
        departed = distance(traj.states[k], anchor) > 10.0 * eps;
        continue;
      }
      // The sampled path is treated as piecewise linear so that a return
      // falling between two samples is still seen.
      if (segment_distance(anchor, traj.states[k], traj.states[k + 1]) <= eps)
        return traj.times[k] - traj.times[ia];
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline AttractorLabel detect_attractor(const Trajectory& traj, const DetectorConfig& cfg = {}) {
  if (traj.empty()) throw InvalidInput("cannot label an empty trajectory");
  AttractorLabel label;
  label.terminal = traj.states.back();
  label.terminal_position = traj.positions.back();
  label.residual = traj.residuals.back();

  const std::size_t n = traj.size();
  if (n >= cfg.window && cfg.window > 0) {
    const bool settled = std::all_of(traj.residuals.end() - static_cast<std::ptrdiff_t>(cfg.window),
                                     traj.residuals.end(), [&](double r) { return r < cfg.eps_conv; });
    if (settled) {
      label.kind = AttractorKind::Converged;
      const auto [px, py] = label.terminal_position;
      double best = std::numeric_limits<double>::infinity();
      for (Profile p : kAllProfiles) {
        const double vx = row_index(p) == 0 ? 1.0 : 0.0;
        const double vy = col_index(p) == 0 ? 1.0 : 0.0;
        const double d = std::hypot(px - vx, py - vy);
        if (d < best) {
          best = d;
          label.vertex = p;
        }
      }
      if (best <= cfg.vertex_tol) {
        label.target = ConvergedTarget::Vertex;
      } else if (cfg.internal_point &&
                 std::hypot(px - (*cfg.internal_point)[0], py - (*cfg.internal_point)[1]) <= cfg.vertex_tol) {
        label.target = ConvergedTarget::Internal;
      } else {
        label.target = ConvergedTarget::Point;
      }
      return label;
    }
  }
  if (auto period = detail::find_recurrence(traj, cfg.eps_cycle)) {
    label.kind = AttractorKind::Cycle;
    label.period = *period;
    return label;
  }
  label.kind = AttractorKind::Timeout;
  return label;
}

// Stop predicate: the trailing `window` residuals are all below eps_conv.
struct ConvergenceMonitor {
  double eps_conv = 1e-6;
  std::size_t window = 100;

  bool operator()(const Trajectory& traj) const {
    if (traj.size() < window) return false;
    return std::all_of(traj.residuals.end() - static_cast<std::ptrdiff_t>(window), traj.residuals.end(),
                       [&](double r) { return r < eps_conv; });
  }
};

}  // namespace qevo
