#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qevo/classical_dynamics.hpp"
#include "qevo/dynamics_engine.hpp"
#include "qevo/quantum_dynamics.hpp"
#include "support.hpp"

using namespace qevo;

namespace {

const Game kTradingFarming = Game::symmetric(1, 0, 0.5, 0.5);

auto decay = [](double, const State<1>& s) { return State<1>{-s[0]}; };

double decay_endpoint(double dt) {
  return integrate<1>(decay, State<1>{1.0}, IntegrationParams{dt, 1.0, 1}).states.back()[0];
}

Trajectory constant_trajectory(std::vector<double> state, std::array<double, 2> position, std::size_t n) {
  Trajectory t;
  for (std::size_t k = 0; k < n; ++k) {
    t.times.push_back(0.01 * static_cast<double>(k));
    t.states.push_back(state);
    t.payoffs.push_back({});
    t.norms.push_back(1.0);
    t.residuals.push_back(0.0);
    t.positions.push_back(position);
  }
  return t;
}

}  // namespace

TEST(Integrate, ZeroFieldIsConstant) {
  const auto traj = integrate<3>([](double, const State<3>&) { return State<3>{}; }, State<3>{0.1, 0.2, 0.3},
                                 IntegrationParams{1e-2, 1.0, 7});
  for (const auto& s : traj.states) EXPECT_EQ(s, (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(traj.residuals.back(), 0.0);
}

TEST(Integrate, SamplingScheduleIncludesFinalStep) {
  const auto traj = integrate<1>(decay, State<1>{1.0}, IntegrationParams{0.1, 1.0, 3});
  // Steps 0, 3, 6, 9 and the final step 10.
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_NEAR(traj.times.back(), 1.0, 1e-12);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
  EXPECT_EQ(traj.states.size(), traj.times.size());
  EXPECT_EQ(traj.payoffs.size(), traj.times.size());
}

TEST(Integrate, ExponentialEndpoint) {
  EXPECT_NEAR(decay_endpoint(1e-3), 0.3678794, 1e-6);
  EXPECT_NEAR(decay_endpoint(1e-3), std::exp(-1.0), 1e-12);
}

TEST(Integrate, FourthOrderConvergence) {
  const double reference = decay_endpoint(1e-5);
  const double ratio = std::abs(decay_endpoint(0.1) - reference) / std::abs(decay_endpoint(0.05) - reference);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Integrate, MatchesHandComputedStep) {
  // One RK4 step of s' = -s from 1 is the degree-4 Taylor polynomial of e^{-h}.
  const double h = 0.1;
  const auto s = rk4_step<1>(decay, 0.0, State<1>{1.0}, h);
  EXPECT_NEAR(s[0], 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24, 1e-15);
}

TEST(Integrate, NonFiniteDerivativeAborts) {
  auto blowup = [](double t, const State<1>& s) {
    return State<1>{t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : s[0]};
  };
  try {
    integrate<1>(blowup, State<1>{1.0}, IntegrationParams{0.1, 1.0, 1});
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("state="), std::string::npos);
  }
}

TEST(Integrate, RejectsBadParams) {
  EXPECT_THROW(integrate<1>(decay, State<1>{1.0}, IntegrationParams{0.0, 1.0, 1}), InvalidInput);
  EXPECT_THROW(integrate<1>(decay, State<1>{1.0}, IntegrationParams{0.1, -1.0, 1}), InvalidInput);
  EXPECT_THROW(integrate<1>(decay, State<1>{1.0}, IntegrationParams{0.1, 1.0, 0}), InvalidInput);
}

TEST(Integrate, Deterministic) {
  ClassicalParams p;
  p.integration.t_max = 20;
  const auto a = evolve_classical(kTradingFarming, MixedStrategy::of(0.3), MixedStrategy::of(0.8), p);
  const auto b = evolve_classical(kTradingFarming, MixedStrategy::of(0.3), MixedStrategy::of(0.8), p);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.times, b.times);
  QuantumParams qp;
  qp.integration.t_max = 5;
  const auto q0 = JointQuantumState::product(LocalQuantumState::from_angles(0.3, 0.2), LocalQuantumState::from_angles(1.2));
  EXPECT_EQ(evolve_quantum(q0, kTradingFarming, qp).states, evolve_quantum(q0, kTradingFarming, qp).states);
}

TEST(Integrate, AgreesWithEulerOracle) {
  ClassicalParams p;
  p.integration.t_max = 10;
  const auto rk = evolve_classical(kTradingFarming, MixedStrategy::of(0.6), MixedStrategy::of(0.6), p);
  const qevo::testing::ReplicatorOracle field{kTradingFarming.A(), kTradingFarming.B(), 1.0};
  std::array<double, 4> s{0.6, 0.4, 0.6, 0.4};
  const double dt = 1e-6;
  for (int k = 0; k < 10'000'000; ++k) {
    const auto d = field(s);
    for (std::size_t i = 0; i < 4; ++i) s[i] += dt * d[i];
  }
  EXPECT_NEAR(rk.positions.back()[0], s[0], 1e-4);
  EXPECT_NEAR(rk.positions.back()[1], s[2], 1e-4);
}

TEST(Integrate, TradingFarmingReachesTT) {
  for (double dt : {1e-3, 1e-4}) {
    ClassicalParams p;
    p.integration = {dt, 200, static_cast<int>(1e-2 / dt)};
    const auto traj = evolve_classical(kTradingFarming, MixedStrategy::of(0.6), MixedStrategy::of(0.6), p);
    EXPECT_LT(std::hypot(traj.positions.back()[0] - 1, traj.positions.back()[1] - 1), 1e-3);
    EXPECT_TRUE(detect_attractor(traj).is_converged_to(Profile::TT));
  }
}

TEST(VelocityNorm, Examples) {
  const auto field = classical_field(kTradingFarming, 1.0);
  EXPECT_NEAR(velocity_norm<4>(field, State<4>{0.6, 0.4, 0.7, 0.3}), 0.0741, 5e-5);
  EXPECT_NEAR(velocity_norm<4>(field, State<4>{0.6, 0.4, 0.7, 0.3}),
              std::sqrt(2 * 0.048 * 0.048 + 2 * 0.021 * 0.021), 1e-12);
  EXPECT_EQ(velocity_norm<4>(field, State<4>{0.5, 0.5, 0.5, 0.5}), 0.0);
  QuantumParams qp;
  const auto qfield = quantum_field(Game::symmetric(1, 1, 1, 1), qp);
  State<16> s{};
  s[0] = 0.6;
  s[2] = 0.8;
  s[4] = 1.0;
  s[8] = 0.6;
  s[12] = 0.8;
  EXPECT_EQ(velocity_norm<16>(qfield, s), 0.0);
}

TEST(DetectAttractor, ConvergedAtVertex) {
  const auto label = detect_attractor(constant_trajectory({1, 0, 1, 0}, {1, 1}, 150));
  EXPECT_TRUE(label.is_converged_to(Profile::TT));
  EXPECT_EQ(label.name(), "TT");
}

TEST(DetectAttractor, ConvergedAtInternalPointOrElsewhere) {
  DetectorConfig cfg;
  cfg.internal_point = std::array<double, 2>{0.5, 0.5};
  EXPECT_EQ(detect_attractor(constant_trajectory({0.5, 0.5, 0.5, 0.5}, {0.5, 0.5}, 150), cfg).name(), "IE");
  EXPECT_EQ(detect_attractor(constant_trajectory({0.3, 0.7, 0.5, 0.5}, {0.3, 0.5}, 150), cfg).name(), "Point");
}

TEST(DetectAttractor, ShortSettledRunIsNotConverged) {
  EXPECT_EQ(detect_attractor(constant_trajectory({1, 0, 1, 0}, {1, 1}, 50)).kind, AttractorKind::Timeout);
}

TEST(DetectAttractor, CircleIsCycle) {
  Trajectory t;
  for (int k = 0; k <= 2000; ++k) {
    const double time = 0.01 * k;
    t.times.push_back(time);
    t.states.push_back({std::cos(time), std::sin(time)});
    t.payoffs.push_back({});
    t.norms.push_back(1.0);
    t.residuals.push_back(1.0);
    t.positions.push_back({std::cos(time), std::sin(time)});
  }
  const auto label = detect_attractor(t);
  EXPECT_EQ(label.kind, AttractorKind::Cycle);
  EXPECT_NEAR(label.period, 2 * M_PI, 0.02);
}

TEST(DetectAttractor, SlowTransientIsTimeout) {
  ClassicalParams p;
  p.integration.t_max = 2;
  const auto traj = evolve_classical(kTradingFarming, MixedStrategy::of(0.6), MixedStrategy::of(0.6), p);
  EXPECT_EQ(detect_attractor(traj).kind, AttractorKind::Timeout);
}

TEST(DetectAttractor, RejectsEmpty) { EXPECT_THROW(detect_attractor(Trajectory{}), InvalidInput); }

TEST(ConvergenceMonitor, StopsEarlyOnceSettled) {
  ClassicalParams p;
  const auto traj = evolve_classical(kTradingFarming, MixedStrategy::of(0.9), MixedStrategy::of(0.9), p,
                                     ConvergenceMonitor{});
  EXPECT_TRUE(traj.diagnostics.stopped_early);
  EXPECT_LT(traj.times.back(), 200.0);
  EXPECT_TRUE(detect_attractor(traj).is_converged_to(Profile::TT));
}
