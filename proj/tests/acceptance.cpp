// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qevo/cli.hpp"
#include "qevo/classical_dynamics.hpp"
#include "qevo/experiments.hpp"
#include "qevo/io.hpp"
#include "qevo/quantum_dynamics.hpp"

using namespace qevo;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

std::mt19937_64 rng(7);

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Game random_symmetric() { return Game::symmetric(uniform(-5, 5), uniform(-5, 5), uniform(-5, 5), uniform(-5, 5)); }

Game random_general() {
  Mat2 a, b;
  for (auto& v : a.data) v = uniform(-5, 5);
  for (auto& v : b.data) v = uniform(-5, 5);
  return Game::general(a, b);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome internal_equilibrium_exact() {
  std::ostringstream out, err;
  const int code = cli::run_command(std::vector<std::string>{"analyze", "--game", "trading-farming"}, out, err);
  const auto ie = internal_equilibrium(preset_game("trading-farming"));
  const bool exact = ie && ie->x[0] == 0.5 && ie->y[0] == 0.5;
  const bool printed = out.str().find("internal equilibrium: (0.5, 0.5)") != std::string::npos &&
                       out.str().find("pure equilibria: TT FF") != std::string::npos &&
                       out.str().find("class: TypeII") != std::string::npos;
  return {code == 0 && exact && printed, "IE (0.5, 0.5), PE {TT, FF}, TypeII"};
}

Outcome equilibrium_indifference() {
  double worst = 0.0;
  int games = 0;
  while (games < 1000) {
    const Game g = random_symmetric();
    const GameClass c = classify_symmetric(g);
    if (c != GameClass::TypeI && c != GameClass::TypeII) continue;
    const auto ie = internal_equilibrium(g);
    if (!ie) return {false, "TypeI/TypeII game without internal equilibrium"};
    const auto ay = row_pure_payoffs(g, ie->y.probs());
    const auto xb = col_pure_payoffs(g, ie->x.probs());
    worst = std::max({worst, std::abs(ay[0] - ay[1]), std::abs(xb[0] - xb[1])});
    ++games;
  }
  return {worst <= 1e-12, "1000 games, max gap " + sci(worst)};
}

Outcome quadrant_sign_lemma() {
  int violations = 0, games = 0;
  while (games < 100) {
    const Game g = random_general();
    const auto ie = internal_equilibrium(g);
    if (!ie) continue;
    ++games;
    std::array<std::optional<QuadrantSignature>, 4> seen;
    for (int k = 0; k < 100; ++k) {
      const double x0 = uniform(0, 1), y0 = uniform(0, 1);
      if (x0 == 0.0 || y0 == 0.0 || x0 == ie->x[0] || y0 == ie->y[0]) continue;
      const std::size_t q = 2 * (x0 > ie->x[0]) + (y0 > ie->y[0]);
      const auto s = quadrant_signature(g, MixedStrategy::of(x0), MixedStrategy::of(y0));
      if (seen[q] && !(*seen[q] == s)) ++violations;
      if (!seen[q]) seen[q] = s;
    }
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = a + 1; b < 4; ++b)
        if (seen[a] && seen[b] && *seen[a] == *seen[b]) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations over 100 games x 100 points"};
}

Outcome diagonal_invariance() {
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const Game g = random_symmetric();
    const auto x = MixedStrategy::of(uniform(0, 1));
    ClassicalParams p;
    p.integration = {1e-3, 50, 10};
    const auto traj = evolve_classical(g, x, x, p);
    for (const auto& pos : traj.positions) worst = std::max(worst, std::abs(pos[0] - pos[1]));
  }
  return {worst < 1e-9, "max |x_T - y_T| " + sci(worst)};
}

Outcome type_one_split() {
  const Game hd = preset_game("hawk-dove");
  ClassicalParams p;
  const auto a = evolve_classical(hd, MixedStrategy::of(0.8), MixedStrategy::of(0.2), p);
  const auto b = evolve_classical(hd, MixedStrategy::of(0.2), MixedStrategy::of(0.8), p);
  const double da = std::hypot(a.positions.back()[0] - 1, a.positions.back()[1] - 0);
  const double db = std::hypot(b.positions.back()[0] - 0, b.positions.back()[1] - 1);
  return {da <= 1e-3 && db <= 1e-3, "distances " + sci(da) + ", " + sci(db)};
}

Outcome dominant_sweep() {
  const SweepResult r = basin_sweep(preset_game("dominant"), SweepMode::Classical, 51);
  int tt = 0;
  for (const auto& pt : r.points) tt += pt.label.is_converged_to(Profile::TT);
  return {tt == 51 * 51, std::to_string(tt) + "/2601 converged to TT"};
}

Outcome frozen_ascent() {
  bool analytic_ok = true;
  for (int n = 0; n < 1000; ++n) {
    const Game g = random_general();
    const double x0 = uniform(0, 1), y0 = uniform(0, 1);
    analytic_ok = analytic_ok && frozen_ascent_rate_row(g, {x0, 1 - x0}, {y0, 1 - y0}, uniform(0, 3)) >= 0.0;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 0; n < 20; ++n) {
    const Game g = random_general();
    ClassicalParams p;
    p.integration.t_max = 20;
    p.freeze = Freeze::Column;
    const auto traj = evolve_classical(g, MixedStrategy::of(uniform(0.01, 0.99)), MixedStrategy::of(uniform(0, 1)), p);
    worst = std::min(worst, adjustment_diagnostic(g, traj, false).min_rate_a);
  }
  return {analytic_ok && worst >= -1e-9, "analytic form non-negative, min numerical du/dt " + sci(worst)};
}

Outcome integrator_order() {
  auto decay = [](double, const State<1>& s) { return State<1>{-s[0]}; };
  auto endpoint = [&](double dt) {
    return integrate<1>(decay, State<1>{1.0}, IntegrationParams{dt, 1.0, 1}).states.back()[0];
  };
  const double err = std::abs(endpoint(1e-3) - std::exp(-1.0));
  const double reference = endpoint(1e-5);
  const double ratio = std::abs(endpoint(0.1) - reference) / std::abs(endpoint(0.05) - reference);

  const Game tf = preset_game("trading-farming");
  ClassicalParams p;
  p.integration.t_max = 10;
  const auto rk = evolve_classical(tf, MixedStrategy::of(0.6), MixedStrategy::of(0.6), p);
  double x = 0.6, y = 0.6;
  for (int k = 0; k < 10'000'000; ++k) {
    const double dx = x * (1 - x) * ((1 - 0.5) * y + (0 - 0.5) * (1 - y));
    const double dy = y * (1 - y) * ((1 - 0.5) * x + (0 - 0.5) * (1 - x));
    x += 1e-6 * dx;
    y += 1e-6 * dy;
  }
  const double gap = std::max(std::abs(rk.positions.back()[0] - x), std::abs(rk.positions.back()[1] - y));
  return {err < 1e-6 && ratio >= 12 && gap < 1e-4,
          "exp error " + sci(err) + ", halving ratio " + sci(ratio) + ", Euler gap " + sci(gap)};
}

Outcome quantum_bookkeeping() {
  double payoff_gap = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Game g = random_general();
    std::array<Complex, 4> amps;
    for (auto& a : amps) a = Complex(uniform(-1, 1), uniform(-1, 1));
    const double s = norm(amps);
    for (auto& a : amps) a /= s;
    const JointQuantumState q(amps);
    const auto lhs = quantum_payoff(q, g);
    const auto rhs = expected_payoffs(induced_distribution(q), g);
    payoff_gap = std::max({payoff_gap, std::abs(lhs.u_a - rhs.u_a), std::abs(lhs.u_b - rhs.u_b)});
  }
  const auto q0 = JointQuantumState::product(LocalQuantumState::from_angles(0.3, 0.2), LocalQuantumState::from_angles(1.1));
  double renorm = 0.0;
  for (HamiltonianMode mode : {HamiltonianMode::HDef, HamiltonianMode::Hermitized, HamiltonianMode::Tangent}) {
    QuantumParams p;
    p.integration.t_max = 20;
    p.integration.stride = 1;
    p.mode = mode;
    for (double n : evolve_quantum(q0, preset_game("prisoners-dilemma"), p).norms)
      renorm = std::max(renorm, std::abs(n - 1.0));
  }
  QuantumParams herm;
  herm.integration.t_max = 100;
  herm.mode = HamiltonianMode::Hermitized;
  herm.renormalize = false;
  double drift = 0.0;
  for (double n : evolve_quantum(q0, preset_game("prisoners-dilemma"), herm).norms)
    drift = std::max(drift, std::abs(n - 1.0));
  return {payoff_gap <= 1e-15 && renorm <= 1e-12 && drift < 1e-6,
          "payoff gap " + sci(payoff_gap) + ", renormalized " + sci(renorm) + ", hermitized drift " + sci(drift)};
}

Outcome nash_fixed_points() {
  int checked = 0, failed = 0;
  for (int n = 0; n < 100; ++n) {
    const Game g = random_general();
    for (Profile s : pure_equilibria(g)) {
      ++checked;
      failed += !nash_fixed_point_check(JointQuantumState::basis(static_cast<int>(s)), g, 1e-9).pass;
    }
  }
  return {failed == 0 && checked > 0, std::to_string(checked) + " equilibria, " + std::to_string(failed) + " failures"};
}

Outcome figure_reproduction() {
  const Game pd = preset_game("prisoners-dilemma");
  const Game tf = preset_game("trading-farming");
  std::string cycling, gaining;
  std::string detail;
  for (HamiltonianMode mode : {HamiltonianMode::HDef, HamiltonianMode::Hermitized, HamiltonianMode::Tangent}) {
    const std::string name(to_string(mode));
    QuantumParams qp;
    qp.mode = mode;
    qp.integration.t_max = 200;
    const auto q0 = JointQuantumState::product(LocalQuantumState::from_angles(0.2), LocalQuantumState::from_angles(0.2));
    DetectorConfig det;
    det.internal_point = internal_point(pd);
    const auto label = detect_attractor(evolve_quantum(q0, pd, qp), det);
    if (label.kind == AttractorKind::Cycle) cycling += (cycling.empty() ? "" : ",") + name;

    MatchParams mp;
    mp.hamiltonian = mode;
    const auto m = mixed_match(tf, Player::Row,
                               {LocalQuantumState::from_angles(std::acos(std::sqrt(0.2))), MixedStrategy::of(0.6)}, mp);
    if (m.acc_a >= m.baseline->acc.u_a) gaining += (gaining.empty() ? "" : ",") + name;
    detail += name + ": " + label.name() + ", acc " + sci(m.acc_a) + " vs " + sci(m.baseline->acc.u_a) + "; ";
  }
  detail += "cycle in [" + cycling + "], advantage in [" + gaining + "]";
  return {!cycling.empty() && !gaining.empty(), detail};
}

Outcome output_contract() {
  bool ok = std::string(kClassicalHeader) == "t,x_T,y_T,u_A,u_B" &&
            std::string(kQuantumHeader) ==
                "t,re_a00,im_a00,re_a01,im_a01,re_a10,im_a10,re_a11,im_a11,p_TT,p_TF,p_FT,p_FF,u_A,u_B,norm" &&
            std::string(kSweepHeader) == "x0,y0,label,residual";

  ClassicalParams cp;
  cp.integration.t_max = 1;
  const auto ct = evolve_classical(preset_game("trading-farming"), MixedStrategy::of(0.3), MixedStrategy::of(0.7), cp);
  std::stringstream cbuf;
  write_classical_csv(cbuf, ct);
  const auto ctable = read_csv(cbuf);
  ok = ok && ctable.header == kClassicalHeader && ctable.rows.size() == ct.size();
  for (std::size_t k = 0; ok && k < ct.size(); ++k)
    ok = ctable.number(k, 1) == ct.positions[k][0] && ctable.number(k, 3) == ct.payoffs[k].u_a;

  QuantumParams qp;
  qp.integration.t_max = 0.5;
  const auto qt = evolve_quantum(
      JointQuantumState::product(LocalQuantumState::from_angles(0.3, 0.1), LocalQuantumState::from_angles(0.8)),
      preset_game("prisoners-dilemma"), qp);
  std::stringstream qbuf;
  write_quantum_csv(qbuf, qt);
  const auto qtable = read_csv(qbuf);
  ok = ok && qtable.header == kQuantumHeader && qtable.rows.size() == qt.size();
  for (std::size_t k = 0; ok && k < qt.size(); ++k) {
    const auto amps = joint_amplitudes(qt, k);
    ok = qtable.number(k, 1) == amps[0].real() && qtable.number(k, 8) == amps[3].imag();
  }

  RunConfig c;
  c.game = "custom";
  c.matrix_a = std::array<double, 4>{0.1, 1.0 / 3.0, -2.0 / 7.0, 1e-17};
  c.init.x0 = 0.1234567890123456789;
  c.init.theta0 = std::acos(0.3);
  c.dynamics.dt = 1.0 / 3.0 * 1e-3;
  ok = ok && parse_config(serialize_config(c)) == c;
  return {ok, "headers exact, classical/quantum CSV and config roundtrips bit-exact"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "internal equilibrium exactness", 1, internal_equilibrium_exact},
      {2, "equilibrium indifference", 5, equilibrium_indifference},
      {3, "quadrant sign lemma", 10, quadrant_sign_lemma},
      {4, "diagonal invariance", 30, diagonal_invariance},
      {5, "type I off-diagonal split", 10, type_one_split},
      {6, "dominant-game sweep", 60, dominant_sweep},
      {7, "frozen-opponent payoff ascent", 30, frozen_ascent},
      {8, "integrator order and oracle equivalence", 60, integrator_order},
      {9, "quantum bookkeeping", 60, quantum_bookkeeping},
      {10, "Nash-to-fixed-point oracle", 10, nash_fixed_points},
      {11, "qualitative figure reproduction", 120, figure_reproduction},
      {12, "output contract", 1, output_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s [%.2fs / %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), elapsed,
                c.budget_s, in_time ? "" : " over budget");
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
