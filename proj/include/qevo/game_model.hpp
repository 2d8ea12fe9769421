#pragma once

// 2x2 bimatrix games, mixed strategies, expected payoffs, equilibria and the
// symmetric-game taxonomy.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qevo/core.hpp"
#include "qevo/quantum_state.hpp"

namespace qevo {

inline constexpr double kProbabilitySumTolerance = 1e-12;
inline constexpr double kDegenerateDenominator = 1e-12;

// Strategy index 0 is the first strategy (T, Hawk, ...), index 1 the second.
enum class Profile { TT = 0, TF = 1, FT = 2, FF = 3 };

inline constexpr std::array<Profile, 4> kAllProfiles = {Profile::TT, Profile::TF, Profile::FT, Profile::FF};

inline int row_index(Profile p) { return static_cast<int>(p) / 2; }
inline int col_index(Profile p) { return static_cast<int>(p) % 2; }
inline Profile make_profile(int row, int col) { return static_cast<Profile>(2 * row + col); }

inline std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::TT: return "TT";
    case Profile::TF: return "TF";
    case Profile::FT: return "FT";
    case Profile::FF: return "FF";
  }
  return "?";
}

class Game {
 public:
  // A = [[a, b], [c, d]], B = A^T.
  static Game symmetric(double a, double b, double c, double d) {
    Mat2 A;
    A(0, 0) = a;
    A(0, 1) = b;
    A(1, 0) = c;
    A(1, 1) = d;
    return Game(A, A.transpose(), true);
  }

  static Game general(const Mat2& A, const Mat2& B) { return Game(A, B, false); }

  const Mat2& A() const { return A_; }
  const Mat2& B() const { return B_; }
  bool is_symmetric() const { return symmetric_; }

  // The same game with the players' roles exchanged: (B^T, A^T).
  Game mirrored() const { return Game(B_.transpose(), A_.transpose(), symmetric_); }

  friend bool operator==(const Game&, const Game&) = default;

 private:
  Game(const Mat2& A, const Mat2& B, bool symmetric) : A_(A), B_(B), symmetric_(symmetric) {
    if (!all_finite(A_) || !all_finite(B_)) throw InvalidInput("payoff matrices must be finite");
  }

  Mat2 A_;
  Mat2 B_;
  bool symmetric_ = false;
};

class MixedStrategy {
 public:
  MixedStrategy() : probs_{1.0, 0.0} {}

  explicit MixedStrategy(std::array<double, 2> probs) : probs_(probs) {
    for (double p : probs_)
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("probability outside [0, 1]: " + std::to_string(p));
    if (std::abs(probs_[0] + probs_[1] - 1.0) > kProbabilitySumTolerance)
      throw InvalidInput("probabilities do not sum to 1");
  }

  // (p, 1 - p)
  static MixedStrategy of(double first) { return MixedStrategy({first, 1.0 - first}); }

  static MixedStrategy pure(int index) {
    if (index != 0 && index != 1) throw InvalidInput("pure strategy index must be 0 or 1");
    return index == 0 ? MixedStrategy({1.0, 0.0}) : MixedStrategy({0.0, 1.0});
  }

  double operator[](std::size_t i) const { return probs_[i]; }
  const std::array<double, 2>& probs() const { return probs_; }
  double first() const { return probs_[0]; }

  friend bool operator==(const MixedStrategy&, const MixedStrategy&) = default;

 private:
  std::array<double, 2> probs_;
};

class JointDistribution {
 public:
  explicit JointDistribution(std::array<double, 4> probs) : probs_(probs) {
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("joint probability outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) throw InvalidInput("joint probabilities do not sum to 1");
  }

  static JointDistribution product(const MixedStrategy& x, const MixedStrategy& y) {
    return JointDistribution(kron(x.probs(), y.probs()));
  }

  double operator[](std::size_t i) const { return probs_[i]; }
  double operator[](Profile p) const { return probs_[static_cast<std::size_t>(p)]; }
  const std::array<double, 4>& probs() const { return probs_; }

  std::array<double, 2> row_marginal() const { return {probs_[0] + probs_[1], probs_[2] + probs_[3]}; }
  std::array<double, 2> col_marginal() const { return {probs_[0] + probs_[2], probs_[1] + probs_[3]}; }

 private:
  std::array<double, 4> probs_;
};

struct PayoffPair {
  double u_a = 0.0;
  double u_b = 0.0;

  friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
};

enum class GameClass { DominantPure, TypeI, TypeII, Degenerate, Asymmetric };

inline std::string_view to_string(GameClass c) {
  switch (c) {
    case GameClass::DominantPure: return "DominantPure";
    case GameClass::TypeI: return "TypeI";
    case GameClass::TypeII: return "TypeII";
    case GameClass::Degenerate: return "Degenerate";
    case GameClass::Asymmetric: return "Asymmetric";
  }
  return "?";
}

struct InternalEquilibrium {
  MixedStrategy x;
  MixedStrategy y;
};

struct EquilibriumReport {
  std::vector<Profile> pure;
  std::optional<InternalEquilibrium> internal;
  GameClass game_class = GameClass::Asymmetric;
};

// Row player's payoff vector against y: (A y)_i.
inline std::array<double, 2> row_pure_payoffs(const Game& g, const std::array<double, 2>& y) {
  const Mat2& A = g.A();
  return {A(0, 0) * y[0] + A(0, 1) * y[1], A(1, 0) * y[0] + A(1, 1) * y[1]};
}

// Column player's payoff vector against x: (x^T B)_j. Mirrors row_pure_payoffs
// operation for operation so that symmetric games evaluate bit-identically.
inline std::array<double, 2> col_pure_payoffs(const Game& g, const std::array<double, 2>& x) {
  const Mat2& B = g.B();
  return {B(0, 0) * x[0] + B(1, 0) * x[1], B(0, 1) * x[0] + B(1, 1) * x[1]};
}

inline PayoffPair expected_payoffs(const MixedStrategy& x, const MixedStrategy& y, const Game& g) {
  const auto ay = row_pure_payoffs(g, y.probs());
  const auto xb = col_pure_payoffs(g, x.probs());
  return {x[0] * ay[0] + x[1] * ay[1], y[0] * xb[0] + y[1] * xb[1]};
}

// Expectation of the payoff matrices under an arbitrary (possibly correlated)
// distribution over pure profiles.
inline PayoffPair expected_payoffs(const JointDistribution& p, const Game& g) {
  PayoffPair out;
  for (Profile s : kAllProfiles) {
    const auto i = static_cast<std::size_t>(row_index(s));
    const auto j = static_cast<std::size_t>(col_index(s));
    out.u_a += p[s] * g.A()(i, j);
    out.u_b += p[s] * g.B()(i, j);
  }
  return out;
}

// Weak Nash: no player strictly gains by deviating unilaterally.
inline std::vector<Profile> pure_equilibria(const Game& g) {
  std::vector<Profile> out;
  for (Profile s : kAllProfiles) {
    const auto i = static_cast<std::size_t>(row_index(s));
    const auto j = static_cast<std::size_t>(col_index(s));
    const bool row_ok = g.A()(i, j) >= g.A()(1 - i, j);
    const bool col_ok = g.B()(i, j) >= g.B()(i, 1 - j);
    if (row_ok && col_ok) out.push_back(s);
  }
  return out;
}

inline std::optional<InternalEquilibrium> internal_equilibrium(const Game& g) {
  const Mat2& A = g.A();
  const Mat2& B = g.B();
  const double den_x = B(0, 0) - B(0, 1) - B(1, 0) + B(1, 1);
  const double den_y = A(0, 0) - A(0, 1) - A(1, 0) + A(1, 1);
  if (std::abs(den_x) <= kDegenerateDenominator || std::abs(den_y) <= kDegenerateDenominator) return std::nullopt;
  const double x_star = (B(1, 1) - B(1, 0)) / den_x;
  const double y_star = (A(1, 1) - A(0, 1)) / den_y;
  if (!(x_star > 0.0 && x_star < 1.0 && y_star > 0.0 && y_star < 1.0)) return std::nullopt;
  return InternalEquilibrium{MixedStrategy::of(x_star), MixedStrategy::of(y_star)};
}

inline GameClass classify_symmetric(const Game& g) {
  if (!g.is_symmetric()) return GameClass::Asymmetric;
  const double ac = g.A()(0, 0) - g.A()(1, 0);
  const double bd = g.A()(0, 1) - g.A()(1, 1);
  if (ac == 0.0 || bd == 0.0) return GameClass::Degenerate;
  if ((ac > 0.0) == (bd > 0.0)) return GameClass::DominantPure;
  return ac < 0.0 ? GameClass::TypeI : GameClass::TypeII;
}

inline EquilibriumReport analyze(const Game& g) {
  return {pure_equilibria(g), internal_equilibrium(g), classify_symmetric(g)};
}

// Born-rule probabilities over pure profiles, divided by their sum so the
// result is a valid distribution for any nonzero amplitude vector.
inline std::array<double, 4> born_joint_probabilities(const std::array<Complex, 4>& amps) {
  std::array<double, 4> probs{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    probs[k] = std::norm(amps[k]);
    total += probs[k];
  }
  for (auto& p : probs) p = std::min(1.0, p / total);
  return probs;
}

inline JointDistribution induced_distribution(const JointQuantumState& q) {
  return JointDistribution(born_joint_probabilities(q.amps()));
}

}  // namespace qevo
