#pragma once

// Quantum strategy states: a single player's qubit and the two-player joint state.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "qevo/core.hpp"

namespace qevo {

inline constexpr double kStateNormTolerance = 1e-9;

// Unit-norm amplitude vector over {T, F}.
class LocalQuantumState {
 public:
  LocalQuantumState() : amps_{Complex(1.0), Complex(0.0)} {}

  explicit LocalQuantumState(std::array<Complex, 2> amps) : amps_(amps) {
    const double n = norm(amps_);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kStateNormTolerance)
      throw InvalidInput("local quantum state is not normalized (norm " + std::to_string(n) + ")");
  }

  // (e^{i alpha} cos theta, e^{-i alpha} sin theta)
  static LocalQuantumState from_angles(double theta, double alpha = 0.0) {
    return LocalQuantumState({std::polar(std::cos(theta), alpha), std::polar(std::sin(theta), -alpha)});
  }

  static LocalQuantumState basis(int index) {
    if (index == 0) return LocalQuantumState({Complex(1.0), Complex(0.0)});
    if (index == 1) return LocalQuantumState({Complex(0.0), Complex(1.0)});
    throw InvalidInput("basis index must be 0 or 1");
  }

  // Rescales an arbitrary nonzero vector to unit norm.
  static LocalQuantumState normalized(std::array<Complex, 2> amps) {
    const double n = norm(amps);
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("cannot normalize zero or non-finite local state");
    for (auto& a : amps) a /= n;
    return LocalQuantumState(amps);
  }

  const std::array<Complex, 2>& amps() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  std::array<double, 2> probabilities() const { return {std::norm(amps_[0]), std::norm(amps_[1])}; }

 private:
  std::array<Complex, 2> amps_;
};

// Unit-norm amplitude vector over the pure profiles (TT, TF, FT, FF).
class JointQuantumState {
 public:
  explicit JointQuantumState(std::array<Complex, 4> amps) : amps_(amps) {
    const double n = norm(amps_);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kStateNormTolerance)
      throw InvalidInput("joint quantum state is not normalized (norm " + std::to_string(n) + ")");
  }

  static JointQuantumState product(const LocalQuantumState& row, const LocalQuantumState& col) {
    JointQuantumState state(kron(row.amps(), col.amps()));
    state.factors_ = std::make_pair(row, col);
    return state;
  }

  static JointQuantumState basis(int profile) {
    if (profile < 0 || profile > 3) throw InvalidInput("profile index must be in [0, 3]");
    return product(LocalQuantumState::basis(profile / 2), LocalQuantumState::basis(profile % 2));
  }

  const std::array<Complex, 4>& amps() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  // Present when the state was built as an explicit tensor product.
  const std::optional<std::pair<LocalQuantumState, LocalQuantumState>>& product_tag() const { return factors_; }

 private:
  std::array<Complex, 4> amps_;
  std::optional<std::pair<LocalQuantumState, LocalQuantumState>> factors_;
};

}  // namespace qevo
