#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "qevo/game_model.hpp"
#include "qevo/quantum_state.hpp"

namespace qevo::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  std::array<double, 4> entries() { return {uniform(-5, 5), uniform(-5, 5), uniform(-5, 5), uniform(-5, 5)}; }

  Game symmetric_game() {
    const auto e = entries();
    return Game::symmetric(e[0], e[1], e[2], e[3]);
  }

  Game general_game() {
    Mat2 a, b;
    a.data = entries();
    b.data = entries();
    return Game::general(a, b);
  }

  MixedStrategy strategy(double margin = 0.0) { return MixedStrategy::of(uniform(margin, 1.0 - margin)); }

  LocalQuantumState local_state() {
    return LocalQuantumState::normalized(
        {std::complex<double>(uniform(-1, 1), uniform(-1, 1)), std::complex<double>(uniform(-1, 1), uniform(-1, 1))});
  }

 private:
  std::mt19937_64 engine_;
};

// Reference payoff u = x^T M y, written out term by term.
inline double bilinear(const Mat2& m, const std::array<double, 2>& x, const std::array<double, 2>& y) {
  double u = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) u += x[i] * m(i, j) * y[j];
  return u;
}

// Replicator right-hand side from the textbook formula, independent of the library's factorization.
struct ReplicatorOracle {
  Mat2 A, B;
  double gamma = 1.0;

  std::array<double, 4> operator()(const std::array<double, 4>& s) const {
    const std::array<double, 2> x{s[0], s[1]}, y{s[2], s[3]};
    const double ua = bilinear(A, x, y), ub = bilinear(B, x, y);
    std::array<double, 4> d{};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::array<double, 2> ei{i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0};
      d[i] = gamma * x[i] * (bilinear(A, ei, y) - ua);
      d[2 + i] = gamma * y[i] * (bilinear(B, x, ei) - ub);
    }
    return d;
  }
};

}  // namespace qevo::testing
