#pragma once

// Shared error types and fixed-size linear algebra used across the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace qevo {

using Complex = std::complex<double>;

// Bad user input: malformed probability vectors, unknown names, bad params.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integration produced a non-finite value or violated a numerical contract.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An output file could not be opened or written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pure local ket was requested from an entangled joint state.
class NonProductState : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Dense N x N matrix, row-major. Only N = 2 and N = 4 are used.
template <typename T, std::size_t N>
struct Matrix {
  std::array<T, N * N> data{};

  static constexpr std::size_t size() { return N; }

  constexpr T& operator()(std::size_t row, std::size_t col) {
    return data[row * N + col];
  }
  constexpr const T& operator()(std::size_t row, std::size_t col) const {
    return data[row * N + col];
  }

  static constexpr Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = T(1);
    return m;
  }

  static constexpr Matrix diagonal(const std::array<T, N>& diag) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = diag[i];
    return m;
  }

  constexpr Matrix transpose() const {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) m(j, i) = (*this)(i, j);
    return m;
  }

  friend constexpr bool operator==(const Matrix&, const Matrix&) = default;
};

template <std::size_t N>
using RealMatrix = Matrix<double, N>;
template <std::size_t N>
using ComplexMatrix = Matrix<Complex, N>;

using Mat2 = RealMatrix<2>;
using CMat2 = ComplexMatrix<2>;
using CMat4 = ComplexMatrix<4>;

template <std::size_t N>
ComplexMatrix<N> adjoint(const ComplexMatrix<N>& m) {
  ComplexMatrix<N> out;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

template <typename T, std::size_t N>
Matrix<T, N> operator+(const Matrix<T, N>& lhs, const Matrix<T, N>& rhs) {
  Matrix<T, N> out;
  for (std::size_t k = 0; k < N * N; ++k) out.data[k] = lhs.data[k] + rhs.data[k];
  return out;
}

template <typename T, std::size_t N>
Matrix<T, N> operator*(const T& scale, const Matrix<T, N>& m) {
  Matrix<T, N> out;
  for (std::size_t k = 0; k < N * N; ++k) out.data[k] = scale * m.data[k];
  return out;
}

template <typename T, std::size_t N>
std::array<T, N> operator*(const Matrix<T, N>& m, const std::array<T, N>& v) {
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    T acc{};
    for (std::size_t j = 0; j < N; ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

// Kronecker product of two 2x2 matrices; index (2i+k, 2j+l) = lhs(i,j) * rhs(k,l).
template <typename T>
Matrix<T, 4> kron(const Matrix<T, 2>& lhs, const Matrix<T, 2>& rhs) {
  Matrix<T, 4> out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l)
          out(2 * i + k, 2 * j + l) = lhs(i, j) * rhs(k, l);
  return out;
}

template <typename T>
std::array<T, 4> kron(const std::array<T, 2>& lhs, const std::array<T, 2>& rhs) {
  return {lhs[0] * rhs[0], lhs[0] * rhs[1], lhs[1] * rhs[0], lhs[1] * rhs[1]};
}

template <typename T, std::size_t N>
double max_abs_diff(const Matrix<T, N>& lhs, const Matrix<T, N>& rhs) {
  double worst = 0.0;
  for (std::size_t k = 0; k < N * N; ++k)
    worst = std::max(worst, static_cast<double>(std::abs(lhs.data[k] - rhs.data[k])));
  return worst;
}

template <typename T, std::size_t N>
bool all_finite(const Matrix<T, N>& m) {
  for (const auto& v : m.data) {
    if constexpr (std::is_same_v<T, Complex>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <std::size_t N>
double norm(const std::array<Complex, N>& v) {
  double acc = 0.0;
  for (const auto& a : v) acc += std::norm(a);
  return std::sqrt(acc);
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace qevo
