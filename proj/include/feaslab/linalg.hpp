#pragma once

#include <span>
#include <vector>

namespace feaslab {

using Vector = std::vector<double>;

/// Dense row-major matrix; sized for desk-scale work.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init);

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Matrix identity(int n);

  Vector multiply(std::span<const double> x) const;            // A x
  Vector multiply_transposed(std::span<const double> y) const; // A^T y

  bool finite() const;
  std::size_t nonzeros() const;
};

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

/// y <- y + s * x
void axpy(double s, std::span<const double> x, Vector& y);

}  // namespace feaslab
