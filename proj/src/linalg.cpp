#include "feaslab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace feaslab {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
  rows = static_cast<int>(init.size());
  cols = rows > 0 ? static_cast<int>(init.begin()->size()) : 0;
  a.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : init) {
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("Matrix: ragged initializer");
    for (double v : row) a.push_back(v);
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("multiply: dim mismatch");
  Vector y(static_cast<std::size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols; ++j) s += (*this)(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

Vector Matrix::multiply_transposed(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("multiply_transposed: dim mismatch");
  Vector x(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x[static_cast<std::size_t>(j)] += (*this)(i, j) * y[static_cast<std::size_t>(i)];
  return x;
}

bool Matrix::finite() const {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

std::size_t Matrix::nonzeros() const {
  std::size_t n = 0;
  for (double v : a)
    if (v != 0.0) ++n;
  return n;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double s, std::span<const double> x, Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace feaslab
