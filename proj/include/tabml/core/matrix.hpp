#ifndef TABML_CORE_MATRIX_HPP_
#define TABML_CORE_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tabml {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Rows are the natural unit of access
// (one sample per row), so row() hands out contiguous spans.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix Identity(std::size_t n);
  // Builds a matrix from a list of equally sized rows.
  static Matrix FromRows(const std::vector<Vector>& rows);
  // n x 1 matrix.
  static Matrix Column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void append_row(std::span<const double> values);
  Matrix select_rows(std::span<const std::size_t> indices) const;
  Matrix select_cols(std::span<const std::size_t> indices) const;
  Matrix transpose() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredDistance(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

// Column means of `x`.
Vector ColumnMeans(const Matrix& x);

// Solves the symmetric positive definite system a * x = b by Cholesky.
// Returns false when the factorization breaks down, i.e. a pivot falls to or
// below `relative_tolerance` times its original diagonal entry.
bool CholeskySolve(const Matrix& a, std::span<const double> b, Vector& x,
                   double relative_tolerance = 0.0);

// Lower triangular Cholesky factor; returns false if `a` is not positive definite.
bool Cholesky(const Matrix& a, Matrix& lower, double relative_tolerance = 0.0);

}  // namespace tabml

#endif  // TABML_CORE_MATRIX_HPP_
