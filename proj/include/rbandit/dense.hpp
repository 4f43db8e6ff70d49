#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rbandit {

// Pivot magnitudes at or below this threshold declare a matrix singular.
inline constexpr double kPivotTol = 1e-10;

/// Row-major dense matrix, sized for the small systems this project solves
/// (tens of rows, single-digit columns).
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  /// Rows [first, first + count) as a new matrix.
  Mat slice_rows(std::size_t first, std::size_t count) const;
  /// The rows named by `subset`, in order.
  Mat select_rows(std::span<const int> subset) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> mat_vec(const Mat& m, std::span<const double> x);

// m += v v^T
void add_outer(Mat& m, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);

/// Solves the square system a x = b by Gaussian elimination with partial
/// pivoting. Returns false (leaving x untouched) when a pivot magnitude
/// falls at or below tol.
bool solve_square(Mat a, std::vector<double> b, std::span<double> x,
                  double tol = kPivotTol);

/// Determinant by the same elimination; returns 0.0 when a pivot falls
/// under tol (the matrix is treated as singular).
double determinant(Mat a, double tol = kPivotTol);

std::size_t rank(Mat a, double tol = kPivotTol);

/// Indices of the lexicographically first row subset whose pivoted
/// elimination certifies rank == cols. Empty when no such subset exists.
std::vector<int> first_independent_rows(const Mat& a, double tol = kPivotTol);

/// True when every pivot of the symmetric elimination is >= -tol.
bool is_positive_semidefinite(Mat sym, double tol = kPivotTol);

}  // namespace rbandit
