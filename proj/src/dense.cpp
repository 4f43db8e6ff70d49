#include "rbandit/dense.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "rbandit/errors.hpp"

namespace rbandit {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("matrix data size does not match rows*cols");
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::slice_rows(std::size_t first, std::size_t count) const {
  assert(first + count <= rows_);
  Mat out(count, cols_);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(first + i, j);
  return out;
}

Mat Mat::select_rows(std::span<const int> subset) const {
  Mat out(subset.size(), cols_);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    assert(subset[i] >= 0 && static_cast<std::size_t>(subset[i]) < rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      out(i, j) = (*this)(static_cast<std::size_t>(subset[i]), j);
  }
  return out;
}

std::vector<double> mat_vec(const Mat& m, std::span<const double> x) {
  assert(x.size() == m.cols());
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

void add_outer(Mat& m, std::span<const double> v) {
  assert(m.rows() == v.size() && m.cols() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) += v[i] * v[j];
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

// Forward elimination with partial pivoting; returns the number of row
// swaps, or -1 when a pivot magnitude falls at or below tol.
int eliminate(Mat& a, std::vector<double>* b, double tol) {
  const std::size_t n = a.rows();
  int swaps = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) <= tol) return -1;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      if (b) std::swap((*b)[k], (*b)[p]);
      ++swaps;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      if (b) (*b)[i] -= f * (*b)[k];
    }
  }
  return swaps;
}

}  // namespace

bool solve_square(Mat a, std::vector<double> b, std::span<double> x, double tol) {
  assert(a.rows() == a.cols() && b.size() == a.rows() && x.size() == a.rows());
  if (eliminate(a, &b, tol) < 0) return false;
  const std::size_t n = a.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return true;
}

double determinant(Mat a, double tol) {
  assert(a.rows() == a.cols());
  const std::size_t n = a.rows();
  const int swaps = eliminate(a, nullptr, tol);
  if (swaps < 0) return 0.0;
  double det = (swaps % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) det *= a(k, k);
  return det;
}

std::size_t rank(Mat a, double tol) {
  const std::size_t m = a.rows(), n = a.cols();
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < m; ++col) {
    std::size_t p = r;
    for (std::size_t i = r + 1; i < m; ++i)
      if (std::abs(a(i, col)) > std::abs(a(p, col))) p = i;
    if (std::abs(a(p, col)) <= tol) continue;
    if (p != r)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(r, j), a(p, j));
    for (std::size_t i = r + 1; i < m; ++i) {
      const double f = a(i, col) / a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

std::vector<int> first_independent_rows(const Mat& a, double tol) {
  const std::size_t n = a.cols();
  std::vector<int> chosen;
  Mat basis(n, n);  // reduced pivot rows stacked as they are found
  std::vector<std::size_t> pivot_col;
  for (std::size_t i = 0; i < a.rows() && chosen.size() < n; ++i) {
    std::vector<double> row(a.row(i).begin(), a.row(i).end());
    for (std::size_t k = 0; k < pivot_col.size(); ++k) {
      const double f = row[pivot_col[k]] / basis(k, pivot_col[k]);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) row[j] -= f * basis(k, j);
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (std::abs(row[j]) > std::abs(row[best])) best = j;
    if (std::abs(row[best]) <= tol) continue;
    const std::size_t k = chosen.size();
    for (std::size_t j = 0; j < n; ++j) basis(k, j) = row[j];
    pivot_col.push_back(best);
    chosen.push_back(static_cast<int>(i));
  }
  if (chosen.size() < n) return {};
  return chosen;
}

bool is_positive_semidefinite(Mat sym, double tol) {
  assert(sym.rows() == sym.cols());
  const std::size_t n = sym.rows();
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = sym(k, k);
    if (pivot < -tol) return false;
    if (pivot <= tol) {
      // A PSD matrix with a (numerically) zero diagonal entry must have a
      // zero row; anything else is indefinite.
      for (std::size_t j = k + 1; j < n; ++j)
        if (std::abs(sym(k, j)) > 1e-7) return false;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = sym(i, k) / pivot;
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) sym(i, j) -= f * sym(k, j);
    }
  }
  return true;
}

}  // namespace rbandit
