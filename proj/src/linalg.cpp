#include "rbandit/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <utility>

#include "rbandit/errors.hpp"
#include "rbandit/simplex_lp.hpp"

namespace rbandit {

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (const double x : v)
    if (!std::isfinite(x)) throw ConfigError(std::string(what) + " has a non-finite entry");
}

// Iterates ascending d-subsets of [0, k) in lexicographic order.
bool next_subset(std::vector<int>& s, int k) {
  const int d = static_cast<int>(s.size());
  int i = d - 1;
  while (i >= 0 && s[i] == k - d + i) --i;
  if (i < 0) return false;
  ++s[i];
  for (int j = i + 1; j < d; ++j) s[j] = s[j - 1] + 1;
  return true;
}

std::vector<int> first_subset(int d) {
  std::vector<int> s(d);
  for (int i = 0; i < d; ++i) s[i] = i;
  return s;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t num_arms, std::size_t dim,
                             std::vector<double> row_major)
    : data_(num_arms, dim, std::move(row_major)) {
  if (dim < 1 || num_arms < dim)
    throw ConfigError("feature matrix requires K >= d >= 1");
  for (std::size_t i = 0; i < num_arms; ++i) check_finite(data_.row(i), "feature row");
  if (rank(data_) != dim)
    throw ConfigError("feature matrix is column-rank-deficient");
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("feature matrix has no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw ConfigError("feature rows have inconsistent widths");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return FeatureMatrix(rows.size(), d, std::move(flat));
}

double FeatureMatrix::max_sq_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < num_arms(); ++i)
    best = std::max(best, dot(feature(i), feature(i)));
  return best;
}

RewardInstance::RewardInstance(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("reward instance is empty");
  check_finite(values_, "reward instance");
  std::size_t best = 0;
  bool tied = false;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] > values_[best]) {
      best = i;
      tied = false;
    } else if (values_[i] == values_[best]) {
      tied = true;
    }
  }
  argmax_ = static_cast<int>(best);
  optimal_ = tied ? -1 : static_cast<int>(best);
}

int RewardInstance::optimal_arm() const {
  if (optimal_ < 0) throw TiedOptimum("reward maximum is attained at two or more arms");
  return optimal_;
}

SamplingWeights::SamplingWeights(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw ConfigError("sampling weights are empty");
  double sum = 0.0;
  for (const double w : weights_) {
    if (!(w >= 0.0)) throw ConfigError("sampling weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("sampling weights must sum to 1 within 1e-12");
}

SamplingWeights SamplingWeights::uniform(std::size_t k) {
  return SamplingWeights(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

SamplingWeights SamplingWeights::concentrated(std::size_t k, std::span<const int> subset,
                                              double mass) {
  std::vector<double> w(k, (1.0 - mass) / static_cast<double>(k - subset.size()));
  for (const int i : subset) w[static_cast<std::size_t>(i)] = mass / static_cast<double>(subset.size());
  return SamplingWeights(std::move(w));
}

bool SamplingWeights::design_invertible(const FeatureMatrix& phi) const {
  return rbandit::design_invertible(phi, weights_);
}

Mat design_matrix(const FeatureMatrix& phi, std::span<const double> weights) {
  assert(weights.size() == phi.num_arms());
  const std::size_t d = phi.dim();
  Mat v(d, d);
  for (std::size_t i = 0; i < phi.num_arms(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const auto row = phi.feature(i);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) v(r, c) += w * row[r] * row[c];
  }
  return v;
}

bool design_invertible(const FeatureMatrix& phi, std::span<const double> weights) {
  const Mat v = design_matrix(phi, weights);
  std::vector<double> probe(phi.dim(), 0.0);
  std::vector<double> out(phi.dim(), 0.0);
  return solve_square(v, probe, out);
}

std::vector<double> weighted_least_squares(const FeatureMatrix& phi,
                                           std::span<const double> weights,
                                           std::span<const double> y) {
  assert(y.size() == phi.num_arms());
  const std::size_t d = phi.dim();
  const Mat v = design_matrix(phi, weights);
  std::vector<double> s(d, 0.0);
  for (std::size_t i = 0; i < phi.num_arms(); ++i) {
    const double wy = weights[i] * y[i];
    if (wy == 0.0) continue;
    const auto row = phi.feature(i);
    for (std::size_t r = 0; r < d; ++r) s[r] += wy * row[r];
  }
  std::vector<double> theta(d, 0.0);
  if (!solve_square(v, s, theta))
    throw SingularDesign("weighted design matrix is numerically singular");
  // Normal-equation residual guard.
  const std::vector<double> vt = mat_vec(v, theta);
  double snorm = 0.0, resid = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    snorm = std::max(snorm, std::abs(s[r]));
    resid = std::max(resid, std::abs(vt[r] - s[r]));
  }
  if (resid > 1e-9 * (1.0 + snorm))
    throw Error("weighted least squares: normal-equation residual above tolerance");
  return theta;
}

std::vector<double> weighted_least_squares(const FeatureMatrix& phi,
                                           const SamplingWeights& lam,
                                           std::span<const double> y) {
  return weighted_least_squares(phi, lam.weights(), y);
}

BasicSolutionSet enumerate_basic_solutions_rows(const Mat& rows,
                                                std::span<const double> values) {
  assert(values.size() == rows.rows());
  const int k = static_cast<int>(rows.rows());
  const int d = static_cast<int>(rows.cols());
  BasicSolutionSet out;
  std::vector<int> subset = first_subset(d);
  do {
    const Mat sub = rows.select_rows(subset);
    const double det = determinant(sub);
    if (std::abs(det) <= kPivotTol) continue;
    std::vector<double> rhs(d);
    for (int r = 0; r < d; ++r) rhs[r] = values[static_cast<std::size_t>(subset[r])];
    std::vector<double> theta(d, 0.0);
    if (!solve_square(sub, rhs, theta))
      continue;  // pivot tolerance can disagree with the determinant gate near the edge
    // Residual guard on the subsystem.
    const std::vector<double> fit = mat_vec(sub, theta);
    double rhs_inf = 0.0, resid = 0.0;
    for (int r = 0; r < d; ++r) {
      rhs_inf = std::max(rhs_inf, std::abs(rhs[static_cast<std::size_t>(r)]));
      resid = std::max(resid, std::abs(fit[static_cast<std::size_t>(r)] -
                                       rhs[static_cast<std::size_t>(r)]));
    }
    if (resid > 1e-9 * (1.0 + rhs_inf))
      throw Error("basic solution residual above tolerance");
    out.entries.push_back({subset, std::move(theta), det});
  } while (next_subset(subset, k));
  return out;
}

BasicSolutionSet enumerate_basic_solutions(const FeatureMatrix& phi,
                                           const RewardInstance& mu) {
  assert(mu.size() == phi.num_arms());
  return enumerate_basic_solutions_rows(phi.data(), mu.values());
}

std::vector<SubsetWeight> forsgren_weights(const FeatureMatrix& phi,
                                           const SamplingWeights& lam) {
  const int k = static_cast<int>(phi.num_arms());
  const int d = static_cast<int>(phi.dim());
  const auto w = lam.weights();

  std::vector<SubsetWeight> out;
  double total = 0.0;
  std::vector<int> subset = first_subset(d);
  do {
    const double det = determinant(phi.data().select_rows(subset));
    if (std::abs(det) <= kPivotTol) continue;
    double det_lambda = 1.0;
    for (const int i : subset) det_lambda *= w[static_cast<std::size_t>(i)];
    const double numerator = det_lambda * det * det;
    total += numerator;
    out.push_back({subset, numerator});
  } while (next_subset(subset, k));

  // By the Cauchy-Binet identity the total equals det(Phi^T Lambda Phi).
  if (!(total > 0.0) || !lam.design_invertible(phi))
    throw SingularDesign("sampling weights give a singular design");
  for (auto& sw : out) sw.weight /= total;
  return out;
}

std::vector<double> regularized_model_estimate(const FeatureMatrix& phi,
                                               const SamplingWeights& lam,
                                               std::span<const double> y,
                                               double ridge) {
  if (!(ridge > 0.0)) throw ConfigError("ridge parameter must be positive");
  const std::size_t d = phi.dim();
  Mat v = design_matrix(phi, lam.weights());
  for (std::size_t r = 0; r < d; ++r) v(r, r) += ridge;
  std::vector<double> s(d, 0.0);
  const auto w = lam.weights();
  for (std::size_t i = 0; i < phi.num_arms(); ++i) {
    const auto row = phi.feature(i);
    for (std::size_t r = 0; r < d; ++r) s[r] += w[i] * y[i] * row[r];
  }
  std::vector<double> theta(d, 0.0);
  if (!solve_square(v, s, theta))
    throw Error("regularized design unexpectedly singular");
  return theta;
}

AugmentedSystem augment_ridge(const FeatureMatrix& phi, const SamplingWeights& lam,
                              std::span<const double> y, double ridge) {
  if (!(ridge > 0.0)) throw ConfigError("ridge parameter must be positive");
  const std::size_t k = phi.num_arms();
  const std::size_t d = phi.dim();
  std::vector<double> rows((k + d) * d, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) rows[i * d + j] = phi.data()(i, j);
  const double root = std::sqrt(ridge);
  for (std::size_t j = 0; j < d; ++j) rows[(k + j) * d + j] = root;

  std::vector<double> weights(lam.weights().begin(), lam.weights().end());
  weights.insert(weights.end(), d, 1.0);
  std::vector<double> y_star(y.begin(), y.end());
  y_star.insert(y_star.end(), d, 0.0);
  return {FeatureMatrix(k + d, d, std::move(rows)), std::move(weights),
          std::move(y_star)};
}

double chebyshev_misspecification(const FeatureMatrix& phi, const RewardInstance& mu) {
  const std::size_t k = phi.num_arms();
  const std::size_t d = phi.dim();
  // Variables: theta split into positive and negative parts, then eps.
  //   phi_i.(p - q) - eps <= mu_i  and  -phi_i.(p - q) - eps <= -mu_i
  const std::size_t n = 2 * d + 1;
  LpProblem lp;
  lp.a = Mat(2 * k, n);
  lp.b.assign(2 * k, 0.0);
  lp.c.assign(n, 0.0);
  lp.c[n - 1] = 1.0;
  lp.sense.assign(2 * k, LpSense::le);
  for (std::size_t i = 0; i < k; ++i) {
    const auto row = phi.feature(i);
    for (std::size_t j = 0; j < d; ++j) {
      lp.a(i, j) = row[j];
      lp.a(i, d + j) = -row[j];
      lp.a(k + i, j) = -row[j];
      lp.a(k + i, d + j) = row[j];
    }
    lp.a(i, n - 1) = -1.0;
    lp.a(k + i, n - 1) = -1.0;
    lp.b[i] = mu[i];
    lp.b[k + i] = -mu[i];
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw Error("Chebyshev LP did not reach an optimum");
  return std::max(0.0, sol.objective);
}

long long subset_count(std::size_t k, std::size_t d) {
  if (d > k) return 0;
  long long result = 1;
  for (std::size_t i = 0; i < d; ++i) {
    const double projected = static_cast<double>(result) *
                             static_cast<double>(k - i) / static_cast<double>(i + 1);
    if (projected > 9.0e18) return std::numeric_limits<long long>::max();
    result = result * static_cast<long long>(k - i) / static_cast<long long>(i + 1);
  }
  return result;
}

}  // namespace rbandit
