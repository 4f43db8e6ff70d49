#pragma once

#include <span>
#include <vector>

#include "rbandit/dense.hpp"

namespace rbandit {

/// K x d matrix of arm features, one row per arm. Full column rank is
/// enforced at construction (pivoted elimination, pivot tolerance 1e-10).
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t num_arms, std::size_t dim, std::vector<double> row_major);
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t num_arms() const { return data_.rows(); }  // K
  std::size_t dim() const { return data_.cols(); }       // d
  const Mat& data() const { return data_; }
  std::span<const double> feature(std::size_t arm) const { return data_.row(arm); }

  /// Largest squared l2 row norm (the feature bound L^2).
  double max_sq_norm() const;

 private:
  Mat data_;
};

/// True mean rewards with strict-argmax bookkeeping. The optimal arm is
/// defined only when the maximum is attained exactly once.
class RewardInstance {
 public:
  explicit RewardInstance(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool has_unique_optimum() const { return optimal_ >= 0; }
  /// Throws TiedOptimum when the maximum is attained at two or more arms.
  int optimal_arm() const;
  /// First index attaining the maximum; never throws.
  int argmax() const { return argmax_; }
  double max_value() const { return values_[static_cast<std::size_t>(argmax_)]; }

 private:
  std::vector<double> values_;
  int optimal_ = -1;
  int argmax_ = 0;
};

/// A point on the K-simplex: nonnegative weights summing to 1 within 1e-12.
class SamplingWeights {
 public:
  explicit SamplingWeights(std::vector<double> weights);
  static SamplingWeights uniform(std::size_t k);
  static SamplingWeights concentrated(std::size_t k, std::span<const int> subset,
                                      double mass);

  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

  /// True when Phi^T Lambda Phi has all elimination pivots above 1e-10.
  bool design_invertible(const FeatureMatrix& phi) const;

 private:
  std::vector<double> weights_;
};

struct BasicSolution {
  std::vector<int> subset;     // row indices J, ascending
  std::vector<double> theta;   // Phi_J^{-1} mu_J
  double det_phi = 0.0;        // det Phi_J
};

/// One entry per full-rank d x d row submatrix, in lexicographic subset
/// order. Membership gate: |det Phi_J| > 1e-10.
struct BasicSolutionSet {
  std::vector<BasicSolution> entries;
};

struct SubsetWeight {
  std::vector<int> subset;
  double weight = 0.0;
};

/// Augmented system of the ridge identity: sqrt(ridge) * I stacked under
/// Phi, unit weights appended (kept verbatim, never renormalized), and d
/// zeros appended to the observations.
struct AugmentedSystem {
  FeatureMatrix phi;            // (K+d) x d
  std::vector<double> weights;  // length K+d
  std::vector<double> y;        // length K+d
};

/// Phi^T Lambda Phi as a d x d matrix; `weights` may be unnormalized.
Mat design_matrix(const FeatureMatrix& phi, std::span<const double> weights);

bool design_invertible(const FeatureMatrix& phi, std::span<const double> weights);

/// argmin over theta of || Phi theta - y || in the Lambda^{1/2}-weighted
/// norm, solved through the normal equations with pivoted elimination.
/// Play counts and normalized frequencies give the same minimizer, so the
/// raw-weight overload accepts either. Throws SingularDesign.
std::vector<double> weighted_least_squares(const FeatureMatrix& phi,
                                           std::span<const double> weights,
                                           std::span<const double> y);
std::vector<double> weighted_least_squares(const FeatureMatrix& phi,
                                           const SamplingWeights& lam,
                                           std::span<const double> y);

BasicSolutionSet enumerate_basic_solutions(const FeatureMatrix& phi,
                                           const RewardInstance& mu);
/// Row-level variant used by the augmented and stacked-contextual paths.
BasicSolutionSet enumerate_basic_solutions_rows(const Mat& rows,
                                                std::span<const double> values);

/// Convex-combination weights of the basic solutions:
///   weight(J) = det(Lambda_J) det(Phi_J)^2 / sum_M det(Lambda_M) det(Phi_M)^2,
/// with det(Lambda_J) the product of the d selected weights. Subsets appear
/// in the same order as enumerate_basic_solutions. Throws SingularDesign.
std::vector<SubsetWeight> forsgren_weights(const FeatureMatrix& phi,
                                           const SamplingWeights& lam);

/// Solves (Phi^T Lambda Phi + ridge I) theta = Phi^T Lambda y. No
/// invertibility precondition; ridge must be positive.
std::vector<double> regularized_model_estimate(const FeatureMatrix& phi,
                                               const SamplingWeights& lam,
                                               std::span<const double> y,
                                               double ridge);

AugmentedSystem augment_ridge(const FeatureMatrix& phi, const SamplingWeights& lam,
                              std::span<const double> y, double ridge);

/// Chebyshev misspecification error: rho = min over theta of
/// max_i |phi_i . theta - mu_i|, solved as a linear program over
/// (theta, eps) with optimality certified by the LP duality gap.
double chebyshev_misspecification(const FeatureMatrix& phi, const RewardInstance& mu);

/// Number of d-subsets of K rows, saturating at 2^63-1.
long long subset_count(std::size_t k, std::size_t d);

}  // namespace rbandit
