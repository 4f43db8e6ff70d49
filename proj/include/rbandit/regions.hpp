#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rbandit/linalg.hpp"

namespace rbandit {

/// Open homogeneous cone { theta : a . theta > 0 for every constraint a }.
/// Zero constraint vectors are rejected at construction: they encode a tie
/// between two identical features, i.e. an empty region.
class HalfspaceSystem {
 public:
  explicit HalfspaceSystem(std::vector<std::vector<double>> constraints);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return constraints_.size(); }
  const std::vector<std::vector<double>>& constraints() const { return constraints_; }

  /// Strict containment with zero slack. Callers needing a tolerance use
  /// interior_margin instead.
  bool contains(std::span<const double> theta) const;

  /// Feasibility LP over the closed relaxation: the open cone is nonempty
  /// iff some theta attains a . theta >= 1 for every constraint.
  bool is_empty() const;

  static HalfspaceSystem concatenate(const std::vector<HalfspaceSystem>& parts);

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> constraints_;
};

struct Violation {
  std::vector<int> subset;      // row subset J of the offending basic solution
  std::vector<double> theta;    // the basic solution itself
  int constraint_index = -1;    // first violated constraint in the region system
};

struct RobustMembershipReport {
  bool is_member = false;
  int optimal_arm = -1;                  // bandit; -1 in contextual reports
  std::vector<int> optimal_arms;         // per-context optima (contextual only)
  std::vector<Violation> violating_subsets;
  double margin = 0.0;                   // interior margin when member, else 0
  bool boundary_warning = false;         // margin <= 1e-9 * ||mu||_inf
  bool region_empty = false;             // contextual: Theta^X found empty
};

/// A finite-context bandit: features stacked context-major
/// (row(x, a) = x * num_arms + a), rewards of matching length, and a
/// positive context distribution. Every context must have a unique
/// optimal arm.
class ContextualInstance {
 public:
  ContextualInstance(std::size_t num_contexts, std::size_t num_arms,
                     FeatureMatrix features, RewardInstance rewards,
                     std::vector<double> context_probs);

  std::size_t num_contexts() const { return num_contexts_; }
  std::size_t num_arms() const { return num_arms_; }
  const FeatureMatrix& features() const { return features_; }
  const RewardInstance& rewards() const { return rewards_; }
  std::span<const double> context_probs() const { return context_probs_; }

  std::size_t row(std::size_t x, std::size_t a) const { return x * num_arms_ + a; }
  double reward(std::size_t x, std::size_t a) const { return rewards_[row(x, a)]; }
  std::span<const double> feature(std::size_t x, std::size_t a) const {
    return features_.feature(row(x, a));
  }

  int optimal_arm(std::size_t x) const { return optimal_arms_[x]; }
  const std::vector<int>& optimal_arms() const { return optimal_arms_; }

 private:
  std::size_t num_contexts_, num_arms_;
  FeatureMatrix features_;
  RewardInstance rewards_;
  std::vector<double> context_probs_;
  std::vector<int> optimal_arms_;
};

/// Strict argmax of the rewards; throws TiedOptimum on a tie.
int greedy_optimal_arm(const RewardInstance& mu);

/// The parameter cone whose image under Phi awards arm k:
/// constraints { phi_k - phi_i : i != k }. Throws DegenerateRegion when two
/// features coincide.
HalfspaceSystem param_region(const FeatureMatrix& phi, int k);
HalfspaceSystem param_region_rows(const Mat& rows, int k);

/// Exact membership test: mu lies in the robust observation region of its
/// optimal arm iff every basic solution lies in that arm's parameter cone.
/// Throws TiedOptimum when the optimum is not unique.
RobustMembershipReport robust_membership(const FeatureMatrix& phi,
                                         const RewardInstance& mu);

/// Ridge variant over the augmented system: every full-rank d-subset of
/// [Phi; sqrt(ridge) I] is tested except the pure-regularizer subset
/// {K+1, ..., K+d}. Note that subsets mixing feature rows with regularizer
/// rows are tested; the ridge region is therefore a subset of the plain one.
RobustMembershipReport robust_membership_ridge(const FeatureMatrix& phi,
                                               const RewardInstance& mu,
                                               double ridge);

/// Intersection cone over contexts: the concatenation of each context's
/// parameter region at its target arm, sum_x (num_arms - 1) constraints.
HalfspaceSystem contextual_param_region(const FeatureMatrix& stacked,
                                        std::size_t num_arms,
                                        std::span<const int> target_arms);
HalfspaceSystem contextual_param_region(const ContextualInstance& instance);

/// Contextual membership: basic solutions are enumerated over the full
/// stacked feature matrix and tested against the intersection cone.
RobustMembershipReport robust_membership_contextual(const ContextualInstance& instance);
RobustMembershipReport robust_membership_contextual_rows(const FeatureMatrix& stacked,
                                                         std::size_t num_arms,
                                                         const RewardInstance& mu);

/// Largest delta such that the open l-infinity cell of half-width delta
/// around mu stays inside the robust observation region. Every membership
/// constraint is linear in mu, so delta = min over constraints c of
/// (c . mu) / ||c||_1. Throws NotMember when mu is not a member.
double interior_margin(const FeatureMatrix& phi, const RewardInstance& mu);
double interior_margin_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                             double ridge);
double interior_margin_contextual(const FeatureMatrix& stacked, std::size_t num_arms,
                                  const RewardInstance& mu);

/// A candidate point examined by the rejection sampler.
struct SamplePoint {
  std::vector<double> mu;
  bool accepted = false;
};

/// Uniform rejection sampling over [box_low, box_high]^K until membership
/// with optimal arm k is hit. Deterministic given the seed; throws
/// RegionTooThin after 10^6 rejected draws.
RewardInstance sample_robust_instance(const FeatureMatrix& phi, int k, double box_low,
                                      double box_high, std::uint64_t seed,
                                      std::vector<SamplePoint>* trail = nullptr);

RewardInstance sample_robust_instance_contextual(const FeatureMatrix& stacked,
                                                 std::size_t num_arms,
                                                 std::span<const int> target_arms,
                                                 double box_low, double box_high,
                                                 std::uint64_t seed,
                                                 std::vector<SamplePoint>* trail = nullptr);

}  // namespace rbandit
