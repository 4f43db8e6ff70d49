#pragma once

#include <vector>

#include "rbandit/regions.hpp"
#include "rbandit/rng.hpp"

namespace rbandit {

/// Gaussian reward noise; a Gaussian of standard deviation sigma is
/// sigma-sub-Gaussian, so sigma doubles as the sub-Gaussian scale R.
struct NoiseModel {
  double sigma = 0.5;
};

/// Stochastic K-armed bandit. One instance per trial; a pull draws exactly
/// two raw values from the noise stream (also when sigma is zero so that
/// reward streams stay aligned across noise settings).
class BanditEnv {
 public:
  BanditEnv(RewardInstance mu, NoiseModel noise, SplitMix64 noise_rng);

  double pull(int arm);  // throws ArmOutOfRange
  double instant_regret(int arm) const;

  const RewardInstance& rewards() const { return mu_; }
  std::size_t num_arms() const { return mu_.size(); }
  long rounds_elapsed() const { return rounds_; }
  const std::vector<long>& pull_counts() const { return pull_counts_; }

 private:
  RewardInstance mu_;
  NoiseModel noise_;
  SplitMix64 rng_;
  std::vector<long> pull_counts_;
  long rounds_ = 0;
};

/// Contextual bandit: contexts drawn i.i.d. from the instance's context
/// distribution by inverse CDF on a dedicated stream.
class ContextualEnv {
 public:
  ContextualEnv(ContextualInstance instance, NoiseModel noise,
                SplitMix64 context_rng, SplitMix64 noise_rng);

  std::size_t step_context();
  double pull(std::size_t context, int arm);  // throws ArmOutOfRange
  double instant_regret(std::size_t context, int arm) const;

  const ContextualInstance& instance() const { return instance_; }
  long rounds_elapsed() const { return rounds_; }
  const std::vector<long>& pull_counts() const { return pull_counts_; }

 private:
  ContextualInstance instance_;
  NoiseModel noise_;
  SplitMix64 context_rng_;
  SplitMix64 noise_rng_;
  std::vector<long> pull_counts_;  // indexed by row(x, a)
  long rounds_ = 0;
};

}  // namespace rbandit
