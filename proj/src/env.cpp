#include "rbandit/env.hpp"

#include <utility>

#include "rbandit/errors.hpp"

namespace rbandit {

BanditEnv::BanditEnv(RewardInstance mu, NoiseModel noise, SplitMix64 noise_rng)
    : mu_(std::move(mu)), noise_(noise), rng_(noise_rng), pull_counts_(mu_.size(), 0) {}

double BanditEnv::pull(int arm) {
  if (arm < 0 || static_cast<std::size_t>(arm) >= mu_.size())
    throw ArmOutOfRange("arm index out of range");
  ++pull_counts_[static_cast<std::size_t>(arm)];
  ++rounds_;
  return mu_[static_cast<std::size_t>(arm)] + noise_.sigma * rng_.next_gaussian();
}

double BanditEnv::instant_regret(int arm) const {
  if (arm < 0 || static_cast<std::size_t>(arm) >= mu_.size())
    throw ArmOutOfRange("arm index out of range");
  return mu_.max_value() - mu_[static_cast<std::size_t>(arm)];
}

ContextualEnv::ContextualEnv(ContextualInstance instance, NoiseModel noise,
                             SplitMix64 context_rng, SplitMix64 noise_rng)
    : instance_(std::move(instance)),
      noise_(noise),
      context_rng_(context_rng),
      noise_rng_(noise_rng),
      pull_counts_(instance_.num_contexts() * instance_.num_arms(), 0) {}

std::size_t ContextualEnv::step_context() {
  const double u = context_rng_.next_unit();
  double cum = 0.0;
  const auto probs = instance_.context_probs();
  for (std::size_t x = 0; x + 1 < probs.size(); ++x) {
    cum += probs[x];
    if (u < cum) return x;
  }
  return probs.size() - 1;
}

double ContextualEnv::pull(std::size_t context, int arm) {
  if (context >= instance_.num_contexts() || arm < 0 ||
      static_cast<std::size_t>(arm) >= instance_.num_arms())
    throw ArmOutOfRange("context or arm index out of range");
  ++pull_counts_[instance_.row(context, static_cast<std::size_t>(arm))];
  ++rounds_;
  return instance_.reward(context, static_cast<std::size_t>(arm)) +
         noise_.sigma * noise_rng_.next_gaussian();
}

double ContextualEnv::instant_regret(std::size_t context, int arm) const {
  if (context >= instance_.num_contexts() || arm < 0 ||
      static_cast<std::size_t>(arm) >= instance_.num_arms())
    throw ArmOutOfRange("context or arm index out of range");
  const auto opt = static_cast<std::size_t>(instance_.optimal_arm(context));
  return instance_.reward(context, opt) -
         instance_.reward(context, static_cast<std::size_t>(arm));
}

}  // namespace rbandit
