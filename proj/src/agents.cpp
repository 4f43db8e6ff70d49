#include "rbandit/agents.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <utility>

#include "rbandit/errors.hpp"

namespace rbandit {

namespace {

// Lowest index wins ties.
int argmax_index(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

int uniform_arm(double u, std::size_t num_arms) {
  auto a = static_cast<std::size_t>(u * static_cast<double>(num_arms));
  if (a >= num_arms) a = num_arms - 1;
  return static_cast<int>(a);
}

Decision eps_greedy_core(const LseState& state, long t, SplitMix64& rng,
                         const Mat& rows, std::span<const int> row_ids) {
  const double coin = rng.next_unit();
  const double u = rng.next_unit();
  const std::size_t num_arms = row_ids.size();
  if (coin < epsilon_schedule(t)) return {uniform_arm(u, num_arms), ActionKind::explore};
  if (!state.solvable())
    throw SingularDesign("greedy step requested before the design is invertible");
  std::vector<double> scores(num_arms);
  for (std::size_t i = 0; i < num_arms; ++i)
    scores[i] = dot(rows.row(static_cast<std::size_t>(row_ids[i])), state.theta_hat());
  return {argmax_index(scores), ActionKind::greedy};
}

int linucb_core(const LseState& state, const LinUCBConfig& config, long t,
                const Mat& rows, std::span<const int> row_ids, std::size_t dim) {
  if (!state.solvable())
    throw SingularDesign("UCB step requested before the design is invertible");
  const double root_beta = std::sqrt(beta_radius(config, t, dim));
  std::vector<double> scores(row_ids.size());
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    const auto feature = rows.row(static_cast<std::size_t>(row_ids[i]));
    scores[i] = dot(feature, state.theta_hat()) + root_beta * state.width(feature);
  }
  return argmax_index(scores);
}

std::vector<int> all_rows(std::size_t n, std::size_t offset = 0) {
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(offset + i);
  return ids;
}

std::vector<int> forced_arms_for(const FeatureMatrix& phi) {
  return first_independent_rows(phi.data());
}

// Scripted arm slots for the contextual forced phase, taken from the first
// context's block.
std::vector<int> forced_arms_for(const ContextualInstance& instance) {
  const Mat block = instance.features().data().slice_rows(0, instance.num_arms());
  return first_independent_rows(block);
}

}  // namespace

LseState::LseState(std::size_t dim, double ridge)
    : v_(dim, dim), s_(dim, 0.0), theta_(dim, 0.0) {
  for (std::size_t j = 0; j < dim; ++j) v_(j, j) = ridge;
  resolve();
}

void LseState::update(std::span<const double> feature, double reward) {
  assert(feature.size() == s_.size());
  add_outer(v_, feature);
  for (std::size_t j = 0; j < s_.size(); ++j) s_[j] += feature[j] * reward;
  ++t_;
  resolve();
}

void LseState::add_ridge(double amount) {
  for (std::size_t j = 0; j < s_.size(); ++j) v_(j, j) += amount;
  resolve();
}

void LseState::resolve() {
  std::vector<double> theta(s_.size(), 0.0);
  solvable_ = solve_square(v_, s_, theta);
  if (solvable_) theta_ = std::move(theta);
}

std::span<const double> LseState::theta_hat() const {
  if (!solvable_) throw SingularDesign("estimate requested while design is singular");
  return theta_;
}

double LseState::width(std::span<const double> feature) const {
  std::vector<double> z(feature.size(), 0.0);
  if (!solve_square(v_, std::vector<double>(feature.begin(), feature.end()), z))
    throw SingularDesign("width requested while design is singular");
  return std::sqrt(std::max(0.0, dot(feature, z)));
}

double epsilon_schedule(long t) {
  assert(t >= 1);
  return 1.0 / std::sqrt(static_cast<double>(t));
}

double beta_radius(const LinUCBConfig& config, long t, std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 2.0 * config.R * config.R *
         std::log(std::pow(1.0 + static_cast<double>(t) / d, d / 2.0) / config.delta);
}

Decision eps_greedy_action(const LseState& state, const EpsGreedyConfig& config,
                           const FeatureMatrix& phi, long t, SplitMix64& rng) {
  if (config.init == InitMode::forced_basis && t <= static_cast<long>(phi.dim())) {
    const std::vector<int> forced = forced_arms_for(phi);
    return {forced[static_cast<std::size_t>(t - 1)], ActionKind::forced};
  }
  const std::vector<int> ids = all_rows(phi.num_arms());
  return eps_greedy_core(state, t, rng, phi.data(), ids);
}

int linucb_action(const LseState& state, const LinUCBConfig& config,
                  const FeatureMatrix& phi, long t) {
  const std::vector<int> ids = all_rows(phi.num_arms());
  return linucb_core(state, config, t, phi.data(), ids, phi.dim());
}

Decision contextual_eps_greedy_action(const LseState& state, const EpsGreedyConfig& config,
                                      const ContextualInstance& instance, std::size_t x,
                                      long t, SplitMix64& rng) {
  if (x >= instance.num_contexts()) throw ArmOutOfRange("context index out of range");
  const std::size_t d = instance.features().dim();
  if (config.init == InitMode::forced_basis && t <= static_cast<long>(d)) {
    const std::vector<int> forced = forced_arms_for(instance);
    if (forced.empty())
      throw ConfigError("first context block cannot certify rank d; use ridge init");
    return {forced[static_cast<std::size_t>(t - 1)], ActionKind::forced};
  }
  const std::vector<int> ids = all_rows(instance.num_arms(), x * instance.num_arms());
  return eps_greedy_core(state, t, rng, instance.features().data(), ids);
}

int contextual_linucb_action(const LseState& state, const LinUCBConfig& config,
                             const ContextualInstance& instance, std::size_t x, long t) {
  if (x >= instance.num_contexts()) throw ArmOutOfRange("context index out of range");
  const std::vector<int> ids = all_rows(instance.num_arms(), x * instance.num_arms());
  return linucb_core(state, config, t, instance.features().data(), ids,
                     instance.features().dim());
}

namespace {

double hull_gap(const BasicSolutionSet& sols,
                const std::vector<std::pair<int, int>>& pairs, const Mat& rows,
                const std::optional<std::vector<int>>& excluded) {
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& [winner, loser] : pairs) {
    std::vector<double> diff(rows.cols());
    for (std::size_t j = 0; j < rows.cols(); ++j)
      diff[j] = rows(static_cast<std::size_t>(winner), j) -
                rows(static_cast<std::size_t>(loser), j);
    for (const BasicSolution& bs : sols.entries) {
      if (excluded && bs.subset == *excluded) continue;
      gap = std::min(gap, dot(diff, bs.theta));
    }
  }
  return gap;
}

}  // namespace

double model_space_gap(const FeatureMatrix& phi, const RewardInstance& mu) {
  const RobustMembershipReport report = robust_membership(phi, mu);
  if (!report.is_member) throw NotMember("model-space gap requires a robust member");
  const int k = report.optimal_arm;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < phi.num_arms(); ++i)
    if (static_cast<int>(i) != k) pairs.emplace_back(k, static_cast<int>(i));
  return hull_gap(enumerate_basic_solutions(phi, mu), pairs, phi.data(), {});
}

double model_space_gap_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                             double ridge) {
  const RobustMembershipReport report = robust_membership_ridge(phi, mu, ridge);
  if (!report.is_member) throw NotMember("model-space gap requires a robust member");
  const int k = report.optimal_arm;
  const AugmentedSystem aug = augment_ridge(phi, SamplingWeights::uniform(phi.num_arms()),
                                            mu.values(), ridge);
  std::vector<int> pure(phi.dim());
  for (std::size_t j = 0; j < phi.dim(); ++j)
    pure[j] = static_cast<int>(phi.num_arms() + j);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < phi.num_arms(); ++i)
    if (static_cast<int>(i) != k) pairs.emplace_back(k, static_cast<int>(i));
  return hull_gap(enumerate_basic_solutions_rows(aug.phi.data(), aug.y), pairs,
                  phi.data(), pure);
}

double model_space_gap_contextual(const ContextualInstance& instance) {
  const RobustMembershipReport report = robust_membership_contextual(instance);
  if (!report.is_member) throw NotMember("model-space gap requires a robust member");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
    const int opt = instance.optimal_arm(x);
    for (std::size_t a = 0; a < instance.num_arms(); ++a)
      if (static_cast<int>(a) != opt)
        pairs.emplace_back(static_cast<int>(instance.row(x, static_cast<std::size_t>(opt))),
                           static_cast<int>(instance.row(x, a)));
  }
  return hull_gap(
      enumerate_basic_solutions(instance.features(), instance.rewards()), pairs,
      instance.features().data(), {});
}

EpsGreedyAgent::EpsGreedyAgent(const FeatureMatrix& phi, EpsGreedyConfig config)
    : phi_(&phi),
      config_(config),
      state_(phi.dim(), config.init == InitMode::ridge ? config.ridge : 0.0) {}

EpsGreedyAgent::EpsGreedyAgent(const ContextualInstance& instance, EpsGreedyConfig config)
    : instance_(&instance),
      config_(config),
      state_(instance.features().dim(),
             config.init == InitMode::ridge ? config.ridge : 0.0) {}

void EpsGreedyAgent::observe(std::optional<std::size_t> context) { context_ = context; }

int EpsGreedyAgent::act(long t, SplitMix64& explore_rng) {
  if (instance_) {
    last_ = contextual_eps_greedy_action(state_, config_, *instance_, context_.value(), t,
                                         explore_rng);
  } else {
    last_ = eps_greedy_action(state_, config_, *phi_, t, explore_rng);
  }
  return last_.arm;
}

void EpsGreedyAgent::learn(double reward) {
  const auto arm = static_cast<std::size_t>(last_.arm);
  if (instance_) {
    state_.update(instance_->feature(context_.value(), arm), reward);
  } else {
    state_.update(phi_->feature(arm), reward);
  }
}

LinUCBAgent::LinUCBAgent(const FeatureMatrix& phi, LinUCBConfig config)
    : phi_(&phi),
      config_(config),
      state_(phi.dim(), config.init == InitMode::ridge ? config.ridge : 0.0),
      dim_(phi.dim()) {
  if (config_.init == InitMode::forced_basis) forced_ = forced_arms_for(phi);
}

LinUCBAgent::LinUCBAgent(const ContextualInstance& instance, LinUCBConfig config)
    : instance_(&instance),
      config_(config),
      state_(instance.features().dim(),
             config.init == InitMode::ridge ? config.ridge : 0.0),
      dim_(instance.features().dim()) {
  if (config_.init == InitMode::forced_basis) {
    forced_ = forced_arms_for(instance);
    if (forced_.empty())
      throw ConfigError("first context block cannot certify rank d; use ridge init");
  }
}

std::span<const double> LinUCBAgent::feature_of(int arm) const {
  const auto a = static_cast<std::size_t>(arm);
  return instance_ ? instance_->feature(context_.value(), a) : phi_->feature(a);
}

void LinUCBAgent::maybe_check_min_eig() {
  if (checked_min_eig_ || config_.init != InitMode::forced_basis) return;
  checked_min_eig_ = true;
  // lambda_min(V) >= 1  <=>  V - I is positive semidefinite.
  Mat shifted = state_.design();
  for (std::size_t j = 0; j < dim_; ++j) shifted(j, j) -= 1.0;
  if (!is_positive_semidefinite(shifted)) {
    const double l2 = instance_ ? instance_->features().max_sq_norm() : phi_->max_sq_norm();
    state_.add_ridge(std::max(1.0, l2));
    ridge_fallback_ = true;
  }
}

void LinUCBAgent::observe(std::optional<std::size_t> context) { context_ = context; }

int LinUCBAgent::act(long t, SplitMix64&) {
  if (config_.init == InitMode::forced_basis && t <= static_cast<long>(dim_)) {
    last_ = {forced_[static_cast<std::size_t>(t - 1)], ActionKind::forced};
    return last_.arm;
  }
  maybe_check_min_eig();
  if (instance_) {
    last_ = {contextual_linucb_action(state_, config_, *instance_, context_.value(), t),
             ActionKind::greedy};
  } else {
    last_ = {linucb_action(state_, config_, *phi_, t), ActionKind::greedy};
  }
  return last_.arm;
}

void LinUCBAgent::learn(double reward) { state_.update(feature_of(last_.arm), reward); }

}  // namespace rbandit
