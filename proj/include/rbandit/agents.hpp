#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rbandit/env.hpp"

namespace rbandit {

/// Running least-squares state: V = sum of feature outer products (plus
/// ridge * I in ridge mode), S = sum of feature * reward. The solution is
/// re-solved after every update and cached.
class LseState {
 public:
  explicit LseState(std::size_t dim, double ridge = 0.0);

  void update(std::span<const double> feature, double reward);

  /// V += amount * I (the ridge-fallback path).
  void add_ridge(double amount);

  bool solvable() const { return solvable_; }
  /// Throws SingularDesign while the design is singular.
  std::span<const double> theta_hat() const;
  const Mat& design() const { return v_; }
  long round() const { return t_; }

  /// || feature ||_{V^-1}; throws SingularDesign while singular.
  double width(std::span<const double> feature) const;

 private:
  Mat v_;
  std::vector<double> s_;
  std::vector<double> theta_;
  long t_ = 0;
  bool solvable_ = false;
  void resolve();
};

enum class InitMode { forced_basis, ridge };

/// epsilon_t = 1/sqrt(t), t starting at 1; the only schedule.
double epsilon_schedule(long t);

struct EpsGreedyConfig {
  InitMode init = InitMode::forced_basis;
  double ridge = 1.0;  // used in ridge mode
};

struct LinUCBConfig {
  double R = 0.5;       // sub-Gaussian scale of the reward noise
  double delta = 0.05;  // confidence level
  InitMode init = InitMode::forced_basis;
  double ridge = 1.0;   // used in ridge mode; keep >= max(1, L^2)
};

/// Squared confidence radius beta_t(delta) = 2 R^2 log((1 + t/d)^{d/2} / delta).
double beta_radius(const LinUCBConfig& config, long t, std::size_t dim);

enum class ActionKind { forced, explore, greedy };

struct Decision {
  int arm = -1;
  ActionKind kind = ActionKind::greedy;
};

/// One epsilon-greedy decision. In forced-basis mode rounds 1..d return the
/// forced arms (the lexicographically first full-rank row subset) in order
/// and consume no randomness; every later round consumes exactly two raw
/// values (exploration coin, then uniform arm draw), whichever branch wins.
/// Throws SingularDesign when a greedy step is requested while the design
/// is still singular.
Decision eps_greedy_action(const LseState& state, const EpsGreedyConfig& config,
                           const FeatureMatrix& phi, long t, SplitMix64& rng);

/// Closed-form UCB maximization: argmax_i phi_i . theta_hat +
/// sqrt(beta_t(delta)) * ||phi_i||_{V^-1}, lowest index on ties.
int linucb_action(const LseState& state, const LinUCBConfig& config,
                  const FeatureMatrix& phi, long t);

/// Contextual variants: identical rules restricted to the rows of the
/// current context; one pooled LseState across contexts. Forced rounds play
/// the scripted arm slots (from the first context's block) regardless of
/// the observed context.
Decision contextual_eps_greedy_action(const LseState& state, const EpsGreedyConfig& config,
                                      const ContextualInstance& instance, std::size_t x,
                                      long t, SplitMix64& rng);
int contextual_linucb_action(const LseState& state, const LinUCBConfig& config,
                             const ContextualInstance& instance, std::size_t x, long t);

/// Minimum optimal-vs-suboptimal estimated-reward gap over the convex hull
/// of the basic solutions; the minimum of a linear function over a polytope
/// is attained at a vertex, so only the basic solutions are scanned.
/// Throws NotMember when mu is not a robust member.
double model_space_gap(const FeatureMatrix& phi, const RewardInstance& mu);
double model_space_gap_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                             double ridge);
double model_space_gap_contextual(const ContextualInstance& instance);

/// Uniform step interface driven by the harness:
/// observe(context) -> act -> learn(reward).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void observe(std::optional<std::size_t> context) = 0;
  virtual int act(long t, SplitMix64& explore_rng) = 0;
  virtual void learn(double reward) = 0;
  virtual ActionKind last_kind() const = 0;
  /// Set when forced exploration failed the lambda_min(V) >= 1 check and
  /// the agent fell back to ridge mode.
  virtual bool ridge_fallback() const { return false; }
};

class EpsGreedyAgent final : public Agent {
 public:
  EpsGreedyAgent(const FeatureMatrix& phi, EpsGreedyConfig config);
  EpsGreedyAgent(const ContextualInstance& instance, EpsGreedyConfig config);

  void observe(std::optional<std::size_t> context) override;
  int act(long t, SplitMix64& explore_rng) override;
  void learn(double reward) override;
  ActionKind last_kind() const override { return last_.kind; }

 private:
  const FeatureMatrix* phi_ = nullptr;
  const ContextualInstance* instance_ = nullptr;
  EpsGreedyConfig config_;
  LseState state_;
  std::optional<std::size_t> context_;
  Decision last_;
};

/// Optimism agent with a forced exploration phase of d independent arms.
/// After the forced phase the design must satisfy lambda_min(V) >= 1; if it
/// does not, the agent adds max(1, L^2) * I to the design and continues in
/// ridge mode (the fallback is recorded, not fatal).
class LinUCBAgent final : public Agent {
 public:
  LinUCBAgent(const FeatureMatrix& phi, LinUCBConfig config);
  LinUCBAgent(const ContextualInstance& instance, LinUCBConfig config);

  void observe(std::optional<std::size_t> context) override;
  int act(long t, SplitMix64& explore_rng) override;
  void learn(double reward) override;
  ActionKind last_kind() const override { return last_.kind; }
  bool ridge_fallback() const override { return ridge_fallback_; }

 private:
  const FeatureMatrix* phi_ = nullptr;
  const ContextualInstance* instance_ = nullptr;
  LinUCBConfig config_;
  LseState state_;
  std::optional<std::size_t> context_;
  Decision last_;
  std::vector<int> forced_;
  bool checked_min_eig_ = false;
  bool ridge_fallback_ = false;
  std::size_t dim_ = 0;

  std::span<const double> feature_of(int arm) const;
  void maybe_check_min_eig();
};

}  // namespace rbandit
