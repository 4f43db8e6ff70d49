#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rbandit/agents.hpp"

namespace rbandit {

struct AlgorithmChoice {
  enum class Name { eps_greedy, linucb };
  Name name = Name::eps_greedy;
  EpsGreedyConfig eps;
  LinUCBConfig ucb;
};

struct SampleSpec {
  std::vector<int> arms;  // 0-based; one entry (bandit), or one per context.
                          // The JSON surface takes 1-based indices.
  double box_low = -10.0;
  double box_high = 10.0;
  std::uint64_t seed = 0;
};

struct ContextualBlock {
  std::vector<double> context_probs;
};

struct ExperimentConfig {
  std::vector<std::vector<double>> feature_rows;
  std::optional<std::vector<double>> mu;  // explicit instance
  std::optional<SampleSpec> sample;       // or sampled from a robust region
  AlgorithmChoice algorithm;
  long horizon = 20000;
  int trials = 10;
  std::uint64_t base_seed = 1;
  double sigma = 0.5;
  std::optional<ContextualBlock> contextual;
  std::string out_dir = "out";
  bool allow_nonrobust = false;
  int jobs = 1;
};

/// Parses and validates the JSON experiment document (see README for the
/// schema). Throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// A feature-matrix document: either {"rows": [[...], ...]} or
/// {"contexts": [block, ...], "context_probs": [...]} with equally sized
/// blocks, stacked context-major.
struct FeatureFile {
  std::vector<std::vector<double>> rows;
  std::optional<std::size_t> num_arms;  // set when the file was contextual
  std::optional<std::vector<double>> context_probs;
};
FeatureFile parse_feature_file(const std::string& json_text);
FeatureFile load_feature_file(const std::string& path);

/// Per-round cumulative regret across trials, with per-round mean,
/// population standard deviation and the 3-sigma band.
struct RegretTrace {
  std::vector<std::vector<double>> per_trial;  // [trial][round], cumulative
  std::vector<double> mean, stddev, lo3, hi3;

  long horizon() const { return per_trial.empty() ? 0 : static_cast<long>(per_trial.front().size()); }
  int trials() const { return static_cast<int>(per_trial.size()); }

  static RegretTrace aggregate(std::vector<std::vector<double>> per_trial);
};

struct InstanceStats {
  double rho = 0.0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  double margin = 0.0;
  std::optional<double> model_gap;  // absent for non-members
  bool member = false;
};

struct TrialResult {
  std::vector<double> cum_regret;
  double greedy_round_regret = 0.0;  // regret incurred on greedy (non-forced,
                                     // non-exploration) rounds
  long explore_rounds = 0;
  long suboptimal_plays = 0;
  bool ridge_fallback = false;
};

TrialResult run_trial_bandit(const FeatureMatrix& phi, const RewardInstance& mu,
                             const AlgorithmChoice& algorithm, long horizon,
                             double sigma, std::uint64_t trial_seed);
TrialResult run_trial_contextual(const ContextualInstance& instance,
                                 const AlgorithmChoice& algorithm, long horizon,
                                 double sigma, std::uint64_t trial_seed);

struct ExperimentResult {
  RegretTrace trace;
  InstanceStats stats;
  std::vector<double> mu_used;
  std::vector<SamplePoint> sample_trail;  // nonempty when sampling was used
  bool contextual = false;
  bool ridge_fallback = false;
};

/// Runs `trials` independent trials with per-trial seeds base_seed + i;
/// trials may execute in parallel up to config.jobs, the aggregation is a
/// deterministic index-ordered reduction either way.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// OLS slope of log(mean cumulative regret) against log(round) over the
/// last tail_fraction of rounds, skipping zero-regret rounds. Requires a
/// horizon of at least 100 rounds (InsufficientData otherwise).
double growth_exponent(const RegretTrace& trace, double tail_fraction);

InstanceStats compute_stats(const FeatureMatrix& phi, const RewardInstance& mu);
InstanceStats compute_stats_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                                  double ridge);
InstanceStats compute_stats_contextual(const ContextualInstance& instance);

}  // namespace rbandit
