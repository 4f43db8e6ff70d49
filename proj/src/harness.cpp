#include "rbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rbandit/errors.hpp"

namespace rbandit {

namespace {

using nlohmann::json;

std::vector<std::vector<double>> rows_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + " must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ConfigError(std::string(what) + " rows must be arrays");
    rows.push_back(r.get<std::vector<double>>());
  }
  return rows;
}

AlgorithmChoice algorithm_from_json(const json& j) {
  AlgorithmChoice algo;
  const std::string name = j.value("name", "eps_greedy");
  if (name == "eps_greedy") {
    algo.name = AlgorithmChoice::Name::eps_greedy;
  } else if (name == "linucb") {
    algo.name = AlgorithmChoice::Name::linucb;
  } else {
    throw ConfigError("algorithm.name must be eps_greedy or linucb");
  }
  const std::string init = j.value("init", "forced");
  InitMode mode;
  if (init == "forced") mode = InitMode::forced_basis;
  else if (init == "ridge") mode = InitMode::ridge;
  else throw ConfigError("algorithm.init must be forced or ridge");
  const double ridge = j.value("ridge", 1.0);
  if (mode == InitMode::ridge && !(ridge > 0.0))
    throw ConfigError("algorithm.ridge must be positive");
  algo.eps.init = mode;
  algo.eps.ridge = ridge;
  algo.ucb.init = mode;
  algo.ucb.ridge = ridge;
  algo.ucb.R = j.value("R", 0.5);
  algo.ucb.delta = j.value("delta", 0.05);
  if (!(algo.ucb.R > 0.0)) throw ConfigError("algorithm.R must be positive");
  if (!(algo.ucb.delta > 0.0 && algo.ucb.delta < 1.0))
    throw ConfigError("algorithm.delta must lie in (0, 1)");
  return algo;
}

}  // namespace

FeatureFile parse_feature_file(const std::string& json_text) {
  json f;
  try {
    f = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("feature file is not valid JSON: ") + e.what());
  }
  try {
    FeatureFile out;
    if (f.contains("contexts")) {
      std::size_t arms = 0;
      for (const auto& block : f["contexts"]) {
        auto rows = rows_from_json(block, "context block");
        if (arms == 0) arms = rows.size();
        if (rows.size() != arms)
          throw ConfigError("context blocks must share the arm count");
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      }
      out.num_arms = arms;
      if (f.contains("context_probs"))
        out.context_probs = f["context_probs"].get<std::vector<double>>();
    } else {
      out.rows = rows_from_json(f.at("rows"), "features");
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed feature file: ") + e.what());
  }
}

FeatureFile load_feature_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open features file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_feature_file(buf.str());
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    if (!j.contains("features")) throw ConfigError("config requires \"features\"");
    if (j["features"].is_string()) {
      const FeatureFile f = load_feature_file(j["features"].get<std::string>());
      cfg.feature_rows = f.rows;
      if (f.context_probs && !j.contains("contextual"))
        cfg.contextual = ContextualBlock{*f.context_probs};
    } else {
      cfg.feature_rows = rows_from_json(j["features"], "features");
    }

    if (!j.contains("instance")) throw ConfigError("config requires \"instance\"");
    const json& inst = j["instance"];
    if (inst.contains("mu") == inst.contains("sample"))
      throw ConfigError("instance takes exactly one of \"mu\" or \"sample\"");
    if (inst.contains("mu")) {
      cfg.mu = inst["mu"].get<std::vector<double>>();
    } else {
      const json& s = inst["sample"];
      SampleSpec spec;
      if (s.at("arm").is_array()) spec.arms = s["arm"].get<std::vector<int>>();
      else spec.arms = {s.at("arm").get<int>()};
      // Arm indices are 1-based on every user surface.
      for (int& arm : spec.arms) {
        if (arm < 1) throw ConfigError("sample.arm indices are 1-based");
        --arm;
      }
      const auto box = s.at("box").get<std::vector<double>>();
      if (box.size() != 2) throw ConfigError("sample.box must be [low, high]");
      spec.box_low = box[0];
      spec.box_high = box[1];
      spec.seed = s.value("seed", std::uint64_t{0});
      cfg.sample = spec;
    }

    if (j.contains("algorithm")) cfg.algorithm = algorithm_from_json(j["algorithm"]);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.allow_nonrobust = j.value("allow_nonrobust", cfg.allow_nonrobust);
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (j.contains("contextual"))
      cfg.contextual =
          ContextualBlock{j["contextual"].at("context_probs").get<std::vector<double>>()};
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

RegretTrace RegretTrace::aggregate(std::vector<std::vector<double>> per_trial) {
  RegretTrace trace;
  trace.per_trial = std::move(per_trial);
  if (trace.per_trial.empty()) return trace;
  const std::size_t horizon = trace.per_trial.front().size();
  const auto n = static_cast<double>(trace.per_trial.size());
  trace.mean.assign(horizon, 0.0);
  trace.stddev.assign(horizon, 0.0);
  trace.lo3.assign(horizon, 0.0);
  trace.hi3.assign(horizon, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (const auto& trial : trace.per_trial) sum += trial[t];
    const double m = sum / n;
    double var = 0.0;
    for (const auto& trial : trace.per_trial) var += (trial[t] - m) * (trial[t] - m);
    var /= n;  // population standard deviation across trials
    trace.mean[t] = m;
    trace.stddev[t] = std::sqrt(var);
    trace.lo3[t] = m - 3.0 * trace.stddev[t];
    trace.hi3[t] = m + 3.0 * trace.stddev[t];
  }
  return trace;
}

namespace {

std::unique_ptr<Agent> make_agent(const FeatureMatrix& phi, const AlgorithmChoice& algo) {
  if (algo.name == AlgorithmChoice::Name::eps_greedy)
    return std::make_unique<EpsGreedyAgent>(phi, algo.eps);
  return std::make_unique<LinUCBAgent>(phi, algo.ucb);
}

std::unique_ptr<Agent> make_agent(const ContextualInstance& instance,
                                  const AlgorithmChoice& algo) {
  if (algo.name == AlgorithmChoice::Name::eps_greedy)
    return std::make_unique<EpsGreedyAgent>(instance, algo.eps);
  return std::make_unique<LinUCBAgent>(instance, algo.ucb);
}

}  // namespace

TrialResult run_trial_bandit(const FeatureMatrix& phi, const RewardInstance& mu,
                             const AlgorithmChoice& algorithm, long horizon,
                             double sigma, std::uint64_t trial_seed) {
  BanditEnv env(mu, NoiseModel{sigma}, make_stream(trial_seed, Stream::env_noise));
  SplitMix64 explore = make_stream(trial_seed, Stream::agent_explore);
  const std::unique_ptr<Agent> agent = make_agent(phi, algorithm);
  const int optimal = mu.argmax();

  TrialResult result;
  result.cum_regret.resize(static_cast<std::size_t>(horizon));
  double cum = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    agent->observe(std::nullopt);
    const int arm = agent->act(t, explore);
    const double reward = env.pull(arm);
    agent->learn(reward);
    const double inst = env.instant_regret(arm);
    cum += inst;
    result.cum_regret[static_cast<std::size_t>(t - 1)] = cum;
    switch (agent->last_kind()) {
      case ActionKind::greedy: result.greedy_round_regret += inst; break;
      case ActionKind::explore: ++result.explore_rounds; break;
      case ActionKind::forced: break;
    }
    if (arm != optimal) ++result.suboptimal_plays;
  }
  result.ridge_fallback = agent->ridge_fallback();
  return result;
}

TrialResult run_trial_contextual(const ContextualInstance& instance,
                                 const AlgorithmChoice& algorithm, long horizon,
                                 double sigma, std::uint64_t trial_seed) {
  ContextualEnv env(instance, NoiseModel{sigma},
                    make_stream(trial_seed, Stream::context_draw),
                    make_stream(trial_seed, Stream::env_noise));
  SplitMix64 explore = make_stream(trial_seed, Stream::agent_explore);
  const std::unique_ptr<Agent> agent = make_agent(instance, algorithm);

  TrialResult result;
  result.cum_regret.resize(static_cast<std::size_t>(horizon));
  double cum = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    const std::size_t x = env.step_context();
    agent->observe(x);
    const int arm = agent->act(t, explore);
    const double reward = env.pull(x, arm);
    agent->learn(reward);
    const double inst = env.instant_regret(x, arm);
    cum += inst;
    result.cum_regret[static_cast<std::size_t>(t - 1)] = cum;
    switch (agent->last_kind()) {
      case ActionKind::greedy: result.greedy_round_regret += inst; break;
      case ActionKind::explore: ++result.explore_rounds; break;
      case ActionKind::forced: break;
    }
    if (arm != instance.optimal_arm(x)) ++result.suboptimal_plays;
  }
  result.ridge_fallback = agent->ridge_fallback();
  return result;
}

double growth_exponent(const RegretTrace& trace, double tail_fraction) {
  const long horizon = trace.horizon();
  if (horizon < 100) throw InsufficientData("growth exponent needs a horizon of >= 100");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ConfigError("tail_fraction must lie in (0, 1]");
  const long start = horizon - static_cast<long>(std::floor(
                                   static_cast<double>(horizon) * tail_fraction)) + 1;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long n = 0;
  for (long t = std::max<long>(1, start); t <= horizon; ++t) {
    const double m = trace.mean[static_cast<std::size_t>(t - 1)];
    if (m <= 0.0) continue;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(m);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) throw InsufficientData("growth exponent needs two rounds with positive regret");
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0) throw InsufficientData("growth exponent is undefined on a single round");
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

namespace {

// Gaps against the (first) maximum; a tied instance reports member=false
// through the membership path, never an exception.
void fill_gaps_bandit(const RewardInstance& mu, InstanceStats& stats) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < mu.size(); ++i)
    if (mu[i] > mu[best]) best = i;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i == best) continue;
    const double gap = mu[best] - mu[i];
    lo = std::min(lo, gap);
    hi = std::max(hi, gap);
  }
  stats.delta_min = mu.size() > 1 ? lo : 0.0;
  stats.delta_max = hi;
}

}  // namespace

InstanceStats compute_stats(const FeatureMatrix& phi, const RewardInstance& mu) {
  InstanceStats stats;
  stats.rho = chebyshev_misspecification(phi, mu);
  fill_gaps_bandit(mu, stats);
  try {
    const RobustMembershipReport report = robust_membership(phi, mu);
    stats.member = report.is_member;
    stats.margin = report.margin;
    if (report.is_member) stats.model_gap = model_space_gap(phi, mu);
  } catch (const TiedOptimum&) {
    stats.member = false;
  }
  return stats;
}

InstanceStats compute_stats_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                                  double ridge) {
  InstanceStats stats;
  stats.rho = chebyshev_misspecification(phi, mu);
  fill_gaps_bandit(mu, stats);
  try {
    const RobustMembershipReport report = robust_membership_ridge(phi, mu, ridge);
    stats.member = report.is_member;
    stats.margin = report.margin;
    if (report.is_member) stats.model_gap = model_space_gap_ridge(phi, mu, ridge);
  } catch (const TiedOptimum&) {
    stats.member = false;
  }
  return stats;
}

InstanceStats compute_stats_contextual(const ContextualInstance& instance) {
  InstanceStats stats;
  stats.rho = chebyshev_misspecification(instance.features(), instance.rewards());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t x = 0; x < instance.num_contexts(); ++x) {
    const auto opt = static_cast<std::size_t>(instance.optimal_arm(x));
    for (std::size_t a = 0; a < instance.num_arms(); ++a) {
      if (a == opt) continue;
      const double gap = instance.reward(x, opt) - instance.reward(x, a);
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
  }
  stats.delta_min = instance.num_arms() > 1 ? lo : 0.0;
  stats.delta_max = hi;
  const RobustMembershipReport report = robust_membership_contextual(instance);
  stats.member = report.is_member;
  stats.margin = report.margin;
  if (report.is_member) stats.model_gap = model_space_gap_contextual(instance);
  return stats;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.feature_rows.empty()) throw ConfigError("feature matrix is empty");
  const FeatureMatrix phi = FeatureMatrix::from_rows(config.feature_rows);
  if (subset_count(phi.num_arms(), phi.dim()) > 1000000)
    throw ConfigError("refusing K, d with more than 10^6 basic-solution subsets");
  if (bool(config.mu) == bool(config.sample))
    throw ConfigError("config takes exactly one of an explicit mu or a sample spec");

  ExperimentResult result;
  result.contextual = config.contextual.has_value();

  std::size_t num_contexts = 1, num_arms = phi.num_arms();
  if (result.contextual) {
    num_contexts = config.contextual->context_probs.size();
    if (num_contexts == 0 || phi.num_arms() % num_contexts != 0)
      throw ConfigError("feature rows are not a multiple of the context count");
    num_arms = phi.num_arms() / num_contexts;
  }

  // Resolve the instance.
  std::vector<double> mu_values;
  if (config.mu) {
    mu_values = *config.mu;
    if (mu_values.size() != phi.num_arms())
      throw ConfigError("explicit mu length does not match the feature rows");
  } else {
    const SampleSpec& spec = *config.sample;
    if (result.contextual) {
      std::vector<int> targets = spec.arms;
      if (targets.size() == 1) targets.assign(num_contexts, targets.front());
      if (targets.size() != num_contexts)
        throw ConfigError("sample.arm must give one target arm per context");
      const RewardInstance sampled = sample_robust_instance_contextual(
          phi, num_arms, targets, spec.box_low, spec.box_high, spec.seed,
          &result.sample_trail);
      mu_values.assign(sampled.values().begin(), sampled.values().end());
    } else {
      if (spec.arms.size() != 1)
        throw ConfigError("sample.arm must be a single arm for a bandit run");
      const RewardInstance sampled =
          sample_robust_instance(phi, spec.arms.front(), spec.box_low, spec.box_high,
                                 spec.seed, &result.sample_trail);
      mu_values.assign(sampled.values().begin(), sampled.values().end());
    }
  }
  result.mu_used = mu_values;
  RewardInstance mu{std::vector<double>(mu_values)};

  std::optional<ContextualInstance> instance;
  if (result.contextual) {
    instance.emplace(num_contexts, num_arms, phi, mu, config.contextual->context_probs);
    result.stats = compute_stats_contextual(*instance);
  } else {
    result.stats = compute_stats(phi, mu);
  }
  if (!result.stats.member && !config.allow_nonrobust)
    throw ConfigError("instance is not a robust member; set allow_nonrobust to run anyway");

  const int n = config.trials;
  std::vector<TrialResult> trials(static_cast<std::size_t>(n));
  const int jobs = std::clamp(config.jobs, 1, n);
  auto worker_body = [&](int i) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    trials[static_cast<std::size_t>(i)] =
        result.contextual
            ? run_trial_contextual(*instance, config.algorithm, config.horizon,
                                   config.sigma, seed)
            : run_trial_bandit(phi, mu, config.algorithm, config.horizon,
                               config.sigma, seed);
  };
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) worker_body(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) worker_body(i);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<std::vector<double>> curves;
  curves.reserve(trials.size());
  for (auto& tr : trials) {
    result.ridge_fallback = result.ridge_fallback || tr.ridge_fallback;
    curves.push_back(std::move(tr.cum_regret));
  }
  result.trace = RegretTrace::aggregate(std::move(curves));
  return result;
}

}  // namespace rbandit
