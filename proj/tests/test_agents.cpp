#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbandit/agents.hpp"
#include "rbandit/errors.hpp"

using namespace rbandit;

namespace {

const FeatureMatrix& two_armed() {
  static const FeatureMatrix phi(2, 1, {3, 1});
  return phi;
}

const FeatureMatrix& three_armed() {
  static const FeatureMatrix phi(3, 2, {2, 3, 4, 5, 2, 1});
  return phi;
}

ContextualInstance worked_contextual() {
  const FeatureMatrix phi(6, 2, {2, 3, 4, 5, 2, 1, 2, 3, 4, 5, 6, 7});
  // Realizable from theta = (-1, 0.5): both contexts award arm 1.
  const std::vector<double> mu = mat_vec(phi.data(), std::vector<double>{-1.0, 0.5});
  return ContextualInstance(2, 3, phi,
                            RewardInstance{std::vector<double>(mu)}, {0.5, 0.5});
}

}  // namespace

TEST_CASE("lse state reproduces the two-armed closed form") {
  LseState state(1);
  CHECK_FALSE(state.solvable());
  state.update(two_armed().feature(0), 20.0);
  state.update(two_armed().feature(1), 3.0);
  REQUIRE(state.solvable());
  CHECK(state.theta_hat()[0] == doctest::Approx(6.3).epsilon(1e-12));
  CHECK(state.round() == 2);
}

TEST_CASE("zero features leave the estimate untouched") {
  LseState state(2);
  state.update(three_armed().feature(0), 1.0);
  state.update(three_armed().feature(1), 2.0);
  const std::vector<double> before(state.theta_hat().begin(), state.theta_hat().end());
  state.update(std::vector<double>{0.0, 0.0}, 123.0);
  CHECK(state.round() == 3);
  CHECK(state.theta_hat()[0] == before[0]);
  CHECK(state.theta_hat()[1] == before[1]);
}

TEST_CASE("incremental state equals batch recomputation over 1000 updates") {
  SplitMix64 rng(301);
  LseState state(2);
  Mat v(2, 2);
  std::vector<double> s(2, 0.0);
  std::vector<long> counts(3, 0);
  std::vector<double> sums(3, 0.0);
  for (int step = 0; step < 1000; ++step) {
    const auto arm = static_cast<std::size_t>(rng.next_below(3));
    const double reward = rng.next_unit() * 10 - 5;
    const auto feature = three_armed().feature(arm);
    state.update(feature, reward);
    add_outer(v, feature);
    for (std::size_t j = 0; j < 2; ++j) s[j] += feature[j] * reward;
    ++counts[arm];
    sums[arm] += reward;
    if (!state.solvable()) continue;
    std::vector<double> batch(2, 0.0);
    REQUIRE(solve_square(v, s, batch));
    CHECK(state.theta_hat()[0] == doctest::Approx(batch[0]).epsilon(1e-8));
    CHECK(state.theta_hat()[1] == doctest::Approx(batch[1]).epsilon(1e-8));
  }
  // Equivalent batch route: play counts as weights against per-arm means.
  std::vector<double> weights(3), means(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    weights[i] = static_cast<double>(counts[i]);
    if (counts[i] > 0) means[i] = sums[i] / static_cast<double>(counts[i]);
  }
  const auto theta = weighted_least_squares(three_armed(), weights, means);
  CHECK(state.theta_hat()[0] == doctest::Approx(theta[0]).epsilon(1e-8));
  CHECK(state.theta_hat()[1] == doctest::Approx(theta[1]).epsilon(1e-8));
}

TEST_CASE("epsilon schedule starts at one") {
  CHECK(epsilon_schedule(1) == 1.0);
  CHECK(epsilon_schedule(4) == 0.5);
  CHECK(epsilon_schedule(100) == doctest::Approx(0.1));
}

TEST_CASE("forced-basis rounds return the forced arms in order") {
  LseState state(2);
  SplitMix64 rng = make_stream(1, Stream::agent_explore);
  const EpsGreedyConfig config;  // forced basis
  const Decision d1 = eps_greedy_action(state, config, three_armed(), 1, rng);
  CHECK(d1.arm == 0);
  CHECK(d1.kind == ActionKind::forced);
  const Decision d2 = eps_greedy_action(state, config, three_armed(), 2, rng);
  CHECK(d2.arm == 1);
  CHECK(d2.kind == ActionKind::forced);
}

TEST_CASE("round one in ridge mode explores regardless of the estimate") {
  EpsGreedyConfig config;
  config.init = InitMode::ridge;
  config.ridge = 1.0;
  LseState state(1, config.ridge);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng = make_stream(seed, Stream::agent_explore);
    const Decision d = eps_greedy_action(state, config, two_armed(), 1, rng);
    CHECK(d.kind == ActionKind::explore);
  }
}

TEST_CASE("epsilon-greedy consumes exactly two raw values per decision round") {
  EpsGreedyConfig config;
  config.init = InitMode::ridge;
  LseState state(2, 1.0);
  state.update(three_armed().feature(0), 5.0);
  SplitMix64 rng = make_stream(77, Stream::agent_explore);
  SplitMix64 replay = make_stream(77, Stream::agent_explore);
  for (long t = 1; t <= 100; ++t) {
    const Decision d = eps_greedy_action(state, config, three_armed(), t, rng);
    const double coin = replay.next_unit();
    const double u = replay.next_unit();
    if (coin < epsilon_schedule(t)) {
      CHECK(d.kind == ActionKind::explore);
      CHECK(d.arm == static_cast<int>(u * 3));
    } else {
      CHECK(d.kind == ActionKind::greedy);
      std::vector<double> scores(3);
      for (std::size_t i = 0; i < 3; ++i)
        scores[i] = dot(three_armed().feature(i), state.theta_hat());
      int best = 0;
      for (int i = 1; i < 3; ++i)
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)])
          best = i;
      CHECK(d.arm == best);
    }
  }
}

TEST_CASE("greedy step before an invertible design is an error") {
  LseState state(2);  // never updated, singular
  const EpsGreedyConfig config;
  bool threw = false;
  // Find a coin that loses the exploration toss at t = 1000.
  for (std::uint64_t seed = 0; seed < 64 && !threw; ++seed) {
    SplitMix64 probe = make_stream(seed, Stream::agent_explore);
    if (probe.next_unit() < epsilon_schedule(1000)) continue;
    SplitMix64 rng = make_stream(seed, Stream::agent_explore);
    CHECK_THROWS_AS(eps_greedy_action(state, config, three_armed(), 1000, rng),
                    SingularDesign);
    threw = true;
  }
  CHECK(threw);
}

TEST_CASE("noiseless two-armed play is regret-free after both arms are seen") {
  // Greedy rounds never leave the optimal arm once the design is invertible.
  LseState state(1);
  state.update(two_armed().feature(0), 20.0);
  state.update(two_armed().feature(1), 3.0);
  const EpsGreedyConfig config;
  SplitMix64 rng = make_stream(9, Stream::agent_explore);
  for (long t = 3; t < 400; ++t) {
    const Decision d = eps_greedy_action(state, config, two_armed(), t, rng);
    if (d.kind == ActionKind::greedy) CHECK(d.arm == 0);
  }
}

TEST_CASE("per-arm random-play counts match the schedule mean") {
  // E[count of random plays of one arm up to T] = (1/K) sum_t eps_t.
  const long horizon = 400;
  const int trials = 50;
  const std::size_t arms = 3;
  double expected = 0.0, variance = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    const double p = epsilon_schedule(t) / static_cast<double>(arms);
    expected += p;
    variance += p * (1.0 - p);
  }
  CHECK(expected >= (std::sqrt(static_cast<double>(horizon + 1)) - 1.0) /
                        static_cast<double>(arms));
  double total = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng = make_stream(static_cast<std::uint64_t>(trial), Stream::agent_explore);
    EpsGreedyConfig config;
    config.init = InitMode::ridge;
    LseState state(2, 1.0);
    state.update(three_armed().feature(0), 1.0);
    state.update(three_armed().feature(1), 1.0);
    long count = 0;
    for (long t = 1; t <= horizon; ++t) {
      const Decision d = eps_greedy_action(state, config, three_armed(), t, rng);
      if (d.kind == ActionKind::explore && d.arm == 2) ++count;
    }
    total += static_cast<double>(count);
  }
  const double mean_count = total / trials;
  const double band = 4.0 * std::sqrt(variance) / std::sqrt(static_cast<double>(trials));
  CHECK(std::abs(mean_count - expected) <= band);
}

TEST_CASE("beta radius follows the confidence formula") {
  LinUCBConfig config;
  config.R = 0.5;
  config.delta = 0.05;
  // 2 R^2 log((1 + t/d)^{d/2} / delta) at t = 2, d = 1.
  CHECK(beta_radius(config, 2, 1) ==
        doctest::Approx(0.5 * std::log(std::sqrt(3.0) / 0.05)).epsilon(1e-12));
  CHECK(beta_radius(config, 20000, 2) ==
        doctest::Approx(0.5 * std::log((1.0 + 10000.0) / 0.05)).epsilon(1e-12));
}

TEST_CASE("linucb picks the dominating arm of the worked d = 1 example") {
  // V = 10, theta_hat = 6.3: arm 1 dominates both the mean and the width.
  LseState state(1);
  state.update(std::vector<double>{3.0}, 3.0 * 6.3);
  state.update(std::vector<double>{1.0}, 6.3);  // V = 10, S = 10 * 6.3
  REQUIRE(state.design()(0, 0) == doctest::Approx(10.0));
  REQUIRE(state.theta_hat()[0] == doctest::Approx(6.3));
  LinUCBConfig config;
  config.R = 0.5;
  config.delta = 0.05;
  CHECK(linucb_action(state, config, two_armed(), 2) == 0);
}

TEST_CASE("the UCB bonus is nonnegative and grows with R") {
  LseState state(2);
  state.update(three_armed().feature(0), 4.0);
  state.update(three_armed().feature(1), -1.0);
  LinUCBConfig config;
  config.R = 0.5;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto feature = three_armed().feature(i);
    const double greedy = dot(feature, state.theta_hat());
    const double bonus = std::sqrt(beta_radius(config, 5, 2)) * state.width(feature);
    CHECK(bonus >= 0.0);
    LinUCBConfig doubled = config;
    doubled.R = 1.0;
    const double bigger = std::sqrt(beta_radius(doubled, 5, 2)) * state.width(feature);
    CHECK(greedy + bigger >= greedy + bonus);
  }
}

TEST_CASE("tiny R reduces linucb to the greedy argmax") {
  LseState state(2);
  state.update(three_armed().feature(0), 4.0);
  state.update(three_armed().feature(1), -1.0);
  LinUCBConfig config;
  config.R = 1e-12;
  std::vector<double> scores(3);
  for (std::size_t i = 0; i < 3; ++i)
    scores[i] = dot(three_armed().feature(i), state.theta_hat());
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) best = i;
  CHECK(linucb_action(state, config, three_armed(), 7) == best);
}

TEST_CASE("contextual actions with one context reduce to the bandit rules") {
  const FeatureMatrix phi(3, 2, {2, 3, 4, 5, 2, 1});
  ContextualInstance instance(1, 3, phi, RewardInstance({5, 1, -7}), {1.0});
  LseState state(2, 1.0);
  state.update(phi.feature(0), 5.0);
  state.update(phi.feature(2), -7.0);
  EpsGreedyConfig config;
  config.init = InitMode::ridge;
  for (long t = 3; t < 60; ++t) {
    SplitMix64 a = make_stream(static_cast<std::uint64_t>(t), Stream::agent_explore);
    SplitMix64 b = make_stream(static_cast<std::uint64_t>(t), Stream::agent_explore);
    const Decision bandit = eps_greedy_action(state, config, phi, t, a);
    const Decision ctx = contextual_eps_greedy_action(state, config, instance, 0, t, b);
    CHECK(bandit.arm == ctx.arm);
    CHECK(bandit.kind == ctx.kind);
  }
  LinUCBConfig ucb;
  CHECK(linucb_action(state, ucb, phi, 9) == contextual_linucb_action(state, ucb, instance, 0, 9));
}

TEST_CASE("contextual forced rounds are scripted regardless of the context") {
  const ContextualInstance instance = worked_contextual();
  LseState state(2);
  const EpsGreedyConfig config;
  SplitMix64 rng = make_stream(21, Stream::agent_explore);
  for (const std::size_t x : {1ULL, 0ULL}) {
    const Decision d =
        contextual_eps_greedy_action(state, config, instance, x, x == 1 ? 1 : 2, rng);
    CHECK(d.kind == ActionKind::forced);
    CHECK(d.arm == (x == 1 ? 0 : 1));  // scripted slots 0 then 1
  }
}

TEST_CASE("noiseless contextual greedy play is optimal at every context") {
  const ContextualInstance instance = worked_contextual();
  LseState state(2);
  // Feed the true rewards of the scripted arms at context 0.
  state.update(instance.feature(0, 0), instance.reward(0, 0));
  state.update(instance.feature(0, 1), instance.reward(0, 1));
  EpsGreedyConfig config;
  SplitMix64 rng = make_stream(33, Stream::agent_explore);
  for (long t = 3; t < 100; ++t) {
    const std::size_t x = static_cast<std::size_t>(t % 2);
    const Decision d = contextual_eps_greedy_action(state, config, instance, x, t, rng);
    if (d.kind == ActionKind::greedy)
      CHECK(d.arm == instance.optimal_arm(x));
  }
}

TEST_CASE("model-space gap of the worked two-armed instance") {
  // Hull vertices {20/3, 3}; (phi_1 - phi_2) theta = 2 theta; minimum 6.
  CHECK(model_space_gap(two_armed(), RewardInstance({20, 3})) ==
        doctest::Approx(6.0).epsilon(1e-12));
  CHECK_THROWS_AS(model_space_gap(two_armed(), RewardInstance({3, 20})), NotMember);
}

TEST_CASE("model-space gap of realizable members equals the reward gap") {
  // theta* = (-2, 1) gives mu = (-1, -3, -3)... tied suboptimal arms are fine,
  // but pick a strict instance instead: theta* = (-2.2, 1).
  const std::vector<double> mu = mat_vec(three_armed().data(), std::vector<double>{-2.2, 1});
  const RewardInstance instance{std::vector<double>(mu)};
  REQUIRE(robust_membership(three_armed(), instance).is_member);
  const int k = instance.optimal_arm();
  double true_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 3; ++i)
    if (static_cast<int>(i) != k)
      true_gap = std::min(true_gap, mu[static_cast<std::size_t>(k)] - mu[i]);
  CHECK(model_space_gap(three_armed(), instance) ==
        doctest::Approx(true_gap).epsilon(1e-9));
}

TEST_CASE("linucb agent falls back to ridge when the forced basis is weak") {
  // Rows (2,3) and (4,5) leave lambda_min(V) well under 1, so the agent must
  // regularize with max(1, L^2) = 41 after the forced phase.
  LinUCBConfig config;
  LinUCBAgent agent(three_armed(), config);
  SplitMix64 rng = make_stream(3, Stream::agent_explore);
  BanditEnv env(RewardInstance({2, 4, 1}), NoiseModel{0.0},
                make_stream(3, Stream::env_noise));
  for (long t = 1; t <= 3; ++t) {
    agent.observe(std::nullopt);
    const int arm = agent.act(t, rng);
    agent.learn(env.pull(arm));
  }
  CHECK(agent.ridge_fallback());
}

TEST_CASE("linucb agent keeps the forced design when lambda_min is large") {
  const FeatureMatrix eye(3, 2, {2, 0, 0, 2, 1, 1});
  LinUCBConfig config;
  LinUCBAgent agent(eye, config);
  SplitMix64 rng = make_stream(3, Stream::agent_explore);
  BanditEnv env(RewardInstance({5, 1, 2}), NoiseModel{0.0},
                make_stream(3, Stream::env_noise));
  for (long t = 1; t <= 3; ++t) {
    agent.observe(std::nullopt);
    agent.learn(env.pull(agent.act(t, rng)));
  }
  CHECK_FALSE(agent.ridge_fallback());
}

TEST_CASE("the running design matrix stays symmetric positive semidefinite") {
  SplitMix64 rng(401);
  LseState state(2, 0.5);
  for (int step = 0; step < 200; ++step) {
    const auto arm = static_cast<std::size_t>(rng.next_below(3));
    state.update(three_armed().feature(arm), rng.next_unit());
    const Mat& v = state.design();
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(v(i, j) - v(j, i)) <= 1e-12);
    CHECK(is_positive_semidefinite(v));
  }
}
