#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbandit/env.hpp"
#include "rbandit/errors.hpp"

using namespace rbandit;

namespace {

ContextualInstance small_contextual(std::vector<double> probs) {
  const FeatureMatrix phi(6, 2, {2, 3, 4, 5, 2, 1, 2, 3, 4, 5, 6, 7});
  return ContextualInstance(2, 3, phi, RewardInstance({5, 1, -7, 6, 2, -8}),
                            std::move(probs));
}

}  // namespace

TEST_CASE("noiseless pulls return the true means") {
  BanditEnv env(RewardInstance({20, 3}), NoiseModel{0.0}, make_stream(1, Stream::env_noise));
  CHECK(env.pull(0) == 20.0);
  CHECK(env.pull(1) == 3.0);
  CHECK(env.pull(0) == 20.0);
  CHECK(env.rounds_elapsed() == 3);
  CHECK(env.pull_counts()[0] == 2);
  CHECK(env.pull_counts()[1] == 1);
}

TEST_CASE("pull rejects out-of-range arms") {
  BanditEnv env(RewardInstance({20, 3}), NoiseModel{0.5}, make_stream(1, Stream::env_noise));
  CHECK_THROWS_AS(env.pull(2), ArmOutOfRange);
  CHECK_THROWS_AS(env.pull(-1), ArmOutOfRange);
}

TEST_CASE("sample means concentrate at the sub-Gaussian rate") {
  // 1e5 pulls at sigma = 1/2: the mean should land within 6 sigma / sqrt(n).
  BanditEnv env(RewardInstance({20, 3}), NoiseModel{0.5}, make_stream(7, Stream::env_noise));
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += env.pull(0);
  CHECK(std::abs(sum / n - 20.0) <= 0.01);
}

TEST_CASE("reward streams are deterministic in the seed") {
  BanditEnv a(RewardInstance({20, 3}), NoiseModel{0.5}, make_stream(3, Stream::env_noise));
  BanditEnv b(RewardInstance({20, 3}), NoiseModel{0.5}, make_stream(3, Stream::env_noise));
  for (int i = 0; i < 100; ++i) CHECK(a.pull(i % 2) == b.pull(i % 2));
}

TEST_CASE("instant regret uses true means only") {
  BanditEnv env(RewardInstance({20, 3}), NoiseModel{0.5}, make_stream(1, Stream::env_noise));
  CHECK(env.instant_regret(0) == 0.0);
  CHECK(env.instant_regret(1) == 17.0);
}

TEST_CASE("context draws follow the context distribution") {
  ContextualEnv env(small_contextual({0.5, 0.5}), NoiseModel{0.5},
                    make_stream(11, Stream::context_draw),
                    make_stream(11, Stream::env_noise));
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (env.step_context() == 0) ++first;
  CHECK(std::abs(static_cast<double>(first) / n - 0.5) <= 0.01);
}

TEST_CASE("single-context environments always observe context zero") {
  const FeatureMatrix phi(3, 2, {2, 3, 4, 5, 2, 1});
  ContextualInstance instance(1, 3, phi, RewardInstance({5, 1, -7}), {1.0});
  ContextualEnv env(instance, NoiseModel{0.0}, make_stream(1, Stream::context_draw),
                    make_stream(1, Stream::env_noise));
  for (int i = 0; i < 50; ++i) CHECK(env.step_context() == 0);
}

TEST_CASE("degenerate context distributions are rejected at construction") {
  CHECK_THROWS_AS(small_contextual({1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(small_contextual({0.7, 0.7}), ConfigError);
}

TEST_CASE("contextual instant regret is bounded by the largest gap") {
  const ContextualInstance instance = small_contextual({0.5, 0.5});
  ContextualEnv env(instance, NoiseModel{0.0}, make_stream(1, Stream::context_draw),
                    make_stream(1, Stream::env_noise));
  double delta_max = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 3; ++a)
      delta_max = std::max(delta_max, env.instant_regret(x, static_cast<int>(a)));
  CHECK(delta_max == 14.0);  // context 2: 6 - (-8)
  for (std::size_t x = 0; x < 2; ++x) {
    CHECK(env.instant_regret(x, instance.optimal_arm(x)) == 0.0);
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(env.instant_regret(x, static_cast<int>(a)) >= 0.0);
      CHECK(env.instant_regret(x, static_cast<int>(a)) <= delta_max);
    }
  }
}

TEST_CASE("gaussian draws consume exactly two raw values") {
  SplitMix64 a(99), b(99);
  a.next_gaussian();
  b.next_u64();
  b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("purpose streams are disjoint") {
  SplitMix64 noise = make_stream(5, Stream::env_noise);
  SplitMix64 explore = make_stream(5, Stream::agent_explore);
  CHECK(noise.next_u64() != explore.next_u64());
}
