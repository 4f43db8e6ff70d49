#include "rbandit/regions.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "rbandit/errors.hpp"
#include "rbandit/rng.hpp"
#include "rbandit/simplex_lp.hpp"

namespace rbandit {

namespace {

constexpr long kSamplerBudget = 1000000;  // rejected draws before giving up

double linf_norm(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

// One membership problem covers the plain, ridge and contextual cases:
// subsets are enumerated over `rows`/`values` (possibly augmented), the
// basic solutions are tested against `region`, and the margin additionally
// honors the greedy constraints mu_w > mu_l. Only the first `mu_len`
// coordinates are free; augmented tail entries are pinned to zero.
struct MembershipProblem {
  const Mat* rows;
  std::span<const double> values;
  const HalfspaceSystem* region;
  std::vector<std::pair<int, int>> greedy_pairs;
  std::size_t mu_len;
  std::optional<std::vector<int>> excluded_subset;
};

std::vector<Violation> find_violations(const MembershipProblem& p) {
  std::vector<Violation> out;
  const BasicSolutionSet sols = enumerate_basic_solutions_rows(*p.rows, p.values);
  for (const BasicSolution& bs : sols.entries) {
    if (p.excluded_subset && bs.subset == *p.excluded_subset) continue;
    const auto& cons = p.region->constraints();
    for (std::size_t ci = 0; ci < cons.size(); ++ci) {
      if (dot(cons[ci], bs.theta) <= 0.0) {
        out.push_back({bs.subset, bs.theta, static_cast<int>(ci)});
        break;
      }
    }
  }
  return out;
}

// delta = min over constraints c (linear in mu) of (c . mu) / ||c||_1.
double margin_of_member(const MembershipProblem& p) {
  const std::size_t d = p.rows->cols();
  double delta = std::numeric_limits<double>::infinity();

  for (const auto& [winner, loser] : p.greedy_pairs) {
    const double value = p.values[static_cast<std::size_t>(winner)] -
                         p.values[static_cast<std::size_t>(loser)];
    delta = std::min(delta, value / 2.0);
  }

  const BasicSolutionSet sols = enumerate_basic_solutions_rows(*p.rows, p.values);
  std::vector<double> w(d, 0.0);
  for (const BasicSolution& bs : sols.entries) {
    if (p.excluded_subset && bs.subset == *p.excluded_subset) continue;
    // Transposed subsystem: for constraint a, the mu-coefficients on the
    // subset rows are w with Phi_J^T w = a.
    Mat sub_t(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        sub_t(r, c) = (*p.rows)(static_cast<std::size_t>(bs.subset[c]), r);
    for (const auto& a : p.region->constraints()) {
      if (!solve_square(sub_t, a, w))
        throw Error("margin: transposed subsystem unexpectedly singular");
      double value = 0.0, l1 = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        const auto idx = static_cast<std::size_t>(bs.subset[r]);
        if (idx >= p.mu_len) continue;  // pinned augmented coordinate
        value += w[r] * p.values[idx];
        l1 += std::abs(w[r]);
      }
      if (l1 == 0.0) throw NotMember("constraint with empty support cannot hold strictly");
      delta = std::min(delta, value / l1);
    }
  }
  if (!(delta > 0.0)) throw NotMember("margin requested for a non-member instance");
  return delta;
}

RobustMembershipReport build_report(const MembershipProblem& p,
                                    std::span<const double> mu_real) {
  RobustMembershipReport report;
  report.violating_subsets = find_violations(p);
  report.is_member = report.violating_subsets.empty();
  if (report.is_member) {
    report.margin = margin_of_member(p);
    report.boundary_warning = report.margin <= 1e-9 * linf_norm(mu_real);
  }
  return report;
}

std::vector<std::pair<int, int>> bandit_greedy_pairs(std::size_t k_arms, int k) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < k_arms; ++i)
    if (static_cast<int>(i) != k) pairs.emplace_back(k, static_cast<int>(i));
  return pairs;
}

std::vector<std::pair<int, int>> contextual_greedy_pairs(std::size_t num_contexts,
                                                         std::size_t num_arms,
                                                         std::span<const int> targets) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t x = 0; x < num_contexts; ++x) {
    const int opt = targets[x];
    for (std::size_t a = 0; a < num_arms; ++a)
      if (static_cast<int>(a) != opt)
        pairs.emplace_back(static_cast<int>(x * num_arms) + opt,
                           static_cast<int>(x * num_arms + a));
  }
  return pairs;
}

std::vector<int> per_context_optima(std::size_t num_contexts, std::size_t num_arms,
                                    std::span<const double> mu) {
  std::vector<int> optima(num_contexts);
  for (std::size_t x = 0; x < num_contexts; ++x) {
    std::size_t best = 0;
    bool tied = false;
    for (std::size_t a = 1; a < num_arms; ++a) {
      const double v = mu[x * num_arms + a];
      if (v > mu[x * num_arms + best]) {
        best = a;
        tied = false;
      } else if (v == mu[x * num_arms + best]) {
        tied = true;
      }
    }
    if (tied) throw TiedOptimum("context has no unique optimal arm");
    optima[x] = static_cast<int>(best);
  }
  return optima;
}

}  // namespace

HalfspaceSystem::HalfspaceSystem(std::vector<std::vector<double>> constraints)
    : dim_(0), constraints_(std::move(constraints)) {
  if (constraints_.empty()) throw ConfigError("half-space system has no constraints");
  dim_ = constraints_.front().size();
  for (const auto& a : constraints_) {
    if (a.size() != dim_) throw ConfigError("half-space constraints have mixed dimensions");
    if (linf_norm(a) == 0.0)
      throw DegenerateRegion("zero constraint vector: two features coincide");
  }
}

bool HalfspaceSystem::contains(std::span<const double> theta) const {
  for (const auto& a : constraints_)
    if (!(dot(a, theta) > 0.0)) return false;
  return true;
}

bool HalfspaceSystem::is_empty() const {
  // Homogeneity turns "a . theta > 0 feasible" into "a . theta >= 1 feasible".
  const std::size_t m = constraints_.size();
  LpProblem lp;
  lp.a = Mat(m, 2 * dim_);
  lp.b.assign(m, 1.0);
  lp.c.assign(2 * dim_, 0.0);
  lp.sense.assign(m, LpSense::ge);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < dim_; ++j) {
      lp.a(i, j) = constraints_[i][j];
      lp.a(i, dim_ + j) = -constraints_[i][j];
    }
  return solve_lp(lp).status == LpStatus::infeasible;
}

HalfspaceSystem HalfspaceSystem::concatenate(const std::vector<HalfspaceSystem>& parts) {
  std::vector<std::vector<double>> all;
  for (const auto& part : parts)
    all.insert(all.end(), part.constraints().begin(), part.constraints().end());
  return HalfspaceSystem(std::move(all));
}

ContextualInstance::ContextualInstance(std::size_t num_contexts, std::size_t num_arms,
                                       FeatureMatrix features, RewardInstance rewards,
                                       std::vector<double> context_probs)
    : num_contexts_(num_contexts),
      num_arms_(num_arms),
      features_(std::move(features)),
      rewards_(std::move(rewards)),
      context_probs_(std::move(context_probs)) {
  if (num_contexts_ < 1 || num_arms_ < 1)
    throw ConfigError("contextual instance needs at least one context and one arm");
  if (features_.num_arms() != num_contexts_ * num_arms_)
    throw ConfigError("stacked feature matrix does not match |X| * |A| rows");
  if (rewards_.size() != num_contexts_ * num_arms_)
    throw ConfigError("reward vector does not match |X| * |A|");
  if (context_probs_.size() != num_contexts_)
    throw ConfigError("context distribution length does not match |X|");
  double sum = 0.0;
  for (const double p : context_probs_) {
    if (!(p > 0.0)) throw ConfigError("every context needs positive probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("context probabilities must sum to 1 within 1e-12");
  optimal_arms_ = per_context_optima(num_contexts_, num_arms_, rewards_.values());
}

int greedy_optimal_arm(const RewardInstance& mu) { return mu.optimal_arm(); }

HalfspaceSystem param_region_rows(const Mat& rows, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= rows.rows())
    throw ConfigError("arm index out of range");
  std::vector<std::vector<double>> cons;
  cons.reserve(rows.rows() - 1);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (static_cast<int>(i) == k) continue;
    std::vector<double> a(rows.cols());
    for (std::size_t j = 0; j < rows.cols(); ++j)
      a[j] = rows(static_cast<std::size_t>(k), j) - rows(i, j);
    cons.push_back(std::move(a));
  }
  return HalfspaceSystem(std::move(cons));
}

HalfspaceSystem param_region(const FeatureMatrix& phi, int k) {
  return param_region_rows(phi.data(), k);
}

RobustMembershipReport robust_membership(const FeatureMatrix& phi,
                                         const RewardInstance& mu) {
  assert(mu.size() == phi.num_arms());
  const int k = mu.optimal_arm();
  const HalfspaceSystem region = param_region(phi, k);
  MembershipProblem p{&phi.data(), mu.values(), &region,
                      bandit_greedy_pairs(phi.num_arms(), k), phi.num_arms(), {}};
  RobustMembershipReport report = build_report(p, mu.values());
  report.optimal_arm = k;
  return report;
}

RobustMembershipReport robust_membership_ridge(const FeatureMatrix& phi,
                                               const RewardInstance& mu,
                                               double ridge) {
  assert(mu.size() == phi.num_arms());
  const int k = mu.optimal_arm();
  const HalfspaceSystem region = param_region(phi, k);
  const AugmentedSystem aug = augment_ridge(phi, SamplingWeights::uniform(phi.num_arms()),
                                            mu.values(), ridge);
  std::vector<int> pure_regularizer(phi.dim());
  for (std::size_t j = 0; j < phi.dim(); ++j)
    pure_regularizer[j] = static_cast<int>(phi.num_arms() + j);
  MembershipProblem p{&aug.phi.data(), aug.y, &region,
                      bandit_greedy_pairs(phi.num_arms(), k), phi.num_arms(),
                      pure_regularizer};
  RobustMembershipReport report = build_report(p, mu.values());
  report.optimal_arm = k;
  return report;
}

HalfspaceSystem contextual_param_region(const FeatureMatrix& stacked,
                                        std::size_t num_arms,
                                        std::span<const int> target_arms) {
  if (num_arms == 0 || stacked.num_arms() % num_arms != 0)
    throw ConfigError("stacked feature rows are not a multiple of the arm count");
  const std::size_t num_contexts = stacked.num_arms() / num_arms;
  if (target_arms.size() != num_contexts)
    throw ConfigError("one target arm per context is required");
  std::vector<HalfspaceSystem> parts;
  parts.reserve(num_contexts);
  for (std::size_t x = 0; x < num_contexts; ++x) {
    const Mat block = stacked.data().slice_rows(x * num_arms, num_arms);
    parts.push_back(param_region_rows(block, target_arms[x]));
  }
  return HalfspaceSystem::concatenate(parts);
}

HalfspaceSystem contextual_param_region(const ContextualInstance& instance) {
  return contextual_param_region(instance.features(), instance.num_arms(),
                                 instance.optimal_arms());
}

RobustMembershipReport robust_membership_contextual_rows(const FeatureMatrix& stacked,
                                                         std::size_t num_arms,
                                                         const RewardInstance& mu) {
  if (num_arms == 0 || stacked.num_arms() % num_arms != 0)
    throw ConfigError("stacked feature rows are not a multiple of the arm count");
  const std::size_t num_contexts = stacked.num_arms() / num_arms;
  const std::vector<int> targets = per_context_optima(num_contexts, num_arms, mu.values());
  const HalfspaceSystem region = contextual_param_region(stacked, num_arms, targets);
  MembershipProblem p{&stacked.data(), mu.values(), &region,
                      contextual_greedy_pairs(num_contexts, num_arms, targets),
                      stacked.num_arms(), {}};
  RobustMembershipReport report = build_report(p, mu.values());
  report.optimal_arms = targets;
  report.region_empty = region.is_empty();
  return report;
}

RobustMembershipReport robust_membership_contextual(const ContextualInstance& instance) {
  return robust_membership_contextual_rows(instance.features(), instance.num_arms(),
                                           instance.rewards());
}

double interior_margin(const FeatureMatrix& phi, const RewardInstance& mu) {
  const RobustMembershipReport r = robust_membership(phi, mu);
  if (!r.is_member) throw NotMember("interior margin requested for a non-member");
  return r.margin;
}

double interior_margin_ridge(const FeatureMatrix& phi, const RewardInstance& mu,
                             double ridge) {
  const RobustMembershipReport r = robust_membership_ridge(phi, mu, ridge);
  if (!r.is_member) throw NotMember("interior margin requested for a non-member");
  return r.margin;
}

double interior_margin_contextual(const FeatureMatrix& stacked, std::size_t num_arms,
                                  const RewardInstance& mu) {
  const RobustMembershipReport r = robust_membership_contextual_rows(stacked, num_arms, mu);
  if (!r.is_member) throw NotMember("interior margin requested for a non-member");
  return r.margin;
}

namespace {

template <typename Accept>
RewardInstance rejection_sample(std::size_t len, double lo, double hi,
                                std::uint64_t seed, Accept&& accept,
                                std::vector<SamplePoint>* trail) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("sampler box bounds must be finite with low < high");
  SplitMix64 rng = make_stream(seed, Stream::region_sampler);
  long rejected = 0;
  while (rejected < kSamplerBudget) {
    std::vector<double> mu(len);
    for (double& x : mu) x = lo + (hi - lo) * rng.next_unit();
    const bool ok = accept(mu);
    if (trail && trail->size() < 200000) trail->push_back({mu, ok});
    if (ok) return RewardInstance(std::move(mu));
    ++rejected;
  }
  std::ostringstream msg;
  msg << "no member accepted after " << kSamplerBudget
      << " rejected draws (acceptance rate < "
      << 1.0 / static_cast<double>(kSamplerBudget) << ")";
  throw RegionTooThin(msg.str());
}

}  // namespace

RewardInstance sample_robust_instance(const FeatureMatrix& phi, int k, double box_low,
                                      double box_high, std::uint64_t seed,
                                      std::vector<SamplePoint>* trail) {
  if (k < 0 || static_cast<std::size_t>(k) >= phi.num_arms())
    throw ConfigError("target arm out of range");
  return rejection_sample(
      phi.num_arms(), box_low, box_high, seed,
      [&](const std::vector<double>& mu) {
        RewardInstance cand{std::vector<double>(mu)};
        if (!cand.has_unique_optimum() || cand.optimal_arm() != k) return false;
        return robust_membership(phi, cand).is_member;
      },
      trail);
}

RewardInstance sample_robust_instance_contextual(const FeatureMatrix& stacked,
                                                 std::size_t num_arms,
                                                 std::span<const int> target_arms,
                                                 double box_low, double box_high,
                                                 std::uint64_t seed,
                                                 std::vector<SamplePoint>* trail) {
  const std::size_t num_contexts = stacked.num_arms() / num_arms;
  if (target_arms.size() != num_contexts)
    throw ConfigError("one target arm per context is required");
  return rejection_sample(
      stacked.num_arms(), box_low, box_high, seed,
      [&](const std::vector<double>& mu) {
        std::vector<int> optima;
        try {
          optima = per_context_optima(num_contexts, num_arms, mu);
        } catch (const TiedOptimum&) {
          return false;
        }
        for (std::size_t x = 0; x < num_contexts; ++x)
          if (optima[x] != target_arms[x]) return false;
        RewardInstance cand{std::vector<double>(mu)};
        return robust_membership_contextual_rows(stacked, num_arms, cand).is_member;
      },
      trail);
}

}  // namespace rbandit
