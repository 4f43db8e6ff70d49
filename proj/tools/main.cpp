// Command-line front end: region printing, membership checks, robust-region
// sampling, instance statistics and seeded regret experiments.
//
// Exit codes: 0 success, 2 config error, 3 region/membership failure,
// 4 runtime error. Arm and context indices are 1-based on this surface.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbandit/emit.hpp"
#include "rbandit/errors.hpp"
#include "rbandit/harness.hpp"

namespace {

using namespace rbandit;

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw ConfigError("malformed numeric list: " + text);
    }
  }
  if (out.empty()) throw ConfigError("empty numeric list");
  return out;
}

std::vector<int> parse_csv_ints(const std::string& text) {
  std::vector<int> out;
  for (const double v : parse_csv_doubles(text)) out.push_back(static_cast<int>(v));
  return out;
}

// Basic-solution enumeration is exhaustive; refuse shapes whose subset
// count is out of desk range.
void require_enumerable(const FeatureMatrix& phi) {
  if (subset_count(phi.num_arms(), phi.dim()) > 1000000)
    throw ConfigError("refusing K, d with more than 10^6 basic-solution subsets");
}

std::string join_doubles(std::span<const double> v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << format_double(v[i]);
  }
  return out.str();
}

void print_system(const std::string& label, const HalfspaceSystem& system) {
  std::cout << "region " << label << " constraints=" << system.size()
            << " empty=" << (system.is_empty() ? "true" : "false") << '\n';
  for (const auto& a : system.constraints())
    std::cout << "  halfspace (" << join_doubles(a) << ") . theta > 0\n";
}

void print_report(const RobustMembershipReport& report, bool contextual) {
  std::cout << "member=" << (report.is_member ? "true" : "false") << '\n';
  if (contextual) {
    std::cout << "optimal_arms=";
    for (std::size_t x = 0; x < report.optimal_arms.size(); ++x) {
      if (x) std::cout << ',';
      std::cout << report.optimal_arms[x] + 1;
    }
    std::cout << '\n';
    std::cout << "region_empty=" << (report.region_empty ? "true" : "false") << '\n';
  } else {
    std::cout << "optimal_arm=" << report.optimal_arm + 1 << '\n';
  }
  std::cout << "margin=" << format_double(report.margin) << '\n';
  std::cout << "boundary_warning=" << (report.boundary_warning ? "true" : "false") << '\n';
  std::cout << "violations=" << report.violating_subsets.size() << '\n';
  for (const auto& v : report.violating_subsets) {
    std::cout << "violation rows=(";
    for (std::size_t i = 0; i < v.subset.size(); ++i) {
      if (i) std::cout << ',';
      std::cout << v.subset[i] + 1;
    }
    std::cout << ") theta=(" << join_doubles(v.theta) << ") constraint="
              << v.constraint_index + 1 << '\n';
  }
}

int cmd_regions(const std::string& phi_path, const std::string& arms_csv) {
  const FeatureFile file = load_feature_file(phi_path);
  const FeatureMatrix phi = FeatureMatrix::from_rows(file.rows);
  if (!file.num_arms) {
    for (std::size_t k = 0; k < phi.num_arms(); ++k) {
      std::ostringstream label;
      label << "Theta_" << k + 1;
      try {
        print_system(label.str(), param_region(phi, static_cast<int>(k)));
      } catch (const DegenerateRegion&) {
        std::cout << "region " << label.str() << " constraints=0 empty=true"
                  << " (duplicate features)\n";
      }
    }
    return 0;
  }
  const std::size_t arms = *file.num_arms;
  const std::size_t contexts = phi.num_arms() / arms;
  for (std::size_t x = 0; x < contexts; ++x) {
    const Mat block = phi.data().slice_rows(x * arms, arms);
    for (std::size_t a = 0; a < arms; ++a) {
      std::ostringstream label;
      label << "Theta_x" << x + 1 << "_arm" << a + 1;
      try {
        print_system(label.str(), param_region_rows(block, static_cast<int>(a)));
      } catch (const DegenerateRegion&) {
        std::cout << "region " << label.str() << " constraints=0 empty=true"
                  << " (duplicate features)\n";
      }
    }
  }
  if (!arms_csv.empty()) {
    std::vector<int> targets = parse_csv_ints(arms_csv);
    for (int& t : targets) --t;
    print_system("intersection", contextual_param_region(phi, arms, targets));
  }
  return 0;
}

int cmd_member(const std::string& phi_path, const std::string& mu_csv,
               std::optional<double> ridge, bool require_contextual) {
  const FeatureFile file = load_feature_file(phi_path);
  const FeatureMatrix phi = FeatureMatrix::from_rows(file.rows);
  require_enumerable(phi);
  const RewardInstance mu{parse_csv_doubles(mu_csv)};
  RobustMembershipReport report;
  bool contextual = file.num_arms.has_value();
  if (require_contextual && !contextual)
    throw ConfigError("--contextual needs a feature file with context blocks");
  if (contextual) {
    if (ridge) throw ConfigError("--ridge is not available for contextual membership");
    report = robust_membership_contextual_rows(phi, *file.num_arms, mu);
  } else if (ridge) {
    report = robust_membership_ridge(phi, mu, *ridge);
  } else {
    report = robust_membership(phi, mu);
  }
  print_report(report, contextual);
  return report.is_member ? 0 : 3;
}

int cmd_sample(const std::string& phi_path, const std::string& arm_csv, double lo,
               double hi, std::uint64_t seed, int count) {
  const FeatureFile file = load_feature_file(phi_path);
  const FeatureMatrix phi = FeatureMatrix::from_rows(file.rows);
  require_enumerable(phi);
  std::vector<int> targets = parse_csv_ints(arm_csv);
  for (int& t : targets) --t;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    RewardInstance sample =
        file.num_arms
            ? sample_robust_instance_contextual(
                  phi, *file.num_arms,
                  targets.size() == 1
                      ? std::vector<int>(phi.num_arms() / *file.num_arms, targets[0])
                      : targets,
                  lo, hi, s)
            : sample_robust_instance(phi, targets.at(0), lo, hi, s);
    std::cout << join_doubles(sample.values()) << '\n';
  }
  return 0;
}

int cmd_stats(const std::string& phi_path, const std::string& mu_csv,
              std::optional<double> ridge) {
  const FeatureFile file = load_feature_file(phi_path);
  const FeatureMatrix phi = FeatureMatrix::from_rows(file.rows);
  require_enumerable(phi);
  const RewardInstance mu{parse_csv_doubles(mu_csv)};
  InstanceStats stats;
  if (file.num_arms) {
    if (!file.context_probs)
      throw ConfigError("contextual stats need context_probs in the feature file");
    const std::size_t contexts = phi.num_arms() / *file.num_arms;
    ContextualInstance instance(contexts, *file.num_arms, phi, mu, *file.context_probs);
    stats = compute_stats_contextual(instance);
  } else if (ridge) {
    stats = compute_stats_ridge(phi, mu, *ridge);
  } else {
    stats = compute_stats(phi, mu);
  }
  std::cout << "rho=" << format_double(stats.rho) << '\n';
  std::cout << "delta_min=" << format_double(stats.delta_min) << '\n';
  std::cout << "delta_max=" << format_double(stats.delta_max) << '\n';
  std::cout << "margin=" << format_double(stats.margin) << '\n';
  if (stats.model_gap) std::cout << "model_gap=" << format_double(*stats.model_gap) << '\n';
  std::cout << "member=" << (stats.member ? "true" : "false") << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (jobs > 0) config.jobs = jobs;
  if (seed) config.base_seed = *seed;

  const ExperimentResult result = run_experiment(config);
  if (result.ridge_fallback)
    std::cerr << "warning: forced basis left lambda_min(V) < 1; agent continued in "
                 "ridge mode\n";
  emit_outputs(result, config, config.out_dir);

  const InstanceStats& s = result.stats;
  std::cout << "member=" << (s.member ? "true" : "false") << " rho=" << format_double(s.rho)
            << " delta_min=" << format_double(s.delta_min)
            << " delta_max=" << format_double(s.delta_max)
            << " margin=" << format_double(s.margin);
  if (s.model_gap) std::cout << " model_gap=" << format_double(*s.model_gap);
  std::cout << '\n';
  const long horizon = result.trace.horizon();
  std::cout << "final_regret_mean="
            << format_double(result.trace.mean[static_cast<std::size_t>(horizon - 1)])
            << " final_regret_hi3="
            << format_double(result.trace.hi3[static_cast<std::size_t>(horizon - 1)]) << '\n';
  if (horizon >= 100)
    std::cout << "growth_exponent_tail50="
              << format_double(growth_exponent(result.trace, 0.5)) << '\n';
  std::cout << "outputs=" << config.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust-region analysis and regret simulation for misspecified "
               "linear bandits"};
  app.require_subcommand(1);

  std::string phi_path, mu_csv, arms_csv, config_path, out_dir, box_csv = "-10,10";
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> run_seed;
  int count = 1, jobs = 0;

  auto* regions = app.add_subcommand("regions", "print parameter regions and emptiness");
  regions->add_option("phi", phi_path, "feature matrix JSON file")->required();
  regions->add_option("--arms", arms_csv, "target arms (contextual intersection)");

  auto* member = app.add_subcommand("member", "robust observation region membership");
  member->add_option("phi", phi_path)->required();
  member->add_option("mu", mu_csv, "comma-separated rewards")->required();
  member->add_option("--ridge", ridge, "regularized membership with this ridge");
  bool member_contextual = false;
  member->add_flag("--contextual", member_contextual,
                   "require a contextual feature file");

  auto* sample = app.add_subcommand("sample", "rejection-sample robust instances");
  sample->add_option("phi", phi_path)->required();
  sample->add_option("--arm", arms_csv, "target arm (or per-context list)")->required();
  sample->add_option("--box", box_csv, "box low,high");
  sample->add_option("--seed", seed, "sampler seed");
  sample->add_option("-n", count, "number of instances");

  auto* stats = app.add_subcommand("stats", "instance statistics");
  stats->add_option("phi", phi_path)->required();
  stats->add_option("mu", mu_csv)->required();
  stats->add_option("--ridge", ridge, "ridge-based membership fields");

  auto* run = app.add_subcommand("run", "seeded multi-trial regret experiment");
  run->add_option("config", config_path, "experiment JSON")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--jobs", jobs, "parallel trial workers");
  run->add_option("--seed", run_seed, "base seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(regions)) return cmd_regions(phi_path, arms_csv);
    if (app.got_subcommand(member))
      return cmd_member(phi_path, mu_csv, ridge, member_contextual);
    if (app.got_subcommand(sample)) {
      const auto box = parse_csv_doubles(box_csv);
      if (box.size() != 2) throw ConfigError("--box takes low,high");
      return cmd_sample(phi_path, arms_csv, box[0], box[1], seed, count);
    }
    if (app.got_subcommand(stats)) return cmd_stats(phi_path, mu_csv, ridge);
    if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, jobs, run_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const TiedOptimum& e) {
    std::cerr << "membership error: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateRegion& e) {
    std::cerr << "region error: " << e.what() << '\n';
    return 3;
  } catch (const NotMember& e) {
    std::cerr << "membership error: " << e.what() << '\n';
    return 3;
  } catch (const RegionTooThin& e) {
    std::cerr << "sampler error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 4;
}
