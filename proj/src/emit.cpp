#include "rbandit/emit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbandit/errors.hpp"

namespace rbandit {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

namespace {

double parse_double(std::string_view s) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("malformed numeric field in CSV");
  return value;
}

void write_atomic(const fs::path& path, const std::string& payload) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << payload;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string());
}

long csv_stride(long horizon) {
  if (horizon <= 100000) return 1;
  return (horizon + 100000 - 1) / 100000;
}

}  // namespace

std::string regret_csv_text(const RegretTrace& trace) {
  const long horizon = trace.horizon();
  const int n = trace.trials();
  std::ostringstream out;
  out << "round";
  for (int i = 0; i < n; ++i) out << ",trial_" << i;
  out << ",mean,std,lo3,hi3\n";
  const long stride = csv_stride(horizon);
  auto emit_row = [&](long t) {
    const auto idx = static_cast<std::size_t>(t - 1);
    out << t;
    for (int i = 0; i < n; ++i)
      out << ',' << format_double(trace.per_trial[static_cast<std::size_t>(i)][idx]);
    out << ',' << format_double(trace.mean[idx]) << ',' << format_double(trace.stddev[idx])
        << ',' << format_double(trace.lo3[idx]) << ',' << format_double(trace.hi3[idx])
        << '\n';
  };
  long last = 0;
  for (long t = stride; t <= horizon; t += stride) {
    emit_row(t);
    last = t;
  }
  if (last != horizon && horizon > 0) emit_row(horizon);
  return out.str();
}

RegretTrace parse_regret_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV");
  int n = 0;
  {
    std::istringstream header(line);
    std::string field;
    while (std::getline(header, field, ','))
      if (field.rfind("trial_", 0) == 0) ++n;
  }
  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(n));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // round index
    for (int i = 0; i < n; ++i) {
      if (!std::getline(row, field, ',')) throw IoError("short CSV row");
      per_trial[static_cast<std::size_t>(i)].push_back(parse_double(field));
    }
  }
  return RegretTrace::aggregate(std::move(per_trial));
}

std::string stats_txt_text(const ExperimentResult& result, const ExperimentConfig& config) {
  std::ostringstream out;
  const InstanceStats& s = result.stats;
  out << "member=" << (s.member ? "true" : "false") << '\n';
  out << "rho=" << format_double(s.rho) << '\n';
  out << "delta_min=" << format_double(s.delta_min) << '\n';
  out << "delta_max=" << format_double(s.delta_max) << '\n';
  out << "margin=" << format_double(s.margin) << '\n';
  if (s.model_gap) out << "model_gap=" << format_double(*s.model_gap) << '\n';
  out << "mu=";
  for (std::size_t i = 0; i < result.mu_used.size(); ++i) {
    if (i) out << ',';
    out << format_double(result.mu_used[i]);
  }
  out << '\n';

  out << "algorithm="
      << (config.algorithm.name == AlgorithmChoice::Name::eps_greedy ? "eps_greedy"
                                                                     : "linucb")
      << '\n';
  const bool ridge_init = (config.algorithm.name == AlgorithmChoice::Name::eps_greedy
                               ? config.algorithm.eps.init
                               : config.algorithm.ucb.init) == InitMode::ridge;
  out << "init=" << (ridge_init ? "ridge" : "forced") << '\n';
  if (ridge_init)
    out << "ridge=" << format_double(config.algorithm.eps.ridge) << '\n';
  if (config.algorithm.name == AlgorithmChoice::Name::linucb) {
    out << "R=" << format_double(config.algorithm.ucb.R) << '\n';
    out << "delta=" << format_double(config.algorithm.ucb.delta) << '\n';
  }
  if (result.ridge_fallback) out << "ridge_fallback=true\n";
  out << "horizon=" << config.horizon << '\n';
  out << "trials=" << config.trials << '\n';
  out << "base_seed=" << config.base_seed << '\n';
  out << "sigma=" << format_double(config.sigma) << '\n';
  if (config.contextual) {
    out << "context_probs=";
    const auto& probs = config.contextual->context_probs;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (i) out << ',';
      out << format_double(probs[i]);
    }
    out << '\n';
  }
  if (config.sample) {
    out << "sample_arms=";
    for (std::size_t i = 0; i < config.sample->arms.size(); ++i) {
      if (i) out << ',';
      out << config.sample->arms[i];
    }
    out << '\n';
    out << "sample_box=" << format_double(config.sample->box_low) << ','
        << format_double(config.sample->box_high) << '\n';
    out << "sample_seed=" << config.sample->seed << '\n';
    out << "sample_candidates=" << result.sample_trail.size() << '\n';
  }
  return out.str();
}

namespace {

struct SvgScale {
  double x0, x1, y0, y1;  // data ranges
  double px(double x) const { return 70.0 + (x - x0) / (x1 - x0) * 700.0; }
  double py(double y) const { return 460.0 - (y - y0) / (y1 - y0) * 420.0; }
};

void append_point(std::ostringstream& out, const SvgScale& s, double x, double y) {
  out << format_double(std::round(s.px(x) * 100.0) / 100.0) << ','
      << format_double(std::round(s.py(y) * 100.0) / 100.0) << ' ';
}

}  // namespace

std::string regret_svg_text(const RegretTrace& trace) {
  const long horizon = trace.horizon();
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\">\n";
  out << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  if (horizon > 0) {
    double ymax = 1e-9;
    for (long t = 1; t <= horizon; ++t)
      ymax = std::max(ymax, trace.hi3[static_cast<std::size_t>(t - 1)]);
    const SvgScale s{1.0, static_cast<double>(std::max<long>(horizon, 2)), 0.0, ymax};
    const long step = std::max<long>(1, horizon / 2000);

    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (long t = 1; t <= horizon; t += step)
      append_point(out, s, static_cast<double>(t),
                   std::max(0.0, trace.hi3[static_cast<std::size_t>(t - 1)]));
    for (long t = horizon - (horizon - 1) % step; t >= 1; t -= step)
      append_point(out, s, static_cast<double>(t),
                   std::max(0.0, trace.lo3[static_cast<std::size_t>(t - 1)]));
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
    for (long t = 1; t <= horizon; t += step)
      append_point(out, s, static_cast<double>(t), trace.mean[static_cast<std::size_t>(t - 1)]);
    out << "\"/>\n";

    out << "<line x1=\"70\" y1=\"460\" x2=\"770\" y2=\"460\" stroke=\"black\"/>\n";
    out << "<line x1=\"70\" y1=\"40\" x2=\"70\" y2=\"460\" stroke=\"black\"/>\n";
    out << "<text x=\"70\" y=\"478\" font-size=\"12\">1</text>\n";
    out << "<text x=\"770\" y=\"478\" font-size=\"12\" text-anchor=\"end\">" << horizon
        << "</text>\n";
    out << "<text x=\"65\" y=\"465\" font-size=\"12\" text-anchor=\"end\">0</text>\n";
    out << "<text x=\"65\" y=\"45\" font-size=\"12\" text-anchor=\"end\">"
        << format_double(std::round(ymax * 100.0) / 100.0) << "</text>\n";
    out << "<text x=\"400\" y=\"492\" font-size=\"13\" text-anchor=\"middle\">round"
        << "</text>\n";
    out << "<text x=\"400\" y=\"28\" font-size=\"13\" text-anchor=\"middle\">"
           "cumulative regret (mean, 3-sigma band)</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
  write_atomic(fs::path(dir) / "regret.csv", regret_csv_text(result.trace));
  write_atomic(fs::path(dir) / "stats.txt", stats_txt_text(result, config));
  write_atomic(fs::path(dir) / "regret.svg", regret_svg_text(result.trace));
  if (!result.sample_trail.empty()) {
    std::ostringstream out;
    const std::size_t width = result.sample_trail.front().mu.size();
    out << "index";
    for (std::size_t j = 0; j < width; ++j) out << ",mu_" << j;
    out << ",accepted\n";
    for (std::size_t i = 0; i < result.sample_trail.size(); ++i) {
      out << i;
      for (const double v : result.sample_trail[i].mu) out << ',' << format_double(v);
      out << ',' << (result.sample_trail[i].accepted ? 1 : 0) << '\n';
    }
    write_atomic(fs::path(dir) / "region_points.csv", out.str());
  }
}

}  // namespace rbandit
