// Command-line front end: sample simulation, single-shot estimation, Monte
// Carlo cells, the population-oracle identification suite, and table
// rendering. Every code path is deterministic given its flags (no clocks, no
// global RNG), so identical invocations produce byte-identical outputs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wsmatch/config.hpp"
#include "wsmatch/dgp.hpp"
#include "wsmatch/estimators.hpp"
#include "wsmatch/mc.hpp"
#include "wsmatch/oracle_suite.hpp"
#include "wsmatch/quadrature.hpp"
#include "wsmatch/tables.hpp"

namespace {

using wsmatch::ConfigMap;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Merged view of config-file values and command-line flags, flags winning.
class Options {
 public:
  Options(ConfigMap file_values, ConfigMap flag_values, std::set<std::string> allowed)
      : values_(std::move(file_values)), allowed_(std::move(allowed)) {
    for (const auto& [key, value] : values_) {
      if (!allowed_.count(key)) throw UsageError("unknown config key: " + key);
    }
    for (auto& [key, value] : flag_values) values_[key] = value;
  }

  std::optional<std::string> raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) const {
    const auto v = raw(key);
    if (!v) throw UsageError("missing required value: --" + key);
    return *v;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto v = raw(key);
    return v ? parse_double(key, *v) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = raw(key);
    return v ? parse_u64(key, *v) : fallback;
  }

  static double parse_double(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double value = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return value;
    } catch (const std::exception&) {
      throw UsageError("bad numeric value for " + key + ": " + text);
    }
  }

  static std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const std::uint64_t value = std::stoull(text, &pos);
      if (pos != text.size() || text.find('-') != std::string::npos) {
        throw std::invalid_argument(text);
      }
      return value;
    } catch (const std::exception&) {
      throw UsageError("bad integer value for " + key + ": " + text);
    }
  }

  wsmatch::Design get_design(const std::string& key) const {
    const std::string text = require(key);
    const auto design = wsmatch::parse_design(text);
    if (!design) throw UsageError("unknown design: " + text);
    return *design;
  }

  wsmatch::Estimator get_estimator(const std::string& key) const {
    const std::string text = require(key);
    const auto estimator = wsmatch::parse_estimator(text);
    if (!estimator) throw UsageError("unknown estimator: " + text);
    return *estimator;
  }

  wsmatch::EstimatorConfig estimator_config() const {
    wsmatch::EstimatorConfig config;
    config.bandwidth_exponent = get_double("bandwidth-exponent", config.bandwidth_exponent);
    config.trim_c0 = get_double("trim-c0", config.trim_c0);
    config.y_grid_divisor =
        static_cast<std::size_t>(get_u64("y-grid-divisor", config.y_grid_divisor));
    config.p_grid_points =
        static_cast<std::size_t>(get_u64("p-grid-points", config.p_grid_points));
    config.weight_floor = get_double("weight-floor", config.weight_floor);
    try {
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return config;
  }

 private:
  ConfigMap values_;
  std::set<std::string> allowed_;
};

// Writes to --out when present, stdout otherwise.
void emit(const Options& opts, const std::string& text) {
  const auto path = opts.raw("out");
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + *path);
  out << text;
  if (!out) throw std::runtime_error("failed writing output file: " + *path);
}

const std::set<std::string> kTuningKeys = {"bandwidth-exponent", "trim-c0", "y-grid-divisor",
                                           "p-grid-points", "weight-floor"};

int run_simulate(const Options& opts) {
  wsmatch::DesignSpec spec;
  spec.design = opts.get_design("design");
  spec.rho = opts.get_double("rho", 0.0);
  spec.n = static_cast<std::size_t>(Options::parse_u64("n", opts.require("n")));
  spec.seed = opts.get_u64("seed", 1);
  const wsmatch::Sample sample = wsmatch::generate(spec);
  std::ostringstream out;
  wsmatch::write_sample_csv(out, sample);
  emit(opts, out.str());
  return 0;
}

int run_estimate(const Options& opts) {
  wsmatch::DesignSpec spec;
  spec.design = opts.get_design("design");
  spec.rho = opts.get_double("rho", 0.0);
  spec.n = static_cast<std::size_t>(Options::parse_u64("n", opts.require("n")));
  spec.seed = opts.get_u64("seed", 1);
  if (!wsmatch::is_scalar_outcome(spec.design)) {
    throw UsageError("estimate: design has no scalar outcome to estimate on");
  }
  const wsmatch::Estimator estimator = opts.get_estimator("estimator");
  const wsmatch::EstimatorConfig config = opts.estimator_config();

  const wsmatch::Sample sample = wsmatch::generate(spec);
  wsmatch::EstimateReport report;
  switch (estimator) {
    case wsmatch::Estimator::ckt_ate:
      report = wsmatch::ate_ckt(sample, config);
      break;
    case wsmatch::Estimator::ckt_ate_weighted:
      report = wsmatch::ate_ckt_weighted(sample, config, opts.get_double("a-low", -1.0),
                                         opts.get_double("a-high", 1.0));
      break;
    case wsmatch::Estimator::vy_infeasible:
      report = wsmatch::ate_vy_infeasible(sample, spec.design, spec.rho, config);
      break;
    case wsmatch::Estimator::rc_dte:
      report = wsmatch::rc_dte(sample, config, opts.get_double("y", 1.0));
      break;
  }
  std::ostringstream out;
  wsmatch::write_report_csv(out, {&report, 1});
  emit(opts, out.str());
  return 0;
}

bool combo_valid(wsmatch::Design design, wsmatch::Estimator estimator) {
  const bool ate_design =
      design == wsmatch::Design::d1 || design == wsmatch::Design::d2 || design == wsmatch::Design::d3;
  if (estimator == wsmatch::Estimator::rc_dte) return design == wsmatch::Design::rc;
  return ate_design;
}

int run_mc(const Options& opts) {
  std::vector<wsmatch::Design> designs;
  for (const std::string& item : wsmatch::split_list(opts.require("design"))) {
    const auto design = wsmatch::parse_design(item);
    if (!design) throw UsageError("unknown design: " + item);
    designs.push_back(*design);
  }
  std::vector<double> rhos;
  for (const std::string& item : wsmatch::split_list(opts.require("rho"))) {
    rhos.push_back(Options::parse_double("rho", item));
  }
  std::vector<std::size_t> ns;
  for (const std::string& item : wsmatch::split_list(opts.require("n"))) {
    ns.push_back(static_cast<std::size_t>(Options::parse_u64("n", item)));
  }
  std::vector<wsmatch::Estimator> estimators;
  for (const std::string& item : wsmatch::split_list(opts.require("estimator"))) {
    const auto estimator = wsmatch::parse_estimator(item);
    if (!estimator) throw UsageError("unknown estimator: " + item);
    estimators.push_back(*estimator);
  }
  if (designs.empty() || rhos.empty() || ns.empty() || estimators.empty()) {
    throw UsageError("mc: design, rho, n, and estimator lists must be non-empty");
  }
  const std::size_t reps = static_cast<std::size_t>(opts.get_u64("reps", 401));
  if (reps < 1) throw UsageError("mc: reps must be >= 1");
  const std::uint64_t seed = opts.get_u64("seed", 1);

  wsmatch::McOptions mc_options;
  mc_options.config = opts.estimator_config();
  mc_options.a_low = opts.get_double("a-low", mc_options.a_low);
  mc_options.a_high = opts.get_double("a-high", mc_options.a_high);
  mc_options.y = opts.get_double("y", mc_options.y);

  for (wsmatch::Design design : designs) {
    for (wsmatch::Estimator estimator : estimators) {
      if (!combo_valid(design, estimator)) {
        throw UsageError(std::string("mc: estimator ") + wsmatch::to_string(estimator) +
                         " does not apply to design " + wsmatch::to_string(design));
      }
    }
  }

  std::vector<wsmatch::McSummary> summaries;
  for (wsmatch::Design design : designs) {
    for (wsmatch::Estimator estimator : estimators) {
      for (std::size_t n : ns) {
        for (double rho : rhos) {
          summaries.push_back(
              wsmatch::run_cell(design, rho, n, estimator, reps, seed, mc_options));
        }
      }
    }
  }
  std::ostringstream out;
  wsmatch::write_summaries_csv(out, summaries);
  emit(opts, out.str());
  return 0;
}

int run_oracle_check(const Options& opts) {
  const std::vector<wsmatch::OracleCheck> checks = wsmatch::run_oracle_suite();
  std::ostringstream out;
  const bool all = wsmatch::write_suite_report(out, checks);
  emit(opts, out.str());
  return all ? 0 : 3;
}

int run_tables(const Options& opts) {
  const std::string in_path = opts.require("in");
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + in_path);
  const std::vector<wsmatch::McSummary> summaries = wsmatch::read_summaries_csv(in);
  const std::string format_text = opts.raw("format").value_or("markdown");
  const auto format = wsmatch::parse_table_format(format_text);
  if (!format) throw UsageError("unknown format: " + format_text);
  emit(opts, wsmatch::emit_tables(summaries, *format));
  return 0;
}

struct SubcommandSpec {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;  // key -> value as typed
  std::string config_path;
  std::set<std::string> allowed;
  int (*run)(const Options&) = nullptr;
};

void add_value_flag(SubcommandSpec& sub, const std::string& key, const std::string& help) {
  sub.allowed.insert(key);
  auto* opt = sub.app->add_option_function<std::string>(
      "--" + key, [&sub, key](const std::string& value) { sub.flags[key] = value; }, help);
  opt->expected(1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-matching treatment effects: simulation and estimation toolkit"};
  app.require_subcommand(1);

  std::vector<SubcommandSpec> subs(5);
  const auto configure = [&](SubcommandSpec& sub, const std::string& name,
                             const std::string& help, int (*run)(const Options&)) {
    sub.app = app.add_subcommand(name, help);
    sub.run = run;
    sub.app->add_option("--config", sub.config_path,
                        "key = value file; command-line flags override it");
  };

  configure(subs[0], "simulate", "draw one sample and write it as CSV", run_simulate);
  add_value_flag(subs[0], "design", "D1|D2|D3|RC|MULTINOMIAL|ROY");
  add_value_flag(subs[0], "rho", "corr(outcome error, selection error), default 0");
  add_value_flag(subs[0], "n", "sample size");
  add_value_flag(subs[0], "seed", "RNG seed, default 1");
  add_value_flag(subs[0], "out", "output path, default stdout");

  configure(subs[1], "estimate", "draw one sample and run one estimator", run_estimate);
  add_value_flag(subs[1], "design", "D1|D2|D3|RC");
  add_value_flag(subs[1], "rho", "corr(outcome error, selection error), default 0");
  add_value_flag(subs[1], "n", "sample size");
  add_value_flag(subs[1], "seed", "RNG seed, default 1");
  add_value_flag(subs[1], "estimator", "ckt|ckt-w|vy|rc");
  add_value_flag(subs[1], "y", "probe point for the distributional estimator, default 1");
  add_value_flag(subs[1], "a-low", "weighted-ATE window lower edge, default -1");
  add_value_flag(subs[1], "a-high", "weighted-ATE window upper edge, default 1");
  add_value_flag(subs[1], "out", "output path, default stdout");
  for (const std::string& key : kTuningKeys) {
    add_value_flag(subs[1], key, "estimator tuning (see docs)");
  }

  configure(subs[2], "mc", "run Monte Carlo cells and write the summary CSV", run_mc);
  add_value_flag(subs[2], "design", "comma-separated design list");
  add_value_flag(subs[2], "rho", "comma-separated rho list");
  add_value_flag(subs[2], "n", "comma-separated sample-size list");
  add_value_flag(subs[2], "estimator", "comma-separated estimator list");
  add_value_flag(subs[2], "reps", "replications per cell, default 401");
  add_value_flag(subs[2], "seed", "master seed, default 1");
  add_value_flag(subs[2], "y", "probe point for the distributional estimator, default 1");
  add_value_flag(subs[2], "a-low", "weighted-ATE window lower edge");
  add_value_flag(subs[2], "a-high", "weighted-ATE window upper edge");
  add_value_flag(subs[2], "out", "output path, default stdout");
  for (const std::string& key : kTuningKeys) {
    add_value_flag(subs[2], key, "estimator tuning (see docs)");
  }

  configure(subs[3], "oracle-check", "run the population identification suite", run_oracle_check);
  add_value_flag(subs[3], "out", "report path, default stdout");

  configure(subs[4], "tables", "render a summaries CSV as markdown or CSV", run_tables);
  add_value_flag(subs[4], "in", "summaries CSV produced by `mc`");
  add_value_flag(subs[4], "format", "markdown|csv, default markdown");
  add_value_flag(subs[4], "out", "output path, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (SubcommandSpec& sub : subs) {
    if (!sub.app->parsed()) continue;
    try {
      ConfigMap file_values;
      if (!sub.config_path.empty()) file_values = wsmatch::parse_config_file(sub.config_path);
      const Options opts(std::move(file_values), ConfigMap(sub.flags.begin(), sub.flags.end()),
                         sub.allowed);
      return sub.run(opts);
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const wsmatch::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
