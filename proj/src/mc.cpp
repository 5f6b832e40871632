#include "wsmatch/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wsmatch/dgp.hpp"
#include "wsmatch/rng.hpp"
#include "wsmatch/sample.hpp"

namespace wsmatch {

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WSMATCH_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace {

double run_one_replication(Design design, double rho, std::size_t n, Estimator estimator,
                           std::uint64_t seed, const McOptions& options) {
  DesignSpec spec{design, rho, n, seed};
  const Sample sample = generate(spec);
  switch (estimator) {
    case Estimator::ckt_ate:
      return ate_ckt(sample, options.config).value;
    case Estimator::ckt_ate_weighted:
      return ate_ckt_weighted(sample, options.config, options.a_low, options.a_high).value;
    case Estimator::vy_infeasible:
      return ate_vy_infeasible(sample, design, rho, options.config).value;
    case Estimator::rc_dte:
      return rc_dte(sample, options.config, options.y).value;
  }
  throw std::invalid_argument("run_cell: unknown estimator");
}

double median_of_sorted(const std::vector<double>& v) {
  const std::size_t k = v.size();
  if (k % 2 == 1) return v[k / 2];
  return 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

McSummary summarize(Design design, double rho, std::size_t n, Estimator estimator,
                    const std::vector<double>& estimates) {
  McSummary s;
  s.design = design;
  s.rho = rho;
  s.n = n;
  s.estimator = estimator;
  s.reps = estimates.size();

  const double truth = true_parameter(design);
  std::vector<double> errors;
  errors.reserve(estimates.size());
  for (double e : estimates) {
    if (std::isnan(e)) {
      ++s.failures;
    } else {
      errors.push_back((e - truth) / truth);
    }
  }
  s.unreliable = s.failures * 10 > s.reps;
  if (errors.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean_bias = s.median_bias = s.rmse = s.mad = nan;
    return s;
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
  }
  const double count = static_cast<double>(errors.size());
  s.mean_bias = sum / count;
  s.rmse = std::sqrt(sum_sq / count);
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  s.median_bias = median_of_sorted(sorted);
  for (double& e : sorted) e = std::fabs(e);
  std::sort(sorted.begin(), sorted.end());
  s.mad = median_of_sorted(sorted);
  return s;
}

}  // namespace

McCell run_cell_detailed(Design design, double rho, std::size_t n, Estimator estimator,
                         std::size_t reps, std::uint64_t master_seed, const McOptions& options) {
  if (reps < 1) throw std::invalid_argument("run_cell: reps must be >= 1");
  options.config.validate();

  std::vector<double> estimates(reps, std::numeric_limits<double>::quiet_NaN());
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_thread_count(options.threads), reps));
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      const std::uint64_t seed = derive_substream(master_seed, design, rho, n, r + 1);
      try {
        estimates[r] = run_one_replication(design, rho, n, estimator, seed, options);
      } catch (const EstimationError&) {
        // Failed replication: recorded as NaN, counted in the summary.
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  McCell cell;
  cell.summary = summarize(design, rho, n, estimator, estimates);
  cell.estimates = std::move(estimates);
  return cell;
}

McSummary run_cell(Design design, double rho, std::size_t n, Estimator estimator, std::size_t reps,
                   std::uint64_t master_seed, const McOptions& options) {
  return run_cell_detailed(design, rho, n, estimator, reps, master_seed, options).summary;
}

void write_summaries_csv(std::ostream& out, std::span<const McSummary> summaries) {
  out << "design,rho,n,estimator,mean_bias,median_bias,rmse,mad,reps,failures,unreliable\n";
  for (const McSummary& s : summaries) {
    out << to_string(s.design) << ',' << format_double(s.rho) << ',' << s.n << ','
        << to_string(s.estimator) << ',' << format_double(s.mean_bias) << ','
        << format_double(s.median_bias) << ',' << format_double(s.rmse) << ','
        << format_double(s.mad) << ',' << s.reps << ',' << s.failures << ','
        << (s.unreliable ? 1 : 0) << '\n';
  }
}

std::vector<McSummary> read_summaries_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("summaries csv: empty input");
  if (line != "design,rho,n,estimator,mean_bias,median_bias,rmse,mad,reps,failures,unreliable") {
    throw std::runtime_error("summaries csv: unexpected header: " + line);
  }
  std::vector<McSummary> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 11) {
      throw std::runtime_error("summaries csv: line " + std::to_string(lineno) +
                               ": expected 11 fields");
    }
    McSummary s;
    const auto design = parse_design(fields[0]);
    const auto estimator = parse_estimator(fields[3]);
    if (!design || !estimator) {
      throw std::runtime_error("summaries csv: line " + std::to_string(lineno) +
                               ": bad design or estimator");
    }
    s.design = *design;
    s.estimator = *estimator;
    try {
      s.rho = std::stod(fields[1]);
      s.n = static_cast<std::size_t>(std::stoull(fields[2]));
      s.mean_bias = std::stod(fields[4]);
      s.median_bias = std::stod(fields[5]);
      s.rmse = std::stod(fields[6]);
      s.mad = std::stod(fields[7]);
      s.reps = static_cast<std::size_t>(std::stoull(fields[8]));
      s.failures = static_cast<std::size_t>(std::stoull(fields[9]));
      s.unreliable = fields[10] == "1";
    } catch (const std::exception&) {
      throw std::runtime_error("summaries csv: line " + std::to_string(lineno) + ": bad number");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace wsmatch
