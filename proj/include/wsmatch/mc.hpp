#pragma once

// Monte Carlo harness: replicated estimation cells with deterministic,
// thread-count-invariant aggregation. Each replication owns an RNG substream
// derived from (master seed, design, rho, n, replication index), so results
// are identical no matter how the work is scheduled.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wsmatch/design.hpp"
#include "wsmatch/estimators.hpp"
#include "wsmatch/nonparametrics.hpp"

namespace wsmatch {

// Summary statistics for one (design, rho, n, estimator) cell. The four
// statistics are computed on scaled errors (estimate - truth) / truth.
// MAD is the median of |scaled error| about the truth (not about the median
// estimate); it is paired with RMSE as an accuracy measure.
struct McSummary {
  Design design = Design::d1;
  double rho = 0.0;
  std::size_t n = 0;
  Estimator estimator = Estimator::ckt_ate;
  double mean_bias = 0.0;
  double median_bias = 0.0;
  double rmse = 0.0;
  double mad = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;
  bool unreliable = false;  // more than 10% of replications failed
};

// Optional knobs for a cell run. `y` is the probe point for the
// distributional estimator; the window only applies to the weighted ATE.
struct McOptions {
  EstimatorConfig config;
  double a_low = -std::numeric_limits<double>::infinity();
  double a_high = std::numeric_limits<double>::infinity();
  double y = 1.0;
  unsigned threads = 0;  // 0: WSMATCH_THREADS env var, else hardware count
};

// A cell run with the per-replication estimates retained (NaN on failure),
// indexed by replication. Used for variance diagnostics and tests.
struct McCell {
  McSummary summary;
  std::vector<double> estimates;
};

// Worker count resolution: explicit request > WSMATCH_THREADS > hardware.
unsigned resolve_thread_count(unsigned requested);

McCell run_cell_detailed(Design design, double rho, std::size_t n, Estimator estimator,
                         std::size_t reps, std::uint64_t master_seed,
                         const McOptions& options = {});

McSummary run_cell(Design design, double rho, std::size_t n, Estimator estimator,
                   std::size_t reps, std::uint64_t master_seed, const McOptions& options = {});

// Long-format CSV: design,rho,n,estimator,mean_bias,median_bias,rmse,mad,
// reps,failures,unreliable. Numbers at 17 significant digits so the file
// round-trips without numeric change.
void write_summaries_csv(std::ostream& out, std::span<const McSummary> summaries);
std::vector<McSummary> read_summaries_csv(std::istream& in);

}  // namespace wsmatch
