// Replication harness: worker resolution, deterministic cells, thread-count
// invariance, failure accounting, the summary CSV round trip, and the table
// renderer.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wsmatch/mc.hpp"
#include "wsmatch/tables.hpp"

using namespace wsmatch;

namespace {

// Recompute the scaled-error statistics exactly as the harness does.
McSummary recompute(const McCell& cell, double truth) {
  McSummary s;
  std::vector<double> errors;
  for (double e : cell.estimates) {
    if (std::isnan(e)) {
      ++s.failures;
    } else {
      errors.push_back((e - truth) / truth);
    }
  }
  s.reps = cell.estimates.size();
  s.unreliable = s.failures * 10 > s.reps;
  double sum = 0.0, sum_sq = 0.0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
  }
  const double count = static_cast<double>(errors.size());
  s.mean_bias = sum / count;
  s.rmse = std::sqrt(sum_sq / count);
  std::sort(errors.begin(), errors.end());
  const auto median = [](const std::vector<double>& v) {
    return v.size() % 2 == 1 ? v[v.size() / 2]
                             : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  s.median_bias = median(errors);
  for (double& e : errors) e = std::fabs(e);
  std::sort(errors.begin(), errors.end());
  s.mad = median(errors);
  return s;
}

}  // namespace

TEST_CASE("worker count resolution") {
  CHECK(resolve_thread_count(3) == 3);
  setenv("WSMATCH_THREADS", "2", 1);
  CHECK(resolve_thread_count(0) == 2);
  CHECK(resolve_thread_count(5) == 5);  // explicit request wins
  setenv("WSMATCH_THREADS", "garbage", 1);
  CHECK(resolve_thread_count(0) >= 1);  // malformed env falls back to hardware
  unsetenv("WSMATCH_THREADS");
  CHECK(resolve_thread_count(0) >= 1);
}

TEST_CASE("cell statistics match a direct recomputation") {
  const McCell odd = run_cell_detailed(Design::d1, 0.5, 100, Estimator::ckt_ate, 9, 7);
  REQUIRE(odd.estimates.size() == 9);
  CHECK(odd.summary.failures == 0);
  CHECK(!odd.summary.unreliable);
  CHECK(odd.summary.reps == 9);
  const McSummary expect = recompute(odd, 0.5);
  CHECK(odd.summary.mean_bias == expect.mean_bias);
  CHECK(odd.summary.median_bias == expect.median_bias);
  CHECK(odd.summary.rmse == expect.rmse);
  CHECK(odd.summary.mad == expect.mad);

  // Even replication count exercises the midpoint-averaging median.
  const McCell even = run_cell_detailed(Design::d1, 0.25, 80, Estimator::ckt_ate, 4, 11);
  const McSummary expect_even = recompute(even, 0.5);
  CHECK(even.summary.median_bias == expect_even.median_bias);
  CHECK(even.summary.mad == expect_even.mad);

  CHECK_THROWS_AS(run_cell_detailed(Design::d1, 0.5, 50, Estimator::ckt_ate, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("cells are deterministic and thread-count invariant") {
  McOptions serial;
  serial.threads = 1;
  McOptions parallel;
  parallel.threads = 4;
  const McCell a = run_cell_detailed(Design::d2, 0.5, 100, Estimator::ckt_ate, 8, 1234, serial);
  const McCell b = run_cell_detailed(Design::d2, 0.5, 100, Estimator::ckt_ate, 8, 1234, parallel);
  CHECK(a.estimates == b.estimates);  // bitwise: scheduling cannot matter
  const McCell c = run_cell_detailed(Design::d2, 0.5, 100, Estimator::ckt_ate, 8, 1234, serial);
  CHECK(a.estimates == c.estimates);
  // A different master seed moves every replication.
  const McCell d = run_cell_detailed(Design::d2, 0.5, 100, Estimator::ckt_ate, 8, 99, serial);
  CHECK(a.estimates != d.estimates);
}

TEST_CASE("failed replications are counted, not propagated") {
  McOptions options;
  options.a_low = 50.0;  // the covariate window excludes every observation
  options.a_high = 60.0;
  const McCell cell =
      run_cell_detailed(Design::d1, 0.5, 40, Estimator::ckt_ate_weighted, 5, 3, options);
  CHECK(cell.summary.failures == 5);
  CHECK(cell.summary.unreliable);
  for (double e : cell.estimates) CHECK(std::isnan(e));
  CHECK(std::isnan(cell.summary.mean_bias));
  CHECK(std::isnan(cell.summary.rmse));
}

TEST_CASE("distributional cell runs through the harness") {
  const McSummary s = run_cell(Design::rc, 0.5, 80, Estimator::rc_dte, 4, 21);
  CHECK(s.estimator == Estimator::rc_dte);
  CHECK(s.design == Design::rc);
  CHECK(s.reps == 4);
  CHECK(s.failures == 0);
  CHECK(std::isfinite(s.mean_bias));
  CHECK(s.rmse >= 0.0);
}

TEST_CASE("summary csv round trip") {
  std::vector<McSummary> original;
  original.push_back(run_cell(Design::d1, 0.5, 60, Estimator::ckt_ate, 3, 5));
  McOptions fail_opts;
  fail_opts.a_low = 50.0;
  fail_opts.a_high = 60.0;
  original.push_back(
      run_cell(Design::d1, 0.25, 40, Estimator::ckt_ate_weighted, 3, 5, fail_opts));
  std::ostringstream out;
  write_summaries_csv(out, original);
  std::istringstream in(out.str());
  const std::vector<McSummary> back = read_summaries_csv(in);
  REQUIRE(back.size() == original.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].design == original[i].design);
    CHECK(back[i].rho == original[i].rho);
    CHECK(back[i].n == original[i].n);
    CHECK(back[i].estimator == original[i].estimator);
    // 17-significant-digit formatting round-trips every finite double.
    const auto same = [](double x, double y) {
      return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    CHECK(same(back[i].mean_bias, original[i].mean_bias));
    CHECK(same(back[i].median_bias, original[i].median_bias));
    CHECK(same(back[i].rmse, original[i].rmse));
    CHECK(same(back[i].mad, original[i].mad));
    CHECK(back[i].reps == original[i].reps);
    CHECK(back[i].failures == original[i].failures);
    CHECK(back[i].unreliable == original[i].unreliable);
  }

  std::istringstream bad_header("not,a,header\n");
  CHECK_THROWS_AS(read_summaries_csv(bad_header), std::runtime_error);
  std::istringstream short_row(
      "design,rho,n,estimator,mean_bias,median_bias,rmse,mad,reps,failures,unreliable\n"
      "D1,0.5,100\n");
  CHECK_THROWS_AS(read_summaries_csv(short_row), std::runtime_error);
  std::istringstream bad_design(
      "design,rho,n,estimator,mean_bias,median_bias,rmse,mad,reps,failures,unreliable\n"
      "D9,0.5,100,CKT_ATE,0,0,0,0,3,0,0\n");
  CHECK_THROWS_AS(read_summaries_csv(bad_design), std::runtime_error);
}

TEST_CASE("table rendering") {
  CHECK(parse_table_format("csv") == TableFormat::csv);
  CHECK(parse_table_format("markdown") == TableFormat::markdown);
  CHECK(parse_table_format("MD") == TableFormat::markdown);
  CHECK(!parse_table_format("tsv").has_value());

  std::vector<McSummary> summaries;
  summaries.push_back(run_cell(Design::d1, 0.25, 50, Estimator::ckt_ate, 3, 2));
  summaries.push_back(run_cell(Design::d1, 0.25, 50, Estimator::vy_infeasible, 3, 2));
  summaries.push_back(run_cell(Design::rc, 0.5, 80, Estimator::rc_dte, 3, 2));
  McOptions fail_opts;
  fail_opts.a_low = 50.0;
  fail_opts.a_high = 60.0;
  summaries.push_back(
      run_cell(Design::d1, 0.25, 40, Estimator::ckt_ate_weighted, 3, 2, fail_opts));

  // CSV output is exactly the long format.
  std::ostringstream expected_csv;
  write_summaries_csv(expected_csv, summaries);
  CHECK(emit_tables(summaries, TableFormat::csv) == expected_csv.str());

  const std::string md = emit_tables(summaries, TableFormat::markdown);
  CHECK(md.find("# Monte Carlo summaries") != std::string::npos);
  CHECK(md.find("## D1") != std::string::npos);
  CHECK(md.find("## RC") != std::string::npos);
  CHECK(md.find("CKT rho=0.25") != std::string::npos);
  CHECK(md.find("VY rho=0.25") != std::string::npos);
  CHECK(md.find("RC rho=0.5") != std::string::npos);
  CHECK(md.find("| 50 | MEAN BIAS |") != std::string::npos);
  CHECK(md.find("| 50 | MAD |") != std::string::npos);
  // The all-failed weighted cell reports nan and triggers the footnote.
  CHECK(md.find("nan") != std::string::npos);
  CHECK(md.find("more than 10% of replications failed") != std::string::npos);
  // The weighted estimator has no n=50 cell, so that column renders empty.
  CHECK(md.find("|  |") != std::string::npos);
  // Values are rendered at four decimal places.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", summaries[0].mean_bias);
  CHECK(md.find(buf) != std::string::npos);
}
