// Kernel machinery: canonical ordering, Nadaraya-Watson hand values, grid
// construction against pointwise estimates, isotonic cleanup, grid axes, and
// the CSV dump.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wsmatch/dgp.hpp"
#include "wsmatch/isotonic.hpp"
#include "wsmatch/nonparametrics.hpp"
#include "wsmatch/normal.hpp"
#include "wsmatch/oracle.hpp"

using namespace wsmatch;

namespace {

Sample reversed(const Sample& s) {
  Sample out = s;
  std::reverse(out.obs.begin(), out.obs.end());
  const auto rev = [](std::vector<double>& v) { std::reverse(v.begin(), v.end()); };
  rev(out.latents.u);
  rev(out.latents.eps);
  rev(out.latents.eta);
  rev(out.latents.eps_slope);
  rev(out.latents.eps_a);
  rev(out.latents.eps_b);
  return out;
}

}  // namespace

TEST_CASE("estimator configuration") {
  EstimatorConfig config;
  config.validate();
  // 32^(-1/5) = 0.5 exactly.
  CHECK(config.bandwidth(32) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(config.bandwidth(1) == 1.0);
  CHECK(config.in_band(0.05));
  CHECK(config.in_band(0.95));
  CHECK(!config.in_band(0.0499));
  CHECK(!config.in_band(0.9501));

  EstimatorConfig bad = config;
  bad.bandwidth_exponent = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.trim_c0 = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.y_grid_divisor = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.p_grid_points = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.weight_floor = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(config.bandwidth(0), std::invalid_argument);
}

TEST_CASE("canonical ordering is a sorted permutation") {
  const Sample s = generate({Design::d1, 0.5, 200, 21});
  const Sample c = canonical_sample(s);
  REQUIRE(c.size() == s.size());
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK(c.obs[i - 1].y <= c.obs[i].y);
  }
  // Latents ride along with their rows: the d1 outcome identity must still
  // hold pointwise after the permutation.
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Observation& o = c.obs[i];
    CHECK(o.y == o.x + 0.5 * o.d + c.latents.eps[i]);
  }
  // Same multiset in, bitwise-identical ordering out.
  const Sample c2 = canonical_sample(reversed(s));
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.obs[i].y == c2.obs[i].y);
    CHECK(c.obs[i].x == c2.obs[i].x);
    CHECK(c.obs[i].z == c2.obs[i].z);
    CHECK(c.latents.u[i] == c2.latents.u[i]);
  }
}

TEST_CASE("kernel regression hand values") {
  // Two points, unit bandwidth, query on the first: weights 1 and e^{-1/2}.
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> p{0.0, 0.0};
  const std::vector<double> r{0.0, 1.0};
  const NwResult two = nw_regress(x, p, r, 0.0, 0.0, 1.0, 1e-12);
  REQUIRE(two.ok);
  const double w1 = std::exp(-0.5);
  CHECK(two.value == doctest::Approx(w1 / (1.0 + w1)).epsilon(1e-15));

  // A constant response is reproduced at any query point.
  const std::vector<double> rc{0.7, 0.7};
  const NwResult flat = nw_regress(x, p, rc, 0.4, -0.3, 0.8, 1e-12);
  REQUIRE(flat.ok);
  CHECK(flat.value == doctest::Approx(0.7).epsilon(1e-15));

  // Single observation: the regression interpolates it.
  const std::vector<double> x1{0.3}, p1{0.6}, r1{-2.5};
  const NwResult one = nw_regress(x1, p1, r1, 0.0, 0.5, 0.5, 1e-12);
  REQUIRE(one.ok);
  CHECK(one.value == doctest::Approx(-2.5).epsilon(1e-15));

  // Far query: kernel mass underflows past the floor.
  const NwResult far = nw_regress(x, p, r, 100.0, 0.0, 0.1, 1e-12);
  CHECK(!far.ok);
  CHECK(far.value == 0.0);

  const std::vector<double> shorter{0.0};
  CHECK_THROWS_AS(nw_regress(shorter, p, r, 0.0, 0.0, 1.0, 1e-12), std::invalid_argument);
  CHECK_THROWS_AS(nw_regress(x, p, r, 0.0, 0.0, 0.0, 1e-12), std::invalid_argument);
}

TEST_CASE("pointwise h-star estimates approach the population values") {
  // h1*(0, 0.5, 0.5) = Phi2(0, 0; 0.5) = 1/3 and h0*(0, 0, 0.5) = 1/6 for the
  // additive design at rho = 0.5.  n = 20000 gives bandwidth ~ 0.138, so the
  // smoothing bias (~b^2) plus noise stays well inside 0.04.
  const Sample s = generate({Design::d1, 0.5, 20000, 3});
  const EstimatorConfig config;
  const NwResult h1 = estimate_h1_star(s, config, 0.0, 0.5, 0.5);
  REQUIRE(h1.ok);
  CHECK(h1.value == doctest::Approx(1.0 / 3.0).epsilon(0.12));
  const NwResult h0 = estimate_h0_star(s, config, 0.0, 0.0, 0.5);
  REQUIRE(h0.ok);
  CHECK(h0.value == doctest::Approx(1.0 / 6.0).epsilon(0.24));
  CHECK(std::fabs(h1.value - 1.0 / 3.0) < 0.04);
  CHECK(std::fabs(h0.value - 1.0 / 6.0) < 0.04);
}

TEST_CASE("raw grid fill equals pointwise regressions") {
  const Sample s = generate({Design::d1, 0.25, 500, 11});
  EstimatorConfig config;
  config.p_grid_points = 4;
  const EventFamily family = make_cdf_family({-1.0, 0.0, 1.0});
  const std::vector<double> xs{-0.5, 0.3};
  const HGrid grid = build_h_grid(s, config, xs, family, /*isotonic_cleanup=*/false);
  REQUIRE(grid.query_xs == xs);
  REQUIRE(grid.n_events() == 3);
  REQUIRE(grid.p_points.size() == 4);
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    for (std::size_t pi = 0; pi < grid.p_points.size(); ++pi) {
      REQUIRE(grid.cell_ok(xi, pi));
      for (std::size_t ei = 0; ei < grid.n_events(); ++ei) {
        const double y = grid.events[ei].y;
        const NwResult h1 = estimate_h1_star(s, config, xs[xi], y, grid.p_points[pi]);
        const NwResult h0 = estimate_h0_star(s, config, xs[xi], y, grid.p_points[pi]);
        REQUIRE(h1.ok);
        CHECK(grid.h1_star(xi, ei, pi) == doctest::Approx(h1.value).epsilon(1e-12));
        CHECK(grid.h0_star(xi, ei, pi) == doctest::Approx(h0.value).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("grid construction is sample-order invariant") {
  const Sample s = generate({Design::d2, 0.5, 400, 5});
  EstimatorConfig config;
  config.p_grid_points = 5;
  const std::vector<double> xs{-0.4, 0.0, 0.4};
  const HGrid a = build_h_grid(s, config, xs);
  const HGrid b = build_h_grid(reversed(s), config, xs);
  REQUIRE(a.h1.size() == b.h1.size());
  for (std::size_t k = 0; k < a.h1.size(); ++k) {
    CHECK(a.h1[k] == b.h1[k]);
    CHECK(a.h0[k] == b.h0[k]);
  }
  CHECK(a.ok == b.ok);
}

TEST_CASE("isotonic cleanup projects each column") {
  const Sample s = generate({Design::d3, 0.5, 300, 9});
  EstimatorConfig config;
  config.p_grid_points = 3;
  const EventFamily family = make_cdf_family({0.0, 0.5, 1.0, 2.0, 4.0});
  const std::vector<double> xs{0.0, 0.6};
  const HGrid raw = build_h_grid(s, config, xs, family, false);
  const HGrid clean = build_h_grid(s, config, xs, family, true);
  std::vector<double> column(family.y_points.size());
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    for (std::size_t pi = 0; pi < clean.p_points.size(); ++pi) {
      REQUIRE(clean.cell_ok(xi, pi));
      for (std::size_t ei = 1; ei < clean.n_events(); ++ei) {
        CHECK(clean.h1_star(xi, ei, pi) >= clean.h1_star(xi, ei - 1, pi));
        CHECK(clean.h0_star(xi, ei, pi) >= clean.h0_star(xi, ei - 1, pi));
      }
      for (std::size_t ei = 0; ei < clean.n_events(); ++ei) {
        CHECK(clean.h1_star(xi, ei, pi) >= 0.0);
        CHECK(clean.h1_star(xi, ei, pi) <= 1.0);
        // The cleaned column is the monotone projection of the raw one.
        column[ei] = raw.h1_star(xi, ei, pi);
      }
      isotonic_nondecreasing(column);
      for (std::size_t ei = 0; ei < clean.n_events(); ++ei) {
        CHECK(clean.h1_star(xi, ei, pi) == doctest::Approx(column[ei]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("grid axes") {
  EstimatorConfig config;
  const std::vector<double> ps = make_p_points(config);
  REQUIRE(ps.size() == 10);
  CHECK(ps.front() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(ps.back() == doctest::Approx(0.95).epsilon(1e-15));
  for (std::size_t i = 1; i < ps.size(); ++i) {
    CHECK(ps[i] - ps[i - 1] == doctest::Approx(0.9 / 9.0).epsilon(1e-12));
  }

  const Sample tiny = generate({Design::d1, 0.0, 100, 2});
  CHECK(make_y_points(tiny, config).size() == 2);
  const Sample mid = generate({Design::d1, 0.0, 401, 2});
  const std::vector<double> ys = make_y_points(mid, config);
  CHECK(ys.size() == 9);
  double lo = mid.obs[0].y, hi = mid.obs[0].y;
  for (const Observation& o : mid.obs) {
    lo = std::min(lo, o.y);
    hi = std::max(hi, o.y);
  }
  CHECK(ys.front() == lo);
  CHECK(ys.back() == doctest::Approx(hi).epsilon(1e-15));

  const HGrid grid = build_h_grid(tiny, config, {0.0, 1.0});
  CHECK(grid.x_index(1.0) == 1);
  CHECK_THROWS_AS(grid.x_index(0.5), std::out_of_range);
}

TEST_CASE("grid csv dump") {
  const Sample s = generate({Design::d1, 0.0, 120, 4});
  EstimatorConfig config;
  config.p_grid_points = 3;
  const EventFamily family = make_cdf_family({0.0});
  // A query far outside the covariate range underflows every kernel weight,
  // so that column stays flagged and prints nan.
  const HGrid grid = build_h_grid(s, config, {0.0, 60.0}, family, true);
  CHECK(grid.cell_ok(0, 1));
  CHECK(!grid.cell_ok(1, 1));
  CHECK(std::isnan(grid.h1_star(1, 0, 1)));
  std::ostringstream out;
  write_hgrid_csv(out, grid);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "x,y,p,h1star,h0star");
  std::size_t rows = 0;
  bool saw_nan = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find("nan") != std::string::npos) saw_nan = true;
  }
  CHECK(rows == 2 * 1 * 3);
  CHECK(saw_nan);
}
