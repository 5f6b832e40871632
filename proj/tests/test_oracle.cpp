// Population oracle: closed-form cross-checks of the quadrature-based h
// integrals, the matching equivalence, the counterfactual RC probability,
// brute-force verification of the reported targets, and the grid/CSV dumps.
//
// The key identity used throughout: with S, W independent standard normal,
//   integral_0^p Phi((c - rho * Phi^{-1}(t)) / sqrt(1-rho^2)) dt
//     = P(S <= Phi^{-1}(p), rho S + tau W <= c) = Phi2(Phi^{-1}(p), c; rho),
// so every scalar-design h* has a bivariate-normal closed form that exercises
// a completely different code path than the adaptive quadrature.

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wsmatch/normal.hpp"
#include "wsmatch/oracle.hpp"

using namespace wsmatch;

namespace {

double phi2(double a, double b, double rho) { return bivariate_normal_cdf(a, b, rho); }

double zq(double p) { return inverse_normal_cdf(p); }

}  // namespace

TEST_CASE("h-star closed forms, additive design") {
  // rho = 0: the integrand is flat in t, so h1* = p * P(eps <= q).
  PopulationModel flat{Design::d1, 0.0, {}};
  CHECK(oracle_h1_star(flat, 0.0, {EventKind::cdf_leq, 0.5, 0}, 0.5) ==
        doctest::Approx(0.25).epsilon(1e-9));
  CHECK(oracle_h0_star(flat, 0.0, {EventKind::cdf_leq, 0.0, 0}, 0.5) ==
        doctest::Approx(0.25).epsilon(1e-9));

  // rho = 0.5 at the median threshold: Phi2(0, 0; 0.5) = 1/4 + asin(0.5)/(2 pi)
  // = 1/3 exactly.
  PopulationModel m{Design::d1, 0.5, {}};
  CHECK(oracle_h1_star(m, 0.0, {EventKind::cdf_leq, 0.5, 0}, 0.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(oracle_h0_star(m, 0.0, {EventKind::cdf_leq, 0.0, 0}, 0.5) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-9));

  // Generic points: h1*(x, 1{Y <= y}, p) = Phi2(z_p, y - x - 0.5; rho) and
  // h0*(x, 1{Y <= y}, p) = Phi(y - x) - Phi2(z_p, y - x; rho).
  for (double rho : {-0.4, 0.7}) {
    PopulationModel g{Design::d1, rho, {}};
    for (double x : {-0.8, 0.3}) {
      for (double y : {-0.5, 0.9}) {
        for (double p : {0.2, 0.65}) {
          const Event e{EventKind::cdf_leq, y, 0};
          CHECK(oracle_h1_star(g, x, e, p) ==
                doctest::Approx(phi2(zq(p), y - x - 0.5, rho)).epsilon(1e-8));
          CHECK(oracle_h0_star(g, x, e, p) ==
                doctest::Approx(normal_cdf(y - x) - phi2(zq(p), y - x, rho)).epsilon(1e-8));
        }
      }
    }
  }
}

TEST_CASE("h-star closed forms, scaled and squared designs") {
  const double rho = 0.35;
  // d2 treated arm, positive scale x + 1.
  PopulationModel m2{Design::d2, rho, {}};
  {
    const double x = 0.4, y = 0.7, p = 0.6;
    const double q = (y - x - 0.5) / (x + 1.0);
    CHECK(oracle_h1_star(m2, x, {EventKind::cdf_leq, y, 0}, p) ==
          doctest::Approx(phi2(zq(p), q, rho)).epsilon(1e-8));
  }
  // d2 treated arm, negative scale (x < -1 flips the inequality).
  {
    const double x = -2.0, y = 0.3, p = 0.5;
    const double q = (y - (x + 0.5)) / (x + 1.0);
    CHECK(oracle_h1_star(m2, x, {EventKind::cdf_leq, y, 0}, p) ==
          doctest::Approx(p - phi2(zq(p), q, rho)).epsilon(1e-8));
  }
  // d2 untreated arm at x = 0 is degenerate: Y = 0 exactly, so the CDF is a
  // unit step and h0* = (1 - p) 1{0 <= y}.
  CHECK(oracle_h0_star(m2, 0.0, {EventKind::cdf_leq, -0.1, 0}, 0.5) == 0.0);
  CHECK(oracle_h0_star(m2, 0.0, {EventKind::cdf_leq, 0.0, 0}, 0.25) ==
        doctest::Approx(0.75).epsilon(1e-9));

  // d3: P(Y <= y) is a difference of two normal CDFs in the root scale, so
  // h1* is a difference of two bivariate orthant masses.
  PopulationModel m3{Design::d3, rho, {}};
  {
    const double x = -0.3, y = 1.4, p = 0.45, a = x + 0.5, r = std::sqrt(y);
    CHECK(oracle_h1_star(m3, x, {EventKind::cdf_leq, y, 0}, p) ==
          doctest::Approx(phi2(zq(p), r - a, rho) - phi2(zq(p), -r - a, rho)).epsilon(1e-8));
  }
  CHECK(oracle_h1_star(m3, 0.2, {EventKind::cdf_leq, -0.5, 0}, 0.5) == 0.0);
}

TEST_CASE("interval h values") {
  PopulationModel m{Design::d1, 0.5, {}};
  const Event e{EventKind::cdf_leq, 0.2, 0};
  // Additivity over the uniform selection scale.
  const double whole = oracle_h1_star(m, 0.1, e, 0.8);
  const double low = oracle_h1_star(m, 0.1, e, 0.3);
  CHECK(oracle_h1(m, 0.1, e, 0.8, 0.3) == doctest::Approx(whole - low).epsilon(1e-8));
  const double upper = oracle_h0_star(m, 0.1, e, 0.3);
  const double tail = oracle_h0_star(m, 0.1, e, 0.8);
  CHECK(oracle_h0(m, 0.1, e, 0.8, 0.3) == doctest::Approx(upper - tail).epsilon(1e-8));
  // Zero-width interval and ordering contract.
  CHECK(oracle_h1(m, 0.1, e, 0.4, 0.4) == 0.0);
  CHECK_THROWS_AS(oracle_h1(m, 0.1, e, 0.3, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(oracle_h1_star(m, 0.1, e, 1.5), std::invalid_argument);
}

TEST_CASE("multinomial choice probabilities") {
  PopulationModel m{Design::multinomial, 0.0, {}};
  m.index_spec.mn_x[0] = m.index_spec.mn_x[1] = 0.0;
  m.index_spec.mn_d[0] = m.index_spec.mn_d[1] = 0.0;
  // All indices zero, rho = 0: utilities (0, e1, e2) with e1, e2 independent
  // standard normal; P(0) = 1/4 and the rest splits evenly.
  const auto probs = multinomial_choice_probs(m, 0.7, 1, -0.3);
  CHECK(probs[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(probs[2] == doctest::Approx(0.375).epsilon(1e-12));

  // Default indices: closed form for choice 0 and the sum-to-one identity.
  PopulationModel d{Design::multinomial, 0.4, {}};
  const double tau = std::sqrt(1.0 - 0.4 * 0.4);
  for (double x : {-0.6, 0.8}) {
    for (int arm : {0, 1}) {
      for (double u : {-1.1, 0.5}) {
        const auto v = d.index_map(x, arm);
        const auto q = multinomial_choice_probs(d, x, arm, u);
        const double p0 =
            normal_cdf((-v[0] - 0.4 * u) / tau) * normal_cdf((-v[1] - 0.4 * u) / tau);
        CHECK(q[0] == doctest::Approx(p0).epsilon(1e-10));
        CHECK(q[0] + q[1] + q[2] == doctest::Approx(1.0).epsilon(1e-10));
        for (int j = 0; j < 3; ++j) {
          CHECK(d.event_prob({EventKind::category, 0.0, j}, x, arm, u) ==
                doctest::Approx(q[static_cast<std::size_t>(j)]).epsilon(1e-12));
          CHECK(q[static_cast<std::size_t>(j)] >= 0.0);
        }
      }
    }
  }
  CHECK_THROWS_AS(multinomial_choice_probs({Design::d1, 0.0, {}}, 0.0, 1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("two-sector event probabilities") {
  PopulationModel m{Design::roy, 0.3, {}};
  const double tau = std::sqrt(1.0 - 0.3 * 0.3);
  const double root2 = std::sqrt(2.0);
  for (double x : {-0.5, 0.9}) {
    for (int arm : {0, 1}) {
      const auto v = m.index_map(x, arm);
      const double gap = (v[0] - v[1]) / (root2 * tau);
      // Both sector shocks share the rho*u location, so sector membership is
      // independent of u.
      for (double u : {-0.7, 1.2}) {
        CHECK(m.event_prob({EventKind::sector_a, 0.0, 0}, x, arm, u) ==
              doctest::Approx(normal_cdf(gap)).epsilon(1e-12));
        const double y = 0.6;
        const double astar = (y - v[0] - 0.3 * u) / tau;
        CHECK(m.event_prob({EventKind::sector_leq, y, 0}, x, arm, u) ==
              doctest::Approx(phi2(astar, gap, -1.0 / root2)).epsilon(1e-10));
      }
      // The joint event is dominated by its marginal pieces.
      const double joint = m.event_prob({EventKind::sector_leq, 0.6, 0}, x, arm, 0.2);
      CHECK(joint <= m.event_prob({EventKind::sector_a, 0.0, 0}, x, arm, 0.2) + 1e-12);
      CHECK(joint >= 0.0);
    }
  }
}

TEST_CASE("matching equivalence check") {
  const EventFamily family = make_cdf_family({-0.5, 0.0, 0.5, 1.0});
  const std::vector<double> ps{0.3, 0.5, 0.8};
  // Additive design: treated index at x equals untreated index at x + 0.5.
  PopulationModel m1{Design::d1, 0.25, {}};
  const Eq45Check hit = check_eq4_eq5(m1, 0.2, 0.7, family, ps);
  CHECK(hit.match);
  CHECK(hit.max_gap < 1e-8);
  const Eq45Check miss = check_eq4_eq5(m1, 0.2, 0.6, family, ps);
  CHECK(!miss.match);
  CHECK(miss.max_gap > 1e-3);
  // Scaled design: treated indices (x + 0.5, x + 1) can never equal the
  // untreated pair (t, t), so no untreated covariate reproduces the treated
  // conditional law.
  PopulationModel m2{Design::d2, 0.25, {}};
  for (double x0 : {0.0, 0.5, 1.0}) {
    const Eq45Check d2c = check_eq4_eq5(m2, 0.0, x0, family, ps);
    CHECK(!d2c.match);
  }
}

TEST_CASE("counterfactual probability for the random-coefficient design") {
  // Treated and untreated outcomes share the slope loading x, so the treated
  // law at y maps to the untreated law at y - 1 - x; integrating the
  // untreated conditional CDF over [p, 1] has the closed form
  //   Phi(mhat) - Phi2(z_p, mhat; rho / sqrt(1 + x^2)),
  // with mhat = (y - 1 - 2x) / sqrt(1 + x^2).
  CHECK(oracle_phi0_rc(0.0, 1.0, 0.5, 0.0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(oracle_phi0_rc(0.0, 1.0, 0.5, 0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  for (double rho : {-0.3, 0.6}) {
    for (double x : {-0.7, 0.0, 0.4}) {
      for (double y : {0.3, 1.0, 1.8}) {
        for (double p : {0.15, 0.5, 0.85}) {
          const double scale = std::sqrt(1.0 + x * x);
          const double mhat = (y - 1.0 - 2.0 * x) / scale;
          const double expect = normal_cdf(mhat) - phi2(zq(p), mhat, rho / scale);
          CHECK(oracle_phi0_rc(x, y, p, rho) == doctest::Approx(expect).epsilon(1e-8));
        }
      }
    }
  }
  CHECK_THROWS_AS(oracle_phi0_rc(0.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(oracle_phi0_rc(0.0, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("brute-force targets agree with the reported parameters") {
  const std::uint64_t draws = 2000000;
  std::uint64_t seed = 90210;
  for (Design design : {Design::d1, Design::d2, Design::d3, Design::rc}) {
    for (double rho : {0.0, 0.6}) {
      const BruteForceTruth t = brute_force_truth(design, rho, draws, ++seed);
      CHECK(t.std_error > 0.0);
      CHECK(std::fabs(t.mean - true_parameter(design)) < 3.0 * t.std_error);
    }
  }
  CHECK_THROWS_AS(brute_force_truth(Design::d1, 0.0, 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_truth(Design::multinomial, 0.0, draws, 1), std::invalid_argument);
}

TEST_CASE("population grid matches pointwise oracle calls") {
  PopulationModel m{Design::d1, 0.25, {}};
  const EventFamily family = make_cdf_family({0.0, 0.5});
  const std::vector<double> xs{-0.5, 0.0, 0.5};
  const std::vector<double> ps{0.25, 0.5, 0.75};
  const HGrid grid = build_oracle_grid(m, xs, family, ps);
  REQUIRE(grid.query_xs == xs);
  REQUIRE(grid.p_points == ps);
  REQUIRE(grid.n_events() == 2);
  const auto events = family.events();
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    CHECK(grid.x_index(xs[xi]) == xi);
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      CHECK(grid.cell_ok(xi, pi));
      for (std::size_t ei = 0; ei < events.size(); ++ei) {
        CHECK(grid.h1_star(xi, ei, pi) ==
              doctest::Approx(oracle_h1_star(m, xs[xi], events[ei], ps[pi])).epsilon(1e-10));
        CHECK(grid.h0_star(xi, ei, pi) ==
              doctest::Approx(oracle_h0_star(m, xs[xi], events[ei], ps[pi])).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("oracle pair dump") {
  PopulationModel m{Design::d1, 0.25, {}};
  const EventFamily family = make_cdf_family({0.0, 0.5});
  const std::vector<double> xs{0.0, 0.4};
  const std::vector<double> ps{0.25, 0.5, 0.75};
  std::ostringstream out;
  write_oracle_pairs_csv(out, m, xs, family, ps);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "design,rho,x,event,p1,p2,h1,h0");
  std::size_t rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  // 2 covariates x 2 events x 3 ordered pairs of propensity points.
  CHECK(rows == 12);
  REQUIRE(first.substr(0, 3) == "D1,");
  // The h1 field of the first row reproduces the direct oracle call.
  std::vector<std::string> fields;
  std::istringstream fs(first);
  std::string field;
  while (std::getline(fs, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 8);
  const double p1 = std::stod(fields[4]);
  const double p2 = std::stod(fields[5]);
  CHECK(std::stod(fields[6]) ==
        doctest::Approx(oracle_h1(m, std::stod(fields[2]), {EventKind::cdf_leq,
                                                            std::stod(fields[3].substr(4)), 0},
                                  p1, p2))
            .epsilon(1e-12));
}
