#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "wsmatch/dgp.hpp"
#include "wsmatch/events.hpp"
#include "wsmatch/nonparametrics.hpp"

namespace wsmatch {

// Closed-form population counterpart of a design: conditional outcome law
// given the selection error.  The simulation draws U standard normal while
// the identification argument normalizes U uniform; all population integrals
// here run in the uniform scale t with u = Phi^{-1}(t), which keeps [0, p]
// integration limits literal.
struct PopulationModel {
  Design design = Design::d1;
  double rho = 0.0;
  ExampleIndexSpec index_spec{};

  // Index vector v(x, d): d1/d3 {x+0.5d}; d2 {x+0.5d, x+d}; rc {alpha_d +
  // beta_d x, x}; multinomial/roy the two example indices.
  std::vector<double> index_map(double x, int d) const;

  // P(Y <= y | indices v, U = u) for the scalar-outcome designs.  For d2 the
  // scale index can be negative or zero; both signs and the degenerate step
  // are handled.
  double conditional_cdf(double y, std::span<const double> v, double u) const;

  // P(event | X = x, treatment arm d, U = u), covering all event kinds.
  double event_prob(const Event& event, double x, int d, double u) const;
};

// Choice probabilities (labels 0,1,2) of the multinomial design given U = u.
std::array<double, 3> multinomial_choice_probs(const PopulationModel& model, double x, int d,
                                               double u);

// h_d*(x, event, p): integrals of event_prob over the uniform selection
// scale, [0,p] for the treated arm and [p,1] for the untreated one.
// Adaptive quadrature, absolute tolerance 1e-10.
double oracle_h1_star(const PopulationModel& model, double x, const Event& event, double p);
double oracle_h0_star(const PopulationModel& model, double x, const Event& event, double p);

// h_d(x, event, p1, p2) = integral over [p2, p1]; requires 0 <= p2 < p1 <= 1
// (p2 == p1 allowed, giving 0).
double oracle_h1(const PopulationModel& model, double x, const Event& event, double p1,
                 double p2);
double oracle_h0(const PopulationModel& model, double x, const Event& event, double p1,
                 double p2);

struct Eq45Check {
  bool match = false;   // every event/pair gap below 1e-8
  double max_gap = 0.0;
};

// Population matching check between treated-arm x1 and untreated-arm x0: max
// over family events and ordered pairs from p_points of |h1 - h0|.
Eq45Check check_eq4_eq5(const PopulationModel& model, double x1, double x0,
                        const EventFamily& family, std::span<const double> p_points);

// phi0(x, y, p) of the random-coefficient pipeline: the counterfactual
// probability E[1{U>=p} 1{Y_1(untreated coefficients swapped in) <= ...}],
// computable directly; equals h0*(x, t(x,y), p) with t(x,y) = y - 1 - x.
double oracle_phi0_rc(double x, double y, double p, double rho);

struct BruteForceTruth {
  double mean = 0.0;
  double std_error = 0.0;
};

// Plain Monte Carlo of the estimand with D forced to 1: E[Y_1] for d1/d2/d3,
// P(Y_1 <= 1) for rc.  Verification oracle for true_parameter.
BruteForceTruth brute_force_truth(Design design, double rho, std::uint64_t draws,
                                  std::uint64_t seed);

// Exact population HGrid (every cell ok): used to drive the sample-facing
// grid consumers with zero estimation error.
HGrid build_oracle_grid(const PopulationModel& model, std::vector<double> query_xs,
                        const EventFamily& family, std::vector<double> p_points);

// Fixture dump, one row per (x, event, p1 > p2): design,rho,x,event,p1,p2,h1,h0.
void write_oracle_pairs_csv(std::ostream& out, const PopulationModel& model,
                            std::span<const double> xs, const EventFamily& family,
                            std::span<const double> p_points);

}  // namespace wsmatch
