#pragma once

#include "wsmatch/sample.hpp"

namespace wsmatch {

// rc design: Y_d = alpha_d + eta + X * (beta_d + eps_slope).
inline constexpr double kRcAlpha0 = 0.0;
inline constexpr double kRcAlpha1 = 1.0;
inline constexpr double kRcBeta0 = 1.0;
inline constexpr double kRcBeta1 = 2.0;

// Index coefficients for the discrete-outcome example designs.  Choice j of
// the multinomial design has utility mn_x[j-1]*x + mn_d[j-1]*d + e_j (choice 0
// pinned at utility 0); the two-sector design has latent outcomes
// v_s(x,d) + e_s with v_a = a_x*x + a_d*d, v_b = b_x*x + b_d*d.
struct ExampleIndexSpec {
  double mn_x[2] = {1.0, 0.5};
  double mn_d[2] = {0.5, 1.0};
  double roy_a_x = 1.0, roy_a_d = 0.5;
  double roy_b_x = 0.5, roy_b_d = 1.0;
};

// P(D = 1 | Z = z) = Phi(z).  Throws std::invalid_argument on non-finite z.
double propensity(double z);

// Population value of the reported estimand: E[Y_1] for d1/d2/d3 and the
// distributional effect P(Y_1 <= 1) for rc.  Throws for the example designs,
// which have no scalar target.
double true_parameter(Design design);

// Draw a sample.  Per observation the stream is consumed in a fixed,
// documented order (x, z, u, then design-specific shocks), so estimators and
// tests can rely on bit-reproducibility given spec.seed.
Sample generate(const DesignSpec& spec);
Sample generate_example(const DesignSpec& spec, const ExampleIndexSpec& index);

}  // namespace wsmatch
