#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsmatch/design.hpp"

namespace wsmatch {

// Sector label for the two-sector (roy) design; none elsewhere.
enum class Sector : std::int8_t { none = -1, a = 0, b = 1 };

struct Observation {
  double y = 0.0;            // outcome (category index for multinomial, stored as double)
  Sector w = Sector::none;   // observed sector
  int d = 0;                 // binary treatment
  double x = 0.0;            // covariate
  double z = 0.0;            // instrument
  double p = 0.0;            // propensity P(z)
};

// Latent draws kept as a debug side-channel; never used by estimators and not
// serialized.  Which vectors are populated depends on the design.
struct Latents {
  std::vector<double> u;          // selection error
  std::vector<double> eps;        // outcome error (d1/d2/d3)
  std::vector<double> eta;        // rc: random intercept
  std::vector<double> eps_slope;  // rc: random slope
  std::vector<double> eps_a;      // multinomial/roy: first index error
  std::vector<double> eps_b;      // multinomial/roy: second index error
};

struct Sample {
  DesignSpec spec;
  std::vector<Observation> obs;
  Latents latents;

  std::size_t size() const { return obs.size(); }
};

// Doubles at 17 significant digits (round-trip exact).
std::string format_double(double v);

// Column order y,w,d,x,z,p with a header row; w is empty for designs without
// sectors.
void write_sample_csv(std::ostream& out, const Sample& sample);

// Inverse of write_sample_csv.  The returned sample has no latents, and its
// spec records only the row count (a CSV does not carry design/rho/seed).
Sample read_sample_csv(std::istream& in);

}  // namespace wsmatch
