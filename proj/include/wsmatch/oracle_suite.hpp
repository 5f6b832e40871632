#pragma once

// The population identification suite: deterministic checks of the matching
// theory against the closed-form oracles. Check names are grouped by prefix:
//   eq45/       integral-vs-pointwise matching equivalence and separation
//   a4/         distribution match occurs exactly on the index-equality locus
//   derivative/ d h1*/dp recovers the conditional law (necessity direction)
//   rc-that/    closed-form outcome shift t(x,y) recovered from the grid
//   phi0/       counterfactual probability identity for random coefficients
//   cdf/        conditional laws are proper CDFs
//   invert/     multinomial choice probabilities separate distinct indices

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wsmatch {

struct OracleCheck {
  std::string name;
  bool pass = false;
  double observed = 0.0;  // the measured gap/extreme the bound applies to
  std::string note;       // human-readable bound description
};

std::vector<OracleCheck> run_oracle_suite();

// Prints one PASS/FAIL line per check; returns true when all pass.
bool write_suite_report(std::ostream& out, std::span<const OracleCheck> checks);

}  // namespace wsmatch
