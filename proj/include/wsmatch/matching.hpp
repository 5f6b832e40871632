#pragma once

#include <iosfwd>
#include <limits>

#include "wsmatch/nonparametrics.hpp"

namespace wsmatch {

struct DistanceResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  // Mean of the (studentized, on sample grids) squared cell differences;
  // value is sqrt(objective).  The argmin runs on the objective.
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t cells_used = 0;
  bool comparable = false;  // false when no usable (event, p-pair) cell exists
};

// RMS over events and ordered p-pairs of h1(x1,e,p_i,p_j) - h0(x0,e,p_i,p_j),
// the differences taken from the stored h* grids.  x1 is always the treated
// fingerprint and x0 the untreated one; cells flagged no-data on either side
// are excluded.  On estimated grids each squared difference is studentized by
// its estimated sampling variance, pair_wsq * hbar(1-hbar) summed over the two
// arms, so the expected objective is (noncentrality + 1) rather than
// (signal^2 + cell variance): without the studentization the candidate-side
// variance gradient in x tilts the argmin toward high-density covariate
// regions and dominates the shallow signal valley.  Population grids carry no
// pair_wsq and reduce to the plain mean squared difference.
DistanceResult distance(const HGrid& grid, double x1, double x0, const EstimatorConfig& config);
// Spec-shaped overload; the family must be the grid's own.
DistanceResult distance(const HGrid& grid, double x1, double x0, const EventFamily& family,
                        const EstimatorConfig& config);

struct MatchResult {
  std::size_t target_index = 0;
  double matched_distance = std::numeric_limits<double>::infinity();  // min over donors
  double matched_x = std::numeric_limits<double>::quiet_NaN();  // weight-averaged donor covariate
  double imputed_y = std::numeric_limits<double>::quiet_NaN();
  bool usable = false;
};

// Precomputed pairwise-difference fingerprints for every grid query x:
// f1[k] = h1*(x,e,p_i) - h1*(x,e,p_j) and f0[k] = h0*(x,e,p_j) - h0*(x,e,p_i)
// over ordered pairs p_i > p_j, events fastest.  Built once per estimator run.
struct MatchingContext {
  const HGrid* grid = nullptr;
  EstimatorConfig config;
  std::size_t n_cells = 0;
  std::vector<double> f1, f0;       // [x][cell]
  std::vector<double> v1, v0;       // [x][cell] estimated sampling variances
  std::vector<std::uint8_t> valid;  // [x][cell]

  DistanceResult fingerprint_distance(std::size_t x1_index, std::size_t x0_index) const;
};

MatchingContext make_matching_context(const HGrid& grid, const EstimatorConfig& config);

// Counterfactual for target i (must have d_i = 0) of the canonically ordered
// sample.  Every donor j gets the studentized fingerprint distance delta_j
// between the target's treated arm and the untreated arm at the donor's
// covariate; the imputed value is the local-linear regression of (1-D) Y on
// delta over the donors, kernel-weighted by
// exp(-(obj_j - obj_min) / (2 b^2)) * K((P_j - P_i)/b) with b = n^(-1/5),
// read off at delta = 0 and divided by the known 1 - P_i.  usable = false
// when the target is trimmed out, no donor is comparable, or total weight is
// below the floor.
MatchResult impute_counterfactual(const Sample& canonical, const MatchingContext& context,
                                  std::size_t i);
// Convenience overload matching the op signature; canonicalizes and builds
// the context internally (i indexes the canonical order).
MatchResult impute_counterfactual(const Sample& sample, const HGrid& grid,
                                  const EstimatorConfig& config, std::size_t i);

// Diagnostics CSV: i,x,p,matched_distance,imputed_y,usable.
void write_match_csv(std::ostream& out, const Sample& canonical,
                     std::span<const MatchResult> results);

}  // namespace wsmatch
