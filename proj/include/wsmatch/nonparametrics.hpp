#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "wsmatch/events.hpp"
#include "wsmatch/sample.hpp"

namespace wsmatch {

struct EstimatorConfig {
  double bandwidth_exponent = -0.2;  // b = n^bandwidth_exponent, both regressors
  double trim_c0 = 0.05;             // propensity kept inside [c0, 1-c0]
  std::size_t y_grid_divisor = 10;   // ceil(n / divisor) y grid points, min 2
  std::size_t p_grid_points = 10;    // evenly spaced across the trimmed band
  double weight_floor = 1e-12;       // kernel mass below this => no-data cell

  void validate() const;
  double bandwidth(std::size_t n) const;
  bool in_band(double p) const { return p >= trim_c0 && p <= 1.0 - trim_c0; }
};

// Estimators sort the sample into this order before touching it, so that
// every kernel sum is accumulated in a sample-relabeling-invariant sequence
// (duplicated rows compare equal and any order of equals yields the same
// sums).  y is the primary key, which also makes CDF-type responses prefix
// sums.
Sample canonical_sample(const Sample& sample);

struct NwResult {
  double value = 0.0;
  bool ok = false;  // false when local kernel mass fell below the floor
};

// Nadaraya-Watson regression of response on (x, p) with a product Gaussian
// kernel and one common bandwidth.  Sums run in the order given.
NwResult nw_regress(std::span<const double> x, std::span<const double> p,
                    std::span<const double> response, double x0, double p0, double bandwidth,
                    double weight_floor);

// h1*(x, y, p) = E[D 1{Y<=y} | X=x, P=p] and h0*(x, y, p) = E[(1-D) 1{Y<=y} | X=x, P=p],
// estimated on the full sample and clipped to [0, 1].
NwResult estimate_h1_star(const Sample& sample, const EstimatorConfig& config, double x,
                          double y, double p);
NwResult estimate_h0_star(const Sample& sample, const EstimatorConfig& config, double x,
                          double y, double p);

// Kernel estimates of h1* and h0* for every (query x, event, grid p), stored
// flat as [x][event][p].  A cell's ok flag is shared by both arms: it records
// whether the (x, p) kernel mass cleared the floor.  Values in flagged cells
// are NaN on purpose.
struct HGrid {
  EventFamily family;
  std::vector<Event> events;
  std::vector<double> query_xs;  // ascending, unique
  std::vector<double> p_points;  // ascending
  std::vector<double> h1, h0;
  std::vector<std::uint8_t> ok;  // [x][p]
  // Sampling-noise bookkeeping for the matching distance: for each query x
  // and ordered p-pair (p_i > p_j; i-major, j inner), the sum over sample
  // points k of (w_k(p_i)/D_i - w_k(p_j)/D_j)^2, where w_k are the product
  // kernel weights and D the cell denominators.  The variance of an estimated
  // fingerprint difference is then pair_wsq * Var(response); empty (for
  // population grids) means exactly zero noise.
  std::vector<double> pair_wsq;  // [x][pair]

  std::size_t n_events() const { return events.size(); }
  std::size_t n_p_pairs() const { return p_points.size() * (p_points.size() - 1) / 2; }
  std::size_t idx(std::size_t xi, std::size_t ei, std::size_t pi) const {
    return (xi * events.size() + ei) * p_points.size() + pi;
  }
  double h1_star(std::size_t xi, std::size_t ei, std::size_t pi) const { return h1[idx(xi, ei, pi)]; }
  double h0_star(std::size_t xi, std::size_t ei, std::size_t pi) const { return h0[idx(xi, ei, pi)]; }
  bool cell_ok(std::size_t xi, std::size_t pi) const { return ok[xi * p_points.size() + pi] != 0; }
  // Zero for population grids (no pair_wsq stored).
  double pair_weight_sq(std::size_t xi, std::size_t pair) const {
    return pair_wsq.empty() ? 0.0 : pair_wsq[xi * n_p_pairs() + pair];
  }

  // Exact-match lookup of a query x; throws std::out_of_range if absent.
  std::size_t x_index(double x) const;
};

// Evenly spaced p grid across [c0, 1-c0], endpoints included.
std::vector<double> make_p_points(const EstimatorConfig& config);
// Evenly spaced y grid spanning the sample outcome range, ceil(n/divisor)
// points but never fewer than 2.
std::vector<double> make_y_points(const Sample& sample, const EstimatorConfig& config);

// Grid build over the sample's own CDF event family (make_y_points), or over
// an explicit family.  After the raw fill each (x, p) column gets an isotonic
// cleanup along the family's monotone y run and a clip to [0, 1];
// isotonic_cleanup = false skips that step (used to validate the raw fill
// against nw_regress).
HGrid build_h_grid(const Sample& sample, const EstimatorConfig& config,
                   std::vector<double> query_xs);
HGrid build_h_grid(const Sample& sample, const EstimatorConfig& config,
                   std::vector<double> query_xs, const EventFamily& family,
                   bool isotonic_cleanup = true);

// Columns x,y,p,h1star,h0star; one row per grid cell.  The y column carries
// the event threshold (category label for category events, inf for the plain
// sector event); flagged cells print nan.
void write_hgrid_csv(std::ostream& out, const HGrid& grid);

}  // namespace wsmatch
