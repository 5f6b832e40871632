#include "wsmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace wsmatch {

namespace {

// Ordered p-pairs (p_i > p_j), i-major then j, events fastest within a pair;
// the fixed order keeps every accumulation deterministic.
std::size_t pair_count(std::size_t np) { return np * (np - 1) / 2; }

}  // namespace

namespace {

// Studentized squared cell difference.  On population grids both variances
// are identically zero and the plain squared difference survives; on sample
// grids den == 0 forces both h levels (hence d) to zero, so the branch never
// loses signal.
double cell_objective(double d, double v_target, double v_candidate) {
  const double den = v_target + v_candidate;
  return den > 0.0 ? d * d / den : d * d;
}

// Solves the leading rank x rank block of symmetric normal equations for two
// right-hand sides and reports the two intercepts (coefficients on the
// constant regressor).  Returns false when the block is numerically singular,
// leaving the outputs untouched.
bool solve_intercepts(const double m[4][4], const double ry[4], const double rx[4], int rank,
                      double& intercept_y, double& intercept_x) {
  double a[4][6];
  double scale = 0.0;
  for (int r = 0; r < rank; ++r) {
    for (int c = 0; c < rank; ++c) a[r][c] = m[r][c];
    a[r][rank] = ry[r];
    a[r][rank + 1] = rx[r];
    scale = std::max(scale, std::abs(m[r][r]));
  }
  const double tol = 1e-9 * scale;
  for (int col = 0; col < rank; ++col) {
    int piv = col;
    for (int r = col + 1; r < rank; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (!(std::abs(a[piv][col]) > tol)) return false;
    if (piv != col) {
      for (int c = 0; c < rank + 2; ++c) std::swap(a[piv][c], a[col][c]);
    }
    for (int r = 0; r < rank; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < rank + 2; ++c) a[r][c] -= f * a[col][c];
    }
  }
  const double iy = a[0][rank] / a[0][0];
  const double ix = a[0][rank + 1] / a[0][0];
  if (!std::isfinite(iy) || !std::isfinite(ix)) return false;
  intercept_y = iy;
  intercept_x = ix;
  return true;
}

}  // namespace

DistanceResult MatchingContext::fingerprint_distance(std::size_t x1_index,
                                                     std::size_t x0_index) const {
  const double* a = f1.data() + x1_index * n_cells;
  const double* b = f0.data() + x0_index * n_cells;
  const double* na = v1.data() + x1_index * n_cells;
  const double* nb = v0.data() + x0_index * n_cells;
  const std::uint8_t* va = valid.data() + x1_index * n_cells;
  const std::uint8_t* vb = valid.data() + x0_index * n_cells;
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < n_cells; ++k) {
    if (va[k] & vb[k]) {
      acc += cell_objective(a[k] - b[k], na[k], nb[k]);
      ++used;
    }
  }
  if (used == 0) return {};
  DistanceResult out;
  out.objective = acc / static_cast<double>(used);
  out.value = std::sqrt(std::max(0.0, out.objective));
  out.cells_used = used;
  out.comparable = true;
  return out;
}

namespace {

// Plug-in Bernoulli variance factor for a fingerprint cell: the response
// level is taken as the mean of the two h values entering the difference.
double cell_variance(double wsq, double h_at_i, double h_at_j) {
  const double m = std::clamp(0.5 * (h_at_i + h_at_j), 0.0, 1.0);
  return wsq * m * (1.0 - m);
}

}  // namespace

MatchingContext make_matching_context(const HGrid& grid, const EstimatorConfig& config) {
  config.validate();
  MatchingContext ctx;
  ctx.grid = &grid;
  ctx.config = config;
  const std::size_t np = grid.p_points.size();
  const std::size_t ne = grid.n_events();
  const std::size_t nx = grid.query_xs.size();
  ctx.n_cells = pair_count(np) * ne;
  ctx.f1.assign(nx * ctx.n_cells, 0.0);
  ctx.f0.assign(nx * ctx.n_cells, 0.0);
  ctx.v1.assign(nx * ctx.n_cells, 0.0);
  ctx.v0.assign(nx * ctx.n_cells, 0.0);
  ctx.valid.assign(nx * ctx.n_cells, 0);
  for (std::size_t xi = 0; xi < nx; ++xi) {
    std::size_t k = xi * ctx.n_cells;
    std::size_t pk = 0;
    for (std::size_t i = 1; i < np; ++i) {
      for (std::size_t j = 0; j < i; ++j, ++pk) {
        const bool ok = grid.cell_ok(xi, i) && grid.cell_ok(xi, j);
        const double wsq = ok ? grid.pair_weight_sq(xi, pk) : 0.0;
        for (std::size_t e = 0; e < ne; ++e, ++k) {
          if (!ok) continue;
          const double h1i = grid.h1_star(xi, e, i), h1j = grid.h1_star(xi, e, j);
          const double h0i = grid.h0_star(xi, e, i), h0j = grid.h0_star(xi, e, j);
          ctx.f1[k] = h1i - h1j;
          ctx.f0[k] = h0j - h0i;
          ctx.v1[k] = cell_variance(wsq, h1i, h1j);
          ctx.v0[k] = cell_variance(wsq, h0i, h0j);
          ctx.valid[k] = 1;
        }
      }
    }
  }
  return ctx;
}

DistanceResult distance(const HGrid& grid, double x1, double x0, const EstimatorConfig& config) {
  const std::size_t i1 = grid.x_index(x1);
  const std::size_t i0 = grid.x_index(x0);
  const std::size_t np = grid.p_points.size();
  const std::size_t ne = grid.n_events();
  double acc = 0.0;
  std::size_t used = 0;
  std::size_t pk = 0;
  for (std::size_t i = 1; i < np; ++i) {
    for (std::size_t j = 0; j < i; ++j, ++pk) {
      if (!(grid.cell_ok(i1, i) && grid.cell_ok(i1, j) && grid.cell_ok(i0, i) &&
            grid.cell_ok(i0, j))) {
        continue;
      }
      const double wsq1 = grid.pair_weight_sq(i1, pk);
      const double wsq0 = grid.pair_weight_sq(i0, pk);
      for (std::size_t e = 0; e < ne; ++e) {
        const double h1i = grid.h1_star(i1, e, i), h1j = grid.h1_star(i1, e, j);
        const double h0i = grid.h0_star(i0, e, i), h0j = grid.h0_star(i0, e, j);
        const double d = (h1i - h1j) - (h0j - h0i);
        acc += cell_objective(d, cell_variance(wsq1, h1i, h1j), cell_variance(wsq0, h0i, h0j));
        ++used;
      }
    }
  }
  (void)config;
  if (used == 0) return {};
  DistanceResult out;
  out.objective = acc / static_cast<double>(used);
  out.value = std::sqrt(std::max(0.0, out.objective));
  out.cells_used = used;
  out.comparable = true;
  return out;
}

DistanceResult distance(const HGrid& grid, double x1, double x0, const EventFamily& family,
                        const EstimatorConfig& config) {
  if (family.kind != grid.family.kind || family.events().size() != grid.n_events()) {
    throw std::invalid_argument("distance: family does not match the grid");
  }
  return distance(grid, x1, x0, config);
}

MatchResult impute_counterfactual(const Sample& canonical, const MatchingContext& context,
                                  std::size_t i) {
  const std::size_t n = canonical.size();
  if (i >= n) throw std::invalid_argument("impute_counterfactual: index out of range");
  if (canonical.obs[i].d != 0) {
    throw std::invalid_argument("impute_counterfactual: target must have d = 0");
  }
  MatchResult result;
  result.target_index = i;
  const EstimatorConfig& config = context.config;
  if (!config.in_band(canonical.obs[i].p)) return result;  // trimmed out

  const HGrid& grid = *context.grid;
  const std::size_t xi_target = grid.x_index(canonical.obs[i].x);
  const double b_p = config.bandwidth(n);
  const double b_delta_sq = 4.0 * b_p * b_p;

  // Match objectives: the studentized fingerprint distance between the
  // target's treated arm and every donor covariate's untreated arm.  Treated
  // observations also act as donors -- their covariate still carries an
  // untreated-arm fingerprint.  The minimum over donors is the per-target
  // noise floor; only the excess over it carries information about the match
  // locus.
  std::vector<std::size_t> donor_idx;
  std::vector<double> donor_obj;
  donor_idx.reserve(n);
  donor_obj.reserve(n);
  double obj_min = std::numeric_limits<double>::infinity();
  double value_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const DistanceResult d =
        context.fingerprint_distance(xi_target, grid.x_index(canonical.obs[j].x));
    if (!d.comparable || !std::isfinite(d.objective)) continue;
    donor_idx.push_back(j);
    donor_obj.push_back(d.objective);
    if (d.objective < obj_min) {
      obj_min = d.objective;
      value_min = d.value;
    }
  }
  if (donor_idx.empty()) return result;
  result.matched_distance = value_min;

  // Imputation step.  The counterfactual mean E[Y | D=0, match, P=p] equals
  // E[(1-D) Y | match, P=p] / (1-p) with the propensity known, and the
  // numerator is smooth and bounded in p even where untreated donors thin out
  // (large p), so it is what gets smoothed: a local-linear regression of
  // (1-D) Y on the excess match distance delta = sqrt(obj - obj_min) over all
  // donors, kernel-weighted in (delta, P), read off at (0, P_i), then divided
  // by the known 1 - P_i.  Regressing on delta over every near-locus donor
  // instead of promoting a single argmin keeps the sampling noise in the
  // individual fingerprints from steering the match; the linear term removes
  // the boundary attenuation at delta = 0, where donor density is one-sided
  // and usually asymmetric around the match locus.
  // Weighted least squares of the responses on (1, delta, p - P_i,
  // (p - P_i)^2).  The linear p term removes the kernel-edge tilt near
  // p = 0 and p = 1, which the known-propensity division would otherwise
  // amplify; the quadratic term removes the curvature bias of the smoothed
  // numerator, whose p-profile bends sharply wherever selection on
  // unobservables is active.  Regressors are standardized by their kernel
  // bandwidths so the normal equations stay well conditioned.
  const double b_delta = std::sqrt(b_delta_sq);
  double m[4][4] = {};
  double ry[4] = {}, rx[4] = {};
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  const double p_i = canonical.obs[i].p;
  for (std::size_t k = 0; k < donor_idx.size(); ++k) {
    const std::size_t j = donor_idx[k];
    const bool untreated = canonical.obs[j].d == 0;
    const double eta = untreated ? canonical.obs[j].y : 0.0;  // (1-D) Y
    const double xj = canonical.obs[j].x;
    const double dk = std::sqrt(std::max(donor_obj[k] - obj_min, 0.0));
    const double td = dk / b_delta;
    const double tp = (canonical.obs[j].p - p_i) / b_p;
    const double w = std::exp(-0.5 * (td * td + tp * tp));
    if (!(w > 0.0)) continue;  // also drops overflowed objectives cleanly
    const double reg[4] = {1.0, td, tp, tp * tp};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c <= r; ++c) m[r][c] += w * reg[r] * reg[c];
      ry[r] += w * reg[r] * eta;
      rx[r] += w * reg[r] * xj;
    }
    if (untreated) {
      y_lo = std::min(y_lo, canonical.obs[j].y);
      y_hi = std::max(y_hi, canonical.obs[j].y);
    }
    x_lo = std::min(x_lo, xj);
    x_hi = std::max(x_hi, xj);
  }
  if (!(m[0][0] > config.weight_floor) || !(y_lo <= y_hi)) return result;
  for (int r = 0; r < 4; ++r)
    for (int c = r + 1; c < 4; ++c) m[r][c] = m[c][r];
  // Both intercepts come from the same design; degenerate spreads fall back
  // to fewer regressors (drop the p^2 term, then p, then delta).
  double numerator = ry[0] / m[0][0];
  double locus = rx[0] / m[0][0];
  for (int rank = 4; rank >= 2; --rank) {
    if (solve_intercepts(m, ry, rx, rank, numerator, locus)) break;
  }
  // The intercept extrapolates to delta = 0; clamping the imputed mean to the
  // untreated donors' outcome range bounds the occasional ill-conditioned fit
  // without touching typical ones.
  result.imputed_y = std::clamp(numerator / (1.0 - p_i), y_lo, y_hi);
  result.matched_x = std::clamp(locus, x_lo, x_hi);
  result.usable = true;
  return result;
}

MatchResult impute_counterfactual(const Sample& sample, const HGrid& grid,
                                  const EstimatorConfig& config, std::size_t i) {
  const Sample canonical = canonical_sample(sample);
  const MatchingContext context = make_matching_context(grid, config);
  return impute_counterfactual(canonical, context, i);
}

void write_match_csv(std::ostream& out, const Sample& canonical,
                     std::span<const MatchResult> results) {
  out << "i,x,p,matched_distance,imputed_y,usable\n";
  for (const MatchResult& r : results) {
    const Observation& o = canonical.obs[r.target_index];
    out << r.target_index << ',' << format_double(o.x) << ',' << format_double(o.p) << ','
        << format_double(r.matched_distance) << ',' << format_double(r.imputed_y) << ','
        << (r.usable ? 1 : 0) << '\n';
  }
}

}  // namespace wsmatch
