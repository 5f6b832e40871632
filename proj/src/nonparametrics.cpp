#include "wsmatch/nonparametrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "wsmatch/isotonic.hpp"

namespace wsmatch {

void EstimatorConfig::validate() const {
  if (!(bandwidth_exponent < 0.0)) {
    throw std::invalid_argument("EstimatorConfig: bandwidth_exponent must be negative");
  }
  if (!(trim_c0 > 0.0 && trim_c0 < 0.5)) {
    throw std::invalid_argument("EstimatorConfig: trim_c0 must lie in (0, 0.5)");
  }
  if (y_grid_divisor == 0) throw std::invalid_argument("EstimatorConfig: y_grid_divisor == 0");
  if (p_grid_points < 2) throw std::invalid_argument("EstimatorConfig: p_grid_points < 2");
  if (!(weight_floor > 0.0)) throw std::invalid_argument("EstimatorConfig: weight_floor <= 0");
}

double EstimatorConfig::bandwidth(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("bandwidth: n == 0");
  return std::pow(static_cast<double>(n), bandwidth_exponent);
}

Sample canonical_sample(const Sample& sample) {
  const std::size_t n = sample.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Observation& oa = sample.obs[a];
    const Observation& ob = sample.obs[b];
    return std::tie(oa.y, oa.x, oa.z, oa.p, oa.d, oa.w) <
           std::tie(ob.y, ob.x, ob.z, ob.p, ob.d, ob.w);
  });
  Sample out;
  out.spec = sample.spec;
  out.obs.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.obs[k] = sample.obs[order[k]];
  const auto permute = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    dst.resize(n);
    for (std::size_t k = 0; k < n; ++k) dst[k] = src[order[k]];
  };
  permute(sample.latents.u, out.latents.u);
  permute(sample.latents.eps, out.latents.eps);
  permute(sample.latents.eta, out.latents.eta);
  permute(sample.latents.eps_slope, out.latents.eps_slope);
  permute(sample.latents.eps_a, out.latents.eps_a);
  permute(sample.latents.eps_b, out.latents.eps_b);
  return out;
}

NwResult nw_regress(std::span<const double> x, std::span<const double> p,
                    std::span<const double> response, double x0, double p0, double bandwidth,
                    double weight_floor) {
  if (x.size() != p.size() || x.size() != response.size()) {
    throw std::invalid_argument("nw_regress: length mismatch");
  }
  if (!(bandwidth > 0.0)) throw std::invalid_argument("nw_regress: bandwidth <= 0");
  const double inv_h = 1.0 / bandwidth;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double tx = (x[i] - x0) * inv_h;
    const double tp = (p[i] - p0) * inv_h;
    const double w = std::exp(-0.5 * (tx * tx + tp * tp));
    num += w * response[i];
    den += w;
  }
  if (!(den > weight_floor)) return {0.0, false};
  return {num / den, true};
}

namespace {

NwResult estimate_h_star(const Sample& sample, const EstimatorConfig& config, double x, double y,
                         double p, int arm) {
  config.validate();
  if (sample.size() == 0) throw std::invalid_argument("estimate_h_star: empty sample");
  const Sample cs = canonical_sample(sample);
  const std::size_t n = cs.size();
  std::vector<double> xs(n), ps(n), resp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = cs.obs[i];
    xs[i] = o.x;
    ps[i] = o.p;
    const double treated = o.d == arm ? 1.0 : 0.0;
    resp[i] = treated * (o.y <= y ? 1.0 : 0.0);
  }
  NwResult r = nw_regress(xs, ps, resp, x, p, config.bandwidth(n), config.weight_floor);
  if (r.ok) r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

}  // namespace

NwResult estimate_h1_star(const Sample& sample, const EstimatorConfig& config, double x, double y,
                          double p) {
  return estimate_h_star(sample, config, x, y, p, 1);
}

NwResult estimate_h0_star(const Sample& sample, const EstimatorConfig& config, double x, double y,
                          double p) {
  return estimate_h_star(sample, config, x, y, p, 0);
}

std::size_t HGrid::x_index(double x) const {
  const auto it = std::lower_bound(query_xs.begin(), query_xs.end(), x);
  if (it == query_xs.end() || *it != x) throw std::out_of_range("HGrid::x_index: x not on grid");
  return static_cast<std::size_t>(it - query_xs.begin());
}

std::vector<double> make_p_points(const EstimatorConfig& config) {
  config.validate();
  const std::size_t m = config.p_grid_points;
  std::vector<double> pts(m);
  const double lo = config.trim_c0;
  const double spread = 1.0 - 2.0 * config.trim_c0;
  for (std::size_t k = 0; k < m; ++k) {
    pts[k] = lo + spread * static_cast<double>(k) / static_cast<double>(m - 1);
  }
  return pts;
}

std::vector<double> make_y_points(const Sample& sample, const EstimatorConfig& config) {
  config.validate();
  if (sample.size() == 0) throw std::invalid_argument("make_y_points: empty sample");
  double lo = sample.obs[0].y, hi = sample.obs[0].y;
  for (const Observation& o : sample.obs) {
    lo = std::min(lo, o.y);
    hi = std::max(hi, o.y);
  }
  const std::size_t k =
      std::max<std::size_t>(2, (sample.size() + config.y_grid_divisor - 1) / config.y_grid_divisor);
  // Midpoints of k equal segments: the extreme outcomes are poor event
  // thresholds (the indicator is almost surely 0 or 1 there), so the grid
  // stays interior to the sample range.
  std::vector<double> pts(k);
  for (std::size_t i = 0; i < k; ++i) {
    pts[i] = lo + (hi - lo) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(k));
  }
  return pts;
}

HGrid build_h_grid(const Sample& sample, const EstimatorConfig& config,
                   std::vector<double> query_xs) {
  return build_h_grid(sample, config, std::move(query_xs),
                      make_cdf_family(make_y_points(sample, config)), true);
}

HGrid build_h_grid(const Sample& sample, const EstimatorConfig& config,
                   std::vector<double> query_xs, const EventFamily& family,
                   bool isotonic_cleanup) {
  config.validate();
  if (sample.size() == 0) throw std::invalid_argument("build_h_grid: empty sample");
  const Sample cs = canonical_sample(sample);
  const std::size_t n = cs.size();
  const double b = config.bandwidth(n);
  const double inv_b = 1.0 / b;

  std::sort(query_xs.begin(), query_xs.end());
  query_xs.erase(std::unique(query_xs.begin(), query_xs.end()), query_xs.end());

  HGrid grid;
  grid.family = family;
  grid.events = family.events();
  grid.query_xs = std::move(query_xs);
  grid.p_points = make_p_points(config);
  const std::size_t nx = grid.query_xs.size();
  const std::size_t ne = grid.events.size();
  const std::size_t np = grid.p_points.size();
  if (ne == 0) throw std::invalid_argument("build_h_grid: family has no events");
  grid.h1.assign(nx * ne * np, std::numeric_limits<double>::quiet_NaN());
  grid.h0.assign(nx * ne * np, std::numeric_limits<double>::quiet_NaN());
  grid.ok.assign(nx * np, 0);

  // Sample columns in canonical (y-ascending) order.
  std::vector<double> ys(n), xs(n), ps(n);
  std::vector<std::uint8_t> ds(n), was(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = cs.obs[i];
    ys[i] = o.y;
    xs[i] = o.x;
    ps[i] = o.p;
    ds[i] = static_cast<std::uint8_t>(o.d);
    was[i] = o.w == Sector::a ? 1 : 0;
  }

  // CDF-type events reduce to prefix sums at a per-event cutoff index; the
  // cutoffs are shared across all (x, p) cells.
  const bool by_prefix = family.kind != EventFamily::Kind::category;
  std::vector<std::size_t> cut(ne, n);
  std::vector<std::uint8_t> masked(ne, 0);  // restrict to sector a
  if (by_prefix) {
    for (std::size_t e = 0; e < ne; ++e) {
      const Event& ev = grid.events[e];
      if (ev.kind == EventKind::cdf_leq || ev.kind == EventKind::sector_leq) {
        cut[e] = static_cast<std::size_t>(
            std::upper_bound(ys.begin(), ys.end(), ev.y) - ys.begin());
      }
      masked[e] = (ev.kind == EventKind::sector_a || ev.kind == EventKind::sector_leq) ? 1 : 0;
    }
  }

  std::vector<double> pw(np * n);
  for (std::size_t pi = 0; pi < np; ++pi) {
    const double p0 = grid.p_points[pi];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (ps[i] - p0) * inv_b;
      pw[pi * n + i] = std::exp(-0.5 * t * t);
    }
  }

  const std::size_t npairs = grid.n_p_pairs();
  grid.pair_wsq.assign(nx * npairs, 0.0);
  std::vector<double> xw(n), s1(n + 1), s0(n + 1), s1m(n + 1), s0m(n + 1);
  std::vector<double> wnorm(np * n);  // per-cell normalized weights w/D
  std::vector<double> cat1, cat0;
  const bool need_mask = by_prefix && family.kind == EventFamily::Kind::roy_joint;
  for (std::size_t xi = 0; xi < nx; ++xi) {
    const double x0 = grid.query_xs[xi];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (xs[i] - x0) * inv_b;
      xw[i] = std::exp(-0.5 * t * t);
    }
    for (std::size_t pi = 0; pi < np; ++pi) {
      const double* pwp = pw.data() + pi * n;
      double* wn = wnorm.data() + pi * n;
      double denom = 0.0;
      if (by_prefix) {
        s1[0] = s0[0] = 0.0;
        if (need_mask) s1m[0] = s0m[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double w = xw[i] * pwp[i];
          wn[i] = w;
          denom += w;
          const double w1 = ds[i] ? w : 0.0;
          const double w0 = ds[i] ? 0.0 : w;
          s1[i + 1] = s1[i] + w1;
          s0[i + 1] = s0[i] + w0;
          if (need_mask) {
            s1m[i + 1] = s1m[i] + (was[i] ? w1 : 0.0);
            s0m[i + 1] = s0m[i] + (was[i] ? w0 : 0.0);
          }
        }
      } else {
        cat1.assign(ne, 0.0);
        cat0.assign(ne, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = xw[i] * pwp[i];
          wn[i] = w;
          denom += w;
          const int j = static_cast<int>(ys[i]);
          if (j >= 0 && static_cast<std::size_t>(j) < ne) {
            (ds[i] ? cat1 : cat0)[static_cast<std::size_t>(j)] += w;
          }
        }
      }
      if (!(denom > config.weight_floor)) continue;  // cell stays flagged
      grid.ok[xi * np + pi] = 1;
      const double inv_denom = 1.0 / denom;
      for (std::size_t i = 0; i < n; ++i) wn[i] *= inv_denom;
      for (std::size_t e = 0; e < ne; ++e) {
        double num1, num0;
        if (by_prefix) {
          const std::size_t c = cut[e];
          num1 = masked[e] ? s1m[c] : s1[c];
          num0 = masked[e] ? s0m[c] : s0[c];
        } else {
          num1 = cat1[e];
          num0 = cat0[e];
        }
        grid.h1[grid.idx(xi, e, pi)] = num1 / denom;
        grid.h0[grid.idx(xi, e, pi)] = num0 / denom;
      }
    }
    // Squared norm of the difference-weight vector per ordered p-pair, the
    // design factor of the sampling variance of an estimated fingerprint
    // difference (same pair order as the matching context: i-major, j inner).
    std::size_t pk = 0;
    for (std::size_t i = 1; i < np; ++i) {
      for (std::size_t j = 0; j < i; ++j, ++pk) {
        if (!(grid.cell_ok(xi, i) && grid.cell_ok(xi, j))) continue;
        const double* wi = wnorm.data() + i * n;
        const double* wj = wnorm.data() + j * n;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double d = wi[k] - wj[k];
          acc += d * d;
        }
        grid.pair_wsq[xi * npairs + pk] = acc;
      }
    }
  }

  const auto [run_first, run_last] = family.monotone_run();
  std::vector<double> column(run_last > run_first ? run_last - run_first : 0);
  for (std::size_t xi = 0; xi < nx; ++xi) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      if (!grid.cell_ok(xi, pi)) continue;
      for (double* h : {grid.h1.data(), grid.h0.data()}) {
        if (isotonic_cleanup && run_last > run_first) {
          for (std::size_t e = run_first; e < run_last; ++e) {
            column[e - run_first] = h[grid.idx(xi, e, pi)];
          }
          isotonic_nondecreasing(column);
          for (std::size_t e = run_first; e < run_last; ++e) {
            h[grid.idx(xi, e, pi)] = column[e - run_first];
          }
        }
        for (std::size_t e = 0; e < ne; ++e) {
          double& v = h[grid.idx(xi, e, pi)];
          v = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return grid;
}

void write_hgrid_csv(std::ostream& out, const HGrid& grid) {
  out << "x,y,p,h1star,h0star\n";
  for (std::size_t xi = 0; xi < grid.query_xs.size(); ++xi) {
    for (std::size_t e = 0; e < grid.n_events(); ++e) {
      const Event& ev = grid.events[e];
      double ylabel;
      switch (ev.kind) {
        case EventKind::category: ylabel = ev.j; break;
        case EventKind::sector_a: ylabel = std::numeric_limits<double>::infinity(); break;
        default: ylabel = ev.y;
      }
      for (std::size_t pi = 0; pi < grid.p_points.size(); ++pi) {
        out << format_double(grid.query_xs[xi]) << ',' << format_double(ylabel) << ','
            << format_double(grid.p_points[pi]) << ','
            << format_double(grid.h1_star(xi, e, pi)) << ','
            << format_double(grid.h0_star(xi, e, pi)) << '\n';
      }
    }
  }
}

}  // namespace wsmatch
