#include "wsmatch/estimators.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include "wsmatch/dgp.hpp"
#include "wsmatch/golden.hpp"
#include "wsmatch/normal.hpp"
#include "wsmatch/rng.hpp"

namespace wsmatch {

const char* to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::ckt_ate: return "CKT_ATE";
    case Estimator::ckt_ate_weighted: return "CKT_ATE_WEIGHTED";
    case Estimator::vy_infeasible: return "VY_INFEASIBLE";
    case Estimator::rc_dte: return "RC_DTE";
  }
  throw std::invalid_argument("to_string: unknown estimator");
}

std::optional<Estimator> parse_estimator(std::string_view text) {
  std::string up;
  for (char c : text) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "CKT" || up == "CKT_ATE") return Estimator::ckt_ate;
  if (up == "CKT-W" || up == "CKT_ATE_WEIGHTED") return Estimator::ckt_ate_weighted;
  if (up == "VY" || up == "VY_INFEASIBLE") return Estimator::vy_infeasible;
  if (up == "RC" || up == "RC_DTE") return Estimator::rc_dte;
  return std::nullopt;
}

namespace {

double report_target(Estimator estimator, Design design) {
  const bool ate_style = estimator != Estimator::rc_dte;
  if (ate_style && (design == Design::d1 || design == Design::d2 || design == Design::d3)) {
    return true_parameter(design);
  }
  if (estimator == Estimator::rc_dte && design == Design::rc) return true_parameter(design);
  return std::numeric_limits<double>::quiet_NaN();
}

// Candidate grid for the matched x-tilde: 2001 points over +/- 4 sample sd.
std::vector<double> match_candidate_grid(const Sample& cs) {
  const std::size_t n = cs.size();
  double x_mean = 0.0;
  for (const Observation& o : cs.obs) x_mean += o.x;
  x_mean /= static_cast<double>(n);
  double x_var = 0.0;
  for (const Observation& o : cs.obs) x_var += (o.x - x_mean) * (o.x - x_mean);
  const double x_sd = std::sqrt(x_var / static_cast<double>(n));
  constexpr std::size_t kCandidates = 2001;
  std::vector<double> cand(kCandidates);
  for (std::size_t c = 0; c < kCandidates; ++c) {
    cand[c] = x_mean - 4.0 * x_sd +
              8.0 * x_sd * static_cast<double>(c) / static_cast<double>(kCandidates - 1);
  }
  return cand;
}

EstimateReport ckt_core(const Sample& sample, const EstimatorConfig& config, double a_low,
                        double a_high, Estimator label, CktDiagnostics* diagnostics) {
  config.validate();
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("ate_ckt: empty sample");
  const Sample cs = canonical_sample(sample);

  // Fingerprints are evaluated at every observed covariate: untreated
  // observations are the targets (treated arm), and every observation is a
  // match donor through its untreated-arm fingerprint.
  std::size_t n_targets = 0;
  std::vector<double> query_xs;
  query_xs.reserve(n);
  for (const Observation& o : cs.obs) {
    query_xs.push_back(o.x);
    if (o.d == 0) ++n_targets;
  }
  HGrid grid;
  MatchingContext context;
  if (n_targets > 0) {
    grid = build_h_grid(cs, config, std::move(query_xs));
    context = make_matching_context(grid, config);
  }

  double sum = 0.0;
  std::size_t used = 0, untreated_in_window = 0, untreated_usable = 0;
  std::vector<MatchResult> matches;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = cs.obs[i];
    const bool in_window = o.x >= a_low && o.x <= a_high;
    if (o.d == 1) {
      if (in_window) {
        sum += o.y;
        ++used;
      }
      continue;
    }
    if (!in_window && diagnostics == nullptr) continue;
    const MatchResult mr = impute_counterfactual(cs, context, i);
    if (diagnostics != nullptr) matches.push_back(mr);
    if (!in_window) continue;
    ++untreated_in_window;
    if (mr.usable) {
      sum += mr.imputed_y;
      ++used;
      ++untreated_usable;
    }
  }
  if (untreated_in_window > 0 && untreated_usable == 0) {
    throw EstimationError("ate_ckt: no untreated observation was usable");
  }
  if (used == 0) throw EstimationError("ate_ckt: no usable observations");

  EstimateReport report;
  report.estimator = label;
  report.spec = cs.spec;
  report.value = sum / static_cast<double>(used);
  report.target = report_target(label, cs.spec.design);
  report.n_used = used;
  report.n_dropped = n - used;
  if (diagnostics != nullptr) {
    diagnostics->canonical = cs;
    diagnostics->grid = std::move(grid);
    diagnostics->matches = std::move(matches);
  }
  return report;
}

}  // namespace

EstimateReport ate_ckt(const Sample& sample, const EstimatorConfig& config,
                       CktDiagnostics* diagnostics) {
  return ckt_core(sample, config, -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), Estimator::ckt_ate, diagnostics);
}

EstimateReport ate_ckt_weighted(const Sample& sample, const EstimatorConfig& config, double a_low,
                                double a_high) {
  if (!(a_low < a_high)) throw std::invalid_argument("ate_ckt_weighted: need a_low < a_high");
  return ckt_core(sample, config, a_low, a_high, Estimator::ckt_ate_weighted, nullptr);
}

namespace {

// Antiderivatives over the uniform selection scale: integrals of Phi^{-1}(t)
// and Phi^{-1}(t)^2 from p2 to p1 evaluate from these per-point terms.
struct PPoint {
  double p;
  double pdf_at_q;      // phi(Phi^{-1}(p))
  double p_minus_qpdf;  // p - Phi^{-1}(p) phi(Phi^{-1}(p))
};

PPoint make_ppoint(double p) {
  const double q = inverse_normal_cdf(p);
  const double f = normal_pdf(q);
  return {p, f, p - q * f};
}

// Closed-form m_d(x, p_hi, p_lo) = integral over [p_lo, p_hi] of
// E[g(v(x,d), eps) | U = Phi^{-1}(t)] dt for designs d1/d2/d3.
double vy_mean_fingerprint(Design design, double rho, double x, int d, const PPoint& hi,
                           const PPoint& lo) {
  const double dp = hi.p - lo.p;
  const double i1 = lo.pdf_at_q - hi.pdf_at_q;  // integral of Phi^{-1}
  const double v1 = x + 0.5 * d;
  switch (design) {
    case Design::d1:
      return v1 * dp + rho * i1;
    case Design::d2:
      return v1 * dp + (x + d) * rho * i1;
    case Design::d3: {
      const double i2 = hi.p_minus_qpdf - lo.p_minus_qpdf;  // integral of Phi^{-1} squared
      return (v1 * v1 + 1.0 - rho * rho) * dp + 2.0 * v1 * rho * i1 + rho * rho * i2;
    }
    default:
      throw std::invalid_argument("vy_mean_fingerprint: design outside d1/d2/d3");
  }
}

}  // namespace

EstimateReport ate_vy_infeasible(const Sample& sample, Design design, double rho,
                                 const EstimatorConfig& config) {
  config.validate();
  if (!(design == Design::d1 || design == Design::d2 || design == Design::d3)) {
    throw std::invalid_argument("ate_vy_infeasible: design outside d1/d2/d3");
  }
  if (!(std::isfinite(rho) && std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("ate_vy_infeasible: need |rho| < 1");
  }
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("ate_vy_infeasible: empty sample");
  const Sample cs = canonical_sample(sample);
  const double b = config.bandwidth(n);

  const std::vector<double> p_points = make_p_points(config);
  std::vector<PPoint> pts;
  pts.reserve(p_points.size());
  for (double p : p_points) pts.push_back(make_ppoint(p));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (hi, lo), same order as matching
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) pairs.emplace_back(i, j);
  }
  const std::size_t nk = pairs.size();

  const std::vector<double> cand = match_candidate_grid(cs);
  const std::size_t kCandidates = cand.size();
  std::vector<double> m0(kCandidates * nk);
  for (std::size_t c = 0; c < kCandidates; ++c) {
    for (std::size_t k = 0; k < nk; ++k) {
      m0[c * nk + k] =
          vy_mean_fingerprint(design, rho, cand[c], 0, pts[pairs[k].first], pts[pairs[k].second]);
    }
  }

  std::vector<std::size_t> donors;
  for (std::size_t j = 0; j < n; ++j) {
    if (cs.obs[j].d == 0) donors.push_back(j);
  }

  double sum = 0.0;
  std::size_t used = 0, untreated = 0, untreated_usable = 0;
  std::vector<double> m1(nk);
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = cs.obs[i];
    if (o.d == 1) {
      sum += o.y;
      ++used;
      continue;
    }
    ++untreated;
    if (!config.in_band(o.p)) continue;
    for (std::size_t k = 0; k < nk; ++k) {
      m1[k] = vy_mean_fingerprint(design, rho, o.x, 1, pts[pairs[k].first], pts[pairs[k].second]);
    }
    std::size_t best = 0;
    double best_ssd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kCandidates; ++c) {
      const double* row = m0.data() + c * nk;
      double ssd = 0.0;
      for (std::size_t k = 0; k < nk; ++k) {
        const double d = m1[k] - row[k];
        ssd += d * d;
      }
      if (ssd < best_ssd) {  // strict: ties keep the smallest candidate
        best_ssd = ssd;
        best = c;
      }
    }
    const double x_tilde = cand[best];
    double num = 0.0, den = 0.0;
    for (std::size_t j : donors) {
      if (j == i) continue;
      const double tx = (cs.obs[j].x - x_tilde) / b;
      const double tp = (cs.obs[j].p - o.p) / b;
      const double w = std::exp(-0.5 * (tx * tx + tp * tp));
      num += w * cs.obs[j].y;
      den += w;
    }
    if (!(den > config.weight_floor)) continue;
    sum += num / den;
    ++used;
    ++untreated_usable;
  }
  if (untreated > 0 && untreated_usable == 0) {
    throw EstimationError("ate_vy_infeasible: no untreated observation was usable");
  }
  if (used == 0) throw EstimationError("ate_vy_infeasible: no usable observations");

  EstimateReport report;
  report.estimator = Estimator::vy_infeasible;
  report.spec = cs.spec;
  report.value = sum / static_cast<double>(used);
  report.target = report_target(Estimator::vy_infeasible, design);
  report.n_used = used;
  report.n_dropped = n - used;
  return report;
}

namespace {

// Linear interpolation over a sorted axis with clamping to the end values.
double interp_clamped(std::span<const double> axis, std::span<const double> values, double at) {
  if (at <= axis.front()) return values.front();
  if (at >= axis.back()) return values.back();
  const auto it = std::upper_bound(axis.begin(), axis.end(), at);
  const std::size_t s = static_cast<std::size_t>(it - axis.begin()) - 1;
  const double span = axis[s + 1] - axis[s];
  const double w = span > 0.0 ? (at - axis[s]) / span : 0.0;
  return values[s] + w * (values[s + 1] - values[s]);
}

}  // namespace

THatResult rc_t_hat(const HGrid& grid, double x, double y, double p1, double p2) {
  if (grid.family.kind != EventFamily::Kind::cdf || grid.family.y_points.size() < 2) {
    throw std::invalid_argument("rc_t_hat: needs a cdf grid with >= 2 y points");
  }
  if (!(p1 > p2)) throw std::invalid_argument("rc_t_hat: need p1 > p2");
  const std::size_t xi = grid.x_index(x);
  const std::vector<double>& yp = grid.family.y_points;
  const std::vector<double>& pp = grid.p_points;
  const std::size_t ne = grid.n_events();

  // p-axis interpolation bracketing for both probe points.
  const auto locate = [&](double p) {
    std::size_t s;
    double w;
    if (p <= pp.front()) {
      s = 0;
      w = 0.0;
    } else if (p >= pp.back()) {
      s = pp.size() - 2;
      w = 1.0;
    } else {
      s = static_cast<std::size_t>(std::upper_bound(pp.begin(), pp.end(), p) - pp.begin()) - 1;
      w = (p - pp[s]) / (pp[s + 1] - pp[s]);
    }
    return std::pair<std::size_t, double>{s, w};
  };
  const auto [s1, w1] = locate(p1);
  const auto [s2, w2] = locate(p2);
  if (!(grid.cell_ok(xi, s1) && grid.cell_ok(xi, s1 + 1) && grid.cell_ok(xi, s2) &&
        grid.cell_ok(xi, s2 + 1))) {
    return {};  // no local data underneath either probe
  }

  std::vector<double> d1(ne), d0(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const double h1_hi =
        grid.h1_star(xi, e, s1) + w1 * (grid.h1_star(xi, e, s1 + 1) - grid.h1_star(xi, e, s1));
    const double h1_lo =
        grid.h1_star(xi, e, s2) + w2 * (grid.h1_star(xi, e, s2 + 1) - grid.h1_star(xi, e, s2));
    d1[e] = h1_hi - h1_lo;
    const double h0_hi =
        grid.h0_star(xi, e, s1) + w1 * (grid.h0_star(xi, e, s1 + 1) - grid.h0_star(xi, e, s1));
    const double h0_lo =
        grid.h0_star(xi, e, s2) + w2 * (grid.h0_star(xi, e, s2 + 1) - grid.h0_star(xi, e, s2));
    d0[e] = h0_lo - h0_hi;
  }
  const auto [d0_min, d0_max] = std::minmax_element(d0.begin(), d0.end());
  if (!(*d0_max - *d0_min > 0.0)) return {};  // flat objective: no information in t

  const double c = interp_clamped(yp, d1, y);
  const auto objective = [&](double t) {
    const double gap = c - interp_clamped(yp, d0, t);
    return gap * gap;
  };

  std::size_t coarse = 0;
  double coarse_best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < yp.size(); ++k) {
    const double gap = c - d0[k];
    const double obj = gap * gap;
    if (obj < coarse_best) {
      coarse_best = obj;
      coarse = k;
    }
  }
  const double lo = yp[coarse > 0 ? coarse - 1 : 0];
  const double hi = yp[std::min(coarse + 1, yp.size() - 1)];
  return {golden_section_min(objective, lo, hi, 1e-8), true};
}

namespace {

// Shared per-sample state for the pairwise inversions: trimmed queries
// (sorted by propensity), the p-kernel matrix, and the untreated jump set.
struct RcWorkspace {
  std::vector<std::size_t> query;  // canonical indices, ascending (p, index)
  std::vector<double> query_p;
  std::vector<double> pw;          // [query][obs]
  std::vector<std::size_t> jumps;  // canonical indices with d == 0 (y-ascending)
  std::vector<double> jump_y;
  std::size_t cut = 0;             // #obs with Y <= y (canonical prefix)
  double clamp_lo = 0.0;           // smallest t attainable (sample y minimum)

  // Per-target buffers.
  std::vector<double> xw;       // [obs]
  std::vector<double> levels;   // [query][0..K]
  std::vector<double> h1_at_y;  // [query]
  std::vector<std::uint8_t> query_ok;
};

void rc_prepare(const Sample& cs, const EstimatorConfig& config, double y, RcWorkspace& ws) {
  const std::size_t n = cs.size();
  const double b = config.bandwidth(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (config.in_band(cs.obs[i].p)) ws.query.push_back(i);
  }
  // The pairwise inversion is exact up to 1000 query points; past that we
  // draw a seeded subsample so the pair count stays bounded.
  constexpr std::size_t kMaxQueries = 1000;
  if (ws.query.size() > kMaxQueries) {
    RngStream rng(mix_seed(cs.spec.seed, 0x70616972ULL));
    for (std::size_t i = 0; i < kMaxQueries; ++i) {
      const std::size_t span = ws.query.size() - i;
      const std::size_t j = i + std::min(span - 1, static_cast<std::size_t>(
                                                       rng.uniform_open01() * span));
      std::swap(ws.query[i], ws.query[j]);
    }
    ws.query.resize(kMaxQueries);
  }
  std::sort(ws.query.begin(), ws.query.end(), [&](std::size_t a, std::size_t bidx) {
    return std::tie(cs.obs[a].p, a) < std::tie(cs.obs[bidx].p, bidx);
  });
  ws.query_p.resize(ws.query.size());
  for (std::size_t q = 0; q < ws.query.size(); ++q) ws.query_p[q] = cs.obs[ws.query[q]].p;

  ws.pw.resize(ws.query.size() * n);
  for (std::size_t q = 0; q < ws.query.size(); ++q) {
    const double p0 = ws.query_p[q];
    double* row = ws.pw.data() + q * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = (cs.obs[k].p - p0) / b;
      row[k] = std::exp(-0.5 * t * t);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (cs.obs[k].d == 0) {
      ws.jumps.push_back(k);
      ws.jump_y.push_back(cs.obs[k].y);
    }
  }
  std::size_t cut = 0;
  while (cut < n && cs.obs[cut].y <= y) ++cut;  // canonical order is y-ascending
  ws.cut = cut;
  ws.clamp_lo = cs.obs.front().y;

  ws.xw.resize(n);
  ws.levels.resize(ws.query.size() * (ws.jumps.size() + 1));
  ws.h1_at_y.resize(ws.query.size());
  ws.query_ok.resize(ws.query.size());
}

struct RcTauResult {
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::size_t pairs_used = 0;
  bool ok = false;
};

RcTauResult rc_tau_at(const Sample& cs, const EstimatorConfig& config, RcWorkspace& ws, double x) {
  const std::size_t n = cs.size();
  const std::size_t nq = ws.query.size();
  const std::size_t nlev = ws.jumps.size() + 1;
  if (nq < 2 || ws.jumps.empty()) return {};
  const double b = config.bandwidth(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (cs.obs[k].x - x) / b;
    ws.xw[k] = std::exp(-0.5 * t * t);
  }

  // Kernel step functions per query: levels[m] = h0*(x, t, P_q) for t just
  // past the m-th untreated jump; h1_at_y = h1*(x, y, P_q).
  for (std::size_t q = 0; q < nq; ++q) {
    const double* pw = ws.pw.data() + q * n;
    double* lev = ws.levels.data() + q * nlev;
    double denom = 0.0, s1 = 0.0, s0 = 0.0;
    std::size_t m = 0;
    lev[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = ws.xw[k] * pw[k];
      denom += w;
      if (cs.obs[k].d == 0) {
        s0 += w;
        lev[++m] = s0;
      } else if (k < ws.cut) {
        s1 += w;
      }
    }
    ws.query_ok[q] = denom > config.weight_floor ? 1 : 0;
    if (!ws.query_ok[q]) continue;
    const double inv = 1.0 / denom;
    ws.h1_at_y[q] = s1 * inv;
    for (std::size_t j = 0; j <= m; ++j) lev[j] *= inv;
  }

  double tau_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 1; a < nq; ++a) {
    if (!ws.query_ok[a]) continue;
    const double* hi = ws.levels.data() + a * nlev;
    for (std::size_t bq = 0; bq < a; ++bq) {
      if (!ws.query_ok[bq] || !(ws.query_p[a] > ws.query_p[bq])) continue;
      const double* lo = ws.levels.data() + bq * nlev;
      const double c = ws.h1_at_y[a] - ws.h1_at_y[bq];
      // Pass 1: the best |c - (lo[m] - hi[m])| over levels, in four
      // independent lanes to break the min dependence chain.
      double m0 = std::numeric_limits<double>::infinity(), m1 = m0, m2 = m0, m3 = m0;
      std::size_t m = 0;
      for (; m + 4 <= nlev; m += 4) {
        m0 = std::min(m0, std::fabs(c - (lo[m] - hi[m])));
        m1 = std::min(m1, std::fabs(c - (lo[m + 1] - hi[m + 1])));
        m2 = std::min(m2, std::fabs(c - (lo[m + 2] - hi[m + 2])));
        m3 = std::min(m3, std::fabs(c - (lo[m + 3] - hi[m + 3])));
      }
      for (; m < nlev; ++m) m0 = std::min(m0, std::fabs(c - (lo[m] - hi[m])));
      const double best = std::min(std::min(m0, m1), std::min(m2, m3));
      // Pass 2: smallest level index attaining it; ties resolve to smaller t.
      std::size_t arg = 0;
      for (std::size_t k = 0; k < nlev; ++k) {
        if (std::fabs(c - (lo[k] - hi[k])) == best) {
          arg = k;
          break;
        }
      }
      tau_sum += arg == 0 ? ws.clamp_lo : ws.jump_y[arg - 1];
      ++pairs;
    }
  }
  if (pairs == 0) return {};
  return {tau_sum / static_cast<double>(pairs), pairs, true};
}

}  // namespace

double rc_tau(const Sample& sample, const HGrid& grid, const EstimatorConfig& config, double x,
              double y) {
  config.validate();
  if (grid.family.kind != EventFamily::Kind::cdf) {
    throw std::invalid_argument("rc_tau: needs a cdf grid");
  }
  const Sample cs = canonical_sample(sample);
  RcWorkspace ws;
  rc_prepare(cs, config, y, ws);
  const RcTauResult r = rc_tau_at(cs, config, ws, x);
  if (!r.ok) throw EstimationError("rc_tau: no valid propensity pair");
  return r.tau;
}

EstimateReport rc_dte(const Sample& sample, const EstimatorConfig& config, double y) {
  config.validate();
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("rc_dte: empty sample");
  const Sample cs = canonical_sample(sample);
  RcWorkspace ws;
  rc_prepare(cs, config, y, ws);

  double sum = 0.0;
  std::size_t used = 0, untreated_in_band = 0, untreated_usable = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = cs.obs[i];
    if (o.d == 1) {
      sum += o.y <= y ? 1.0 : 0.0;
      ++used;
      continue;
    }
    if (!config.in_band(o.p)) continue;
    ++untreated_in_band;
    const RcTauResult r = rc_tau_at(cs, config, ws, o.x);
    if (!r.ok) continue;
    sum += o.y <= r.tau ? 1.0 : 0.0;
    ++used;
    ++untreated_usable;
  }
  if (untreated_in_band > 0 && untreated_usable == 0) {
    throw EstimationError("rc_dte: no untreated observation was usable");
  }
  if (used == 0) throw EstimationError("rc_dte: no usable observations");

  EstimateReport report;
  report.estimator = Estimator::rc_dte;
  report.spec = cs.spec;
  report.value = sum / static_cast<double>(used);
  report.target = (cs.spec.design == Design::rc && y == 1.0)
                      ? true_parameter(Design::rc)
                      : std::numeric_limits<double>::quiet_NaN();
  report.n_used = used;
  report.n_dropped = n - used;
  return report;
}

double rc_dte_infeasible(const Sample& sample, double y) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("rc_dte_infeasible: empty sample");
  double sum = 0.0;
  for (const Observation& o : sample.obs) {
    const double threshold = o.d == 1 ? y : y - 1.0 - o.x;  // t(x,y) = y - 1 - x
    sum += o.y <= threshold ? 1.0 : 0.0;
  }
  return sum / static_cast<double>(n);
}

TheoremOneVariance theorem1_variance(Design design, double rho, std::uint64_t draws,
                                     std::uint64_t seed) {
  if (!(design == Design::d1 || design == Design::d2 || design == Design::d3)) {
    throw std::invalid_argument("theorem1_variance: design outside d1/d2/d3");
  }
  if (draws == 0) throw std::invalid_argument("theorem1_variance: draws == 0");
  const double tau2 = 1.0 - rho * rho;
  RngStream rng(seed);
  double sum_m = 0.0, sum_m2 = 0.0, sum_pv = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double x = rng.normal();
    const double z = rng.normal();
    const double u = rng.normal();
    const int d = z > u ? 1 : 0;
    const double p = normal_cdf(z);
    // Conditional moments of the treated-arm outcome Y1: the realized D only
    // changes the truncation side of the selection error. The P-weighted
    // variance term always conditions on D = 1 (the "below" side).
    const TruncatedMoments below = truncated_normal_moments_below(z);
    const TruncatedMoments side = d == 1 ? below : truncated_normal_moments_above(z);
    double m, var1;
    switch (design) {
      case Design::d1: {
        m = x + 0.5 + rho * side.m1;
        var1 = rho * rho * (below.m2 - below.m1 * below.m1) + tau2;
        break;
      }
      case Design::d2: {
        m = x + 0.5 + (x + 1.0) * rho * side.m1;
        const double var_eps = rho * rho * (below.m2 - below.m1 * below.m1) + tau2;
        var1 = (x + 1.0) * (x + 1.0) * var_eps;
        break;
      }
      default: {  // d3: Y_1 = (x + 0.5 + eps)^2
        const auto eps_moments = [&](const TruncatedMoments& t) {
          const double e1 = rho * t.m1;
          const double e2 = rho * rho * t.m2 + tau2;
          const double e3 = rho * rho * rho * t.m3 + 3.0 * rho * t.m1 * tau2;
          const double e4 =
              rho * rho * rho * rho * t.m4 + 6.0 * rho * rho * t.m2 * tau2 + 3.0 * tau2 * tau2;
          return std::array<double, 4>{e1, e2, e3, e4};
        };
        const double a = x + 0.5;
        const auto es = eps_moments(side);
        m = a * a + 2.0 * a * es[0] + es[1];
        const auto eb = eps_moments(below);
        const double mean1 = a * a + 2.0 * a * eb[0] + eb[1];
        const double mean1_sq = a * a * a * a + 4.0 * a * a * a * eb[0] + 6.0 * a * a * eb[1] +
                                4.0 * a * eb[2] + eb[3];
        var1 = mean1_sq - mean1 * mean1;
        break;
      }
    }
    sum_m += m;
    sum_m2 += m * m;
    sum_pv += p * var1;
  }
  const double nd = static_cast<double>(draws);
  TheoremOneVariance out;
  const double mean_m = sum_m / nd;
  out.var_conditional_mean = std::max(0.0, sum_m2 / nd - mean_m * mean_m);
  out.expected_p_weighted_var = sum_pv / nd;
  out.v = out.var_conditional_mean + out.expected_p_weighted_var;
  return out;
}

void write_report_csv(std::ostream& out, std::span<const EstimateReport> reports) {
  out << "estimator,design,rho,n,seed,value,target,n_used,n_dropped\n";
  for (const EstimateReport& r : reports) {
    out << to_string(r.estimator) << ',' << to_string(r.spec.design) << ','
        << format_double(r.spec.rho) << ',' << r.spec.n << ',' << r.spec.seed << ','
        << format_double(r.value) << ',' << format_double(r.target) << ',' << r.n_used << ','
        << r.n_dropped << '\n';
  }
}

}  // namespace wsmatch
