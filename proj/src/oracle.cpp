#include "wsmatch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wsmatch/normal.hpp"
#include "wsmatch/quadrature.hpp"
#include "wsmatch/rng.hpp"

namespace wsmatch {

std::vector<double> PopulationModel::index_map(double x, int d) const {
  const double dd = d;
  switch (design) {
    case Design::d1:
    case Design::d3:
      return {x + 0.5 * dd};
    case Design::d2:
      return {x + 0.5 * dd, x + dd};
    case Design::rc:
      return {(d ? kRcAlpha1 : kRcAlpha0) + (d ? kRcBeta1 : kRcBeta0) * x, x};
    case Design::multinomial:
      return {index_spec.mn_x[0] * x + index_spec.mn_d[0] * dd,
              index_spec.mn_x[1] * x + index_spec.mn_d[1] * dd};
    case Design::roy:
      return {index_spec.roy_a_x * x + index_spec.roy_a_d * dd,
              index_spec.roy_b_x * x + index_spec.roy_b_d * dd};
  }
  throw std::invalid_argument("index_map: unknown design");
}

double PopulationModel::conditional_cdf(double y, std::span<const double> v, double u) const {
  const double tau = std::sqrt(1.0 - rho * rho);
  switch (design) {
    case Design::d1:
      return normal_cdf((y - v[0] - rho * u) / tau);
    case Design::d2: {
      const double v2 = v[1];
      if (v2 == 0.0) return v[0] <= y ? 1.0 : 0.0;  // degenerate: Y = v1 exactly
      const double q = (y - v[0]) / v2;
      const double t = (q - rho * u) / tau;
      return v2 > 0.0 ? normal_cdf(t) : 1.0 - normal_cdf(t);
    }
    case Design::d3: {
      if (y < 0.0) return 0.0;
      const double r = std::sqrt(y);
      const double m = v[0] + rho * u;
      return normal_cdf((r - m) / tau) - normal_cdf((-r - m) / tau);
    }
    case Design::rc: {
      // Y | u ~ N(v1 + rho u, 1 - rho^2 + x^2) with x carried as v2.
      const double sd = std::sqrt(1.0 - rho * rho + v[1] * v[1]);
      return normal_cdf((y - v[0] - rho * u) / sd);
    }
    default:
      throw std::invalid_argument("conditional_cdf: design has no scalar outcome CDF");
  }
}

std::array<double, 3> multinomial_choice_probs(const PopulationModel& model, double x, int d,
                                               double u) {
  if (model.design != Design::multinomial) {
    throw std::invalid_argument("multinomial_choice_probs: wrong design");
  }
  const auto v = model.index_map(x, d);
  const double tau = std::sqrt(1.0 - model.rho * model.rho);
  const double mu = model.rho * u;  // common location of e1, e2 given u
  // Given u the two utility shocks are independent N(mu, tau^2); choice j
  // maximizes (0, v1+e1, v2+e2).
  const double a1 = (-v[0] - mu) / tau;  // e1 standardized at utility 0
  const double a2 = (-v[1] - mu) / tau;
  const double p0 = normal_cdf(a1) * normal_cdf(a2);
  // P(v1+e1 > 0 and v1+e1 >= v2+e2): (e1, e1-e2) given u has corr 1/sqrt(2).
  const double b12 = (v[1] - v[0]) / (std::sqrt(2.0) * tau);
  const double p1 = 1.0 - normal_cdf(a1) - normal_cdf(b12) +
                    bivariate_normal_cdf(a1, b12, 1.0 / std::sqrt(2.0));
  const double b21 = (v[0] - v[1]) / (std::sqrt(2.0) * tau);
  const double p2 = 1.0 - normal_cdf(a2) - normal_cdf(b21) +
                    bivariate_normal_cdf(a2, b21, 1.0 / std::sqrt(2.0));
  return {p0, p1, p2};
}

double PopulationModel::event_prob(const Event& event, double x, int d, double u) const {
  switch (event.kind) {
    case EventKind::cdf_leq:
      return conditional_cdf(event.y, index_map(x, d), u);
    case EventKind::category: {
      const auto probs = multinomial_choice_probs(*this, x, d, u);
      if (event.j < 0 || event.j > 2) throw std::invalid_argument("event_prob: bad category");
      return probs[static_cast<std::size_t>(event.j)];
    }
    case EventKind::sector_a:
    case EventKind::sector_leq: {
      if (design != Design::roy) throw std::invalid_argument("event_prob: sector event needs roy");
      const auto v = index_map(x, d);
      const double tau = std::sqrt(1.0 - rho * rho);
      const double gap = (v[0] - v[1]) / (std::sqrt(2.0) * tau);  // (e_b - e_a) threshold
      if (event.kind == EventKind::sector_a) return normal_cdf(gap);
      // P(W = a, Y <= y | u) = P(e_a <= y - v_a, e_a - e_b >= v_b - v_a | u);
      // corr(e_a, -(e_a - e_b)) = -1/sqrt(2), the rho*u location cancels in
      // the difference.
      const double astar = (event.y - v[0] - rho * u) / tau;
      return bivariate_normal_cdf(astar, gap, -1.0 / std::sqrt(2.0));
    }
  }
  throw std::logic_error("event_prob: unknown event kind");
}

namespace {

double integrate_event(const PopulationModel& model, double x, const Event& event, int d,
                       double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
    throw std::invalid_argument("oracle integral: need 0 <= lo <= hi <= 1");
  }
  if (lo == hi) return 0.0;
  return integrate(
      [&](double t) { return model.event_prob(event, x, d, inverse_normal_cdf(t)); }, lo, hi);
}

}  // namespace

double oracle_h1_star(const PopulationModel& model, double x, const Event& event, double p) {
  return integrate_event(model, x, event, 1, 0.0, p);
}

double oracle_h0_star(const PopulationModel& model, double x, const Event& event, double p) {
  return integrate_event(model, x, event, 0, p, 1.0);
}

double oracle_h1(const PopulationModel& model, double x, const Event& event, double p1,
                 double p2) {
  if (!(p2 <= p1)) throw std::invalid_argument("oracle_h1: need p2 <= p1");
  return integrate_event(model, x, event, 1, p2, p1);
}

double oracle_h0(const PopulationModel& model, double x, const Event& event, double p1,
                 double p2) {
  if (!(p2 <= p1)) throw std::invalid_argument("oracle_h0: need p2 <= p1");
  return integrate_event(model, x, event, 0, p2, p1);
}

Eq45Check check_eq4_eq5(const PopulationModel& model, double x1, double x0,
                        const EventFamily& family, std::span<const double> p_points) {
  Eq45Check out;
  for (const Event& event : family.events()) {
    for (std::size_t i = 0; i < p_points.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double p1 = p_points[i];
        const double p2 = p_points[j];
        const double gap =
            std::fabs(oracle_h1(model, x1, event, p1, p2) - oracle_h0(model, x0, event, p1, p2));
        out.max_gap = std::max(out.max_gap, gap);
      }
    }
  }
  out.match = out.max_gap < 1e-8;
  return out;
}

double oracle_phi0_rc(double x, double y, double p, double rho) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("oracle_phi0_rc: p outside (0,1)");
  // Counterfactual event eta + x*eps_slope <= y - alpha1 - beta1*x for the
  // untreated population U >= p; given u the left side is
  // N(rho*u, 1 - rho^2 + x^2).
  const double threshold = y - kRcAlpha1 - kRcBeta1 * x;
  const double sd = std::sqrt(1.0 - rho * rho + x * x);
  return integrate(
      [&](double t) {
        return normal_cdf((threshold - rho * inverse_normal_cdf(t)) / sd);
      },
      p, 1.0);
}

BruteForceTruth brute_force_truth(Design design, double rho, std::uint64_t draws,
                                  std::uint64_t seed) {
  if (draws < 1000000) throw std::invalid_argument("brute_force_truth: need draws >= 1e6");
  if (!is_scalar_outcome(design)) {
    throw std::invalid_argument("brute_force_truth: no scalar target for example designs");
  }
  const double tau = std::sqrt(1.0 - rho * rho);
  RngStream rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double x = rng.normal();
    rng.normal();  // z: drawn to keep the stream layout of generate(), unused under D=1
    const double u = rng.normal();
    double value;
    switch (design) {
      case Design::d1: {
        const double eps = rho * u + tau * rng.normal();
        value = x + 0.5 + eps;
        break;
      }
      case Design::d2: {
        const double eps = rho * u + tau * rng.normal();
        value = x + 0.5 + (x + 1.0) * eps;
        break;
      }
      case Design::d3: {
        const double eps = rho * u + tau * rng.normal();
        const double root = x + 0.5 + eps;
        value = root * root;
        break;
      }
      default: {  // rc
        const double eta = rho * u + tau * rng.normal();
        const double eps_slope = rng.normal();
        const double y1 = kRcAlpha1 + eta + x * (kRcBeta1 + eps_slope);
        value = y1 <= 1.0 ? 1.0 : 0.0;
        break;
      }
    }
    sum += value;
    sumsq += value * value;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = std::max(0.0, sumsq / nd - mean * mean);
  return {mean, std::sqrt(var / nd)};
}

HGrid build_oracle_grid(const PopulationModel& model, std::vector<double> query_xs,
                        const EventFamily& family, std::vector<double> p_points) {
  std::sort(query_xs.begin(), query_xs.end());
  query_xs.erase(std::unique(query_xs.begin(), query_xs.end()), query_xs.end());
  HGrid grid;
  grid.family = family;
  grid.events = family.events();
  grid.query_xs = std::move(query_xs);
  grid.p_points = std::move(p_points);
  const std::size_t nx = grid.query_xs.size();
  const std::size_t ne = grid.events.size();
  const std::size_t np = grid.p_points.size();
  grid.h1.resize(nx * ne * np);
  grid.h0.resize(nx * ne * np);
  grid.ok.assign(nx * np, 1);
  for (std::size_t xi = 0; xi < nx; ++xi) {
    for (std::size_t e = 0; e < ne; ++e) {
      for (std::size_t pi = 0; pi < np; ++pi) {
        const std::size_t k = grid.idx(xi, e, pi);
        grid.h1[k] = oracle_h1_star(model, grid.query_xs[xi], grid.events[e], grid.p_points[pi]);
        grid.h0[k] = oracle_h0_star(model, grid.query_xs[xi], grid.events[e], grid.p_points[pi]);
      }
    }
  }
  return grid;
}

namespace {

std::string event_label(const Event& e) {
  std::ostringstream os;
  switch (e.kind) {
    case EventKind::cdf_leq: os << "leq:" << format_double(e.y); break;
    case EventKind::category: os << "cat:" << e.j; break;
    case EventKind::sector_a: os << "sector_a"; break;
    case EventKind::sector_leq: os << "joint:" << format_double(e.y); break;
  }
  return os.str();
}

}  // namespace

void write_oracle_pairs_csv(std::ostream& out, const PopulationModel& model,
                            std::span<const double> xs, const EventFamily& family,
                            std::span<const double> p_points) {
  out << "design,rho,x,event,p1,p2,h1,h0\n";
  for (double x : xs) {
    for (const Event& event : family.events()) {
      for (std::size_t i = 0; i < p_points.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const double p1 = p_points[i];
          const double p2 = p_points[j];
          out << to_string(model.design) << ',' << format_double(model.rho) << ','
              << format_double(x) << ',' << event_label(event) << ',' << format_double(p1) << ','
              << format_double(p2) << ',' << format_double(oracle_h1(model, x, event, p1, p2))
              << ',' << format_double(oracle_h0(model, x, event, p1, p2)) << '\n';
        }
      }
    }
  }
}

}  // namespace wsmatch
