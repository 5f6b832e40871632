#include "wsmatch/dgp.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wsmatch/normal.hpp"
#include "wsmatch/rng.hpp"

namespace wsmatch {

const char* to_string(Design design) {
  switch (design) {
    case Design::d1: return "D1";
    case Design::d2: return "D2";
    case Design::d3: return "D3";
    case Design::rc: return "RC";
    case Design::multinomial: return "MULTINOMIAL";
    case Design::roy: return "ROY";
  }
  throw std::invalid_argument("to_string: unknown design");
}

std::optional<Design> parse_design(std::string_view text) {
  std::string up;
  up.reserve(text.size());
  for (char c : text) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "D1") return Design::d1;
  if (up == "D2") return Design::d2;
  if (up == "D3") return Design::d3;
  if (up == "RC") return Design::rc;
  if (up == "MULTINOMIAL") return Design::multinomial;
  if (up == "ROY") return Design::roy;
  return std::nullopt;
}

void DesignSpec::validate() const {
  if (!std::isfinite(rho) || std::fabs(rho) >= 1.0) {
    throw std::invalid_argument("DesignSpec: need |rho| < 1");
  }
  if (n == 0) throw std::invalid_argument("DesignSpec: need n > 0");
}

double propensity(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("propensity: non-finite z");
  return normal_cdf(z);
}

double true_parameter(Design design) {
  switch (design) {
    case Design::d1: return 0.5;   // E[X + 0.5 + eps]
    case Design::d2: return 0.5;   // E[X + 0.5 + (X+1) eps]
    case Design::d3: return 2.25;  // E[(X + 0.5 + eps)^2] = Var(X+eps) + 0.25
    case Design::rc: return 0.5;   // P(Y_1 <= 1); Y_1 - 1 is symmetric about 0
    default:
      throw std::invalid_argument("true_parameter: no scalar target for example designs");
  }
}

Sample generate(const DesignSpec& spec) { return generate_example(spec, ExampleIndexSpec{}); }

Sample generate_example(const DesignSpec& spec, const ExampleIndexSpec& index) {
  spec.validate();
  const double rho = spec.rho;
  const double tau = std::sqrt(1.0 - rho * rho);  // sd of the idiosyncratic part

  Sample sample;
  sample.spec = spec;
  sample.obs.resize(spec.n);
  sample.latents.u.resize(spec.n);

  RngStream rng(spec.seed);
  switch (spec.design) {
    case Design::d1:
    case Design::d2:
    case Design::d3:
      sample.latents.eps.resize(spec.n);
      break;
    case Design::rc:
      sample.latents.eta.resize(spec.n);
      sample.latents.eps_slope.resize(spec.n);
      break;
    case Design::multinomial:
    case Design::roy:
      sample.latents.eps_a.resize(spec.n);
      sample.latents.eps_b.resize(spec.n);
      break;
  }

  for (std::size_t i = 0; i < spec.n; ++i) {
    Observation& o = sample.obs[i];
    o.x = rng.normal();
    o.z = rng.normal();
    const double u = rng.normal();
    sample.latents.u[i] = u;
    o.d = o.z > u ? 1 : 0;
    o.p = normal_cdf(o.z);
    const double d = o.d;
    switch (spec.design) {
      case Design::d1: {
        const double eps = rho * u + tau * rng.normal();
        sample.latents.eps[i] = eps;
        o.y = o.x + 0.5 * d + eps;
        break;
      }
      case Design::d2: {
        const double eps = rho * u + tau * rng.normal();
        sample.latents.eps[i] = eps;
        o.y = o.x + 0.5 * d + (o.x + d) * eps;
        break;
      }
      case Design::d3: {
        const double eps = rho * u + tau * rng.normal();
        sample.latents.eps[i] = eps;
        const double root = o.x + 0.5 * d + eps;
        o.y = root * root;
        break;
      }
      case Design::rc: {
        const double eta = rho * u + tau * rng.normal();
        const double eps_slope = rng.normal();
        sample.latents.eta[i] = eta;
        sample.latents.eps_slope[i] = eps_slope;
        const double alpha = o.d ? kRcAlpha1 : kRcAlpha0;
        const double beta = o.d ? kRcBeta1 : kRcBeta0;
        o.y = alpha + eta + o.x * (beta + eps_slope);
        break;
      }
      case Design::multinomial: {
        const double e1 = rho * u + tau * rng.normal();
        const double e2 = rho * u + tau * rng.normal();
        sample.latents.eps_a[i] = e1;
        sample.latents.eps_b[i] = e2;
        const double u1 = index.mn_x[0] * o.x + index.mn_d[0] * d + e1;
        const double u2 = index.mn_x[1] * o.x + index.mn_d[1] * d + e2;
        // Choice 0 has utility 0; ties resolve toward the smaller label.
        int choice = 0;
        double best = 0.0;
        if (u1 > best) { choice = 1; best = u1; }
        if (u2 > best) { choice = 2; }
        o.y = choice;
        break;
      }
      case Design::roy: {
        const double ea = rho * u + tau * rng.normal();
        const double eb = rho * u + tau * rng.normal();
        sample.latents.eps_a[i] = ea;
        sample.latents.eps_b[i] = eb;
        const double ya = index.roy_a_x * o.x + index.roy_a_d * d + ea;
        const double yb = index.roy_b_x * o.x + index.roy_b_d * d + eb;
        // Sector of the larger latent outcome; ties go to sector a.
        if (ya >= yb) {
          o.w = Sector::a;
          o.y = ya;
        } else {
          o.w = Sector::b;
          o.y = yb;
        }
        break;
      }
    }
  }
  return sample;
}

}  // namespace wsmatch
