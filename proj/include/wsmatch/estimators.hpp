#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>

#include "wsmatch/matching.hpp"

namespace wsmatch {

enum class Estimator { ckt_ate, ckt_ate_weighted, vy_infeasible, rc_dte };

const char* to_string(Estimator estimator);
// Accepts the short CLI names ckt, ckt-w, vy, rc and the report names
// CKT_ATE, CKT_ATE_WEIGHTED, VY_INFEASIBLE, RC_DTE (case-insensitive).
std::optional<Estimator> parse_estimator(std::string_view text);

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimateReport {
  Estimator estimator = Estimator::ckt_ate;
  DesignSpec spec;             // provenance of the sample
  double value = 0.0;
  double target = std::numeric_limits<double>::quiet_NaN();  // NaN when unknown
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;   // n_used + n_dropped == sample size
};

// Optional side-channel filled by ate_ckt for diagnostics dumps.
struct CktDiagnostics {
  Sample canonical;
  HGrid grid;
  std::vector<MatchResult> matches;
};

// Treatment-arm mean estimator: average of D_i Y_i + (1-D_i) Yhat_i over
// usable observations, with Yhat imputed by distribution matching.  Unusable
// untreated observations (trimmed out / incomparable / no kernel mass) are
// dropped and counted.  Throws EstimationError when untreated observations
// exist but none is usable.
EstimateReport ate_ckt(const Sample& sample, const EstimatorConfig& config,
                       CktDiagnostics* diagnostics = nullptr);

// Same, restricted to X in [a_low, a_high]; observations outside count as
// dropped.  Throws EstimationError when the window is empty of usable
// observations.
EstimateReport ate_ckt_weighted(const Sample& sample, const EstimatorConfig& config, double a_low,
                                double a_high);

// Infeasible mean-matching baseline: the matched x-tilde minimizes the
// squared discrepancy of closed-form conditional-mean fingerprints
// m_d(x, p1, p2) = integral over [p2, p1] of E[g | U = Phi^{-1}(t)] dt over a
// 2001-point candidate grid spanning mean(X) +/- 4 sd(X); imputation then
// kernel-weights donors around (x-tilde, P_i).  Matching on means only is the
// point: it inherits the monotonicity requirement this distribution-matching
// estimator drops.
EstimateReport ate_vy_infeasible(const Sample& sample, Design design, double rho,
                                 const EstimatorConfig& config);

struct THatResult {
  double t = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;  // false on flagged cells or a flat objective
};

// Grid-interpolated argmin_t of (h1(x,y,p1,p2) - h0(x,t,p1,p2))^2 over the
// grid's y range: coarse pass on the y points, golden-section refinement to
// width 1e-8, ties toward the smallest t.  Exact on population grids.
THatResult rc_t_hat(const HGrid& grid, double x, double y, double p1, double p2);

// Average of the pairwise inversions t-hat over ordered pairs P_i > P_j of
// trimmed-in observations.  On samples, h1 and h0(t) are evaluated directly
// from the kernel sums (h0 is a step function of t jumping at untreated Y
// values), and each pairwise argmin is enumerated exactly over the jump set
// rather than interpolated on the coarse y grid; the grid argument supplies
// the t clamp range.  Throws EstimationError when no valid pair exists.
double rc_tau(const Sample& sample, const HGrid& grid, const EstimatorConfig& config, double x,
              double y);

// Distributional effect estimate P(Y_1 <= y): treated observations contribute
// 1{Y_i <= y}, untreated trimmed-in ones 1{Y_i <= tau(X_i, y)}.
EstimateReport rc_dte(const Sample& sample, const EstimatorConfig& config, double y);

// Infeasible rc benchmark using the closed-form threshold t(x, y) = y - 1 - x.
double rc_dte_infeasible(const Sample& sample, double y);

struct TheoremOneVariance {
  double v = 0.0;
  double var_conditional_mean = 0.0;
  double expected_p_weighted_var = 0.0;
};

// V = Var(E[Y_1|X,P,D]) + E[P Var(Y_1|X,P,D=1)] by simulation with
// closed-form inner moments (truncated-normal algebra), for comparison with
// n Var(estimator) from the Monte Carlo harness.
TheoremOneVariance theorem1_variance(Design design, double rho, std::uint64_t draws = 10000000,
                                     std::uint64_t seed = 97);

// CSV: estimator,design,rho,n,seed,value,target,n_used,n_dropped.
void write_report_csv(std::ostream& out, std::span<const EstimateReport> reports);

}  // namespace wsmatch
