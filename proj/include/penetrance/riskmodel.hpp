#pragma once

#include <optional>
#include <span>
#include <vector>

#include "penetrance/baseline.hpp"
#include "penetrance/pedigree.hpp"

namespace penetrance {

// Predicate over (carrier status, sex) under which a cause's hazard is
// identically zero. Present fields must all match for the rule to fire; the
// default use is "no breast cancer hazard for males".
struct ZeroHazardRule {
  std::optional<Sex> sex;
  std::optional<int> carrier;

  bool fires(int carrier_status, Sex s) const {
    if (sex && *sex != s) return false;
    if (carrier && *carrier != carrier_status) return false;
    return sex.has_value() || carrier.has_value();
  }
};

// Covariate terms available to a cause-specific hazard. The full design is
// (carrier, male, carrier*male); constrained causes may use a subset.
enum class CovTerm { kCarrier, kMale, kInteraction };

struct CauseDesign {
  std::vector<CovTerm> terms{CovTerm::kCarrier, CovTerm::kMale,
                             CovTerm::kInteraction};
  std::optional<ZeroHazardRule> zero_hazard;

  int dim() const { return static_cast<int>(terms.size()); }
};

double covariate_value(CovTerm term, int carrier, Sex sex);
double linear_predictor(const CauseDesign& design, std::span<const double> beta,
                        int carrier, Sex sex);
bool hazard_is_zero(const CauseDesign& design, int carrier, Sex sex);

struct CauseParams {
  std::vector<double> beta;
  Baseline baseline;
  double frailty_precision = 1.0;  // Gamma(v, v) frailty; variance 1/v
};

struct ModelParams {
  std::vector<CauseDesign> designs;
  std::vector<CauseParams> causes;
  bool frailty = true;
  double time_scale = 1.0;  // years corresponding to rescaled t = 1

  int cause_count() const { return static_cast<int>(causes.size()); }
  void check() const;
};

// Conditional-on-frailty cause-specific hazard and cumulative hazard at
// rescaled time t. xi_k is this family's frailty for cause k (1 when the
// model has no frailty).
double cause_hazard(const ModelParams& m, int k, int carrier, Sex sex,
                    double xi_k, double t);
double conditional_cumulative_hazard(const ModelParams& m, int k, int carrier,
                                     Sex sex, double xi_k, double t);

// Frailty-marginal survival for cause k: [v/(v + L*(t))]^v with
// L*(t) = exp(beta'Z) * cumulative_baseline(t), or exp(-L*) without frailty.
double marginal_cause_survival(const ModelParams& m, int k, int carrier,
                               Sex sex, double t);
double overall_survival(const ModelParams& m, int carrier, Sex sex, double t);

// Probability of a cause-k event by rescaled time t before any competing
// cause, frailty integrated out. Deterministic Gauss-Legendre quadrature
// with an order-doubling error check; throws NumericError if the estimate
// exceeds tol.
double cause_penetrance(const ModelParams& m, int k, int carrier, Sex sex,
                        double t, int quad_order = 64, double tol = 1e-6);
double overall_penetrance(const ModelParams& m, int carrier, Sex sex, double t,
                          int quad_order = 64, double tol = 1e-6);

// Evaluates all causes' penetrance along an increasing grid of rescaled
// times in one pass (composite quadrature per segment). Returns
// grid.size() x K values, cause-major: out[k * grid.size() + i].
std::vector<double> penetrance_grid(const ModelParams& m, int carrier, Sex sex,
                                    std::span<const double> grid,
                                    int nodes_per_segment = 16);

struct EventRecord {
  double time = 0.0;  // rescaled
  int cause = 0;
};

// log Pr(H | Z, xi) = sum_k [ d_k log hazard_k(Y) - cumhaz_k(Y) ]. Returns
// -inf when the observed event has structurally zero hazard. xi may be empty
// (treated as all ones).
double individual_log_likelihood(const ModelParams& m, int carrier, Sex sex,
                                 const EventRecord& rec,
                                 std::span<const double> xi);

}  // namespace penetrance
