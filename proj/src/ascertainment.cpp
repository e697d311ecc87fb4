#include "penetrance/ascertainment.hpp"

#include <cmath>
#include <string>

#include "penetrance/common.hpp"
#include "penetrance/peeling.hpp"

namespace penetrance {

double ascertainment_probability(const ModelParams& m, std::span<const double> xi,
                                 Sex proband_sex, double proband_time,
                                 const AscertainmentRule& rule,
                                 const FounderPrior& prior) {
  const int k = rule.qualifying_cause - 1;
  if (k < 0 || k >= m.cause_count()) {
    throw DataError("ascertainment cause outside model range");
  }
  if (!(proband_time > 0.0 && proband_time <= 1.0)) {
    throw DataError("proband time must lie in (0,1] after rescaling");
  }
  const double pr_carrier = prior.carrier_mass();
  const double pr_g[2] = {1.0 - pr_carrier, pr_carrier};
  double total = 0.0;
  for (int g = 0; g < 2; ++g) {
    const double xi_k = xi.empty() ? 1.0 : xi[k];
    const double lam = cause_hazard(m, k, g, proband_sex, xi_k, proband_time);
    if (lam <= 0.0) continue;
    double cum = 0.0;
    for (int j = 0; j < m.cause_count(); ++j) {
      cum += conditional_cumulative_hazard(m, j, g, proband_sex,
                                           xi.empty() ? 1.0 : xi[j],
                                           proband_time);
    }
    total += pr_g[g] * lam * std::exp(-cum);
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError(
        "degenerate ascertainment probability (" + std::to_string(total) +
        ") for qualifying cause " + std::to_string(rule.qualifying_cause));
  }
  return total;
}

double corrected_family_log_likelihood(const Pedigree& p, const ModelParams& m,
                                       std::span<const double> xi,
                                       const AscertainmentRule& rule,
                                       const FounderPrior& prior) {
  const Individual& proband = p.member(p.proband());
  if (proband.phenotype.cause != rule.qualifying_cause) {
    throw DataError("family " + p.family_id() +
                    ": proband does not satisfy the ascertainment rule");
  }
  const double ll = family_log_likelihood(p, m, xi, prior);
  const double prob = ascertainment_probability(
      m, xi, proband.sex, proband.phenotype.age / m.time_scale, rule, prior);
  return ll - std::log(prob);
}

}  // namespace penetrance
