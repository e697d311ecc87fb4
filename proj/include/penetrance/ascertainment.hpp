#pragma once

#include <span>

#include "penetrance/genetics.hpp"
#include "penetrance/pedigree.hpp"
#include "penetrance/riskmodel.hpp"

namespace penetrance {

// Families enter the study only when the proband's first event is of the
// qualifying cause (default cause 2, sarcoma).
struct AscertainmentRule {
  int qualifying_cause = 2;
};

// Density-scale probability that a family with this proband would have been
// ascertained, conditional on the family frailty:
//   sum_{G in {0,1}} Pr(G) * hazard_k*(Y | G, X, xi) * exp(-sum_k cumhaz_k)
// evaluated at the proband's observed age. The proband's genotype is always
// marginalized over the founder prior; the ascertainment event is defined on
// phenotype alone.
double ascertainment_probability(const ModelParams& m, std::span<const double> xi,
                                 Sex proband_sex, double proband_time,
                                 const AscertainmentRule& rule,
                                 const FounderPrior& prior);

// family_log_likelihood minus log ascertainment_probability. The proband's
// phenotype must satisfy the rule.
double corrected_family_log_likelihood(const Pedigree& p, const ModelParams& m,
                                       std::span<const double> xi,
                                       const AscertainmentRule& rule,
                                       const FounderPrior& prior);

}  // namespace penetrance
