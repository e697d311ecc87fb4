#include "penetrance/genetics.hpp"

#include "penetrance/common.hpp"

namespace penetrance {

namespace {

// Probability that a parent with the given genotype transmits the mutated
// allele.
constexpr double kTransmitMut[kGenotypeCount] = {0.0, 0.5, 1.0};

}  // namespace

FounderPrior founder_prior(double allele_freq) {
  if (!(allele_freq > 0.0 && allele_freq < 1.0)) {
    throw DataError("allele frequency must be in (0,1)");
  }
  const double q = 1.0 - allele_freq;
  return FounderPrior{{q * q, 2.0 * allele_freq * q, allele_freq * allele_freq}};
}

double carrier_prevalence(double allele_freq) {
  const double q = 1.0 - allele_freq;
  return 1.0 - q * q;
}

double transmission(int child, int mother, int father) {
  const double pm = kTransmitMut[mother];
  const double pf = kTransmitMut[father];
  switch (child) {
    case kWildHomo:
      return (1.0 - pm) * (1.0 - pf);
    case kHetero:
      return pm * (1.0 - pf) + (1.0 - pm) * pf;
    case kMutHomo:
      return pm * pf;
    default:
      return 0.0;
  }
}

}  // namespace penetrance
