#pragma once

#include <array>

namespace penetrance {

// Latent three-state genotype at a biallelic autosomal-dominant locus.
// The observable carrier status collapses Hetero/MutHomo into one class.
enum Genotype : int {
  kWildHomo = 0,  // aa
  kHetero = 1,    // Aa
  kMutHomo = 2,   // AA
};
inline constexpr int kGenotypeCount = 3;

inline constexpr int carrier_of(int g) { return g == kWildHomo ? 0 : 1; }

// Hardy-Weinberg genotype distribution for founders.
struct FounderPrior {
  std::array<double, kGenotypeCount> p;

  double carrier_mass() const { return p[kHetero] + p[kMutHomo]; }
};

// allele_freq is the population frequency of the mutated allele, e.g. the
// TP53 default 0.0006. Must lie strictly inside (0, 1).
FounderPrior founder_prior(double allele_freq);

// Pr(carrier) = 1 - (1 - allele_freq)^2, exact.
double carrier_prevalence(double allele_freq);

// Mendelian segregation probability Pr(child | mother, father), no de-novo
// mutation. Sums to 1 over child states for each parent pair.
double transmission(int child, int mother, int father);

}  // namespace penetrance
