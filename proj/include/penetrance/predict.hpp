#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "penetrance/inference.hpp"
#include "penetrance/peeling.hpp"

namespace penetrance {

// Posterior carrier distribution of one member given the family's phenotype
// history and observed genotypes: the normalized pivot product of the
// peeling messages, collapsed to carrier status. Index 0 = non-carrier.
std::array<double, 2> carrier_probability(const Pedigree& p,
                                          const ModelParams& m,
                                          std::span<const double> xi,
                                          const FounderPrior& prior,
                                          int member);

// How to handle the unobserved frailty of a family that was not part of the
// fit: draw from its Gamma(nu, nu) prior per posterior draw, or fix at 1.
enum class FrailtyMode { kIntegrate, kUnit };

FrailtyMode frailty_mode_from_string(const std::string& name);

struct RiskPrediction {
  std::vector<double> ages;  // years
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
  std::array<double, 2> mean_carrier_weights{0.0, 0.0};
};

// Cause-specific risk for one member: per posterior draw the carrier-weighted
// penetrance mixture, summarized pointwise over draws.
RiskPrediction predict_risk(const Pedigree& family, int member, int cause,
                            std::span<const double> ages_years,
                            const PosteriorSamples& samples,
                            FrailtyMode mode = FrailtyMode::kIntegrate,
                            std::uint64_t seed = 0, int max_draws = 500,
                            double credible_level = 0.95);

}  // namespace penetrance
