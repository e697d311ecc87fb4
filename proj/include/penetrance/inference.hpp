#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "penetrance/likelihood.hpp"

namespace penetrance {

struct PriorSpec {
  double beta_sd = 10.0;  // N(0, sd^2) per regression coefficient
  bool coef_flat = true;  // flat prior on nonnegative baseline coefficients,
  double coef_a = 1.0;    // else Gamma(a, b)
  double coef_b = 1.0;
  double nu_a = 0.01;  // Gamma prior on the frailty precision
  double nu_b = 0.01;
};

struct SamplerConfig {
  long iterations = 100000;
  long burn_in = 10000;
  int thin = 5;
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 1;
  bool prior_only = false;  // diagnostic: sample from the prior alone

  // Initial random-walk scales; adapted toward the target acceptance rate
  // during burn-in and frozen afterwards.
  double scale_beta = 0.3;
  double scale_coef = 0.4;
  double scale_nu = 0.8;
  double scale_xi = 0.6;
  double adapt_target = 0.234;

  void check() const;
};

struct PosteriorSamples {
  std::vector<std::string> names;     // scalar parameter names
  std::vector<double> draws;          // row-major, draw_count x names.size()
  std::vector<int> chain;             // chain id per draw
  std::vector<double> log_posterior;  // per draw
  std::vector<double> acceptance;     // per parameter
  ModelSpec spec;
  bool frailty_fitted = true;
  std::vector<std::string> family_ids;  // order of xi blocks

  int draw_count() const {
    return names.empty() ? 0 : static_cast<int>(draws.size() / names.size());
  }
  int param_count() const { return static_cast<int>(names.size()); }
  double value(int draw, int param) const {
    return draws[static_cast<size_t>(draw) * names.size() + param];
  }
  std::optional<int> index_of(const std::string& name) const;
};

// Scalar parameter names in chain-state order: beta.k.<term>, gamma.k.<m>,
// nu.k, xi.<family>.k.
std::vector<std::string> parameter_names(const CohortData& data);

ChainState initial_state(const CohortData& data);
ChainState state_from_draw(const PosteriorSamples& samples, int draw);
ModelParams params_from_state(const ModelSpec& spec, const ChainState& s);

double log_prior(const CohortData& data, const ChainState& s,
                 const PriorSpec& priors);
// Log posterior density (up to a constant); -inf off support.
double log_posterior(const CohortData& data, const ChainState& s,
                     const PriorSpec& priors);

// Serializable snapshot for deterministic chain resumption.
struct ChainCheckpoint {
  ChainState state;
  std::string rng;  // mt19937_64 stream state
  long iteration = 0;
  std::vector<double> scales;
  std::vector<double> accept_sum;
  std::vector<long> counts;
};

struct ChainResult {
  PosteriorSamples samples;
  ChainCheckpoint checkpoint;
};

ChainResult run_chain(const CohortData& data, const PriorSpec& priors,
                      const SamplerConfig& config,
                      const ChainCheckpoint* resume = nullptr,
                      int chain_id = 0);

// Runs config.chains independent chains (seed substreams) and concatenates
// the retained draws.
ChainResult run_chains(const CohortData& data, const PriorSpec& priors,
                       const SamplerConfig& config);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double rhat = 0.0;  // split-chain potential scale reduction; 0 if undefined
};

std::vector<SummaryRow> summarize(const PosteriorSamples& samples,
                                  double credible_level = 0.95);

// Linear-interpolation empirical quantile (R type 7) on a copy of xs.
double quantile(std::vector<double> xs, double p);

struct PenetranceCurve {
  std::vector<double> ages;  // years
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

// Pointwise posterior mean and credible band of the cause-k penetrance for
// one covariate cell, evaluated over at most max_draws equally spaced
// retained draws.
PenetranceCurve penetrance_posterior(const PosteriorSamples& samples, int cause,
                                     int carrier, Sex sex,
                                     std::span<const double> ages_years,
                                     double credible_level = 0.95,
                                     int max_draws = 500);

}  // namespace penetrance
