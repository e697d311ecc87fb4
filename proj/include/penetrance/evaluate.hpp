#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "penetrance/inference.hpp"
#include "penetrance/predict.hpp"

namespace penetrance {

// Ascertainment-corrected family log likelihood at every retained draw
// (including that draw's own frailty values).
std::vector<double> family_loglik_per_draw(const CohortData& data,
                                           const PosteriorSamples& samples,
                                           int family);

// Conditional predictive ordinate: the harmonic mean of the per-draw family
// likelihoods, returned on the log scale (the value itself can underflow for
// large families). Throws NumericError if any draw carries zero likelihood.
double family_log_cpo(const CohortData& data, const PosteriorSamples& samples,
                      int family);

// Pseudo-marginal log likelihood: sum of log CPO over families. Larger is
// better.
double psml(const CohortData& data, const PosteriorSamples& samples);

// Deviance information criterion with the plug-in at posterior means (log
// scale for the positive parameters). Smaller is better.
double dic(const CohortData& data, const PosteriorSamples& samples);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // staircase from (0,0) toward (1,1)
  double auc = 0.0;
};

// Threshold sweep over "score > psi"; ties grouped; trapezoidal AUC.
// Requires at least one positive and one negative label.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct CrossValidationConfig {
  double t_c_years = 50.0;
  int cause = 1;
  int repetitions = 20;
  std::uint64_t seed = 1;
  PriorSpec priors;
  SamplerConfig sampler;
  ModelSpec spec;  // time_scale ignored; set per training fit
  FrailtyMode frailty_mode = FrailtyMode::kIntegrate;
  int prediction_draws = 200;
};

struct CrossValidationResult {
  std::vector<RocCurve> curves;  // one per repetition
  std::vector<double> aucs;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
};

// Half-split protocol: fit on a random half of the families, score every
// eligible test-half member's cause-k risk at age t_c, label against the
// observed outcome (event of cause k by t_c = positive; event-free past t_c
// or other-cause event by t_c = negative; censored before t_c = excluded;
// members with a structurally zero hazard for cause k are excluded).
CrossValidationResult cross_validated_roc(std::span<const Pedigree> cohort,
                                          const CrossValidationConfig& config);

}  // namespace penetrance
