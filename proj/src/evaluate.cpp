#include "penetrance/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "penetrance/common.hpp"
#include "penetrance/rng.hpp"

namespace penetrance {

std::vector<double> family_loglik_per_draw(const CohortData& data,
                                           const PosteriorSamples& samples,
                                           int family) {
  if (family < 0 || family >= data.family_count()) {
    throw DataError("family index out of range");
  }
  CohortEvaluator eval(data);
  PeelScratch scratch;
  std::vector<double> out;
  out.reserve(samples.draw_count());
  for (int d = 0; d < samples.draw_count(); ++d) {
    const ChainState st = state_from_draw(samples, d);
    out.push_back(eval.family_loglik(family, st, scratch));
  }
  return out;
}

double family_log_cpo(const CohortData& data, const PosteriorSamples& samples,
                      int family) {
  const auto ll = family_loglik_per_draw(data, samples, family);
  if (ll.empty()) throw DataError("no posterior draws");
  // log CPO = log L - logsumexp(-ll).
  double top = kNegInf;
  for (size_t d = 0; d < ll.size(); ++d) {
    if (ll[d] == kNegInf) {
      throw NumericError("CPO undefined: zero likelihood for family " +
                         data.family(family).pedigree.family_id() +
                         " at draw " + std::to_string(d));
    }
    top = std::max(top, -ll[d]);
  }
  double sum = 0.0;
  for (double v : ll) sum += std::exp(-v - top);
  return std::log(static_cast<double>(ll.size())) - (top + std::log(sum));
}

double psml(const CohortData& data, const PosteriorSamples& samples) {
  double total = 0.0;
  for (int i = 0; i < data.family_count(); ++i) {
    total += family_log_cpo(data, samples, i);
  }
  return total;
}

double dic(const CohortData& data, const PosteriorSamples& samples) {
  const int n = samples.draw_count();
  if (n == 0) throw DataError("no posterior draws");
  CohortEvaluator eval(data);
  ThreadPool pool(1);
  std::vector<double> per_family;

  double mean_deviance = 0.0;
  for (int d = 0; d < n; ++d) {
    const ChainState st = state_from_draw(samples, d);
    const double ll = eval.total_loglik(st, per_family, pool);
    if (!std::isfinite(ll)) {
      throw NumericError("non-finite deviance at draw " + std::to_string(d));
    }
    mean_deviance += -2.0 * ll / n;
  }

  // Plug-in state: arithmetic means for beta, log-scale means for the
  // positive parameters.
  const ModelSpec& spec = samples.spec;
  ChainState mean_state = state_from_draw(samples, 0);
  const int P = samples.param_count();
  std::vector<double> acc(P, 0.0);
  for (int d = 0; d < n; ++d) {
    for (int p = 0; p < P; ++p) {
      const double v = samples.value(d, p);
      acc[p] += samples.names[p].rfind("beta.", 0) == 0 ? v : std::log(v);
    }
  }
  int p = 0;
  for (int k = 0; k < spec.cause_count; ++k) {
    for (double& b : mean_state.beta[k]) b = acc[p++] / n;
    for (double& c : mean_state.coef[k]) c = std::exp(acc[p++] / n);
    if (samples.frailty_fitted) mean_state.nu[k] = std::exp(acc[p++] / n);
  }
  if (samples.frailty_fitted) {
    for (auto& fam_xi : mean_state.xi) {
      for (double& x : fam_xi) x = std::exp(acc[p++] / n);
    }
  }
  const double plug_in_deviance =
      -2.0 * eval.total_loglik(mean_state, per_family, pool);
  const double p_d = mean_deviance - plug_in_deviance;
  return mean_deviance + p_d;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw DataError("roc needs matching nonempty scores and labels");
  }
  long pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == 0) ++neg;
    else throw DataError("roc labels must be 0/1");
  }
  if (pos == 0 || neg == 0) {
    throw DataError("roc needs both positive and negative labels");
  }

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a] > scores[b];
  });

  RocCurve out;
  out.points.push_back({kInf, 0.0, 0.0});
  long tp = 0, fp = 0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // Consume the whole tie group: "score > psi" admits none of them at
    // psi = s, all of them just below.
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] == 1) ++tp;
      else ++fp;
      ++i;
    }
    const double fpr = static_cast<double>(fp) / neg;
    const double tpr = static_cast<double>(tp) / pos;
    out.auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    out.points.push_back({s, fpr, tpr});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return out;
}

CrossValidationResult cross_validated_roc(std::span<const Pedigree> cohort,
                                          const CrossValidationConfig& config) {
  if (cohort.size() < 2) throw DataError("cross-validation needs >= 2 families");
  if (config.repetitions < 1) throw DataError("repetitions must be >= 1");
  const int cause = config.cause;
  if (cause < 1 || cause > config.spec.cause_count) {
    throw DataError("roc cause outside model range");
  }

  CrossValidationResult result;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    auto rng = substream(config.seed, "cv-split", static_cast<std::uint64_t>(rep));
    std::vector<int> order(cohort.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const size_t half = cohort.size() / 2;

    std::vector<Pedigree> train;
    for (size_t i = 0; i < half; ++i) train.push_back(cohort[order[i]]);

    CohortData data = CohortData::build(std::move(train), config.spec);
    SamplerConfig sampler = config.sampler;
    sampler.seed = substream(config.seed, "cv-fit", rep)();
    const ChainResult fit = run_chains(data, config.priors, sampler);
    const double ts = fit.samples.spec.time_scale;
    if (config.t_c_years > ts) {
      throw DataError("t_c exceeds the fitted time range");
    }

    std::vector<double> scores;
    std::vector<int> labels;
    const std::vector<double> ages{config.t_c_years};
    for (size_t i = half; i < cohort.size(); ++i) {
      const Pedigree& fam = cohort[order[i]];
      // Risks for the whole family are produced member by member; each call
      // reuses the family history including the member's own record, per the
      // prediction protocol.
      for (int j = 0; j < fam.size(); ++j) {
        const Individual& m = fam.member(j);
        if (hazard_is_zero(config.spec.designs[cause - 1], 1, m.sex) &&
            hazard_is_zero(config.spec.designs[cause - 1], 0, m.sex)) {
          continue;  // can never experience this cause
        }
        int label;
        if (m.phenotype.cause == cause && m.phenotype.age <= config.t_c_years) {
          label = 1;
        } else if (m.phenotype.age > config.t_c_years ||
                   (m.phenotype.cause != 0 &&
                    m.phenotype.age <= config.t_c_years)) {
          label = 0;
        } else {
          continue;  // censored before t_c: outcome unknown
        }
        const RiskPrediction pred = predict_risk(
            fam, j, cause, ages, fit.samples, config.frailty_mode,
            substream(config.seed, "cv-predict", rep)(),
            config.prediction_draws);
        scores.push_back(pred.mean[0]);
        labels.push_back(label);
      }
    }
    RocCurve curve = roc_curve(scores, labels);
    result.aucs.push_back(curve.auc);
    result.curves.push_back(std::move(curve));
  }

  const int R = static_cast<int>(result.aucs.size());
  result.mean_auc =
      std::accumulate(result.aucs.begin(), result.aucs.end(), 0.0) / R;
  double ss = 0.0;
  for (double a : result.aucs) {
    ss += (a - result.mean_auc) * (a - result.mean_auc);
  }
  result.sd_auc = R > 1 ? std::sqrt(ss / (R - 1)) : 0.0;
  return result;
}

}  // namespace penetrance
