#include "penetrance/predict.hpp"

#include <cmath>
#include <numeric>

#include "penetrance/common.hpp"
#include "penetrance/rng.hpp"

namespace penetrance {

std::array<double, 2> carrier_probability(const Pedigree& p,
                                          const ModelParams& m,
                                          std::span<const double> xi,
                                          const FounderPrior& prior,
                                          int member) {
  if (member < 0 || member >= p.size()) {
    throw DataError("member index outside pedigree");
  }
  PeelContext ctx(p);
  const auto pens = build_member_factors(p, m, xi);
  const PeelMessages msgs = ctx.messages(pens, prior);
  const ScaledVec& a = msgs.anterior[member];
  const ScaledVec& post = msgs.posterior[member];
  const ScaledVec& pen = pens[member];
  double mass[3];
  double total = 0.0;
  for (int g = 0; g < 3; ++g) {
    mass[g] = a.v[g] * pen.v[g] * post.v[g];
    total += mass[g];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DataError("family " + p.family_id() +
                    ": carrier posterior has zero mass");
  }
  return {mass[kWildHomo] / total, (mass[kHetero] + mass[kMutHomo]) / total};
}

FrailtyMode frailty_mode_from_string(const std::string& name) {
  if (name == "integrate") return FrailtyMode::kIntegrate;
  if (name == "unit") return FrailtyMode::kUnit;
  throw UsageError("unknown frailty mode: " + name);
}

RiskPrediction predict_risk(const Pedigree& family, int member, int cause,
                            std::span<const double> ages_years,
                            const PosteriorSamples& samples, FrailtyMode mode,
                            std::uint64_t seed, int max_draws,
                            double credible_level) {
  const ModelSpec& spec = samples.spec;
  if (cause < 1 || cause > spec.cause_count) {
    throw DataError("cause index outside model range");
  }
  if (member < 0 || member >= family.size()) {
    throw DataError("member index outside pedigree");
  }
  const int n = samples.draw_count();
  if (n == 0) throw DataError("no posterior draws");
  const FounderPrior prior = founder_prior(spec.allele_freq);
  const Sex sex = family.member(member).sex;

  std::vector<double> grid;
  for (double a : ages_years) {
    if (a < 0.0 || a / spec.time_scale > 1.0 + 1e-12) {
      throw DataError("prediction age outside the fitted time range");
    }
    grid.push_back(std::min(a / spec.time_scale, 1.0));
  }
  const int G = static_cast<int>(grid.size());

  const int used = std::min(max_draws, n);
  RiskPrediction out;
  out.ages.assign(ages_years.begin(), ages_years.end());
  std::vector<std::vector<double>> risk(G);
  for (auto& r : risk) r.reserve(used);

  const int K = spec.cause_count;
  for (int i = 0; i < used; ++i) {
    const int draw = static_cast<int>(static_cast<long>(i) * n / used);
    const ChainState st = state_from_draw(samples, draw);
    const ModelParams params = params_from_state(spec, st);

    std::vector<double> xi(K, 1.0);
    if (spec.frailty && mode == FrailtyMode::kIntegrate) {
      auto rng = substream(seed, "predict-xi", static_cast<std::uint64_t>(draw));
      for (int k = 0; k < K; ++k) {
        std::gamma_distribution<double> gamma(st.nu[k], 1.0 / st.nu[k]);
        xi[k] = gamma(rng);
      }
    }

    const auto w = carrier_probability(family, params, xi, prior, member);
    out.mean_carrier_weights[0] += w[0] / used;
    out.mean_carrier_weights[1] += w[1] / used;

    const auto q0 = penetrance_grid(params, 0, sex, grid);
    const auto q1 = penetrance_grid(params, 1, sex, grid);
    const size_t off = static_cast<size_t>(cause - 1) * G;
    for (int g = 0; g < G; ++g) {
      risk[g].push_back(w[0] * q0[off + g] + w[1] * q1[off + g]);
    }
  }

  const double tail = 0.5 * (1.0 - credible_level);
  for (int g = 0; g < G; ++g) {
    out.mean.push_back(
        std::accumulate(risk[g].begin(), risk[g].end(), 0.0) / used);
    out.lo.push_back(quantile(risk[g], tail));
    out.hi.push_back(quantile(risk[g], 1.0 - tail));
  }
  return out;
}

}  // namespace penetrance
