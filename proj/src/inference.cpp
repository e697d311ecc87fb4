#include "penetrance/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "penetrance/common.hpp"
#include "penetrance/rng.hpp"

namespace penetrance {

void SamplerConfig::check() const {
  if (iterations < 1) throw DataError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw DataError("burn_in must lie in [0, iterations)");
  }
  if (thin < 1) throw DataError("thin must be >= 1");
  if (chains < 1) throw DataError("chains must be >= 1");
  if (threads < 1) throw DataError("threads must be >= 1");
}

namespace {

std::string term_name(CovTerm t) {
  switch (t) {
    case CovTerm::kCarrier:
      return "G";
    case CovTerm::kMale:
      return "X";
    case CovTerm::kInteraction:
      return "GxX";
  }
  return "?";
}

constexpr double kLogRangeGuard = 600.0;

}  // namespace

std::vector<std::string> parameter_names(const CohortData& data) {
  const ModelSpec& spec = data.spec();
  std::vector<std::string> names;
  for (int k = 0; k < spec.cause_count; ++k) {
    const std::string ck = std::to_string(k + 1);
    for (const CovTerm t : spec.designs[k].terms) {
      names.push_back("beta." + ck + "." + term_name(t));
    }
    for (int m = 1; m <= spec.baseline.param_count; ++m) {
      names.push_back("gamma." + ck + "." + std::to_string(m));
    }
    if (spec.frailty) names.push_back("nu." + ck);
  }
  if (spec.frailty) {
    for (const FamilyUnit& fam : data.families()) {
      for (int k = 0; k < spec.cause_count; ++k) {
        names.push_back("xi." + fam.pedigree.family_id() + "." +
                        std::to_string(k + 1));
      }
    }
  }
  return names;
}

std::optional<int> PosteriorSamples::index_of(const std::string& name) const {
  for (int i = 0; i < param_count(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

ChainState initial_state(const CohortData& data) {
  const ModelSpec& spec = data.spec();
  const int K = spec.cause_count;
  ChainState s;
  s.beta.resize(K);
  s.coef.resize(K);
  s.nu.assign(K, 1.0);
  for (int k = 0; k < K; ++k) {
    s.beta[k].assign(spec.designs[k].dim(), 0.0);
  }

  // Crude pooled rate per cause: events / person-time on the rescaled axis.
  std::vector<double> rate(K, 0.0);
  double person_time = 0.0;
  for (const FamilyUnit& fam : data.families()) {
    for (const MemberRow& row : fam.rows) {
      person_time += row.time;
      if (row.cause >= 1) rate[row.cause - 1] += 1.0;
    }
  }
  for (int k = 0; k < K; ++k) {
    const double est =
        person_time > 0.0 ? std::max(rate[k] / person_time, 0.01) : 0.1;
    const int P = spec.baseline.param_count;
    switch (spec.baseline.kind) {
      case BaselineKind::kBernstein:
        s.coef[k].assign(P, est / P);
        break;
      case BaselineKind::kExponential:
        s.coef[k].assign(1, est);
        break;
      case BaselineKind::kWeibull:
        s.coef[k] = {est, 1.0};
        break;
      case BaselineKind::kPiecewiseConstant:
        s.coef[k].assign(P, est);
        break;
    }
  }
  if (spec.frailty) {
    s.xi.assign(data.family_count(), std::vector<double>(K, 1.0));
  }
  return s;
}

ModelParams params_from_state(const ModelSpec& spec, const ChainState& s) {
  ModelParams m;
  m.designs = spec.designs;
  m.frailty = spec.frailty;
  m.time_scale = spec.time_scale;
  for (int k = 0; k < spec.cause_count; ++k) {
    m.causes.push_back(CauseParams{
        s.beta[k], Baseline(spec.baseline, s.coef[k]),
        spec.frailty ? s.nu[k] : 1.0});
  }
  m.check();
  return m;
}

ChainState state_from_draw(const PosteriorSamples& samples, int draw) {
  const ModelSpec& spec = samples.spec;
  const int K = spec.cause_count;
  ChainState s;
  s.beta.resize(K);
  s.coef.resize(K);
  s.nu.assign(K, 1.0);
  int p = 0;
  for (int k = 0; k < K; ++k) {
    s.beta[k].resize(spec.designs[k].dim());
    for (double& b : s.beta[k]) b = samples.value(draw, p++);
    s.coef[k].resize(spec.baseline.param_count);
    for (double& c : s.coef[k]) c = samples.value(draw, p++);
    if (samples.frailty_fitted) s.nu[k] = samples.value(draw, p++);
  }
  if (samples.frailty_fitted) {
    const int I = static_cast<int>(samples.family_ids.size());
    s.xi.assign(I, std::vector<double>(K, 1.0));
    for (int i = 0; i < I; ++i) {
      for (int k = 0; k < K; ++k) s.xi[i][k] = samples.value(draw, p++);
    }
  }
  return s;
}

namespace {

bool state_in_support(const CohortData& data, const ChainState& s) {
  const ModelSpec& spec = data.spec();
  if (static_cast<int>(s.beta.size()) != spec.cause_count) return false;
  for (int k = 0; k < spec.cause_count; ++k) {
    for (double b : s.beta[k]) {
      if (!std::isfinite(b)) return false;
    }
    for (double c : s.coef[k]) {
      if (!(c >= 0.0) || !std::isfinite(c)) return false;
    }
    if (spec.baseline.kind == BaselineKind::kWeibull && !(s.coef[k][1] > 0.0)) {
      return false;
    }
    if (spec.frailty && !(s.nu[k] > 0.0)) return false;
  }
  if (spec.frailty) {
    for (const auto& fam_xi : s.xi) {
      for (double x : fam_xi) {
        if (!(x > 0.0)) return false;
      }
    }
  }
  return true;
}

}  // namespace

double log_prior(const CohortData& data, const ChainState& s,
                 const PriorSpec& priors) {
  const ModelSpec& spec = data.spec();
  double lp = 0.0;
  for (int k = 0; k < spec.cause_count; ++k) {
    for (double b : s.beta[k]) lp += normal_log_pdf(b, 0.0, priors.beta_sd);
    if (!priors.coef_flat) {
      for (double c : s.coef[k]) {
        lp += gamma_log_pdf(c, priors.coef_a, priors.coef_b);
      }
    }
    if (spec.frailty) {
      lp += gamma_log_pdf(s.nu[k], priors.nu_a, priors.nu_b);
    }
  }
  if (spec.frailty) {
    for (const auto& fam_xi : s.xi) {
      for (int k = 0; k < spec.cause_count; ++k) {
        lp += gamma_log_pdf(fam_xi[k], s.nu[k], s.nu[k]);
      }
    }
  }
  return lp;
}

double log_posterior(const CohortData& data, const ChainState& s,
                     const PriorSpec& priors) {
  if (!state_in_support(data, s)) return kNegInf;
  const double lp = log_prior(data, s, priors);
  if (lp == kNegInf) return kNegInf;
  ThreadPool pool(1);
  CohortEvaluator eval(data);
  std::vector<double> per_family;
  const double ll = eval.total_loglik(s, per_family, pool);
  return ll + lp;
}

namespace {

// One random-walk Metropolis-within-Gibbs chain over the layout
// [per cause: beta components, baseline coefficients, nu] then xi per family,
// matching parameter_names order.
class Sampler {
 public:
  Sampler(const CohortData& data, const PriorSpec& priors,
          const SamplerConfig& cfg, const ChainCheckpoint* resume, int chain_id)
      : data_(data),
        priors_(priors),
        cfg_(cfg),
        eval_(data),
        pool_(cfg.threads),
        names_(parameter_names(data)) {
    const int P = static_cast<int>(names_.size());
    scales_.resize(P);
    accept_sum_.assign(P, 0.0);
    counts_.assign(P, 0);
    int p = 0;
    const ModelSpec& spec = data.spec();
    for (int k = 0; k < spec.cause_count; ++k) {
      for (int c = 0; c < spec.designs[k].dim(); ++c) {
        scales_[p++] = cfg.scale_beta;
      }
      for (int m = 0; m < spec.baseline.param_count; ++m) {
        scales_[p++] = cfg.scale_coef;
      }
      if (spec.frailty) scales_[p++] = cfg.scale_nu;
    }
    if (spec.frailty) {
      for (int i = 0; i < data.family_count(); ++i) {
        for (int k = 0; k < spec.cause_count; ++k) {
          scales_[p++] = cfg.scale_xi;
        }
      }
    }

    if (resume) {
      state_ = resume->state;
      std::istringstream in(resume->rng);
      in >> rng_;
      if (!in) throw DataError("corrupt rng state in resume checkpoint");
      start_iteration_ = resume->iteration;
      scales_ = resume->scales;
      accept_sum_ = resume->accept_sum;
      counts_ = resume->counts;
      if (static_cast<int>(scales_.size()) != P) {
        throw DataError("resume checkpoint does not match this model");
      }
    } else {
      state_ = initial_state(data);
      rng_ = substream(cfg.seed, "chain", static_cast<std::uint64_t>(chain_id));
      start_iteration_ = 0;
    }

    if (cfg_.prior_only) {
      cur_ll_.assign(data.family_count(), 0.0);
      cur_total_ = 0.0;
    } else {
      cur_total_ = eval_.total_loglik(state_, cur_ll_, pool_);
      if (!std::isfinite(cur_total_)) {
        throw NumericError(
            "non-finite log-likelihood at initialization; check data/model "
            "consistency (total = " + std::to_string(cur_total_) + ")");
      }
    }
  }

  ChainResult run(int chain_id) {
    const ModelSpec& spec = data_.spec();
    const long total_iters = cfg_.iterations;
    PosteriorSamples out;
    out.names = names_;
    out.spec = spec;
    out.frailty_fitted = spec.frailty;
    for (const FamilyUnit& fam : data_.families()) {
      out.family_ids.push_back(fam.pedigree.family_id());
    }

    for (long t = start_iteration_ + 1; t <= total_iters; ++t) {
      iteration_ = t;
      int p = 0;
      for (int k = 0; k < spec.cause_count; ++k) {
        for (int c = 0; c < spec.designs[k].dim(); ++c) {
          update_beta(k, c, p++);
        }
        for (int m = 0; m < spec.baseline.param_count; ++m) {
          update_coef(k, m, p++);
        }
        if (spec.frailty) update_nu(k, p++);
      }
      if (spec.frailty) {
        for (int i = 0; i < data_.family_count(); ++i) {
          for (int k = 0; k < spec.cause_count; ++k) {
            update_xi(i, k, p++);
          }
        }
        refresh_total();
      }
      if (t > cfg_.burn_in && (t - cfg_.burn_in) % cfg_.thin == 0) {
        record(out, chain_id);
      }
    }

    ChainResult result;
    result.samples = std::move(out);
    result.checkpoint.state = state_;
    std::ostringstream os;
    os << rng_;
    result.checkpoint.rng = os.str();
    result.checkpoint.iteration = total_iters;
    result.checkpoint.scales = scales_;
    result.checkpoint.accept_sum = accept_sum_;
    result.checkpoint.counts = counts_;
    for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
      result.samples.acceptance.push_back(
          counts_[i] > 0 ? accept_sum_[i] / counts_[i] : 0.0);
    }
    return result;
  }

 private:
  double draw_normal() {
    double u1 = (rng_() >> 11) * 0x1.0p-53;
    const double u2 = (rng_() >> 11) * 0x1.0p-53;
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  double draw_uniform() { return (rng_() >> 11) * 0x1.0p-53; }

  void adapt(int p, double alpha) {
    accept_sum_[p] += alpha;
    ++counts_[p];
    if (iteration_ <= cfg_.burn_in) {
      const double rate = 1.0 / std::pow(static_cast<double>(counts_[p]), 0.6);
      scales_[p] *= std::exp(rate * (alpha - cfg_.adapt_target));
      scales_[p] = std::clamp(scales_[p], 1e-5, 1e3);
    }
  }

  template <class Undo, class Commit>
  void finish_metropolis(int p, double delta, Undo&& undo, Commit&& commit) {
    double alpha = 0.0;
    if (std::isfinite(delta)) {
      alpha = delta >= 0.0 ? 1.0 : std::exp(delta);
    } else if (delta == kInf) {
      alpha = 1.0;
    }
    if (draw_uniform() < alpha) {
      commit();
    } else {
      undo();
    }
    adapt(p, alpha);
  }

  // Proposal over all families: beta component c of cause k.
  void update_beta(int k, int c, int p) {
    const double old = state_.beta[k][c];
    state_.beta[k][c] = old + scales_[p] * draw_normal();
    double delta = normal_log_pdf(state_.beta[k][c], 0.0, priors_.beta_sd) -
                   normal_log_pdf(old, 0.0, priors_.beta_sd);
    double new_total = cur_total_;
    if (!cfg_.prior_only) {
      new_total = eval_.total_loglik(state_, prop_ll_, pool_);
      delta += new_total - cur_total_;
    }
    finish_metropolis(
        p, delta, [&] { state_.beta[k][c] = old; },
        [&] {
          if (!cfg_.prior_only) {
            cur_total_ = new_total;
            std::swap(cur_ll_, prop_ll_);
          }
        });
  }

  void update_coef(int k, int m, int p) {
    if (cfg_.prior_only && priors_.coef_flat) return;  // improper target
    const double old = state_.coef[k][m];
    const double step = scales_[p] * draw_normal();
    const double proposed = old * std::exp(step);
    if (std::fabs(std::log(proposed)) > kLogRangeGuard) {
      adapt(p, 0.0);
      return;
    }
    state_.coef[k][m] = proposed;
    double delta = step;  // log-scale Jacobian
    if (!priors_.coef_flat) {
      delta += gamma_log_pdf(proposed, priors_.coef_a, priors_.coef_b) -
               gamma_log_pdf(old, priors_.coef_a, priors_.coef_b);
    }
    double new_total = cur_total_;
    if (!cfg_.prior_only) {
      new_total = eval_.total_loglik(state_, prop_ll_, pool_);
      delta += new_total - cur_total_;
    }
    finish_metropolis(
        p, delta, [&] { state_.coef[k][m] = old; },
        [&] {
          if (!cfg_.prior_only) {
            cur_total_ = new_total;
            std::swap(cur_ll_, prop_ll_);
          }
        });
  }

  // nu's conditional involves only its prior and the frailty prior terms.
  void update_nu(int k, int p) {
    const double old = state_.nu[k];
    const double step = scales_[p] * draw_normal();
    const double proposed = old * std::exp(step);
    if (std::fabs(std::log(proposed)) > kLogRangeGuard) {
      adapt(p, 0.0);
      return;
    }
    double delta = step + gamma_log_pdf(proposed, priors_.nu_a, priors_.nu_b) -
                   gamma_log_pdf(old, priors_.nu_a, priors_.nu_b);
    for (const auto& fam_xi : state_.xi) {
      delta += gamma_log_pdf(fam_xi[k], proposed, proposed) -
               gamma_log_pdf(fam_xi[k], old, old);
    }
    finish_metropolis(
        p, delta, [] {}, [&] { state_.nu[k] = proposed; });
  }

  void update_xi(int i, int k, int p) {
    const double old = state_.xi[i][k];
    const double step = scales_[p] * draw_normal();
    const double proposed = old * std::exp(step);
    if (std::fabs(std::log(proposed)) > kLogRangeGuard) {
      adapt(p, 0.0);
      return;
    }
    const double nu = state_.nu[k];
    state_.xi[i][k] = proposed;
    double delta = step + gamma_log_pdf(proposed, nu, nu) -
                   gamma_log_pdf(old, nu, nu);
    double new_ll = 0.0;
    if (!cfg_.prior_only) {
      new_ll = eval_.family_loglik(i, state_, scratch_);
      delta += new_ll - cur_ll_[i];
    }
    finish_metropolis(
        p, delta, [&] { state_.xi[i][k] = old; },
        [&] {
          if (!cfg_.prior_only) cur_ll_[i] = new_ll;
        });
  }

  void refresh_total() {
    if (cfg_.prior_only) return;
    cur_total_ = std::accumulate(cur_ll_.begin(), cur_ll_.end(), 0.0);
  }

  void record(PosteriorSamples& out, int chain_id) {
    const ModelSpec& spec = data_.spec();
    for (int k = 0; k < spec.cause_count; ++k) {
      for (double b : state_.beta[k]) out.draws.push_back(b);
      for (double c : state_.coef[k]) out.draws.push_back(c);
      if (spec.frailty) out.draws.push_back(state_.nu[k]);
    }
    if (spec.frailty) {
      for (const auto& fam_xi : state_.xi) {
        for (double x : fam_xi) out.draws.push_back(x);
      }
    }
    out.chain.push_back(chain_id);
    out.log_posterior.push_back(cur_total_ + log_prior(data_, state_, priors_));
  }

  const CohortData& data_;
  const PriorSpec& priors_;
  SamplerConfig cfg_;
  CohortEvaluator eval_;
  ThreadPool pool_;
  std::vector<std::string> names_;
  ChainState state_;
  std::mt19937_64 rng_;
  std::vector<double> scales_, accept_sum_;
  std::vector<long> counts_;
  std::vector<double> cur_ll_, prop_ll_;
  double cur_total_ = 0.0;
  long iteration_ = 0;
  long start_iteration_ = 0;
  PeelScratch scratch_;
};

}  // namespace

ChainResult run_chain(const CohortData& data, const PriorSpec& priors,
                      const SamplerConfig& config, const ChainCheckpoint* resume,
                      int chain_id) {
  config.check();
  Sampler sampler(data, priors, config, resume, chain_id);
  return sampler.run(chain_id);
}

ChainResult run_chains(const CohortData& data, const PriorSpec& priors,
                       const SamplerConfig& config) {
  config.check();
  ChainResult combined = run_chain(data, priors, config, nullptr, 0);
  for (int c = 1; c < config.chains; ++c) {
    ChainResult next = run_chain(data, priors, config, nullptr, c);
    combined.samples.draws.insert(combined.samples.draws.end(),
                                  next.samples.draws.begin(),
                                  next.samples.draws.end());
    combined.samples.chain.insert(combined.samples.chain.end(),
                                  next.samples.chain.begin(),
                                  next.samples.chain.end());
    combined.samples.log_posterior.insert(combined.samples.log_posterior.end(),
                                          next.samples.log_posterior.begin(),
                                          next.samples.log_posterior.end());
    combined.checkpoint = std::move(next.checkpoint);
  }
  return combined;
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw DataError("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - lo) * (xs[lo + 1] - xs[lo]);
}

std::vector<SummaryRow> summarize(const PosteriorSamples& samples,
                                  double credible_level) {
  if (samples.draw_count() == 0) throw DataError("no posterior draws");
  if (!(credible_level > 0.0 && credible_level < 1.0)) {
    throw DataError("credible level must be in (0,1)");
  }
  const int n = samples.draw_count();
  const int P = samples.param_count();
  const double tail = 0.5 * (1.0 - credible_level);

  // Split each chain in half for the potential scale reduction factor.
  std::vector<int> chain_ids(samples.chain);
  std::sort(chain_ids.begin(), chain_ids.end());
  chain_ids.erase(std::unique(chain_ids.begin(), chain_ids.end()),
                  chain_ids.end());

  std::vector<SummaryRow> rows;
  rows.reserve(P);
  std::vector<double> col(n);
  for (int p = 0; p < P; ++p) {
    for (int d = 0; d < n; ++d) col[d] = samples.value(d, p);
    SummaryRow row;
    row.name = samples.names[p];
    row.mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : col) ss += (v - row.mean) * (v - row.mean);
    row.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    row.q_lo = quantile(col, tail);
    row.q_hi = quantile(col, 1.0 - tail);

    // Split-chain R-hat.
    std::vector<std::vector<double>> groups;
    for (int cid : chain_ids) {
      std::vector<double> cvals;
      for (int d = 0; d < n; ++d) {
        if (samples.chain[d] == cid) cvals.push_back(col[d]);
      }
      const size_t half = cvals.size() / 2;
      if (half >= 2) {
        groups.emplace_back(cvals.begin(), cvals.begin() + half);
        groups.emplace_back(cvals.begin() + half,
                            cvals.begin() + 2 * static_cast<long>(half));
      }
    }
    if (groups.size() >= 2) {
      const size_t gn = groups[0].size();
      std::vector<double> gmeans;
      double w = 0.0;
      for (const auto& g : groups) {
        const double gm =
            std::accumulate(g.begin(), g.end(), 0.0) / g.size();
        gmeans.push_back(gm);
        double gss = 0.0;
        for (double v : g) gss += (v - gm) * (v - gm);
        w += gss / (g.size() - 1);
      }
      w /= groups.size();
      const double overall =
          std::accumulate(gmeans.begin(), gmeans.end(), 0.0) / gmeans.size();
      double b = 0.0;
      for (double gm : gmeans) b += (gm - overall) * (gm - overall);
      b *= static_cast<double>(gn) / (gmeans.size() - 1);
      if (w > 0.0) {
        const double var_plus = (gn - 1.0) / gn * w + b / gn;
        row.rhat = std::sqrt(var_plus / w);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

PenetranceCurve penetrance_posterior(const PosteriorSamples& samples, int cause,
                                     int carrier, Sex sex,
                                     std::span<const double> ages_years,
                                     double credible_level, int max_draws) {
  const int n = samples.draw_count();
  if (n == 0) throw DataError("no posterior draws");
  if (cause < 1 || cause > samples.spec.cause_count) {
    throw DataError("cause index outside model range");
  }
  const double ts = samples.spec.time_scale;
  std::vector<double> grid;
  grid.reserve(ages_years.size());
  for (double a : ages_years) {
    if (a < 0.0 || a / ts > 1.0 + 1e-12) {
      throw DataError("age outside the fitted time range");
    }
    grid.push_back(std::min(a / ts, 1.0));
  }

  const int used = std::min(max_draws, n);
  std::vector<int> idx(used);
  for (int i = 0; i < used; ++i) {
    idx[i] = static_cast<int>(static_cast<long>(i) * n / used);
  }

  const int G = static_cast<int>(grid.size());
  std::vector<std::vector<double>> values(G);
  for (auto& v : values) v.reserve(used);
  for (int i : idx) {
    const ChainState st = state_from_draw(samples, i);
    const ModelParams params = params_from_state(samples.spec, st);
    const auto q = penetrance_grid(params, carrier, sex, grid);
    for (int g = 0; g < G; ++g) {
      values[g].push_back(q[static_cast<size_t>(cause - 1) * G + g]);
    }
  }

  PenetranceCurve curve;
  curve.ages.assign(ages_years.begin(), ages_years.end());
  const double tail = 0.5 * (1.0 - credible_level);
  for (int g = 0; g < G; ++g) {
    const double mean =
        std::accumulate(values[g].begin(), values[g].end(), 0.0) / used;
    curve.mean.push_back(mean);
    curve.lo.push_back(quantile(values[g], tail));
    curve.hi.push_back(quantile(values[g], 1.0 - tail));
  }
  return curve;
}

}  // namespace penetrance
