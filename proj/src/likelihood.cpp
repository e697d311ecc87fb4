#include "penetrance/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "penetrance/common.hpp"

namespace penetrance {

void ModelSpec::check() const {
  if (cause_count < 1) throw DataError("model needs at least one cause");
  if (static_cast<int>(designs.size()) != cause_count) {
    throw DataError("design count must match cause count");
  }
  if (baseline.param_count < 1) throw DataError("baseline needs parameters");
  if (!(allele_freq > 0.0 && allele_freq < 1.0)) {
    throw DataError("allele frequency must be in (0,1)");
  }
  if (correct_ascertainment &&
      (rule.qualifying_cause < 1 || rule.qualifying_cause > cause_count)) {
    throw DataError("ascertainment cause outside model range");
  }
}

std::vector<Pedigree> apply_administrative_censoring(std::vector<Pedigree> peds,
                                                     double age_limit) {
  if (!(age_limit > 0.0)) throw DataError("administrative age must be positive");
  std::vector<Pedigree> out;
  out.reserve(peds.size());
  for (Pedigree& p : peds) {
    std::vector<Individual> members(p.members().begin(), p.members().end());
    bool changed = false;
    for (Individual& m : members) {
      if (m.phenotype.age > age_limit) {
        m.phenotype.age = age_limit;
        m.phenotype.cause = 0;
        changed = true;
      }
    }
    out.push_back(changed ? Pedigree::build(std::move(members)) : std::move(p));
  }
  return out;
}

CohortData CohortData::build(std::vector<Pedigree> pedigrees, ModelSpec spec) {
  spec.check();
  if (pedigrees.empty() && spec.time_scale <= 0.0) {
    throw DataError("empty cohort needs an explicit time_scale");
  }

  double max_age = 0.0;
  for (const Pedigree& p : pedigrees) {
    for (const Individual& m : p.members()) {
      max_age = std::max(max_age, m.phenotype.age);
      if (m.phenotype.cause > spec.cause_count) {
        throw DataError("family " + p.family_id() + ": member '" + m.id +
                        "' has cause " + std::to_string(m.phenotype.cause) +
                        " but the model has K=" +
                        std::to_string(spec.cause_count));
      }
    }
    if (spec.correct_ascertainment) {
      const Individual& pro = p.member(p.proband());
      if (pro.phenotype.cause != spec.rule.qualifying_cause) {
        throw DataError("family " + p.family_id() +
                        ": proband does not satisfy the ascertainment rule");
      }
      if (!(pro.phenotype.age > 0.0)) {
        throw DataError("family " + p.family_id() + ": proband event age 0");
      }
    }
  }
  if (!pedigrees.empty()) {
    if (!(max_age > 0.0)) throw DataError("all observation times are zero");
    spec.time_scale = max_age;
  }

  CohortData data;
  data.spec_ = spec;
  data.prior_ = founder_prior(spec.allele_freq);

  const int P = spec.baseline.param_count;
  for (Pedigree& p : pedigrees) {
    PeelContext peel(p);
    FamilyUnit fam{std::move(p), std::move(peel), {}, 0, 0.0};
    fam.proband = fam.pedigree.proband();
    fam.rows.reserve(fam.pedigree.size());
    for (const Individual& m : fam.pedigree.members()) {
      MemberRow row;
      row.time = m.phenotype.age / spec.time_scale;
      row.cause = m.phenotype.cause;
      row.sex = m.sex;
      row.genotype = m.genotype;
      if (spec.baseline.linear_in_coeffs()) {
        row.cdf_basis.resize(P);
        row.pdf_basis.resize(P);
        spec.baseline.cdf_basis(row.time, row.cdf_basis);
        spec.baseline.pdf_basis(row.time, row.pdf_basis);
      }
      row.log_time = row.time > 0.0 ? std::log(row.time) : kNegInf;
      fam.rows.push_back(std::move(row));
    }
    std::vector<ScaledVec> obs;
    obs.reserve(fam.pedigree.size());
    for (const Individual& m : fam.pedigree.members()) {
      obs.push_back(observation_factor(m.genotype));
    }
    fam.log_obs_mass = fam.peel.log_joint(obs, data.prior_);
    if (fam.log_obs_mass == kNegInf) {
      throw DataError("family " + fam.pedigree.family_id() +
                      ": observed genotypes are Mendelian-impossible");
    }
    data.families_.push_back(std::move(fam));
  }
  return data;
}

namespace {

// Per-evaluation cause tables: exp(linear predictor) for the four
// (carrier, sex) cells, with structural zeros applied.
struct CauseTable {
  double e[2][2];  // [carrier][male]
};

void fill_cause_tables(const ModelSpec& spec, const ChainState& s,
                       std::vector<CauseTable>& tables) {
  tables.resize(spec.cause_count);
  for (int k = 0; k < spec.cause_count; ++k) {
    const CauseDesign& d = spec.designs[k];
    for (int g = 0; g < 2; ++g) {
      for (int male = 0; male < 2; ++male) {
        const Sex sex = male ? Sex::kMale : Sex::kFemale;
        tables[k].e[g][male] =
            hazard_is_zero(d, g, sex)
                ? 0.0
                : std::exp(linear_predictor(d, s.beta[k], g, sex));
      }
    }
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double CohortEvaluator::family_loglik(int i, const ChainState& s,
                                      PeelScratch& scratch) const {
  const ModelSpec& spec = data_->spec();
  const FamilyUnit& fam = data_->family(i);
  const int K = spec.cause_count;
  const bool weibull = !spec.baseline.linear_in_coeffs();

  thread_local std::vector<CauseTable> tables;
  thread_local std::vector<ScaledVec> pens;
  fill_cause_tables(spec, s, tables);
  pens.resize(fam.rows.size());

  const std::vector<double>* xi = s.xi.empty() ? nullptr : &s.xi[i];

  for (size_t j = 0; j < fam.rows.size(); ++j) {
    const MemberRow& row = fam.rows[j];
    const int male = sex_covariate(row.sex);
    double ll[2] = {0.0, 0.0};
    for (int k = 0; k < K; ++k) {
      double cum0, haz0 = 0.0;
      if (weibull) {
        const double scale = s.coef[k][0], shape = s.coef[k][1];
        cum0 = row.time > 0.0 ? scale * std::exp(shape * row.log_time) : 0.0;
        if (row.cause == k + 1) {
          haz0 = row.time > 0.0
                     ? scale * shape * std::exp((shape - 1.0) * row.log_time)
                     : (shape == 1.0 ? scale : (shape < 1.0 ? kInf : 0.0));
        }
      } else {
        cum0 = dot(s.coef[k], row.cdf_basis);
        if (row.cause == k + 1) haz0 = dot(s.coef[k], row.pdf_basis);
      }
      const double x = xi ? (*xi)[k] : 1.0;
      for (int g = 0; g < 2; ++g) {
        const double e = tables[k].e[g][male];
        if (e == 0.0) {
          if (row.cause == k + 1) ll[g] = kNegInf;
          continue;
        }
        if (ll[g] == kNegInf) continue;
        ll[g] -= cum0 * x * e;
        if (row.cause == k + 1) {
          const double lam = haz0 * x * e;
          ll[g] += lam > 0.0 ? std::log(lam) : kNegInf;
        }
      }
    }
    pens[j] = member_factor(ll[0], ll[1], row.genotype);
  }

  const double log_joint = fam.peel.log_joint(pens, data_->prior(), scratch);
  if (log_joint == kNegInf) return kNegInf;
  double ll = log_joint - fam.log_obs_mass;

  if (spec.correct_ascertainment) {
    const MemberRow& pro = fam.rows[fam.proband];
    const int k = spec.rule.qualifying_cause - 1;
    const int male = sex_covariate(pro.sex);
    const double pr_carrier = data_->prior().carrier_mass();
    const double pr_g[2] = {1.0 - pr_carrier, pr_carrier};
    double prob = 0.0;
    for (int g = 0; g < 2; ++g) {
      const double e = tables[k].e[g][male];
      if (e == 0.0) continue;
      double haz0, cum_total = 0.0;
      if (weibull) {
        const double scale = s.coef[k][0], shape = s.coef[k][1];
        haz0 = scale * shape * std::exp((shape - 1.0) * pro.log_time);
      } else {
        haz0 = dot(s.coef[k], pro.pdf_basis);
      }
      for (int j = 0; j < K; ++j) {
        const double ej = tables[j].e[g][male];
        if (ej == 0.0) continue;
        double cum0;
        if (weibull) {
          cum0 = s.coef[j][0] * std::exp(s.coef[j][1] * pro.log_time);
        } else {
          cum0 = dot(s.coef[j], pro.cdf_basis);
        }
        cum_total += cum0 * (xi ? (*xi)[j] : 1.0) * ej;
      }
      const double lam = haz0 * (xi ? (*xi)[k] : 1.0) * e;
      prob += pr_g[g] * lam * std::exp(-cum_total);
    }
    if (!(prob > 0.0) || !std::isfinite(prob)) return kNegInf;
    ll -= std::log(prob);
  }
  return ll;
}

double CohortEvaluator::total_loglik(const ChainState& s,
                                     std::vector<double>& per_family,
                                     ThreadPool& pool) const {
  const int n = data_->family_count();
  per_family.resize(n);
  pool.parallel_for(n, [&](int i) {
    thread_local PeelScratch scratch;
    per_family[i] = family_loglik(i, s, scratch);
  });
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += per_family[i];
  return total;
}

}  // namespace penetrance
