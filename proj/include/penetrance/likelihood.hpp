#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "penetrance/ascertainment.hpp"
#include "penetrance/baseline.hpp"
#include "penetrance/genetics.hpp"
#include "penetrance/pedigree.hpp"
#include "penetrance/peeling.hpp"
#include "penetrance/riskmodel.hpp"
#include "penetrance/threads.hpp"

namespace penetrance {

// Everything about the model that is fixed across a chain: dimensions,
// covariate designs, baseline family, correction switches.
struct ModelSpec {
  int cause_count = 1;
  std::vector<CauseDesign> designs;
  BaselineSpec baseline;
  bool frailty = true;
  bool correct_ascertainment = true;
  AscertainmentRule rule;
  double allele_freq = 0.0006;
  double time_scale = 1.0;  // filled from data at build time

  void check() const;
};

// Free parameters of one MCMC state. Layout parallels ModelSpec.
struct ChainState {
  std::vector<std::vector<double>> beta;  // [K][design dim]
  std::vector<std::vector<double>> coef;  // [K][baseline params]
  std::vector<double> nu;                 // [K], frailty precision
  std::vector<std::vector<double>> xi;    // [family][K]
};

struct MemberRow {
  double time = 0.0;  // rescaled
  int cause = 0;
  Sex sex = Sex::kFemale;
  std::optional<int> genotype;
  std::vector<double> cdf_basis;  // baseline bases at this member's time
  std::vector<double> pdf_basis;
  double log_time = 0.0;  // for the non-linear (weibull) baseline
};

struct FamilyUnit {
  Pedigree pedigree;
  PeelContext peel;
  std::vector<MemberRow> rows;
  int proband = 0;
  double log_obs_mass = 0.0;  // log Pr(G_obs), parameter-free
};

// Recodes events past the administrative age limit (years) as censored and
// caps all follow-up at that limit.
std::vector<Pedigree> apply_administrative_censoring(std::vector<Pedigree> peds,
                                                     double age_limit);

// Immutable fitting dataset: pedigrees plus per-member baseline bases cached
// at the observed times, so one family likelihood evaluation is a handful of
// dot products plus a peel.
class CohortData {
 public:
  static CohortData build(std::vector<Pedigree> pedigrees, ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const FounderPrior& prior() const { return prior_; }
  int family_count() const { return static_cast<int>(families_.size()); }
  const FamilyUnit& family(int i) const { return families_[i]; }
  std::span<const FamilyUnit> families() const { return families_; }

 private:
  ModelSpec spec_;
  FounderPrior prior_{};
  std::vector<FamilyUnit> families_;
};

// Ascertainment-corrected family log likelihoods under a chain state.
class CohortEvaluator {
 public:
  explicit CohortEvaluator(const CohortData& data) : data_(&data) {}

  // Returns -inf (never throws) when a state is impossible for this family,
  // e.g. an event in a structurally zero hazard branch.
  double family_loglik(int i, const ChainState& s, PeelScratch& scratch) const;

  // Fills per_family and returns the order-stable serial sum; evaluation is
  // distributed over the pool.
  double total_loglik(const ChainState& s, std::vector<double>& per_family,
                      ThreadPool& pool) const;

 private:
  const CohortData* data_;
};

}  // namespace penetrance
