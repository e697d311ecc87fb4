#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "penetrance/pedigree.hpp"

namespace penetrance {

// Cohort generator for ascertained family studies: families are built on the
// canonical three-generation template, probands are rejection-sampled on the
// qualifying cause, genotypes propagate from the proband outwards, and a
// fixed fraction of non-proband genotypes is masked.
struct SimulationConfig {
  int family_count = 200;
  std::vector<double> beta = {4.0, 10.0};      // per-cause carrier log effect
  std::vector<double> hazard = {0.1, 0.0005};  // constant baseline rates
  bool frailty = true;
  double frailty_shape = 0.25;  // Gamma(shape, shape) per cause per family
  double censor_rate = 2.0;
  double proband_carrier_freq = 0.0001;
  double missing_fraction = 0.5;
  int ascertainment_cause = 2;
  std::uint64_t seed = 1;
  long max_attempts_per_family = 10000000;
  int threads = 1;

  int cause_count() const { return static_cast<int>(beta.size()); }
  void check() const;
};

// The built-in 30-member three-generation family structure. Member ids are
// "1".."30"; "1" is the proband; "3"/"4" are the proband's parents; "7".."10"
// are the proband's offspring and "11"/"12" the proband's siblings;
// "19".."24" form the third generation under 11 and 12. The remaining
// members (2, 5, 6, 13..18, 25..30) marry in or belong to in-law branches
// and are never genetically related to the proband. Phenotypes and genotypes
// are left empty here and filled by the simulator.
std::vector<Individual> canonical_family_template(const std::string& family_id);

// Member ids of the template that are genetically related to the proband.
const std::vector<std::string>& template_blood_ids();

// First-event draw under constant cause-specific hazards
// rate_k = hazard[k] * frailty[k] * exp(beta[k] * carrier) with exponential
// censoring. Returns (time, cause); cause 0 when censoring wins.
std::pair<double, int> event_time_sample(int carrier,
                                         std::span<const double> beta,
                                         std::span<const double> hazard,
                                         std::span<const double> frailty,
                                         double censor_rate,
                                         std::mt19937_64& rng);

struct CandidateProband {
  int carrier = 0;
  std::vector<double> frailty;
  double time = 0.0;
  int cause = 0;
};

// One unascertained draw of a potential proband (used directly by the
// calibration checks; the simulator rejection-samples these).
CandidateProband draw_candidate_proband(const SimulationConfig& cfg,
                                        std::mt19937_64& rng);

Pedigree simulate_family(const SimulationConfig& cfg,
                         const std::string& family_id, std::mt19937_64& rng);

// Deterministic in cfg.seed regardless of thread count: family i uses the
// substream ("family", i).
std::vector<Pedigree> simulate_cohort(const SimulationConfig& cfg);

}  // namespace penetrance
