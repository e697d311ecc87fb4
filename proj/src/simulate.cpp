#include "penetrance/simulate.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "penetrance/common.hpp"
#include "penetrance/rng.hpp"
#include "penetrance/threads.hpp"

namespace penetrance {

void SimulationConfig::check() const {
  if (family_count < 1) throw DataError("family_count must be >= 1");
  if (beta.size() != hazard.size() || beta.empty()) {
    throw DataError("per-cause beta and hazard vectors must match");
  }
  for (double h : hazard) {
    if (!(h > 0.0)) throw DataError("baseline hazards must be positive");
  }
  if (!(censor_rate >= 0.0)) throw DataError("censor rate must be >= 0");
  if (frailty && !(frailty_shape > 0.0)) {
    throw DataError("frailty shape must be positive");
  }
  if (!(proband_carrier_freq >= 0.0 && proband_carrier_freq <= 1.0)) {
    throw DataError("proband carrier frequency must be in [0,1]");
  }
  if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) {
    throw DataError("missing fraction must be in [0,1]");
  }
  if (ascertainment_cause < 1 || ascertainment_cause > cause_count()) {
    throw DataError("ascertainment cause outside cause range");
  }
  if (max_attempts_per_family < 1) throw DataError("attempt cap must be >= 1");
}

namespace {

struct TemplateRow {
  const char* id;
  const char* father;
  const char* mother;
  Sex sex;
};

// Three generations, 30 members. Couples: (3,4) has the proband 1 and the
// proband's siblings 11, 12; (1,2) has 7..10; (11,17) has 19..21; (18,12)
// has 22..24. The spouses 2, 17, 18 come with their own parents and
// childless siblings so the in-law side stays attached to the family graph.
constexpr TemplateRow kTemplate[] = {
    {"3", "", "", Sex::kMale},     {"4", "", "", Sex::kFemale},
    {"5", "", "", Sex::kMale},     {"6", "", "", Sex::kFemale},
    {"13", "", "", Sex::kMale},    {"14", "", "", Sex::kFemale},
    {"15", "", "", Sex::kMale},    {"16", "", "", Sex::kFemale},
    {"1", "3", "4", Sex::kMale},   {"11", "3", "4", Sex::kMale},
    {"12", "3", "4", Sex::kFemale},
    {"2", "5", "6", Sex::kFemale}, {"25", "5", "6", Sex::kMale},
    {"26", "5", "6", Sex::kFemale},
    {"17", "13", "14", Sex::kFemale}, {"27", "13", "14", Sex::kMale},
    {"28", "13", "14", Sex::kFemale},
    {"18", "15", "16", Sex::kMale},   {"29", "15", "16", Sex::kMale},
    {"30", "15", "16", Sex::kFemale},
    {"7", "1", "2", Sex::kMale},   {"8", "1", "2", Sex::kFemale},
    {"9", "1", "2", Sex::kMale},   {"10", "1", "2", Sex::kFemale},
    {"19", "11", "17", Sex::kMale},   {"20", "11", "17", Sex::kFemale},
    {"21", "11", "17", Sex::kMale},
    {"22", "18", "12", Sex::kFemale}, {"23", "18", "12", Sex::kMale},
    {"24", "18", "12", Sex::kFemale},
};

double exp_draw(double rate, std::mt19937_64& rng) {
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return std::exponential_distribution<double>(rate)(rng);
}

}  // namespace

std::vector<Individual> canonical_family_template(const std::string& family_id) {
  std::vector<Individual> members;
  members.reserve(std::size(kTemplate));
  for (const TemplateRow& row : kTemplate) {
    Individual m;
    m.id = row.id;
    m.family_id = family_id;
    m.father_id = row.father;
    m.mother_id = row.mother;
    m.sex = row.sex;
    m.proband = std::string_view(row.id) == "1";
    members.push_back(std::move(m));
  }
  return members;
}

const std::vector<std::string>& template_blood_ids() {
  static const std::vector<std::string> ids = {
      "1",  "3",  "4",  "7",  "8",  "9",  "10", "11",
      "12", "19", "20", "21", "22", "23", "24"};
  return ids;
}

std::pair<double, int> event_time_sample(int carrier,
                                         std::span<const double> beta,
                                         std::span<const double> hazard,
                                         std::span<const double> frailty,
                                         double censor_rate,
                                         std::mt19937_64& rng) {
  double best = std::numeric_limits<double>::infinity();
  int cause = 0;
  for (size_t k = 0; k < hazard.size(); ++k) {
    const double rate =
        hazard[k] * frailty[k] * std::exp(beta[k] * carrier);
    const double t = exp_draw(rate, rng);
    if (t < best) {
      best = t;
      cause = static_cast<int>(k) + 1;
    }
  }
  const double c = exp_draw(censor_rate, rng);
  if (c < best) {
    best = c;
    cause = 0;
  }
  return {best, cause};
}

CandidateProband draw_candidate_proband(const SimulationConfig& cfg,
                                        std::mt19937_64& rng) {
  CandidateProband out;
  const double u = (rng() >> 11) * 0x1.0p-53;
  out.carrier = u < cfg.proband_carrier_freq ? 1 : 0;
  out.frailty.assign(cfg.cause_count(), 1.0);
  if (cfg.frailty) {
    std::gamma_distribution<double> gamma(cfg.frailty_shape,
                                          1.0 / cfg.frailty_shape);
    for (double& f : out.frailty) f = gamma(rng);
  }
  const auto [t, d] = event_time_sample(out.carrier, cfg.beta, cfg.hazard,
                                        out.frailty, cfg.censor_rate, rng);
  out.time = t;
  out.cause = d;
  return out;
}

Pedigree simulate_family(const SimulationConfig& cfg,
                         const std::string& family_id, std::mt19937_64& rng) {
  cfg.check();

  CandidateProband proband;
  long attempts = 0;
  for (;;) {
    if (++attempts > cfg.max_attempts_per_family) {
      throw NumericError(
          "ascertainment rejection sampling exceeded the attempt cap; the "
          "configuration may have zero ascertainment probability");
    }
    proband = draw_candidate_proband(cfg, rng);
    if (proband.cause == cfg.ascertainment_cause) break;
  }

  std::vector<Individual> members = canonical_family_template(family_id);
  std::unordered_map<std::string, int> index;
  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    index.emplace(members[j].id, j);
  }
  const std::unordered_set<std::string> blood(template_blood_ids().begin(),
                                              template_blood_ids().end());

  // Carrier propagation: one random parent of a carrier proband carries the
  // mutation; every other related member is a carrier with probability 0.5
  // when a parent carries it. Unrelated members never carry.
  std::vector<int> carrier(members.size(), 0);
  const int proband_idx = index.at("1");
  carrier[proband_idx] = proband.carrier;
  if (proband.carrier == 1) {
    const bool father_carries = ((rng() >> 11) * 0x1.0p-53) < 0.5;
    carrier[index.at(father_carries ? "3" : "4")] = 1;
    // Parents before children; the template is listed founders-first, so a
    // single ordered pass resolves every transmission.
    for (const TemplateRow& row : kTemplate) {
      const int j = index.at(row.id);
      if (j == proband_idx || members[j].father_id.empty() ||
          blood.count(members[j].id) == 0) {
        continue;
      }
      const int pf = carrier[index.at(members[j].father_id)];
      const int pm = carrier[index.at(members[j].mother_id)];
      if (pf == 1 || pm == 1) {
        carrier[j] = ((rng() >> 11) * 0x1.0p-53) < 0.5 ? 1 : 0;
      }
    }
  }

  // Phenotypes: the proband keeps the ascertained draw; everyone else draws
  // from the same family frailty.
  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    if (j == proband_idx) {
      members[j].phenotype = {proband.time, proband.cause};
      continue;
    }
    const auto [t, d] = event_time_sample(carrier[j], cfg.beta, cfg.hazard,
                                          proband.frailty, cfg.censor_rate,
                                          rng);
    members[j].phenotype = {t, d};
  }

  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    members[j].genotype = carrier[j];
  }

  // Mask exactly floor(missing_fraction * (n-1)) non-proband genotypes.
  std::vector<int> non_proband;
  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    if (j != proband_idx) non_proband.push_back(j);
  }
  const int mask_count = static_cast<int>(
      cfg.missing_fraction * static_cast<double>(non_proband.size()));
  for (int i = 0; i < mask_count; ++i) {
    const size_t pick =
        i + static_cast<size_t>(((rng() >> 11) * 0x1.0p-53) *
                                (non_proband.size() - i));
    std::swap(non_proband[i], non_proband[std::min(pick, non_proband.size() - 1)]);
    members[non_proband[i]].genotype.reset();
  }

  return Pedigree::build(std::move(members));
}

std::vector<Pedigree> simulate_cohort(const SimulationConfig& cfg) {
  cfg.check();
  std::vector<std::optional<Pedigree>> slots(cfg.family_count);
  ThreadPool pool(cfg.threads);
  std::vector<std::string> errors(cfg.family_count);
  pool.parallel_for(cfg.family_count, [&](int i) {
    try {
      auto rng = substream(cfg.seed, "family", static_cast<std::uint64_t>(i));
      slots[i] = simulate_family(cfg, "F" + std::to_string(i + 1), rng);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const std::string& err : errors) {
    if (!err.empty()) throw NumericError(err);
  }
  std::vector<Pedigree> out;
  out.reserve(cfg.family_count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace penetrance
