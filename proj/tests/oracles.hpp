#pragma once

// Test-only oracles, independent of the library code paths they check:
// exhaustive genotype enumeration for pedigree likelihoods, an adaptive
// Simpson integrator, and a random loop-free pedigree generator.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "penetrance/genetics.hpp"
#include "penetrance/pedigree.hpp"
#include "penetrance/peeling.hpp"
#include "penetrance/riskmodel.hpp"

namespace testutil {

using namespace penetrance;

// log sum over all genotype configurations of
//   prod_j pens_j(g_j) * prod_founders prior(g) * prod_children tr(g|gm,gf).
// Enumerates only states with positive observation weight per member.
inline double brute_force_log_joint(const Pedigree& p,
                                    std::span<const ScaledVec> pens,
                                    const FounderPrior& prior) {
  const int n = p.size();
  std::vector<std::vector<int>> admissible(n);
  double log_scale = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int g = 0; g < 3; ++g) {
      if (pens[j].v[g] > 0.0) admissible[j].push_back(g);
    }
    if (admissible[j].empty()) return penetrance::kNegInf;
    log_scale += pens[j].log_scale;
  }

  const auto order = p.topological_order();
  std::vector<int> state(n, 0);
  double total = 0.0;
  std::function<void(int, double)> walk = [&](int pos, double acc) {
    if (acc == 0.0) return;
    if (pos == n) {
      total += acc;
      return;
    }
    const int j = order[pos];
    for (int g : admissible[j]) {
      state[j] = g;
      double w = pens[j].v[g];
      if (p.is_founder(j)) {
        w *= prior.p[g];
      } else {
        const Couple& c = p.couple(p.parent_couple(j));
        w *= transmission(g, state[c.mother], state[c.father]);
      }
      walk(pos + 1, acc * w);
    }
  };
  walk(0, 1.0);
  if (total <= 0.0) return penetrance::kNegInf;
  return std::log(total) + log_scale;
}

inline double brute_force_family_loglik(const Pedigree& p, const ModelParams& m,
                                        std::span<const double> xi,
                                        const FounderPrior& prior) {
  const auto pens = build_member_factors(p, m, xi);
  std::vector<ScaledVec> obs;
  for (const Individual& ind : p.members()) {
    obs.push_back(observation_factor(ind.genotype));
  }
  const double joint = brute_force_log_joint(p, pens, prior);
  const double mass = brute_force_log_joint(p, obs, prior);
  return joint - mass;
}

// Per-member latent genotype posterior by enumeration.
inline std::array<double, 3> brute_force_member_posterior(
    const Pedigree& p, std::span<const ScaledVec> pens,
    const FounderPrior& prior, int member) {
  const int n = p.size();
  const auto order = p.topological_order();
  std::vector<int> state(n, 0);
  std::array<double, 3> mass{0.0, 0.0, 0.0};
  std::function<void(int, double)> walk = [&](int pos, double acc) {
    if (acc == 0.0) return;
    if (pos == n) {
      mass[state[member]] += acc;
      return;
    }
    const int j = order[pos];
    for (int g = 0; g < 3; ++g) {
      if (pens[j].v[g] <= 0.0) continue;
      state[j] = g;
      double w = pens[j].v[g];
      if (p.is_founder(j)) {
        w *= prior.p[g];
      } else {
        const Couple& c = p.couple(p.parent_couple(j));
        w *= transmission(g, state[c.mother], state[c.father]);
      }
      walk(pos + 1, acc * w);
    }
  };
  walk(0, 1.0);
  const double total = mass[0] + mass[1] + mass[2];
  return {mass[0] / total, mass[1] / total, mass[2] / total};
}

inline double adaptive_simpson_impl(const std::function<double(double)>& f,
                                    double a, double b, double fa, double fm,
                                    double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, 48);
}

struct RandomPedigreeOptions {
  int max_members = 12;
  int max_missing = 6;
  double allele_freq = 0.2;  // large so carrier configurations are common
  int causes = 2;
};

// Random loop-free connected pedigree with genotypes simulated forward from
// the founder prior (so observed genotypes are always Mendelian-consistent)
// and uniform phenotypes on the rescaled axis.
inline Pedigree random_pedigree(std::mt19937_64& rng,
                                const RandomPedigreeOptions& opt = {}) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int target = 1 + static_cast<int>(unif(rng) * opt.max_members);

  struct Node {
    Sex sex;
    int father = -1, mother = -1;
    int genotype = kWildHomo;
  };
  std::vector<Node> nodes;
  const FounderPrior prior = founder_prior(opt.allele_freq);
  auto draw_founder_state = [&]() {
    const double u = unif(rng);
    if (u < prior.p[0]) return kWildHomo;
    if (u < prior.p[0] + prior.p[1]) return kHetero;
    return kMutHomo;
  };
  auto add_founder = [&](Sex sex) {
    nodes.push_back({sex, -1, -1, draw_founder_state()});
    return static_cast<int>(nodes.size()) - 1;
  };
  auto draw_child_state = [&](int mo, int fa) {
    const double u = unif(rng);
    double acc = 0.0;
    for (int g = 0; g < 3; ++g) {
      acc += transmission(g, nodes[mo].genotype, nodes[fa].genotype);
      if (u < acc) return g;
    }
    return 2;
  };

  if (target == 1) {
    add_founder(unif(rng) < 0.5 ? Sex::kMale : Sex::kFemale);
  } else {
    std::vector<std::pair<int, int>> frontier;  // (father, mother)
    frontier.emplace_back(add_founder(Sex::kMale), add_founder(Sex::kFemale));
    while (!frontier.empty() &&
           static_cast<int>(nodes.size()) < target) {
      const auto [fa, mo] = frontier.front();
      frontier.erase(frontier.begin());
      const int kids = 1 + static_cast<int>(unif(rng) * 3.0);
      for (int c = 0; c < kids && static_cast<int>(nodes.size()) < target; ++c) {
        const Sex sex = unif(rng) < 0.5 ? Sex::kMale : Sex::kFemale;
        nodes.push_back({sex, fa, mo, 0});
        const int child = static_cast<int>(nodes.size()) - 1;
        nodes[child].genotype = draw_child_state(mo, fa);
        if (static_cast<int>(nodes.size()) + 1 < target && unif(rng) < 0.55) {
          const int spouse =
              add_founder(sex == Sex::kMale ? Sex::kFemale : Sex::kMale);
          frontier.emplace_back(sex == Sex::kMale ? child : spouse,
                                sex == Sex::kMale ? spouse : child);
        }
      }
    }
  }

  const int n = static_cast<int>(nodes.size());
  std::vector<int> hide(n, 0);
  const int n_missing = std::min(
      opt.max_missing, static_cast<int>(unif(rng) * (opt.max_missing + 1)));
  for (int count = 0, guard = 0; count < std::min(n_missing, n) && guard < 200;
       ++guard) {
    const int j = static_cast<int>(unif(rng) * n);
    if (!hide[j]) {
      hide[j] = 1;
      ++count;
    }
  }

  std::vector<Individual> members(n);
  const int proband = static_cast<int>(unif(rng) * n);
  for (int j = 0; j < n; ++j) {
    Individual& m = members[j];
    m.id = std::to_string(j + 1);
    m.family_id = "T";
    if (nodes[j].father >= 0) {
      m.father_id = std::to_string(nodes[j].father + 1);
      m.mother_id = std::to_string(nodes[j].mother + 1);
    }
    m.sex = nodes[j].sex;
    if (!hide[j]) m.genotype = carrier_of(nodes[j].genotype);
    m.phenotype.age = 0.05 + 0.9 * unif(rng);
    m.phenotype.cause = static_cast<int>(unif(rng) * (opt.causes + 1));
    m.proband = (j == proband);
  }
  return Pedigree::build(std::move(members));
}

inline ModelParams random_params(std::mt19937_64& rng, int causes,
                                 int degree = 3) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ModelParams m;
  m.frailty = true;
  m.time_scale = 1.0;
  for (int k = 0; k < causes; ++k) {
    CauseDesign design;  // full (G, X, GxX), no structural zeros
    std::vector<double> gamma(degree);
    for (double& g : gamma) g = 0.05 + 1.4 * unif(rng);
    CauseParams cp{{}, Baseline::bernstein(gamma), 0.3 + 3.7 * unif(rng)};
    cp.beta = {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0,
               2.0 * unif(rng) - 1.0};
    m.designs.push_back(design);
    m.causes.push_back(std::move(cp));
  }
  return m;
}

inline std::vector<double> random_frailty(std::mt19937_64& rng, int causes) {
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  std::vector<double> xi(causes);
  for (double& x : xi) x = unif(rng);
  return xi;
}

}  // namespace testutil
