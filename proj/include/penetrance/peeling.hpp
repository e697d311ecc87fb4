#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "penetrance/genetics.hpp"
#include "penetrance/pedigree.hpp"
#include "penetrance/riskmodel.hpp"

namespace penetrance {

// Nonnegative 3-vector over latent genotype states, stored as mantissas with
// a shared log scale so that message products over large families cannot
// underflow. value(g) = v[g] * exp(log_scale).
struct ScaledVec {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double log_scale = 0.0;

  bool zero() const { return v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0; }
  void rescale();
  double log_value(int g) const;
};

// Per-member factor Pr(H_j | g) * 1{g consistent with observed genotype},
// built from the two carrier-collapsed log likelihoods.
ScaledVec member_factor(double loglik_noncarrier, double loglik_carrier,
                        std::optional<int> observed_genotype);

// Observation-only factor (phenotype term replaced by 1).
ScaledVec observation_factor(std::optional<int> observed_genotype);

struct PeelMessages {
  std::vector<ScaledVec> anterior;   // A_j(g): joint with the anterior block
  std::vector<ScaledVec> posterior;  // P_j(g): posterior block given g
  double log_joint = 0.0;            // log sum_g A_j pen_j P_j, any j
};

// Anterior/posterior recursion over the nuclear-family structure of one
// loop-free pedigree. The context holds only topology and can be reused for
// many parameter values; per-evaluation scratch lives in PeelScratch so the
// hot path performs no allocation.
class PeelScratch;

class PeelContext {
 public:
  explicit PeelContext(const Pedigree& p);
  PeelContext(const PeelContext&);
  PeelContext& operator=(const PeelContext&) = delete;
  PeelContext(PeelContext&&) noexcept;
  ~PeelContext();

  int size() const { return static_cast<int>(parent_couple_.size()); }

  // log of the joint mass sum_G prod_j pens_j(G_j) Pr(G); kNegInf when the
  // configuration space carries no mass. pivot < 0 uses the proband.
  double log_joint(std::span<const ScaledVec> pens, const FounderPrior& prior,
                   int pivot = -1) const;
  double log_joint(std::span<const ScaledVec> pens, const FounderPrior& prior,
                   PeelScratch& scratch, int pivot = -1) const;

  PeelMessages messages(std::span<const ScaledVec> pens,
                        const FounderPrior& prior) const;

 private:
  friend class PeelScratch;
  struct Nuclear {
    int father = -1;
    int mother = -1;
    std::vector<int> children;
  };
  std::vector<Nuclear> couples_;
  std::vector<int> parent_couple_;
  std::vector<std::vector<int>> marriages_;  // couple ids per member
  std::vector<int> marriage_offset_;         // into flattened per-marriage slots
  int total_marriage_slots_ = 0;
  int default_pivot_ = 0;

  class Eval;
};

class PeelScratch {
 public:
  PeelScratch() = default;
  void resize_for(const PeelContext& ctx);

 private:
  friend class PeelContext;
  std::vector<ScaledVec> anterior_;
  std::vector<char> anterior_done_;
  std::vector<ScaledVec> marriage_post_;
  std::vector<char> marriage_post_done_;
  std::vector<ScaledVec> posterior_;
  std::vector<char> posterior_done_;
};

// Builds the member factors for a whole pedigree under the model, times
// rescaled by m.time_scale. xi has one entry per cause (empty = no frailty).
std::vector<ScaledVec> build_member_factors(const Pedigree& p,
                                            const ModelParams& m,
                                            std::span<const double> xi);

// log Pr(H | G_obs) for one family: the joint mass divided by the
// genotype-only mass Pr(G_obs). Throws DataError when the observed genotypes
// are Mendelian-impossible; returns kNegInf when phenotypes contradict a
// structural zero-hazard constraint.
double family_log_likelihood(const Pedigree& p, const ModelParams& m,
                             std::span<const double> xi,
                             const FounderPrior& prior, int pivot = -1);

}  // namespace penetrance
