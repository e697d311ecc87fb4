#include "penetrance/peeling.hpp"

#include <algorithm>
#include <cmath>

#include "penetrance/common.hpp"

namespace penetrance {

void ScaledVec::rescale() {
  const double m = std::max({v[0], v[1], v[2]});
  if (m <= 0.0) {
    v = {0.0, 0.0, 0.0};
    log_scale = 0.0;
    return;
  }
  v[0] /= m;
  v[1] /= m;
  v[2] /= m;
  log_scale += std::log(m);
}

double ScaledVec::log_value(int g) const {
  return v[g] > 0.0 ? std::log(v[g]) + log_scale : kNegInf;
}

ScaledVec member_factor(double loglik_noncarrier, double loglik_carrier,
                        std::optional<int> observed_genotype) {
  const double ll[3] = {loglik_noncarrier, loglik_carrier, loglik_carrier};
  double w[3] = {1.0, 1.0, 1.0};
  if (observed_genotype) {
    w[kWildHomo] = (*observed_genotype == 0) ? 1.0 : 0.0;
    w[kHetero] = w[kMutHomo] = (*observed_genotype == 1) ? 1.0 : 0.0;
  }
  double top = kNegInf;
  for (int g = 0; g < 3; ++g) {
    if (w[g] > 0.0 && ll[g] > top) top = ll[g];
  }
  ScaledVec out;
  if (top == kNegInf) return out;  // zero mass on every admissible state
  for (int g = 0; g < 3; ++g) {
    out.v[g] = (w[g] > 0.0 && ll[g] > kNegInf) ? std::exp(ll[g] - top) : 0.0;
  }
  out.log_scale = top;
  return out;
}

ScaledVec observation_factor(std::optional<int> observed_genotype) {
  return member_factor(0.0, 0.0, observed_genotype);
}

namespace {

struct TransmissionTable {
  // tr[mother][father][child]
  double t[3][3][3];
  TransmissionTable() {
    for (int mo = 0; mo < 3; ++mo)
      for (int fa = 0; fa < 3; ++fa)
        for (int ch = 0; ch < 3; ++ch) t[mo][fa][ch] = transmission(ch, mo, fa);
  }
};
const TransmissionTable kTr;

// 3x3 couple-indexed factor with a shared log scale, used for products of
// per-child contributions over (father genotype, mother genotype).
struct ScaledMat {
  std::array<double, 9> m;
  double log_scale = 0.0;
  void set_one() {
    m.fill(1.0);
    log_scale = 0.0;
  }
  double& at(int gf, int gm) { return m[3 * gf + gm]; }
  double at(int gf, int gm) const { return m[3 * gf + gm]; }
  void rescale() {
    const double mx = *std::max_element(m.begin(), m.end());
    if (mx <= 0.0) {
      m.fill(0.0);
      log_scale = 0.0;
      return;
    }
    for (double& x : m) x /= mx;
    log_scale += std::log(mx);
  }
};

}  // namespace

void PeelScratch::resize_for(const PeelContext& ctx) {
  const int n = ctx.size();
  anterior_.assign(n, {});
  anterior_done_.assign(n, 0);
  posterior_.assign(n, {});
  posterior_done_.assign(n, 0);
  marriage_post_.assign(ctx.total_marriage_slots_, {});
  marriage_post_done_.assign(ctx.total_marriage_slots_, 0);
}

PeelContext::PeelContext(const Pedigree& p) {
  const int n = p.size();
  parent_couple_.resize(n);
  marriages_.resize(n);
  couples_.resize(p.couple_count());
  for (int c = 0; c < p.couple_count(); ++c) {
    const Couple& src = p.couple(c);
    couples_[c] = Nuclear{src.father, src.mother, src.children};
  }
  for (int j = 0; j < n; ++j) {
    parent_couple_[j] = p.parent_couple(j);
    marriages_[j].assign(p.marriages(j).begin(), p.marriages(j).end());
  }
  marriage_offset_.resize(n + 1);
  int off = 0;
  for (int j = 0; j < n; ++j) {
    marriage_offset_[j] = off;
    off += static_cast<int>(marriages_[j].size());
  }
  marriage_offset_[n] = off;
  total_marriage_slots_ = off;
  default_pivot_ = p.proband() >= 0 ? p.proband() : 0;
}

PeelContext::PeelContext(const PeelContext&) = default;
PeelContext::PeelContext(PeelContext&&) noexcept = default;
PeelContext::~PeelContext() = default;

// One evaluation pass: memoized anterior / per-marriage posterior messages
// over the nuclear-family graph. Loop-freeness makes the recursion well
// founded: anterior calls climb to ancestors and sibling branches, posterior
// calls descend through marriages.
class PeelContext::Eval {
 public:
  Eval(const PeelContext& ctx, std::span<const ScaledVec> pens,
       const FounderPrior& prior, PeelScratch& ws)
      : ctx_(ctx), pens_(pens), prior_(prior), ws_(ws) {
    ws_.resize_for(ctx);
  }

  const ScaledVec& anterior(int j) {
    if (!ws_.anterior_done_[j]) {
      ws_.anterior_[j] = compute_anterior(j);
      ws_.anterior_done_[j] = 1;
    }
    return ws_.anterior_[j];
  }

  const ScaledVec& posterior(int j) {
    if (!ws_.posterior_done_[j]) {
      ScaledVec out;
      out.v = {1.0, 1.0, 1.0};
      for (int slot = 0; slot < marriage_count(j); ++slot) {
        const ScaledVec& pp = marriage_posterior(j, slot);
        for (int g = 0; g < 3; ++g) out.v[g] *= pp.v[g];
        out.log_scale += pp.log_scale;
      }
      out.rescale();
      ws_.posterior_[j] = out;
      ws_.posterior_done_[j] = 1;
    }
    return ws_.posterior_[j];
  }

  double log_total(int pivot) {
    const ScaledVec& a = anterior(pivot);
    const ScaledVec& pp = posterior(pivot);
    const ScaledVec& pen = pens_[pivot];
    double sum = 0.0;
    for (int g = 0; g < 3; ++g) sum += a.v[g] * pen.v[g] * pp.v[g];
    if (sum <= 0.0) return kNegInf;
    return std::log(sum) + a.log_scale + pen.log_scale + pp.log_scale;
  }

 private:
  int marriage_count(int j) const {
    return static_cast<int>(ctx_.marriages_[j].size());
  }

  // Full information arriving from member p into couple c: anterior, own
  // penetrance factor, and posteriors of all other marriages.
  ScaledVec inbound(int p, int couple) {
    ScaledVec out = anterior(p);
    const ScaledVec& pen = pens_[p];
    for (int g = 0; g < 3; ++g) out.v[g] *= pen.v[g];
    out.log_scale += pen.log_scale;
    for (int slot = 0; slot < marriage_count(p); ++slot) {
      if (ctx_.marriages_[p][slot] == couple) continue;
      const ScaledVec& pp = marriage_posterior(p, slot);
      for (int g = 0; g < 3; ++g) out.v[g] *= pp.v[g];
      out.log_scale += pp.log_scale;
    }
    out.rescale();
    return out;
  }

  // sum_gc tr(gc | gm, gf) pen_c(gc) P_c(gc), as a function of the couple.
  void child_factor(int child, ScaledMat& out) {
    const ScaledVec& pen = pens_[child];
    const ScaledVec& post = posterior(child);
    std::array<double, 3> w;
    for (int g = 0; g < 3; ++g) w[g] = pen.v[g] * post.v[g];
    for (int gf = 0; gf < 3; ++gf) {
      for (int gm = 0; gm < 3; ++gm) {
        double s = 0.0;
        for (int gc = 0; gc < 3; ++gc) s += kTr.t[gm][gf][gc] * w[gc];
        out.at(gf, gm) = s;
      }
    }
    out.log_scale = pen.log_scale + post.log_scale;
  }

  ScaledVec compute_anterior(int j) {
    const int c = ctx_.parent_couple_[j];
    if (c < 0) {
      ScaledVec out;
      out.v = {prior_.p[0], prior_.p[1], prior_.p[2]};
      out.rescale();
      return out;
    }
    const Nuclear& nuc = ctx_.couples_[c];
    const ScaledVec f_in = inbound(nuc.father, c);
    const ScaledVec m_in = inbound(nuc.mother, c);

    ScaledMat sibs;
    sibs.set_one();
    ScaledMat tmp;
    for (int child : nuc.children) {
      if (child == j) continue;
      child_factor(child, tmp);
      for (int i = 0; i < 9; ++i) sibs.m[i] *= tmp.m[i];
      sibs.log_scale += tmp.log_scale;
      sibs.rescale();
    }

    ScaledVec out;
    for (int g = 0; g < 3; ++g) {
      double s = 0.0;
      for (int gf = 0; gf < 3; ++gf) {
        if (f_in.v[gf] == 0.0) continue;
        for (int gm = 0; gm < 3; ++gm) {
          const double w = f_in.v[gf] * m_in.v[gm] * sibs.at(gf, gm);
          if (w == 0.0) continue;
          s += w * kTr.t[gm][gf][g];
        }
      }
      out.v[g] = s;
    }
    out.log_scale = f_in.log_scale + m_in.log_scale + sibs.log_scale;
    out.rescale();
    return out;
  }

  const ScaledVec& marriage_posterior(int j, int slot) {
    const int idx = ctx_.marriage_offset_[j] + slot;
    if (ws_.marriage_post_done_[idx]) return ws_.marriage_post_[idx];

    const int c = ctx_.marriages_[j][slot];
    const Nuclear& nuc = ctx_.couples_[c];
    const bool j_is_father = (nuc.father == j);
    const int spouse = j_is_father ? nuc.mother : nuc.father;
    const ScaledVec s_in = inbound(spouse, c);

    ScaledMat kids;
    kids.set_one();
    ScaledMat tmp;
    for (int child : nuc.children) {
      child_factor(child, tmp);
      for (int i = 0; i < 9; ++i) kids.m[i] *= tmp.m[i];
      kids.log_scale += tmp.log_scale;
      kids.rescale();
    }

    ScaledVec out;
    for (int gj = 0; gj < 3; ++gj) {
      double s = 0.0;
      for (int gs = 0; gs < 3; ++gs) {
        if (s_in.v[gs] == 0.0) continue;
        const double kid = j_is_father ? kids.at(gj, gs) : kids.at(gs, gj);
        s += s_in.v[gs] * kid;
      }
      out.v[gj] = s;
    }
    out.log_scale = s_in.log_scale + kids.log_scale;
    out.rescale();
    ws_.marriage_post_[idx] = out;
    ws_.marriage_post_done_[idx] = 1;
    return ws_.marriage_post_[idx];
  }

  const PeelContext& ctx_;
  std::span<const ScaledVec> pens_;
  const FounderPrior& prior_;
  PeelScratch& ws_;
};

double PeelContext::log_joint(std::span<const ScaledVec> pens,
                              const FounderPrior& prior, int pivot) const {
  PeelScratch scratch;
  return log_joint(pens, prior, scratch, pivot);
}

double PeelContext::log_joint(std::span<const ScaledVec> pens,
                              const FounderPrior& prior, PeelScratch& scratch,
                              int pivot) const {
  if (static_cast<int>(pens.size()) != size()) {
    throw DataError("member factor count mismatch");
  }
  if (pivot < 0) pivot = default_pivot_;
  if (pivot >= size()) throw DataError("pivot index outside pedigree");
  Eval eval(*this, pens, prior, scratch);
  return eval.log_total(pivot);
}

PeelMessages PeelContext::messages(std::span<const ScaledVec> pens,
                                   const FounderPrior& prior) const {
  PeelScratch scratch;
  Eval eval(*this, pens, prior, scratch);
  PeelMessages out;
  out.log_joint = eval.log_total(default_pivot_);
  out.anterior.reserve(size());
  out.posterior.reserve(size());
  for (int j = 0; j < size(); ++j) {
    out.anterior.push_back(eval.anterior(j));
    out.posterior.push_back(eval.posterior(j));
  }
  return out;
}

std::vector<ScaledVec> build_member_factors(const Pedigree& p,
                                            const ModelParams& m,
                                            std::span<const double> xi) {
  std::vector<ScaledVec> pens;
  pens.reserve(p.size());
  for (const Individual& ind : p.members()) {
    EventRecord rec{ind.phenotype.age / m.time_scale, ind.phenotype.cause};
    const double ll0 = individual_log_likelihood(m, 0, ind.sex, rec, xi);
    const double ll1 = individual_log_likelihood(m, 1, ind.sex, rec, xi);
    pens.push_back(member_factor(ll0, ll1, ind.genotype));
  }
  return pens;
}

double family_log_likelihood(const Pedigree& p, const ModelParams& m,
                             std::span<const double> xi,
                             const FounderPrior& prior, int pivot) {
  PeelContext ctx(p);
  std::vector<ScaledVec> obs;
  obs.reserve(p.size());
  for (const Individual& ind : p.members()) {
    obs.push_back(observation_factor(ind.genotype));
  }
  const double log_obs = ctx.log_joint(obs, prior, pivot);
  if (log_obs == kNegInf) {
    throw DataError("family " + p.family_id() +
                    ": observed genotypes are Mendelian-impossible");
  }
  const auto pens = build_member_factors(p, m, xi);
  const double log_joint = ctx.log_joint(pens, prior, pivot);
  return log_joint == kNegInf ? kNegInf : log_joint - log_obs;
}

}  // namespace penetrance
