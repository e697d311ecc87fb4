#include "penetrance/riskmodel.hpp"

#include <cmath>

#include "penetrance/common.hpp"
#include "penetrance/quadrature.hpp"

namespace penetrance {

double covariate_value(CovTerm term, int carrier, Sex sex) {
  switch (term) {
    case CovTerm::kCarrier:
      return carrier;
    case CovTerm::kMale:
      return sex_covariate(sex);
    case CovTerm::kInteraction:
      return carrier * sex_covariate(sex);
  }
  return 0.0;
}

double linear_predictor(const CauseDesign& design, std::span<const double> beta,
                        int carrier, Sex sex) {
  double eta = 0.0;
  for (int i = 0; i < design.dim(); ++i) {
    eta += beta[i] * covariate_value(design.terms[i], carrier, sex);
  }
  return eta;
}

bool hazard_is_zero(const CauseDesign& design, int carrier, Sex sex) {
  return design.zero_hazard && design.zero_hazard->fires(carrier, sex);
}

void ModelParams::check() const {
  if (causes.empty() || designs.size() != causes.size()) {
    throw DataError("model needs matching designs and causes, K >= 1");
  }
  if (!(time_scale > 0.0)) throw DataError("time_scale must be positive");
  for (int k = 0; k < cause_count(); ++k) {
    if (static_cast<int>(causes[k].beta.size()) != designs[k].dim()) {
      throw DataError("beta dimension mismatch for cause " + std::to_string(k + 1));
    }
    if (frailty && !(causes[k].frailty_precision > 0.0)) {
      throw DataError("frailty precision must be positive");
    }
  }
}

namespace {

void check_cause(const ModelParams& m, int k) {
  if (k < 0 || k >= m.cause_count()) {
    throw DataError("cause index out of range: " + std::to_string(k + 1));
  }
}

double xi_or_one(std::span<const double> xi, int k) {
  return xi.empty() ? 1.0 : xi[k];
}

// Penetrance integrand for cause k at rescaled time u, frailty marginalized:
//   [v/(v + L*_k(u))] * lam0_k(u) e^{eta_k} * prod_j S_j(u)
// with the frailty factor dropping to 1 when the model has no frailty.
struct PenetranceIntegrand {
  const ModelParams& m;
  int k;
  int carrier;
  Sex sex;

  double operator()(double u) const {
    if (hazard_is_zero(m.designs[k], carrier, sex)) return 0.0;
    const CauseParams& cp = m.causes[k];
    const double eta = linear_predictor(m.designs[k], cp.beta, carrier, sex);
    const double lam = cp.baseline.hazard(u) * std::exp(eta);
    double value = lam;
    if (m.frailty) {
      const double cum = cp.baseline.cumulative(u) * std::exp(eta);
      value *= cp.frailty_precision / (cp.frailty_precision + cum);
    }
    return value * overall_survival(m, carrier, sex, u);
  }
};

}  // namespace

double cause_hazard(const ModelParams& m, int k, int carrier, Sex sex,
                    double xi_k, double t) {
  check_cause(m, k);
  if (hazard_is_zero(m.designs[k], carrier, sex)) return 0.0;
  const CauseParams& cp = m.causes[k];
  const double eta = linear_predictor(m.designs[k], cp.beta, carrier, sex);
  return cp.baseline.hazard(t) * xi_k * std::exp(eta);
}

double conditional_cumulative_hazard(const ModelParams& m, int k, int carrier,
                                     Sex sex, double xi_k, double t) {
  check_cause(m, k);
  if (hazard_is_zero(m.designs[k], carrier, sex)) return 0.0;
  const CauseParams& cp = m.causes[k];
  const double eta = linear_predictor(m.designs[k], cp.beta, carrier, sex);
  return cp.baseline.cumulative(t) * xi_k * std::exp(eta);
}

double marginal_cause_survival(const ModelParams& m, int k, int carrier,
                               Sex sex, double t) {
  check_cause(m, k);
  const double cum = conditional_cumulative_hazard(m, k, carrier, sex, 1.0, t);
  if (!m.frailty) return std::exp(-cum);
  const double v = m.causes[k].frailty_precision;
  // (v/(v+cum))^v, written to stay exact in the v -> inf limit.
  return std::exp(-v * std::log1p(cum / v));
}

double overall_survival(const ModelParams& m, int carrier, Sex sex, double t) {
  double s = 1.0;
  for (int k = 0; k < m.cause_count(); ++k) {
    s *= marginal_cause_survival(m, k, carrier, sex, t);
  }
  return s;
}

double cause_penetrance(const ModelParams& m, int k, int carrier, Sex sex,
                        double t, int quad_order, double tol) {
  check_cause(m, k);
  if (t == 0.0) return 0.0;
  PenetranceIntegrand f{m, k, carrier, sex};
  const QuadResult r = integrate_with_estimate(
      [&](double u) { return f(u); }, 0.0, t, quad_order);
  if (!(r.error_estimate <= tol)) {
    throw NumericError("penetrance quadrature did not converge: estimate " +
                       std::to_string(r.error_estimate));
  }
  return r.value;
}

double overall_penetrance(const ModelParams& m, int carrier, Sex sex, double t,
                          int quad_order, double tol) {
  double q = 0.0;
  for (int k = 0; k < m.cause_count(); ++k) {
    q += cause_penetrance(m, k, carrier, sex, t, quad_order, tol);
  }
  return q;
}

std::vector<double> penetrance_grid(const ModelParams& m, int carrier, Sex sex,
                                    std::span<const double> grid,
                                    int nodes_per_segment) {
  const int K = m.cause_count();
  const int n = static_cast<int>(grid.size());
  std::vector<double> out(static_cast<size_t>(K) * n, 0.0);
  std::vector<PenetranceIntegrand> fs;
  fs.reserve(K);
  for (int k = 0; k < K; ++k) fs.push_back({m, k, carrier, sex});

  std::vector<double> acc(K, 0.0);
  double prev = 0.0;
  const GaussLegendre& rule = gauss_legendre(nodes_per_segment);
  for (int i = 0; i < n; ++i) {
    const double t = grid[i];
    if (t < prev) throw DataError("penetrance grid must be nondecreasing");
    if (t > prev) {
      const double half = 0.5 * (t - prev);
      const double mid = 0.5 * (t + prev);
      for (int q = 0; q < nodes_per_segment; ++q) {
        const double u = mid + half * rule.nodes[q];
        const double w = half * rule.weights[q];
        for (int k = 0; k < K; ++k) acc[k] += w * fs[k](u);
      }
      prev = t;
    }
    for (int k = 0; k < K; ++k) out[static_cast<size_t>(k) * n + i] = acc[k];
  }
  return out;
}

double individual_log_likelihood(const ModelParams& m, int carrier, Sex sex,
                                 const EventRecord& rec,
                                 std::span<const double> xi) {
  if (!(rec.time >= 0.0 && rec.time <= 1.0)) {
    throw NumericError("event time outside rescaled range [0,1]");
  }
  if (rec.cause < 0 || rec.cause > m.cause_count()) {
    throw DataError("event cause outside model range");
  }
  double ll = 0.0;
  for (int k = 0; k < m.cause_count(); ++k) {
    const double x = xi_or_one(xi, k);
    if (hazard_is_zero(m.designs[k], carrier, sex)) {
      if (rec.cause == k + 1) return kNegInf;
      continue;
    }
    ll -= conditional_cumulative_hazard(m, k, carrier, sex, x, rec.time);
    if (rec.cause == k + 1) {
      const double lam = cause_hazard(m, k, carrier, sex, x, rec.time);
      ll += std::log(lam);
    }
  }
  return ll;
}

}  // namespace penetrance
