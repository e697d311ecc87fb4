#include "penetrance/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "penetrance/beta_math.hpp"
#include "penetrance/common.hpp"

namespace penetrance {

BaselineKind baseline_kind_from_string(const std::string& name) {
  if (name == "bernstein") return BaselineKind::kBernstein;
  if (name == "exponential") return BaselineKind::kExponential;
  if (name == "weibull") return BaselineKind::kWeibull;
  if (name == "piecewise") return BaselineKind::kPiecewiseConstant;
  throw UsageError("unknown baseline kind: " + name);
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kBernstein:
      return "bernstein";
    case BaselineKind::kExponential:
      return "exponential";
    case BaselineKind::kWeibull:
      return "weibull";
    case BaselineKind::kPiecewiseConstant:
      return "piecewise";
  }
  return "?";
}

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw NumericError("rescaled time outside [0,1]");
  }
}

}  // namespace

void BaselineSpec::cdf_basis(double t, std::span<double> out) const {
  check_time(t);
  const int n = param_count;
  switch (kind) {
    case BaselineKind::kBernstein:
      for (int m = 1; m <= n; ++m) {
        out[m - 1] = reg_inc_beta(m, n - m + 1, t);
      }
      return;
    case BaselineKind::kExponential:
      out[0] = t;
      return;
    case BaselineKind::kPiecewiseConstant: {
      const double width = 1.0 / n;
      for (int b = 0; b < n; ++b) {
        out[b] = std::clamp(t - b * width, 0.0, width);
      }
      return;
    }
    case BaselineKind::kWeibull:
      throw NumericError("weibull baseline has no linear basis");
  }
}

void BaselineSpec::pdf_basis(double t, std::span<double> out) const {
  check_time(t);
  const int n = param_count;
  switch (kind) {
    case BaselineKind::kBernstein:
      for (int m = 1; m <= n; ++m) {
        out[m - 1] = beta_pdf(t, m, n - m + 1);
      }
      return;
    case BaselineKind::kExponential:
      out[0] = 1.0;
      return;
    case BaselineKind::kPiecewiseConstant: {
      int bin = std::min(static_cast<int>(t * n), n - 1);
      for (int b = 0; b < n; ++b) out[b] = (b == bin) ? 1.0 : 0.0;
      return;
    }
    case BaselineKind::kWeibull:
      throw NumericError("weibull baseline has no linear basis");
  }
}

double BaselineSpec::cumulative(std::span<const double> coef, double t) const {
  check_time(t);
  if (kind == BaselineKind::kWeibull) {
    return t == 0.0 ? 0.0 : coef[0] * std::pow(t, coef[1]);
  }
  std::vector<double> basis(param_count);
  cdf_basis(t, basis);
  double sum = 0.0;
  for (int i = 0; i < param_count; ++i) sum += coef[i] * basis[i];
  return sum;
}

double BaselineSpec::hazard(std::span<const double> coef, double t) const {
  check_time(t);
  if (kind == BaselineKind::kWeibull) {
    if (t == 0.0) {
      if (coef[1] == 1.0) return coef[0];
      return coef[1] < 1.0 ? kInf : 0.0;
    }
    return coef[0] * coef[1] * std::pow(t, coef[1] - 1.0);
  }
  std::vector<double> basis(param_count);
  pdf_basis(t, basis);
  double sum = 0.0;
  for (int i = 0; i < param_count; ++i) sum += coef[i] * basis[i];
  return sum;
}

void BaselineSpec::validate_coeffs(std::span<const double> coef) const {
  if (static_cast<int>(coef.size()) != param_count) {
    throw DataError("baseline coefficient count mismatch");
  }
  for (double c : coef) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw DataError("baseline coefficients must be nonnegative and finite");
    }
  }
  if (kind == BaselineKind::kWeibull && !(coef[1] > 0.0)) {
    throw DataError("weibull shape must be positive");
  }
}

Baseline::Baseline(BaselineSpec spec, std::vector<double> coef)
    : spec_(spec), coef_(std::move(coef)) {
  if (spec_.param_count < 1) throw DataError("baseline needs >= 1 parameter");
  spec_.validate_coeffs(coef_);
}

Baseline Baseline::bernstein(std::vector<double> coef) {
  BaselineSpec spec{BaselineKind::kBernstein, static_cast<int>(coef.size())};
  return Baseline(spec, std::move(coef));
}

double Baseline::cumulative(double t) const { return spec_.cumulative(coef_, t); }

double Baseline::hazard(double t) const { return spec_.hazard(coef_, t); }

}  // namespace penetrance
