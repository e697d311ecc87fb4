#pragma once

#include <span>
#include <string>
#include <vector>

namespace penetrance {

enum class BaselineKind {
  kBernstein,
  kExponential,
  kWeibull,
  kPiecewiseConstant,
};

BaselineKind baseline_kind_from_string(const std::string& name);
std::string to_string(BaselineKind kind);

// Shape of a cumulative baseline hazard family on rescaled time [0, 1].
//
// The primary model uses the Bernstein representation: the cumulative hazard
// is coef . cdf_basis(t) where basis element m is the Beta(m, M-m+1)
// distribution function, and the hazard is the matching beta-density dot
// product. Exponential and piecewise-constant are also linear in their
// coefficients; Weibull (coef = {scale, shape}) is not.
struct BaselineSpec {
  BaselineKind kind = BaselineKind::kBernstein;
  int param_count = 5;  // Bernstein degree M, or piecewise bin count

  bool linear_in_coeffs() const { return kind != BaselineKind::kWeibull; }

  // Only valid for linear kinds.
  void cdf_basis(double t, std::span<double> out) const;
  void pdf_basis(double t, std::span<double> out) const;

  double cumulative(std::span<const double> coef, double t) const;
  double hazard(std::span<const double> coef, double t) const;

  void validate_coeffs(std::span<const double> coef) const;
};

// Immutable (spec, coefficients) pair.
class Baseline {
 public:
  Baseline(BaselineSpec spec, std::vector<double> coef);
  static Baseline bernstein(std::vector<double> coef);

  // Both require t in [0, 1].
  double cumulative(double t) const;
  double hazard(double t) const;

  const BaselineSpec& spec() const { return spec_; }
  std::span<const double> coef() const { return coef_; }

 private:
  BaselineSpec spec_;
  std::vector<double> coef_;
};

}  // namespace penetrance
