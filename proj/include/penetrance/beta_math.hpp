#pragma once

namespace penetrance {

// Regularized incomplete beta function I_x(a, b), the Beta(a, b) distribution
// function. Continued-fraction evaluation, accurate to ~1e-14 relative on
// [0,1] for the moderate (a, b) used by the Bernstein basis.
double reg_inc_beta(double a, double b, double x);

// Beta(a, b) density at x in [0, 1]. Boundary conventions: finite limits are
// returned where they exist (a=1 at x=0, b=1 at x=1), otherwise 0 or +inf.
double beta_pdf(double x, double a, double b);

double log_beta(double a, double b);

}  // namespace penetrance
