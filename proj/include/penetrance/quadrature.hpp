#pragma once

#include <functional>
#include <span>
#include <vector>

namespace penetrance {

// Gauss-Legendre nodes/weights on [-1, 1]. Cached per order.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int order);

// Integrates f over [a, b] with a fixed-order rule.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order = 64);

// Result of an order-doubling error estimate.
struct QuadResult {
  double value;
  double error_estimate;
};

QuadResult integrate_with_estimate(const std::function<double(double)>& f,
                                   double a, double b, int order = 64);

}  // namespace penetrance
