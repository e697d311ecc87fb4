#include "penetrance/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace penetrance {

namespace {

// Newton iteration on Legendre polynomials; standard construction.
GaussLegendre build_rule(int n) {
  GaussLegendre r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

std::map<int, GaussLegendre> g_rules;
std::mutex g_rules_mutex;

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  std::lock_guard<std::mutex> lock(g_rules_mutex);
  auto it = g_rules.find(order);
  if (it == g_rules.end()) {
    it = g_rules.emplace(order, build_rule(order)).first;
  }
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int order) {
  if (a == b) return 0.0;
  const GaussLegendre& r = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < order; ++i) {
    sum += r.weights[i] * f(mid + half * r.nodes[i]);
  }
  return half * sum;
}

QuadResult integrate_with_estimate(const std::function<double(double)>& f,
                                   double a, double b, int order) {
  const double coarse = integrate(f, a, b, order);
  const double fine = integrate(f, a, b, 2 * order);
  return {fine, std::fabs(fine - coarse)};
}

}  // namespace penetrance
