#pragma once

#include "dunkl/common.hpp"

#include <functional>
#include <vector>

namespace dunkl {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
  double integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * f(x[k]);
    return s;
  }
  void append(const Rule& o) {
    x.insert(x.end(), o.x.begin(), o.x.end());
    w.insert(w.end(), o.w.begin(), o.w.end());
  }
};

// Gauss rules backed by gsl_integration_fixed. Weights include the weight function.
Rule gauss_legendre(int n, double a, double b);
/// Weight (b - x)^alpha (x - a)^beta on [a, b].
Rule gauss_jacobi(int n, double a, double b, double alpha, double beta);
/// Weight x^alpha e^-x on [0, inf).
Rule gauss_laguerre(int n, double alpha);

/// Rule for integrals of smooth g against |sqrt2 y|^(2 kappa) dy on [0, inf),
/// with `panels` geometric-ish panels on [0, R] and a compactified tail on
/// [R, inf) that assumes g(y) |y|^(2 kappa) ~ y^-q (q > 1). Nodes are positive;
/// callers mirror them for the full line.
struct HalfLineSpec {
  double kappa = 0.0;
  double radius = 8.0;
  int panels = 8;
  int nodes = 12;      // per panel
  int tail_nodes = 12;
  double tail_decay = 0.0;  // q; <= 1 disables the tail
};
Rule half_line_rule(const HalfLineSpec& spec);

/// Symmetric full-line version: nodes at +-y with the half-line weights.
Rule full_line_rule(const HalfLineSpec& spec);

/// Adaptive 1D integral on [a, b] with breakpoints (GSL qagp). Throws
/// ResolutionError when the requested tolerance is not met.
double adaptive_integral(const std::function<double(double)>& f, std::vector<double> breakpoints,
                         double abs_tol, double rel_tol);
/// Same on [a, inf) (GSL qagiu).
double adaptive_integral_upper(const std::function<double(double)>& f, double a, double abs_tol,
                               double rel_tol);

}  // namespace dunkl
