#include "dunkl/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace dunkl {

namespace {

Rule fixed_rule(const gsl_integration_fixed_type* type, int n, double a, double b, double alpha,
                double beta) {
  if (n < 1) throw ValidationError("quadrature needs at least one node");
  gsl_set_error_handler_off();
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(type, static_cast<std::size_t>(n), a, b, alpha, beta),
      &gsl_integration_fixed_free);
  if (!ws) throw NumericError("gsl_integration_fixed_alloc failed");
  const double* nodes = gsl_integration_fixed_nodes(ws.get());
  const double* weights = gsl_integration_fixed_weights(ws.get());
  Rule r;
  r.x.assign(nodes, nodes + n);
  r.w.assign(weights, weights + n);
  return r;
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
  return fixed_rule(gsl_integration_fixed_legendre, n, a, b, 0.0, 0.0);
}

Rule gauss_jacobi(int n, double a, double b, double alpha, double beta) {
  if (!(alpha > -1.0) || !(beta > -1.0)) throw ValidationError("Jacobi exponents must exceed -1");
  return fixed_rule(gsl_integration_fixed_jacobi, n, a, b, alpha, beta);
}

Rule gauss_laguerre(int n, double alpha) {
  if (!(alpha > -1.0)) throw ValidationError("Laguerre exponent must exceed -1");
  return fixed_rule(gsl_integration_fixed_laguerre, n, 0.0, 1.0, alpha, 0.0);
}

Rule half_line_rule(const HalfLineSpec& s) {
  if (!(s.kappa >= 0.0)) throw ValidationError("half_line_rule: kappa must be >= 0");
  if (!(s.radius > 0.0) || s.panels < 1 || s.nodes < 1)
    throw ValidationError("half_line_rule: bad radius or node counts");
  const double scale = std::pow(2.0, s.kappa);
  const double h = s.radius / s.panels;
  Rule out;
  for (int p = 0; p < s.panels; ++p) {
    const double a = p * h, b = a + h;
    if (p == 0 && s.kappa > 0.0) {
      Rule r = gauss_jacobi(s.nodes, a, b, 0.0, 2.0 * s.kappa);
      for (double& w : r.w) w *= scale;
      out.append(r);
    } else {
      Rule r = gauss_legendre(s.nodes, a, b);
      for (std::size_t k = 0; k < r.size(); ++k) r.w[k] *= scale * std::pow(r.x[k], 2.0 * s.kappa);
      out.append(r);
    }
  }
  if (s.tail_decay > 1.0 && s.tail_nodes > 0) {
    const double q = s.tail_decay;
    Rule r = gauss_jacobi(s.tail_nodes, 0.0, 1.0, 0.0, q - 2.0);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double sk = r.x[k];
      const double y = s.radius / sk;
      // dy = R/s^2 ds; the Jacobi weight s^(q-2) is divided back out.
      r.w[k] *= scale * std::pow(y, 2.0 * s.kappa) * s.radius / (sk * sk) / std::pow(sk, q - 2.0);
      r.x[k] = y;
    }
    out.append(r);
  }
  return out;
}

Rule full_line_rule(const HalfLineSpec& spec) {
  const Rule half = half_line_rule(spec);
  Rule out;
  for (std::size_t k = half.size(); k-- > 0;) {
    out.x.push_back(-half.x[k]);
    out.w.push_back(half.w[k]);
  }
  out.append(half);
  return out;
}

namespace {

double trampoline(double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); }

struct Workspace {
  explicit Workspace(std::size_t n) : ws(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(ws); }
  gsl_integration_workspace* ws;
};

}  // namespace

double adaptive_integral(const std::function<double(double)>& f, std::vector<double> pts,
                         double abs_tol, double rel_tol) {
  gsl_set_error_handler_off();
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) throw ValidationError("adaptive_integral needs an interval");
  Workspace w(2000);
  gsl_function F{&trampoline, const_cast<std::function<double(double)>*>(&f)};
  double result = 0.0, err = 0.0;
  const int status =
      gsl_integration_qagp(&F, pts.data(), pts.size(), abs_tol, rel_tol, 2000, w.ws, &result, &err);
  if (status != GSL_SUCCESS && err > 10.0 * std::max(abs_tol, rel_tol * std::abs(result)))
    throw ResolutionError(std::string("adaptive quadrature did not converge: ") + gsl_strerror(status) +
                          " (estimated error " + std::to_string(err) + ")");
  return result;
}

double adaptive_integral_upper(const std::function<double(double)>& f, double a, double abs_tol,
                               double rel_tol) {
  gsl_set_error_handler_off();
  Workspace w(2000);
  gsl_function F{&trampoline, const_cast<std::function<double(double)>*>(&f)};
  double result = 0.0, err = 0.0;
  const int status = gsl_integration_qagiu(&F, a, abs_tol, rel_tol, 2000, w.ws, &result, &err);
  if (status != GSL_SUCCESS && err > 10.0 * std::max(abs_tol, rel_tol * std::abs(result)))
    throw ResolutionError(std::string("adaptive quadrature did not converge: ") + gsl_strerror(status) +
                          " (estimated error " + std::to_string(err) + ")");
  return result;
}

}  // namespace dunkl
