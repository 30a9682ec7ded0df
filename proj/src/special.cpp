#include "dunkl/special.hpp"

#include "dunkl/common.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <string>

namespace dunkl {

namespace {

// Power series; used below z = 1.5 where it converges in a handful of terms
// and avoids the (z/2)^-nu rescaling of a tiny I_nu.
double lambda_series(double nu, double z) {
  const double q = 0.25 * z * z;
  double term = 1.0 / std::tgamma(nu + 1.0);
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (k * (nu + k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-z);
}

// e^-z I_nu(z) ~ (2 pi z)^-1/2 sum_k (-1)^k a_k(nu) / z^k; at z > 200 the
// terms fall to round-off long before the series turns around. GSL's
// Inu_scaled returns NaN at nu = 0 for z >= 1000.
double scaled_asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

double lambda_gsl(double nu, double z) {
  if (z > 200.0) return std::exp(-nu * std::log(0.5 * z)) * scaled_asymptotic(nu, z);
  gsl_sf_result r;
  const int status = gsl_sf_bessel_Inu_scaled_e(nu, z, &r);
  if (status != GSL_SUCCESS)
    throw NumericError("Bessel I_nu failed for nu = " + std::to_string(nu) +
                       ", z = " + std::to_string(z) + ": " + gsl_strerror(status));
  return std::exp(-nu * std::log(0.5 * z)) * r.val;
}

struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet quiet_gsl;

}  // namespace

double bessel_lambda(double nu, double z) {
  if (!(nu > -1.0)) throw DomainError("bessel_lambda: order must exceed -1");
  if (!(z >= 0.0)) throw DomainError("bessel_lambda: argument must be >= 0");
  if (z < 1.5) return lambda_series(nu, z);
  if (nu >= 0.0) return lambda_gsl(nu, z);
  // I_nu = I_{nu+2} + 2(nu+1)/z I_{nu+1}, both terms positive.
  return (nu + 1.0) * lambda_gsl(nu + 1.0, z) + 0.25 * z * z * lambda_gsl(nu + 2.0, z);
}

KernelJet rank_one_kernel(double kappa, double t, double x, double y, int order) {
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  if (!(kappa >= 0.0)) throw DomainError("heat kernel needs kappa >= 0");
  const double u = x * y / (2.0 * t);
  const double z = std::abs(u);
  const double a = bessel_lambda(kappa - 0.5, z);
  const double b = bessel_lambda(kappa + 0.5, z);
  const double gap = std::abs(x) - std::abs(y);
  const double pref =
      std::exp(-(3.0 * kappa + 1.0) * M_LN2 - (kappa + 0.5) * std::log(t) - gap * gap / (4.0 * t));

  KernelJet j;
  const double phi = a + 0.5 * u * b;
  j.value = pref * phi;
  if (order < 1) return j;
  const double phi1 = phi - kappa * b;
  const double ax = x / (2.0 * t), ay = y / (2.0 * t);
  j.dx = pref * (-ax * phi + ay * phi1);
  if (order < 2) return j;
  const double c = bessel_lambda(kappa + 1.5, z);
  const double phi2 = phi1 - kappa * 0.5 * u * c;
  j.dxx = pref * ((ax * ax - 1.0 / (2.0 * t)) * phi - 2.0 * ax * ay * phi1 + ay * ay * phi2);
  return j;
}

}  // namespace dunkl
