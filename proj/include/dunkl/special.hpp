#pragma once

namespace dunkl {

/// Lambda_nu(z) = (z/2)^(-nu) I_nu(z) e^(-z) for nu > -1, z >= 0.
/// Equals 1/Gamma(nu+1) at z = 0 and decays like (z/2)^(-nu)/sqrt(2 pi z).
double bessel_lambda(double nu, double z);

/// Value and x-derivatives of the rank-one Dunkl heat kernel h_kappa(t,x,y)
/// with respect to dmu = |sqrt2 y|^(2 kappa) dy and generator Delta_kappa:
///   h = 2^(-3k-1) t^(-k-1/2) exp(-(|x|-|y|)^2/4t) [L_{k-1/2}(|u|) + (u/2) L_{k+1/2}(|u|)],
/// u = xy/2t. For kappa = 0 this is the Gaussian (4 pi t)^(-1/2) exp(-(x-y)^2/4t).
struct KernelJet {
  double value = 0.0;
  double dx = 0.0;
  double dxx = 0.0;
};

/// order 0: value only; 1: adds dx; 2: adds dxx.
KernelJet rank_one_kernel(double kappa, double t, double x, double y, int order = 0);

inline double rank_one_kernel_value(double kappa, double t, double x, double y) {
  return rank_one_kernel(kappa, t, x, y, 0).value;
}

}  // namespace dunkl
