#include "dunkl/quadrature.hpp"
#include "dunkl/special.hpp"

#include <gsl/gsl_sf_bessel.h>
#include <gtest/gtest.h>

#include <cmath>

using namespace dunkl;

namespace {

const double kSqrtPi = std::sqrt(M_PI);

double mass(double kappa, double t, double x) {
  const double reach = std::abs(x) + 40.0 * std::sqrt(t);
  auto g = [&](double y) { return rank_one_kernel_value(kappa, t, x, y) * std::pow(2.0 * y * y, kappa); };
  return adaptive_integral(g, {-reach, 0.0, reach}, 1e-13, 1e-11);
}

}  // namespace

TEST(BesselLambda, HalfIntegerClosedForms) {
  for (double z : {1e-3, 0.3, 1.2, 1.4999, 1.5, 2.0, 7.5, 40.0, 199.0, 250.0, 1e3, 1e5}) {
    // cosh(z) e^-z and sinh(z) e^-z without overflow.
    const double e2 = std::exp(-2.0 * z);
    const double ch = 0.5 * (1.0 + e2), sh = 0.5 * (1.0 - e2);
    const double lm = ch / kSqrtPi;
    const double l1 = 2.0 * sh / (z * kSqrtPi);
    const double l3 = 4.0 / (z * z * kSqrtPi) * (ch - sh / z);
    EXPECT_NEAR(bessel_lambda(-0.5, z), lm, 1e-14 * (1 + lm)) << z;
    EXPECT_NEAR(bessel_lambda(0.5, z), l1, 1e-13 * l1) << z;
    if (z > 0.1) EXPECT_NEAR(bessel_lambda(1.5, z), l3, 1e-9 * l3) << z;
  }
}

TEST(BesselLambda, ValueAtOriginAndBranchContinuity) {
  for (double nu : {-0.3, 0.0, 0.7, 2.2}) {
    EXPECT_NEAR(bessel_lambda(nu, 0.0), 1.0 / std::tgamma(nu + 1.0), 1e-14);
    const double below = bessel_lambda(nu, std::nextafter(1.5, 0.0));
    const double above = bessel_lambda(nu, 1.5);
    EXPECT_NEAR(below, above, 1e-13 * above) << nu;
  }
  EXPECT_THROW(bessel_lambda(-1.5, 1.0), DomainError);
  EXPECT_THROW(bessel_lambda(0.5, -1.0), DomainError);
}

TEST(BesselLambda, LargeArgumentBranch) {
  // Integer orders against GSL's dedicated scaled I0 and I1.
  for (double z : {150.0, 200.0, 201.0, 1e3, 4e4}) {
    const double tol = z > 200.0 ? 1e-14 : 1e-13;  // below 200 this is GSL's general-order routine
    EXPECT_NEAR(bessel_lambda(0.0, z), gsl_sf_bessel_I0_scaled(z), tol * gsl_sf_bessel_I0_scaled(z)) << z;
    EXPECT_NEAR(bessel_lambda(1.0, z), 2.0 / z * gsl_sf_bessel_I1_scaled(z), tol * bessel_lambda(1.0, z)) << z;
  }
  EXPECT_TRUE(std::isfinite(rank_one_kernel(0.5, 2e-6, 0.3, 0.3001, 2).dxx));
}

TEST(RankOneKernel, ReducesToGaussianAtZeroKappa) {
  double worst = 0.0;
  for (double t : {0.01, 0.1, 1.0, 10.0})
    for (double x : {-3.0, -0.2, 0.0, 0.5, 4.0})
      for (double y : {-2.5, -0.1, 0.0, 0.3, 6.0}) {
        const double g = std::exp(-(x - y) * (x - y) / (4 * t)) / std::sqrt(4 * M_PI * t);
        worst = std::max(worst, std::abs(rank_one_kernel_value(0.0, t, x, y) - g));
      }
  EXPECT_LE(worst, 1e-12);
}

TEST(RankOneKernel, StochasticallyComplete) {
  for (double kappa : {0.0, 0.3, 1.0, 2.5})
    for (double t : {0.1, 1.0, 10.0})
      for (double x : {0.1, 1.0, 5.0}) EXPECT_NEAR(mass(kappa, t, x), 1.0, 1e-6) << kappa << " " << t << " " << x;
}

TEST(RankOneKernel, Symmetric) {
  for (double kappa : {0.4, 1.7})
    for (double t : {0.05, 1.0})
      for (double x : {-1.3, 0.2, 2.0})
        for (double y : {-0.7, 0.9, 3.1}) {
          const double a = rank_one_kernel_value(kappa, t, x, y);
          EXPECT_NEAR(a, rank_one_kernel_value(kappa, t, y, x), 1e-10 * a);
        }
}

TEST(RankOneKernel, SemigroupIdentity) {
  const double kappa = 0.8, s = 0.3, t = 0.5;
  for (auto [x, y] : {std::pair{0.4, -1.1}, std::pair{1.5, 0.7}, std::pair{-0.2, -2.0}}) {
    auto g = [&](double z) {
      return rank_one_kernel_value(kappa, s, x, z) * rank_one_kernel_value(kappa, t, z, y) * std::pow(2 * z * z, kappa);
    };
    const double lhs = adaptive_integral(g, {-20.0, 0.0, 20.0}, 1e-14, 1e-11);
    const double rhs = rank_one_kernel_value(kappa, s + t, x, y);
    EXPECT_NEAR(lhs, rhs, 1e-5 * rhs);
  }
}

TEST(RankOneKernel, DerivativesMatchDifferences) {
  const double h = 1e-4;
  for (double kappa : {0.0, 0.6, 2.0})
    for (double x : {-1.7, -0.05, 0.3, 2.4}) {
      const double t = 0.4, y = 0.9;
      const KernelJet j = rank_one_kernel(kappa, t, x, y, 2);
      auto v = [&](double s) { return rank_one_kernel_value(kappa, t, s, y); };
      const double d1 = (v(x - 2 * h) - 8 * v(x - h) + 8 * v(x + h) - v(x + 2 * h)) / (12 * h);
      const double d2 = (-v(x - 2 * h) + 16 * v(x - h) - 30 * v(x) + 16 * v(x + h) - v(x + 2 * h)) / (12 * h * h);
      EXPECT_NEAR(j.dx, d1, 1e-8 * (1 + std::abs(d1)));
      EXPECT_NEAR(j.dxx, d2, 1e-6 * (1 + std::abs(d2)));
    }
}

// d/dt h = f'' + kappa [2 f'/x - (f(x) - f(-x))/x^2] in the x variable.
TEST(RankOneKernel, SolvesHeatEquation) {
  const double kappa = 1.3, y = -0.6, ht = 1e-5;
  for (double t : {0.2, 1.0})
    for (double x : {-1.0, 0.4, 2.2}) {
      const KernelJet j = rank_one_kernel(kappa, t, x, y, 2);
      const double flip = rank_one_kernel_value(kappa, t, -x, y);
      const double lap = j.dxx + kappa * (2 * j.dx / x - (j.value - flip) / (x * x));
      const double dt = (rank_one_kernel_value(kappa, t + ht, x, y) - rank_one_kernel_value(kappa, t - ht, x, y)) / (2 * ht);
      EXPECT_NEAR(dt, lap, 1e-6 * (1 + std::abs(lap)));
    }
}

TEST(Quadrature, LaguerreCalibration) {
  const Rule r = gauss_laguerre(48, -0.5);
  EXPECT_NEAR(r.integrate([](double) { return 1.0; }), kSqrtPi, 1e-13);
  EXPECT_NEAR(r.integrate([](double u) { return u; }), kSqrtPi / 2, 1e-13);
}

TEST(Quadrature, LegendreAndJacobiExactness) {
  const Rule l = gauss_legendre(4, 0.0, 2.0);
  EXPECT_NEAR(l.integrate([](double x) { return std::pow(x, 7); }), 32.0, 1e-12);
  // int_0^1 x^2 (1-x)^(1/2) dx = B(3, 3/2) = 16/105
  const Rule j = gauss_jacobi(6, 0.0, 1.0, 0.5, 0.0);
  EXPECT_NEAR(j.integrate([](double x) { return x * x; }), 16.0 / 105.0, 1e-14);
  EXPECT_THROW(gauss_jacobi(4, 0, 1, -1.0, 0.0), ValidationError);
}

TEST(Quadrature, HalfLineWeightedGaussianMoments) {
  for (double kappa : {0.0, 0.35, 1.0, 2.5}) {
    HalfLineSpec spec;
    spec.kappa = kappa;
    const double exact = std::pow(2.0, kappa) * std::tgamma(kappa + 0.5) / 2.0;
    const double got = half_line_rule(spec).integrate([](double y) { return std::exp(-y * y); });
    EXPECT_NEAR(got, exact, 1e-12 * exact) << kappa;
    spec.panels *= 2;
    spec.nodes *= 2;
    EXPECT_NEAR(half_line_rule(spec).integrate([](double y) { return std::exp(-y * y); }), got, 1e-7 * exact);
  }
}

TEST(Quadrature, TailMapHandlesPowerDecay) {
  // int_0^inf (1 + y^2)^-2 |sqrt2 y|^(2k) dy at k = 0.5: sqrt2 * 1/2.
  HalfLineSpec spec;
  spec.kappa = 0.5;
  spec.radius = 4.0;
  spec.tail_decay = 3.0;
  spec.tail_nodes = 24;
  const double got = half_line_rule(spec).integrate([](double y) { return std::pow(1 + y * y, -2.0); });
  EXPECT_NEAR(got, std::sqrt(2.0) * 0.5, 1e-9);
}

TEST(Quadrature, AdaptiveWithBreakpoints) {
  const double v = adaptive_integral([](double x) { return std::sqrt(std::abs(x)); }, {-1.0, 0.0, 1.0}, 1e-12, 1e-12);
  EXPECT_NEAR(v, 4.0 / 3.0, 1e-10);
  const double w = adaptive_integral_upper([](double x) { return std::exp(-x); }, 1.0, 1e-14, 1e-12);
  EXPECT_NEAR(w, std::exp(-1.0), 1e-12);
}
