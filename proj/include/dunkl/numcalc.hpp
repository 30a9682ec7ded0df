#pragma once

#include "dunkl/common.hpp"
#include "dunkl/polyx.hpp"
#include "dunkl/rootsys.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dunkl {

// Below this |<alpha,x>| the reflection quotient switches to its limit.
inline constexpr double kHyperplaneEps = 1e-6;

// ---------------------------------------------------------------------------
// Separable representation shared with heatflow.

/// One-variable factor with analytic value, first and second derivative.
struct Factor1D {
  enum class Kind { Constant, Power, Gaussian, Bump, DunklGauss };

  Kind kind = Kind::Constant;
  int power = 0;       // Power: x^power
  double a = 1.0;      // Gaussian: exp(-a (x - c)^2); Bump: radius
  double c = 0.0;      // center
  double tau = 1.0;    // DunklGauss: h_kappa(tau, x, m)
  double m = 0.0;
  double kappa = 0.0;

  static Factor1D constant() { return {}; }
  static Factor1D monomial(int n);
  static Factor1D gaussian(double a, double c);
  static Factor1D bump(double radius, double c);
  static Factor1D dunkl_gauss(double kappa, double tau, double m);

  /// value, d/dx, d2/dx2
  std::array<double, 3> jet(double x) const;
  double value(double x) const { return jet(x)[0]; }
  bool compact() const { return kind == Kind::Bump; }
  std::string describe() const;
};

struct SeparableTerm {
  double coeff = 1.0;
  std::vector<Factor1D> factors;
};

/// f(x) = sum_k coeff_k prod_i phi_{k,i}(x_i).
struct SeparableSum {
  int dim = 1;
  std::vector<SeparableTerm> terms;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
};

// ---------------------------------------------------------------------------

struct FdOptions {
  double h = 1e-4;          // first-level gradient/Hessian fallback step
  double h_outer = 1e-3;    // step for derivatives of derived quantities
  bool richardson = true;
};

enum class Smoothness { C2, C4 };

/// A smooth test function: evaluation oracle, optional analytic gradient and
/// Hessian, and finite differences otherwise.
class ScalarField {
 public:
  using Fn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  ScalarField(int dim, Fn f, std::string name = "custom");

  ScalarField& with_gradient(GradFn g);
  ScalarField& with_hessian(HessFn h);
  ScalarField& with_probe_box(Vec center, double radius);

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hess_); }

  double operator()(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  const std::optional<SeparableSum>& separable() const { return separable_; }
  const Vec& probe_center() const { return probe_center_; }
  double probe_radius() const { return probe_radius_; }

  struct Audit {
    bool pass = true;
    int probes = 0;
    double worst_gradient = 0.0;  // relative mismatch
    double worst_hessian = 0.0;
  };
  /// Analytic derivatives against central differences at random probes in
  /// the probe box, relative tolerance 1e-6.
  Audit audit(int probes = 100, std::uint64_t seed = 0x5eed) const;

  FdOptions fd;
  Smoothness smoothness = Smoothness::C4;

 private:
  friend ScalarField from_separable(SeparableSum s, std::string name);

  int dim_;
  std::string name_;
  Fn f_;
  GradFn grad_;
  HessFn hess_;
  std::optional<SeparableSum> separable_;
  Vec probe_center_;
  double probe_radius_ = 2.0;
};

ScalarField from_separable(SeparableSum s, std::string name);

namespace fields {
/// exp(-a |x - c|^2)
ScalarField gaussian(int dim, double a, const Vec& center);
/// prod_i exp(-1 / (1 - ((x_i - c_i)/r)^2)) inside the cube, 0 outside.
ScalarField bump(int dim, double radius, const Vec& center);
ScalarField polynomial(const Polynomial& p);
/// prod_i h_{kappa_i}(tau, x_i, m_i): heat kernels started at m, which the
/// flow maps to themselves with tau -> tau + t.
ScalarField dunkl_gaussian(const RootSystem& rs, double tau, const Vec& m);
ScalarField constant(int dim, double c);
/// Linear combination of separable fields.
ScalarField mixture(const std::vector<std::pair<double, ScalarField>>& parts);
/// Builds one of the above from text: `gaussian:a=1,c=0.5`, `bump:r=1.5`,
/// `poly:3/2 x1^2 - 1 x2`, `dgauss:tau=0.5,m=0.3`, `const:2`. Vector
/// parameters take `;`-separated coordinates, scalars are broadcast.
ScalarField parse(const std::string& spec, const RootSystem& rs);
}  // namespace fields

// ---------------------------------------------------------------------------
// Pointwise data for first-order quantities.

/// Value, gradient and reflected values f(r_alpha x) at a point.
struct Jet {
  double value = 0.0;
  Vec grad;
  std::vector<double> reflected;
  // Optional correction for the near-hyperplane limit: <alpha, Hess alpha>.
  std::vector<double> curvature;

  Jet& axpy(double s, const Jet& o);
};

Jet make_jet(const ScalarField& f, const Vec& x, const RootSystem& rs);

/// (f(x) - f(r_alpha x)) / <alpha, x>, or its limit near H_alpha.
double reflection_quotient(const Jet& j, std::size_t root, const Vec& x, const RootSystem& rs);

double gamma_jet(const Jet& f, const Jet& g, const Vec& x, const RootSystem& rs);
double grad_sq_jet(const Jet& f);
double dunkl_grad_sq_jet(const Jet& f, const Vec& x, const RootSystem& rs);

struct GpParams {
  double p = 1.5;
  int nodes = 64;
};
void validate(const GpParams& params);

/// Integral representation of G_p from value/gradient data.
double gp_integral_jet(const Jet& f, const Vec& x, const GpParams& params, const RootSystem& rs);
/// The defining expression through the chain rule for f^p; no quadrature.
double gp_definition_jet(const Jet& f, const Vec& x, const GpParams& params, const RootSystem& rs);

// ---------------------------------------------------------------------------
// Operators on fields.

double gamma_num(const ScalarField& f, const ScalarField& g, const Vec& x, const RootSystem& rs);
double gamma_num(const ScalarField& f, const Vec& x, const RootSystem& rs);
double dunkl_grad_sq(const ScalarField& f, const Vec& x, const RootSystem& rs);
double grad_sq(const ScalarField& f, const Vec& x);
/// Delta_kappa f(x) from the closed form, with the hyperplane limit.
double dunkl_laplacian_num(const ScalarField& f, const Vec& x, const RootSystem& rs);

double gamma2_explicit_rank1(const ScalarField& f, double x, double kappa);

struct Gamma2Split {
  double total = 0.0;
  double hess_sq = 0.0;
  double a_term = 0.0;
  double b2_term = 0.0;
};
Gamma2Split gamma2_explicit_z2d(const ScalarField& f, const Vec& x, const RootSystem& rs);

/// 1/2 Delta_k Gamma(f) - Gamma(Delta_k f, f) with the outer derivatives by
/// fourth-order central differences and one Richardson level.
double gamma2_definition(const ScalarField& f, const Vec& x, const RootSystem& rs);

/// (1/p) [f^(2-p) Delta_k(f^p) - p f Delta_k f].
double gp_definition(const ScalarField& f, const Vec& x, const GpParams& params, const RootSystem& rs);
double gp_integral(const ScalarField& f, const Vec& x, const GpParams& params, const RootSystem& rs);

struct GpComparison {
  double gamma = 0.0;        // Gamma(f)(x)
  double gp = 0.0;           // G_p(f)(x)
  double lower_lhs = 0.0;    // Gamma(f)(x)
  double lower_rhs = 0.0;    // G_p(f)(x) / (p - 1)
  double upper_lhs = 0.0;    // Gamma(f)(x)
  double upper_rhs = 0.0;    // [sum_alpha G_p(f)(r_alpha x) + G_p(f)(x)] / (p - 1)
  std::vector<double> orbit_gp;
  bool pass_lower = false;
  bool pass_upper = false;
  bool pass = false;  // both
};
GpComparison check_gp_comparison(const ScalarField& f, const Vec& x, double p, const RootSystem& rs);

// Finite-difference helpers (4th-order central stencils, optional Richardson).
double fd_first(const std::function<double(double)>& g, double x, double h, bool richardson);
double fd_second(const std::function<double(double)>& g, double x, double h, bool richardson);

}  // namespace dunkl
