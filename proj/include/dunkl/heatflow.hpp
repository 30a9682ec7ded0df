#pragma once

#include "dunkl/numcalc.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/rootsys.hpp"

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dunkl {

/// One-variable function with the hints the kernel quadrature needs:
/// negligible beyond |y| > reach, no features finer than `scale`, and
/// optional points where it is not smooth.
struct Profile1D {
  std::function<double(double)> f;
  double reach = 10.0;
  double scale = 1.0;
  std::vector<double> breaks;
};

Profile1D profile(const Factor1D& phi);

/// Rank-one heat kernel with construction-time audits: kappa = 0 Gaussian
/// reduction of the closed form, stochastic completeness at
/// t in {0.1, 1, 10}, x in {0.1, 1, 5}, and symmetry.
class HeatKernel1D {
 public:
  struct Calibration {
    double mass_error = 0.0;       // max |int h dmu - 1|
    double gaussian_error = 0.0;   // kappa = 0 formula vs (4 pi t)^-1/2 exp(-(x-y)^2/4t)
    double symmetry_error = 0.0;   // relative
    bool pass = false;
  };

  explicit HeatKernel1D(double kappa);

  double kappa() const { return kappa_; }
  const Calibration& calibration() const { return cal_; }
  double operator()(double t, double x, double y) const;

 private:
  double kappa_;
  Calibration cal_;
};

/// Product of one-dimensional kernels for z2d systems.
class ProductKernel {
 public:
  explicit ProductKernel(const RootSystem& rs);
  double operator()(double t, const Vec& x, const Vec& y) const;
  const std::vector<HeatKernel1D>& factors() const { return factors_; }

 private:
  std::vector<HeatKernel1D> factors_;
};

/// Nodes y_n and kernel-weighted weights: sum_n w0[n] g(y[n]) approximates
/// int h(t, x, y) g(y) dmu(y); w1, w2 carry d/dx and d2/dx2 of the kernel.
/// Nodes come in +- pairs, negative half first.
struct KernelRule {
  std::vector<double> y, w0, w1, w2;
};

struct KernelRuleSpec {
  int nodes_per_panel = 16;
  double sigmas = 13.0;      // kernel envelope half width in units of sqrt(t)
  double panel_sigmas = 1.5; // panel width cap in units of sqrt(t)
};

KernelRule kernel_rule(double kappa, double t, double x, double reach, double scale, const std::vector<double>& breaks,
                       int order, const KernelRuleSpec& spec = {});

/// Geometric time schedule for int_0^inf, or int_0^T when horizon is finite.
struct TimeSchedule {
  double t_first = 1e-4;   // first segment is [0, t_first]
  double growth = 2.0;
  int nodes = 8;           // Gauss-Legendre nodes per segment
  int max_segments = 120;
  double tail_fraction = 1e-4;  // stop once the fitted tail is below this share
  double horizon = std::numeric_limits<double>::infinity();
};

struct TimeIntegral {
  std::vector<double> value;  // includes the tail estimate
  std::vector<double> tail;
  int segments = 0;
  double t_end = 0.0;
  bool converged = true;
};

/// Integrates a vector-valued nonnegative integrand out(t). Segment sums
/// S_k are tracked per component; past the peak the power-law tail
/// S_k r / (1 - r), r = S_k / S_(k-1), is appended.
TimeIntegral integrate_time(const std::function<void(double, std::vector<double>&)>& integrand, std::size_t n,
                            const TimeSchedule& schedule);

/// Tensor grid of per-axis full-line rules adapted to dmu_kappa.
struct SpatialGrid {
  std::vector<Rule> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  std::vector<std::size_t> shape() const;
  void point(std::size_t index, Vec& x) const;
  double weight(std::size_t index) const;
};

struct GridSpec {
  double radius = 8.0;
  int panels = 8;
  int nodes = 10;
  int tail_nodes = 10;
  double tail_decay = 0.0;  // power q of |g|^p along an axis; <= 1 disables the tail map
  GridSpec refined() const;  // doubles every node count
};

SpatialGrid make_grid(const RootSystem& rs, const GridSpec& spec);
/// Per-axis tail exponents p (d + 2 gamma) - 2 kappa_i.
SpatialGrid make_grid_for_power(const RootSystem& rs, GridSpec spec, double p, double decay_rate);

double lp_norm(const std::vector<double>& values, double p, const SpatialGrid& grid);

enum class SquareMode { Gamma, DunklGrad, Grad, Gp, PoissonGamma, TildeT };
std::string to_string(SquareMode m);
SquareMode parse_square_mode(const std::string& s);

struct SquareFnRequest {
  SquareMode mode = SquareMode::Gamma;
  double p = 2.0;  // g_p
  double horizon = std::numeric_limits<double>::infinity();  // tilde_T
  int laguerre_nodes = 48;
};

struct HeatOptions {
  KernelRuleSpec rule;
  TimeSchedule time;  // t_first is rescaled by the field's own time scale
  int dynkin_nodes = 24;
};

/// Heat flow evaluator for z2d and rank-one systems on separable fields.
class HeatEngine {
 public:
  explicit HeatEngine(RootSystem rs, HeatOptions options = {});

  const RootSystem& roots() const { return rs_; }
  const ProductKernel& kernel() const { return kernel_; }
  const HeatOptions& options() const { return opt_; }

  /// (value, d/dx, d2/dx2) of H_t phi at x along `axis`.
  std::array<double, 3> evolve(const Factor1D& phi, int axis, double t, double x) const;

  /// H_t f(x).
  double apply(const ScalarField& f, double t, const Vec& x) const;
  /// Value, gradient and reflected values of H_t f at x (curvature near the
  /// hyperplanes).
  Jet jet(const ScalarField& f, double t, const Vec& x) const;
  /// H_t [ Gamma(H_s f) ](x).
  double heat_of_gamma(const ScalarField& f, double s, double t, const Vec& x) const;

  /// Integrand of the square function at one time.
  double integrand(const SquareFnRequest& req, const ScalarField& f, double t, const Vec& x) const;
  /// Square of the square function at a point; `report` receives the time
  /// integration record.
  double square_sq(const SquareFnRequest& req, const ScalarField& f, const Vec& x, TimeIntegral* report = nullptr) const;
  /// Square function values at many points.
  std::vector<double> square_function(const SquareFnRequest& req, const ScalarField& f,
                                      const std::vector<Vec>& points) const;
  /// Square function at every node of a tensor grid, with per-axis caches.
  /// TildeT is not available here.
  std::vector<double> square_function_grid(const SquareFnRequest& req, const ScalarField& f, const SpatialGrid& grid,
                                           TimeIntegral* report = nullptr) const;
  /// Gamma(H_t f) at every grid node.
  std::vector<double> gamma_on_grid(const ScalarField& f, double t, const SpatialGrid& grid) const;
  std::vector<double> values_on_grid(const ScalarField& f, const SpatialGrid& grid) const;

  /// E_y <N>_T = 2 int_0^T H_s[Gamma(H_(T-s) f)](y) ds by Gauss-Legendre with a
  /// doubling check.
  double dynkin_bracket(const ScalarField& f, double T, const Vec& y) const;

  /// Characteristic time of a separable field (smallest feature squared).
  static double time_scale(const ScalarField& f);

 private:
  const SeparableSum& separable(const ScalarField& f) const;

  RootSystem rs_;
  HeatOptions opt_;
  ProductKernel kernel_;
  Rule laguerre_;  // 48 nodes, alpha = -1/2
};

double apply_semigroup(const ScalarField& f, double t, const Vec& x, const RootSystem& rs);

struct GradientEstimateRecord {
  Vec x;
  double lhs = 0.0;  // Gamma(H_t f)(x)
  double rhs = 0.0;  // H_t Gamma(f)(x)
  bool pass = false;
};
std::vector<GradientEstimateRecord> gradient_estimate_check(const HeatEngine& heat, const ScalarField& f, double t,
                                                            const std::vector<Vec>& points);

// ---------------------------------------------------------------------------
// PDE cross-oracle.

struct PdeGrid {
  double radius = 8.0;
  int cells = 400;          // per half axis
  double dt = 2e-3;
  bool richardson = true;   // combine cells and 2 cells solutions
};

/// Solution on the symmetric vertex grid -R, ..., R (2 cells + 1 nodes per
/// axis), one block of values per requested time, row-major over axes.
struct PdeSolution {
  std::vector<double> nodes;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  int dim = 1;
  double mass0 = 0.0;
  std::vector<double> mass;   // int u(t) dmu per time
  double at(std::size_t time_index, const std::vector<int>& index) const;
};

/// Method of lines for d/dt u = Delta_kappa u, z2d with d <= 3. Each
/// coordinate splits into even and odd parts (u = x v on the odd part),
/// giving radial operators v'' + (a/x) v' with a = 2 kappa or 2 kappa + 2,
/// discretized as zero-flux finite volumes and stepped with
/// Crank-Nicolson after two backward Euler half steps.
PdeSolution pde_solve(const ScalarField& f, const RootSystem& rs, const std::vector<double>& times,
                      const PdeGrid& grid = {});

}  // namespace dunkl
