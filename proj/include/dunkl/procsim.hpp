#pragma once

#include "dunkl/heatflow.hpp"
#include "dunkl/rootsys.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace dunkl {

struct SimConfig {
  Vec x0;
  double T = 1.0;
  double dt = 1e-3;          // base step; shrunk so that lambda(x) dt <= p_jump_max
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  double p_jump_max = 0.1;
  bool record = false;       // keep every step in PathSample::times/states
};

void validate(const SimConfig& cfg, const RootSystem& rs);

/// Per-path generator: mt19937_64 seeded from seed_seq{seed lo, seed hi, path lo, path hi}.
/// Results do not depend on the thread count.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

struct JumpRecord {
  double time = 0.0;
  std::size_t root = 0;
  Vec pre, post;
};

struct PathSample {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<JumpRecord> jumps;
  Vec terminal;
  // Martingale accumulators (filled when a flow is attached).
  double N = 0.0;
  double bracket_grad = 0.0;  // 2 int |grad u|^2 ds
  double bracket_jump = 0.0;  // 2 sum_a kappa_a int (u - u o r_a)^2 / <a,X>^2 ds
  std::size_t steps = 0;
  std::size_t cap_hits = 0;   // steps shortened by the jump cap
  double min_distance = std::numeric_limits<double>::infinity();
  bool flagged = false;
  std::string flag_reason;

  double bracket() const { return bracket_grad + bracket_jump; }
};

/// Jet of u(s, .) = H_(T-s) f at a point, used for the bracket accumulators.
using FlowJet = std::function<Jet(double s, const Vec& x)>;
/// Called once per Euler step with the pre-step state, the step, the total
/// jump rate and whether a jump happened.
using StepHook = std::function<void(const Vec& x, double dt, double rate, bool jumped)>;

/// Euler scheme with thinning: dX = b(X) dt + sqrt2 dW, b = sum_a 2 kappa_a a / <a,X>,
/// jumps X -> r_a X with probability 2 kappa_a / <a,X>^2 dt per step. The
/// component normal to the nearest wall is drawn from the exact 1D Bessel law;
/// steps that cross a wall are halved and redrawn.
PathSample simulate_path(const SimConfig& cfg, const RootSystem& rs, std::mt19937_64& rng,
                         const FlowJet* flow = nullptr, const StepHook* hook = nullptr);

/// Radial process in the chamber x_i > 0 (rank-one and z2d): each coordinate is
/// a Bessel process of dimension 2 kappa_i + 1, sampled exactly at the steps.
PathSample simulate_radial(const SimConfig& cfg, const RootSystem& rs, std::mt19937_64& rng);

/// Exact transition over time dt for rank-one and z2d: per coordinate
/// |X|^2 / 2dt is noncentral chi-square with 2 kappa + 1 degrees of freedom and
/// noncentrality x^2 / 2dt; the sign follows the kernel's odd/even split.
Vec exact_step(const RootSystem& rs, const Vec& x, double dt, std::mt19937_64& rng);

enum class SimEngine { Auto, Exact, Euler };

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::size_t flagged = 0;
};

/// Monte Carlo H_t f(x0). Auto uses exact transitions for orthogonal systems
/// and the Euler scheme otherwise.
Estimate mc_semigroup(const ScalarField& f, double t, const Vec& x0, std::size_t n, const RootSystem& rs,
                      std::uint64_t seed, SimEngine engine = SimEngine::Auto, double dt = 1e-3);

struct TrajectoryStats {
  std::size_t n = 0;
  std::size_t flagged = 0;
  bool degraded = false;  // flagged share above 0.1 %
  double mean_N = 0.0, se_N = 0.0;
  double var_N = 0.0, se_var_N = 0.0;
  double mean_bracket = 0.0, se_bracket = 0.0;
  double mean_x2 = 0.0, se_x2 = 0.0;  // |X_T|^2
  double dynkin = 0.0;                // 2 int_0^T H_s[Gamma(H_(T-s) f)](x0) ds
  double mean_jumps = 0.0;
  std::size_t cap_hits = 0;
  double min_distance = std::numeric_limits<double>::infinity();
  std::string engine;

  double ito_gap() const { return std::abs(var_N - mean_bracket) / mean_bracket; }
  double dynkin_gap() const { return std::abs(mean_bracket - dynkin) / dynkin; }
};

struct MartingaleOptions {
  SimEngine engine = SimEngine::Auto;
  int skeleton_nodes = 24;  // Gauss-Legendre times for the bracket on exact skeletons
  bool dynkin = true;
};

/// N_t = H_(T-t) f(X_t) - H_T f(x0) and its bracket <N>_T = 2 int_0^T Gamma(H_(T-s) f)(X_s) ds.
TrajectoryStats martingale_stats(const ScalarField& f, const SimConfig& cfg, const HeatEngine& heat,
                                 const MartingaleOptions& opt = {});

struct JumpRateBin {
  double lo = 0.0, hi = 0.0;  // on the hyperplane distance
  double exposure = 0.0;      // time spent
  double jumps = 0.0;
  double expected = 0.0;      // sum of rate * dt
  double se = 0.0;
};

/// Jump counts per state bin against the integrated intensity.
std::vector<JumpRateBin> jump_rate_histogram(const SimConfig& cfg, const RootSystem& rs, const std::vector<double>& edges);

}  // namespace dunkl
