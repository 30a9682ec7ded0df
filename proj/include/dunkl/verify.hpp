#pragma once

#include "dunkl/heatflow.hpp"
#include "dunkl/procsim.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dunkl {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

/// Mixed slack atol + rtol * |scale|.
struct Tolerance {
  double atol = 0.0;
  double rtol = 0.0;
  double slack(double scale) const { return atol + rtol * std::abs(scale); }
};
inline constexpr Tolerance kExactTol{1e-10, 1e-8};    // exact or closed-form backed
inline constexpr Tolerance kNumericTol{1e-6, 1e-5};   // quadrature or finite differences

struct SuiteOptions {
  std::uint64_t seed = 1;
  int dim = 0;                 // 0 keeps the suite's own dimensions
  std::vector<double> kappa;   // empty keeps the suite's own multiplicities
  double size = 1.0;           // sample-size multiplier
};

/// Outcome of one suite. Counts are per elementary check; `worst_margin` is
/// the smallest (allowed - observed), negative on failure.
struct Report {
  std::string suite;
  std::string claim;
  std::size_t checked = 0, passed = 0, failed = 0, skipped = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<Json> failures;     // reproduction inputs, capped at kMaxExemplars
  Json manifest = Json::object(); // seed, resolutions, tolerances
  Json results = Json::object();  // suite-specific numbers and tables
  std::vector<std::string> notes;
  std::string error;              // infrastructure failure, not a claim failure
  double seconds = 0.0;

  static constexpr std::size_t kMaxExemplars = 20;

  /// Records one check with its margin; `inputs` is only called on failure.
  void check(double margin, const std::function<Json()>& inputs);
  void check(bool ok, double margin, const std::function<Json()>& inputs);

  bool pass() const { return error.empty() && failed == 0 && checked > 0; }
  Json to_json() const;
  /// FNV-1a over the canonical JSON without the wall clock.
  std::string hash() const;
};

struct SuiteInfo {
  std::string name;
  std::string claim;
};

const std::vector<SuiteInfo>& suites();
bool has_suite(const std::string& name);
Report run_suite(const std::string& name, const SuiteOptions& opt = {});
/// Runs the named suites (all of them for {"all"}), merged by suite name.
std::vector<Report> run_suites(const std::vector<std::string>& names, const SuiteOptions& opt = {});
/// Versioned document with every report and a summary block.
Json aggregate(const std::vector<Report>& reports, const SuiteOptions& opt);
std::string fnv1a(const std::string& bytes);

// ---------------------------------------------------------------------------
// L^p ratio sweeps.

struct SweepConfig {
  std::vector<double> p{1.25, 1.5, 2.0, 3.0, 4.0};
  std::vector<int> dims{1, 2, 3};
  std::vector<double> kappa{0.5};  // broadcast to every axis
  std::vector<std::string> fields{"gaussian:a=1", "dgauss:tau=0.5"};
  SquareMode mode = SquareMode::Gamma;
  bool refine = true;              // second run with doubled nodes
};

struct SweepRow {
  double p = 2.0;
  int dim = 1;
  std::vector<double> kappa;
  std::string field;
  std::string mode;
  double ratio = 0.0;          // ||g f||_p / ||f||_p
  double ratio_refined = 0.0;
  double change = 0.0;         // relative
  bool finite = false;
  bool converged = false;      // time integration and refinement both fine
  std::size_t nodes = 0;
  std::string note;            // why a row is marked
};

std::vector<SweepRow> sweep_lp(const SweepConfig& cfg);
std::string to_csv(const std::vector<SweepRow>& rows);
Json to_json(const SweepRow& row);

/// sup over a dyadic t grid of sqrt(t) ||sqrt(Gamma(H_t f))||_p / ||f||_p,
/// once on [t_lo, t_hi] and once with one more dyadic step at each end.
struct ScalingProbe {
  double p = 2.0;
  std::vector<double> t, value;
  double sup_inner = 0.0;
  double sup_outer = 0.0;
  double variation = 0.0;   // (sup_outer - sup_inner) / sup_inner
};
ScalingProbe scaling_probe(const HeatEngine& heat, const ScalarField& f, double p, double t_lo, double t_hi);

/// Keeps the positive half of every axis with doubled weights; only valid for
/// integrands even in each coordinate.
SpatialGrid fold(const SpatialGrid& grid);
/// f(sigma x) == f(x) for every coordinate flip, checked at random points.
bool is_even(const ScalarField& f, std::uint64_t seed = 3);

}  // namespace dunkl
