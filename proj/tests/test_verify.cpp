#include "dunkl/verify.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace dunkl;

namespace {

Vec V(std::initializer_list<double> xs) {
  Vec x(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) x[i++] = v;
  return x;
}

SuiteOptions small(std::uint64_t seed = 5) {
  SuiteOptions o;
  o.seed = seed;
  o.size = 0.1;
  return o;
}

}  // namespace

TEST(Report, CountsAndCapsExemplars) {
  Report r;
  for (int k = 0; k < 30; ++k) r.check(k < 25 ? -1.0 : 1.0, [k] { return Json{{"k", k}}; });
  EXPECT_EQ(r.checked, 30u);
  EXPECT_EQ(r.failed, 25u);
  EXPECT_EQ(r.failures.size(), Report::kMaxExemplars);
  EXPECT_EQ(r.failures[0]["k"], 0);
  EXPECT_EQ(r.worst_margin, -1.0);
  EXPECT_FALSE(r.pass());
}

TEST(Report, NanIsAFailure) {
  Report r;
  r.check(std::nan(""), nullptr);
  EXPECT_EQ(r.failed, 1u);
  EXPECT_FALSE(r.pass());
}

TEST(Report, EmptyReportDoesNotPass) {
  Report r;
  EXPECT_FALSE(r.pass());
}

TEST(Report, HashIgnoresWallClock) {
  Report a;
  a.suite = "x";
  a.check(0.5, nullptr);
  Report b = a;
  b.seconds = 123.0;
  EXPECT_EQ(a.hash(), b.hash());
  b.check(0.1, nullptr);
  EXPECT_NE(a.hash(), b.hash());
  const Json j = a.to_json();
  EXPECT_EQ(j["hash"], a.hash());
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a("a"), "af63dc4c8601ec8c");
}

TEST(Registry, NamesAreUniqueAndKnown) {
  std::set<std::string> seen;
  for (const auto& s : suites()) {
    EXPECT_TRUE(seen.insert(s.name).second) << s.name;
    EXPECT_TRUE(has_suite(s.name));
    EXPECT_FALSE(s.claim.empty());
  }
  EXPECT_GE(seen.size(), 19u);
  EXPECT_FALSE(has_suite("nope"));
  EXPECT_THROW(run_suite("nope"), ValidationError);
  EXPECT_THROW(run_suites({"commutativity", "nope"}), ValidationError);
}

TEST(Registry, RunSuitesSortsAndDeduplicates) {
  const auto rs = run_suites({"gamma_identity", "commutativity", "gamma_identity"}, small());
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].suite, "commutativity");
  EXPECT_EQ(rs[1].suite, "gamma_identity");
}

TEST(Suites, SameSeedSameHash) {
  for (const char* name : {"commutativity", "cd_inequality", "gp_integral_form"}) {
    const Report a = run_suite(name, small(11)), b = run_suite(name, small(11));
    EXPECT_TRUE(a.pass()) << name;
    EXPECT_EQ(a.hash(), b.hash()) << name;
    const Report c = run_suite(name, small(12));
    EXPECT_NE(a.hash(), c.hash()) << name;
  }
}

TEST(Suites, BadKappaIsAUsageError) {
  SuiteOptions o = small();
  o.dim = 2;
  o.kappa = {0.5, 1.0, 2.0};
  EXPECT_THROW(run_suite("grad_bound", o), ValidationError);
}

TEST(Suites, GpComparisonReportsTheLowerBoundFailure) {
  const Report r = run_suite("gp_gamma_comparison", small());
  EXPECT_TRUE(r.error.empty()) << r.error;
  EXPECT_FALSE(r.pass());
  // The witness: f' = 0 at x with f(-x) tiny gives G_p/(p-1) ~ (2/p) Gamma.
  for (const auto& w : r.results["witness"])
    EXPECT_NEAR(w["ratio"].get<double>(), w["two_over_p"].get<double>(), 1e-3);
  for (const auto& row : r.results["by_p"]) {
    EXPECT_EQ(row["upper_bound_fail"], 0) << row.dump();
    if (row["p"] == 2.0) EXPECT_EQ(row["lower_bound_fail"], 0);
  }
}

TEST(Aggregate, SummaryCounts) {
  std::vector<Report> rs(3);
  rs[0].suite = "a";
  rs[0].check(1.0, nullptr);
  rs[1].suite = "b";
  rs[1].check(-1.0, nullptr);
  rs[2].suite = "c";
  rs[2].error = "boom";
  const Json j = aggregate(rs, SuiteOptions{});
  EXPECT_EQ(j["schema"], kReportSchema);
  EXPECT_EQ(j["summary"]["passed"], 1);
  EXPECT_EQ(j["summary"]["failed"], 1);
  EXPECT_EQ(j["summary"]["infrastructure_errors"], 1);
  EXPECT_EQ(j["reports"].size(), 3u);
}

TEST(Fold, HalvesNodesAndKeepsEvenIntegrals) {
  const auto rs = RootSystem::z2d(2, {0.5, 1.5});
  GridSpec spec;
  spec.panels = 6;
  spec.tail_nodes = 8;
  const SpatialGrid g = make_grid(rs, spec);
  const SpatialGrid h = fold(g);
  ASSERT_EQ(h.axes.size(), 2u);
  for (std::size_t a = 0; a < 2; ++a) EXPECT_LE(2 * h.axes[a].size(), g.axes[a].size() + 1);
  HeatEngine heat(rs);
  const auto f = fields::gaussian(2, 0.7, V({0.0, 0.0}));
  for (double p : {1.5, 3.0})
    EXPECT_NEAR(lp_norm(heat.values_on_grid(f, h), p, h), lp_norm(heat.values_on_grid(f, g), p, g),
                1e-12 * lp_norm(heat.values_on_grid(f, g), p, g));
}

TEST(IsEven, DetectsParity) {
  const auto rs = RootSystem::z2d(2, {0.5, 0.5});
  EXPECT_TRUE(is_even(fields::gaussian(2, 1.0, V({0.0, 0.0}))));
  EXPECT_TRUE(is_even(fields::dunkl_gaussian(rs, 0.5, V({0.0, 0.0}))));
  EXPECT_FALSE(is_even(fields::gaussian(2, 1.0, V({0.0, 0.3}))));
  EXPECT_FALSE(is_even(fields::dunkl_gaussian(rs, 0.5, V({0.4, 0.0}))));
}

TEST(Sweep, PTwoIsExactAndRowsAreStable) {
  SweepConfig c;
  c.p = {1.5, 2.0, 3.0};
  c.dims = {1};
  c.kappa = {0.8};
  c.fields = {"gaussian:a=1", "dgauss:tau=0.4,m=0.5"};
  const auto rows = sweep_lp(c);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.finite && r.converged) << to_json(r).dump();
    EXPECT_LT(r.change, 0.05);
    if (r.p == 2.0) EXPECT_NEAR(r.ratio, M_SQRT1_2, 1e-4) << r.field;
  }
  const std::string csv = to_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Sweep, GpRowsAboveTwoAreMarked) {
  SweepConfig c;
  c.p = {1.5, 3.0};
  c.dims = {1};
  c.fields = {"gaussian:a=1"};
  c.mode = SquareMode::Gp;
  c.refine = false;
  const auto rows = sweep_lp(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].note.empty());
  EXPECT_FALSE(rows[1].note.empty());
  SweepConfig bad = c;
  bad.p = {1.0};
  EXPECT_THROW(sweep_lp(bad), ValidationError);
}

TEST(Scaling, ScaleInvariantUnderDilation) {
  // sqrt(t) ||sqrt Gamma(H_t f)||_p / ||f||_p depends on t / lambda^2 only
  // for f(x / lambda); a centered Gaussian and its dilation give the same sup.
  const auto rs = RootSystem::z2d(1, {0.5});
  HeatEngine heat(rs);
  const auto a = scaling_probe(heat, fields::gaussian(1, 1.0, V({0.0})), 2.0, 1e-2, 1e2);
  const auto b = scaling_probe(heat, fields::gaussian(1, 0.25, V({0.0})), 2.0, 1e-2, 1e2);
  EXPECT_NEAR(a.sup_inner, b.sup_inner, 0.02 * a.sup_inner);
  EXPECT_LT(a.variation, 0.2);
  EXPECT_THROW(scaling_probe(heat, fields::gaussian(1, 1.0, V({0.0})), 2.0, 1.0, 0.5), ValidationError);
}
