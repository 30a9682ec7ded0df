#include "dunkl/procsim.hpp"
#include "dunkl/polyx.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dunkl;

namespace {

Vec V(std::initializer_list<double> xs) {
  Vec x(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) x[i++] = v;
  return x;
}

RootSystem a2(double kappa) {
  const double s = std::sqrt(3.0);
  return RootSystem::general({V({1.0, 0.0}), V({-0.5, s / 2}), V({0.5, s / 2})}, {kappa, kappa, kappa});
}

// E|X_T|^2 = |x|^2 + (2d + 4 sum kappa) T, from Delta_k |x|^2.
double second_moment(const RootSystem& rs, const Vec& x0, double T) {
  double k = 0.0;
  for (std::size_t a = 0; a < rs.size(); ++a) k += rs.kappa(a);
  return x0.squaredNorm() + (2.0 * rs.dim() + 4.0 * k) * T;
}

struct Sample {
  double mean = 0.0, se = 0.0;
};

template <class F>
Sample run(std::size_t n, F&& draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = draw(k);
    s += v;
    s2 += v * v;
  }
  const double m = s / n;
  return {m, std::sqrt((s2 / n - m * m) / n)};
}

}  // namespace

TEST(PathRng, DeterministicPerPath) {
  auto a = path_rng(7, 3), b = path_rng(7, 3), c = path_rng(7, 4), d = path_rng(8, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Simulate, RejectsBadConfig) {
  const auto rs = RootSystem::z2d(1, {0.5});
  SimConfig cfg;
  cfg.x0 = V({0.0});
  auto rng = path_rng(1, 0);
  EXPECT_THROW(simulate_path(cfg, rs, rng), DomainError);
  cfg.x0 = V({1.0, 1.0});
  EXPECT_THROW(simulate_path(cfg, rs, rng), ValidationError);
  cfg.x0 = V({1.0});
  cfg.dt = 0.0;
  EXPECT_THROW(simulate_path(cfg, rs, rng), ValidationError);
}

TEST(Simulate, BrownianWithoutMultiplicity) {
  const auto rs = RootSystem::z2d(1, {0.0});
  SimConfig cfg;
  cfg.x0 = V({0.3});
  cfg.T = 0.5;
  cfg.dt = 0.05;
  const std::size_t n = 20000;
  const auto m1 = run(n, [&](std::size_t k) {
    auto rng = path_rng(11, k);
    return simulate_path(cfg, rs, rng).terminal[0];
  });
  EXPECT_LE(std::abs(m1.mean - 0.3), 3 * m1.se);
  const auto m2 = run(n, [&](std::size_t k) {
    auto rng = path_rng(11, k);
    const double y = simulate_path(cfg, rs, rng).terminal[0] - 0.3;
    return y * y;
  });
  EXPECT_LE(std::abs(m2.mean - 1.0), 3 * m2.se);
}

TEST(Simulate, JumpsAreReflections) {
  const auto rs = a2(1.0);
  SimConfig cfg;
  cfg.x0 = V({0.2, 0.9});
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  std::size_t jumps = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    auto rng = path_rng(3, k);
    const auto ps = simulate_path(cfg, rs, rng);
    EXPECT_FALSE(ps.flagged) << ps.flag_reason;
    double last = 0.0;
    for (const auto& j : ps.jumps) {
      EXPECT_LE((j.post - rs.reflect(j.root, j.pre)).norm(), 1e-14);
      EXPECT_NEAR(j.post.norm(), j.pre.norm(), 1e-12);
      EXPECT_GE(j.time, last);
      last = j.time;
    }
    jumps += ps.jumps.size();
  }
  EXPECT_GT(jumps, 0u);
}

TEST(Simulate, RecordsEveryStep) {
  const auto rs = RootSystem::z2d(2, {0.5, 0.5});
  SimConfig cfg;
  cfg.x0 = V({0.4, -0.7});
  cfg.T = 0.2;
  cfg.dt = 0.01;
  cfg.record = true;
  auto rng = path_rng(5, 0);
  const auto ps = simulate_path(cfg, rs, rng);
  ASSERT_EQ(ps.times.size(), ps.steps + 1);
  EXPECT_NEAR(ps.times.back(), 0.2, 1e-12);
  EXPECT_EQ((ps.states.back() - ps.terminal).norm(), 0.0);
}

TEST(Simulate, EulerSecondMomentGeneralSystem) {
  const auto rs = a2(0.5);
  SimConfig cfg;
  cfg.x0 = V({0.3, 1.1});
  cfg.T = 0.5;
  cfg.dt = 1e-3;
  const std::size_t n = 4000;
  const auto m = run(n, [&](std::size_t k) {
    auto rng = path_rng(21, k);
    return simulate_path(cfg, rs, rng).terminal.squaredNorm();
  });
  EXPECT_LE(std::abs(m.mean - second_moment(rs, cfg.x0, cfg.T)), 3 * m.se + 0.01);
}

TEST(Simulate, ExactSecondMomentAndMean) {
  const auto rs = RootSystem::z2d(2, {0.5, 1.5});
  const Vec x0 = V({1.0, -0.4});
  const double t = 0.7;
  const std::size_t n = 100000;
  const auto m = run(n, [&](std::size_t k) {
    auto rng = path_rng(4, k);
    return exact_step(rs, x0, t, rng).squaredNorm();
  });
  EXPECT_LE(std::abs(m.mean - second_moment(rs, x0, t)), 3 * m.se);
  // H_t x_i = x_i.
  const auto m1 = run(n, [&](std::size_t k) {
    auto rng = path_rng(4, k);
    return exact_step(rs, x0, t, rng)[1];
  });
  EXPECT_LE(std::abs(m1.mean + 0.4), 3 * m1.se);
}

TEST(Simulate, ExactAndEulerAgree) {
  const auto rs = RootSystem::z2d(1, {0.8});
  const auto f = fields::gaussian(1, 0.7, V({0.5}));
  HeatEngine heat(rs);
  const double want = heat.apply(f, 0.4, V({0.6}));
  const auto ex = mc_semigroup(f, 0.4, V({0.6}), 100000, rs, 9, SimEngine::Exact);
  EXPECT_LE(std::abs(ex.mean - want), 3 * ex.se);
  const auto eu = mc_semigroup(f, 0.4, V({0.6}), 5000, rs, 9, SimEngine::Euler, 1e-3);
  EXPECT_EQ(eu.flagged, 0u);
  EXPECT_LE(std::abs(eu.mean - want), 3 * eu.se + 0.005);
}

TEST(Simulate, SemigroupOnPolynomials) {
  const auto rs = RootSystem::z2d(1, {0.5});
  const Vec x0 = V({1.0});
  const auto one = mc_semigroup(fields::constant(1, 1.0), 1.0, x0, 1000, rs, 1);
  EXPECT_EQ(one.mean, 1.0);
  const auto lin = mc_semigroup(fields::polynomial(parse_polynomial("x1", 1)), 1.0, x0, 100000, rs, 2);
  EXPECT_LE(std::abs(lin.mean - 1.0), 3 * lin.se);
  const auto sq = mc_semigroup(fields::polynomial(parse_polynomial("x1^2", 1)), 1.0, x0, 100000, rs, 3);
  EXPECT_LE(std::abs(sq.mean - 5.0), 3 * sq.se);
}

TEST(Simulate, JumpRateHistogram) {
  const auto rs = RootSystem::z2d(1, {1.0});
  SimConfig cfg;
  cfg.x0 = V({0.5});
  cfg.T = 0.5;
  cfg.dt = 2e-3;
  cfg.paths = 1000;
  const auto bins = jump_rate_histogram(cfg, rs, {0.0, 0.1, 0.2, 0.4, 0.8, 10.0});
  ASSERT_EQ(bins.size(), 5u);
  double total = 0.0;
  for (const auto& b : bins) {
    total += b.exposure;
    if (b.expected < 5) continue;
    EXPECT_LE(std::abs(b.jumps - b.expected), 3 * b.se) << b.lo << ".." << b.hi;
  }
  EXPECT_NEAR(total, cfg.T * cfg.paths, 1e-6 * cfg.T * cfg.paths);
}

TEST(Simulate, RadialMatchesFullProcess) {
  const auto rs = RootSystem::z2d(2, {0.5, 0.0});
  SimConfig cfg;
  cfg.x0 = V({0.6, 0.2});
  cfg.T = 0.5;
  cfg.dt = 1e-3;
  const std::size_t n = 4000;
  bool inside = true;
  const auto m = run(n, [&](std::size_t k) {
    auto rng = path_rng(8, k);
    const auto ps = simulate_radial(cfg, rs, rng);
    inside = inside && !ps.flagged && ps.terminal[0] > 0 && ps.terminal[1] >= 0;
    return ps.terminal.squaredNorm();
  });
  EXPECT_TRUE(inside);
  EXPECT_LE(std::abs(m.mean - second_moment(rs, cfg.x0, cfg.T)), 3 * m.se + 0.01);
  auto rng = path_rng(8, 0);
  EXPECT_THROW(simulate_radial(cfg, a2(0.5), rng), ValidationError);
}

TEST(Martingale, ExactSkeleton) {
  const auto rs = RootSystem::z2d(2, {0.5, 1.0});
  HeatEngine heat(rs);
  const auto f = fields::gaussian(2, 0.5, V({0.0, 0.0}));
  SimConfig cfg;
  cfg.x0 = V({0.5, -0.3});
  cfg.T = 0.5;
  cfg.paths = 20000;
  const auto st = martingale_stats(f, cfg, heat);
  EXPECT_EQ(st.engine, "exact");
  EXPECT_EQ(st.flagged, 0u);
  EXPECT_LE(std::abs(st.mean_N), 3 * st.se_N);
  EXPECT_LE(std::abs(st.var_N - st.mean_bracket), 3 * std::hypot(st.se_var_N, st.se_bracket));
  EXPECT_LE(std::abs(st.mean_bracket - st.dynkin), 3 * st.se_bracket);
  EXPECT_LE(std::abs(st.mean_x2 - second_moment(rs, cfg.x0, cfg.T)), 3 * st.se_x2);
}

TEST(Martingale, EulerFlowAccumulators) {
  const auto rs = RootSystem::z2d(1, {0.7});
  HeatEngine heat(rs);
  const auto f = fields::gaussian(1, 0.8, V({0.0}));
  SimConfig cfg;
  cfg.x0 = V({0.4});
  cfg.T = 0.3;
  cfg.dt = 2e-3;
  cfg.paths = 1000;
  MartingaleOptions opt;
  opt.engine = SimEngine::Euler;
  const auto st = martingale_stats(f, cfg, heat, opt);
  EXPECT_EQ(st.engine, "euler");
  EXPECT_FALSE(st.degraded);
  EXPECT_GT(st.mean_jumps, 0.0);
  EXPECT_LE(std::abs(st.mean_N), 3 * st.se_N + 0.002);
  EXPECT_LE(std::abs(st.mean_bracket - st.dynkin), 3 * st.se_bracket + 0.02 * st.dynkin);
}
