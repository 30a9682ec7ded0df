#include "dunkl/numcalc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dunkl;

namespace {

Vec V(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

Vec off_planes(std::mt19937_64& rng, int dim, double radius = 1.5, double gap = 0.1) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec x(dim);
  for (int i = 0; i < dim; ++i) {
    do x[i] = u(rng);
    while (std::abs(x[i]) < gap);
  }
  return x;
}

ScalarField sine() {
  ScalarField f(1, [](const Vec& x) { return std::sin(x[0]); }, "sin");
  f.with_gradient([](const Vec& x) { return Vec::Constant(1, std::cos(x[0])); });
  f.with_hessian([](const Vec& x) { return Mat::Constant(1, 1, -std::sin(x[0])); });
  return f;
}

std::vector<double> to_double(const std::vector<mpq_class>& k) {
  std::vector<double> out;
  for (const auto& q : k) out.push_back(q.get_d());
  return out;
}

std::vector<mpq_class> kappa_q(std::initializer_list<const char*> s) {
  std::vector<mpq_class> k;
  for (const char* t : s) k.emplace_back(t);
  for (auto& q : k) q.canonicalize();
  return k;
}

// A positive field used for the G_p checks: Gaussian mixture not symmetric
// under any coordinate flip.
ScalarField positive_mixture(int dim) {
  Vec c1 = Vec::Constant(dim, 0.4), c2 = Vec::Constant(dim, -0.3);
  c2[0] = 0.7;
  return fields::mixture({{1.0, fields::gaussian(dim, 0.8, c1)}, {0.5, fields::gaussian(dim, 0.3, c2)}});
}

}  // namespace

TEST(ScalarField, BuiltinsPassDerivativeAudit) {
  const RootSystem rs = make_z2d(2, {0.5, 1.5});
  for (const auto& f : {fields::gaussian(2, 1.2, V({0.3, -0.4})), fields::bump(2, 1.5, V({0.2, 0.1})),
                        fields::polynomial(parse_polynomial("3/2 x1^3 x2 - 2 x2^2 + 1", 2)),
                        fields::dunkl_gaussian(rs, 0.4, V({0.5, -0.2})), positive_mixture(2)}) {
    const auto a = f.audit();
    EXPECT_TRUE(a.pass) << f.name() << " " << a.worst_gradient << " " << a.worst_hessian;
  }
}

TEST(ScalarField, AuditCatchesWrongGradient) {
  ScalarField f(1, [](const Vec& x) { return x[0] * x[0]; }, "bad");
  f.with_gradient([](const Vec& x) { return Vec::Constant(1, 2.001 * x[0]); });
  EXPECT_FALSE(f.audit().pass);
}

TEST(ScalarField, FiniteDifferenceFallback) {
  ScalarField f(2, [](const Vec& x) { return std::exp(x[0]) * std::sin(x[1]); }, "plain");
  const Vec x = V({0.3, 0.8});
  EXPECT_NEAR(f.gradient(x)[0], std::exp(0.3) * std::sin(0.8), 1e-9);
  EXPECT_NEAR(f.gradient(x)[1], std::exp(0.3) * std::cos(0.8), 1e-9);
  const Mat h = f.hessian(x);
  EXPECT_NEAR(h(0, 1), std::exp(0.3) * std::cos(0.8), 1e-7);
  EXPECT_NEAR(h(1, 1), -std::exp(0.3) * std::sin(0.8), 1e-7);
}

TEST(ScalarField, NonFiniteValueNamesPoint) {
  ScalarField f(1, [](const Vec& x) { return 1.0 / x[0]; }, "recip");
  EXPECT_THROW(f(V({0.0})), NumericError);
}

TEST(ScalarField, ParseSpecs) {
  const RootSystem rs = make_z2d(2, {0.5, 1.0});
  EXPECT_NEAR(fields::parse("gaussian:a=2,c=0.5", rs)(V({0.5, 0.5})), 1.0, 1e-15);
  EXPECT_NEAR(fields::parse("gaussian:a=1,c=1;0", rs)(V({1.0, 1.0})), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(fields::parse("poly:3/2 x1^2 x2 - 1 x2^3", rs)(V({2.0, 1.0})), 5.0, 1e-14);
  EXPECT_NEAR(fields::parse("const:2.5", rs)(V({7.0, -3.0})), 2.5, 0.0);
  EXPECT_EQ(fields::parse("bump:r=1", rs)(V({1.2, 0.0})), 0.0);
  EXPECT_GT(fields::parse("dgauss:tau=0.5,m=0.3", rs)(V({0.3, 0.3})), 0.0);
  EXPECT_THROW(fields::parse("gaussian:b=1", rs), ValidationError);
  EXPECT_THROW(fields::parse("wavelet:a=1", rs), ValidationError);
  EXPECT_THROW(fields::parse("gaussian:a=x", rs), ValidationError);
}

TEST(Gamma, ZeroKappaIsClassical) {
  const RootSystem rs = make_z2d(2, {0.0, 0.0});
  const auto f = fields::gaussian(2, 0.9, V({0.2, -0.1}));
  const auto g = positive_mixture(2);
  const Vec x = V({0.7, -1.1});
  EXPECT_NEAR(gamma_num(f, g, x, rs), f.gradient(x).dot(g.gradient(x)), 1e-15);
}

TEST(Gamma, SineAgainstTaylorPolynomial) {
  // sin truncated at degree 9 through the exact engine.
  Polynomial taylor = parse_polynomial("1 x1 - 1/6 x1^3 + 1/120 x1^5 - 1/5040 x1^7 + 1/362880 x1^9", 1);
  for (double kappa : {0.25, 1.5}) {
    const RootSystem rs = make_z2d(1, {kappa});
    mpq_class kq(kappa);
    const Polynomial g = gamma(taylor, std::vector<mpq_class>{kq});
    for (double x : {-0.3, -1e-3, 2e-7, 0.05, 0.3}) {
      const double closed = std::cos(x) * std::cos(x) + 2 * kappa * std::sin(x) * std::sin(x) / (x * x);
      const double num = gamma_num(sine(), V({x}), rs);
      EXPECT_NEAR(num, closed, 1e-6);
      EXPECT_NEAR(num, g.eval(V({x})), 1e-6);
      EXPECT_GE(num, 0.0);
    }
  }
}

TEST(Gamma, HyperplaneLimitIsContinuous) {
  const RootSystem rs = make_z2d(2, {0.7, 1.3});
  const auto f = positive_mixture(2);
  const double on = gamma_num(f, V({0.4, 0.0}), rs);
  const double near = gamma_num(f, V({0.4, 5e-7}), rs);
  const double off = gamma_num(f, V({0.4, 2e-6}), rs);
  // The field itself moves by O(|grad Gamma| dx) between the probes.
  EXPECT_NEAR(on, near, 2e-6);
  EXPECT_NEAR(near, off, 4e-6);
  const double far = gamma_num(f, V({0.4, 1e-3}), rs);
  EXPECT_NEAR((off - on) / 2e-6, (far - on) / 1e-3, 1e-2);
}

TEST(DunklGradient, BoundedByGamma) {
  std::mt19937_64 rng(11);
  for (int dim = 1; dim <= 3; ++dim) {
    const RootSystem rs = make_z2d(dim, std::vector<double>(static_cast<std::size_t>(dim), 0.9));
    const auto f = positive_mixture(dim);
    for (int n = 0; n < 200; ++n) {
      const Vec x = off_planes(rng, dim, 2.0, 0.0);
      EXPECT_LE(dunkl_grad_sq(f, x, rs), (1 + 2 * rs.gamma()) * gamma_num(f, x, rs) + 1e-10);
    }
  }
}

TEST(DunklGradient, EqualityAndEvenCases) {
  const double kappa = 0.6;
  const RootSystem rs = make_z2d(1, {kappa});
  const auto lin = fields::polynomial(parse_polynomial("1 x1", 1));
  const Vec x = V({0.8});
  EXPECT_NEAR(dunkl_grad_sq(lin, x, rs), (1 + 2 * kappa) * (1 + 2 * kappa), 1e-13);
  EXPECT_NEAR((1 + 2 * rs.gamma()) * gamma_num(lin, x, rs), (1 + 2 * kappa) * (1 + 2 * kappa), 1e-13);
  const auto even = fields::gaussian(1, 0.5, V({0.0}));
  EXPECT_NEAR(dunkl_grad_sq(even, x, rs), std::pow(even.gradient(x)[0], 2), 1e-15);
  const RootSystem flat = make_z2d(1, {0.0});
  const auto g = positive_mixture(1);
  EXPECT_NEAR(dunkl_grad_sq(g, x, flat), grad_sq(g, x), 1e-15);
}

TEST(DunklLaplacian, MatchesExactEngineAndLimit) {
  std::mt19937_64 rng(3);
  const auto kq = kappa_q({"1/2", "3/4", "2"});
  const RootSystem rs = make_z2d(3, to_double(kq));
  for (int n = 0; n < 10; ++n) {
    const Polynomial p = random_polynomial(rng, 3, 5, 6);
    const auto f = fields::polynomial(p);
    const Polynomial lap = dunkl_laplacian(p, kq);
    const Vec x = off_planes(rng, 3);
    EXPECT_NEAR(dunkl_laplacian_num(f, x, rs), lap.eval(x), 1e-9 * (1 + std::abs(lap.eval(x))));
    Vec y = x;
    y[1] = 3e-7;
    EXPECT_NEAR(dunkl_laplacian_num(f, y, rs), lap.eval(y), 1e-5 * (1 + std::abs(lap.eval(y))));
  }
}

TEST(Gamma2Rank1, SpotValues) {
  for (double kappa : {0.0, 0.5, 2.0}) {
    const auto sq = fields::polynomial(parse_polynomial("1 x1^2", 1));
    const auto lin = fields::polynomial(parse_polynomial("1 x1", 1));
    const auto cube = fields::polynomial(parse_polynomial("1 x1^3", 1));
    for (double x : {-1.3, 0.2, 0.9}) {
      EXPECT_NEAR(gamma2_explicit_rank1(sq, x, kappa), 4 + 8 * kappa, 1e-12);
      EXPECT_NEAR(gamma2_explicit_rank1(lin, x, kappa), 0.0, 1e-12);
      EXPECT_NEAR(gamma2_explicit_rank1(cube, x, kappa), (36 + 24 * kappa) * x * x, 1e-11 * (1 + x * x));
    }
  }
  EXPECT_THROW(gamma2_explicit_rank1(sine(), 1e-8, 1.0), SingularityError);
}

TEST(Gamma2Rank1, MatchesDefinition) {
  std::mt19937_64 rng(5);
  const auto kq = kappa_q({"5/4"});
  for (int n = 0; n < 20; ++n) {
    const Polynomial p = random_polynomial(rng, 1, 6, 4);
    const Polynomial def = gamma2(p, kq);
    const Vec x = off_planes(rng, 1);
    const double got = gamma2_explicit_rank1(fields::polynomial(p), x[0], 1.25);
    EXPECT_NEAR(got, def.eval(x), 1e-9 * (1 + std::abs(def.eval(x))));
  }
  const RootSystem rs = make_z2d(1, {1.25});
  for (const auto& f : {fields::gaussian(1, 0.7, V({0.3})), positive_mixture(1)})
    for (double x : {-1.2, 0.35, 0.8}) {
      const double closed = gamma2_explicit_rank1(f, x, 1.25);
      const double def = gamma2_definition(f, V({x}), rs);
      EXPECT_NEAR(def, closed, 1e-5 * std::abs(closed)) << f.name() << " at " << x;
    }
}

TEST(Gamma2Z2d, ProductDecomposition) {
  const RootSystem rs = make_z2d(2, {0.5, 1.5});
  const auto f = fields::polynomial(parse_polynomial("1 x1 x2", 2));
  for (const Vec& x : {V({0.3, -1.2}), V({2.0, 0.7})}) {
    const auto s = gamma2_explicit_z2d(f, x, rs);
    EXPECT_NEAR(s.hess_sq, 2.0, 1e-13);
    EXPECT_NEAR(s.a_term, 4 * 0.5 + 4 * 1.5, 1e-12);
    EXPECT_NEAR(s.b2_term, 8 * 0.5 * 1.5, 1e-12);
    EXPECT_NEAR(s.total, 2 + 4 * 0.5 + 4 * 1.5 + 8 * 0.75, 1e-12);
  }
  EXPECT_THROW(gamma2_explicit_z2d(f, V({0.3, 1e-9}), rs), SingularityError);
}

TEST(Gamma2Z2d, ZeroKappaIsHessian) {
  const RootSystem rs = make_z2d(3, {0.0, 0.0, 0.0});
  const auto f = positive_mixture(3);
  const auto s = gamma2_explicit_z2d(f, V({0.2, -0.5, 1.1}), rs);
  EXPECT_EQ(s.a_term, 0.0);
  EXPECT_EQ(s.b2_term, 0.0);
  EXPECT_NEAR(s.total, s.hess_sq, 0.0);
}

TEST(Gamma2Z2d, TermsMatchExactDecomposition) {
  std::mt19937_64 rng(8);
  for (int dim = 2; dim <= 4; ++dim) {
    std::vector<mpq_class> kq;
    for (int i = 0; i < dim; ++i) kq.emplace_back(i + 1, 3);
    const RootSystem rs = make_z2d(dim, to_double(kq));
    for (int n = 0; n < 8; ++n) {
      const Polynomial p = random_polynomial(rng, dim, 5, 5);
      const auto exact = gamma2_decomposition(p, kq);
      const Polynomial def = gamma2(p, kq);
      const Vec x = off_planes(rng, dim, 1.5, 0.2);
      const auto s = gamma2_explicit_z2d(fields::polynomial(p), x, rs);
      const double scale = 1 + std::abs(def.eval(x));
      EXPECT_NEAR(s.total, def.eval(x), 1e-9 * scale);
      EXPECT_NEAR(s.hess_sq, exact.hess_sq.eval(x), 1e-9 * scale);
      EXPECT_NEAR(s.a_term, exact.a_term.eval(x), 1e-9 * scale);
      EXPECT_NEAR(s.b2_term, exact.b2_term.eval(x), 1e-9 * scale);
    }
  }
}

TEST(Gamma2Z2d, GaussianMatchesDefinition) {
  std::mt19937_64 rng(9);
  for (int dim = 2; dim <= 3; ++dim) {
    const std::vector<double> kappa{0.5, 1.5, 0.8};
    const RootSystem rs = make_z2d(dim, {kappa.begin(), kappa.begin() + dim});
    for (const auto& f : {fields::gaussian(dim, 0.6, Vec::Constant(dim, 0.25)), positive_mixture(dim)})
      for (int n = 0; n < 5; ++n) {
        const Vec x = off_planes(rng, dim, 1.5, 0.2);
        const auto s = gamma2_explicit_z2d(f, x, rs);
        EXPECT_NEAR(gamma2_definition(f, x, rs), s.total, 1e-5 * s.total) << f.name() << " " << format_point(x);
        EXPECT_GE(s.a_term, 0.0);
        EXPECT_GE(s.b2_term, 0.0);
      }
  }
}

TEST(Gp, DegeneratesToGammaAtTwo) {
  const RootSystem rs = make_z2d(2, {0.4, 1.1});
  const auto f = positive_mixture(2);
  GpParams two;
  two.p = 2.0;
  for (const Vec& x : {V({0.3, -0.9}), V({-1.4, 0.2})}) {
    const double g = gamma_num(f, x, rs);
    EXPECT_NEAR(gp_definition(f, x, two, rs), g, 1e-14 * (1 + g));
    EXPECT_NEAR(gp_integral(f, x, two, rs), g, 1e-14 * (1 + g));
  }
}

TEST(Gp, ZeroKappaAndConstant) {
  const RootSystem flat = make_z2d(2, {0.0, 0.0});
  const RootSystem rs = make_z2d(2, {1.0, 1.0});
  const auto f = positive_mixture(2);
  GpParams params;
  params.p = 1.3;
  const Vec x = V({0.5, 0.6});
  EXPECT_NEAR(gp_definition(f, x, params, flat), 0.3 * grad_sq(f, x), 1e-15);
  EXPECT_NEAR(gp_integral(f, x, params, flat), 0.3 * grad_sq(f, x), 1e-15);
  EXPECT_EQ(gp_definition(fields::constant(2, 3.0), x, params, rs), 0.0);
  EXPECT_EQ(gp_integral(fields::constant(2, 3.0), x, params, rs), 0.0);
}

TEST(Gp, EvenRankOne) {
  const RootSystem rs = make_z2d(1, {1.0});
  const auto f = fields::gaussian(1, 0.8, V({0.0}));
  GpParams params;
  params.p = 1.5;
  const Vec x = V({0.7});
  EXPECT_NEAR(gp_integral(f, x, params, rs), 0.5 * grad_sq(f, x), 1e-16);
}

TEST(Gp, IntegralMatchesDefinition) {
  std::mt19937_64 rng(21);
  for (int dim = 1; dim <= 3; ++dim) {
    const RootSystem rs = make_z2d(dim, std::vector<double>(static_cast<std::size_t>(dim), 1.0));
    const auto f = positive_mixture(dim);
    for (double p : {1.05, 1.2, 1.5, 1.9}) {
      GpParams params;
      params.p = p;
      for (int n = 0; n < 30; ++n) {
        const Vec x = off_planes(rng, dim, 3.0, 0.0);
        const double def = gp_definition(f, x, params, rs);
        EXPECT_NEAR(gp_integral(f, x, params, rs), def, 1e-6 * (1 + std::abs(def)));
      }
    }
  }
  // rank one, kappa = 1, x = 1 on a Gaussian
  const RootSystem r1 = make_z2d(1, {1.0});
  const auto g = fields::gaussian(1, 1.0, V({0.4}));
  GpParams params;
  params.p = 1.5;
  const double def = gp_definition(g, V({1.0}), params, r1);
  EXPECT_NEAR(gp_integral(g, V({1.0}), params, r1), def, 1e-10 * def);
}

TEST(Gp, DefinitionAgainstRawDifferences) {
  // (1/p)[f^(2-p) D(f^p) - p f D f] with D the Dunkl Laplacian evaluated by
  // finite differences on the field f^p.
  const RootSystem rs = make_z2d(2, {0.6, 1.4});
  const auto f = positive_mixture(2);
  const double p = 1.4;
  ScalarField fp(2, [&](const Vec& y) { return std::pow(f(y), p); }, "f^p");
  fp.fd.h_outer = 1e-3;
  GpParams params;
  params.p = p;
  for (const Vec& x : {V({0.5, -0.8}), V({1.3, 0.4})}) {
    const double raw =
        (std::pow(f(x), 2 - p) * dunkl_laplacian_num(fp, x, rs) - p * f(x) * dunkl_laplacian_num(f, x, rs)) / p;
    EXPECT_NEAR(gp_definition(f, x, params, rs), raw, 1e-6 * (1 + std::abs(raw)));
  }
}

TEST(Gp, RequiresPositivityAndValidExponent) {
  const RootSystem rs = make_z2d(1, {1.0});
  const auto f = fields::polynomial(parse_polynomial("1 x1 + 1/2", 1));
  GpParams params;
  EXPECT_THROW(gp_definition(f, V({0.7}), params, rs), DomainError);  // f(-0.7) < 0
  params.p = 2.5;
  EXPECT_THROW(gp_integral(positive_mixture(1), V({0.3}), params, rs), ValidationError);
  params.p = 1.5;
  params.nodes = 4;
  EXPECT_THROW(validate(params), ValidationError);
}

TEST(GpComparison, UpperBoundOnOrbit) {
  std::mt19937_64 rng(4);
  const RootSystem rs = make_z2d(2, {0.5, 1.5});
  const auto f = positive_mixture(2);
  for (double p : {1.2, 1.5, 2.0})
    for (int n = 0; n < 50; ++n) {
      const auto c = check_gp_comparison(f, off_planes(rng, 2, 2.5, 0.0), p, rs);
      EXPECT_TRUE(c.pass_upper) << p << " " << c.upper_lhs << " " << c.upper_rhs;
      EXPECT_GE(c.gp, 0.0);
    }
}

TEST(GpComparison, LowerBoundHoldsWhereReflectionsAreLarger) {
  // With f(x) <= f(r_alpha x) for every root the s-integral is at most 1/2.
  const RootSystem rs = make_z2d(2, {0.5, 1.5});
  const auto f = fields::gaussian(2, 0.7, V({-0.5, -0.4}));
  for (double p : {1.2, 1.5, 2.0})
    for (const Vec& x : {V({0.3, 0.2}), V({1.1, 0.6}), V({2.0, 1.7})}) {
      const auto c = check_gp_comparison(f, x, p, rs);
      EXPECT_TRUE(c.pass) << p << " " << c.lower_lhs << " " << c.lower_rhs;
    }
  const RootSystem flat = make_z2d(2, {0.0, 0.0});
  const auto c = check_gp_comparison(positive_mixture(2), V({0.2, 0.9}), 1.5, flat);
  EXPECT_NEAR(c.lower_lhs, c.lower_rhs, 1e-14);
}

// Gamma(f) >= G_p(f)/(p-1) fails once f(x) > f(r_alpha x): at a critical
// point with f(x) = 1, f(-x) = e the ratio tends to 2/p as e -> 0.
TEST(GpComparison, LowerBoundFailsWhenValueExceedsReflection) {
  const double kappa = 1.0;
  const RootSystem rs = make_z2d(1, {kappa});
  const auto f = fields::gaussian(1, 3.0, V({1.0}));  // f(1) = 1, f(-1) = e^-12, f'(1) = 0
  for (double p : {1.2, 1.5, 1.8}) {
    const auto c = check_gp_comparison(f, V({1.0}), p, rs);
    EXPECT_FALSE(c.pass_lower);
    EXPECT_TRUE(c.pass_upper);
    EXPECT_NEAR(c.lower_rhs / c.lower_lhs, 2.0 / p, 1e-3);
  }
}
