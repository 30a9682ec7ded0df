#include "dunkl/polyx.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dunkl;
using oracle::Q;
using oracle::QPoint;

namespace {

struct RawPoly {
  int dim;
  std::vector<std::pair<Q, std::vector<int>>> terms;

  Polynomial build() const {
    Polynomial p(dim);
    for (const auto& [c, e] : terms) p.add_term(e, c);
    return p;
  }
  oracle::Fn fn() const {
    int deg = 0;
    for (const auto& t : terms) {
      int s = 0;
      for (int k : t.second) s += k;
      deg = std::max(deg, s);
    }
    auto copy = terms;
    return {[copy](const QPoint& x) {
              Q sum = 0;
              for (const auto& [c, e] : copy) {
                Q t = c;
                for (std::size_t k = 0; k < e.size(); ++k)
                  for (int n = 0; n < e[k]; ++n) t *= x[k];
                sum += t;
              }
              return sum;
            },
            deg};
  }
};

RawPoly random_raw(std::mt19937_64& rng, int dim, int max_deg, int nterms) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5), deg(0, max_deg), axis(0, dim - 1);
  RawPoly p{dim, {}};
  for (int k = 0; k < nterms; ++k) {
    std::vector<int> e(dim, 0);
    const int n = deg(rng);
    for (int j = 0; j < n; ++j) ++e[axis(rng)];
    Q c(num(rng), den(rng));
    c.canonicalize();
    p.terms.emplace_back(c, e);
  }
  return p;
}

// Off-hyperplane rational points; denominators of 13 keep every integer
// offset used by the oracle away from x_i = 0.
QPoint random_point(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> num(-40, 40);
  QPoint x;
  for (int k = 0; k < dim; ++k) {
    int n = num(rng);
    if (n % 13 == 0) n += 1;
    Q q(n, 13);
    q.canonicalize();
    x.push_back(q);
  }
  return x;
}

std::vector<Q> random_kappa(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> num(0, 7);
  std::vector<Q> k;
  for (int i = 0; i < dim; ++i) {
    Q q(num(rng), 4);
    q.canonicalize();
    k.push_back(q);
  }
  return k;
}

Polynomial P(const std::string& s, int dim = 0) { return parse_polynomial(s, dim); }

}  // namespace

TEST(Polynomial, EvalAndArithmetic) {
  const Polynomial f = P("1 x1^2 x2");
  EXPECT_EQ(eval_exact(f, {Q(2), Q(3)}), Q(12));
  EXPECT_DOUBLE_EQ(f.eval(Vec{{2.0, 3.0}}), 12.0);
  const Polynomial z = f + (-f);
  EXPECT_TRUE(z.is_zero());
  EXPECT_TRUE(z.terms().empty());
  EXPECT_EQ(P("x1 + 1") * P("x1 - 1"), P("x1^2 - 1"));
}

TEST(Polynomial, SignFlipIsInvolution) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Polynomial f = random_polynomial(rng, 3, 6, 8);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(sign_flip(sign_flip(f, i), i), f);
  }
}

TEST(Polynomial, TextRoundTrip) {
  const Polynomial f = P("3/2 x1^2 x2 - 1 x2^3");
  EXPECT_EQ(to_string(f), "3/2 x1^2 x2 - 1 x2^3");
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const Polynomial g = random_polynomial(rng, 4, 6, 10);
    EXPECT_EQ(parse_polynomial(to_string(g), 4), g);
  }
  EXPECT_EQ(to_string(Polynomial(2)), "0");
  EXPECT_EQ(P("-2*x1*x1 + 4/6"), P("-2 x1^2 + 2/3"));
}

TEST(Polynomial, ParseErrorsCarryColumn) {
  try {
    P("3 x1 + + x2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1);
    EXPECT_EQ(e.column, 8);
  }
  EXPECT_THROW(P("1/0 x1"), ParseError);
  EXPECT_THROW(P("x1^"), ParseError);
  EXPECT_THROW(P("x3", 2), ParseError);
}

TEST(Polynomial, DegreeCap) {
  set_degree_cap(10);
  const Polynomial f = P("x1^6");
  EXPECT_THROW(f * f, ResourceError);
  set_degree_cap(64);
  EXPECT_NO_THROW(f * f);
}

TEST(Polynomial, DivisionAssertsDivisibility) {
  EXPECT_THROW(divide_by_axis(P("x1 + 1"), 0), InvariantViolation);
  EXPECT_EQ(divide_by_axis(P("x1^3 x2 + 2 x1"), 0), P("x1^2 x2 + 2"));
}

TEST(DunklDerivative, RankOneValues) {
  const std::vector<Q> k{Q(3, 7)};
  EXPECT_EQ(dunkl_derivative(P("x1"), 0, k), Polynomial::constant(1, Q(1) + 2 * k[0]));
  EXPECT_EQ(dunkl_derivative(P("x1^2"), 0, k), P("2 x1"));
  EXPECT_EQ(dunkl_derivative(P("x1^3"), 0, k), P("x1^2") * Q(Q(3) + 2 * k[0]));
}

TEST(DunklDerivative, MatchesPointwiseOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const RawPoly raw = random_raw(rng, d, 5, 6);
    const auto kappa = random_kappa(rng, d);
    const Polynomial f = raw.build();
    for (int i = 0; i < d; ++i) {
      const Polynomial df = dunkl_derivative(f, i, kappa);
      const oracle::Fn dfo = oracle::dunkl(raw.fn(), i, kappa);
      for (int s = 0; s < 3; ++s) {
        const QPoint x = random_point(rng, d);
        EXPECT_EQ(eval_exact(df, x), dfo(x));
      }
    }
  }
}

TEST(DunklDerivative, LowersDegree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const Polynomial f = random_polynomial(rng, 3, 6, 6);
    const std::vector<Q> kappa{Q(1, 2), Q(2), Q(0)};
    for (int i = 0; i < 3; ++i) EXPECT_LE(dunkl_derivative(f, i, kappa).degree(), f.degree() - 1);
  }
}

TEST(DunklLaplacian, SpotValues) {
  const Q k(5, 3);
  EXPECT_EQ(dunkl_laplacian(P("x1^2"), {k}), Polynomial::constant(1, Q(2) + 4 * k));
  EXPECT_EQ(dunkl_laplacian(P("x1 x2"), {Q(1, 2), Q(3, 2)}), Polynomial(2));
  // Oracle: compose the pointwise Dunkl derivative twice.
  const oracle::Fn cube{[](const QPoint& x) { return Q(x[0] * x[0] * x[0]); }, 3};
  const Polynomial lap = dunkl_laplacian(P("x1^3"), {k});
  const oracle::Fn ref = oracle::laplacian(cube, {k});
  for (int n : {-5, 2, 7}) {
    const QPoint x{Q(n, 3)};
    EXPECT_EQ(eval_exact(lap, x), ref(x));
  }
}

TEST(DunklLaplacian, ClosedFormEqualsSumOfSquares) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    const Polynomial f = random_polynomial(rng, d, 6, 8);
    std::vector<Q> kappa;
    for (int i = 0; i < d; ++i) kappa.emplace_back(Q(trial + i, 3));
    EXPECT_EQ(dunkl_laplacian(f, kappa), dunkl_laplacian_sum(f, kappa));
  }
}

TEST(Gamma, SpotValuesAndSymmetry) {
  const Q k(2, 5);
  EXPECT_EQ(gamma(P("x1"), std::vector<Q>{k}), Polynomial::constant(1, Q(1) + 2 * k));
  const std::vector<Q> k2{Q(1, 3), Q(7, 2)};
  const Polynomial g = gamma(P("x1 x2"), k2);
  EXPECT_EQ(g, P("x1^2", 2) * Q(1 + 2 * k2[1]) + P("x2^2") * Q(1 + 2 * k2[0]));
  // Oracle: defining identity evaluated pointwise.
  const oracle::Fn f{[](const QPoint& x) { return Q(x[0] * x[1]); }, 2};
  const oracle::Fn ref = oracle::gamma(f, f, k2);
  std::mt19937_64 rng(2);
  for (int s = 0; s < 5; ++s) {
    const QPoint x = random_point(rng, 2);
    EXPECT_EQ(eval_exact(g, x), ref(x));
  }
  const Polynomial one = Polynomial::constant(2, Q(1));
  EXPECT_TRUE(gamma(P("x1^3 x2 - x2", 2), one, k2).is_zero());

  std::mt19937_64 r2(9);
  for (int t = 0; t < 10; ++t) {
    const Polynomial a = random_polynomial(r2, 2, 5, 5), b = random_polynomial(r2, 2, 5, 5);
    EXPECT_EQ(gamma(a, b, k2), gamma(b, a, k2));
  }
}

TEST(Gamma, ClosedFormEqualsDefinition) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    const Polynomial f = random_polynomial(rng, d, 6, 6);
    const Polynomial g = random_polynomial(rng, d, 6, 6);
    std::vector<Q> kappa;
    for (int i = 0; i < d; ++i) kappa.emplace_back(Q(2 * trial + i + 1, 5));
    EXPECT_EQ(gamma(f, g, kappa), gamma_definition(f, g, kappa));
  }
}

TEST(Gamma2, SpotValues) {
  const Q k(3, 4);
  EXPECT_TRUE(gamma2(P("x1"), std::vector<Q>{k}).is_zero());
  EXPECT_EQ(gamma2(P("x1^2"), std::vector<Q>{k}), Polynomial::constant(1, Q(4) + 8 * k));
  EXPECT_EQ(gamma2(P("x1^3"), std::vector<Q>{k}), P("x1^2") * Q(Q(36) + 24 * k));
  const std::vector<Q> k2{Q(1, 2), Q(3, 2)};
  EXPECT_EQ(gamma2(P("x1 x2"), k2),
            Polynomial::constant(2, Q(2) + 4 * k2[0] + 4 * k2[1] + 8 * k2[0] * k2[1]));
}

TEST(Gamma2, DefinitionMatchesPointwiseOracle) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 1 + trial % 3;
    const RawPoly raw = random_raw(rng, d, 4, 4);
    const auto kappa = random_kappa(rng, d);
    const Polynomial g2 = gamma2(raw.build(), kappa);
    const oracle::Fn ref = oracle::gamma2(raw.fn(), kappa);
    for (int s = 0; s < 2; ++s) {
      const QPoint x = random_point(rng, d);
      EXPECT_EQ(eval_exact(g2, x), ref(x));
    }
  }
}

TEST(Gamma2, DecompositionTermsForProduct) {
  const std::vector<Q> k{Q(1, 2), Q(3, 2)};
  const auto parts = gamma2_decomposition(P("x1 x2"), k);
  EXPECT_EQ(parts.hess_sq, Polynomial::constant(2, Q(2)));
  EXPECT_EQ(parts.a_term, Polynomial::constant(2, Q(4) * k[0] + 4 * k[1]));
  EXPECT_EQ(parts.b2_term, Polynomial::constant(2, Q(8) * k[0] * k[1]));
}

TEST(Gamma2, DecompositionEqualsDefinition) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    const Polynomial f = random_polynomial(rng, d, 5, 6);
    std::vector<Q> kappa;
    for (int i = 0; i < d; ++i) kappa.emplace_back(Q((trial + 3 * i) % 5, 2));
    const auto parts = gamma2_decomposition(f, kappa);
    EXPECT_EQ(parts.total(), gamma2(f, kappa));
    if (d == 1) EXPECT_EQ(gamma2_rank1(f, kappa[0]), gamma2(f, kappa));
  }
}

TEST(Gamma2, ZeroKappaIsHessian) {
  std::mt19937_64 rng(37);
  const Polynomial f = random_polynomial(rng, 3, 6, 8);
  const std::vector<Q> zero(3, Q(0));
  const auto parts = gamma2_decomposition(f, zero);
  EXPECT_TRUE(parts.a_term.is_zero());
  EXPECT_TRUE(parts.b2_term.is_zero());
  EXPECT_EQ(gamma2(f, zero), hessian_hs_sq(f));
}

TEST(Gamma2, CurvatureSignExact) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 1 + trial % 4;
    const Polynomial f = random_polynomial(rng, d, 5, 6);
    const auto kappa = random_kappa(rng, d);
    const Polynomial excess = gamma2(f, kappa) - hessian_hs_sq(f);
    for (int s = 0; s < 50; ++s) EXPECT_GE(eval_exact(excess, random_point(rng, d)), 0);
  }
}

TEST(Polynomial, RejectsNegativeKappa) {
  EXPECT_THROW(dunkl_laplacian(P("x1^2"), {Q(-1)}), ValidationError);
}
