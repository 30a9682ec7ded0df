#pragma once

#include "dunkl/common.hpp"

#include <gmpxx.h>

#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace dunkl {

using Exponent = std::vector<int>;

// Graded order: total degree descending, then lexicographic descending.
struct ExponentOrder {
  bool operator()(const Exponent& a, const Exponent& b) const {
    const int da = std::accumulate(a.begin(), a.end(), 0);
    const int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return a > b;
  }
};

// Maximum total degree any polynomial may reach before ResourceError.
int degree_cap();
void set_degree_cap(int cap);

inline double coeff_to_double(double c) { return c; }
inline double coeff_to_double(const mpq_class& c) { return c.get_d(); }

// GMP only keeps rationals canonical when they were built canonical.
inline void normalize(double&) {}
inline void normalize(mpq_class& c) { c.canonicalize(); }

/// Sparse multivariate polynomial in x1..xd. Zero coefficients are never
/// stored and terms are kept in graded order, so == is structural equality.
template <class Coeff>
class BasicPolynomial {
 public:
  using Scalar = Coeff;
  using Terms = std::map<Exponent, Coeff, ExponentOrder>;

  explicit BasicPolynomial(int dim = 1) : dim_(dim) {
    if (dim < 1) throw ValidationError("polynomial dimension must be >= 1");
  }

  static BasicPolynomial constant(int dim, const Coeff& c) {
    BasicPolynomial p(dim);
    p.add_term(Exponent(dim, 0), c);
    return p;
  }
  // x_i, zero-based axis.
  static BasicPolynomial variable(int dim, int i) {
    Exponent e(dim, 0);
    e.at(i) = 1;
    BasicPolynomial p(dim);
    p.add_term(e, Coeff(1));
    return p;
  }
  static BasicPolynomial monomial(int dim, const Exponent& e, const Coeff& c) {
    BasicPolynomial p(dim);
    p.add_term(e, c);
    return p;
  }

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    if (terms_.empty()) return -1;
    const Exponent& e = terms_.begin()->first;
    return std::accumulate(e.begin(), e.end(), 0);
  }

  Coeff coefficient(const Exponent& e) const {
    const auto it = terms_.find(e);
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  void add_term(const Exponent& e, const Coeff& c) {
    if (static_cast<int>(e.size()) != dim_) throw ValidationError("exponent has wrong length");
    int deg = 0;
    for (int k : e) {
      if (k < 0) throw InvariantViolation("negative exponent");
      deg += k;
    }
    if (deg > degree_cap())
      throw ResourceError("polynomial degree " + std::to_string(deg) + " exceeds cap " +
                          std::to_string(degree_cap()));
    Coeff v = c;
    normalize(v);
    if (v == Coeff(0)) return;
    auto [it, inserted] = terms_.try_emplace(e, v);
    if (!inserted) {
      it->second += v;
      if (it->second == Coeff(0)) terms_.erase(it);
    }
  }

  BasicPolynomial& operator+=(const BasicPolynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  BasicPolynomial& operator-=(const BasicPolynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, Coeff(-c));
    return *this;
  }
  BasicPolynomial& operator*=(const Coeff& scale) {
    Coeff s = scale;
    normalize(s);
    if (s == Coeff(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend BasicPolynomial operator+(BasicPolynomial a, const BasicPolynomial& b) { return a += b; }
  friend BasicPolynomial operator-(BasicPolynomial a, const BasicPolynomial& b) { return a -= b; }
  friend BasicPolynomial operator-(BasicPolynomial a) { return a *= Coeff(-1); }
  friend BasicPolynomial operator*(BasicPolynomial a, const Coeff& s) { return a *= s; }
  friend BasicPolynomial operator*(const Coeff& s, BasicPolynomial a) { return a *= s; }

  friend BasicPolynomial operator*(const BasicPolynomial& a, const BasicPolynomial& b) {
    a.check_dim(b);
    BasicPolynomial out(a.dim_);
    if (a.is_zero() || b.is_zero()) return out;
    if (a.degree() + b.degree() > degree_cap())
      throw ResourceError("product degree " + std::to_string(a.degree() + b.degree()) +
                          " exceeds cap " + std::to_string(degree_cap()));
    Exponent e(a.dim_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (int k = 0; k < a.dim_; ++k) e[k] = ea[k] + eb[k];
        out.add_term(e, Coeff(ca * cb));
      }
    }
    return out;
  }
  BasicPolynomial& operator*=(const BasicPolynomial& o) { return *this = *this * o; }

  bool operator==(const BasicPolynomial& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }
  bool operator!=(const BasicPolynomial& o) const { return !(*this == o); }

  /// Evaluation in any ring T that accepts Coeff (double, mpq_class).
  template <class T>
  T eval(const std::vector<T>& x) const {
    if (static_cast<int>(x.size()) != dim_) throw ValidationError("eval: point has wrong dimension");
    const int deg = std::max(degree(), 0);
    std::vector<std::vector<T>> pw(dim_, std::vector<T>(deg + 1));
    for (int k = 0; k < dim_; ++k) {
      pw[k][0] = T(1);
      for (int n = 1; n <= deg; ++n) pw[k][n] = pw[k][n - 1] * x[k];
    }
    T sum(0);
    for (const auto& [e, c] : terms_) {
      T term = convert<T>(c);
      for (int k = 0; k < dim_; ++k)
        if (e[k]) term *= pw[k][e[k]];
      sum += term;
    }
    return sum;
  }

  double eval(const Vec& x) const {
    std::vector<double> v(x.data(), x.data() + x.size());
    return eval<double>(v);
  }

 private:
  template <class T>
  static T convert(const Coeff& c) {
    if constexpr (std::is_same_v<T, double>)
      return coeff_to_double(c);
    else
      return T(c);
  }
  void check_dim(const BasicPolynomial& o) const {
    if (o.dim_ != dim_) throw ValidationError("polynomial dimension mismatch");
  }

  int dim_;
  Terms terms_;
};

using Polynomial = BasicPolynomial<mpq_class>;
using RealPolynomial = BasicPolynomial<double>;

// ---------------------------------------------------------------------------
// Structural operations. Axis indices are zero-based.

template <class C>
BasicPolynomial<C> derivative(const BasicPolynomial<C>& f, int i) {
  BasicPolynomial<C> out(f.dim());
  for (const auto& [e, c] : f.terms()) {
    if (e[i] == 0) continue;
    Exponent d = e;
    --d[i];
    out.add_term(d, C(c * C(e[i])));
  }
  return out;
}

/// f o sigma_i, sigma_i flipping the sign of coordinate i.
template <class C>
BasicPolynomial<C> sign_flip(const BasicPolynomial<C>& f, int i) {
  BasicPolynomial<C> out(f.dim());
  for (const auto& [e, c] : f.terms()) out.add_term(e, e[i] % 2 ? C(-c) : c);
  return out;
}

/// f / x_i. Every term must carry x_i; anything else is a logic error in the
/// caller (the reflection difference was formed incorrectly).
template <class C>
BasicPolynomial<C> divide_by_axis(const BasicPolynomial<C>& f, int i) {
  BasicPolynomial<C> out(f.dim());
  for (const auto& [e, c] : f.terms()) {
    if (e[i] == 0)
      throw InvariantViolation("divide_by_axis: term without x" + std::to_string(i + 1) +
                               " survives; polynomial is not divisible");
    Exponent d = e;
    --d[i];
    out.add_term(d, c);
  }
  return out;
}

/// (f - f o sigma_i) / x_i.
template <class C>
BasicPolynomial<C> reflection_quotient(const BasicPolynomial<C>& f, int i) {
  return divide_by_axis(BasicPolynomial<C>(f - sign_flip(f, i)), i);
}

// Validated, canonical copy of the multiplicities.
template <class C>
std::vector<C> check_kappa(const BasicPolynomial<C>& f, const std::vector<C>& kappa_in) {
  std::vector<C> kappa = kappa_in;
  for (C& k : kappa) normalize(k);
  if (static_cast<int>(kappa.size()) != f.dim())
    throw ValidationError("kappa has " + std::to_string(kappa.size()) +
                          " entries for a polynomial in " + std::to_string(f.dim()) + " variables");
  for (const C& k : kappa)
    if (k < C(0)) throw ValidationError("multiplicities must be >= 0");
  return kappa;
}

/// D_i f = d_i f + kappa_i (f - f o sigma_i) / x_i.
template <class C>
BasicPolynomial<C> dunkl_derivative(const BasicPolynomial<C>& f, int i, const std::vector<C>& kappa_in) {
  const std::vector<C> kappa = check_kappa(f, kappa_in);
  if (i < 0 || i >= f.dim()) throw ValidationError("axis index out of range");
  BasicPolynomial<C> out = derivative(f, i);
  if (kappa[i] != C(0)) out += reflection_quotient(f, i) * kappa[i];
  return out;
}

/// Closed form: Delta f + sum_i kappa_i [2 d_i f / x_i - (f - f o sigma_i) / x_i^2].
template <class C>
BasicPolynomial<C> dunkl_laplacian(const BasicPolynomial<C>& f, const std::vector<C>& kappa_in) {
  const std::vector<C> kappa = check_kappa(f, kappa_in);
  BasicPolynomial<C> out(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    out += derivative(derivative(f, i), i);
    if (kappa[i] == C(0)) continue;
    // 2 x_i d_i f - (f - f o sigma_i) vanishes to second order in x_i.
    BasicPolynomial<C> q = derivative(f, i) * BasicPolynomial<C>::variable(f.dim(), i) * C(2);
    q -= f - sign_flip(f, i);
    out += divide_by_axis(divide_by_axis(q, i), i) * kappa[i];
  }
  return out;
}

/// sum_i D_i D_i f.
template <class C>
BasicPolynomial<C> dunkl_laplacian_sum(const BasicPolynomial<C>& f, const std::vector<C>& kappa) {
  BasicPolynomial<C> out(f.dim());
  for (int i = 0; i < f.dim(); ++i) out += dunkl_derivative(dunkl_derivative(f, i, kappa), i, kappa);
  return out;
}

/// Closed form: <grad f, grad g> + sum_i (kappa_i / 2) q_i(f) q_i(g), q_i the reflection quotient.
template <class C>
BasicPolynomial<C> gamma(const BasicPolynomial<C>& f, const BasicPolynomial<C>& g,
                         const std::vector<C>& kappa_in) {
  const std::vector<C> kappa = check_kappa(f, kappa_in);
  BasicPolynomial<C> out(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    out += derivative(f, i) * derivative(g, i);
    if (kappa[i] != C(0))
      out += reflection_quotient(f, i) * reflection_quotient(g, i) * C(kappa[i] / C(2));
  }
  return out;
}

template <class C>
BasicPolynomial<C> gamma(const BasicPolynomial<C>& f, const std::vector<C>& kappa) {
  return gamma(f, f, kappa);
}

/// 1/2 [Delta_k(fg) - f Delta_k g - g Delta_k f].
template <class C>
BasicPolynomial<C> gamma_definition(const BasicPolynomial<C>& f, const BasicPolynomial<C>& g,
                                    const std::vector<C>& kappa) {
  BasicPolynomial<C> out = dunkl_laplacian(BasicPolynomial<C>(f * g), kappa);
  out -= f * dunkl_laplacian(g, kappa);
  out -= g * dunkl_laplacian(f, kappa);
  return out * C(C(1) / C(2));
}

/// 1/2 Delta_k Gamma(f) - Gamma(Delta_k f, f), from the definition.
template <class C>
BasicPolynomial<C> gamma2(const BasicPolynomial<C>& f, const std::vector<C>& kappa) {
  BasicPolynomial<C> out = dunkl_laplacian(gamma(f, kappa), kappa) * C(C(1) / C(2));
  out -= gamma(dunkl_laplacian(f, kappa), f, kappa);
  return out;
}

/// sum_{ij} (d_i d_j f)^2.
template <class C>
BasicPolynomial<C> hessian_hs_sq(const BasicPolynomial<C>& f) {
  BasicPolynomial<C> out(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    const BasicPolynomial<C> fi = derivative(f, i);
    for (int j = 0; j < f.dim(); ++j) {
      const BasicPolynomial<C> fij = derivative(fi, j);
      out += fij * fij;
    }
  }
  return out;
}

template <class C>
struct Gamma2Parts {
  BasicPolynomial<C> hess_sq;
  BasicPolynomial<C> a_term;
  BasicPolynomial<C> b2_term;
  BasicPolynomial<C> total() const { return hess_sq + a_term + b2_term; }
};

/// Gamma_2 = ||Hess f||^2 + A + B2 for the coordinate reflection group, with
/// every singular quotient carried out as exact division. With q_i = (f - f o sigma_i)/x_i:
///   A  = sum_i kappa_i [ sum_{j != i} ((d_j f - d_j f o sigma_i)/x_i)^2
///                        + ((q_i - d_i f - d_i f o sigma_i)/x_i)^2
///                        + 1/2 ((2 d_i f - q_i)/x_i)^2 ]
///   B2 = sum_{i != j} (kappa_i kappa_j / 4) ((f - f o s_i - f o s_j + f o s_i s_j)/(x_i x_j))^2
template <class C>
Gamma2Parts<C> gamma2_decomposition(const BasicPolynomial<C>& f, const std::vector<C>& kappa_in) {
  const std::vector<C> kappa = check_kappa(f, kappa_in);
  const int d = f.dim();
  Gamma2Parts<C> parts{hessian_hs_sq(f), BasicPolynomial<C>(d), BasicPolynomial<C>(d)};
  for (int i = 0; i < d; ++i) {
    if (kappa[i] == C(0)) continue;
    BasicPolynomial<C> a(d);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const BasicPolynomial<C> fj = derivative(f, j);
      const BasicPolynomial<C> v = reflection_quotient(fj, i);
      a += v * v;
    }
    const BasicPolynomial<C> qi = reflection_quotient(f, i);
    const BasicPolynomial<C> fi = derivative(f, i);
    const BasicPolynomial<C> e = divide_by_axis(BasicPolynomial<C>(qi - fi - sign_flip(fi, i)), i);
    a += e * e;
    const BasicPolynomial<C> s = divide_by_axis(BasicPolynomial<C>(fi * C(2) - qi), i);
    a += s * s * C(C(1) / C(2));
    parts.a_term += a * kappa[i];
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j || kappa[i] == C(0) || kappa[j] == C(0)) continue;
      const BasicPolynomial<C> q = reflection_quotient(reflection_quotient(f, i), j);
      parts.b2_term += q * q * C(kappa[i] * kappa[j] / C(4));
    }
  }
  return parts;
}

/// Rank-one closed form
///   f''^2 + (k/x^2)[f'(x) + f'(-x) - q]^2 + (k/2x^2)[2 f'(x) - q]^2,  q = (f(x) - f(-x))/x.
template <class C>
BasicPolynomial<C> gamma2_rank1(const BasicPolynomial<C>& f, const C& kappa) {
  if (f.dim() != 1) throw ValidationError("gamma2_rank1 needs a univariate polynomial");
  if (kappa < C(0)) throw ValidationError("multiplicities must be >= 0");
  const BasicPolynomial<C> f1 = derivative(f, 0);
  const BasicPolynomial<C> f2 = derivative(f1, 0);
  const BasicPolynomial<C> q = reflection_quotient(f, 0);
  const BasicPolynomial<C> b1 = divide_by_axis(BasicPolynomial<C>(f1 + sign_flip(f1, 0) - q), 0);
  const BasicPolynomial<C> b2 = divide_by_axis(BasicPolynomial<C>(f1 * C(2) - q), 0);
  return f2 * f2 + b1 * b1 * kappa + b2 * b2 * C(kappa / C(2));
}

// ---------------------------------------------------------------------------
// Rational polynomials: text form and test corpora.

/// Canonical text, e.g. `3/2 x1^2 x2 - 1 x2^3`; the zero polynomial prints as `0`.
std::string to_string(const Polynomial& f);
/// Inverse of to_string; also accepts `*` between factors, bare monomials and
/// decimal-free integers. dim = 0 infers the dimension from the largest index.
Polynomial parse_polynomial(const std::string& text, int dim = 0);

/// Exact value at a rational point.
mpq_class eval_exact(const Polynomial& f, const std::vector<mpq_class>& x);

std::vector<mpq_class> to_rational(const std::vector<double>& v);

/// Random polynomial with at most `terms` terms of total degree <= max_degree
/// and coefficients p/q, |p| <= 20, 1 <= q <= 9.
Polynomial random_polynomial(std::mt19937_64& rng, int dim, int max_degree, int terms);

/// Round-trip to floating coefficients.
RealPolynomial to_real(const Polynomial& f);

inline std::ostream& operator<<(std::ostream& os, const Polynomial& f) { return os << to_string(f); }

}  // namespace dunkl
