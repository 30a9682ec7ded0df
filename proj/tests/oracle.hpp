#pragma once

// Pointwise exact oracle for the coordinate-reflection calculus. Functions
// are black boxes over the rationals with a known degree bound; partial
// derivatives come from exact Lagrange differentiation on integer offsets,
// reflection quotients from exact division at the probe point. Nothing here
// touches the term-map engine under test.

#include <gmpxx.h>

#include <functional>
#include <memory>
#include <vector>

namespace oracle {

using Q = mpq_class;
using QPoint = std::vector<Q>;

struct Fn {
  std::function<Q(const QPoint&)> f;
  int degree;
  Q operator()(const QPoint& x) const { return f(x); }
};

// d/ds p(s) at s = 0 for deg p <= n, from values at s = -h..n-h.
inline std::vector<std::pair<int, Q>> derivative_weights(int n) {
  std::vector<int> s;
  for (int k = 0; k <= n; ++k) s.push_back(k - n / 2);
  std::vector<std::pair<int, Q>> w;
  for (std::size_t k = 0; k < s.size(); ++k) {
    Q denom = 1;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != k) denom *= s[k] - s[j];
    Q numer = 0;
    for (std::size_t m = 0; m < s.size(); ++m) {
      if (m == k) continue;
      Q prod = 1;
      for (std::size_t j = 0; j < s.size(); ++j)
        if (j != k && j != m) prod *= -s[j];
      numer += prod;
    }
    w.emplace_back(s[k], numer / denom);
  }
  return w;
}

inline Fn partial(const Fn& g, int i) {
  if (g.degree <= 0) return {[](const QPoint&) { return Q(0); }, 0};
  auto w = std::make_shared<std::vector<std::pair<int, Q>>>(derivative_weights(g.degree));
  return {[g, i, w](const QPoint& x) {
            Q sum = 0;
            QPoint y = x;
            for (const auto& [off, c] : *w) {
              y[i] = x[i] + off;
              sum += c * g(y);
            }
            return sum;
          },
          g.degree - 1};
}

inline Fn flip(const Fn& g, int i) {
  return {[g, i](const QPoint& x) {
            QPoint y = x;
            y[i] = -y[i];
            return g(y);
          },
          g.degree};
}

// (g - g o sigma_i) / x_i at points with x_i != 0.
inline Fn quotient(const Fn& g, int i) {
  return {[g, i](const QPoint& x) {
            QPoint y = x;
            y[i] = -y[i];
            return Q((g(x) - g(y)) / x[i]);
          },
          std::max(g.degree - 1, 0)};
}

inline Fn dunkl(const Fn& g, int i, const std::vector<Q>& kappa) {
  const Fn d = partial(g, i);
  const Fn q = quotient(g, i);
  const Q k = kappa[i];
  return {[d, q, k](const QPoint& x) { return Q(d(x) + k * q(x)); }, std::max(g.degree - 1, 0)};
}

// sum_i D_i D_i g, the defining composition.
inline Fn laplacian(const Fn& g, const std::vector<Q>& kappa) {
  std::vector<Fn> parts;
  for (std::size_t i = 0; i < kappa.size(); ++i)
    parts.push_back(dunkl(dunkl(g, static_cast<int>(i), kappa), static_cast<int>(i), kappa));
  return {[parts](const QPoint& x) {
            Q s = 0;
            for (const Fn& p : parts) s += p(x);
            return s;
          },
          std::max(g.degree - 2, 0)};
}

inline Fn product(const Fn& a, const Fn& b) {
  return {[a, b](const QPoint& x) { return Q(a(x) * b(x)); }, a.degree + b.degree};
}

// 1/2 [L(ab) - a L b - b L a].
inline Fn gamma(const Fn& a, const Fn& b, const std::vector<Q>& kappa) {
  const Fn lab = laplacian(product(a, b), kappa);
  const Fn la = laplacian(a, kappa);
  const Fn lb = laplacian(b, kappa);
  return {[=](const QPoint& x) { return Q((lab(x) - a(x) * lb(x) - b(x) * la(x)) / 2); },
          std::max(a.degree + b.degree - 2, 0)};
}

inline Fn gamma2(const Fn& f, const std::vector<Q>& kappa) {
  const Fn g = gamma(f, f, kappa);
  const Fn lg = laplacian(g, kappa);
  const Fn cross = gamma(laplacian(f, kappa), f, kappa);
  return {[=](const QPoint& x) { return Q(lg(x) / 2 - cross(x)); },
          std::max(2 * f.degree - 4, 0)};
}

inline Fn hess_sq(const Fn& f, int dim) {
  std::vector<Fn> second;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) second.push_back(partial(partial(f, i), j));
  return {[second](const QPoint& x) {
            Q s = 0;
            for (const Fn& h : second) {
              const Q v = h(x);
              s += v * v;
            }
            return s;
          },
          std::max(2 * f.degree - 4, 0)};
}

}  // namespace oracle
