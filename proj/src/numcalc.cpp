#include "dunkl/numcalc.hpp"

#include "dunkl/quadrature.hpp"
#include "dunkl/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <sstream>

namespace dunkl {

// ---------------------------------------------------------------------------
// Factor1D

Factor1D Factor1D::monomial(int n) {
  if (n < 0) throw ValidationError("monomial exponent must be >= 0");
  Factor1D f;
  f.kind = n == 0 ? Kind::Constant : Kind::Power;
  f.power = n;
  return f;
}

Factor1D Factor1D::gaussian(double a, double c) {
  if (!(a > 0.0)) throw ValidationError("gaussian: a must be > 0");
  Factor1D f;
  f.kind = Kind::Gaussian;
  f.a = a;
  f.c = c;
  return f;
}

Factor1D Factor1D::bump(double radius, double c) {
  if (!(radius > 0.0)) throw ValidationError("bump: radius must be > 0");
  Factor1D f;
  f.kind = Kind::Bump;
  f.a = radius;
  f.c = c;
  return f;
}

Factor1D Factor1D::dunkl_gauss(double kappa, double tau, double m) {
  if (!(tau > 0.0)) throw ValidationError("dunkl gaussian: tau must be > 0");
  if (!(kappa >= 0.0)) throw ValidationError("dunkl gaussian: kappa must be >= 0");
  Factor1D f;
  f.kind = Kind::DunklGauss;
  f.kappa = kappa;
  f.tau = tau;
  f.m = m;
  return f;
}

std::array<double, 3> Factor1D::jet(double x) const {
  switch (kind) {
    case Kind::Constant:
      return {1.0, 0.0, 0.0};
    case Kind::Power: {
      const int n = power;
      const double v = std::pow(x, n);
      const double d1 = n >= 1 ? n * std::pow(x, n - 1) : 0.0;
      const double d2 = n >= 2 ? n * (n - 1) * std::pow(x, n - 2) : 0.0;
      return {v, d1, d2};
    }
    case Kind::Gaussian: {
      const double y = x - c;
      const double e = std::exp(-a * y * y);
      return {e, -2.0 * a * y * e, (4.0 * a * a * y * y - 2.0 * a) * e};
    }
    case Kind::Bump: {
      const double s = (x - c) / a;
      const double q = 1.0 - s * s;
      if (q <= 0.0) return {0.0, 0.0, 0.0};
      const double phi = std::exp(-1.0 / q);
      const double q2 = q * q;
      const double ds = phi * (-2.0 * s / q2);
      const double dss = phi * (4.0 * s * s / (q2 * q2) - 2.0 / q2 - 8.0 * s * s / (q2 * q));
      return {phi, ds / a, dss / (a * a)};
    }
    case Kind::DunklGauss: {
      const KernelJet j = rank_one_kernel(kappa, tau, x, m, 2);
      return {j.value, j.dx, j.dxx};
    }
  }
  return {0.0, 0.0, 0.0};
}

std::string Factor1D::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant: os << "1"; break;
    case Kind::Power: os << "x^" << power; break;
    case Kind::Gaussian: os << "gauss(a=" << a << ",c=" << c << ")"; break;
    case Kind::Bump: os << "bump(r=" << a << ",c=" << c << ")"; break;
    case Kind::DunklGauss: os << "h(k=" << kappa << ",tau=" << tau << ",m=" << m << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SeparableSum

namespace {

using Jets = std::vector<std::array<double, 3>>;

Jets factor_jets(const SeparableTerm& t, const Vec& x) {
  Jets j(t.factors.size());
  for (std::size_t i = 0; i < t.factors.size(); ++i) j[i] = t.factors[i].jet(x[static_cast<Eigen::Index>(i)]);
  return j;
}

// Product of jets[k][order[k]] over k.
double product(const Jets& j, int d, int a = -1, int oa = 0, int b = -1, int ob = 0) {
  double p = 1.0;
  for (int k = 0; k < d; ++k) {
    int o = 0;
    if (k == a) o += oa;
    if (k == b) o += ob;
    p *= j[static_cast<std::size_t>(k)][static_cast<std::size_t>(o)];
  }
  return p;
}

}  // namespace

double SeparableSum::value(const Vec& x) const {
  double s = 0.0;
  for (const auto& t : terms) {
    double p = t.coeff;
    for (std::size_t i = 0; i < t.factors.size(); ++i) p *= t.factors[i].value(x[static_cast<Eigen::Index>(i)]);
    s += p;
  }
  return s;
}

Vec SeparableSum::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim);
  for (const auto& t : terms) {
    const Jets j = factor_jets(t, x);
    for (int i = 0; i < dim; ++i) g[i] += t.coeff * product(j, dim, i, 1);
  }
  return g;
}

Mat SeparableSum::hessian(const Vec& x) const {
  Mat h = Mat::Zero(dim, dim);
  for (const auto& t : terms) {
    const Jets j = factor_jets(t, x);
    for (int i = 0; i < dim; ++i) {
      h(i, i) += t.coeff * product(j, dim, i, 2);
      for (int k = i + 1; k < dim; ++k) {
        const double v = t.coeff * product(j, dim, i, 1, k, 1);
        h(i, k) += v;
        h(k, i) += v;
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Finite differences

double fd_first(const std::function<double(double)>& g, double x, double h, bool richardson) {
  auto d = [&](double s) { return (-g(x + 2 * s) + 8 * g(x + s) - 8 * g(x - s) + g(x - 2 * s)) / (12 * s); };
  const double coarse = d(h);
  if (!richardson) return coarse;
  return (16.0 * d(0.5 * h) - coarse) / 15.0;
}

double fd_second(const std::function<double(double)>& g, double x, double h, bool richardson) {
  const double g0 = g(x);
  auto d = [&](double s) {
    return (-g(x + 2 * s) + 16 * g(x + s) - 30 * g0 + 16 * g(x - s) - g(x - 2 * s)) / (12 * s * s);
  };
  const double coarse = d(h);
  if (!richardson) return coarse;
  return (16.0 * d(0.5 * h) - coarse) / 15.0;
}

namespace {

double local_step(double h, double xi) { return h * std::max(1.0, std::abs(xi)); }

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h, bool richardson) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec y = x;
    g[i] = fd_first(
        [&](double s) {
          y[i] = s;
          return f(y);
        },
        x[i], local_step(h, x[i]), richardson);
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(int dim, Fn f, std::string name)
    : dim_(dim), name_(std::move(name)), f_(std::move(f)), probe_center_(Vec::Zero(dim)) {
  if (dim < 1) throw ValidationError("field dimension must be >= 1");
  if (!f_) throw ValidationError("field needs an evaluation oracle");
}

ScalarField& ScalarField::with_gradient(GradFn g) {
  grad_ = std::move(g);
  return *this;
}

ScalarField& ScalarField::with_hessian(HessFn h) {
  hess_ = std::move(h);
  return *this;
}

ScalarField& ScalarField::with_probe_box(Vec center, double radius) {
  if (center.size() != dim_) throw ValidationError("probe box center has wrong dimension");
  probe_center_ = std::move(center);
  probe_radius_ = radius;
  return *this;
}

double ScalarField::operator()(const Vec& x) const {
  if (x.size() != dim_)
    throw ValidationError("point of dimension " + std::to_string(x.size()) + " for field of dimension " +
                          std::to_string(dim_));
  const double v = f_(x);
  if (!std::isfinite(v)) throw NumericError(name_ + " is not finite at " + format_point(x));
  return v;
}

Vec ScalarField::gradient(const Vec& x) const {
  if (grad_) {
    Vec g = grad_(x);
    if (!g.allFinite()) throw NumericError(name_ + ": gradient not finite at " + format_point(x));
    return g;
  }
  return fd_gradient([this](const Vec& y) { return (*this)(y); }, x, fd.h, fd.richardson);
}

Mat ScalarField::hessian(const Vec& x) const {
  if (hess_) {
    Mat h = hess_(x);
    if (!h.allFinite()) throw NumericError(name_ + ": Hessian not finite at " + format_point(x));
    return h;
  }
  Mat h(dim_, dim_);
  if (grad_) {
    for (int i = 0; i < dim_; ++i) {
      for (int k = 0; k < dim_; ++k) {
        Vec y = x;
        h(k, i) = fd_first(
            [&](double s) {
              y[i] = s;
              return grad_(y)[k];
            },
            x[i], local_step(fd.h_outer, x[i]), fd.richardson);
      }
    }
    return 0.5 * (h + h.transpose());
  }
  auto f = [this](const Vec& y) { return (*this)(y); };
  for (int i = 0; i < dim_; ++i) {
    Vec y = x;
    h(i, i) = fd_second(
        [&](double s) {
          y[i] = s;
          return f(y);
        },
        x[i], local_step(fd.h_outer, x[i]), fd.richardson);
    for (int k = i + 1; k < dim_; ++k) {
      auto mixed = [&](double s) {
        const double si = local_step(s, x[i]), sk = local_step(s, x[k]);
        auto at = [&](double a, double b) {
          Vec z = x;
          z[i] += a * si;
          z[k] += b * sk;
          return f(z);
        };
        return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * si * sk);
      };
      const double coarse = mixed(fd.h_outer);
      const double v = fd.richardson ? (4.0 * mixed(0.5 * fd.h_outer) - coarse) / 3.0 : coarse;
      h(i, k) = h(k, i) = v;
    }
  }
  return h;
}

ScalarField::Audit ScalarField::audit(int probes, std::uint64_t seed) const {
  Audit a;
  if (!grad_ && !hess_) return a;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto f = [this](const Vec& y) { return (*this)(y); };
  struct Probe {
    double grad_err, grad_mag, hess_err, hess_mag;
  };
  std::vector<Probe> out;
  double grad_scale = 0.0, hess_scale = 0.0;
  for (int n = 0; n < probes; ++n) {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = probe_center_[i] + probe_radius_ * u(rng);
    Probe p{0, 0, 0, 0};
    if (grad_) {
      const Vec g = grad_(x);
      const Vec ref = fd_gradient(f, x, 1e-3, true);
      p.grad_err = (g - ref).lpNorm<Eigen::Infinity>();
      p.grad_mag = g.lpNorm<Eigen::Infinity>();
      grad_scale = std::max(grad_scale, p.grad_mag);
    }
    if (hess_) {
      const Mat h = hess_(x);
      Mat ref(dim_, dim_);
      if (grad_) {
        for (int i = 0; i < dim_; ++i) {
          for (int k = 0; k < dim_; ++k) {
            Vec y = x;
            ref(k, i) = fd_first(
                [&](double s) {
                  y[i] = s;
                  return grad_(y)[k];
                },
                x[i], local_step(1e-3, x[i]), true);
          }
        }
      } else {
        ScalarField plain(dim_, f_, name_);
        ref = plain.hessian(x);
      }
      p.hess_err = (h - ref).lpNorm<Eigen::Infinity>();
      p.hess_mag = h.lpNorm<Eigen::Infinity>();
      hess_scale = std::max(hess_scale, p.hess_mag);
    }
    out.push_back(p);
  }
  for (const auto& p : out) {
    if (grad_) a.worst_gradient = std::max(a.worst_gradient, p.grad_err / std::max(p.grad_mag, 1e-3 * grad_scale + 1e-300));
    if (hess_) a.worst_hessian = std::max(a.worst_hessian, p.hess_err / std::max(p.hess_mag, 1e-3 * hess_scale + 1e-300));
  }
  a.probes = probes;
  a.pass = a.worst_gradient <= 1e-6 && a.worst_hessian <= 1e-6;
  return a;
}

ScalarField from_separable(SeparableSum s, std::string name) {
  for (const auto& t : s.terms)
    if (static_cast<int>(t.factors.size()) != s.dim) throw ValidationError("separable term has wrong arity");
  auto shared = std::make_shared<const SeparableSum>(s);
  ScalarField f(s.dim, [shared](const Vec& x) { return shared->value(x); }, std::move(name));
  f.with_gradient([shared](const Vec& x) { return shared->gradient(x); });
  f.with_hessian([shared](const Vec& x) { return shared->hessian(x); });
  f.separable_ = std::move(s);
  return f;
}

// ---------------------------------------------------------------------------
// Built-in families

namespace fields {

namespace {

ScalarField audited(ScalarField f) {
  const auto a = f.audit();
  if (!a.pass)
    throw InvariantViolation(f.name() + ": analytic derivatives disagree with finite differences (gradient " +
                             std::to_string(a.worst_gradient) + ", Hessian " + std::to_string(a.worst_hessian) + ")");
  return f;
}

Vec broadcast(const Vec& v, int dim, const char* what) {
  if (v.size() == dim) return v;
  if (v.size() == 1) return Vec::Constant(dim, v[0]);
  throw ValidationError(std::string(what) + " has " + std::to_string(v.size()) + " coordinates, expected " +
                        std::to_string(dim));
}

}  // namespace

ScalarField gaussian(int dim, double a, const Vec& center) {
  const Vec c = broadcast(center, dim, "gaussian center");
  SeparableSum s{dim, {}};
  SeparableTerm t;
  for (int i = 0; i < dim; ++i) t.factors.push_back(Factor1D::gaussian(a, c[i]));
  s.terms.push_back(t);
  std::ostringstream name;
  name << "gaussian(a=" << a << ",c=" << format_point(c) << ")";
  ScalarField f = from_separable(s, name.str());
  f.with_probe_box(c, 2.0 / std::sqrt(a));
  return audited(std::move(f));
}

ScalarField bump(int dim, double radius, const Vec& center) {
  const Vec c = broadcast(center, dim, "bump center");
  SeparableSum s{dim, {}};
  SeparableTerm t;
  for (int i = 0; i < dim; ++i) t.factors.push_back(Factor1D::bump(radius, c[i]));
  s.terms.push_back(t);
  std::ostringstream name;
  name << "bump(r=" << radius << ",c=" << format_point(c) << ")";
  ScalarField f = from_separable(s, name.str());
  f.with_probe_box(c, 0.8 * radius);
  return audited(std::move(f));
}

ScalarField polynomial(const Polynomial& p) {
  const int dim = std::max(1, p.dim());
  SeparableSum s{dim, {}};
  for (const auto& [exps, coeff] : p.terms()) {
    SeparableTerm t;
    t.coeff = coeff.get_d();
    for (int i = 0; i < dim; ++i) t.factors.push_back(Factor1D::monomial(exps[static_cast<std::size_t>(i)]));
    s.terms.push_back(t);
  }
  ScalarField f = from_separable(s, "poly(" + to_string(p) + ")");
  f.with_probe_box(Vec::Zero(dim), 1.5);
  f.smoothness = Smoothness::C4;
  return audited(std::move(f));
}

ScalarField dunkl_gaussian(const RootSystem& rs, double tau, const Vec& m) {
  if (!rs.is_orthogonal()) throw ValidationError("dunkl_gaussian needs a rank-one or z2d system");
  const int dim = rs.dim();
  const Vec c = broadcast(m, dim, "dunkl gaussian center");
  SeparableSum s{dim, {}};
  SeparableTerm t;
  for (int i = 0; i < dim; ++i) t.factors.push_back(Factor1D::dunkl_gauss(rs.kappa(static_cast<std::size_t>(i)), tau, c[i]));
  s.terms.push_back(t);
  std::ostringstream name;
  name << "dgauss(tau=" << tau << ",m=" << format_point(c) << ")";
  ScalarField f = from_separable(s, name.str());
  f.with_probe_box(c, 3.0 * std::sqrt(tau));
  return audited(std::move(f));
}

ScalarField constant(int dim, double c) {
  SeparableSum s{dim, {}};
  SeparableTerm t;
  t.coeff = c;
  t.factors.assign(static_cast<std::size_t>(dim), Factor1D::constant());
  s.terms.push_back(t);
  std::ostringstream name;
  name << "const(" << c << ")";
  return from_separable(s, name.str());
}

ScalarField mixture(const std::vector<std::pair<double, ScalarField>>& parts) {
  if (parts.empty()) throw ValidationError("mixture needs at least one part");
  const int dim = parts.front().second.dim();
  SeparableSum s{dim, {}};
  std::ostringstream name;
  Vec lo = Vec::Constant(dim, 1e300), hi = Vec::Constant(dim, -1e300);
  for (const auto& [w, f] : parts) {
    if (f.dim() != dim) throw ValidationError("mixture parts differ in dimension");
    if (!f.separable()) throw ValidationError("mixture parts must be separable: " + f.name());
    for (auto t : f.separable()->terms) {
      t.coeff *= w;
      s.terms.push_back(std::move(t));
    }
    if (name.tellp() > 0) name << " + ";
    name << w << "*" << f.name();
    lo = lo.cwiseMin((f.probe_center().array() - f.probe_radius()).matrix());
    hi = hi.cwiseMax((f.probe_center().array() + f.probe_radius()).matrix());
  }
  ScalarField f = from_separable(s, name.str());
  f.with_probe_box(0.5 * (lo + hi), 0.5 * (hi - lo).maxCoeff());
  return audited(std::move(f));
}

namespace {

Vec parse_vec(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in field spec");
    }
  }
  if (v.empty()) throw ValidationError("empty value in field spec");
  return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ScalarField parse(const std::string& spec, const RootSystem& rs) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const int dim = rs.dim();
  if (family == "poly") return polynomial(parse_polynomial(rest, dim));
  if (family == "const") return constant(dim, rest.empty() ? 1.0 : parse_vec(rest)[0]);

  std::map<std::string, Vec> kv;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key=value in field spec, got '" + item + "'");
    kv[item.substr(0, eq)] = parse_vec(item.substr(eq + 1));
  }
  auto take = [&](const std::string& key, Vec fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    Vec v = it->second;
    kv.erase(it);
    return v;
  };
  auto finish = [&](ScalarField f) {
    if (!kv.empty()) throw ValidationError("unknown parameter '" + kv.begin()->first + "' for " + family);
    return f;
  };
  if (family == "gaussian") {
    const double a = take("a", Vec::Constant(1, 1.0))[0];
    return finish(gaussian(dim, a, take("c", Vec::Zero(1))));
  }
  if (family == "bump") {
    const double r = take("r", Vec::Constant(1, 1.0))[0];
    return finish(bump(dim, r, take("c", Vec::Zero(1))));
  }
  if (family == "dgauss") {
    const double tau = take("tau", Vec::Constant(1, 0.5))[0];
    return finish(dunkl_gaussian(rs, tau, take("m", Vec::Zero(1))));
  }
  throw ValidationError("unknown field family '" + family + "' (gaussian, bump, poly, dgauss, const)");
}

}  // namespace fields

// ---------------------------------------------------------------------------
// Jets

Jet& Jet::axpy(double s, const Jet& o) {
  value += s * o.value;
  grad += s * o.grad;
  for (std::size_t i = 0; i < reflected.size(); ++i) reflected[i] += s * o.reflected[i];
  if (curvature.size() == o.curvature.size())
    for (std::size_t i = 0; i < curvature.size(); ++i) curvature[i] += s * o.curvature[i];
  else
    curvature.clear();
  return *this;
}

Jet make_jet(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  Jet j;
  j.value = f(x);
  j.grad = f.gradient(x);
  j.reflected.resize(rs.size());
  bool near = false;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    j.reflected[a] = f(rs.reflect(a, x));
    near = near || std::abs(rs.pairing(a, x)) < kHyperplaneEps;
  }
  if (near) {
    const Mat h = f.hessian(x);
    j.curvature.resize(rs.size());
    for (std::size_t a = 0; a < rs.size(); ++a) j.curvature[a] = rs.root(a).dot(h * rs.root(a));
  }
  return j;
}

double reflection_quotient(const Jet& j, std::size_t a, const Vec& x, const RootSystem& rs) {
  const double p = rs.pairing(a, x);
  if (std::abs(p) >= kHyperplaneEps) return (j.value - j.reflected[a]) / p;
  double q = rs.root(a).dot(j.grad);
  if (!j.curvature.empty()) q -= 0.5 * p * j.curvature[a];
  return q;
}

double gamma_jet(const Jet& f, const Jet& g, const Vec& x, const RootSystem& rs) {
  double s = f.grad.dot(g.grad);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    s += rs.kappa(a) * reflection_quotient(f, a, x, rs) * reflection_quotient(g, a, x, rs);
  }
  return s;
}

double grad_sq_jet(const Jet& f) { return f.grad.squaredNorm(); }

double dunkl_grad_sq_jet(const Jet& f, const Vec& x, const RootSystem& rs) {
  Vec v = f.grad;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    v += rs.kappa(a) * reflection_quotient(f, a, x, rs) * rs.root(a);
  }
  return v.squaredNorm();
}

void validate(const GpParams& params) {
  if (!(params.p > 1.0 && params.p <= 2.0))
    throw ValidationError("G_p needs 1 < p <= 2, got p = " + std::to_string(params.p));
  if (params.nodes < 8) throw ValidationError("G_p quadrature needs at least 8 nodes");
}

namespace {

void require_positive(const Jet& f, const Vec& x, const RootSystem& rs) {
  if (!(f.value > 0.0)) throw DomainError("G_p needs f > 0, f = " + std::to_string(f.value) + " at " + format_point(x));
  for (std::size_t a = 0; a < rs.size(); ++a)
    if (!(f.reflected[a] > 0.0))
      throw DomainError("G_p needs f > 0 on the orbit, f = " + std::to_string(f.reflected[a]) + " at " +
                        format_point(rs.reflect(a, x)));
}

// int_0^1 (1-s) (u / ((1-s) u + s v))^(2-p) ds by Gauss-Legendre, graded
// towards the endpoint carrying the smaller value.
double gp_weight_integral(double u, double v, double p, int nodes) {
  const double ratio = std::min(u, v) / std::max(u, v);
  std::vector<double> cuts{0.0};
  if (ratio < 0.25) {
    for (double c = ratio; c < 0.5; c *= 4.0) cuts.push_back(c);
  }
  cuts.push_back(1.0);
  const bool towards_one = v < u;  // small denominator near s = 1
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = cuts[k], b = cuts[k + 1];
    if (towards_one) {
      a = 1.0 - cuts[k + 1];
      b = 1.0 - cuts[k];
    }
    const Rule r = gauss_legendre(nodes, a, b);
    for (std::size_t n = 0; n < r.size(); ++n) {
      const double s = r.x[n];
      const double den = (1.0 - s) * u + s * v;
      sum += r.w[n] * (1.0 - s) * std::pow(u / den, 2.0 - p);
    }
  }
  return sum;
}

// sum_{k>=2} binom(p,k) (-d)^k q^(k-2) f^(2-k), i.e.
// [p f (f - g) - f^(2-p) (f^p - g^p)] / q^2 with g = f - q d.
double gp_difference(double f, double g, double d, double q, double p) {
  const double e = (g - f) / f;
  if (std::abs(e) < 0.1) {
    double binom = p * (p - 1.0) / 2.0;
    double pw = d * d;  // (-d)^k q^(k-2) f^(2-k) at k = 2
    double s = binom * pw;
    for (int k = 3; k < 60; ++k) {
      binom *= (p - (k - 1)) / k;
      pw *= -d * q / f;
      const double term = binom * pw;
      s += term;
      if (std::abs(term) <= 1e-18 * std::abs(s)) break;
    }
    return s;
  }
  return (p * f * (f - g) - std::pow(f, 2.0 - p) * (std::pow(f, p) - std::pow(g, p))) / (q * q);
}

}  // namespace

double gp_integral_jet(const Jet& f, const Vec& x, const GpParams& params, const RootSystem& rs) {
  validate(params);
  require_positive(f, x, rs);
  const double p = params.p;
  double s = (p - 1.0) * f.grad.squaredNorm();
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    const double fr = f.reflected[a];
    if (!(std::abs(f.value - fr) > 1e-14 * (1.0 + std::abs(f.value)))) continue;
    const double d = reflection_quotient(f, a, x, rs);
    const double w = gp_weight_integral(f.value, fr, p, params.nodes);
    const double w2 = gp_weight_integral(f.value, fr, p, 2 * params.nodes);
    if (std::abs(w - w2) > 1e-8 * std::abs(w2))
      throw ResolutionError("G_p weight integral: node doubling changed the value by " + std::to_string(std::abs(w - w2)) +
                            " at " + format_point(x));
    s += 2.0 * (p - 1.0) * rs.kappa(a) * d * d * w2;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Operators

double gamma_num(const ScalarField& f, const ScalarField& g, const Vec& x, const RootSystem& rs) {
  return gamma_jet(make_jet(f, x, rs), make_jet(g, x, rs), x, rs);
}

double gamma_num(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  const Jet j = make_jet(f, x, rs);
  return gamma_jet(j, j, x, rs);
}

double dunkl_grad_sq(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  return dunkl_grad_sq_jet(make_jet(f, x, rs), x, rs);
}

double grad_sq(const ScalarField& f, const Vec& x) { return f.gradient(x).squaredNorm(); }

double dunkl_laplacian_num(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  const Mat h = f.hessian(x);
  const Vec g = f.gradient(x);
  const double v = f(x);
  double s = h.trace();
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    const Vec& al = rs.root(a);
    const double p = rs.pairing(a, x);
    if (std::abs(p) < kHyperplaneEps) {
      s += rs.kappa(a) * al.dot(h * al);
    } else {
      s += 2.0 * rs.kappa(a) * (al.dot(g) / p - (v - f(rs.reflect(a, x))) / (p * p));
    }
  }
  return s;
}

double gamma2_explicit_rank1(const ScalarField& f, double x, double kappa) {
  if (std::abs(x) < kHyperplaneEps)
    throw SingularityError("rank-one Gamma_2 closed form needs |x| >= 1e-6; use the limit route at " + std::to_string(x));
  if (f.dim() != 1) throw ValidationError("rank-one Gamma_2 needs a one-dimensional field");
  Vec p(1), m(1);
  p[0] = x;
  m[0] = -x;
  const double fp = f(p), fm = f(m);
  const double d1 = f.gradient(p)[0], d1m = f.gradient(m)[0];
  const double d2 = f.hessian(p)(0, 0);
  const double q = (fp - fm) / x;
  const double b1 = (d1 + d1m - q) / x;
  const double b2 = (2.0 * d1 - q) / x;
  return d2 * d2 + kappa * b1 * b1 + 0.5 * kappa * b2 * b2;
}

Gamma2Split gamma2_explicit_z2d(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  if (!rs.is_orthogonal()) throw ValidationError("explicit Gamma_2 decomposition needs orthogonal roots");
  const std::size_t m = rs.size();
  std::vector<double> pair(m);
  for (std::size_t a = 0; a < m; ++a) {
    pair[a] = rs.pairing(a, x);
    if (std::abs(pair[a]) < kHyperplaneEps)
      throw SingularityError("explicit Gamma_2 needs points off the hyperplanes, got " + format_point(x));
  }
  Gamma2Split out;
  const Mat h = f.hessian(x);
  out.hess_sq = h.squaredNorm();
  const double v = f(x);
  const Vec g = f.gradient(x);
  std::vector<double> fr(m);
  for (std::size_t a = 0; a < m; ++a) {
    if (rs.kappa(a) == 0.0) continue;
    const Vec& al = rs.root(a);
    const Vec y = rs.reflect(a, x);
    fr[a] = f(y);
    const Vec gy = f.gradient(y);
    const double d = (v - fr[a]) / pair[a];
    const Vec diff_grad = g - gy + gy.dot(al) * al;
    const double t1 = (d * al - diff_grad).squaredNorm();
    const double t2 = g.dot(al) - d;
    out.a_term += 2.0 * rs.kappa(a) / (pair[a] * pair[a]) * (t1 + t2 * t2);
  }
  for (std::size_t a = 0; a < m; ++a) {
    if (rs.kappa(a) == 0.0) continue;
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a || rs.kappa(b) == 0.0) continue;
      const double fab = f(rs.reflect(b, rs.reflect(a, x)));
      const double c = (v - fr[a] - fr[b] + fab) / (pair[a] * pair[b]);
      out.b2_term += rs.kappa(a) * rs.kappa(b) * c * c;
    }
  }
  out.total = out.hess_sq + out.a_term + out.b2_term;
  return out;
}

namespace {

// Laplacian of a scalar function known only through evaluations.
double fd_laplacian(const std::function<double(const Vec&)>& g, const Vec& x, double h) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec y = x;
    s += fd_second(
        [&](double t) {
          y[i] = t;
          return g(y);
        },
        x[i], local_step(h, x[i]), true);
  }
  return s;
}

}  // namespace

double gamma2_definition(const ScalarField& f, const Vec& x, const RootSystem& rs) {
  const double h = f.fd.h_outer;
  auto G = [&](const Vec& y) { return gamma_num(f, y, rs); };
  auto L = [&](const Vec& y) { return dunkl_laplacian_num(f, y, rs); };

  // Delta_k Gamma(f)
  const double gx = G(x);
  const Vec grad_g = fd_gradient(G, x, h, true);
  double lap_g = fd_laplacian(G, x, h);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    const double p = rs.pairing(a, x);
    if (std::abs(p) < kHyperplaneEps)
      throw SingularityError("Gamma_2 definition route needs points off the hyperplanes, got " + format_point(x));
    lap_g += 2.0 * rs.kappa(a) * (rs.root(a).dot(grad_g) / p - (gx - G(rs.reflect(a, x))) / (p * p));
  }

  // Gamma(Delta_k f, f)
  Jet lj;
  lj.value = L(x);
  lj.grad = fd_gradient(L, x, h, true);
  lj.reflected.resize(rs.size());
  for (std::size_t a = 0; a < rs.size(); ++a) lj.reflected[a] = L(rs.reflect(a, x));
  const double cross = gamma_jet(lj, make_jet(f, x, rs), x, rs);
  return 0.5 * lap_g - cross;
}

double gp_definition(const ScalarField& f, const Vec& x, const GpParams& params, const RootSystem& rs) {
  return gp_definition_jet(make_jet(f, x, rs), x, params, rs);
}

double gp_definition_jet(const Jet& j, const Vec& x, const GpParams& params, const RootSystem& rs) {
  validate(params);
  require_positive(j, x, rs);
  // Chain rule on f^p: the local part collapses to (p-1)|grad f|^2, the
  // <alpha, grad> pieces cancel, only reflection differences remain.
  const double p = params.p;
  double s = (p - 1.0) * j.grad.squaredNorm();
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    const double q = rs.pairing(a, x);
    const double d = reflection_quotient(j, a, x, rs);
    s += 2.0 * rs.kappa(a) / p * gp_difference(j.value, j.reflected[a], d, q, p);
  }
  if (s < -1e-8 * (1.0 + std::abs(s)))
    throw InvariantViolation("G_p negative (" + std::to_string(s) + ") at " + format_point(x));
  return s;
}

double gp_integral(const ScalarField& f, const Vec& x, const GpParams& params, const RootSystem& rs) {
  return gp_integral_jet(make_jet(f, x, rs), x, params, rs);
}

GpComparison check_gp_comparison(const ScalarField& f, const Vec& x, double p, const RootSystem& rs) {
  GpComparison c;
  GpParams params;
  params.p = p;
  c.gamma = gamma_num(f, x, rs);
  c.gp = gp_integral(f, x, params, rs);
  c.lower_lhs = c.gamma;
  c.lower_rhs = c.gp / (p - 1.0);
  double orbit = c.gp;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    c.orbit_gp.push_back(gp_integral(f, rs.reflect(a, x), params, rs));
    orbit += c.orbit_gp.back();
  }
  c.upper_lhs = c.gamma;
  c.upper_rhs = orbit / (p - 1.0);
  const double slack = 1e-8 * (1.0 + std::abs(c.gamma));
  c.pass_lower = c.lower_lhs >= c.lower_rhs - slack && c.lower_rhs >= -slack;
  c.pass_upper = c.upper_lhs <= c.upper_rhs + slack;
  c.pass = c.pass_lower && c.pass_upper;
  return c;
}

}  // namespace dunkl
