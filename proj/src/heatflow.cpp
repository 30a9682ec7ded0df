#include "dunkl/heatflow.hpp"

#include "dunkl/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace dunkl {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Hints {
  double reach = kInf;
  double scale = kInf;
  std::vector<double> breaks;
};

// Where phi evolved for time s is negligible and how fine its features are.
Hints factor_hints(const Factor1D& phi, double s) {
  Hints h;
  switch (phi.kind) {
    case Factor1D::Kind::Constant:
    case Factor1D::Kind::Power:
      break;
    case Factor1D::Kind::Gaussian: {
      const double T = 0.25 / phi.a + s;
      h.reach = std::abs(phi.c) + std::sqrt(160.0 * T);
      h.scale = std::sqrt(2.0 * T);
      break;
    }
    case Factor1D::Kind::Bump: {
      const double r = phi.a;
      if (s == 0.0) {
        h.reach = std::abs(phi.c) + r;
        h.scale = r / 6.0;
        h.breaks = {phi.c - r, phi.c + r};
      } else {
        h.reach = std::abs(phi.c) + r + std::sqrt(160.0 * s);
        h.scale = std::sqrt(r * r / 36.0 + 2.0 * s);
      }
      break;
    }
    case Factor1D::Kind::DunklGauss: {
      const double T = phi.tau + s;
      h.reach = std::abs(phi.m) + std::sqrt(160.0 * T);
      h.scale = std::sqrt(2.0 * T);
      break;
    }
  }
  return h;
}

void merge(Hints& into, const Hints& h) {
  into.reach = std::max(into.reach, h.reach);
  into.scale = std::min(into.scale, h.scale);
  into.breaks.insert(into.breaks.end(), h.breaks.begin(), h.breaks.end());
}

// H_t x^n = sum_k t^k/k! Delta^k x^n, Delta x^m = c_m x^(m-2).
std::array<double, 3> evolve_power(int n, double kappa, double t, double x) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  double coef = 1.0;
  for (int k = 0; 2 * k <= n; ++k) {
    const int m = n - 2 * k;
    out[0] += coef * std::pow(x, m);
    if (m >= 1) out[1] += coef * m * std::pow(x, m - 1);
    if (m >= 2) out[2] += coef * m * (m - 1) * std::pow(x, m - 2);
    const double cm = m * (m - 1.0) + 2.0 * kappa * m - (m % 2 == 1 ? 2.0 * kappa : 0.0);
    coef *= cm * t / (k + 1);
  }
  return out;
}

struct QuadEvolve {
  std::array<double, 3> at;
  double mirrored = 0.0;  // value of H_t phi at -x
};

QuadEvolve evolve_by_rule(const Factor1D& phi, double kappa, double t, double x, const KernelRuleSpec& spec) {
  const Hints h = factor_hints(phi, 0.0);
  const KernelRule r = kernel_rule(kappa, t, x, h.reach, h.scale, h.breaks, 2, spec);
  QuadEvolve q{{0.0, 0.0, 0.0}, 0.0};
  const std::size_t n = r.y.size();
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = phi.value(r.y[k]);
  for (std::size_t k = 0; k < n; ++k) {
    q.at[0] += r.w0[k] * v[k];
    q.at[1] += r.w1[k] * v[k];
    q.at[2] += r.w2[k] * v[k];
    q.mirrored += r.w0[k] * v[n - 1 - k];
  }
  return q;
}

bool closed_form(const Factor1D& phi, double kappa) {
  switch (phi.kind) {
    case Factor1D::Kind::Constant:
    case Factor1D::Kind::Power:
      return true;
    case Factor1D::Kind::Gaussian:
      return phi.c == 0.0;
    case Factor1D::Kind::DunklGauss:
      return phi.kappa == kappa;
    case Factor1D::Kind::Bump:
      return false;
  }
  return false;
}

std::array<double, 3> evolve_closed(const Factor1D& phi, double kappa, double t, double x) {
  switch (phi.kind) {
    case Factor1D::Kind::Constant:
      return {1.0, 0.0, 0.0};
    case Factor1D::Kind::Power:
      return evolve_power(phi.power, kappa, t, x);
    case Factor1D::Kind::Gaussian: {
      // exp(-a y^2) is a multiple of h(tau0, y, 0), tau0 = 1/4a.
      const double tau0 = 0.25 / phi.a, T = tau0 + t;
      const double v = std::pow(tau0 / T, kappa + 0.5) * std::exp(-x * x / (4.0 * T));
      return {v, -x / (2.0 * T) * v, (x * x / (4.0 * T * T) - 1.0 / (2.0 * T)) * v};
    }
    case Factor1D::Kind::DunklGauss: {
      const KernelJet j = rank_one_kernel(kappa, phi.tau + t, x, phi.m, 2);
      return {j.value, j.dx, j.dxx};
    }
    case Factor1D::Kind::Bump:
      break;
  }
  throw InvariantViolation("evolve_closed called on a quadrature factor");
}

// Value and jet of H_t phi at +x and the value at -x.
QuadEvolve evolve_pm(const Factor1D& phi, double kappa, double t, double x, const KernelRuleSpec& spec) {
  if (t == 0.0) return {phi.jet(x), phi.value(-x)};
  if (closed_form(phi, kappa)) return {evolve_closed(phi, kappa, t, x), evolve_closed(phi, kappa, t, -x)[0]};
  return evolve_by_rule(phi, kappa, t, x, spec);
}

double mass_of(double kappa, double t, double x) {
  const double reach = std::abs(x) + 40.0 * std::sqrt(t);
  auto g = [&](double y) { return rank_one_kernel_value(kappa, t, x, y) * std::pow(2.0 * y * y, kappa); };
  return adaptive_integral(g, {-reach, 0.0, reach}, 1e-13, 1e-11);
}

HeatKernel1D::Calibration calibrate(double kappa) {
  static std::mutex mu;
  static std::map<double, HeatKernel1D::Calibration> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(kappa);
    if (it != cache.end()) return it->second;
  }
  HeatKernel1D::Calibration c;
  for (double t : {0.1, 1.0, 10.0})
    for (double x : {0.1, 1.0, 5.0}) c.mass_error = std::max(c.mass_error, std::abs(mass_of(kappa, t, x) - 1.0));
  for (double t : {0.05, 1.0, 10.0})
    for (double x : {-2.0, 0.0, 0.7})
      for (double y : {-1.1, 0.3, 4.0}) {
        const double g = std::exp(-(x - y) * (x - y) / (4 * t)) / std::sqrt(4 * M_PI * t);
        c.gaussian_error = std::max(c.gaussian_error, std::abs(rank_one_kernel_value(0.0, t, x, y) - g));
        const double a = rank_one_kernel_value(kappa, t, x, y), b = rank_one_kernel_value(kappa, t, y, x);
        if (a > 0.0) c.symmetry_error = std::max(c.symmetry_error, std::abs(a - b) / a);
      }
  c.pass = c.mass_error <= 1e-6 && c.gaussian_error <= 1e-12 && c.symmetry_error <= 1e-10;
  std::lock_guard lock(mu);
  cache[kappa] = c;
  return c;
}

}  // namespace

Profile1D profile(const Factor1D& phi) {
  const Hints h = factor_hints(phi, 0.0);
  return {[phi](double y) { return phi.value(y); }, h.reach, h.scale, h.breaks};
}

// ---------------------------------------------------------------------------
// Kernels

HeatKernel1D::HeatKernel1D(double kappa) : kappa_(kappa) {
  if (!(kappa >= 0.0)) throw ValidationError("heat kernel needs kappa >= 0");
  cal_ = calibrate(kappa);
  if (!cal_.pass)
    throw InvariantViolation("heat kernel calibration failed at kappa = " + std::to_string(kappa) + ": mass error " +
                             std::to_string(cal_.mass_error) + ", gaussian error " + std::to_string(cal_.gaussian_error));
}

double HeatKernel1D::operator()(double t, double x, double y) const { return rank_one_kernel_value(kappa_, t, x, y); }

ProductKernel::ProductKernel(const RootSystem& rs) {
  if (!rs.is_orthogonal()) throw ValidationError("product heat kernel needs a rank-one or z2d system");
  for (int i = 0; i < rs.dim(); ++i) factors_.emplace_back(rs.kappa(static_cast<std::size_t>(i)));
}

double ProductKernel::operator()(double t, const Vec& x, const Vec& y) const {
  double p = 1.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    p *= factors_[i](t, x[k], y[k]);
  }
  return p;
}

KernelRule kernel_rule(double kappa, double t, double x, double reach, double scale, const std::vector<double>& breaks,
                       int order, const KernelRuleSpec& spec) {
  if (!(t > 0.0)) throw ValidationError("kernel rule needs t > 0");
  const double sigma = std::sqrt(t), X = std::abs(x);
  const double lo = std::max(0.0, X - spec.sigmas * sigma);
  const double hi = std::min(reach, X + spec.sigmas * sigma);
  KernelRule out;
  if (!(hi > lo)) return out;
  std::vector<double> cuts{lo, hi};
  for (double b : breaks)
    if (std::abs(b) > lo && std::abs(b) < hi) cuts.push_back(std::abs(b));
  if (X > lo && X < hi) cuts.push_back(X);
  std::sort(cuts.begin(), cuts.end());
  // near-equal cuts (|x| on a support edge) would leave a sliver panel
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a <= 1e-12 * (1.0 + b); }),
             cuts.end());
  if (cuts.back() < hi) cuts.back() = hi;
  const double width = std::min(scale, spec.panel_sigmas * sigma);

  std::vector<double> ys, ws;
  const double two_k = std::pow(2.0, kappa);
  int panels = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const int np = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-9)));
    panels += np;
    if (panels > 2000) throw ResolutionError("kernel rule needs more than 2000 panels; feature scale too small");
    const double h = (b - a) / np;
    for (int p = 0; p < np; ++p) {
      const double pa = a + p * h, pb = pa + h;
      if (pa == 0.0 && kappa > 0.0) {
        const Rule r = gauss_jacobi(spec.nodes_per_panel, pa, pb, 0.0, 2.0 * kappa);
        for (std::size_t k = 0; k < r.size(); ++k) {
          ys.push_back(r.x[k]);
          ws.push_back(r.w[k] * two_k);
        }
      } else {
        const Rule r = gauss_legendre(spec.nodes_per_panel, pa, pb);
        for (std::size_t k = 0; k < r.size(); ++k) {
          ys.push_back(r.x[k]);
          ws.push_back(r.w[k] * two_k * std::pow(r.x[k], 2.0 * kappa));
        }
      }
    }
  }
  const std::size_t n = ys.size();
  out.y.resize(2 * n);
  out.w0.resize(2 * n);
  if (order >= 1) out.w1.resize(2 * n);
  if (order >= 2) out.w2.resize(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (int side = 0; side < 2; ++side) {
      const std::size_t idx = side == 0 ? n - 1 - k : n + k;
      const double y = side == 0 ? -ys[k] : ys[k];
      const KernelJet j = rank_one_kernel(kappa, t, x, y, order);
      out.y[idx] = y;
      out.w0[idx] = ws[k] * j.value;
      if (order >= 1) out.w1[idx] = ws[k] * j.dx;
      if (order >= 2) out.w2[idx] = ws[k] * j.dxx;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time integration

TimeIntegral integrate_time(const std::function<void(double, std::vector<double>&)>& integrand, std::size_t n,
                            const TimeSchedule& sch) {
  if (!(sch.t_first > 0.0) || !(sch.growth > 1.0) || sch.nodes < 1)
    throw ValidationError("time schedule needs t_first > 0, growth > 1, nodes >= 1");
  const Rule unit = gauss_legendre(sch.nodes, 0.0, 1.0);
  TimeIntegral out;
  out.value.assign(n, 0.0);
  out.tail.assign(n, 0.0);
  std::vector<double> buf(n), cur(n), prev(n, -1.0), ratio(n, -1.0), prev_ratio(n, -1.0);
  const bool finite = std::isfinite(sch.horizon);
  double a = 0.0, b = std::min(sch.t_first, finite ? sch.horizon : kInf);

  auto tail_ok = [&](std::size_t c) {
    if (cur[c] == 0.0 && prev[c] == 0.0) return true;
    if (!(prev[c] > 0.0) || !(cur[c] < prev[c])) return false;
    const double r = ratio[c];
    if (prev_ratio[c] < 0.0 || std::abs(r - prev_ratio[c]) > 0.05) return false;
    return cur[c] * r / (1.0 - r) <= sch.tail_fraction * out.value[c];
  };

  for (int seg = 0; seg < sch.max_segments; ++seg) {
    std::fill(cur.begin(), cur.end(), 0.0);
    const double len = b - a;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      const double t = a + len * unit.x[k];
      std::fill(buf.begin(), buf.end(), 0.0);
      integrand(t, buf);
      for (std::size_t c = 0; c < n; ++c) {
        if (!(buf[c] >= -1e-12))
          throw InvariantViolation("square-function integrand " + std::to_string(buf[c]) + " < 0 at t = " +
                                   std::to_string(t));
        cur[c] += unit.w[k] * len * buf[c];
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      out.value[c] += cur[c];
      prev_ratio[c] = ratio[c];
      ratio[c] = prev[c] > 0.0 ? cur[c] / prev[c] : -1.0;
    }
    out.segments = seg + 1;
    out.t_end = b;
    if (finite && b >= sch.horizon) return out;
    if (seg >= 3) {
      bool all = true;
      for (std::size_t c = 0; c < n && all; ++c) all = tail_ok(c);
      if (all) {
        for (std::size_t c = 0; c < n; ++c) {
          if (cur[c] > 0.0) out.tail[c] = cur[c] * ratio[c] / (1.0 - ratio[c]);
          out.value[c] += out.tail[c];
        }
        return out;
      }
    }
    prev = cur;
    a = b;
    b = finite ? std::min(b * sch.growth, sch.horizon) : b * sch.growth;
  }
  out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------
// Grids

std::size_t SpatialGrid::size() const {
  std::size_t n = 1;
  for (const auto& r : axes) n *= r.size();
  return n;
}

std::vector<std::size_t> SpatialGrid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& r : axes) s.push_back(r.size());
  return s;
}

void SpatialGrid::point(std::size_t index, Vec& x) const {
  x.resize(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    const auto& r = axes[static_cast<std::size_t>(i)];
    x[i] = r.x[index % r.size()];
    index /= r.size();
  }
}

double SpatialGrid::weight(std::size_t index) const {
  double w = 1.0;
  for (int i = dim() - 1; i >= 0; --i) {
    const auto& r = axes[static_cast<std::size_t>(i)];
    w *= r.w[index % r.size()];
    index /= r.size();
  }
  return w;
}

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  g.panels *= 2;
  g.tail_nodes *= 2;
  return g;
}

SpatialGrid make_grid(const RootSystem& rs, const GridSpec& spec) {
  if (!rs.is_orthogonal()) throw ValidationError("tensor grids need a rank-one or z2d system");
  SpatialGrid g;
  for (int i = 0; i < rs.dim(); ++i) {
    HalfLineSpec h;
    h.kappa = rs.kappa(static_cast<std::size_t>(i));
    h.radius = spec.radius;
    h.panels = spec.panels;
    h.nodes = spec.nodes;
    h.tail_nodes = spec.tail_nodes;
    h.tail_decay = spec.tail_decay;
    g.axes.push_back(full_line_rule(h));
  }
  return g;
}

SpatialGrid make_grid_for_power(const RootSystem& rs, GridSpec spec, double p, double decay_rate) {
  SpatialGrid g = make_grid(rs, spec);
  for (int i = 0; i < rs.dim(); ++i) {
    HalfLineSpec h;
    h.kappa = rs.kappa(static_cast<std::size_t>(i));
    h.radius = spec.radius;
    h.panels = spec.panels;
    h.nodes = spec.nodes;
    h.tail_nodes = spec.tail_nodes;
    h.tail_decay = p * decay_rate - 2.0 * h.kappa;
    g.axes[static_cast<std::size_t>(i)] = full_line_rule(h);
  }
  return g;
}

double lp_norm(const std::vector<double>& values, double p, const SpatialGrid& grid) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("lp_norm needs 1 <= p < inf");
  if (values.size() != grid.size()) throw ValidationError("lp_norm: value count does not match the grid");
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += grid.weight(k) * std::pow(std::abs(values[k]), p);
  return std::pow(s, 1.0 / p);
}

std::string to_string(SquareMode m) {
  switch (m) {
    case SquareMode::Gamma: return "gamma";
    case SquareMode::DunklGrad: return "dunkl_grad";
    case SquareMode::Grad: return "grad";
    case SquareMode::Gp: return "g_p";
    case SquareMode::PoissonGamma: return "poisson_gamma";
    case SquareMode::TildeT: return "tilde_T";
  }
  return "?";
}

SquareMode parse_square_mode(const std::string& s) {
  for (SquareMode m : {SquareMode::Gamma, SquareMode::DunklGrad, SquareMode::Grad, SquareMode::Gp,
                       SquareMode::PoissonGamma, SquareMode::TildeT})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown square-function mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// HeatEngine

HeatEngine::HeatEngine(RootSystem rs, HeatOptions options)
    : rs_(std::move(rs)), opt_(options), kernel_(rs_), laguerre_(gauss_laguerre(48, -0.5)) {}

const SeparableSum& HeatEngine::separable(const ScalarField& f) const {
  if (!f.separable())
    throw ValidationError("heat flow quadrature needs a built-in separable field; '" + f.name() +
                          "' has none (use the Monte Carlo path)");
  if (f.dim() != rs_.dim()) throw ValidationError("field and root system dimensions differ");
  return *f.separable();
}

double HeatEngine::time_scale(const ScalarField& f) {
  double tau = kInf;
  if (f.separable())
    for (const auto& t : f.separable()->terms)
      for (const auto& phi : t.factors) {
        const Hints h = factor_hints(phi, 0.0);
        if (std::isfinite(h.scale)) tau = std::min(tau, h.scale * h.scale);
      }
  return std::isfinite(tau) ? tau : 1.0;
}

std::array<double, 3> HeatEngine::evolve(const Factor1D& phi, int axis, double t, double x) const {
  if (t < 0.0) throw ValidationError("heat flow needs t >= 0");
  return evolve_pm(phi, rs_.kappa(static_cast<std::size_t>(axis)), t, x, opt_.rule).at;
}

double HeatEngine::apply(const ScalarField& f, double t, const Vec& x) const {
  const SeparableSum& s = separable(f);
  double v = 0.0;
  for (const auto& term : s.terms) {
    double p = term.coeff;
    for (int i = 0; i < s.dim && p != 0.0; ++i) p *= evolve(term.factors[static_cast<std::size_t>(i)], i, t, x[i])[0];
    v += p;
  }
  return v;
}

Jet HeatEngine::jet(const ScalarField& f, double t, const Vec& x) const {
  if (t < 0.0) throw ValidationError("heat flow needs t >= 0");
  const SeparableSum& s = separable(f);
  const int d = s.dim;
  Jet j;
  j.grad = Vec::Zero(d);
  j.reflected.assign(static_cast<std::size_t>(d), 0.0);
  bool near = false;
  for (int i = 0; i < d; ++i) near = near || std::abs(rs_.pairing(static_cast<std::size_t>(i), x)) < kHyperplaneEps;
  if (near) j.curvature.assign(static_cast<std::size_t>(d), 0.0);
  std::vector<QuadEvolve> e(static_cast<std::size_t>(d));
  for (const auto& term : s.terms) {
    for (int i = 0; i < d; ++i)
      e[static_cast<std::size_t>(i)] =
          evolve_pm(term.factors[static_cast<std::size_t>(i)], rs_.kappa(static_cast<std::size_t>(i)), t, x[i], opt_.rule);
    auto others = [&](int skip) {
      double p = term.coeff;
      for (int l = 0; l < d; ++l)
        if (l != skip) p *= e[static_cast<std::size_t>(l)].at[0];
      return p;
    };
    j.value += others(-1);
    for (int i = 0; i < d; ++i) {
      const auto& ei = e[static_cast<std::size_t>(i)];
      const double rest = others(i);
      j.grad[i] += rest * ei.at[1];
      j.reflected[static_cast<std::size_t>(i)] += rest * ei.mirrored;
      if (near) j.curvature[static_cast<std::size_t>(i)] += 2.0 * rest * ei.at[2];
    }
  }
  return j;
}

double HeatEngine::heat_of_gamma(const ScalarField& f, double s, double t, const Vec& x) const {
  if (s < 0.0 || t < 0.0) throw ValidationError("heat flow needs nonnegative times");
  if (t == 0.0) {
    const Jet j = jet(f, s, x);
    return gamma_jet(j, j, x, rs_);
  }
  const SeparableSum& S = separable(f);
  const int d = S.dim;
  const std::size_t K = S.terms.size();
  // Per axis: pair integrals of values, derivatives and half squared quotients.
  std::vector<Mat> P0(static_cast<std::size_t>(d)), P1(static_cast<std::size_t>(d)), PD(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double kappa = rs_.kappa(iu);
    Hints h;
    h.reach = 0.0;
    for (const auto& term : S.terms) merge(h, factor_hints(term.factors[iu], s));
    const KernelRule r = kernel_rule(kappa, t, x[i], h.reach, h.scale, h.breaks, 0, opt_.rule);
    const std::size_t n = r.y.size();
    Mat V(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n)), D(V.rows(), V.cols()), Q(V.rows(), V.cols());
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < n; ++m) {
        const auto jt = evolve_pm(S.terms[k].factors[iu], kappa, s, r.y[m], opt_.rule).at;
        V(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = jt[0];
        D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = jt[1];
      }
    for (std::size_t m = 0; m < n; ++m) {
      const double y = r.y[m];
      const auto mc = static_cast<Eigen::Index>(m), mm = static_cast<Eigen::Index>(n - 1 - m);
      for (Eigen::Index k = 0; k < V.rows(); ++k)
        Q(k, mc) = std::abs(std::sqrt(2.0) * y) < kHyperplaneEps ? 2.0 * D(k, mc) : (V(k, mc) - V(k, mm)) / y;
    }
    Eigen::Map<const Eigen::VectorXd> w(r.w0.data(), static_cast<Eigen::Index>(n));
    P0[iu] = V * w.asDiagonal() * V.transpose();
    P1[iu] = D * w.asDiagonal() * D.transpose();
    PD[iu] = 0.5 * kappa * (Q * w.asDiagonal() * Q.transpose());
  }
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      const auto kk = static_cast<Eigen::Index>(k), ll = static_cast<Eigen::Index>(l);
      double sum = 0.0;
      for (int jx = 0; jx < d; ++jx) {
        double p = P1[static_cast<std::size_t>(jx)](kk, ll) + PD[static_cast<std::size_t>(jx)](kk, ll);
        for (int i = 0; i < d; ++i)
          if (i != jx) p *= P0[static_cast<std::size_t>(i)](kk, ll);
        sum += p;
      }
      total += S.terms[k].coeff * S.terms[l].coeff * sum;
    }
  return total;
}

namespace {

double jet_integrand(SquareMode mode, double p, const Jet& j, const Vec& x, const RootSystem& rs) {
  switch (mode) {
    case SquareMode::Gamma:
    case SquareMode::PoissonGamma:
      return gamma_jet(j, j, x, rs);
    case SquareMode::DunklGrad:
      return dunkl_grad_sq_jet(j, x, rs);
    case SquareMode::Grad:
      return grad_sq_jet(j);
    case SquareMode::Gp: {
      // H_t f > 0, but far out it underflows; G_p is 2-homogeneous there,
      // so the orbit contributes nothing representable.
      double top = j.value;
      for (double v : j.reflected) top = std::max(top, v);
      if (top < 1e-250) return 0.0;
      GpParams gp;
      gp.p = p;
      return gp_definition_jet(j, x, gp, rs);
    }
    case SquareMode::TildeT:
      break;
  }
  throw InvariantViolation("jet_integrand: unsupported mode");
}

void validate_request(const SquareFnRequest& req) {
  if (req.mode == SquareMode::Gp) {
    GpParams gp;
    gp.p = req.p;
    validate(gp);
  }
  if (req.mode == SquareMode::TildeT && !(req.horizon > 0.0)) throw ValidationError("tilde_T needs T > 0");
  if (req.mode == SquareMode::PoissonGamma && req.laguerre_nodes < 8)
    throw ValidationError("poisson_gamma needs at least 8 subordination nodes");
}

}  // namespace

double HeatEngine::integrand(const SquareFnRequest& req, const ScalarField& f, double t, const Vec& x) const {
  if (req.mode == SquareMode::TildeT) return heat_of_gamma(f, t, t, x);
  if (req.mode == SquareMode::PoissonGamma) {
    const Rule lag = req.laguerre_nodes == 48 ? laguerre_ : gauss_laguerre(req.laguerre_nodes, -0.5);
    Jet acc;
    for (std::size_t k = 0; k < lag.size(); ++k) {
      const Jet jk = jet(f, t * t / (4.0 * lag.x[k]), x);
      const double w = lag.w[k] / std::sqrt(M_PI);
      if (k == 0) {
        acc = jk;
        acc.value *= w;
        acc.grad *= w;
        for (double& v : acc.reflected) v *= w;
        for (double& v : acc.curvature) v *= w;
      } else {
        acc.axpy(w, jk);
      }
    }
    return t * gamma_jet(acc, acc, x, rs_);
  }
  return jet_integrand(req.mode, req.p, jet(f, t, x), x, rs_);
}

namespace {

TimeSchedule schedule_for(const HeatOptions& opt, const SquareFnRequest& req, const ScalarField& f) {
  TimeSchedule s = opt.time;
  const double tau = HeatEngine::time_scale(f);
  s.t_first = opt.time.t_first * (req.mode == SquareMode::PoissonGamma ? std::sqrt(tau) : tau);
  if (req.mode == SquareMode::TildeT) s.horizon = req.horizon;
  return s;
}

}  // namespace

double HeatEngine::square_sq(const SquareFnRequest& req, const ScalarField& f, const Vec& x, TimeIntegral* report) const {
  validate_request(req);
  separable(f);
  const TimeIntegral ti = integrate_time([&](double t, std::vector<double>& out) { out[0] = integrand(req, f, t, x); }, 1,
                                         schedule_for(opt_, req, f));
  if (report) *report = ti;
  if (!ti.converged)
    throw ResolutionError("time integral did not settle by t = " + std::to_string(ti.t_end) + " at " + format_point(x));
  return ti.value[0];
}

std::vector<double> HeatEngine::square_function(const SquareFnRequest& req, const ScalarField& f,
                                                const std::vector<Vec>& points) const {
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t k) { out[k] = std::sqrt(std::max(0.0, square_sq(req, f, points[k]))); });
  return out;
}

namespace {

// table[i][k][n]: jet of H_t phi_{k,i} at node n of axis i, then its value at
// the mirrored point -x_n.
using AxisTable = std::vector<std::vector<std::vector<std::array<double, 4>>>>;

bool symmetric_axis(const Rule& r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k)
    if (r.x[k] != -r.x[n - 1 - k]) return false;
  return true;
}

AxisTable build_table(const HeatEngine& heat, const SeparableSum& S, const SpatialGrid& grid, double t) {
  const int d = S.dim;
  const std::size_t K = S.terms.size();
  AxisTable tab(static_cast<std::size_t>(d));
  std::vector<std::array<std::size_t, 3>> jobs;
  for (int i = 0; i < d; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    tab[iu].assign(K, std::vector<std::array<double, 4>>(grid.axes[iu].size()));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < grid.axes[iu].size(); ++n) jobs.push_back({iu, k, n});
  }
  std::vector<char> sym(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = symmetric_axis(grid.axes[i]);
  parallel_for(jobs.size(), [&](std::size_t q) {
    const auto [i, k, n] = jobs[q];
    const auto e = heat.evolve(S.terms[k].factors[i], static_cast<int>(i), t, grid.axes[i].x[n]);
    tab[i][k][n] = {e[0], e[1], e[2], 0.0};
    if (!sym[i]) tab[i][k][n][3] = heat.evolve(S.terms[k].factors[i], static_cast<int>(i), t, -grid.axes[i].x[n])[0];
  });
  for (std::size_t i = 0; i < sym.size(); ++i) {
    if (!sym[i]) continue;
    for (auto& col : tab[i])
      for (std::size_t n = 0; n < col.size(); ++n) col[n][3] = col[col.size() - 1 - n][0];
  }
  return tab;
}

// Accumulates w * (jet of the tabulated function) at the multi-index idx.
void tensor_jet(const AxisTable& tab, const SeparableSum& S, const std::vector<std::size_t>& idx,
                double w, bool near, Jet& out) {
  const int d = S.dim;
  for (std::size_t k = 0; k < S.terms.size(); ++k) {
    auto val = [&](int l) { return tab[static_cast<std::size_t>(l)][k][idx[static_cast<std::size_t>(l)]]; };
    double all = w * S.terms[k].coeff;
    for (int l = 0; l < d; ++l) all *= val(l)[0];
    out.value += all;
    for (int i = 0; i < d; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      double rest = w * S.terms[k].coeff;
      for (int l = 0; l < d; ++l)
        if (l != i) rest *= val(l)[0];
      out.grad[i] += rest * val(i)[1];
      out.reflected[iu] += rest * val(i)[3];
      if (near) out.curvature[iu] += 2.0 * rest * val(i)[2];
    }
  }
}

}  // namespace

std::vector<double> HeatEngine::square_function_grid(const SquareFnRequest& req, const ScalarField& f,
                                                     const SpatialGrid& grid, TimeIntegral* report) const {
  validate_request(req);
  if (req.mode == SquareMode::TildeT) throw ValidationError("tilde_T is evaluated pointwise, not on grids");
  const SeparableSum& S = separable(f);
  if (grid.dim() != S.dim) throw ValidationError("grid and field dimensions differ");
  const std::size_t N = grid.size();
  const auto shape = grid.shape();
  const Rule lag = req.laguerre_nodes == 48 ? laguerre_ : gauss_laguerre(req.laguerre_nodes, -0.5);
  const std::size_t chunks = std::min<std::size_t>(N, 256);

  auto body = [&](double t, std::vector<double>& out) {
    std::vector<AxisTable> tabs;
    std::vector<double> wts;
    if (req.mode == SquareMode::PoissonGamma) {
      for (std::size_t k = 0; k < lag.size(); ++k) {
        tabs.push_back(build_table(*this, S, grid, t * t / (4.0 * lag.x[k])));
        wts.push_back(lag.w[k] / std::sqrt(M_PI));
      }
    } else {
      tabs.push_back(build_table(*this, S, grid, t));
      wts.push_back(1.0);
    }
    parallel_for(chunks, [&](std::size_t c) {
      Jet j;
      Vec x;
      std::vector<std::size_t> idx(shape.size());
      for (std::size_t q = c * N / chunks; q < (c + 1) * N / chunks; ++q) {
        grid.point(q, x);
        std::size_t r = q;
        for (int i = S.dim - 1; i >= 0; --i) {
          idx[static_cast<std::size_t>(i)] = r % shape[static_cast<std::size_t>(i)];
          r /= shape[static_cast<std::size_t>(i)];
        }
        bool near = false;
        for (int i = 0; i < S.dim; ++i) near = near || std::abs(std::sqrt(2.0) * x[i]) < kHyperplaneEps;
        j.value = 0.0;
        j.grad = Vec::Zero(S.dim);
        j.reflected.assign(static_cast<std::size_t>(S.dim), 0.0);
        j.curvature.assign(near ? static_cast<std::size_t>(S.dim) : 0u, 0.0);
        for (std::size_t m = 0; m < tabs.size(); ++m) tensor_jet(tabs[m], S, idx, wts[m], near, j);
        const double v = jet_integrand(req.mode, req.p, j, x, rs_);
        out[q] = req.mode == SquareMode::PoissonGamma ? t * v : v;
      }
    });
  };
  const TimeIntegral ti = integrate_time(body, N, schedule_for(opt_, req, f));
  if (report) *report = ti;
  if (!ti.converged) throw ResolutionError("grid time integral did not settle by t = " + std::to_string(ti.t_end));
  std::vector<double> g(N);
  for (std::size_t q = 0; q < N; ++q) g[q] = std::sqrt(std::max(0.0, ti.value[q]));
  return g;
}

std::vector<double> HeatEngine::gamma_on_grid(const ScalarField& f, double t, const SpatialGrid& grid) const {
  const SeparableSum& S = separable(f);
  const std::size_t N = grid.size();
  const auto shape = grid.shape();
  const AxisTable tab = build_table(*this, S, grid, t);
  std::vector<double> out(N);
  const std::size_t chunks = std::min<std::size_t>(N, 256);
  parallel_for(chunks, [&](std::size_t c) {
    Jet j;
    Vec x;
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t q = c * N / chunks; q < (c + 1) * N / chunks; ++q) {
      grid.point(q, x);
      std::size_t r = q;
      for (int i = S.dim - 1; i >= 0; --i) {
        idx[static_cast<std::size_t>(i)] = r % shape[static_cast<std::size_t>(i)];
        r /= shape[static_cast<std::size_t>(i)];
      }
      bool near = false;
      for (int i = 0; i < S.dim; ++i) near = near || std::abs(std::sqrt(2.0) * x[i]) < kHyperplaneEps;
      j.value = 0.0;
      j.grad = Vec::Zero(S.dim);
      j.reflected.assign(static_cast<std::size_t>(S.dim), 0.0);
      j.curvature.assign(near ? static_cast<std::size_t>(S.dim) : 0u, 0.0);
      tensor_jet(tab, S, idx, 1.0, near, j);
      out[q] = gamma_jet(j, j, x, rs_);
    }
  });
  return out;
}

std::vector<double> HeatEngine::values_on_grid(const ScalarField& f, const SpatialGrid& grid) const {
  std::vector<double> out(grid.size());
  parallel_for(out.size(), [&](std::size_t q) {
    Vec x;
    grid.point(q, x);
    out[q] = f(x);
  });
  return out;
}

double HeatEngine::dynkin_bracket(const ScalarField& f, double T, const Vec& y) const {
  if (!(T > 0.0)) throw ValidationError("Dynkin bracket needs T > 0");
  auto run = [&](int n) {
    const Rule r = gauss_legendre(n, 0.0, T);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r.w[k] * heat_of_gamma(f, T - r.x[k], r.x[k], y);
    return 2.0 * s;
  };
  const double a = run(opt_.dynkin_nodes), b = run(2 * opt_.dynkin_nodes);
  if (std::abs(a - b) > 1e-6 * (std::abs(b) + 1e-300))
    throw ResolutionError("Dynkin time quadrature: node doubling changed the value by " + std::to_string(std::abs(a - b)));
  return b;
}

double apply_semigroup(const ScalarField& f, double t, const Vec& x, const RootSystem& rs) {
  if (!(t > 0.0)) throw ValidationError("apply_semigroup needs t > 0");
  return HeatEngine(rs).apply(f, t, x);
}

std::vector<GradientEstimateRecord> gradient_estimate_check(const HeatEngine& heat, const ScalarField& f, double t,
                                                            const std::vector<Vec>& points) {
  if (heat.roots().kind() == RootKind::General) throw ValidationError("gradient estimate needs a z2d system");
  std::vector<GradientEstimateRecord> out(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    auto& r = out[k];
    r.x = points[k];
    const Jet j = heat.jet(f, t, r.x);
    r.lhs = gamma_jet(j, j, r.x, heat.roots());
    r.rhs = heat.heat_of_gamma(f, 0.0, t, r.x);
    r.pass = r.lhs <= r.rhs + 1e-6 * (1.0 + r.rhs);
  });
  return out;
}

}  // namespace dunkl
