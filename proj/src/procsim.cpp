#include "dunkl/procsim.hpp"

#include "dunkl/special.hpp"

#include <algorithm>
#include <cmath>

namespace dunkl {

void validate(const SimConfig& cfg, const RootSystem& rs) {
  if (cfg.x0.size() != rs.dim()) throw ValidationError("x0 has the wrong dimension");
  if (!(cfg.dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(cfg.T > 0.0)) throw ValidationError("horizon T must be > 0");
  if (cfg.paths < 1) throw ValidationError("need at least one path");
  if (!(cfg.p_jump_max > 0.0 && cfg.p_jump_max <= 1.0)) throw ValidationError("p_jump_max must lie in (0, 1]");
  if (rs.hyperplane_distance(cfg.x0) < kHyperplaneEps)
    throw DomainError("the process must start off the reflecting hyperplanes, got " + format_point(cfg.x0));
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

namespace {

// Per-root jump rates 2 kappa_a / <a,x>^2; returns the total.
double rates(const RootSystem& rs, const Vec& x, std::vector<double>& r) {
  r.resize(rs.size());
  double total = 0.0;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const double p = rs.pairing(a, x);
    r[a] = rs.kappa(a) > 0.0 ? 2.0 * rs.kappa(a) / (p * p) : 0.0;
    total += r[a];
  }
  return total;
}

// |Y_h| for dY = 2 kappa / Y dt + sqrt2 dW started at y >= 0: |Y|^2 / 2h is
// noncentral chi-square, 2 kappa + 1 degrees of freedom, noncentrality y^2 / 2h.
double bessel_magnitude(double kappa, double y, double h, std::mt19937_64& rng) {
  const double nc = y * y / (2.0 * h);
  long k = 0;
  if (nc > 0.0) {
    std::poisson_distribution<long> pois(0.5 * nc);
    k = pois(rng);
  }
  std::gamma_distribution<double> gam(kappa + 0.5 + static_cast<double>(k), 2.0);
  return std::sqrt(2.0 * h * gam(rng));
}

// Continuous part of one step. The coordinate normal to the nearest wall moves
// by its exact Bessel magnitude, everything else by Euler. Proposals changing
// the sign of a pairing with kappa > 0 are refused.
bool diffuse(const RootSystem& rs, const Vec& x, double h, std::mt19937_64& rng, Vec& out) {
  std::normal_distribution<double> normal;
  Vec xi(x.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = normal(rng);
  std::size_t near = rs.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const double p = std::abs(rs.pairing(a, x));
    if (rs.kappa(a) > 0.0 && p < best) {
      best = p;
      near = a;
    }
  }
  if (near == rs.size()) {
    out = x + std::sqrt(2.0 * h) * xi;
    return true;
  }
  const Vec e = rs.root(near) / std::sqrt(2.0);
  const double y = e.dot(x);
  Vec b = Vec::Zero(x.size());
  for (std::size_t a = 0; a < rs.size(); ++a)
    if (a != near && rs.kappa(a) > 0.0) b += 2.0 * rs.kappa(a) / rs.pairing(a, x) * rs.root(a);
  Vec move = b * h + std::sqrt(2.0 * h) * xi;
  const double along = e.dot(b) * h;
  move -= e.dot(move) * e;
  const double ynew = std::copysign(bessel_magnitude(rs.kappa(near), std::abs(y), h, rng), y) + along;
  out = x - y * e + move + ynew * e;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (rs.kappa(a) == 0.0) continue;
    if (std::signbit(rs.pairing(a, out)) != std::signbit(rs.pairing(a, x)) || rs.pairing(a, out) == 0.0) return false;
  }
  return true;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// mean, standard error, unbiased variance and its standard error.
struct Moments {
  double mean = 0.0, se = 0.0, var = 0.0, se_var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return m;
  m.mean = sample_mean(v);
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  if (v.size() > 1) {
    m.var = s2 / (n - 1.0);
    m.se = std::sqrt(m.var / n);
    const double m2 = s2 / n, m4 = s4 / n;
    m.se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  }
  return m;
}

}  // namespace

PathSample simulate_path(const SimConfig& cfg, const RootSystem& rs, std::mt19937_64& rng, const FlowJet* flow,
                         const StepHook* hook) {
  validate(cfg, rs);
  std::uniform_real_distribution<double> unif;
  PathSample ps;
  Vec x = cfg.x0;
  double t = 0.0;
  std::vector<double> r;
  if (cfg.record) {
    ps.times.push_back(0.0);
    ps.states.push_back(x);
  }
  while (t < cfg.T) {
    const double lambda = rates(rs, x, r);
    double h = std::min(cfg.dt, cfg.T - t);
    if (lambda * h > cfg.p_jump_max) {
      h = cfg.p_jump_max / lambda;
      ++ps.cap_hits;
    }
    // the jump cap alone may push h below 1e-12 right at a wall; only
    // repeated refusals count as underflow
    Vec next;
    bool moved = diffuse(rs, x, h, rng, next);
    while (!moved && h >= 1e-12) {
      h *= 0.5;
      moved = diffuse(rs, x, h, rng, next);
    }
    if (!moved) {
      ps.flagged = true;
      ps.flag_reason = "step underflow at " + format_point(x) + ", t = " + std::to_string(t);
      break;
    }
    if (flow) {
      const Jet j = (*flow)(t, x);
      ps.bracket_grad += 2.0 * j.grad.squaredNorm() * h;
      for (std::size_t a = 0; a < rs.size(); ++a) {
        if (rs.kappa(a) == 0.0) continue;
        const double q = reflection_quotient(j, a, x, rs);
        ps.bracket_jump += 2.0 * rs.kappa(a) * q * q * h;
      }
    }
    const Vec pre_step = x;
    x = next;
    const bool jumped = unif(rng) < lambda * h;
    if (jumped) {
      double pick = unif(rng) * lambda;
      std::size_t a = 0;
      while (a + 1 < r.size() && pick >= r[a]) pick -= r[a++];
      JumpRecord jr;
      jr.time = t + h;
      jr.root = a;
      jr.pre = x;
      x = rs.reflect(a, x);
      jr.post = x;
      ps.jumps.push_back(std::move(jr));
    }
    if (hook) (*hook)(pre_step, h, lambda, jumped);
    t += h;
    ++ps.steps;
    ps.min_distance = std::min(ps.min_distance, rs.hyperplane_distance(x));
    if (cfg.record) {
      ps.times.push_back(t);
      ps.states.push_back(x);
    }
  }
  ps.terminal = x;
  return ps;
}

PathSample simulate_radial(const SimConfig& cfg, const RootSystem& rs, std::mt19937_64& rng) {
  validate(cfg, rs);
  if (!rs.is_orthogonal()) throw ValidationError("radial simulation covers rank-one and z2d chambers only");
  if (!rs.in_chamber(cfg.x0)) throw DomainError("radial process must start in the open chamber");
  PathSample ps;
  Vec x = cfg.x0;
  double t = 0.0;
  if (cfg.record) {
    ps.times.push_back(0.0);
    ps.states.push_back(x);
  }
  while (t < cfg.T) {
    const double h = std::min(cfg.dt, cfg.T - t);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = bessel_magnitude(rs.kappa(static_cast<std::size_t>(i)), x[i], h, rng);
    t += h;
    ++ps.steps;
    ps.min_distance = std::min(ps.min_distance, rs.hyperplane_distance(x));
    if (cfg.record) {
      ps.times.push_back(t);
      ps.states.push_back(x);
    }
  }
  ps.terminal = x;
  return ps;
}

Vec exact_step(const RootSystem& rs, const Vec& x, double dt, std::mt19937_64& rng) {
  if (!rs.is_orthogonal()) throw ValidationError("exact transitions need a rank-one or z2d system");
  if (!(dt > 0.0)) return x;
  std::uniform_real_distribution<double> unif;
  Vec y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double kappa = rs.kappa(static_cast<std::size_t>(i));
    const double r = bessel_magnitude(kappa, std::abs(x[i]), dt, rng);
    const double z = std::abs(x[i]) * r / (2.0 * dt);
    const double a = bessel_lambda(kappa - 0.5, z), b = bessel_lambda(kappa + 0.5, z);
    const double keep = 0.5 + 0.25 * z * b / a;
    const double s = x[i] >= 0.0 ? 1.0 : -1.0;
    y[i] = unif(rng) < keep ? s * r : -s * r;
  }
  return y;
}

Estimate mc_semigroup(const ScalarField& f, double t, const Vec& x0, std::size_t n, const RootSystem& rs,
                      std::uint64_t seed, SimEngine engine, double dt) {
  if (!(t > 0.0)) throw ValidationError("mc_semigroup needs t > 0");
  if (n < 2) throw ValidationError("mc_semigroup needs n >= 2");
  const bool exact = engine == SimEngine::Exact || (engine == SimEngine::Auto && rs.is_orthogonal());
  SimConfig cfg;
  cfg.x0 = x0;
  cfg.T = t;
  cfg.dt = dt;
  cfg.paths = n;
  cfg.seed = seed;
  if (!exact) validate(cfg, rs);
  std::vector<double> vals(n, 0.0);
  std::vector<char> bad(n, 0);
  parallel_for(n, [&](std::size_t k) {
    auto rng = path_rng(seed, k);
    if (exact) {
      vals[k] = f(exact_step(rs, x0, t, rng));
    } else {
      const PathSample ps = simulate_path(cfg, rs, rng);
      if (ps.flagged) bad[k] = 1;
      else vals[k] = f(ps.terminal);
    }
  });
  std::vector<double> kept;
  Estimate e;
  for (std::size_t k = 0; k < n; ++k) {
    if (bad[k]) ++e.flagged;
    else kept.push_back(vals[k]);
  }
  const Moments m = moments(kept);
  e.mean = m.mean;
  e.se = m.se;
  e.n = kept.size();
  return e;
}

TrajectoryStats martingale_stats(const ScalarField& f, const SimConfig& cfg, const HeatEngine& heat,
                                 const MartingaleOptions& opt) {
  const RootSystem& rs = heat.roots();
  validate(cfg, rs);
  const bool exact = opt.engine != SimEngine::Euler;
  const std::size_t n = cfg.paths;
  const double T = cfg.T;
  const double start = heat.apply(f, T, cfg.x0);
  std::vector<double> N(n), B(n), X2(n), J(n, 0.0), md(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> caps(n, 0);
  std::vector<char> bad(n, 0);
  const Rule gl = gauss_legendre(opt.skeleton_nodes, 0.0, T);
  const FlowJet flow = [&](double s, const Vec& x) { return heat.jet(f, T - s, x); };

  parallel_for(n, [&](std::size_t k) {
    auto rng = path_rng(cfg.seed, k);
    if (exact) {
      Vec x = cfg.x0;
      double prev = 0.0, bracket = 0.0;
      for (std::size_t q = 0; q < gl.size(); ++q) {
        x = exact_step(rs, x, gl.x[q] - prev, rng);
        prev = gl.x[q];
        const Jet j = heat.jet(f, T - gl.x[q], x);
        bracket += gl.w[q] * 2.0 * gamma_jet(j, j, x, rs);
        md[k] = std::min(md[k], rs.hyperplane_distance(x));
      }
      x = exact_step(rs, x, T - prev, rng);
      N[k] = f(x) - start;
      B[k] = bracket;
      X2[k] = x.squaredNorm();
    } else {
      const PathSample ps = simulate_path(cfg, rs, rng, &flow);
      if (ps.flagged) {
        bad[k] = 1;
        return;
      }
      N[k] = f(ps.terminal) - start;
      B[k] = ps.bracket();
      X2[k] = ps.terminal.squaredNorm();
      J[k] = static_cast<double>(ps.jumps.size());
      md[k] = ps.min_distance;
      caps[k] = ps.cap_hits;
    }
  });

  TrajectoryStats st;
  st.engine = exact ? "exact" : "euler";
  std::vector<double> n_ok, b_ok, x_ok, j_ok;
  for (std::size_t k = 0; k < n; ++k) {
    if (bad[k]) {
      ++st.flagged;
      continue;
    }
    n_ok.push_back(N[k]);
    b_ok.push_back(B[k]);
    x_ok.push_back(X2[k]);
    j_ok.push_back(J[k]);
    st.cap_hits += caps[k];
    st.min_distance = std::min(st.min_distance, md[k]);
  }
  st.n = n_ok.size();
  st.degraded = static_cast<double>(st.flagged) > 1e-3 * static_cast<double>(n);
  const Moments mn = moments(n_ok), mb = moments(b_ok), mx = moments(x_ok);
  st.mean_N = mn.mean;
  st.se_N = mn.se;
  // E N_T = 0 is known, so the second moment about zero estimates the variance.
  double s2 = 0.0, s4 = 0.0;
  for (double v : n_ok) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double nn = static_cast<double>(st.n);
  st.var_N = mn.var;
  st.se_var_N = std::sqrt(std::max(0.0, s4 / nn - (s2 / nn) * (s2 / nn)) / nn);
  st.mean_bracket = mb.mean;
  st.se_bracket = mb.se;
  st.mean_x2 = mx.mean;
  st.se_x2 = mx.se;
  st.mean_jumps = j_ok.empty() ? 0.0 : sample_mean(j_ok);
  if (opt.dynkin) st.dynkin = heat.dynkin_bracket(f, T, cfg.x0);
  return st;
}

std::vector<JumpRateBin> jump_rate_histogram(const SimConfig& cfg, const RootSystem& rs, const std::vector<double>& edges) {
  validate(cfg, rs);
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) throw ValidationError("need sorted bin edges");
  const std::size_t nb = edges.size() - 1;
  // Per path: exposure, jumps, expected, variance per bin.
  std::vector<std::vector<double>> acc(cfg.paths, std::vector<double>(4 * nb, 0.0));
  parallel_for(cfg.paths, [&](std::size_t k) {
    auto rng = path_rng(cfg.seed, k);
    auto& a = acc[k];
    const StepHook hook = [&](const Vec& x, double dt, double rate, bool jumped) {
      const double m = rs.hyperplane_distance(x);
      auto it = std::upper_bound(edges.begin(), edges.end(), m);
      if (it == edges.begin() || it == edges.end()) return;
      const std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
      const double p = rate * dt;
      a[4 * b] += dt;
      a[4 * b + 1] += jumped ? 1.0 : 0.0;
      a[4 * b + 2] += p;
      a[4 * b + 3] += p * (1.0 - p);
    };
    simulate_path(cfg, rs, rng, nullptr, &hook);
  });
  std::vector<JumpRateBin> out(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    out[b].lo = edges[b];
    out[b].hi = edges[b + 1];
    double var = 0.0;
    for (const auto& a : acc) {
      out[b].exposure += a[4 * b];
      out[b].jumps += a[4 * b + 1];
      out[b].expected += a[4 * b + 2];
      var += a[4 * b + 3];
    }
    out[b].se = std::sqrt(var);
  }
  return out;
}

}  // namespace dunkl
