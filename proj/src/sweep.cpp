#include "dunkl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

namespace dunkl {

SpatialGrid fold(const SpatialGrid& grid) {
  SpatialGrid out;
  for (const Rule& r : grid.axes) {
    Rule h;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.x[k] > 0.0) {
        h.x.push_back(r.x[k]);
        h.w.push_back(2.0 * r.w[k]);
      } else if (r.x[k] == 0.0) {
        h.x.push_back(0.0);
        h.w.push_back(r.w[k]);
      }
    }
    if (2 * h.size() < r.size()) throw ValidationError("fold: grid axis is not symmetric");
    out.axes.push_back(std::move(h));
  }
  return out;
}

bool is_even(const ScalarField& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  const int d = f.dim();
  Vec x(d);
  for (int probe = 0; probe < 24; ++probe) {
    for (int i = 0; i < d; ++i) x[i] = 1.5 * n(rng);
    const double v = f(x);
    for (int i = 0; i < d; ++i) {
      Vec y = x;
      y[i] = -y[i];
      if (std::abs(f(y) - v) > 1e-14 * (1.0 + std::abs(v))) return false;
    }
  }
  return true;
}

namespace {

// Resolution per dimension; the refined run doubles panels, tail nodes and
// time nodes.
GridSpec sweep_grid(int d) {
  GridSpec s;
  if (d == 2) {
    s.panels = 6;
    s.tail_nodes = 8;
  } else if (d >= 3) {
    s.panels = 4;
    s.nodes = 8;
    s.tail_nodes = 6;
  }
  return s;
}

// g and f on one grid, reused for every p: the tail map is tuned for the
// smallest p, where |g|^p decays slowest.
struct Sampled {
  SpatialGrid grid;
  std::vector<double> g, f;
  bool converged = true;
  double ratio(double p) const { return lp_norm(g, p, grid) / lp_norm(f, p, grid); }
};

Sampled sample(const HeatEngine& heat, const ScalarField& f, const SquareFnRequest& req, double p_min, GridSpec spec,
               bool even) {
  const RootSystem& rs = heat.roots();
  Sampled s;
  s.grid = make_grid_for_power(rs, spec, p_min, rs.dim() + 2.0 * rs.gamma());
  if (even) s.grid = fold(s.grid);
  TimeIntegral rep;
  s.g = heat.square_function_grid(req, f, s.grid, &rep);
  s.f = heat.values_on_grid(f, s.grid);
  s.converged = rep.converged;
  return s;
}

}  // namespace

std::vector<SweepRow> sweep_lp(const SweepConfig& cfg) {
  std::vector<SweepRow> rows;
  std::vector<double> ps;
  for (double p : cfg.p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("sweep exponents must lie in (1, inf)");
    if (cfg.mode != SquareMode::Gp || p <= 2.0) ps.push_back(p);
  }
  const double p_min = ps.empty() ? 2.0 : *std::min_element(ps.begin(), ps.end());
  for (int d : cfg.dims) {
    for (double k : cfg.kappa) {
      const RootSystem rs = RootSystem::z2d(d, std::vector<double>(static_cast<std::size_t>(d), k));
      HeatEngine heat(rs);
      HeatOptions fine_opt;
      fine_opt.time.nodes *= 2;
      HeatEngine fine(rs, fine_opt);
      for (const auto& spec : cfg.fields) {
        const ScalarField f = fields::parse(spec, rs);
        const bool even = is_even(f);
        std::vector<SweepRow> block;
        for (double p : cfg.p) {
          SweepRow row;
          row.p = p;
          row.dim = d;
          row.kappa = rs.kappas();
          row.field = spec;
          row.mode = to_string(cfg.mode);
          if (cfg.mode == SquareMode::Gp && p > 2.0) row.note = "g_p is defined for 1 < p <= 2";
          block.push_back(row);
        }
        // g_p depends on p; everything else is computed once.
        auto run = [&](const HeatEngine& h, GridSpec gs, double p_tail, double p_mode) {
          SquareFnRequest req;
          req.mode = cfg.mode;
          req.p = p_mode;
          return sample(h, f, req, p_tail, gs, even);
        };
        try {
          std::optional<Sampled> a, b;
          for (auto& row : block) {
            if (!row.note.empty()) continue;
            if (cfg.mode == SquareMode::Gp || !a) {
              const double pm = cfg.mode == SquareMode::Gp ? row.p : 2.0;
              const double pt = cfg.mode == SquareMode::Gp ? row.p : p_min;
              a = run(heat, sweep_grid(d), pt, pm);
              if (cfg.refine) b = run(fine, sweep_grid(d).refined(), pt, pm);
            }
            row.ratio = a->ratio(row.p);
            row.nodes = a->grid.size();
            row.converged = a->converged && (!b || b->converged);
            row.ratio_refined = b ? b->ratio(row.p) : row.ratio;
            row.finite = std::isfinite(row.ratio) && std::isfinite(row.ratio_refined) && row.ratio > 0.0;
            row.change = std::abs(row.ratio_refined - row.ratio) / row.ratio_refined;
            if (!row.converged) row.note = "time integral did not converge";
          }
        } catch (const ResolutionError& e) {
          for (auto& row : block)
            if (row.note.empty() && row.ratio == 0.0) row.note = std::string("resolution: ") + e.what();
        }
        rows.insert(rows.end(), block.begin(), block.end());
      }
    }
  }
  return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "p,d,kappa,field,mode,ratio,ratio_refined,change,finite,converged,nodes,note\n";
  for (const auto& r : rows) {
    std::string k;
    for (std::size_t i = 0; i < r.kappa.size(); ++i) k += (i ? ";" : "") + std::to_string(r.kappa[i]);
    os << r.p << ',' << r.dim << ',' << k << ",\"" << r.field << "\"," << r.mode << ',' << r.ratio << ','
       << r.ratio_refined << ',' << r.change << ',' << r.finite << ',' << r.converged << ',' << r.nodes << ",\""
       << r.note << "\"\n";
  }
  return os.str();
}

Json to_json(const SweepRow& r) {
  Json j;
  j["p"] = r.p;
  j["d"] = r.dim;
  j["kappa"] = r.kappa;
  j["field"] = r.field;
  j["mode"] = r.mode;
  j["ratio"] = r.ratio;
  j["ratio_refined"] = r.ratio_refined;
  j["change"] = r.change;
  j["finite"] = r.finite;
  j["converged"] = r.converged;
  j["nodes"] = r.nodes;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ScalingProbe scaling_probe(const HeatEngine& heat, const ScalarField& f, double p, double t_lo, double t_hi) {
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw ValidationError("scaling_probe needs 0 < t_lo < t_hi");
  const RootSystem& rs = heat.roots();
  const bool even = is_even(f);
  ScalingProbe out;
  out.p = p;
  const double ts = HeatEngine::time_scale(f);
  // Grid wide enough for the spread of H_t f; Gaussian decay, no tail map.
  auto grid_for = [&](double t) {
    GridSpec s = sweep_grid(rs.dim());
    s.radius = 8.0 * std::sqrt(ts + 2.0 * t);
    SpatialGrid g = make_grid(rs, s);
    return even ? fold(g) : g;
  };
  const double norm_f = [&] {
    const SpatialGrid g = grid_for(0.0);
    return lp_norm(heat.values_on_grid(f, g), p, g);
  }();
  std::vector<double> ts_grid;
  for (double t = t_lo / 2.0; t <= 2.0 * t_hi * (1 + 1e-12); t *= 2.0) ts_grid.push_back(t);
  for (double t : ts_grid) {
    const SpatialGrid g = grid_for(t);
    auto gam = heat.gamma_on_grid(f, t, g);
    for (double& v : gam) v = std::sqrt(std::max(v, 0.0));
    out.t.push_back(t);
    out.value.push_back(std::sqrt(t) * lp_norm(gam, p, g) / norm_f);
  }
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    out.sup_outer = std::max(out.sup_outer, out.value[k]);
    if (out.t[k] >= t_lo * (1 - 1e-12) && out.t[k] <= t_hi * (1 + 1e-12))
      out.sup_inner = std::max(out.sup_inner, out.value[k]);
  }
  out.variation = (out.sup_outer - out.sup_inner) / out.sup_inner;
  return out;
}

}  // namespace dunkl
