#include "dunkl/heatflow.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace dunkl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Radial operator (r^a v')' / r^a on the vertex grid r_j = j h as mass M
// (control volumes) and symmetric stiffness K, zero flux at both ends.
struct RadialAxis {
  std::vector<double> mass;
  std::vector<double> face;  // r_(j+1/2)^a / h
};

RadialAxis radial_axis(double a, int n, double h) {
  RadialAxis ax;
  const double R = n * h;
  for (int j = 0; j <= n; ++j) {
    const double lo = std::max(0.0, (j - 0.5) * h), hi = std::min(R, (j + 0.5) * h);
    ax.mass.push_back((std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / (a + 1.0));
  }
  for (int j = 0; j < n; ++j) ax.face.push_back(std::pow((j + 0.5) * h, a) / h);
  return ax;
}

struct Sector {
  std::vector<int> odd;  // per axis 0/1
  std::vector<const RadialAxis*> axes;
  std::size_t size = 1;
  std::vector<std::size_t> stride;
};

std::size_t flat(const std::vector<int>& j, const Sector& s) {
  std::size_t q = 0;
  for (std::size_t i = 0; i < j.size(); ++i) q += static_cast<std::size_t>(j[i]) * s.stride[i];
  return q;
}

void unflat(std::size_t q, int n, int d, std::vector<int>& j) {
  j.resize(static_cast<std::size_t>(d));
  for (int i = d - 1; i >= 0; --i) {
    j[static_cast<std::size_t>(i)] = static_cast<int>(q % static_cast<std::size_t>(n + 1));
    q /= static_cast<std::size_t>(n + 1);
  }
}

// Mass diagonal and stiffness of sum_i (x)_(l != i) M_l (x) K_i.
void assemble(const Sector& s, int n, int d, Eigen::VectorXd& M, SpMat& K) {
  M.resize(static_cast<Eigen::Index>(s.size));
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> j;
  for (std::size_t q = 0; q < s.size; ++q) {
    unflat(q, n, d, j);
    double m = 1.0;
    for (int i = 0; i < d; ++i) m *= s.axes[static_cast<std::size_t>(i)]->mass[static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
    M[static_cast<Eigen::Index>(q)] = m;
    double diag = 0.0;
    for (int i = 0; i < d; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const RadialAxis& ax = *s.axes[iu];
      double others = 1.0;
      for (int l = 0; l < d; ++l)
        if (l != i) others *= s.axes[static_cast<std::size_t>(l)]->mass[static_cast<std::size_t>(j[static_cast<std::size_t>(l)])];
      const int ji = j[iu];
      for (int side : {-1, 1}) {
        const int nb = ji + side;
        if (nb < 0 || nb > n) continue;
        const double c = others * ax.face[static_cast<std::size_t>(std::min(ji, nb))];
        auto jn = j;
        jn[iu] = nb;
        trip.emplace_back(static_cast<int>(q), static_cast<int>(flat(jn, s)), c);
        diag -= c;
      }
    }
    trip.emplace_back(static_cast<int>(q), static_cast<int>(q), diag);
  }
  K.resize(static_cast<Eigen::Index>(s.size), static_cast<Eigen::Index>(s.size));
  K.setFromTriplets(trip.begin(), trip.end());
}

struct Stepper {
  Eigen::VectorXd M;
  SpMat K;
  std::map<std::pair<double, double>, std::unique_ptr<Eigen::SimplicialLDLT<SpMat>>> cache;

  // One theta step of size dt.
  void step(Eigen::VectorXd& u, double dt, double theta) {
    auto key = std::make_pair(dt, theta);
    auto it = cache.find(key);
    if (it == cache.end()) {
      SpMat A = -theta * dt * K;
      for (Eigen::Index k = 0; k < M.size(); ++k) A.coeffRef(k, k) += M[k];
      auto solver = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(A);
      if (solver->info() != Eigen::Success) throw NumericError("PDE stepper: factorization failed");
      it = cache.emplace(key, std::move(solver)).first;
    }
    const Eigen::VectorXd rhs = M.cwiseProduct(u) + (1.0 - theta) * dt * (K * u);
    u = it->second->solve(rhs);
    if (it->second->info() != Eigen::Success) throw NumericError("PDE stepper: solve failed");
  }
};

struct Trajectory {
  std::vector<std::vector<double>> per_time;  // full symmetric grid, one per requested time
  std::vector<double> mass;
  double mass0 = 0.0;
};

Trajectory solve_once(const ScalarField& f, const RootSystem& rs, const std::vector<double>& times, double R, int n,
                      double dt) {
  const int d = rs.dim();
  const double h = R / n;
  std::vector<RadialAxis> even, odd;
  for (int i = 0; i < d; ++i) {
    const double k = rs.kappa(static_cast<std::size_t>(i));
    even.push_back(radial_axis(2.0 * k, n, h));
    odd.push_back(radial_axis(2.0 * k + 2.0, n, h));
  }
  const std::size_t side = static_cast<std::size_t>(2 * n + 1);
  std::size_t full = 1;
  for (int i = 0; i < d; ++i) full *= side;

  double weight_const = 1.0;  // 2 per axis (both half lines) times 2^kappa
  for (int i = 0; i < d; ++i) weight_const *= 2.0 * std::pow(2.0, rs.kappa(static_cast<std::size_t>(i)));

  Trajectory tr;
  tr.per_time.assign(times.size(), std::vector<double>(full, 0.0));
  tr.mass.assign(times.size(), 0.0);

  for (unsigned bits = 0; bits < (1u << d); ++bits) {
    Sector s;
    for (int i = 0; i < d; ++i) {
      const int o = (bits >> i) & 1u;
      s.odd.push_back(o);
      s.axes.push_back(o ? &odd[static_cast<std::size_t>(i)] : &even[static_cast<std::size_t>(i)]);
    }
    s.stride.assign(static_cast<std::size_t>(d), 1);
    for (int i = d - 2; i >= 0; --i) s.stride[static_cast<std::size_t>(i)] = s.stride[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(n + 1);
    for (int i = 0; i < d; ++i) s.size *= static_cast<std::size_t>(n + 1);

    // Sector projection of f: v = 2^-d sum_sigma sign f(sigma r) / prod_odd r_i.
    Eigen::VectorXd u(static_cast<Eigen::Index>(s.size));
    std::vector<int> j;
    Vec x(d);
    for (std::size_t q = 0; q < s.size; ++q) {
      unflat(q, n, d, j);
      double acc = 0.0;
      for (unsigned sg = 0; sg < (1u << d); ++sg) {
        double sign = 1.0;
        for (int i = 0; i < d; ++i) {
          const double sig = ((sg >> i) & 1u) ? -1.0 : 1.0;
          x[i] = sig * j[static_cast<std::size_t>(i)] * h;
          if (s.odd[static_cast<std::size_t>(i)]) sign *= sig;
        }
        acc += sign * f(x);
      }
      acc /= std::pow(2.0, d);
      bool at_zero = false;
      for (int i = 0; i < d; ++i)
        if (s.odd[static_cast<std::size_t>(i)]) {
          if (j[static_cast<std::size_t>(i)] == 0) at_zero = true;
          else acc /= j[static_cast<std::size_t>(i)] * h;
        }
      u[static_cast<Eigen::Index>(q)] = at_zero ? 0.0 : acc;
    }
    // v is even in each odd coordinate: v(0) = (4 v(h) - v(2h)) / 3. Applied
    // one axis at a time so corners pick up the already-filled values.
    for (int i = 0; i < d; ++i) {
      if (!s.odd[static_cast<std::size_t>(i)]) continue;
      for (std::size_t q = 0; q < s.size; ++q) {
        unflat(q, n, d, j);
        if (j[static_cast<std::size_t>(i)] != 0) continue;
        auto j1 = j, j2 = j;
        j1[static_cast<std::size_t>(i)] = 1;
        j2[static_cast<std::size_t>(i)] = 2;
        u[static_cast<Eigen::Index>(q)] =
            (4.0 * u[static_cast<Eigen::Index>(flat(j1, s))] - u[static_cast<Eigen::Index>(flat(j2, s))]) / 3.0;
      }
    }

    Stepper st;
    assemble(s, n, d, st.M, st.K);
    if (bits == 0) tr.mass0 = weight_const * st.M.dot(u);

    double t = 0.0;
    bool started = false;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double target = times[ti];
      if (target < t) throw ValidationError("pde_solve needs increasing times");
      if (target > t && !started) {
        // Two backward Euler half steps damp the stiff modes before CN.
        const double first = std::min(dt, target - t);
        st.step(u, 0.5 * first, 1.0);
        st.step(u, 0.5 * first, 1.0);
        t += first;
        started = true;
      }
      if (target > t) {
        const int steps = static_cast<int>(std::ceil((target - t) / dt - 1e-9));
        const double dte = (target - t) / steps;
        for (int k = 0; k < steps; ++k) st.step(u, dte, 0.5);
        t = target;
      }
      if (bits == 0) tr.mass[ti] = weight_const * st.M.dot(u);
      // Scatter the sector back onto the full grid.
      std::vector<int> full_idx(static_cast<std::size_t>(d));
      for (std::size_t q = 0; q < full; ++q) {
        std::size_t r = q;
        double factor = 1.0;
        std::vector<int> jj(static_cast<std::size_t>(d));
        for (int i = d - 1; i >= 0; --i) {
          const int m = static_cast<int>(r % side) - n;
          r /= side;
          jj[static_cast<std::size_t>(i)] = std::abs(m);
          if (s.odd[static_cast<std::size_t>(i)]) factor *= m * h;
        }
        if (factor == 0.0) continue;
        tr.per_time[ti][q] += factor * u[static_cast<Eigen::Index>(flat(jj, s))];
      }
    }
  }
  return tr;
}

}  // namespace

double PdeSolution::at(std::size_t time_index, const std::vector<int>& index) const {
  const std::size_t side = nodes.size();
  std::size_t q = 0;
  for (int i : index) q = q * side + static_cast<std::size_t>(i);
  return values.at(time_index).at(q);
}

PdeSolution pde_solve(const ScalarField& f, const RootSystem& rs, const std::vector<double>& times, const PdeGrid& grid) {
  if (!rs.is_orthogonal()) throw ValidationError("pde_solve needs a rank-one or z2d system");
  if (rs.dim() > 3) throw ValidationError("pde_solve supports d <= 3");
  if (f.dim() != rs.dim()) throw ValidationError("field and root system dimensions differ");
  if (!(grid.radius > 0.0) || grid.cells < 4 || !(grid.dt > 0.0)) throw ValidationError("pde_solve: bad grid");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw ValidationError("pde_solve needs nonnegative increasing times");

  const int n = grid.cells;
  PdeSolution sol;
  sol.dim = rs.dim();
  sol.times = times;
  const double h = grid.radius / n;
  for (int m = -n; m <= n; ++m) sol.nodes.push_back(m * h);

  Trajectory coarse = solve_once(f, rs, times, grid.radius, n, grid.dt);
  sol.mass0 = coarse.mass0;
  sol.mass = coarse.mass;
  if (!grid.richardson) {
    sol.values = std::move(coarse.per_time);
    return sol;
  }
  const Trajectory fine = solve_once(f, rs, times, grid.radius, 2 * n, grid.dt);
  const int d = rs.dim();
  const std::size_t side = static_cast<std::size_t>(2 * n + 1), fside = static_cast<std::size_t>(4 * n + 1);
  sol.values = coarse.per_time;
  for (std::size_t ti = 0; ti < times.size(); ++ti)
    for (std::size_t q = 0; q < sol.values[ti].size(); ++q) {
      std::size_t r = q, fq = 0, mult = 1;
      for (int i = d - 1; i >= 0; --i) {
        const std::size_t m = r % side;
        r /= side;
        fq += 2 * m * mult;
        mult *= fside;
      }
      sol.values[ti][q] = (4.0 * fine.per_time[ti][fq] - coarse.per_time[ti][q]) / 3.0;
    }
  return sol;
}

}  // namespace dunkl
