#pragma once

#include "dunkl/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dunkl {

enum class RootKind { RankOne, Z2d, General };

std::string to_string(RootKind kind);

/// Positive subsystem of a reduced root system, normalized so |alpha|^2 = 2,
/// together with a nonnegative G-invariant multiplicity function.
///
/// Values are immutable after construction. For the orthogonal kinds
/// (RankOne, Z2d) root i is sqrt(2) e_i and every pairing reduces to the
/// coordinate x_i, so callers can use `axis(i)` and stay exact.
class RootSystem {
 public:
  /// Coordinate reflection group: roots sqrt(2) e_i, multiplicities kappa_i.
  /// d == 1 yields the rank-one system.
  static RootSystem z2d(int dim, std::vector<double> kappa);

  /// User-supplied positive roots (rescaled to |alpha| = sqrt 2). The list
  /// must be closed under its own reflections up to sign and the
  /// multiplicities must be constant on orbits.
  static RootSystem general(std::vector<Vec> positive_roots, std::vector<double> kappa,
                            int closure_cap = 64, double tolerance = 1e-10);

  int dim() const { return dim_; }
  RootKind kind() const { return kind_; }
  std::size_t size() const { return roots_.size(); }

  const Vec& root(std::size_t i) const { return roots_[i]; }
  double kappa(std::size_t i) const { return kappa_[i]; }
  const std::vector<double>& kappas() const { return kappa_; }
  double gamma() const { return gamma_; }

  /// Coordinate axis of root i for the orthogonal kinds.
  int axis(std::size_t i) const { return static_cast<int>(i); }
  bool is_orthogonal() const { return kind_ != RootKind::General; }

  /// <alpha_i, x>.
  double pairing(std::size_t i, const Vec& x) const;
  /// r_alpha x = x - <alpha,x> alpha.
  Vec reflect(std::size_t i, const Vec& x) const;
  /// w_kappa(x) = prod |<alpha,x>|^(2 kappa_alpha).
  double weight(const Vec& x) const;
  /// min_alpha |<alpha,x>| / |alpha|.
  double hyperplane_distance(const Vec& x) const;
  /// Open Weyl chamber of the positive subsystem.
  bool in_chamber(const Vec& x) const;

 private:
  RootSystem() = default;
  void finalize();

  int dim_ = 0;
  RootKind kind_ = RootKind::General;
  std::vector<Vec> roots_;
  std::vector<double> kappa_;
  double gamma_ = 0.0;
};

RootSystem make_z2d(int dim, const std::vector<double>& kappa);
Vec reflect(const RootSystem& rs, std::size_t root_index, const Vec& x);
double weight(const RootSystem& rs, const Vec& x);

/// Text config, one `key = value` per line, `#` comments:
///
///     dim = 2
///     kind = "z2d"            # "z2d" | "rank1" | "general"
///     kappa = [0.5, 1.5]
///     roots = [[1, 0], [0, 1]] # general only
///
/// Errors carry the line and column of the offending token.
RootSystem parse_root_system(const std::string& text);
std::string to_config(const RootSystem& rs);

}  // namespace dunkl
