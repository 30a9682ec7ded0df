#include "dunkl/rootsys.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <variant>

namespace dunkl {

std::string to_string(RootKind kind) {
  switch (kind) {
    case RootKind::RankOne: return "rank1";
    case RootKind::Z2d: return "z2d";
    case RootKind::General: return "general";
  }
  return "general";
}

void RootSystem::finalize() {
  if (kappa_.size() != roots_.size())
    throw ValidationError("root system: " + std::to_string(roots_.size()) + " roots but " +
                          std::to_string(kappa_.size()) + " multiplicities");
  gamma_ = 0.0;
  for (double k : kappa_) {
    if (!(k >= 0.0) || !std::isfinite(k))
      throw ValidationError("root system: multiplicities must be finite and >= 0, got " +
                            std::to_string(k));
    gamma_ += k;
  }
  for (const Vec& a : roots_) {
    if (std::abs(a.squaredNorm() - 2.0) >= 1e-12)
      throw InvariantViolation("root not normalized to |alpha|^2 = 2");
  }
}

RootSystem RootSystem::z2d(int dim, std::vector<double> kappa) {
  if (dim < 1) throw ValidationError("z2d: dimension must be >= 1");
  if (static_cast<int>(kappa.size()) != dim)
    throw ValidationError("z2d: expected " + std::to_string(dim) + " multiplicities, got " +
                          std::to_string(kappa.size()));
  RootSystem rs;
  rs.dim_ = dim;
  rs.kind_ = dim == 1 ? RootKind::RankOne : RootKind::Z2d;
  for (int i = 0; i < dim; ++i) {
    Vec a = Vec::Zero(dim);
    a[i] = std::sqrt(2.0);
    rs.roots_.push_back(std::move(a));
  }
  rs.kappa_ = std::move(kappa);
  rs.finalize();
  return rs;
}

namespace {

// Index of +-v in list, with the sign found.
std::optional<std::pair<std::size_t, int>> find_up_to_sign(const std::vector<Vec>& list,
                                                            const Vec& v, double tol) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if ((list[i] - v).lpNorm<Eigen::Infinity>() < tol) return std::pair{i, 1};
    if ((list[i] + v).lpNorm<Eigen::Infinity>() < tol) return std::pair{i, -1};
  }
  return std::nullopt;
}

}  // namespace

RootSystem RootSystem::general(std::vector<Vec> positive_roots, std::vector<double> kappa,
                               int closure_cap, double tolerance) {
  if (positive_roots.empty()) throw ValidationError("general root system: no roots given");
  const auto dim = positive_roots.front().size();
  if (dim < 1) throw ValidationError("general root system: zero-dimensional root");
  for (Vec& a : positive_roots) {
    if (a.size() != dim) throw ValidationError("general root system: mixed root dimensions");
    const double n = a.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw ValidationError("general root system: roots must be finite and nonzero");
    a *= std::sqrt(2.0) / n;
  }
  for (std::size_t i = 0; i < positive_roots.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (find_up_to_sign({positive_roots[j]}, positive_roots[i], tolerance))
        throw ValidationError("general root system: duplicate root " +
                              format_point(positive_roots[i]));

  RootSystem rs;
  rs.dim_ = static_cast<int>(dim);
  rs.kind_ = RootKind::General;
  rs.roots_ = positive_roots;
  rs.kappa_ = std::move(kappa);
  rs.finalize();

  // Close the set under its own reflections. Anything new means the user
  // list is not a full positive subsystem.
  std::vector<Vec> closure = positive_roots;
  bool grew = true;
  int rounds = 0;
  while (grew) {
    if (++rounds > closure_cap)
      throw ValidationError("general root system: reflection closure did not stabilize within " +
                            std::to_string(closure_cap) + " rounds (group is not finite)");
    grew = false;
    const std::size_t n = closure.size();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t a = 0; a < n; ++a) {
        const Vec image = closure[a] - closure[a].dot(closure[b]) * closure[b];
        if (!find_up_to_sign(closure, image, tolerance)) {
          closure.push_back(image);
          grew = true;
        }
      }
    }
  }
  if (closure.size() != positive_roots.size())
    throw ValidationError("general root system: root list is not closed under reflections (" +
                          std::to_string(closure.size() - positive_roots.size()) +
                          " roots missing)");

  // G-invariance of kappa on the generating reflections suffices.
  for (std::size_t b = 0; b < rs.roots_.size(); ++b) {
    for (std::size_t a = 0; a < rs.roots_.size(); ++a) {
      const Vec image = rs.roots_[a] - rs.roots_[a].dot(rs.roots_[b]) * rs.roots_[b];
      const auto hit = find_up_to_sign(rs.roots_, image, tolerance);
      if (std::abs(rs.kappa_[hit->first] - rs.kappa_[a]) > tolerance)
        throw ValidationError("general root system: multiplicities are not invariant under "
                              "reflection in root " + std::to_string(b));
    }
  }
  return rs;
}

double RootSystem::pairing(std::size_t i, const Vec& x) const {
  if (is_orthogonal()) return std::sqrt(2.0) * x[static_cast<Eigen::Index>(i)];
  return roots_[i].dot(x);
}

Vec RootSystem::reflect(std::size_t i, const Vec& x) const {
  if (is_orthogonal()) {
    Vec y = x;
    y[static_cast<Eigen::Index>(i)] = -y[static_cast<Eigen::Index>(i)];
    return y;
  }
  return x - roots_[i].dot(x) * roots_[i];
}

double RootSystem::weight(const Vec& x) const {
  double w = 1.0;
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    if (kappa_[i] == 0.0) continue;
    w *= std::pow(std::abs(pairing(i, x)), 2.0 * kappa_[i]);
  }
  return w;
}

double RootSystem::hyperplane_distance(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots_.size(); ++i)
    d = std::min(d, std::abs(pairing(i, x)) / std::sqrt(2.0));
  return d;
}

bool RootSystem::in_chamber(const Vec& x) const {
  for (std::size_t i = 0; i < roots_.size(); ++i)
    if (!(pairing(i, x) > 0.0)) return false;
  return true;
}

RootSystem make_z2d(int dim, const std::vector<double>& kappa) { return RootSystem::z2d(dim, kappa); }

Vec reflect(const RootSystem& rs, std::size_t root_index, const Vec& x) {
  if (root_index >= rs.size()) throw ValidationError("reflect: root index out of range");
  return rs.reflect(root_index, x);
}

double weight(const RootSystem& rs, const Vec& x) { return rs.weight(x); }

// ---------------------------------------------------------------------------
// Config text

namespace {

struct Value {
  std::variant<double, std::string, std::vector<Value>> v;
  int column = 0;
};

class LineParser {
 public:
  LineParser(const std::string& s, int line) : s_(s), line_(line) {}

  Value parse_value() {
    skip_ws();
    Value out;
    out.column = col();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    if (c == '"') {
      ++pos_;
      const auto end = s_.find('"', pos_);
      if (end == std::string::npos) fail("unterminated string");
      out.v = s_.substr(pos_, end - pos_);
      pos_ = end + 1;
    } else if (c == '[') {
      ++pos_;
      std::vector<Value> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(parse_value());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail("expected ',' or ']'");
        }
      }
      out.v = std::move(items);
    } else {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double d = std::strtod(begin, &end);
      if (end == begin) fail("expected a number, string or list");
      pos_ += static_cast<std::size_t>(end - begin);
      out.v = d;
    }
    return out;
  }

  void expect_end() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing input");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col()); }
  int col() const { return static_cast<int>(pos_) + 1; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  std::size_t pos_ = 0;

 private:
  const std::string& s_;
  int line_;
};

struct Entry {
  Value value;
  int line;
};

double as_number(const Entry& e, const std::string& key) {
  if (const double* d = std::get_if<double>(&e.value.v)) return *d;
  throw ParseError("'" + key + "' must be a number", e.line, e.value.column);
}

std::vector<double> as_numbers(const Value& v, int line, const std::string& key) {
  const auto* list = std::get_if<std::vector<Value>>(&v.v);
  if (!list) throw ParseError("'" + key + "' must be a list of numbers", line, v.column);
  std::vector<double> out;
  for (const Value& item : *list) {
    const double* d = std::get_if<double>(&item.v);
    if (!d) throw ParseError("'" + key + "' must contain numbers", line, item.column);
    out.push_back(*d);
  }
  return out;
}

}  // namespace

RootSystem parse_root_system(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    LineParser p(raw, line_no);
    p.skip_ws();
    if (p.pos_ >= raw.size() || raw[p.pos_] == '#') continue;
    const std::size_t key_begin = p.pos_;
    while (p.pos_ < raw.size() &&
           (std::isalnum(static_cast<unsigned char>(raw[p.pos_])) || raw[p.pos_] == '_'))
      ++p.pos_;
    if (p.pos_ == key_begin) p.fail("expected a key");
    const std::string key = raw.substr(key_begin, p.pos_ - key_begin);
    const int key_col = static_cast<int>(key_begin) + 1;
    p.skip_ws();
    if (p.peek() != '=') p.fail("expected '='");
    ++p.pos_;
    Value v = p.parse_value();
    p.expect_end();
    if (key != "dim" && key != "kind" && key != "kappa" && key != "roots")
      throw ParseError("unknown key '" + key + "'", line_no, key_col);
    if (entries.count(key)) throw ParseError("duplicate key '" + key + "'", line_no, key_col);
    entries.emplace(key, Entry{std::move(v), line_no});
  }

  auto require = [&](const std::string& key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ParseError("missing key '" + key + "'", line_no + 1, 1);
    return it->second;
  };

  std::string kind = "z2d";
  if (const auto it = entries.find("kind"); it != entries.end()) {
    const auto* s = std::get_if<std::string>(&it->second.value.v);
    if (!s) throw ParseError("'kind' must be a string", it->second.line, it->second.value.column);
    kind = *s;
    if (kind != "z2d" && kind != "rank1" && kind != "general")
      throw ParseError("unknown kind '" + kind + "'", it->second.line, it->second.value.column);
  }
  const Entry& kappa_entry = require("kappa");
  const std::vector<double> kappa = as_numbers(kappa_entry.value, kappa_entry.line, "kappa");

  int dim = 0;
  if (const auto it = entries.find("dim"); it != entries.end()) {
    const double d = as_number(it->second, "dim");
    if (d < 1 || d != std::floor(d))
      throw ParseError("'dim' must be a positive integer", it->second.line,
                       it->second.value.column);
    dim = static_cast<int>(d);
  }

  if (kind == "general") {
    const Entry& roots_entry = require("roots");
    const auto* list = std::get_if<std::vector<Value>>(&roots_entry.value.v);
    if (!list)
      throw ParseError("'roots' must be a list of vectors", roots_entry.line,
                       roots_entry.value.column);
    std::vector<Vec> roots;
    for (const Value& r : *list) {
      const auto coords = as_numbers(r, roots_entry.line, "roots");
      if (dim && static_cast<int>(coords.size()) != dim)
        throw ParseError("root has wrong dimension", roots_entry.line, r.column);
      roots.push_back(Eigen::Map<const Vec>(coords.data(), static_cast<Eigen::Index>(coords.size())));
    }
    return RootSystem::general(std::move(roots), kappa);
  }
  if (kind == "rank1") dim = dim ? dim : 1;
  if (!dim) dim = static_cast<int>(kappa.size());
  if (kind == "rank1" && dim != 1)
    throw ParseError("rank1 systems have dim = 1", require("dim").line, 1);
  return RootSystem::z2d(dim, kappa);
}

std::string to_config(const RootSystem& rs) {
  std::ostringstream os;
  os.precision(17);
  os << "dim = " << rs.dim() << '\n';
  os << "kind = \"" << to_string(rs.kind()) << "\"\n";
  os << "kappa = [";
  for (std::size_t i = 0; i < rs.size(); ++i) os << (i ? ", " : "") << rs.kappa(i);
  os << "]\n";
  if (rs.kind() == RootKind::General) {
    os << "roots = [";
    for (std::size_t i = 0; i < rs.size(); ++i) {
      os << (i ? ", " : "") << '[';
      for (Eigen::Index j = 0; j < rs.root(i).size(); ++j)
        os << (j ? ", " : "") << rs.root(i)[j];
      os << ']';
    }
    os << "]\n";
  }
  return os.str();
}

}  // namespace dunkl
