#include "dunkl/polyx.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

namespace dunkl {

namespace {
std::atomic<int> g_degree_cap{64};
}

int degree_cap() { return g_degree_cap.load(); }

void set_degree_cap(int cap) {
  if (cap < 1) throw ValidationError("degree cap must be >= 1");
  g_degree_cap.store(cap);
}

std::string to_string(const Polynomial& f) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : f.terms()) {
    const mpq_class mag = abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    os << mag.get_str();
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (!e[k]) continue;
      os << " x" << k + 1;
      if (e[k] > 1) os << '^' << e[k];
    }
  }
  return os.str();
}

namespace {

struct RawTerm {
  mpq_class coeff{1};
  std::vector<std::pair<int, int>> factors;  // (axis, power)
};

class PolyParser {
 public:
  explicit PolyParser(const std::string& s) : s_(s) {}

  std::vector<RawTerm> parse() {
    std::vector<RawTerm> out;
    skip();
    if (pos_ >= s_.size()) fail("empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      RawTerm t = term();
      t.coeff *= sign;
      out.push_back(std::move(t));
      skip();
    }
    return out;
  }

 private:
  RawTerm term() {
    RawTerm t;
    bool any = false;
    for (;;) {
      skip();
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        t.coeff *= number();
      } else if (c == 'x') {
        ++pos_;
        const long axis = integer("variable index");
        if (axis < 1) fail("variable indices start at x1");
        long power = 1;
        if (peek() == '^') {
          ++pos_;
          power = integer("exponent");
        }
        t.factors.emplace_back(static_cast<int>(axis), static_cast<int>(power));
      } else {
        break;
      }
      any = true;
      skip();
      if (peek() == '*') {
        ++pos_;
        skip();
        if (peek() != 'x' && !std::isdigit(static_cast<unsigned char>(peek())))
          fail("expected a factor after '*'");
      }
    }
    if (!any) fail("expected a coefficient or variable");
    return t;
  }

  mpq_class number() {
    const std::size_t begin = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    std::string text = s_.substr(begin, pos_ - begin);
    if (peek() == '/') {
      ++pos_;
      const std::size_t db = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      if (pos_ == db) fail("expected a denominator");
      const std::string den = s_.substr(db, pos_ - db);
      if (mpz_class(den) == 0) fail("zero denominator");
      text += "/" + den;
    }
    mpq_class q(text);
    q.canonicalize();
    return q;
  }

  long integer(const char* what) {
    const std::size_t begin = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == begin) fail(std::string("expected ") + what);
    return std::stol(s_.substr(begin, pos_ - begin));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, 1, static_cast<int>(pos_) + 1);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int dim) {
  const std::vector<RawTerm> raw = PolyParser(text).parse();
  int inferred = 1;
  for (const RawTerm& t : raw)
    for (const auto& [axis, power] : t.factors) inferred = std::max(inferred, axis);
  if (dim == 0) dim = inferred;
  if (inferred > dim)
    throw ParseError("variable x" + std::to_string(inferred) + " exceeds dimension " +
                         std::to_string(dim),
                     1, 1);
  Polynomial p(dim);
  for (const RawTerm& t : raw) {
    Exponent e(dim, 0);
    for (const auto& [axis, power] : t.factors) e[axis - 1] += power;
    p.add_term(e, t.coeff);
  }
  return p;
}

mpq_class eval_exact(const Polynomial& f, const std::vector<mpq_class>& x) { return f.eval(x); }

std::vector<mpq_class> to_rational(const std::vector<double>& v) {
  std::vector<mpq_class> out;
  out.reserve(v.size());
  for (double d : v) {
    if (!std::isfinite(d)) throw ValidationError("cannot convert a non-finite value to a rational");
    out.emplace_back(d);
  }
  return out;
}

Polynomial random_polynomial(std::mt19937_64& rng, int dim, int max_degree, int terms) {
  std::uniform_int_distribution<int> num(-20, 20), den(1, 9), deg(0, max_degree);
  std::uniform_int_distribution<int> axis(0, dim - 1);
  Polynomial p(dim);
  for (int k = 0; k < terms; ++k) {
    Exponent e(dim, 0);
    const int n = deg(rng);
    for (int j = 0; j < n; ++j) ++e[axis(rng)];
    mpq_class c(num(rng), den(rng));
    c.canonicalize();
    p.add_term(e, c);
  }
  return p;
}

RealPolynomial to_real(const Polynomial& f) {
  RealPolynomial out(f.dim());
  for (const auto& [e, c] : f.terms()) out.add_term(e, c.get_d());
  return out;
}

}  // namespace dunkl
