#include "reeb/polynomial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace reeb {

namespace {

constexpr std::array<const char*, 4> kVariableNames{"x1", "y1", "x2", "y2"};

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// d^order/dx^order of x^n, evaluated at x.
double dpow(double x, int n, int order) {
  if (order > n) return 0.0;
  double c = 1.0;
  for (int k = 0; k < order; ++k) c *= (n - k);
  return c * ipow(x, n - order);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  std::vector<Polynomial4::Term> run() {
    std::vector<Polynomial4::Term> out;
    skip_ws();
    if (pos_ == s_.size()) fail("empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      auto term = parse_term();
      term.coefficient *= sign;
      out.push_back(term);
      first = false;
      skip_ws();
    }
    return out;
  }

 private:
  Polynomial4::Term parse_term() {
    Polynomial4::Term t;
    t.coefficient = 1.0;
    bool have_factor = false;
    while (true) {
      skip_ws();
      if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
        t.coefficient *= parse_number();
      } else if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(peek()))) {
        const int var = parse_variable();
        int exponent = 1;
        skip_ws();
        if (pos_ < s_.size() && peek() == '^') {
          ++pos_;
          skip_ws();
          exponent = static_cast<int>(parse_number());
        }
        t.exponents[var] += exponent;
      } else {
        fail("expected a number or a variable");
      }
      have_factor = true;
      skip_ws();
      if (pos_ < s_.size() && peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    if (!have_factor) fail("empty term");
    return t;
  }

  double parse_number() {
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  int parse_variable() {
    for (int k = 0; k < 4; ++k) {
      const std::string_view name = kVariableNames[k];
      if (s_.substr(pos_, name.size()) == name) {
        pos_ += name.size();
        return k;
      }
    }
    fail("unknown variable (expected x1, y1, x2 or y2)");
  }

  char peek() const { return s_[pos_]; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("polynomial: " + what + " at column " + std::to_string(pos_ + 1));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial4::Polynomial4(std::vector<Term> terms) {
  std::map<std::array<int, 4>, double> merged;
  for (const auto& t : terms) {
    for (int e : t.exponents)
      if (e < 0) throw DomainError("polynomial: negative exponent");
    merged[t.exponents] += t.coefficient;
  }
  for (const auto& [e, c] : merged)
    if (c != 0.0) terms_.push_back({e, c});
  if (degree() > 4) throw DomainError("polynomial: degree exceeds 4");
}

Polynomial4 Polynomial4::parse(std::string_view text) { return Polynomial4(Parser(text).run()); }

int Polynomial4::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.exponents[0] + t.exponents[1] + t.exponents[2] + t.exponents[3]);
  return d;
}

double Polynomial4::value(const Vec4d& p) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double m = t.coefficient;
    for (int k = 0; k < 4; ++k) m *= ipow(p(k), t.exponents[k]);
    sum += m;
  }
  return sum;
}

Vec4d Polynomial4::gradient(const Vec4d& p) const {
  Vec4d g = Vec4d::Zero();
  for (const auto& t : terms_) {
    for (int i = 0; i < 4; ++i) {
      double m = t.coefficient;
      for (int k = 0; k < 4; ++k) m *= dpow(p(k), t.exponents[k], k == i ? 1 : 0);
      g(i) += m;
    }
  }
  return g;
}

Mat4d Polynomial4::hessian(const Vec4d& p) const {
  Mat4d h = Mat4d::Zero();
  for (const auto& t : terms_) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        double m = t.coefficient;
        for (int k = 0; k < 4; ++k) m *= dpow(p(k), t.exponents[k], (k == i) + (k == j));
        h(i, j) += m;
      }
    }
  }
  return h.selfadjointView<Eigen::Upper>();
}

std::string Polynomial4::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& t : terms_) {
    os << (first ? (t.coefficient < 0 ? "-" : "") : (t.coefficient < 0 ? " - " : " + "));
    os << std::abs(t.coefficient);
    for (int k = 0; k < 4; ++k) {
      if (t.exponents[k] == 0) continue;
      os << '*' << kVariableNames[k];
      if (t.exponents[k] > 1) os << '^' << t.exponents[k];
    }
    first = false;
  }
  return first ? "0" : os.str();
}

}  // namespace reeb
