#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "reeb/core4.hpp"

namespace reeb {

/// Real polynomial of degree <= 4 in (x1, y1, x2, y2).
class Polynomial4 {
 public:
  struct Term {
    std::array<int, 4> exponents{};
    double coefficient = 0.0;
  };

  Polynomial4() = default;
  explicit Polynomial4(std::vector<Term> terms);

  /// Parses sums like "x1^2 + y1^2 + 0.5*x2^2 - 0.1*x1*y2^3".
  static Polynomial4 parse(std::string_view text);

  double value(const Vec4d& p) const;
  Vec4d gradient(const Vec4d& p) const;
  Mat4d hessian(const Vec4d& p) const;

  int degree() const;
  const std::vector<Term>& terms() const { return terms_; }
  std::string to_string() const;

 private:
  std::vector<Term> terms_;
};

}  // namespace reeb
