#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "phifem/mesh.hpp"

namespace phifem {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient mini-language: numbers, x, y, d (distance to the boundary),
/// pi, operators + - * / ^, unary -, and min, max, sin, cos, exp, log,
/// sqrt, abs.  '^' binds right.
class Expression {
 public:
  Expression() = default;
  /// Throws ExpressionError with a caret position on parse failure.
  static Expression parse(const std::string& text);

  double eval(double x, double y = 0.0, double d = 0.0) const;
  bool empty() const { return !root_; }
  const std::string& text() const { return text_; }
  /// Whether the expression references the distance symbol d.
  bool uses_distance() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace phifem
