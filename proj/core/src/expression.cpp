#include "phifem/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace phifem {

namespace {

enum class Op {
  Const, VarX, VarY, VarD,
  Add, Sub, Mul, Div, Pow, Neg,
  Min, Max, Sin, Cos, Exp, Log, Sqrt, Abs,
};

int arity(Op op) {
  switch (op) {
    case Op::Const: case Op::VarX: case Op::VarY: case Op::VarD: return 0;
    case Op::Neg: case Op::Sin: case Op::Cos: case Op::Exp:
    case Op::Log: case Op::Sqrt: case Op::Abs: return 1;
    default: return 2;
  }
}

}  // namespace

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->value = v;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream os;
    os << "expression error at position " << pos_ << " in '" << s_ << "': " << why;
    throw ExpressionError(os.str());
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (eat('+')) lhs = make(Op::Add, lhs, term());
      else if (eat('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (true) {
      if (eat('*')) lhs = make(Op::Mul, lhs, factor());
      else if (eat('/')) lhs = make(Op::Div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (eat('^')) return make(Op::Pow, base, factor());  // right associative
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    fail("expected number, name or '('");
  }

  NodePtr number() {
    std::size_t end = pos_;
    const char* begin = s_.c_str() + pos_;
    char* stop = nullptr;
    const double v = std::strtod(begin, &stop);
    if (stop == begin) fail("bad number");
    end = pos_ + static_cast<std::size_t>(stop - begin);
    pos_ = end;
    return make(Op::Const, nullptr, nullptr, v);
  }

  NodePtr ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "x") return make(Op::VarX);
    if (name == "y") return make(Op::VarY);
    if (name == "d") return make(Op::VarD);
    if (name == "pi") return make(Op::Const, nullptr, nullptr, M_PI);

    const auto fn = [&](Op op) {
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr a = expr();
      NodePtr b;
      if (arity(op) == 2) {
        if (!eat(',')) fail(name + " takes two arguments");
        b = expr();
      }
      if (!eat(')')) fail("expected ')'");
      return make(op, a, b);
    };
    if (name == "min") return fn(Op::Min);
    if (name == "max") return fn(Op::Max);
    if (name == "sin") return fn(Op::Sin);
    if (name == "cos") return fn(Op::Cos);
    if (name == "exp") return fn(Op::Exp);
    if (name == "log") return fn(Op::Log);
    if (name == "sqrt") return fn(Op::Sqrt);
    if (name == "abs") return fn(Op::Abs);
    fail("unknown name '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, double x, double y, double d) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::VarD: return d;
    case Op::Neg: return -eval_node(*n.a, x, y, d);
    case Op::Add: return eval_node(*n.a, x, y, d) + eval_node(*n.b, x, y, d);
    case Op::Sub: return eval_node(*n.a, x, y, d) - eval_node(*n.b, x, y, d);
    case Op::Mul: return eval_node(*n.a, x, y, d) * eval_node(*n.b, x, y, d);
    case Op::Div: return eval_node(*n.a, x, y, d) / eval_node(*n.b, x, y, d);
    case Op::Pow: return std::pow(eval_node(*n.a, x, y, d), eval_node(*n.b, x, y, d));
    case Op::Min: return std::min(eval_node(*n.a, x, y, d), eval_node(*n.b, x, y, d));
    case Op::Max: return std::max(eval_node(*n.a, x, y, d), eval_node(*n.b, x, y, d));
    case Op::Sin: return std::sin(eval_node(*n.a, x, y, d));
    case Op::Cos: return std::cos(eval_node(*n.a, x, y, d));
    case Op::Exp: return std::exp(eval_node(*n.a, x, y, d));
    case Op::Log: return std::log(eval_node(*n.a, x, y, d));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, x, y, d));
    case Op::Abs: return std::abs(eval_node(*n.a, x, y, d));
  }
  return 0.0;
}

bool uses_d(const Expression::Node& n) {
  if (n.op == Op::VarD) return true;
  if (n.a && uses_d(*n.a)) return true;
  if (n.b && uses_d(*n.b)) return true;
  return false;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::eval(double x, double y, double d) const {
  if (!root_) throw ExpressionError("eval of empty expression");
  return eval_node(*root_, x, y, d);
}

bool Expression::uses_distance() const { return root_ && uses_d(*root_); }

}  // namespace phifem
