#pragma once

// Small arithmetic expression language for scenario files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: exp log sqrt sin cos tan pow. Constants: pi, e.
// Expressions evaluate on double and on dual numbers, and differentiate
// symbolically.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gnb/dual.hpp"
#include "gnb/error.hpp"

namespace gnb {

class Expr {
 public:
  enum class Op { num, var, neg, add, sub, mul, div, pow, exp, log, sqrt, sin, cos, tan };

  /// Throws ParseError with the column (1-based) of the offending token.
  static Expr parse(const std::string& text, const std::vector<std::string>& variables);

  static Expr number(double v);
  static Expr variable(int index);

  template <class T>
  T eval(std::span<const T> vars) const {
    return eval_node<T>(*node_, vars);
  }
  double eval(double v) const {
    const double vars[1] = {v};
    return eval<double>(std::span<const double>(vars, 1));
  }

  Expr derivative(int var) const;
  std::string to_string() const;
  bool is_constant() const;

 private:
  struct Node {
    Op op = Op::num;
    double value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr);
  static NodePtr make_num(double v);
  static NodePtr diff(const NodePtr& n, int var);
  static std::string print(const NodePtr& n);

  template <class T>
  static T eval_node(const Node& n, std::span<const T> vars) {
    using std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt, std::tan;
    switch (n.op) {
      case Op::num: return T(n.value);
      case Op::var: return vars[static_cast<std::size_t>(n.index)];
      case Op::neg: return -eval_node<T>(*n.a, vars);
      case Op::add: return eval_node<T>(*n.a, vars) + eval_node<T>(*n.b, vars);
      case Op::sub: return eval_node<T>(*n.a, vars) - eval_node<T>(*n.b, vars);
      case Op::mul: return eval_node<T>(*n.a, vars) * eval_node<T>(*n.b, vars);
      case Op::div: return eval_node<T>(*n.a, vars) / eval_node<T>(*n.b, vars);
      case Op::pow:
        if (n.b->op == Op::num) return pow(eval_node<T>(*n.a, vars), n.b->value);
        return pow(eval_node<T>(*n.a, vars), eval_node<T>(*n.b, vars));
      case Op::exp: return exp(eval_node<T>(*n.a, vars));
      case Op::log: return log(eval_node<T>(*n.a, vars));
      case Op::sqrt: return sqrt(eval_node<T>(*n.a, vars));
      case Op::sin: return sin(eval_node<T>(*n.a, vars));
      case Op::cos: return cos(eval_node<T>(*n.a, vars));
      case Op::tan: return tan(eval_node<T>(*n.a, vars));
    }
    return T(0.0);
  }

  friend class ExprParser;
  NodePtr node_;
};

}  // namespace gnb
