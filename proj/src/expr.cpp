#include "gnb/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>

namespace gnb {

class ExprParser {
 public:
  ExprParser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Expr::NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  using NodePtr = Expr::NodePtr;
  using Op = Expr::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError,
                "column " + std::to_string(pos_ + 1) + ": " + what + " in expression '" + s_ + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (eat('+')) n = Expr::make(Op::add, n, term());
      else if (eat('-')) n = Expr::make(Op::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (eat('*')) n = Expr::make(Op::mul, n, unary());
      else if (eat('/')) n = Expr::make(Op::div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (eat('-')) return Expr::make(Op::neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (eat('^')) return Expr::make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return Expr::make_num(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      std::vector<NodePtr> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')' after arguments of " + id);
      return call(id, args, start);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == id) {
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::var;
        n->index = static_cast<int>(i);
        return n;
      }
    if (id == "pi") return Expr::make_num(std::numbers::pi);
    if (id == "e") return Expr::make_num(std::numbers::e);
    pos_ = start;
    fail("unknown name '" + id + "'");
  }

  NodePtr call(const std::string& id, const std::vector<NodePtr>& args, std::size_t start) {
    auto arity = [&](std::size_t k) {
      if (args.size() != k) {
        pos_ = start;
        fail(id + " expects " + std::to_string(k) + " argument(s)");
      }
    };
    if (id == "pow") {
      arity(2);
      return Expr::make(Op::pow, args[0], args[1]);
    }
    static const std::pair<const char*, Op> unary_fns[] = {{"exp", Op::exp}, {"log", Op::log}, {"sqrt", Op::sqrt},
                                                           {"sin", Op::sin}, {"cos", Op::cos}, {"tan", Op::tan}};
    for (const auto& [fname, op] : unary_fns)
      if (id == fname) {
        arity(1);
        return Expr::make(op, args[0]);
      }
    pos_ = start;
    fail("unknown function '" + id + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
  return Expr(ExprParser(text, variables).parse());
}

Expr Expr::number(double v) { return Expr(make_num(v)); }

Expr Expr::variable(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::var;
  n->index = index;
  return Expr(n);
}

Expr::NodePtr Expr::make_num(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::num;
  n->value = v;
  return n;
}

// Builds a node with constant folding and the identities x+0, x*1, x*0, x^1.
Expr::NodePtr Expr::make(Op op, NodePtr a, NodePtr b) {
  auto is = [](const NodePtr& n, double v) { return n && n->op == Op::num && n->value == v; };
  const bool ca = a && a->op == Op::num;
  const bool cb = !b || b->op == Op::num;
  if (ca && cb && op != Op::num && op != Op::var) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a;
    n->b = b;
    return make_num(eval_node<double>(*n, {}));
  }
  switch (op) {
    case Op::add:
      if (is(a, 0.0)) return b;
      if (is(b, 0.0)) return a;
      break;
    case Op::sub:
      if (is(b, 0.0)) return a;
      if (is(a, 0.0)) return make(Op::neg, b);
      break;
    case Op::mul:
      if (is(a, 0.0) || is(b, 0.0)) return make_num(0.0);
      if (is(a, 1.0)) return b;
      if (is(b, 1.0)) return a;
      break;
    case Op::div:
      if (is(a, 0.0)) return make_num(0.0);
      if (is(b, 1.0)) return a;
      break;
    case Op::pow:
      if (is(b, 1.0)) return a;
      if (is(b, 0.0)) return make_num(1.0);
      break;
    case Op::neg:
      if (a->op == Op::neg) return a->a;
      break;
    default:
      break;
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr::NodePtr Expr::diff(const NodePtr& n, int var) {
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::num: return make_num(0.0);
    case Op::var: return make_num(n->index == var ? 1.0 : 0.0);
    case Op::neg: return make(Op::neg, diff(a, var));
    case Op::add: return make(Op::add, diff(a, var), diff(b, var));
    case Op::sub: return make(Op::sub, diff(a, var), diff(b, var));
    case Op::mul: return make(Op::add, make(Op::mul, diff(a, var), b), make(Op::mul, a, diff(b, var)));
    case Op::div:
      return make(Op::div, make(Op::sub, make(Op::mul, diff(a, var), b), make(Op::mul, a, diff(b, var))),
                  make(Op::mul, b, b));
    case Op::pow: {
      if (b->op == Op::num) {
        // (a^c)' = c a^(c-1) a'
        return make(Op::mul, make(Op::mul, b, make(Op::pow, a, make_num(b->value - 1.0))), diff(a, var));
      }
      // (a^b)' = a^b (b' log a + b a'/a)
      auto inner = make(Op::add, make(Op::mul, diff(b, var), make(Op::log, a)),
                        make(Op::div, make(Op::mul, b, diff(a, var)), a));
      return make(Op::mul, n, inner);
    }
    case Op::exp: return make(Op::mul, n, diff(a, var));
    case Op::log: return make(Op::div, diff(a, var), a);
    case Op::sqrt: return make(Op::div, diff(a, var), make(Op::mul, make_num(2.0), n));
    case Op::sin: return make(Op::mul, make(Op::cos, a), diff(a, var));
    case Op::cos: return make(Op::neg, make(Op::mul, make(Op::sin, a), diff(a, var)));
    case Op::tan: {
      auto c = make(Op::cos, a);
      return make(Op::div, diff(a, var), make(Op::mul, c, c));
    }
  }
  return make_num(0.0);
}

Expr Expr::derivative(int var) const { return Expr(diff(node_, var)); }

bool Expr::is_constant() const { return node_->op == Op::num; }

std::string Expr::print(const NodePtr& n) {
  auto bin = [&](const char* op) { return "(" + print(n->a) + " " + op + " " + print(n->b) + ")"; };
  auto fn = [&](const char* f) { return std::string(f) + "(" + print(n->a) + ")"; };
  switch (n->op) {
    case Op::num: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      return buf;
    }
    case Op::var: return "v" + std::to_string(n->index);
    case Op::neg: return "(-" + print(n->a) + ")";
    case Op::add: return bin("+");
    case Op::sub: return bin("-");
    case Op::mul: return bin("*");
    case Op::div: return bin("/");
    case Op::pow: return bin("^");
    case Op::exp: return fn("exp");
    case Op::log: return fn("log");
    case Op::sqrt: return fn("sqrt");
    case Op::sin: return fn("sin");
    case Op::cos: return fn("cos");
    case Op::tan: return fn("tan");
  }
  return "?";
}

std::string Expr::to_string() const { return print(node_); }

}  // namespace gnb
