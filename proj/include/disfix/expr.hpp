#pragma once

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "disfix/error.hpp"

namespace disfix {

/// One variable binding for expression evaluation.
struct Binding {
  std::string_view name;
  double value;
};

enum class BuiltinFn { Abs, Min, Max, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct LiteralNode {
  double value;
};
struct VariableNode {
  std::string name;
};
struct NegateNode {
  ExprPtr operand;
};
struct BinaryNode {
  char op;  // one of + - * /
  ExprPtr lhs;
  ExprPtr rhs;
};
struct CallNode {
  BuiltinFn fn;
  std::vector<ExprPtr> args;
};

struct ExprNode {
  std::variant<LiteralNode, VariableNode, NegateNode, BinaryNode, CallNode> v;
};

/// Round-trip-exact decimal rendering (up to 17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline const char* builtin_name(BuiltinFn fn) {
  switch (fn) {
    case BuiltinFn::Abs: return "abs";
    case BuiltinFn::Min: return "min";
    case BuiltinFn::Max: return "max";
    case BuiltinFn::Sqrt: return "sqrt";
  }
  return "?";
}

// Precedence levels: additive 1, multiplicative 2, unary minus 3, atoms 4.
inline int node_precedence(const ExprNode& n) {
  if (std::holds_alternative<BinaryNode>(n.v)) {
    char op = std::get<BinaryNode>(n.v).op;
    return (op == '+' || op == '-') ? 1 : 2;
  }
  if (std::holds_alternative<NegateNode>(n.v)) return 3;
  return 4;
}

inline void print_node(const ExprNode& n, int min_prec, std::string& out) {
  int prec = node_precedence(n);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  if (const auto* lit = std::get_if<LiteralNode>(&n.v)) {
    out += format_double(lit->value);
  } else if (const auto* var = std::get_if<VariableNode>(&n.v)) {
    out += var->name;
  } else if (const auto* neg = std::get_if<NegateNode>(&n.v)) {
    out += '-';
    print_node(*neg->operand, 3, out);
  } else if (const auto* bin = std::get_if<BinaryNode>(&n.v)) {
    // Left-associative: the right child needs one level more to keep shape.
    print_node(*bin->lhs, prec, out);
    out += bin->op;
    print_node(*bin->rhs, prec + 1, out);
  } else if (const auto* call = std::get_if<CallNode>(&n.v)) {
    out += builtin_name(call->fn);
    out += '(';
    for (std::size_t i = 0; i < call->args.size(); ++i) {
      if (i > 0) out += ',';
      print_node(*call->args[i], 0, out);
    }
    out += ')';
  }
  if (parens) out += ')';
}

inline std::string print_node(const ExprNode& n) {
  std::string out;
  print_node(n, 0, out);
  return out;
}

inline double eval_node(const ExprNode& n, std::span<const Binding> env) {
  if (const auto* lit = std::get_if<LiteralNode>(&n.v)) {
    return lit->value;
  }
  if (const auto* var = std::get_if<VariableNode>(&n.v)) {
    for (const Binding& b : env) {
      if (b.name == var->name) return b.value;
    }
    throw EvalError("unbound variable '" + var->name + "'");
  }
  if (const auto* neg = std::get_if<NegateNode>(&n.v)) {
    return -eval_node(*neg->operand, env);
  }
  if (const auto* bin = std::get_if<BinaryNode>(&n.v)) {
    double lhs = eval_node(*bin->lhs, env);
    double rhs = eval_node(*bin->rhs, env);
    switch (bin->op) {
      case '+': return lhs + rhs;
      case '-': return lhs - rhs;
      case '*': return lhs * rhs;
      case '/':
        if (rhs == 0.0) {
          throw EvalError("division by zero in '" + print_node(n) + "'");
        }
        return lhs / rhs;
    }
    throw EvalError("unknown operator");
  }
  const auto& call = std::get<CallNode>(n.v);
  switch (call.fn) {
    case BuiltinFn::Abs: return std::fabs(eval_node(*call.args[0], env));
    case BuiltinFn::Min:
      return std::fmin(eval_node(*call.args[0], env),
                       eval_node(*call.args[1], env));
    case BuiltinFn::Max:
      return std::fmax(eval_node(*call.args[0], env),
                       eval_node(*call.args[1], env));
    case BuiltinFn::Sqrt: {
      double arg = eval_node(*call.args[0], env);
      if (arg < 0.0) {
        throw EvalError("sqrt of negative value in '" + print_node(n) + "'");
      }
      return std::sqrt(arg);
    }
  }
  throw EvalError("unknown builtin");
}

inline void collect_variables(const ExprNode& n, std::set<std::string>& out) {
  if (const auto* var = std::get_if<VariableNode>(&n.v)) {
    out.insert(var->name);
  } else if (const auto* neg = std::get_if<NegateNode>(&n.v)) {
    collect_variables(*neg->operand, out);
  } else if (const auto* bin = std::get_if<BinaryNode>(&n.v)) {
    collect_variables(*bin->lhs, out);
    collect_variables(*bin->rhs, out);
  } else if (const auto* call = std::get_if<CallNode>(&n.v)) {
    for (const auto& a : call->args) collect_variables(*a, out);
  }
}

}  // namespace detail

/// An immutable arithmetic expression.
///
/// Grammar (standard precedence, left associative):
///   expr    := term (('+'|'-') term)*
///   term    := unary (('*'|'/') unary)*
///   unary   := '-' unary | primary
///   primary := number | identifier | fn '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Numbers are decimal with optional fraction and exponent. Identifiers
/// match [a-z][a-z0-9_]*; abs, min, max, sqrt are reserved function names.
/// There is no implicit multiplication.
class Expression {
public:
  Expression() = default;

  static Expression parse(std::string_view source);

  /// IEEE double evaluation under the given bindings. Deterministic:
  /// identical bindings produce bit-identical results.
  double evaluate(std::span<const Binding> env) const {
    require_valid();
    return detail::eval_node(*root_, env);
  }
  double evaluate(std::initializer_list<Binding> env) const {
    return evaluate(std::span<const Binding>(env.begin(), env.size()));
  }

  /// Exactly the set of variable names appearing in the expression.
  std::set<std::string> free_variables() const {
    require_valid();
    std::set<std::string> out;
    detail::collect_variables(*root_, out);
    return out;
  }

  /// Canonical text form; parse(str()) reproduces the same tree.
  std::string str() const {
    require_valid();
    return detail::print_node(*root_);
  }

  bool valid() const noexcept { return root_ != nullptr; }
  const ExprPtr& root() const { return root_; }

private:
  explicit Expression(ExprPtr root) : root_(std::move(root)) {}

  void require_valid() const {
    if (!root_) throw EvalError("empty expression");
  }

  ExprPtr root_;
};

namespace detail {

class ExprParser {
public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  ExprPtr parse() {
    skip_ws();
    if (at_end()) fail("expected expression");
    ExprPtr e = parse_expr();
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
    return e;
  }

private:
  static bool is_ident_start(char c) { return c >= 'a' && c <= 'z'; }
  static bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_ws() {
    while (!at_end() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                         src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(pos_, "syntax error: " + message);
  }
  [[noreturn]] void fail_at(std::size_t at, const std::string& message) const {
    throw ParseError(at, "syntax error: " + message);
  }

  bool consume(char c) {
    skip_ws();
    if (!at_end() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!consume(c)) fail(std::string("expected ") + what);
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      ExprPtr rhs = parse_term();
      lhs = make(BinaryNode{c, std::move(lhs), std::move(rhs)});
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      ExprPtr rhs = parse_unary();
      lhs = make(BinaryNode{c, std::move(lhs), std::move(rhs)});
    }
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      return make(NegateNode{parse_unary()});
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (at_end()) fail("expected expression");
    char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr inner = parse_expr();
      expect(')', "')'");
      return inner;
    }
    if (is_digit(c)) return parse_number();
    if (is_ident_start(c)) return parse_identifier_or_call();
    fail("expected expression");
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    while (!at_end() && is_digit(src_[pos_])) ++pos_;
    if (!at_end() && src_[pos_] == '.') {
      ++pos_;
      if (at_end() || !is_digit(src_[pos_])) fail("expected digits after '.'");
      while (!at_end() && is_digit(src_[pos_])) ++pos_;
    }
    if (!at_end() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (!at_end() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (at_end() || !is_digit(src_[pos_])) fail("expected exponent digits");
      while (!at_end() && is_digit(src_[pos_])) ++pos_;
    }
    std::string token(src_.substr(start, pos_ - start));
    double value = std::strtod(token.c_str(), nullptr);
    return make(LiteralNode{value});
  }

  ExprPtr parse_identifier_or_call() {
    std::size_t start = pos_;
    while (!at_end() && is_ident_char(src_[pos_])) ++pos_;
    std::string name(src_.substr(start, pos_ - start));

    bool reserved = name == "abs" || name == "min" || name == "max" ||
                    name == "sqrt";
    skip_ws();
    if (!at_end() && src_[pos_] == '(') {
      if (!reserved) {
        fail_at(start, "unknown function '" + name + "'");
      }
      ++pos_;
      std::vector<ExprPtr> args;
      args.push_back(parse_expr());
      while (consume(',')) args.push_back(parse_expr());
      expect(')', "',' or ')'");
      BuiltinFn fn = name == "abs"   ? BuiltinFn::Abs
                     : name == "min" ? BuiltinFn::Min
                     : name == "max" ? BuiltinFn::Max
                                     : BuiltinFn::Sqrt;
      std::size_t arity = (fn == BuiltinFn::Min || fn == BuiltinFn::Max) ? 2 : 1;
      if (args.size() != arity) {
        fail_at(start, name + " expects " + std::to_string(arity) +
                           " argument" + (arity == 1 ? "" : "s"));
      }
      return make(CallNode{fn, std::move(args)});
    }
    if (reserved) {
      fail_at(start, "reserved function name '" + name + "' used as a variable");
    }
    return make(VariableNode{std::move(name)});
  }

  template <class NodeT>
  static ExprPtr make(NodeT&& node) {
    return std::make_shared<const ExprNode>(
        ExprNode{std::forward<NodeT>(node)});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression Expression::parse(std::string_view source) {
  if (source.empty()) throw ParseError(0, "syntax error: empty source");
  detail::ExprParser parser(source);
  return Expression(parser.parse());
}

}  // namespace disfix
