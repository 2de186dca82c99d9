#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sblab/errors.hpp"

namespace sblab {

// Exact rational exponent for power nodes. Always normalized: den > 0, gcd = 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);
  static Rational integer(std::int64_t n) { return Rational(n, 1); }
  // Exact conversion of a decimal literal (mantissa digits + base-10 exponent).
  static Rational from_decimal(const std::string& literal);

  bool is_integer() const { return den == 1; }
  Rational operator-(std::int64_t k) const { return Rational(num - k * den, den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

enum class NodeKind : std::uint8_t {
  Constant,
  Variable,
  Sum,
  Product,
  Quotient,
  Power,
  Negate,
  Function,
};

enum class FuncKind : std::uint8_t { Exp, Ln, Sqrt, Sin, Cos, Tanh };

const char* func_name(FuncKind f);

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double value = 0.0;           // Constant
  std::string name;             // Variable
  std::vector<NodePtr> kids;    // Sum/Product: n-ary; Quotient: 2; Power/Negate/Function: 1
  Rational exponent;            // Power
  FuncKind func = FuncKind::Exp;
};

using Bindings = std::map<std::string, double>;

// Immutable symbolic expression; cheap to copy and safe to share across threads.
class Expr {
 public:
  Expr() : node_(zero_node()) {}

  static Expr constant(double v);
  static Expr variable(std::string name);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr quotient(Expr num, Expr den);
  static Expr pow(Expr base, Rational exponent);
  static Expr negate(Expr e);
  static Expr apply(FuncKind f, Expr arg);

  double eval(const Bindings& b) const;
  Expr diff(const std::string& var) const;
  Expr simplified() const;
  std::set<std::string> free_vars() const;
  std::string str() const;

  // Replaces every occurrence of the named variables by the paired expressions.
  Expr substitute(const std::map<std::string, Expr>& repl) const;

  const ExprNode& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }

 private:
  explicit Expr(NodePtr n) : node_(std::move(n)) {}
  static const NodePtr& zero_node();
  NodePtr node_;
  friend Expr make_expr(NodePtr);
};

Expr make_expr(NodePtr n);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);

inline Expr exp(Expr e) { return Expr::apply(FuncKind::Exp, std::move(e)); }
inline Expr ln(Expr e) { return Expr::apply(FuncKind::Ln, std::move(e)); }
inline Expr sqrt(Expr e) { return Expr::apply(FuncKind::Sqrt, std::move(e)); }
inline Expr sin(Expr e) { return Expr::apply(FuncKind::Sin, std::move(e)); }
inline Expr cos(Expr e) { return Expr::apply(FuncKind::Cos, std::move(e)); }
inline Expr tanh(Expr e) { return Expr::apply(FuncKind::Tanh, std::move(e)); }
inline Expr pow_int(Expr base, std::int64_t n) {
  return Expr::pow(std::move(base), Rational::integer(n));
}

// Scalar kernels shared by the tree and compiled evaluators; both throw
// DomainError on ln(x<=0), sqrt(x<0), division by zero, and 0 to a negative
// or even-root-of-negative power.
double eval_power(double base, const Rational& r);
double eval_function(FuncKind f, double x);

// Parses the expression grammar: identifiers, decimal literals, + - * / ^
// (standard precedence, ^ right-associative with a rational literal exponent),
// the six unary functions, and parentheses.
Expr parse_expr(std::string_view text);

// Shortest round-trip rendering of a double (used by Expr::str and reports).
std::string format_double(double v);

}  // namespace sblab
