#include "sblab/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <utility>

namespace sblab {

namespace {

NodePtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

bool is_const(const NodePtr& n, double v) {
  return n->kind == NodeKind::Constant && n->value == v;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw Error("rational exponent with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
}

Rational Rational::from_decimal(const std::string& literal) {
  // literal: digits [. digits] [e[+-]digits]
  std::int64_t mantissa = 0;
  int frac_digits = 0;
  std::size_t i = 0;
  bool any = false;
  auto push_digit = [&](char c) {
    if (mantissa > (INT64_MAX - 9) / 10) throw Error("exponent literal too large: " + literal);
    mantissa = mantissa * 10 + (c - '0');
    any = true;
  };
  for (; i < literal.size() && literal[i] >= '0' && literal[i] <= '9'; ++i) push_digit(literal[i]);
  if (i < literal.size() && literal[i] == '.') {
    ++i;
    for (; i < literal.size() && literal[i] >= '0' && literal[i] <= '9'; ++i) {
      push_digit(literal[i]);
      ++frac_digits;
    }
  }
  int exp10 = 0;
  if (i < literal.size() && (literal[i] == 'e' || literal[i] == 'E')) {
    ++i;
    int sign = 1;
    if (i < literal.size() && (literal[i] == '+' || literal[i] == '-')) {
      if (literal[i] == '-') sign = -1;
      ++i;
    }
    int e = 0;
    for (; i < literal.size() && literal[i] >= '0' && literal[i] <= '9'; ++i)
      e = e * 10 + (literal[i] - '0');
    exp10 = sign * e;
  }
  if (!any || i != literal.size()) throw Error("bad numeric literal: " + literal);
  std::int64_t num = mantissa, den = 1;
  int shift = exp10 - frac_digits;
  for (; shift > 0; --shift) {
    if (num > INT64_MAX / 10) throw Error("exponent literal too large: " + literal);
    num *= 10;
  }
  for (; shift < 0; ++shift) {
    if (den > INT64_MAX / 10) throw Error("exponent literal too small: " + literal);
    den *= 10;
  }
  return Rational(num, den);
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

const char* func_name(FuncKind f) {
  switch (f) {
    case FuncKind::Exp: return "exp";
    case FuncKind::Ln: return "ln";
    case FuncKind::Sqrt: return "sqrt";
    case FuncKind::Sin: return "sin";
    case FuncKind::Cos: return "cos";
    case FuncKind::Tanh: return "tanh";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Expr make_expr(NodePtr n) { return Expr(std::move(n)); }

const NodePtr& Expr::zero_node() {
  static const NodePtr zero = make_node({.kind = NodeKind::Constant, .value = 0.0});
  return zero;
}

Expr Expr::constant(double v) { return make_expr(make_node({.kind = NodeKind::Constant, .value = v})); }

Expr Expr::variable(std::string name) {
  ExprNode n{.kind = NodeKind::Variable};
  n.name = std::move(name);
  return make_expr(make_node(std::move(n)));
}

static std::vector<NodePtr> take_ptrs(std::vector<Expr> kids) {
  std::vector<NodePtr> out;
  out.reserve(kids.size());
  for (auto& k : kids) out.push_back(k.ptr());
  return out;
}

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return constant(0.0);
  if (terms.size() == 1) return terms[0];
  ExprNode n{.kind = NodeKind::Sum};
  n.kids = take_ptrs(std::move(terms));
  return make_expr(make_node(std::move(n)));
}

Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return constant(1.0);
  if (factors.size() == 1) return factors[0];
  ExprNode n{.kind = NodeKind::Product};
  n.kids = take_ptrs(std::move(factors));
  return make_expr(make_node(std::move(n)));
}

Expr Expr::quotient(Expr num, Expr den) {
  ExprNode n{.kind = NodeKind::Quotient};
  n.kids = {num.ptr(), den.ptr()};
  return make_expr(make_node(std::move(n)));
}

Expr Expr::pow(Expr base, Rational exponent) {
  ExprNode n{.kind = NodeKind::Power};
  n.kids = {base.ptr()};
  n.exponent = exponent;
  return make_expr(make_node(std::move(n)));
}

Expr Expr::negate(Expr e) {
  // Folding keeps negative literals as constants, so rendering and
  // reparsing agree on where the sign lives.
  if (e.node().kind == NodeKind::Constant)
    return Expr::constant(-e.node().value);
  ExprNode n{.kind = NodeKind::Negate};
  n.kids = {e.ptr()};
  return make_expr(make_node(std::move(n)));
}

Expr Expr::apply(FuncKind f, Expr arg) {
  ExprNode n{.kind = NodeKind::Function};
  n.kids = {arg.ptr()};
  n.func = f;
  return make_expr(make_node(std::move(n)));
}

Expr operator+(Expr a, Expr b) { return Expr::sum({std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return Expr::sum({std::move(a), Expr::negate(std::move(b))}); }
Expr operator*(Expr a, Expr b) { return Expr::product({std::move(a), std::move(b)}); }
Expr operator/(Expr a, Expr b) { return Expr::quotient(std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::negate(std::move(a)); }

// ---------------------------------------------------------------------------
// evaluation

double eval_power(double base, const Rational& r) {
  if (r.is_integer()) {
    if (base == 0.0 && r.num < 0) throw DomainError("power", base);
    return std::pow(base, static_cast<double>(r.num));
  }
  if (base < 0.0) {
    if (r.den % 2 == 1) {
      const double mag = std::pow(-base, r.to_double());
      return (r.num % 2 == 0) ? mag : -mag;
    }
    throw DomainError("power", base);
  }
  if (base == 0.0 && r.num < 0) throw DomainError("power", base);
  return std::pow(base, r.to_double());
}

double eval_function(FuncKind f, double x) {
  switch (f) {
    case FuncKind::Exp: return std::exp(x);
    case FuncKind::Ln:
      if (x <= 0.0) throw DomainError("ln", x);
      return std::log(x);
    case FuncKind::Sqrt:
      if (x < 0.0) throw DomainError("sqrt", x);
      return std::sqrt(x);
    case FuncKind::Sin: return std::sin(x);
    case FuncKind::Cos: return std::cos(x);
    case FuncKind::Tanh: return std::tanh(x);
  }
  throw Error("unreachable function kind");
}

namespace {

double eval_node(const ExprNode& n, const Bindings& b) {
  switch (n.kind) {
    case NodeKind::Constant:
      return n.value;
    case NodeKind::Variable: {
      auto it = b.find(n.name);
      if (it == b.end()) throw UnboundVariableError(n.name);
      return it->second;
    }
    case NodeKind::Sum: {
      double acc = 0.0;
      for (const auto& k : n.kids) acc += eval_node(*k, b);
      return acc;
    }
    case NodeKind::Product: {
      double acc = 1.0;
      for (const auto& k : n.kids) acc *= eval_node(*k, b);
      return acc;
    }
    case NodeKind::Quotient: {
      const double num = eval_node(*n.kids[0], b);
      const double den = eval_node(*n.kids[1], b);
      if (den == 0.0) throw DomainError("quotient", den);
      return num / den;
    }
    case NodeKind::Power:
      return eval_power(eval_node(*n.kids[0], b), n.exponent);
    case NodeKind::Negate:
      return -eval_node(*n.kids[0], b);
    case NodeKind::Function:
      return eval_function(n.func, eval_node(*n.kids[0], b));
  }
  throw Error("unreachable node kind");
}

}  // namespace

double Expr::eval(const Bindings& b) const { return eval_node(*node_, b); }

// ---------------------------------------------------------------------------
// differentiation (purely structural)

namespace {

Expr diff_node(const NodePtr& n, const std::string& v);

Expr diff_function(const ExprNode& n, const std::string& v) {
  Expr arg = make_expr(n.kids[0]);
  Expr darg = diff_node(n.kids[0], v);
  switch (n.func) {
    case FuncKind::Exp:
      return Expr::apply(FuncKind::Exp, arg) * darg;
    case FuncKind::Ln:
      return darg / arg;
    case FuncKind::Sqrt:
      return darg / (Expr::constant(2.0) * Expr::apply(FuncKind::Sqrt, arg));
    case FuncKind::Sin:
      return Expr::apply(FuncKind::Cos, arg) * darg;
    case FuncKind::Cos:
      return Expr::negate(Expr::apply(FuncKind::Sin, arg)) * darg;
    case FuncKind::Tanh: {
      Expr t = Expr::apply(FuncKind::Tanh, arg);
      return (Expr::constant(1.0) - t * t) * darg;
    }
  }
  throw Error("unreachable function kind");
}

Expr diff_node(const NodePtr& np, const std::string& v) {
  const ExprNode& n = *np;
  switch (n.kind) {
    case NodeKind::Constant:
      return Expr::constant(0.0);
    case NodeKind::Variable:
      return Expr::constant(n.name == v ? 1.0 : 0.0);
    case NodeKind::Sum: {
      std::vector<Expr> parts;
      parts.reserve(n.kids.size());
      for (const auto& k : n.kids) parts.push_back(diff_node(k, v));
      return Expr::sum(std::move(parts));
    }
    case NodeKind::Product: {
      std::vector<Expr> terms;
      terms.reserve(n.kids.size());
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        std::vector<Expr> factors;
        factors.reserve(n.kids.size());
        for (std::size_t j = 0; j < n.kids.size(); ++j)
          factors.push_back(i == j ? diff_node(n.kids[j], v) : make_expr(n.kids[j]));
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case NodeKind::Quotient: {
      Expr a = make_expr(n.kids[0]), b = make_expr(n.kids[1]);
      Expr da = diff_node(n.kids[0], v), db = diff_node(n.kids[1], v);
      return (da * b - a * db) / Expr::pow(b, Rational::integer(2));
    }
    case NodeKind::Power: {
      Expr base = make_expr(n.kids[0]);
      Expr dbase = diff_node(n.kids[0], v);
      if (n.exponent.num == 0) return Expr::constant(0.0);
      Expr coeff = Expr::constant(n.exponent.to_double());
      return coeff * Expr::pow(base, n.exponent - 1) * dbase;
    }
    case NodeKind::Negate:
      return Expr::negate(diff_node(n.kids[0], v));
    case NodeKind::Function:
      return diff_function(n, v);
  }
  throw Error("unreachable node kind");
}

}  // namespace

Expr Expr::diff(const std::string& var) const { return diff_node(node_, var); }

// ---------------------------------------------------------------------------
// free variables, substitution

namespace {

void collect_vars(const ExprNode& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::Variable) out.insert(n.name);
  for (const auto& k : n.kids) collect_vars(*k, out);
}

Expr substitute_node(const NodePtr& np, const std::map<std::string, Expr>& repl) {
  const ExprNode& n = *np;
  if (n.kind == NodeKind::Variable) {
    auto it = repl.find(n.name);
    return it == repl.end() ? make_expr(np) : it->second;
  }
  if (n.kids.empty()) return make_expr(np);
  ExprNode copy = n;
  copy.kids.clear();
  for (const auto& k : n.kids) copy.kids.push_back(substitute_node(k, repl).ptr());
  return make_expr(std::make_shared<const ExprNode>(std::move(copy)));
}

}  // namespace

std::set<std::string> Expr::free_vars() const {
  std::set<std::string> out;
  collect_vars(*node_, out);
  return out;
}

Expr Expr::substitute(const std::map<std::string, Expr>& repl) const {
  return substitute_node(node_, repl);
}

// ---------------------------------------------------------------------------
// simplification (best effort, evaluation-preserving)

namespace {

Expr simplify_node(const NodePtr& np);

Expr simplify_sum(const ExprNode& n) {
  std::vector<Expr> terms;
  double const_acc = 0.0;
  bool have_const = false;
  auto absorb = [&](auto&& self, const NodePtr& kp) -> void {
    Expr k = simplify_node(kp);
    const ExprNode& kn = k.node();
    if (kn.kind == NodeKind::Sum) {
      for (const auto& g : kn.kids) self(self, g);
    } else if (kn.kind == NodeKind::Constant) {
      const_acc += kn.value;
      have_const = true;
    } else {
      terms.push_back(k);
    }
  };
  for (const auto& k : n.kids) absorb(absorb, k);
  if (have_const && (const_acc != 0.0 || terms.empty()) && std::isfinite(const_acc))
    terms.push_back(Expr::constant(const_acc));
  else if (have_const && !std::isfinite(const_acc))
    terms.push_back(Expr::constant(const_acc));
  return Expr::sum(std::move(terms));
}

Expr simplify_product(const ExprNode& n) {
  std::vector<Expr> factors;
  double const_acc = 1.0;
  bool have_const = false, saw_zero = false;
  auto absorb = [&](auto&& self, const NodePtr& kp) -> void {
    Expr k = simplify_node(kp);
    const ExprNode& kn = k.node();
    if (kn.kind == NodeKind::Product) {
      for (const auto& g : kn.kids) self(self, g);
    } else if (kn.kind == NodeKind::Constant) {
      if (kn.value == 0.0) saw_zero = true;
      const_acc *= kn.value;
      have_const = true;
    } else {
      factors.push_back(k);
    }
  };
  for (const auto& k : n.kids) absorb(absorb, k);
  if (saw_zero) return Expr::constant(0.0);
  if (have_const && (const_acc != 1.0 || factors.empty()) && std::isfinite(const_acc))
    factors.insert(factors.begin(), Expr::constant(const_acc));
  else if (have_const && !std::isfinite(const_acc))
    factors.insert(factors.begin(), Expr::constant(const_acc));
  return Expr::product(std::move(factors));
}

Expr simplify_node(const NodePtr& np) {
  const ExprNode& n = *np;
  switch (n.kind) {
    case NodeKind::Constant:
    case NodeKind::Variable:
      return make_expr(np);
    case NodeKind::Sum:
      return simplify_sum(n);
    case NodeKind::Product:
      return simplify_product(n);
    case NodeKind::Quotient: {
      Expr a = simplify_node(n.kids[0]);
      Expr b = simplify_node(n.kids[1]);
      const ExprNode& bn = b.node();
      if (bn.kind == NodeKind::Constant && bn.value == 1.0) return a;
      if (a.node().kind == NodeKind::Constant && bn.kind == NodeKind::Constant &&
          bn.value != 0.0) {
        const double q = a.node().value / bn.value;
        if (std::isfinite(q)) return Expr::constant(q);
      }
      return Expr::quotient(a, b);
    }
    case NodeKind::Power: {
      Expr base = simplify_node(n.kids[0]);
      if (n.exponent == Rational::integer(1)) return base;
      if (n.exponent == Rational::integer(0)) return Expr::constant(1.0);
      if (base.node().kind == NodeKind::Constant) {
        bool exact = true;
        double v = 0.0;
        try {
          v = eval_power(base.node().value, n.exponent);
        } catch (const DomainError&) {
          exact = false;
        }
        if (exact && std::isfinite(v)) return Expr::constant(v);
      }
      return Expr::pow(base, n.exponent);
    }
    case NodeKind::Negate: {
      Expr a = simplify_node(n.kids[0]);
      const ExprNode& an = a.node();
      if (an.kind == NodeKind::Constant) return Expr::constant(-an.value);
      if (an.kind == NodeKind::Negate) return make_expr(an.kids[0]);
      return Expr::negate(a);
    }
    case NodeKind::Function: {
      Expr a = simplify_node(n.kids[0]);
      if (a.node().kind == NodeKind::Constant) {
        try {
          const double v = eval_function(n.func, a.node().value);
          if (std::isfinite(v)) return Expr::constant(v);
        } catch (const DomainError&) {
        }
      }
      return Expr::apply(n.func, a);
    }
  }
  throw Error("unreachable node kind");
}

}  // namespace

Expr Expr::simplified() const { return simplify_node(node_); }

// ---------------------------------------------------------------------------
// rendering

namespace {

// Precedence levels: 0 sum, 1 product/quotient, 2 unary minus, 3 power, 4 atom.
void render(const ExprNode& n, std::string& out);

void render_wrapped(const ExprNode& n, std::string& out, bool wrap) {
  if (wrap) {
    out += '(';
    render(n, out);
    out += ')';
  } else {
    render(n, out);
  }
}

bool is_atom(const ExprNode& n) {
  return n.kind == NodeKind::Variable || n.kind == NodeKind::Function ||
         (n.kind == NodeKind::Constant && !std::signbit(n.value));
}

void render(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant:
      out += format_double(n.value);
      return;
    case NodeKind::Variable:
      out += n.name;
      return;
    case NodeKind::Sum:
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        const ExprNode& k = *n.kids[i];
        if (i == 0) {
          render_wrapped(k, out, k.kind == NodeKind::Sum);
        } else if (k.kind == NodeKind::Negate) {
          out += " - ";
          const ExprNode& inner = *k.kids[0];
          render_wrapped(inner, out, inner.kind == NodeKind::Sum || inner.kind == NodeKind::Negate);
        } else {
          out += " + ";
          render_wrapped(k, out, k.kind == NodeKind::Sum);
        }
      }
      return;
    case NodeKind::Product:
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i > 0) out += "*";
        const ExprNode& k = *n.kids[i];
        const bool wrap = k.kind == NodeKind::Sum || k.kind == NodeKind::Product ||
                          k.kind == NodeKind::Negate ||
                          (k.kind == NodeKind::Quotient && i > 0);
        render_wrapped(k, out, wrap);
      }
      return;
    case NodeKind::Quotient: {
      const ExprNode& a = *n.kids[0];
      const ExprNode& b = *n.kids[1];
      render_wrapped(a, out, a.kind == NodeKind::Sum || a.kind == NodeKind::Negate);
      out += "/";
      render_wrapped(b, out,
                     b.kind == NodeKind::Sum || b.kind == NodeKind::Product ||
                         b.kind == NodeKind::Quotient || b.kind == NodeKind::Negate);
      return;
    }
    case NodeKind::Power: {
      const ExprNode& b = *n.kids[0];
      render_wrapped(b, out, !is_atom(b));
      out += "^";
      const Rational& r = n.exponent;
      if (r.is_integer() && r.num >= 0) {
        out += std::to_string(r.num);
      } else {
        out += '(';
        out += r.str();
        out += ')';
      }
      return;
    }
    case NodeKind::Negate: {
      out += "-";
      const ExprNode& k = *n.kids[0];
      std::string inner;
      render(k, inner);
      // A child that itself starts with '-' would juxtapose into "--",
      // which reparses with the signs bound differently.
      const bool wrap = k.kind == NodeKind::Sum ||
                        k.kind == NodeKind::Negate ||
                        (!inner.empty() && inner.front() == '-');
      if (wrap) {
        out += '(';
        out += inner;
        out += ')';
      } else {
        out += inner;
      }
      return;
    }
    case NodeKind::Function:
      out += func_name(n.func);
      out += '(';
      render(*n.kids[0], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string Expr::str() const {
  std::string out;
  render(*node_, out);
  return out;
}

}  // namespace sblab
