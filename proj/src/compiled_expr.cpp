#include "sblab/compiled_expr.hpp"

#include <algorithm>

namespace sblab {

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> var_order) {
  std::size_t depth = 0, max_depth = 0;
  auto grow = [&](std::ptrdiff_t delta) {
    depth = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(depth) + delta);
    max_depth = std::max(max_depth, depth);
  };

  auto emit = [&](auto&& self, const ExprNode& n) -> void {
    switch (n.kind) {
      case NodeKind::Constant:
        steps_.push_back({Op::PushConst, static_cast<std::uint32_t>(consts_.size())});
        consts_.push_back(n.value);
        grow(+1);
        return;
      case NodeKind::Variable: {
        auto it = std::find(var_order.begin(), var_order.end(), n.name);
        if (it == var_order.end()) throw UnboundVariableError(n.name);
        steps_.push_back({Op::PushVar, static_cast<std::uint32_t>(it - var_order.begin())});
        grow(+1);
        return;
      }
      case NodeKind::Sum:
        for (const auto& k : n.kids) self(self, *k);
        steps_.push_back({Op::AddN, static_cast<std::uint32_t>(n.kids.size())});
        grow(-static_cast<std::ptrdiff_t>(n.kids.size()) + 1);
        return;
      case NodeKind::Product:
        for (const auto& k : n.kids) self(self, *k);
        steps_.push_back({Op::MulN, static_cast<std::uint32_t>(n.kids.size())});
        grow(-static_cast<std::ptrdiff_t>(n.kids.size()) + 1);
        return;
      case NodeKind::Quotient:
        self(self, *n.kids[0]);
        self(self, *n.kids[1]);
        steps_.push_back({Op::Div, 0});
        grow(-1);
        return;
      case NodeKind::Power:
        self(self, *n.kids[0]);
        steps_.push_back({Op::Pow, static_cast<std::uint32_t>(exponents_.size())});
        exponents_.push_back(n.exponent);
        return;
      case NodeKind::Negate:
        self(self, *n.kids[0]);
        steps_.push_back({Op::Neg, 0});
        return;
      case NodeKind::Function:
        self(self, *n.kids[0]);
        steps_.push_back({Op::Fun, static_cast<std::uint32_t>(n.func)});
        return;
    }
    throw Error("unreachable node kind");
  };
  emit(emit, e.node());
  stack_size_ = max_depth;
}

double CompiledExpr::eval(std::span<const double> vars, std::vector<double>& scratch) const {
  scratch.clear();
  if (scratch.capacity() < stack_size_) scratch.reserve(stack_size_);
  for (const Step& s : steps_) {
    switch (s.op) {
      case Op::PushConst:
        scratch.push_back(consts_[s.arg]);
        break;
      case Op::PushVar:
        scratch.push_back(vars[s.arg]);
        break;
      case Op::AddN: {
        // Left-to-right accumulation, matching Expr::eval bit-for-bit.
        const std::size_t n = s.arg;
        const std::size_t base = scratch.size() - n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += scratch[base + i];
        scratch.resize(base);
        scratch.push_back(acc);
        break;
      }
      case Op::MulN: {
        const std::size_t n = s.arg;
        const std::size_t base = scratch.size() - n;
        double acc = 1.0;
        for (std::size_t i = 0; i < n; ++i) acc *= scratch[base + i];
        scratch.resize(base);
        scratch.push_back(acc);
        break;
      }
      case Op::Div: {
        const double den = scratch.back();
        scratch.pop_back();
        if (den == 0.0) throw DomainError("quotient", den);
        scratch.back() /= den;
        break;
      }
      case Op::Pow:
        scratch.back() = eval_power(scratch.back(), exponents_[s.arg]);
        break;
      case Op::Neg:
        scratch.back() = -scratch.back();
        break;
      case Op::Fun:
        scratch.back() = eval_function(static_cast<FuncKind>(s.arg), scratch.back());
        break;
    }
  }
  return scratch.back();
}

double CompiledExpr::eval(std::span<const double> vars) const {
  std::vector<double> scratch;
  return eval(vars, scratch);
}

std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs,
                                      std::span<const std::string> var_order) {
  std::vector<CompiledExpr> out;
  out.reserve(exprs.size());
  for (const Expr& e : exprs) out.emplace_back(e, var_order);
  return out;
}

}  // namespace sblab
