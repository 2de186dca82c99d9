#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sblab/expr.hpp"

namespace sblab {

// Flat postfix program compiled from an Expr against a fixed variable order.
// Evaluation performs the same floating-point operations in the same order as
// Expr::eval, so results are bit-identical; it just avoids tree walks and name
// lookups inside sampling loops. Immutable and safe to share across threads
// when each thread supplies its own scratch stack.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> var_order);

  double eval(std::span<const double> vars, std::vector<double>& scratch) const;
  double eval(std::span<const double> vars) const;

  std::size_t stack_size() const { return stack_size_; }

 private:
  enum class Op : std::uint8_t { PushConst, PushVar, AddN, MulN, Div, Pow, Neg, Fun };
  struct Step {
    Op op;
    std::uint32_t arg = 0;  // const index / var slot / arity / rational index / func kind
  };

  std::vector<Step> steps_;
  std::vector<double> consts_;
  std::vector<Rational> exponents_;
  std::size_t stack_size_ = 0;
};

// Convenience: compile a full vector of expressions against one variable order.
std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs,
                                      std::span<const std::string> var_order);

}  // namespace sblab
