#pragma once

#include <vector>

#include "sblab/expr.hpp"

namespace sblab {

// A candidate supplementary law (K0, K^A, Q), all in the field variables.
struct SblCandidate {
  Expr K0;
  std::vector<Expr> KA;  // one per spatial axis
  Expr Q;
};

}  // namespace sblab
