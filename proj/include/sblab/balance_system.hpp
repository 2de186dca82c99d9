#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sblab/compiled_expr.hpp"
#include "sblab/expr.hpp"
#include "sblab/sampling.hpp"

namespace sblab {

inline constexpr double kDefaultRegularityTol = 1e-10;

// Canonical names of the w-chart coordinates: "w1".."wm".
std::vector<std::string> w_names(int m);

// A zero-order balance system: densities F0_i(y), spatial fluxes FA_i(y)
// and productions Pi_i(y), all autonomous expressions in the field
// variables, together with a sampling box.
struct BalanceSystem {
  std::string name;
  std::vector<std::string> field_names;
  int spatial_dim = 1;
  std::vector<Expr> densities;
  std::vector<std::vector<Expr>> fluxes;  // [A][i], A = 0..spatial_dim-1
  std::vector<Expr> productions;
  Box domain_box;

  int field_count() const { return static_cast<int>(field_names.size()); }
  int index_of(const std::string& field) const;

  // Throws DimensionMismatchError / ParseError on structural problems
  // (wrong counts, duplicate fields, free variables outside field_names).
  void validate() const;
};

struct StatePoint {
  Bindings values;
};

StatePoint make_state(const BalanceSystem& sys, std::span<const double> y);
std::vector<double> state_vector(const BalanceSystem& sys,
                                 const StatePoint& p);

struct JacobianSet {
  Eigen::MatrixXd W;                 // dF0_i/dy^j
  std::vector<Eigen::MatrixXd> Fy;   // per A: dFA_i/dy^j
  std::vector<Eigen::MatrixXd> Psi;  // per A: W^-1 * Fy[A] * W, when regular
  bool regular = false;
  double det_W = 0.0;
};

// Compiled evaluator for one system: values, first derivatives, and
// density second derivatives, all against the field-name variable order.
class SystemEvaluator {
 public:
  explicit SystemEvaluator(BalanceSystem sys);

  const BalanceSystem& system() const { return sys_; }
  int m() const { return m_; }
  int spatial_dim() const { return n_s_; }

  Eigen::VectorXd density(std::span<const double> y) const;
  Eigen::VectorXd flux(int A, std::span<const double> y) const;
  Eigen::VectorXd production(std::span<const double> y) const;

  Eigen::MatrixXd density_jacobian_matrix(std::span<const double> y) const;
  Eigen::MatrixXd flux_jacobian_matrix(int A, std::span<const double> y) const;
  // Hessian of F0_i.
  Eigen::MatrixXd density_hessian(int i, std::span<const double> y) const;

 private:
  BalanceSystem sys_;
  int m_ = 0;
  int n_s_ = 0;
  std::vector<CompiledExpr> f0_;
  std::vector<std::vector<CompiledExpr>> flux_;  // [A][i]
  std::vector<CompiledExpr> prod_;
  std::vector<CompiledExpr> df0_;                 // [i*m+j]
  std::vector<std::vector<CompiledExpr>> dflux_;  // [A][i*m+j]
  std::vector<CompiledExpr> d2f0_;                // [i][j<=k] packed
  std::size_t d2_index(int i, int j, int k) const;
};

JacobianSet density_jacobian(const SystemEvaluator& ev, const StatePoint& p,
                             double reg_tol = kDefaultRegularityTol);
bool is_regular(const SystemEvaluator& ev, const StatePoint& p,
                double tol = kDefaultRegularityTol);

std::vector<double> to_w(const SystemEvaluator& ev, const StatePoint& p);
// Newton inversion of w = F0(y) starting from `guess`.
StatePoint from_w(const SystemEvaluator& ev, std::span<const double> w,
                  const StatePoint& guess);

// L^A = FA_y * W^-1, the flux Jacobians in the w-chart.
std::vector<Eigen::MatrixXd> flux_jacobian_w(
    const SystemEvaluator& ev, const StatePoint& p,
    double reg_tol = kDefaultRegularityTol);

}  // namespace sblab
