#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sblab/balance_system.hpp"
#include "sblab/parallel.hpp"

namespace sblab {

// Evaluator for a scalar density h0 and its w-chart derivatives.  The
// density may be written directly in w-coordinates ("w1".."wm") or as a
// function of the fields; in the latter case gradient and Hessian are
// pulled back through W = dF0/dy exactly (no finite differences).
class DensityEvaluator {
 public:
  static DensityEvaluator in_w(const SystemEvaluator& ev, const Expr& h0_w);
  static DensityEvaluator in_y(const SystemEvaluator& ev, const Expr& h0_y);

  double value(const SystemEvaluator& ev, std::span<const double> y) const;
  // Gradient with respect to w, i.e. the main-field covector.
  Eigen::VectorXd gradient_w(const SystemEvaluator& ev,
                             std::span<const double> y) const;
  Eigen::MatrixXd hessian_w(const SystemEvaluator& ev,
                            std::span<const double> y) const;
  bool given_in_w() const { return in_w_; }
  const Expr& expr() const { return h0_; }

  // Direct evaluation at an arbitrary w; only for densities given in w.
  double value_at_w(std::span<const double> w) const;
  Eigen::VectorXd gradient_at_w(std::span<const double> w) const;
  Eigen::MatrixXd hessian_at_w(std::span<const double> w) const;

 private:
  DensityEvaluator() = default;
  bool in_w_ = true;
  Expr h0_;
  std::vector<CompiledExpr> value_;  // single entry
  std::vector<CompiledExpr> grad_;
  std::vector<CompiledExpr> hess_;  // packed upper triangle
  int m_ = 0;
};

struct DefiningResidual {
  std::vector<Eigen::MatrixXd> r;  // per A, antisymmetric m x m
  double max_abs = 0.0;
};

DefiningResidual defining_residual(const SystemEvaluator& ev,
                                   const DensityEvaluator& h0,
                                   const StatePoint& p);
// Convenience overload: h0 written in the w-variables.
DefiningResidual defining_residual(const SystemEvaluator& ev, const Expr& h0_w,
                                   const StatePoint& p);

// True iff the flux Jacobians have no common kernel vector.
bool ellipticity_check(const SystemEvaluator& ev, const StatePoint& p,
                       double tol = 1e-10);

struct CommonEigenvector {
  Eigen::VectorXd zeta;              // unit vector
  std::vector<double> eigenvalues;   // one per spatial axis
};

// Unit vectors that are eigenvectors of every transposed flux Jacobian
// L^A^T simultaneously (one representative basis per eigenvalue tuple).
std::vector<CommonEigenvector> common_eigenvectors(const SystemEvaluator& ev,
                                                   const StatePoint& p,
                                                   double tol = 1e-8);

enum class Holonomy { Holonomic, NonHolonomic, Inconclusive };
enum class TwoFieldType { Elliptic, Hyperbolic, Parabolic, Mixed };

std::string to_string(Holonomy h);
std::string to_string(TwoFieldType t);

struct TwoFieldReport {
  Eigen::Matrix2d J;
  double detJ = 0.0;
  TwoFieldType type = TwoFieldType::Parabolic;
};

struct ClassifyTolerances {
  double eigen = 1e-8;       // common-eigenvector residual
  double rank = 1e-10;       // ellipticity singular-value cutoff
  double regularity = kDefaultRegularityTol;
  double two_field_det = 1e-12;  // |det J| below this counts as parabolic
};

struct ClassificationReport {
  bool elliptic = false;
  Holonomy holonomic_verdict = Holonomy::Inconclusive;
  std::vector<CommonEigenvector> common_eigenvectors;  // from first witness
  std::optional<TwoFieldReport> two_field;
  int sampled_points = 0;
  int singular_points = 0;
  bool det_w_sign_flip = false;
  ClassifyTolerances tolerances;
};

ClassificationReport classify(const SystemEvaluator& ev, int sample_count,
                              std::uint64_t seed,
                              const ClassifyTolerances& tol = {},
                              Exec exec = Exec::Parallel);

// --- two-field (m = 2, n_s = 1) specifics ---

TwoFieldReport two_field_J(const SystemEvaluator& ev, const StatePoint& p,
                           double det_tol = 1e-12);

// Roots of a*l^2 + 2b*l + c = 0 with a = -dF1_1/dy2,
// 2b = dF1_1/dy1 - dF1_2/dy2, c = dF1_2/dy1; ascending order.
std::pair<double, double> characteristic_roots(const SystemEvaluator& ev,
                                               const StatePoint& p);

struct RiemannGrid {
  Interval y1;
  Interval y2;
  int n1 = 16;
  int n2 = 16;
};

enum class CharFamily { First, Second };

struct RiemannField {
  Eigen::MatrixXd values;            // n1 x n2, NaN where truncated
  std::vector<std::uint8_t> truncated;  // row-major n1*n2
  bool any_truncated = false;
};

// Label each grid node by the y2-coordinate where its characteristic
// curve meets the left edge of the grid; constant along characteristics.
RiemannField riemann_invariant_grid(const SystemEvaluator& ev,
                                    const RiemannGrid& grid, CharFamily which);

// --- first-order reformulation ---

bool c_regularity(const SystemEvaluator& ev, std::span<const double> eps,
                  const StatePoint& p, double tol = 1e-10);

// Recover d h0 / d w from the n_s auxiliary densities hA (in w-variables)
// as F(eps)^-1 * d(sum eps_A hA), with F(eps) = sum eps_A L^A^T.
Eigen::VectorXd first_order_gradient(const SystemEvaluator& ev,
                                     std::span<const double> eps,
                                     const std::vector<Expr>& hA_w,
                                     const StatePoint& p, double tol = 1e-10);

// Max antisymmetry of the finite-difference Jacobian of the recovered
// gradient field; near zero iff the covector field is closed.
double first_order_closedness(const SystemEvaluator& ev,
                              std::span<const double> eps,
                              const std::vector<Expr>& hA_w,
                              const StatePoint& p, double fd_step = 1e-5,
                              double tol = 1e-10);

struct EpsIndependenceReport {
  double max_spread = 0.0;
  int point_count = 0;
  int eps_count = 0;
};

EpsIndependenceReport epsilon_independence_check(
    const SystemEvaluator& ev, const std::vector<Expr>& hA_w,
    const std::vector<std::vector<double>>& eps_samples,
    const std::vector<StatePoint>& points, double tol = 1e-10);

}  // namespace sblab
