#include <cmath>

#include "sblab/defining_system.hpp"
#include "sblab/errors.hpp"

namespace sblab {

namespace {

Eigen::MatrixXd eps_matrix(const SystemEvaluator& ev,
                           std::span<const double> eps, const StatePoint& p) {
  if (eps.size() != static_cast<std::size_t>(ev.spatial_dim()))
    throw DimensionMismatchError("eps needs one entry per spatial axis");
  const auto L = flux_jacobian_w(ev, p);
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(ev.m(), ev.m());
  for (std::size_t A = 0; A < L.size(); ++A)
    F += eps[A] * L[A].transpose();
  return F;
}

bool det_is_significant(const Eigen::MatrixXd& F, double tol) {
  const double det = F.partialPivLu().determinant();
  const double scale =
      std::pow(std::max(F.norm(), 1e-300), static_cast<double>(F.rows()));
  return std::abs(det) > tol * scale;
}

Eigen::VectorXd gradient_at(const SystemEvaluator& ev,
                            std::span<const double> eps,
                            const std::vector<std::vector<CompiledExpr>>& dhA,
                            const StatePoint& p, double tol) {
  const Eigen::MatrixXd F = eps_matrix(ev, eps, p);
  if (!det_is_significant(F, tol))
    throw SingularEpsMatrixError("F(eps) is singular: not C-regular here");
  const auto y = state_vector(ev.system(), p);
  const Eigen::VectorXd w = ev.density(y);
  const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
  std::vector<double> scratch;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ev.m());
  for (std::size_t A = 0; A < dhA.size(); ++A)
    for (int i = 0; i < ev.m(); ++i)
      rhs[i] += eps[A] * dhA[A][i].eval(ws, scratch);
  return F.partialPivLu().solve(rhs);
}

std::vector<std::vector<CompiledExpr>> compile_gradients(
    const SystemEvaluator& ev, const std::vector<Expr>& hA_w) {
  if (hA_w.size() != static_cast<std::size_t>(ev.spatial_dim()))
    throw DimensionMismatchError("need one auxiliary density per spatial axis");
  const auto vars = w_names(ev.m());
  std::vector<std::vector<CompiledExpr>> out;
  out.reserve(hA_w.size());
  for (const auto& h : hA_w) {
    std::vector<Expr> grads;
    grads.reserve(vars.size());
    for (const auto& v : vars) grads.push_back(h.diff(v).simplified());
    out.push_back(compile_all(grads, vars));
  }
  return out;
}

}  // namespace

bool c_regularity(const SystemEvaluator& ev, std::span<const double> eps,
                  const StatePoint& p, double tol) {
  return det_is_significant(eps_matrix(ev, eps, p), tol);
}

Eigen::VectorXd first_order_gradient(const SystemEvaluator& ev,
                                     std::span<const double> eps,
                                     const std::vector<Expr>& hA_w,
                                     const StatePoint& p, double tol) {
  return gradient_at(ev, eps, compile_gradients(ev, hA_w), p, tol);
}

double first_order_closedness(const SystemEvaluator& ev,
                              std::span<const double> eps,
                              const std::vector<Expr>& hA_w,
                              const StatePoint& p, double fd_step, double tol) {
  const auto dhA = compile_gradients(ev, hA_w);
  const auto w0 = to_w(ev, p);
  const int m = ev.m();
  Eigen::MatrixXd J(m, m);
  for (int j = 0; j < m; ++j) {
    const double h = fd_step * std::max(1.0, std::abs(w0[j]));
    auto probe = [&](double sign) {
      std::vector<double> w = w0;
      w[j] += sign * h;
      const StatePoint q = from_w(ev, w, p);
      return gradient_at(ev, eps, dhA, q, tol);
    };
    J.col(j) = (probe(1.0) - probe(-1.0)) / (2.0 * h);
  }
  return (J - J.transpose()).cwiseAbs().maxCoeff();
}

EpsIndependenceReport epsilon_independence_check(
    const SystemEvaluator& ev, const std::vector<Expr>& hA_w,
    const std::vector<std::vector<double>>& eps_samples,
    const std::vector<StatePoint>& points, double tol) {
  if (eps_samples.empty())
    throw DimensionMismatchError("need at least one eps sample");
  const auto dhA = compile_gradients(ev, hA_w);
  EpsIndependenceReport report;
  report.point_count = static_cast<int>(points.size());
  report.eps_count = static_cast<int>(eps_samples.size());
  for (const auto& p : points) {
    const Eigen::VectorXd ref = gradient_at(ev, eps_samples[0], dhA, p, tol);
    for (std::size_t k = 1; k < eps_samples.size(); ++k) {
      const Eigen::VectorXd g = gradient_at(ev, eps_samples[k], dhA, p, tol);
      report.max_spread = std::max(report.max_spread, (g - ref).norm());
    }
  }
  return report;
}

}  // namespace sblab
