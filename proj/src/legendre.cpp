#include <algorithm>
#include <cmath>

#include "sblab/errors.hpp"
#include "sblab/quadrature.hpp"
#include "sblab/sbl_engine.hpp"

namespace sblab {

namespace {

// Straight-segment values of the flux potentials h^A between two states,
// i.e. the K^A reconstruction expressed in the w-chart.
std::vector<double> flux_potentials(const SystemEvaluator& ev,
                                    const DensityEvaluator& h0,
                                    const std::vector<double>& y_base,
                                    const std::vector<double>& y_target,
                                    double quad_tol) {
  const int m = ev.m();
  std::vector<double> direction(m);
  for (int i = 0; i < m; ++i) direction[i] = y_target[i] - y_base[i];
  std::vector<double> out(ev.spatial_dim(), 0.0);
  std::vector<double> y_t(m);
  for (int A = 0; A < ev.spatial_dim(); ++A) {
    auto integrand = [&](double t) {
      for (int i = 0; i < m; ++i) y_t[i] = y_base[i] + t * direction[i];
      const Eigen::VectorXd lam = h0.gradient_w(ev, y_t);
      const Eigen::MatrixXd Fy = ev.flux_jacobian_matrix(A, y_t);
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += lam.dot(Fy.col(j)) * direction[j];
      return acc;
    };
    out[A] = integrate(integrand, 0.0, 1.0, quad_tol);
  }
  return out;
}

Eigen::MatrixXd hessian_inverse_or_throw(const Eigen::MatrixXd& H) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(H);
  const double scale =
      std::pow(std::max(H.norm(), 1e-300), static_cast<double>(H.rows()));
  if (std::abs(lu.determinant()) <= 1e-12 * scale)
    throw SingularHessianError("Hessian of h0 is singular at this state");
  return lu.inverse();
}

}  // namespace

DualPotential legendre_dual(const SystemEvaluator& ev,
                            const DensityEvaluator& h0, const StatePoint& p) {
  const auto y = state_vector(ev.system(), p);
  hessian_inverse_or_throw(h0.hessian_w(ev, y));
  DualPotential out;
  out.w = ev.density(y);
  out.lambda = h0.gradient_w(ev, y);
  out.h0_value = h0.value(ev, y);
  out.h_hat0 = out.lambda.dot(out.w) - out.h0_value;
  return out;
}

Eigen::VectorXd invert_gradient(const DensityEvaluator& h0,
                                const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& w_guess,
                                double tol_scale) {
  Eigen::VectorXd w = w_guess;
  const double tol = tol_scale * (1.0 + lambda.norm());
  for (int iter = 0; iter < 50; ++iter) {
    const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
    const Eigen::VectorXd residual = h0.gradient_at_w(ws) - lambda;
    if (residual.norm() <= tol) return w;
    const Eigen::MatrixXd H = h0.hessian_at_w(ws);
    w -= hessian_inverse_or_throw(H) * residual;
  }
  throw NonConvergenceError("gradient-map inversion did not converge");
}

DualFluxReport dual_flux_check(const SystemEvaluator& ev,
                               const DensityEvaluator& h0, const StatePoint& p,
                               const DualCheckOptions& opts) {
  const auto y_p = state_vector(ev.system(), p);
  const int m = ev.m();
  const int n = ev.spatial_dim();

  std::vector<double> y_base;
  if (opts.base) {
    y_base = state_vector(ev.system(), *opts.base);
  } else {
    y_base.resize(m);
    for (int i = 0; i < m; ++i) {
      const Interval& iv = ev.system().domain_box[i];
      y_base[i] = 0.5 * (iv.lo + iv.hi);
    }
  }

  const Eigen::VectorXd w0 = ev.density(y_p);
  const std::span<const double> w0s(w0.data(), static_cast<std::size_t>(w0.size()));
  const Eigen::VectorXd lambda0 = h0.gradient_at_w(w0s);
  const Eigen::MatrixXd H_inv = hessian_inverse_or_throw(h0.hessian_at_w(w0s));

  struct Probe {
    double h_hat0;
    std::vector<double> h_hatA;
    Eigen::VectorXd w;
  };
  auto probe_at = [&](const Eigen::VectorXd& lambda) {
    const Eigen::VectorXd w = invert_gradient(h0, lambda, w0);
    const StatePoint q =
        from_w(ev, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), p);
    const auto y = state_vector(ev.system(), q);
    Probe pr;
    pr.w = w;
    pr.h_hat0 = lambda.dot(w) -
                h0.value_at_w(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
    const auto hA = flux_potentials(ev, h0, y_base, y, opts.quad_tol);
    pr.h_hatA.resize(n);
    for (int A = 0; A < n; ++A)
      pr.h_hatA[A] = lambda.dot(ev.flux(A, y)) - hA[A];
    return pr;
  };

  DualFluxReport report;
  Eigen::MatrixXd fd_hessian(m, m);
  for (int i = 0; i < m; ++i) {
    const double h = opts.fd_step * std::max(1.0, std::abs(lambda0[i]));
    Eigen::VectorXd lp = lambda0, lm = lambda0;
    lp[i] += h;
    lm[i] -= h;
    const Probe plus = probe_at(lp);
    const Probe minus = probe_at(lm);

    const double d_h0 = (plus.h_hat0 - minus.h_hat0) / (2.0 * h);
    report.dual_density_deviation =
        std::max(report.dual_density_deviation, std::abs(d_h0 - w0[i]));
    for (int A = 0; A < n; ++A) {
      const double d_hA = (plus.h_hatA[A] - minus.h_hatA[A]) / (2.0 * h);
      const double truth = ev.flux(A, y_p)[i];
      report.max_flux_deviation =
          std::max(report.max_flux_deviation, std::abs(d_hA - truth));
    }
    fd_hessian.col(i) = (plus.w - minus.w) / (2.0 * h);
  }
  report.hessian_inverse_deviation =
      (fd_hessian - H_inv).cwiseAbs().maxCoeff();
  return report;
}

SymmetricHyperbolicReport symmetric_hyperbolic_check(
    const SystemEvaluator& ev, const DensityEvaluator& h0, const StatePoint& p,
    double sym_tol) {
  const auto y = state_vector(ev.system(), p);
  const Eigen::MatrixXd H = h0.hessian_w(ev, y);
  const Eigen::MatrixXd H_inv = hessian_inverse_or_throw(H);
  const auto L = flux_jacobian_w(ev, p);

  SymmetricHyperbolicReport report;
  report.A.push_back(H_inv);
  for (const auto& LA : L) report.A.push_back(LA * H_inv);
  for (const auto& M : report.A) {
    const double rel =
        (M - M.transpose()).norm() / std::max(M.norm(), 1e-300);
    report.max_relative_asymmetry = std::max(report.max_relative_asymmetry, rel);
  }
  report.symmetric = report.max_relative_asymmetry <= sym_tol;
  report.a0_definiteness = matrix_definiteness(H_inv);
  return report;
}

ResidualInequalityReport residual_inequality(const SystemEvaluator& ev,
                                             const DensityEvaluator& h0,
                                             const std::vector<StatePoint>& pts,
                                             double tol) {
  ResidualInequalityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const auto y = state_vector(ev.system(), p);
    const double sigma = h0.gradient_w(ev, y).dot(ev.production(y));
    if (sigma < report.min_value) {
      report.min_value = sigma;
      report.argmin = p;
    }
  }
  if (pts.empty()) report.min_value = 0.0;
  report.holds = report.min_value >= -tol;
  return report;
}

}  // namespace sblab
