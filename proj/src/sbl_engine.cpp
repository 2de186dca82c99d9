#include "sblab/sbl_engine.hpp"

#include <algorithm>
#include <cmath>

#include "sblab/errors.hpp"
#include "sblab/quadrature.hpp"

namespace sblab {

CandidateEvaluator::CandidateEvaluator(const SystemEvaluator& ev,
                                       const SblCandidate& cand)
    : cand_(cand), m_(ev.m()), n_mu_(ev.spatial_dim() + 1) {
  if (cand.KA.size() != static_cast<std::size_t>(ev.spatial_dim()))
    throw DimensionMismatchError("candidate needs one K.A per spatial axis");
  const auto& vars = ev.system().field_names;
  auto check_vars = [&](const Expr& e) {
    for (const auto& v : e.free_vars())
      if (ev.system().index_of(v) < 0)
        throw DimensionMismatchError("candidate uses unknown variable '" + v +
                                     "'");
  };
  check_vars(cand.K0);
  for (const auto& e : cand.KA) check_vars(e);
  check_vars(cand.Q);

  std::vector<Expr> values;
  values.push_back(cand.K0);
  for (const auto& e : cand.KA) values.push_back(e);
  values.push_back(cand.Q);
  values_ = compile_all(values, vars);

  std::vector<Expr> grads;
  for (int mu = 0; mu < n_mu_; ++mu) {
    const Expr& K = mu == 0 ? cand.K0 : cand.KA[mu - 1];
    for (const auto& v : vars) grads.push_back(K.diff(v).simplified());
  }
  grads_ = compile_all(grads, vars);
}

double CandidateEvaluator::K0(std::span<const double> y) const {
  std::vector<double> scratch;
  return values_[0].eval(y, scratch);
}

double CandidateEvaluator::KA(int A, std::span<const double> y) const {
  std::vector<double> scratch;
  return values_[1 + A].eval(y, scratch);
}

double CandidateEvaluator::Q(std::span<const double> y) const {
  std::vector<double> scratch;
  return values_[values_.size() - 1].eval(y, scratch);
}

Eigen::VectorXd CandidateEvaluator::K_grad(int mu,
                                           std::span<const double> y) const {
  std::vector<double> scratch;
  Eigen::VectorXd g(m_);
  for (int j = 0; j < m_; ++j)
    g[j] = grads_[static_cast<std::size_t>(mu) * m_ + j].eval(y, scratch);
  return g;
}

LlResidual ll_residual(const SystemEvaluator& ev,
                       const CandidateEvaluator& cand,
                       const Eigen::VectorXd& lambda, const StatePoint& p) {
  if (lambda.size() != ev.m())
    throw DimensionMismatchError("lambda needs one entry per field");
  const auto y = state_vector(ev.system(), p);
  LlResidual out;
  for (int mu = 0; mu <= ev.spatial_dim(); ++mu) {
    const Eigen::MatrixXd J = mu == 0 ? ev.density_jacobian_matrix(y)
                                      : ev.flux_jacobian_matrix(mu - 1, y);
    const Eigen::VectorXd diff = J.transpose() * lambda - cand.K_grad(mu, y);
    out.r_flux = std::max(out.r_flux, diff.cwiseAbs().maxCoeff());
  }
  out.r_source = std::abs(lambda.dot(ev.production(y)) - cand.Q(y));
  return out;
}

LlResidual ll_residual(const SystemEvaluator& ev, const SblCandidate& cand,
                       const Eigen::VectorXd& lambda, const StatePoint& p) {
  return ll_residual(ev, CandidateEvaluator(ev, cand), lambda, p);
}

MainFieldSolve solve_main_fields(const SystemEvaluator& ev,
                                 const CandidateEvaluator& cand,
                                 const StatePoint& p, double tol) {
  const auto y = state_vector(ev.system(), p);
  const int m = ev.m();
  const int n_mu = ev.spatial_dim() + 1;
  Eigen::MatrixXd M(n_mu * m, m);
  Eigen::VectorXd rhs(n_mu * m);
  for (int mu = 0; mu < n_mu; ++mu) {
    const Eigen::MatrixXd J = mu == 0 ? ev.density_jacobian_matrix(y)
                                      : ev.flux_jacobian_matrix(mu - 1, y);
    M.middleRows(mu * m, m) = J.transpose();
    rhs.segment(mu * m, m) = cand.K_grad(mu, y);
  }
  MainFieldSolve out;
  out.fields.lambda = M.colPivHouseholderQr().solve(rhs);
  out.fields.origin = MainFieldOrigin::SolvedPointwise;
  out.flux_residual = (M * out.fields.lambda - rhs).norm();
  out.threshold = tol * (1.0 + rhs.norm());
  out.feasible = out.flux_residual <= out.threshold;
  out.source_residual =
      std::abs(out.fields.lambda.dot(ev.production(y)) - cand.Q(y));
  return out;
}

MainFieldSolve solve_main_fields(const SystemEvaluator& ev,
                                 const SblCandidate& cand, const StatePoint& p,
                                 double tol) {
  return solve_main_fields(ev, CandidateEvaluator(ev, cand), p, tol);
}

MainFields main_fields_from_h0(const SystemEvaluator& ev,
                               const DensityEvaluator& h0,
                               const StatePoint& p) {
  const auto y = state_vector(ev.system(), p);
  MainFields out;
  out.lambda = h0.gradient_w(ev, y);
  out.origin = MainFieldOrigin::FromH0;
  return out;
}

std::vector<Expr> main_fields_exprs(const SystemEvaluator& ev,
                                    const Expr& h0_w) {
  const auto wn = w_names(ev.m());
  std::map<std::string, Expr> repl;
  for (int i = 0; i < ev.m(); ++i) repl[wn[i]] = ev.system().densities[i];
  std::vector<Expr> out;
  out.reserve(wn.size());
  for (const auto& v : wn)
    out.push_back(h0_w.diff(v).simplified().substitute(repl).simplified());
  return out;
}

Expr compose_density(const SystemEvaluator& ev, const Expr& h0_w) {
  const auto wn = w_names(ev.m());
  std::map<std::string, Expr> repl;
  for (int i = 0; i < ev.m(); ++i) repl[wn[i]] = ev.system().densities[i];
  return h0_w.substitute(repl).simplified();
}

Expr production_contraction(const SystemEvaluator& ev, const Expr& h0_w) {
  const auto lambda = main_fields_exprs(ev, h0_w);
  Expr acc = Expr::constant(0.0);
  for (int i = 0; i < ev.m(); ++i)
    acc = acc + lambda[i] * ev.system().productions[i];
  return acc.simplified();
}

BuiltCandidateValues build_candidate(const SystemEvaluator& ev,
                                     const DensityEvaluator& h0,
                                     const StatePoint& base,
                                     const StatePoint& p,
                                     const BuildOptions& opts) {
  const auto y_base = state_vector(ev.system(), base);
  const auto y_p = state_vector(ev.system(), p);
  const int m = ev.m();
  const int n = ev.spatial_dim();

  BuiltCandidateValues out;
  const int checks = std::max(2, opts.precheck_points);
  for (int k = 0; k < checks; ++k) {
    const double t = static_cast<double>(k) / (checks - 1);
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i)
      y[i] = y_base[i] + t * (y_p[i] - y_base[i]);
    const auto res = defining_residual(ev, h0, make_state(ev.system(), y));
    out.max_defining_residual = std::max(out.max_defining_residual, res.max_abs);
  }
  if (out.max_defining_residual > opts.closed_tol && opts.throw_on_not_closed)
    throw NotClosedError(out.max_defining_residual);

  out.K0 = h0.value(ev, y_p);
  out.lambda.lambda = h0.gradient_w(ev, y_p);
  out.lambda.origin = MainFieldOrigin::FromH0;
  out.Q = out.lambda.lambda.dot(ev.production(y_p));

  auto lambda_at = [&](const std::vector<double>& y) {
    return h0.gradient_w(ev, y);
  };

  // Straight segment base -> p.
  std::vector<double> direction(m);
  for (int i = 0; i < m; ++i) direction[i] = y_p[i] - y_base[i];
  out.KA.resize(n, 0.0);
  std::vector<double> y_t(m);
  for (int A = 0; A < n; ++A) {
    auto integrand = [&](double t) {
      for (int i = 0; i < m; ++i)
        y_t[i] = y_base[i] + t * direction[i];
      const Eigen::VectorXd lam = lambda_at(y_t);
      const Eigen::MatrixXd Fy = ev.flux_jacobian_matrix(A, y_t);
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        acc += (lam.transpose() * Fy.col(j)).value() * direction[j];
      return acc;
    };
    out.KA[A] = integrate(integrand, 0.0, 1.0, opts.quad_tol);
  }

  // Second path: one axis-aligned leg per coordinate.
  std::vector<double> legs(n, 0.0);
  std::vector<double> corner = y_base;
  for (int j = 0; j < m; ++j) {
    const double delta = y_p[j] - y_base[j];
    if (delta != 0.0) {
      for (int A = 0; A < n; ++A) {
        auto integrand = [&](double s) {
          std::vector<double> y = corner;
          y[j] = y_base[j] + s * delta;
          const Eigen::VectorXd lam = lambda_at(y);
          const Eigen::MatrixXd Fy = ev.flux_jacobian_matrix(A, y);
          return (lam.transpose() * Fy.col(j)).value() * delta;
        };
        legs[A] += integrate(integrand, 0.0, 1.0, opts.quad_tol);
      }
    }
    corner[j] = y_p[j];
  }
  for (int A = 0; A < n; ++A)
    out.path_disagreement =
        std::max(out.path_disagreement, std::abs(out.KA[A] - legs[A]));
  if (out.path_disagreement > opts.path_tol &&
      opts.throw_on_path_disagreement)
    throw PathDisagreementError(out.path_disagreement);
  return out;
}

BuiltCandidateValues build_candidate(const SystemEvaluator& ev,
                                     const Expr& h0_w, const StatePoint& base,
                                     const StatePoint& p,
                                     const BuildOptions& opts) {
  return build_candidate(ev, DensityEvaluator::in_w(ev, h0_w), base, p, opts);
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::NegDef: return "NegDef";
    case Definiteness::PosDef: return "PosDef";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::Semi: return "Semi";
  }
  return "Semi";
}

Definiteness matrix_definiteness(const Eigen::MatrixXd& sym, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (sym + sym.transpose()));
  const auto& eig = es.eigenvalues();
  const double scale =
      std::max(std::abs(eig[0]), std::abs(eig[eig.size() - 1]));
  if (scale == 0.0) return Definiteness::Semi;
  const double tol = rel_tol * scale;
  int pos = 0, neg = 0;
  for (int i = 0; i < eig.size(); ++i) {
    if (eig[i] > tol) ++pos;
    else if (eig[i] < -tol) ++neg;
  }
  const int n = static_cast<int>(eig.size());
  if (pos == n) return Definiteness::PosDef;
  if (neg == n) return Definiteness::NegDef;
  if (pos > 0 && neg > 0) return Definiteness::Indefinite;
  return Definiteness::Semi;
}

ConvexityReport hessian_and_convexity(const SystemEvaluator& ev,
                                      const DensityEvaluator& h0,
                                      const StatePoint& p, double rel_tol) {
  const auto y = state_vector(ev.system(), p);
  ConvexityReport out;
  out.hessian = h0.hessian_w(ev, y);
  out.verdict = matrix_definiteness(out.hessian, rel_tol);
  return out;
}

double symmetry_sbl_check(const SystemEvaluator& ev,
                          const std::vector<Expr>& xi, const StatePoint& p) {
  const int m = ev.m();
  if (xi.size() != static_cast<std::size_t>(m))
    throw DimensionMismatchError("xi needs one component per field");
  const auto& vars = ev.system().field_names;
  std::vector<Expr> dxi;
  dxi.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      dxi.push_back(xi[i].diff(vars[j]).simplified());
  const auto compiled = compile_all(dxi, vars);

  const auto y = state_vector(ev.system(), p);
  std::vector<double> scratch;
  Eigen::MatrixXd Jxi(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      Jxi(i, j) = compiled[static_cast<std::size_t>(i) * m + j].eval(y, scratch);

  double max_abs = 0.0;
  for (int mu = 0; mu <= ev.spatial_dim(); ++mu) {
    const Eigen::VectorXd F =
        mu == 0 ? ev.density(y) : ev.flux(mu - 1, y);
    const Eigen::VectorXd row = Jxi.transpose() * F;  // sum_i F_i dxi^i/dy^j
    max_abs = std::max(max_abs, row.cwiseAbs().maxCoeff());
  }
  return max_abs;
}

SblCandidate symmetry_induced_candidate(const SystemEvaluator& ev,
                                        const std::vector<Expr>& xi) {
  const int m = ev.m();
  if (xi.size() != static_cast<std::size_t>(m))
    throw DimensionMismatchError("xi needs one component per field");
  auto contract = [&](const std::vector<Expr>& F) {
    Expr acc = Expr::constant(0.0);
    for (int i = 0; i < m; ++i) acc = acc + xi[i] * F[i];
    return acc.simplified();
  };
  SblCandidate cand;
  cand.K0 = contract(ev.system().densities);
  for (int A = 0; A < ev.spatial_dim(); ++A)
    cand.KA.push_back(contract(ev.system().fluxes[A]));
  cand.Q = contract(ev.system().productions);
  return cand;
}

}  // namespace sblab
