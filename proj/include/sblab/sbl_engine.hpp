#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sblab/defining_system.hpp"
#include "sblab/sbl_candidate.hpp"

namespace sblab {

enum class MainFieldOrigin { FromH0, SolvedPointwise };

struct MainFields {
  Eigen::VectorXd lambda;
  MainFieldOrigin origin = MainFieldOrigin::SolvedPointwise;
};

// Compiled candidate: values and y-gradients of K0, K^A and Q.
class CandidateEvaluator {
 public:
  CandidateEvaluator(const SystemEvaluator& ev, const SblCandidate& cand);

  const SblCandidate& candidate() const { return cand_; }
  double K0(std::span<const double> y) const;
  double KA(int A, std::span<const double> y) const;
  double Q(std::span<const double> y) const;
  // Gradient of K^mu wrt y; mu = 0 is K0, mu = A+1 is K.A.
  Eigen::VectorXd K_grad(int mu, std::span<const double> y) const;

 private:
  SblCandidate cand_;
  int m_ = 0;
  int n_mu_ = 0;
  std::vector<CompiledExpr> values_;  // K0, K.1.., Q
  std::vector<CompiledExpr> grads_;   // [mu*m + j]
};

struct LlResidual {
  double r_flux = 0.0;    // max over (mu, j) of |sum_i l_i dF^mu_i/dy^j - dK^mu/dy^j|
  double r_source = 0.0;  // |sum_i l_i Pi_i - Q|
};

LlResidual ll_residual(const SystemEvaluator& ev,
                       const CandidateEvaluator& cand,
                       const Eigen::VectorXd& lambda, const StatePoint& p);
LlResidual ll_residual(const SystemEvaluator& ev, const SblCandidate& cand,
                       const Eigen::VectorXd& lambda, const StatePoint& p);

struct MainFieldSolve {
  bool feasible = false;
  MainFields fields;              // least-squares solution either way
  double flux_residual = 0.0;     // 2-norm of the stacked flux equations
  double source_residual = 0.0;   // |lambda . Pi - Q|
  double threshold = 0.0;         // feasibility cutoff used
};

// Least-squares solve of the flux subsystem for lambda at one state.
MainFieldSolve solve_main_fields(const SystemEvaluator& ev,
                                 const CandidateEvaluator& cand,
                                 const StatePoint& p, double tol = 1e-8);
MainFieldSolve solve_main_fields(const SystemEvaluator& ev,
                                 const SblCandidate& cand, const StatePoint& p,
                                 double tol = 1e-8);

MainFields main_fields_from_h0(const SystemEvaluator& ev,
                               const DensityEvaluator& h0,
                               const StatePoint& p);

// Symbolic main fields lambda_i(y): dh0/dw_i with w = F0(y) substituted.
std::vector<Expr> main_fields_exprs(const SystemEvaluator& ev,
                                    const Expr& h0_w);
// Symbolic K0(y) = h0(F0(y)) and Q(y) = sum_i lambda_i(y) Pi_i(y).
Expr compose_density(const SystemEvaluator& ev, const Expr& h0_w);
Expr production_contraction(const SystemEvaluator& ev, const Expr& h0_w);

struct BuildOptions {
  double quad_tol = 1e-10;   // flux line integrals
  double closed_tol = 1e-8;  // max defining residual allowed on the path
  double path_tol = 1e-7;    // two-path agreement
  int precheck_points = 5;
  bool throw_on_not_closed = true;
  bool throw_on_path_disagreement = true;
};

struct BuiltCandidateValues {
  double K0 = 0.0;
  std::vector<double> KA;  // relative to the base point
  double Q = 0.0;
  MainFields lambda;
  double max_defining_residual = 0.0;  // over the precheck points
  double path_disagreement = 0.0;      // straight vs axis-aligned path
};

// Evaluate the candidate generated by h0 at p: K0 = h0(F0(p)), K^A by
// integrating sum_i lambda_i dF^A_i along base->p, Q = lambda . Pi.
BuiltCandidateValues build_candidate(const SystemEvaluator& ev,
                                     const DensityEvaluator& h0,
                                     const StatePoint& base,
                                     const StatePoint& p,
                                     const BuildOptions& opts = {});
BuiltCandidateValues build_candidate(const SystemEvaluator& ev,
                                     const Expr& h0_w, const StatePoint& base,
                                     const StatePoint& p,
                                     const BuildOptions& opts = {});

enum class Definiteness { NegDef, PosDef, Indefinite, Semi };
std::string to_string(Definiteness d);

struct ConvexityReport {
  Eigen::MatrixXd hessian;
  Definiteness verdict = Definiteness::Semi;
};

ConvexityReport hessian_and_convexity(const SystemEvaluator& ev,
                                      const DensityEvaluator& h0,
                                      const StatePoint& p,
                                      double rel_tol = 1e-10);
Definiteness matrix_definiteness(const Eigen::MatrixXd& sym,
                                 double rel_tol = 1e-10);

struct DualPotential {
  double h_hat0 = 0.0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd w;
  double h0_value = 0.0;
};

DualPotential legendre_dual(const SystemEvaluator& ev,
                            const DensityEvaluator& h0, const StatePoint& p);

// Newton solve of grad h0(w) = lambda; h0 must be given in w-variables.
Eigen::VectorXd invert_gradient(const DensityEvaluator& h0,
                                const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& w_guess,
                                double tol_scale = 1e-13);

struct DualCheckOptions {
  double fd_step = 1e-4;
  double quad_tol = 1e-11;
  std::optional<StatePoint> base;  // default: box centre
};

struct DualFluxReport {
  double max_flux_deviation = 0.0;      // |dh_hat^A/dl_i - flux_i| worst case
  double dual_density_deviation = 0.0;  // |dh_hat0/dl_i - w_i| worst case
  double hessian_inverse_deviation = 0.0;  // |FD Hess h_hat0 - (Hess h0)^-1|
};

DualFluxReport dual_flux_check(const SystemEvaluator& ev,
                               const DensityEvaluator& h0, const StatePoint& p,
                               const DualCheckOptions& opts = {});

struct SymmetricHyperbolicReport {
  std::vector<Eigen::MatrixXd> A;  // A[0] = (Hess h0)^-1, then per axis
  double max_relative_asymmetry = 0.0;
  bool symmetric = false;
  Definiteness a0_definiteness = Definiteness::Semi;
};

SymmetricHyperbolicReport symmetric_hyperbolic_check(
    const SystemEvaluator& ev, const DensityEvaluator& h0, const StatePoint& p,
    double sym_tol = 1e-7);

struct ResidualInequalityReport {
  double min_value = 0.0;
  StatePoint argmin;
  bool holds = false;
};

// Minimum of lambda . Pi over the supplied states.
ResidualInequalityReport residual_inequality(const SystemEvaluator& ev,
                                             const DensityEvaluator& h0,
                                             const std::vector<StatePoint>& pts,
                                             double tol = 1e-12);

// Max over (mu, j) of |sum_i F^mu_i dxi^i/dy^j|: zero makes xi a vertical
// symmetry whose induced candidate passes the multiplier test with
// lambda = xi.
double symmetry_sbl_check(const SystemEvaluator& ev,
                          const std::vector<Expr>& xi, const StatePoint& p);
SblCandidate symmetry_induced_candidate(const SystemEvaluator& ev,
                                        const std::vector<Expr>& xi);

}  // namespace sblab
