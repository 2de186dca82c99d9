#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sblab/balance_system.hpp"
#include "sblab/defining_system.hpp"
#include "sblab/sbl_candidate.hpp"

namespace sblab {

// ---- scalar conservation/balance law u_t + c(u)_x = Pi ----

BalanceSystem scalar_law(const Expr& c, const Expr& Pi,
                         const Interval& box = {-1.0, 1.0});

// The general supplementary law of a scalar equation: lambda = dK0/du,
// K1 = int_{u0}^{u} c'(v) K0'(v) dv, Q = K0'(u) * Pi.
SblCandidate scalar_sbl(const BalanceSystem& law, const Expr& K0, double u0);

// ---- heat propagation with relaxation (4 fields, 3 space axes) ----

// Constitutive data, all expressions in "theta".
struct CattaneoSpec {
  Expr tau;      // relaxation time, nonvanishing on the box
  Expr Lambda;   // heat potential, strictly increasing on the box
  Expr eps_eq;   // equilibrium internal energy
  Box box;       // theta, q1, q2, q3
  void validate() const;
};

// Parameters of the supplementary-law family: one free scalar function
// lambda0_hat(theta), three free functions Khat(theta), and constants.
struct CattaneoSblParams {
  Expr lambda0_hat;
  std::array<Expr, 3> Khat;
  double alpha = 0.0;  // >= 0
  double a0 = 0.0;
  std::array<double, 3> kA{};
  std::array<double, 3> mA{};
  double f0 = 0.0;
};

BalanceSystem cattaneo_system(const CattaneoSpec& spec,
                              const Expr& internal_energy);

// Internal energy compatible with the family member; quadratic in q.
Expr cattaneo_internal_energy(const CattaneoSpec& spec,
                              const CattaneoSblParams& params);

// The family member (K0, K^A, Q) as expressions over (theta, q); the
// integral term in K0 is taken from theta_base.  `internal_energy` is the
// energy the system was built with.
SblCandidate cattaneo_sbl(const CattaneoSpec& spec,
                          const CattaneoSblParams& params, double theta_base,
                          const Expr& internal_energy);
SblCandidate cattaneo_sbl(const CattaneoSpec& spec,
                          const CattaneoSblParams& params, double theta_base);

struct CattaneoEntropyReport {
  bool is_entropy_type = false;
  double min_production = 0.0;
  double max_khat_deriv = 0.0;
};

// Entropy type requires nonnegative production on the box, which holds
// exactly when all Khat are constant and lambda0_hat decreases wherever
// Lambda increases.
CattaneoEntropyReport cattaneo_entropy_check(const CattaneoSpec& spec,
                                             const CattaneoSblParams& params,
                                             int samples,
                                             std::uint64_t seed = 42);

// Reconstruct lambda0_hat from the quadratic q-coefficient mu(theta) of
// the internal energy: d lambda0_hat / d theta_tilde proportional to
// tau * exp(-2 int mu/tau d theta_tilde), integrated from theta_base.
// Returned with the proportionality constant fixed to one.
Expr cattaneo_lambda0_from_energy(const CattaneoSpec& spec, const Expr& mu,
                                  double theta_base);

// Family-member decomposition basis: columns of (K0, K1, K2, K3, Q)
// multiplying a0, k1, k2, k3, alpha, f0, m1, m2, m3 in order.
struct CattaneoFamilyBasis {
  std::vector<std::array<Expr, 5>> columns;
  std::vector<std::string> names;
};

CattaneoFamilyBasis cattaneo_family_basis(const CattaneoSpec& spec,
                                          const CattaneoSblParams& params,
                                          double theta_base,
                                          const Expr& internal_energy);

// ---- constant-relaxation variant in scaled variables ----

// Fields (theta, q); densities (eps_tilde(theta), q); flux rows
// (q^A, delta^B_A * Lambda(theta)/tau); productions (0, -q/tau).
BalanceSystem cattaneo_tau_const_system(const Expr& eps_tilde,
                                        const Expr& Lambda, double tau,
                                        const Box& box);

// Quadratic solution family of the defining system when the energy does
// not depend on q: h0 = 2a*int lambda_tilde dw1 + a*|q|^2 + c*w1 +
// beta.q + d, in the w-variables of cattaneo_tau_const_system.  The
// first argument is the w1-derivative of the flux potential over the
// relaxation time, Lambda(theta(w1))/tau, written in "w1".
Expr cattaneo_equilibrium_density(const Expr& lambda_tilde_w1,
                                  const Interval& w1_range, double alpha,
                                  double c, const std::array<double, 3>& beta,
                                  double d);
// When the energy depends on q the quadratic term is excluded.
Expr cattaneo_nonequilibrium_density(double c,
                                     const std::array<double, 3>& beta,
                                     double d);

// ---- catalog of constant-coefficient two-field systems ----

struct LinearTwoFieldCase {
  BalanceSystem sys;
  TwoFieldType expected_type = TwoFieldType::Parabolic;
  std::string equation_form;       // the single second-order condition
  std::vector<Expr> solutions_w;   // densities solving it exactly
};

// row 1: decoupled diagonal flux; 2: shear; 3: rotation; 4: wave;
// 5: mixed symmetric with sign determined by the coefficient pair.
LinearTwoFieldCase linear_two_field_case(int row);

// ---- vacuum electrodynamics (6 fields, 3 space axes) ----

BalanceSystem maxwell_system();
SblCandidate maxwell_energy_candidate();     // field energy + Poynting flux
SblCandidate maxwell_divergence_candidate(bool electric);

}  // namespace sblab
