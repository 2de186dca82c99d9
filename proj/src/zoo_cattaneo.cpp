#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sblab/chebyshev.hpp"
#include "sblab/compiled_expr.hpp"
#include "sblab/model_zoo.hpp"
#include "sblab/sampling.hpp"

namespace sblab {

namespace {

const std::vector<std::string> kThetaVar = {"theta"};

void require_theta_only(const Expr& e, const char* what) {
  for (const auto& v : e.free_vars())
    if (v != "theta")
      throw DimensionMismatchError(std::string(what) + " must depend on theta only, found '" +
                                   v + "'");
}

std::vector<double> theta_samples(const Interval& range, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = range.lo + (range.hi - range.lo) * i / double(count - 1);
  return out;
}

Expr qvar(int a) { return Expr::variable("q" + std::to_string(a)); }

Expr q_norm2() {
  return pow_int(qvar(1), 2) + pow_int(qvar(2), 2) + pow_int(qvar(3), 2);
}

// Antiderivative of a theta-expression from `base`, as an expression in theta.
Expr integral_from(const Expr& integrand, const Interval& range, double base,
                   int degree, double quad_tol) {
  CompiledExpr f(integrand.simplified(), kThetaVar);
  auto eval = [&](double t) { return f.eval({&t, 1}); };
  ChebyshevSeries anti =
      ChebyshevSeries::fit_antiderivative(eval, range.lo, range.hi, degree, quad_tol)
          .trimmed(1e-14);
  return (anti.to_expr("theta") - Expr::constant(anti.eval(base))).simplified();
}

}  // namespace

void CattaneoSpec::validate() const {
  if (box.size() != 4)
    throw DimensionMismatchError("CattaneoSpec: box must have 4 intervals (theta, q1..q3)");
  for (const auto& iv : box)
    if (!(iv.lo < iv.hi))
      throw DimensionMismatchError("CattaneoSpec: empty interval in box");
  require_theta_only(tau, "tau");
  require_theta_only(Lambda, "Lambda");
  require_theta_only(eps_eq, "eps_eq");

  CompiledExpr tau_c(tau.simplified(), kThetaVar);
  CompiledExpr dlam_c(Lambda.diff("theta").simplified(), kThetaVar);
  double min_dlam = std::numeric_limits<double>::infinity();
  double min_tau = std::numeric_limits<double>::infinity();
  double max_tau = -std::numeric_limits<double>::infinity();
  double min_abs_tau = std::numeric_limits<double>::infinity();
  double max_abs_tau = 0.0;
  for (double t : theta_samples(box[0], 65)) {
    min_dlam = std::min(min_dlam, dlam_c.eval({&t, 1}));
    double tv = tau_c.eval({&t, 1});
    min_tau = std::min(min_tau, tv);
    max_tau = std::max(max_tau, tv);
    min_abs_tau = std::min(min_abs_tau, std::abs(tv));
    max_abs_tau = std::max(max_abs_tau, std::abs(tv));
  }
  if (!(min_dlam > 0.0))
    throw NumericError("CattaneoSpec: Lambda must be strictly increasing on the box");
  // A sign change between samples pins an interior zero of a continuous tau.
  if (min_tau < 0.0 && max_tau > 0.0)
    throw NumericError("CattaneoSpec: tau changes sign on the box");
  if (!(min_abs_tau > 1e-12 * (1.0 + max_abs_tau)))
    throw NumericError("CattaneoSpec: tau vanishes on the box");
}

BalanceSystem cattaneo_system(const CattaneoSpec& spec, const Expr& internal_energy) {
  spec.validate();
  BalanceSystem sys;
  sys.name = "cattaneo";
  sys.field_names = {"theta", "q1", "q2", "q3"};
  sys.spatial_dim = 3;
  sys.densities.push_back(internal_energy.simplified());
  for (int a = 1; a <= 3; ++a)
    sys.densities.push_back((spec.tau * qvar(a)).simplified());
  sys.fluxes.assign(3, {});
  for (int axis = 0; axis < 3; ++axis) {
    auto& row = sys.fluxes[axis];
    row.push_back(qvar(axis + 1));
    for (int b = 1; b <= 3; ++b)
      row.push_back(b == axis + 1 ? spec.Lambda : Expr::constant(0.0));
  }
  sys.productions.push_back(Expr::constant(0.0));
  for (int a = 1; a <= 3; ++a) sys.productions.push_back(-qvar(a));
  sys.domain_box = spec.box;
  sys.validate();
  return sys;
}

Expr cattaneo_internal_energy(const CattaneoSpec& spec, const CattaneoSblParams& params) {
  spec.validate();
  require_theta_only(params.lambda0_hat, "lambda0_hat");
  for (const auto& k : params.Khat) require_theta_only(k, "Khat");

  Expr lam0_t = (Expr::constant(params.alpha) * params.lambda0_hat.diff("theta")).simplified();
  CompiledExpr lam0_t_c(lam0_t, kThetaVar);
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (double t : theta_samples(spec.box[0], 65)) {
    double v = lam0_t_c.eval({&t, 1});
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
    min_abs = std::min(min_abs, std::abs(v));
    max_abs = std::max(max_abs, std::abs(v));
  }
  if ((min_v < 0.0 && max_v > 0.0) || !(min_abs > 1e-12 * (1.0 + max_abs)))
    throw DegenerateLambda0Error(
        "internal energy undefined: d(lambda0)/d(theta) vanishes on the box");

  Expr lam_t = spec.Lambda.diff("theta");
  Expr tau_t = spec.tau.diff("theta");
  Expr half = Expr::constant(0.5);

  Expr eps = spec.eps_eq + (tau_t / (Expr::constant(2.0) * lam_t)) * q_norm2();
  Expr bracket = half * (lam0_t / lam_t).diff("theta") * q_norm2();
  for (int a = 1; a <= 3; ++a) {
    Expr ktilde_t = (Expr::constant(params.kA[a - 1]) * lam_t +
                     Expr::constant(params.alpha) * params.Khat[a - 1].diff("theta"));
    bracket = bracket + (ktilde_t / lam_t).diff("theta") * qvar(a);
  }
  eps = eps - (spec.tau / lam0_t) * bracket;
  return eps.simplified();
}

SblCandidate cattaneo_sbl(const CattaneoSpec& spec, const CattaneoSblParams& params,
                          double theta_base, const Expr& internal_energy) {
  spec.validate();
  require_theta_only(params.lambda0_hat, "lambda0_hat");
  for (const auto& k : params.Khat) require_theta_only(k, "Khat");

  Expr alpha = Expr::constant(params.alpha);
  Expr lam0 = Expr::constant(params.a0) + alpha * params.lambda0_hat;
  Expr lam0hat_t = params.lambda0_hat.diff("theta");
  Expr lam_t = spec.Lambda.diff("theta");

  Expr K0 = lam0 * internal_energy + Expr::constant(params.f0);
  if (params.alpha != 0.0) {
    Expr integral = integral_from((lam0hat_t * spec.eps_eq).simplified(), spec.box[0],
                                  theta_base, 48, 1e-12);
    K0 = K0 - alpha * integral;
  }
  Expr flux_part = (alpha * Expr::constant(0.5)) * lam0hat_t * q_norm2();
  for (int a = 1; a <= 3; ++a) {
    Expr coef = Expr::constant(params.kA[a - 1]) * lam_t +
                alpha * params.Khat[a - 1].diff("theta");
    flux_part = flux_part + coef * qvar(a);
  }
  K0 = K0 + (spec.tau / lam_t) * flux_part;

  SblCandidate out;
  out.K0 = K0.simplified();
  for (int a = 1; a <= 3; ++a) {
    Expr ka = lam0 * qvar(a) + Expr::constant(params.kA[a - 1]) * spec.Lambda +
              Expr::constant(params.mA[a - 1]) + alpha * params.Khat[a - 1];
    out.KA.push_back(ka.simplified());
  }
  Expr qprod = alpha * lam0hat_t * q_norm2();
  for (int a = 1; a <= 3; ++a) {
    Expr coef = Expr::constant(params.kA[a - 1]) * lam_t +
                alpha * params.Khat[a - 1].diff("theta");
    qprod = qprod + coef * qvar(a);
  }
  out.Q = (-(qprod / lam_t)).simplified();
  return out;
}

SblCandidate cattaneo_sbl(const CattaneoSpec& spec, const CattaneoSblParams& params,
                          double theta_base) {
  return cattaneo_sbl(spec, params, theta_base,
                      cattaneo_internal_energy(spec, params));
}

CattaneoEntropyReport cattaneo_entropy_check(const CattaneoSpec& spec,
                                             const CattaneoSblParams& params,
                                             int samples, std::uint64_t seed) {
  spec.validate();
  // Production does not involve the internal energy, so build only Q.
  SblCandidate member;
  {
    Expr alpha = Expr::constant(params.alpha);
    Expr lam_t = spec.Lambda.diff("theta");
    Expr qprod = alpha * params.lambda0_hat.diff("theta") * q_norm2();
    for (int a = 1; a <= 3; ++a) {
      Expr coef = Expr::constant(params.kA[a - 1]) * lam_t +
                  alpha * params.Khat[a - 1].diff("theta");
      qprod = qprod + coef * qvar(a);
    }
    member.Q = (-(qprod / lam_t)).simplified();
  }
  const std::vector<std::string> vars = {"theta", "q1", "q2", "q3"};
  CompiledExpr q_c(member.Q, vars);

  CattaneoEntropyReport rep;
  rep.min_production = std::numeric_limits<double>::infinity();
  auto pts = sample_box(spec.box, samples, seed);
  for (const auto& p : pts)
    rep.min_production = std::min(rep.min_production, q_c.eval(p));

  std::vector<CompiledExpr> khat_t;
  for (const auto& k : params.Khat)
    khat_t.emplace_back(k.diff("theta").simplified(), kThetaVar);
  for (const auto& p : pts) {
    double t = p[0];
    for (const auto& kc : khat_t)
      rep.max_khat_deriv = std::max(rep.max_khat_deriv, std::abs(kc.eval({&t, 1})));
  }
  rep.is_entropy_type = rep.min_production >= -1e-12 && rep.max_khat_deriv <= 1e-12;
  return rep;
}

Expr cattaneo_lambda0_from_energy(const CattaneoSpec& spec, const Expr& mu,
                                  double theta_base) {
  spec.validate();
  require_theta_only(mu, "mu");
  if (!spec.box[0].contains(theta_base))
    throw DimensionMismatchError("cattaneo_lambda0_from_energy: base outside theta range");

  CompiledExpr lam_c(spec.Lambda.simplified(), kThetaVar);
  CompiledExpr dlam_c(spec.Lambda.diff("theta").simplified(), kThetaVar);
  CompiledExpr tau_c(spec.tau.simplified(), kThetaVar);
  CompiledExpr mu_c(mu.simplified(), kThetaVar);

  const double theta_lo = spec.box[0].lo;
  const double theta_hi = spec.box[0].hi;
  auto lam = [&](double t) { return lam_c.eval({&t, 1}); };
  const double s_lo = lam(theta_lo);
  const double s_hi = lam(theta_hi);
  const double s_base = lam(theta_base);

  // Invert the strictly increasing Lambda by safeguarded Newton.
  auto inv = [&](double s) {
    double lo = theta_lo, hi = theta_hi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      double g = lam(x) - s;
      if (std::abs(g) <= 1e-14 * (1.0 + std::abs(s))) break;
      if (g > 0.0)
        hi = x;
      else
        lo = x;
      double d = dlam_c.eval({&x, 1});
      double xn = d != 0.0 ? x - g / d : 0.5 * (lo + hi);
      x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
    }
    return x;
  };

  ChebyshevSeries inner_anti = ChebyshevSeries::fit_antiderivative(
      [&](double s) {
        double t = inv(s);
        return mu_c.eval({&t, 1}) / tau_c.eval({&t, 1});
      },
      s_lo, s_hi, 40, 1e-12);
  const double inner_base = inner_anti.eval(s_base);
  auto inner = [&](double s) { return inner_anti.eval(s) - inner_base; };

  ChebyshevSeries outer = ChebyshevSeries::fit_antiderivative(
      [&](double s) {
        double t = inv(s);
        return tau_c.eval({&t, 1}) * std::exp(-2.0 * inner(s));
      },
      s_lo, s_hi, 48, 1e-12);
  Expr in_s = (outer.trimmed(1e-14).to_expr("__s") -
               Expr::constant(outer.eval(s_base)));
  Expr result = in_s.substitute({{"__s", spec.Lambda}}).simplified();

  // The defining relation: d(result)/d(theta_tilde) * exp(2*inner) / tau == 1.
  CompiledExpr res_t_c(result.diff("theta").simplified(), kThetaVar);
  double worst = 0.0;
  for (double t : theta_samples(spec.box[0], 33)) {
    double d_tilde = res_t_c.eval({&t, 1}) / dlam_c.eval({&t, 1});
    double ratio = d_tilde * std::exp(2.0 * inner(lam(t))) / tau_c.eval({&t, 1});
    worst = std::max(worst, std::abs(ratio - 1.0));
  }
  if (worst > 1e-7)
    throw NumericError(
        "cattaneo_lambda0_from_energy: reconstruction failed self-check, deviation " +
        std::to_string(worst));
  return result;
}

CattaneoFamilyBasis cattaneo_family_basis(const CattaneoSpec& spec,
                                          const CattaneoSblParams& params,
                                          double theta_base,
                                          const Expr& internal_energy) {
  spec.validate();
  require_theta_only(params.lambda0_hat, "lambda0_hat");
  for (const auto& k : params.Khat) require_theta_only(k, "Khat");

  Expr zero = Expr::constant(0.0);
  Expr one = Expr::constant(1.0);
  Expr lam_t = spec.Lambda.diff("theta");
  Expr lam0hat_t = params.lambda0_hat.diff("theta");

  CattaneoFamilyBasis basis;
  basis.names = {"a0", "k1", "k2", "k3", "alpha", "f0", "m1", "m2", "m3"};

  basis.columns.push_back(
      {internal_energy.simplified(), qvar(1), qvar(2), qvar(3), zero});
  for (int b = 1; b <= 3; ++b) {
    std::array<Expr, 5> col = {(spec.tau * qvar(b)).simplified(), zero, zero, zero,
                               (-qvar(b)).simplified()};
    col[b] = spec.Lambda;
    basis.columns.push_back(col);
  }
  {
    Expr integral = integral_from((lam0hat_t * spec.eps_eq).simplified(), spec.box[0],
                                  theta_base, 48, 1e-12);
    Expr flux_part = Expr::constant(0.5) * lam0hat_t * q_norm2();
    Expr qprod = lam0hat_t * q_norm2();
    for (int a = 1; a <= 3; ++a) {
      flux_part = flux_part + params.Khat[a - 1].diff("theta") * qvar(a);
      qprod = qprod + params.Khat[a - 1].diff("theta") * qvar(a);
    }
    std::array<Expr, 5> col = {
        (params.lambda0_hat * internal_energy - integral +
         (spec.tau / lam_t) * flux_part)
            .simplified(),
        zero, zero, zero, (-(qprod / lam_t)).simplified()};
    for (int a = 1; a <= 3; ++a)
      col[a] = (params.lambda0_hat * qvar(a) + params.Khat[a - 1]).simplified();
    basis.columns.push_back(col);
  }
  basis.columns.push_back({one, zero, zero, zero, zero});
  for (int b = 1; b <= 3; ++b) {
    std::array<Expr, 5> col = {zero, zero, zero, zero, zero};
    col[b] = one;
    basis.columns.push_back(col);
  }
  return basis;
}

BalanceSystem cattaneo_tau_const_system(const Expr& eps_tilde, const Expr& Lambda,
                                        double tau, const Box& box) {
  if (box.size() != 4)
    throw DimensionMismatchError("cattaneo_tau_const_system: box must have 4 intervals");
  if (tau == 0.0)
    throw NumericError("cattaneo_tau_const_system: tau must be nonzero");
  require_theta_only(eps_tilde, "eps_tilde");
  require_theta_only(Lambda, "Lambda");

  Expr inv_tau = Expr::constant(1.0 / tau);
  BalanceSystem sys;
  sys.name = "cattaneo-tau-const";
  sys.field_names = {"theta", "q1", "q2", "q3"};
  sys.spatial_dim = 3;
  sys.densities.push_back(eps_tilde.simplified());
  for (int a = 1; a <= 3; ++a) sys.densities.push_back(qvar(a));
  sys.fluxes.assign(3, {});
  for (int axis = 0; axis < 3; ++axis) {
    auto& row = sys.fluxes[axis];
    row.push_back(qvar(axis + 1));
    for (int b = 1; b <= 3; ++b)
      row.push_back(b == axis + 1 ? (inv_tau * Lambda).simplified()
                                  : Expr::constant(0.0));
  }
  sys.productions.push_back(Expr::constant(0.0));
  for (int a = 1; a <= 3; ++a)
    sys.productions.push_back((-(inv_tau * qvar(a))).simplified());
  sys.domain_box = box;
  sys.validate();
  return sys;
}

Expr cattaneo_equilibrium_density(const Expr& lambda_tilde_w1, const Interval& w1_range,
                                  double alpha, double c, const std::array<double, 3>& beta,
                                  double d) {
  for (const auto& v : lambda_tilde_w1.free_vars())
    if (v != "w1")
      throw DimensionMismatchError(
          "cattaneo_equilibrium_density: lambda_tilde must depend on w1 only");
  Expr h = Expr::constant(c) * Expr::variable("w1") + Expr::constant(d);
  for (int a = 0; a < 3; ++a)
    h = h + Expr::constant(beta[a]) * Expr::variable("w" + std::to_string(a + 2));
  if (alpha != 0.0) {
    CompiledExpr f(lambda_tilde_w1.simplified(), std::vector<std::string>{"w1"});
    auto eval = [&](double x) { return f.eval({&x, 1}); };
    ChebyshevSeries anti = ChebyshevSeries::fit_antiderivative(
                               eval, w1_range.lo, w1_range.hi, 48, 1e-13)
                               .trimmed(1e-14);
    h = h + Expr::constant(2.0 * alpha) * anti.to_expr("w1");
    Expr qsum = Expr::constant(0.0);
    for (int a = 2; a <= 4; ++a)
      qsum = qsum + pow_int(Expr::variable("w" + std::to_string(a)), 2);
    h = h + Expr::constant(alpha) * qsum;
  }
  return h.simplified();
}

Expr cattaneo_nonequilibrium_density(double c, const std::array<double, 3>& beta,
                                     double d) {
  Expr h = Expr::constant(c) * Expr::variable("w1") + Expr::constant(d);
  for (int a = 0; a < 3; ++a)
    h = h + Expr::constant(beta[a]) * Expr::variable("w" + std::to_string(a + 2));
  return h.simplified();
}

}  // namespace sblab
