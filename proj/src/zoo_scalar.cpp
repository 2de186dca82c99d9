#include <utility>

#include "sblab/chebyshev.hpp"
#include "sblab/compiled_expr.hpp"
#include "sblab/model_zoo.hpp"

namespace sblab {

BalanceSystem scalar_law(const Expr& c, const Expr& Pi, const Interval& box) {
  BalanceSystem sys;
  sys.name = "scalar";
  sys.field_names = {"u"};
  sys.spatial_dim = 1;
  sys.densities = {Expr::variable("u")};
  sys.fluxes = {{c}};
  sys.productions = {Pi};
  sys.domain_box = {box};
  sys.validate();
  return sys;
}

SblCandidate scalar_sbl(const BalanceSystem& law, const Expr& K0, double u0) {
  if (law.field_count() != 1 || law.spatial_dim != 1)
    throw DimensionMismatchError("scalar_sbl: expected a 1-field, 1-axis system");
  for (const auto& v : K0.free_vars())
    if (v != law.field_names[0])
      throw DimensionMismatchError("scalar_sbl: K0 uses unknown variable '" + v + "'");
  const std::string& u = law.field_names[0];

  Expr K0u = K0.diff(u).simplified();
  Expr cu = law.fluxes[0][0].diff(u).simplified();
  const std::vector<std::string> vars = {u};
  CompiledExpr integrand_c((cu * K0u).simplified(), vars);

  const Interval& box = law.domain_box[0];
  auto integrand = [&](double v) { return integrand_c.eval({&v, 1}); };
  ChebyshevSeries anti = ChebyshevSeries::fit_antiderivative(
      integrand, box.lo, box.hi, 64, 1e-13);
  anti = anti.trimmed(1e-13);
  Expr K1 = (anti.to_expr(u) - Expr::constant(anti.eval(u0))).simplified();

  SblCandidate out;
  out.K0 = K0;
  out.KA = {K1};
  out.Q = (K0u * law.productions[0]).simplified();
  return out;
}

}  // namespace sblab
