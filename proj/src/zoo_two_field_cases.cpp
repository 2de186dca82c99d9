#include <string>
#include <vector>

#include "sblab/model_zoo.hpp"

namespace sblab {

namespace {

Expr w1() { return Expr::variable("w1"); }
Expr w2() { return Expr::variable("w2"); }

BalanceSystem linear_flux_system(const std::string& name, Expr f1, Expr f2) {
  BalanceSystem sys;
  sys.name = name;
  sys.field_names = {"y1", "y2"};
  sys.spatial_dim = 1;
  sys.densities = {Expr::variable("y1"), Expr::variable("y2")};
  sys.fluxes = {{std::move(f1), std::move(f2)}};
  sys.productions = {Expr::constant(0.0), Expr::constant(0.0)};
  sys.domain_box = {{-2.0, 2.0}, {-2.0, 2.0}};
  sys.validate();
  return sys;
}

Expr y1() { return Expr::variable("y1"); }
Expr y2() { return Expr::variable("y2"); }

}  // namespace

LinearTwoFieldCase linear_two_field_case(int row) {
  LinearTwoFieldCase c;
  switch (row) {
    case 1: {  // distinct diagonal flux: separated densities
      const double a = 2.0, b = 1.0;
      c.sys = linear_flux_system("two-field-diagonal", Expr::constant(a) * y1(),
                                 Expr::constant(b) * y2());
      c.expected_type = TwoFieldType::Hyperbolic;
      c.equation_form = "h12 = 0";
      c.solutions_w = {(pow_int(w1(), 4) + pow_int(w2(), 3)).simplified(),
                       (exp(w1()) + cos(w2())).simplified(),
                       (pow_int(w1(), 2) - Expr::constant(3.0) * pow_int(w2(), 2))
                           .simplified()};
      break;
    }
    case 2: {  // nilpotent shear: densities affine in w2
      c.sys = linear_flux_system("two-field-shear", Expr::constant(0.0), y1());
      c.expected_type = TwoFieldType::Parabolic;
      c.equation_form = "h22 = 0";
      c.solutions_w = {(pow_int(w1(), 2) * w2() + pow_int(w1(), 3)).simplified(),
                       (sin(w1()) * w2()).simplified()};
      break;
    }
    case 3: {  // rotation: harmonic densities
      c.sys = linear_flux_system("two-field-rotation", -y2(), y1());
      c.expected_type = TwoFieldType::Elliptic;
      c.equation_form = "h11 + h22 = 0";
      c.solutions_w = {(pow_int(w1(), 2) - pow_int(w2(), 2)).simplified(),
                       (w1() * w2()).simplified(),
                       (pow_int(w1(), 3) -
                        Expr::constant(3.0) * w1() * pow_int(w2(), 2))
                           .simplified()};
      break;
    }
    case 4: {  // exchange flux: wave densities split along characteristics
      c.sys = linear_flux_system("two-field-wave", y2(), y1());
      c.expected_type = TwoFieldType::Hyperbolic;
      c.equation_form = "h22 - h11 = 0";
      c.solutions_w = {(pow_int(w1() + w2(), 2) + pow_int(w1() - w2(), 2)).simplified(),
                       pow_int(w1() + w2(), 3).simplified(),
                       exp(w1() - w2()).simplified()};
      break;
    }
    case 5: {  // mixed symmetric pair; type follows the sign of b^2 - a^2
      const double a = 1.0, b = 2.0;
      c.sys = linear_flux_system(
          "two-field-mixed",
          Expr::constant(a) * y1() - Expr::constant(b) * y2(),
          Expr::constant(b) * y1() - Expr::constant(a) * y2());
      c.expected_type = TwoFieldType::Elliptic;
      c.equation_form = "b*(h11 + h22) + 2*a*h12 = 0 with a=1, b=2";
      c.solutions_w = {(pow_int(w1(), 2) - Expr::constant(4.0) * w1() * w2() +
                        pow_int(w2(), 2))
                           .simplified(),
                       (pow_int(w1(), 2) - Expr::constant(2.0) * w1() * w2())
                           .simplified()};
      break;
    }
    default:
      throw DimensionMismatchError("linear_two_field_case: row must be 1..5");
  }
  return c;
}

}  // namespace sblab
