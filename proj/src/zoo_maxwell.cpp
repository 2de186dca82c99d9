#include <string>

#include "sblab/model_zoo.hpp"

namespace sblab {

namespace {

Expr evar(int i) { return Expr::variable("E" + std::to_string(i + 1)); }
Expr bvar(int i) { return Expr::variable("B" + std::to_string(i + 1)); }

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

Expr scaled(int sign, Expr e) {
  if (sign == 1) return e;
  if (sign == -1) return (-e).simplified();
  return Expr::constant(0.0);
}

}  // namespace

BalanceSystem maxwell_system() {
  BalanceSystem sys;
  sys.name = "maxwell";
  sys.field_names = {"E1", "E2", "E3", "B1", "B2", "B3"};
  sys.spatial_dim = 3;
  for (int i = 0; i < 6; ++i) {
    sys.densities.push_back(Expr::variable(sys.field_names[i]));
    sys.productions.push_back(Expr::constant(0.0));
  }
  sys.fluxes.assign(3, {});
  for (int axis = 0; axis < 3; ++axis) {
    auto& row = sys.fluxes[axis];
    for (int i = 0; i < 3; ++i) {  // d/dt E_i = (curl B)_i
      Expr f = Expr::constant(0.0);
      for (int k = 0; k < 3; ++k)
        f = f + scaled(-levi_civita(i, axis, k), bvar(k));
      row.push_back(f.simplified());
    }
    for (int i = 0; i < 3; ++i) {  // d/dt B_i = -(curl E)_i
      Expr f = Expr::constant(0.0);
      for (int k = 0; k < 3; ++k)
        f = f + scaled(levi_civita(i, axis, k), evar(k));
      row.push_back(f.simplified());
    }
  }
  sys.domain_box.assign(6, {-1.0, 1.0});
  sys.validate();
  return sys;
}

SblCandidate maxwell_energy_candidate() {
  SblCandidate c;
  Expr half = Expr::constant(0.5);
  Expr e2 = pow_int(evar(0), 2) + pow_int(evar(1), 2) + pow_int(evar(2), 2);
  Expr b2 = pow_int(bvar(0), 2) + pow_int(bvar(1), 2) + pow_int(bvar(2), 2);
  c.K0 = (half * (e2 + b2)).simplified();
  for (int axis = 0; axis < 3; ++axis) {
    Expr p = Expr::constant(0.0);  // Poynting component (E x B)_axis
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        int s = levi_civita(axis, j, k);
        if (s != 0) p = p + scaled(s, (evar(j) * bvar(k)).simplified());
      }
    c.KA.push_back(p.simplified());
  }
  c.Q = Expr::constant(0.0);
  return c;
}

SblCandidate maxwell_divergence_candidate(bool electric) {
  SblCandidate c;
  c.K0 = Expr::constant(0.0);
  for (int axis = 0; axis < 3; ++axis)
    c.KA.push_back(electric ? evar(axis) : bvar(axis));
  c.Q = Expr::constant(0.0);
  return c;
}

}  // namespace sblab
