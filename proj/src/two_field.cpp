#include <algorithm>
#include <cmath>
#include <limits>

#include "sblab/defining_system.hpp"
#include "sblab/errors.hpp"

namespace sblab {

namespace {

void require_two_field(const SystemEvaluator& ev) {
  if (ev.m() != 2 || ev.spatial_dim() != 1)
    throw DimensionMismatchError(
        "operation requires a two-field system with one spatial axis");
}

struct QuadCoeffs {
  double a, b, c;  // a*l^2 + 2b*l + c
};

QuadCoeffs characteristic_coeffs(const SystemEvaluator& ev,
                                 std::span<const double> y) {
  const Eigen::MatrixXd Fy = ev.flux_jacobian_matrix(0, y);
  return {-Fy(0, 1), 0.5 * (Fy(0, 0) - Fy(1, 1)), Fy(1, 0)};
}

std::pair<double, double> roots_at(const QuadCoeffs& q) {
  const double det = q.a * q.c - q.b * q.b;
  if (det >= 0.0)
    throw NotHyperbolicError("characteristic form is not hyperbolic (det J >= 0)");
  const double scale = std::max({1.0, std::abs(q.b), std::abs(q.c)});
  if (std::abs(q.a) <= 1e-13 * scale)
    throw NumericError("characteristic quadratic degenerates (vertical root)");
  const double disc = std::sqrt(q.b * q.b - q.a * q.c);
  const double t = -(q.b + std::copysign(disc, q.b == 0.0 ? 1.0 : q.b));
  double l1 = t / q.a;
  double l2 = q.c / t;
  if (l1 > l2) std::swap(l1, l2);
  return {l1, l2};
}

}  // namespace

TwoFieldReport two_field_J(const SystemEvaluator& ev, const StatePoint& p,
                           double det_tol) {
  require_two_field(ev);
  const auto y = state_vector(ev.system(), p);
  const QuadCoeffs q = characteristic_coeffs(ev, y);
  TwoFieldReport out;
  out.J << q.a, q.b, q.b, q.c;
  out.detJ = q.a * q.c - q.b * q.b;
  if (out.detJ > det_tol)
    out.type = TwoFieldType::Elliptic;
  else if (out.detJ < -det_tol)
    out.type = TwoFieldType::Hyperbolic;
  else
    out.type = TwoFieldType::Parabolic;
  return out;
}

std::pair<double, double> characteristic_roots(const SystemEvaluator& ev,
                                               const StatePoint& p) {
  require_two_field(ev);
  const auto y = state_vector(ev.system(), p);
  return roots_at(characteristic_coeffs(ev, y));
}

RiemannField riemann_invariant_grid(const SystemEvaluator& ev,
                                    const RiemannGrid& grid, CharFamily which) {
  require_two_field(ev);
  if (grid.n1 < 2 || grid.n2 < 2)
    throw DimensionMismatchError("riemann grid needs at least 2x2 nodes");
  if (!(grid.y1.lo < grid.y1.hi) || !(grid.y2.lo < grid.y2.hi))
    throw DimensionMismatchError("riemann grid box is empty");

  auto node1 = [&](int i) {
    return grid.y1.lo + grid.y1.width() * i / (grid.n1 - 1);
  };
  auto node2 = [&](int j) {
    return grid.y2.lo + grid.y2.width() * j / (grid.n2 - 1);
  };

  // Reject grids that are not strictly hyperbolic at every node.
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j) {
      const double y[2] = {node1(i), node2(j)};
      const QuadCoeffs q = characteristic_coeffs(ev, y);
      if (q.a * q.c - q.b * q.b >= 0.0)
        throw NotHyperbolicError(
            "characteristic form is not hyperbolic on the grid");
    }

  auto slope = [&](double y1, double y2) {
    const double y[2] = {y1, y2};
    const auto [l1, l2] = roots_at(characteristic_coeffs(ev, y));
    return which == CharFamily::First ? -l1 : -l2;
  };

  RiemannField field;
  field.values.resize(grid.n1, grid.n2);
  field.truncated.assign(static_cast<std::size_t>(grid.n1) * grid.n2, 0);

  const double h0 =
      grid.y1.width() / (8.0 * std::max(grid.n1, grid.n2));
  for (int i = 0; i < grid.n1; ++i) {
    for (int j = 0; j < grid.n2; ++j) {
      double x = node1(i);
      double v = node2(j);
      const double span = x - grid.y1.lo;
      bool truncated = false;
      if (span > 0.0) {
        const int steps = std::max(1, static_cast<int>(std::ceil(span / h0)));
        const double h = -span / steps;
        for (int s = 0; s < steps && !truncated; ++s) {
          const double k1 = slope(x, v);
          const double k2 = slope(x + 0.5 * h, v + 0.5 * h * k1);
          const double k3 = slope(x + 0.5 * h, v + 0.5 * h * k2);
          const double k4 = slope(x + h, v + h * k3);
          v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          x += h;
          if (!grid.y2.contains(v)) truncated = true;
        }
      }
      const std::size_t idx = static_cast<std::size_t>(i) * grid.n2 + j;
      if (truncated) {
        field.values(i, j) = std::numeric_limits<double>::quiet_NaN();
        field.truncated[idx] = 1;
        field.any_truncated = true;
      } else {
        field.values(i, j) = v;
      }
    }
  }
  return field;
}

}  // namespace sblab
