#pragma once

#include <functional>
#include <vector>

#include "sblab/expr.hpp"

namespace sblab {

// Chebyshev interpolant of a smooth function on [a, b].  Used to turn
// numerically-defined antiderivatives back into closed-form expressions.
class ChebyshevSeries {
 public:
  ChebyshevSeries() = default;
  ChebyshevSeries(std::vector<double> coeffs, double a, double b);

  // Interpolate f at `degree + 1` Chebyshev-Gauss nodes on [a, b].
  static ChebyshevSeries fit(const std::function<double(double)>& f, double a,
                             double b, int degree);

  // Series for x -> integral of f from a to x, built by accumulating
  // adaptive quadrature between sample nodes and refitting.
  static ChebyshevSeries fit_antiderivative(
      const std::function<double(double)>& f, double a, double b, int degree,
      double quad_tol = 1e-12);

  double eval(double x) const;  // Clenshaw recurrence
  double lower() const { return a_; }
  double upper() const { return b_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  // Drop trailing coefficients below `rel_tol * max|c_k|`.
  ChebyshevSeries trimmed(double rel_tol = 1e-13) const;

  // Expression in `var`, expanded to a monomial polynomial in the
  // normalized coordinate t = (2*var - a - b)/(b - a), Horner form.
  Expr to_expr(const std::string& var) const;

 private:
  std::vector<double> coeffs_;  // c_0 .. c_n, with the usual halved c_0
  double a_ = -1.0;
  double b_ = 1.0;
};

}  // namespace sblab
