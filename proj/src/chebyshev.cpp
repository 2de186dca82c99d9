#include "sblab/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sblab/errors.hpp"
#include "sblab/quadrature.hpp"

namespace sblab {

namespace {

// Chebyshev-Gauss nodes in [-1, 1], descending in k: cos(pi*(k+1/2)/N).
std::vector<double> cheb_nodes(int count) {
  std::vector<double> t(count);
  for (int k = 0; k < count; ++k)
    t[k] = std::cos(std::numbers::pi * (k + 0.5) / count);
  return t;
}

std::vector<double> coeffs_from_node_values(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<double> c(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += values[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
    c[j] = 2.0 * acc / n;
  }
  return c;
}

}  // namespace

ChebyshevSeries::ChebyshevSeries(std::vector<double> coeffs, double a, double b)
    : coeffs_(std::move(coeffs)), a_(a), b_(b) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  if (!(a_ < b_)) throw NumericError("chebyshev interval is empty");
}

ChebyshevSeries ChebyshevSeries::fit(const std::function<double(double)>& f,
                                     double a, double b, int degree) {
  if (degree < 0) throw NumericError("chebyshev degree must be >= 0");
  const int n = degree + 1;
  const auto t = cheb_nodes(n);
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k)
    values[k] = f(0.5 * (b - a) * t[k] + 0.5 * (a + b));
  return ChebyshevSeries(coeffs_from_node_values(values), a, b);
}

ChebyshevSeries ChebyshevSeries::fit_antiderivative(
    const std::function<double(double)>& f, double a, double b, int degree,
    double quad_tol) {
  if (degree < 0) throw NumericError("chebyshev degree must be >= 0");
  const int n = degree + 1;
  const auto t = cheb_nodes(n);
  // Nodes are strictly descending in k; integrate cumulatively left to right.
  std::vector<double> values(n);
  double x_prev = a;
  double acc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double x = 0.5 * (b - a) * t[i] + 0.5 * (a + b);
    acc += integrate(f, x_prev, x, quad_tol);
    values[i] = acc;
    x_prev = x;
  }
  return ChebyshevSeries(coeffs_from_node_values(values), a, b);
}

double ChebyshevSeries::eval(double x) const {
  const double t = (2.0 * x - a_ - b_) / (b_ - a_);
  double b1 = 0.0, b2 = 0.0;
  for (int j = static_cast<int>(coeffs_.size()) - 1; j >= 1; --j) {
    const double b0 = 2.0 * t * b1 - b2 + coeffs_[j];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + 0.5 * coeffs_[0];
}

ChebyshevSeries ChebyshevSeries::trimmed(double rel_tol) const {
  double max_abs = 0.0;
  for (double c : coeffs_) max_abs = std::max(max_abs, std::abs(c));
  std::size_t keep = 1;
  for (std::size_t j = 0; j < coeffs_.size(); ++j)
    if (std::abs(coeffs_[j]) >= rel_tol * max_abs) keep = j + 1;
  std::vector<double> c(coeffs_.begin(), coeffs_.begin() + keep);
  return ChebyshevSeries(std::move(c), a_, b_);
}

Expr ChebyshevSeries::to_expr(const std::string& var) const {
  // Expand sum of T_j into monomials in t, then emit Horner form with
  // t = (2*var - a - b)/(b - a).
  const std::size_t n = coeffs_.size();
  std::vector<double> mono(n, 0.0);
  std::vector<double> t_prev{1.0};       // T_0
  std::vector<double> t_cur{0.0, 1.0};   // T_1
  for (std::size_t j = 0; j < n; ++j) {
    const double cj = (j == 0) ? 0.5 * coeffs_[0] : coeffs_[j];
    const std::vector<double>& tj = (j == 0) ? t_prev : t_cur;
    for (std::size_t m = 0; m < tj.size(); ++m) mono[m] += cj * tj[m];
    if (j >= 1 && j + 1 < n) {
      std::vector<double> t_next(j + 2, 0.0);
      for (std::size_t m = 0; m < t_cur.size(); ++m)
        t_next[m + 1] = 2.0 * t_cur[m];
      for (std::size_t m = 0; m < t_prev.size(); ++m) t_next[m] -= t_prev[m];
      t_prev = std::move(t_cur);
      t_cur = std::move(t_next);
    }
  }

  const Expr x = Expr::variable(var);
  const Expr t = Expr::constant(2.0 / (b_ - a_)) * x +
                 Expr::constant(-(a_ + b_) / (b_ - a_));
  Expr acc = Expr::constant(mono[n - 1]);
  for (std::size_t m = n - 1; m-- > 0;)
    acc = Expr::constant(mono[m]) + t * acc;
  return acc.simplified();
}

}  // namespace sblab
