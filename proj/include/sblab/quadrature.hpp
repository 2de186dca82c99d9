#pragma once

#include <functional>

namespace sblab {

// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a, b] (a may exceed b)
// to the given absolute tolerance, by recursive bisection on the K15-G7 error
// estimate.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace sblab
