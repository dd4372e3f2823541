#pragma once

#include <functional>

namespace entwb {

/// Adaptive Gauss-Kronrod (7-15) integration of f over [a, b] to the given
/// absolute tolerance, by recursive bisection of intervals whose Kronrod
/// error estimate exceeds their share. QuadratureFailure if the tolerance
/// is unreachable at machine-width subintervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace entwb
