#pragma once

#include <functional>

namespace modalfb {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) over [a,b], split into `pieces` equal panels
/// first so that oscillatory integrands do not stall the bisection.
/// Throws NotConverged when the estimate misses abs_tol.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           int pieces = 1, double abs_tol = 1e-10);

double quad(const std::function<double(double)>& f, double a, double b, int pieces = 1);

}  // namespace modalfb
