#include "modalfb/quadrature.hpp"

#include "modalfb/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace modalfb {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           int pieces, double abs_tol)
{
    using boost::math::quadrature::gauss_kronrod;
    pieces = std::max(pieces, 1);
    QuadratureResult out;
    double l1_total = 0.0;
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + p * h;
        const double hi = (p + 1 == pieces) ? b : lo + h;
        double err = 0.0;
        double l1 = 0.0;
        // relative target on the panel L1 norm keeps small panels from over-refining
        const double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, 10, 1e-10, &err, &l1);
        out.value += v;
        out.error += err;
        l1_total += l1;
    }
    // the tolerance is absolute for integrands of unit size and relative beyond that
    if (!std::isfinite(out.value) || out.error > abs_tol * std::max(1.0, l1_total)) {
        throw Error(ErrorKind::NotConverged,
                    "quadrature error estimate " + std::to_string(out.error) + " exceeds tolerance (L1 = " + std::to_string(l1_total) + ")");
    }
    return out;
}

double quad(const std::function<double(double)>& f, double a, double b, int pieces)
{
    return integrate(f, a, b, pieces).value;
}

}  // namespace modalfb
