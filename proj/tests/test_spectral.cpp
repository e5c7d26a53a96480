#include "doctest.h"

#include "modalfb/errors.hpp"
#include "modalfb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace modalfb;

namespace {

// Sturm count: number of eigenvalues of the symmetric tridiagonal (d, e) below x.
int sturm_below(const std::vector<double>& d, const std::vector<double>& e, double x)
{
    int count = 0;
    double q = d[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (q == 0.0) q = 1e-300;
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if (q < 0) ++count;
    }
    return count;
}

// k-th eigenvalue (from the top) of d^2/dz^2 + r with x'(0) = 0, x(1) = 0 on an N-cell grid.
double fd_eigenvalue(double r, int N, int k)
{
    const double h = 1.0 / N, h2 = h * h;
    std::vector<double> d(N, -2.0 / h2 + r), e(N - 1, 1.0 / h2);
    e[0] = std::sqrt(2.0) / h2;  // ghost-point Neumann row, symmetrized
    // eigenvalues below x: N - (number above); bisection on "exactly k above"
    double lo = -4.0 / h2 + r - 1.0, hi = r + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const int above = N - sturm_below(d, e, mid);
        if (above >= k) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Shooting determinant by classical RK4 on (x1, x1', x2, x2'), independent of the library propagator.
double rk4_det(const CoupledPlant& p, double lambda, int steps = 4000)
{
    auto rhs = [&](const std::array<double, 4>& s) {
        // x1'' = (lambda - alpha) x1 - r12 x2 ; 2 x2'' = (lambda - alpha) x2 - r21 x1
        return std::array<double, 4>{s[1], (lambda - p.alpha) * s[0] - p.r12 * s[2], s[3],
                                     0.5 * ((lambda - p.alpha) * s[2] - p.r21 * s[0])};
    };
    auto shoot = [&](std::array<double, 4> s) {
        const double h = 1.0 / steps;
        for (int i = 0; i < steps; ++i) {
            auto k1 = rhs(s);
            std::array<double, 4> t;
            for (int j = 0; j < 4; ++j) t[j] = s[j] + 0.5 * h * k1[j];
            auto k2 = rhs(t);
            for (int j = 0; j < 4; ++j) t[j] = s[j] + 0.5 * h * k2[j];
            auto k3 = rhs(t);
            for (int j = 0; j < 4; ++j) t[j] = s[j] + h * k3[j];
            auto k4 = rhs(t);
            for (int j = 0; j < 4; ++j) s[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        }
        return s;
    };
    const auto a = shoot({1.0, 0.0, 0.0, 0.0});  // x1(0) = 1
    const auto b = shoot({0.0, 0.0, 0.0, 1.0});  // x2'(0) = 1
    return a[0] * b[3] - b[0] * a[3];
}

double simpson(const std::function<double(double)>& f, int panels)
{
    const double h = 1.0 / panels;
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
}

CoupledPlant paper_plant() { return CoupledPlant{}; }

}  // namespace

TEST_CASE("scalar eigenvalues for r = 15")
{
    const auto sp = scalar_spectrum(ScalarPlant{}, 3);
    CHECK(sp[0].lambda == doctest::Approx(12.5326).epsilon(1e-5));
    CHECK(sp[1].lambda == doctest::Approx(-7.2066).epsilon(1e-5));
    CHECK(sp[2].lambda == doctest::Approx(-46.6850).epsilon(1e-5));
}

TEST_CASE("pure diffusion first eigenvalue")
{
    CHECK(scalar_eigenvalue(0.0, 1) == doctest::Approx(-M_PI * M_PI / 4.0).epsilon(1e-15));
}

TEST_CASE("k = 100 against a Richardson-extrapolated finite-difference eigenvalue")
{
    const double a = fd_eigenvalue(15.0, 10000, 100);
    const double b = fd_eigenvalue(15.0, 20000, 100);
    const double extrapolated = (4.0 * b - a) / 3.0;
    const double exact = 15.0 - std::pow(199.0 * M_PI / 2.0, 2);
    CHECK(scalar_eigenvalue(15.0, 100) == doctest::Approx(exact).epsilon(1e-15));
    CHECK(std::abs(extrapolated - exact) / std::abs(exact) < 1e-7);
}

TEST_CASE("scalar eigenfunctions are orthonormal and self-adjoint")
{
    ScalarPlant p;
    const auto sp = scalar_spectrum(p, 6);
    for (int k = 0; k < 6; ++k) {
        for (int l = 0; l < 6; ++l) {
            const double v = simpson([&](double z) { return sp[k].phi.value(z) * sp[l].psi.value(z); }, 4000);
            CHECK(std::abs(v - (k == l ? 1.0 : 0.0)) < 1e-9);
        }
        CHECK(std::abs(sp[k].phi.derivative(0.0)) < 1e-12);
        CHECK(std::abs(sp[k].phi.value(1.0)) < 1e-12);
    }
}

TEST_CASE("decoupled characteristic residual vanishes on both scalar branches")
{
    for (int k = 1; k <= 5; ++k) {
        const double w = (2 * k - 1) * M_PI / 2.0;
        CHECK(std::abs(coupled_char_residual(-w * w, 0.0, 0.0)) < 1e-10);
        CHECK(std::abs(coupled_char_residual(-2.0 * w * w, 0.0, 0.0)) < 1e-10);
    }
}

TEST_CASE("degenerate denominator is reported")
{
    CHECK_THROWS_AS(coupled_char_residual(std::sqrt(50.0), 5.0, 10.0), Error);
}

TEST_CASE("decoupled coupled plant splits into two scalar spectra")
{
    CoupledPlant p;
    p.alpha = 0.0;
    p.r12 = 0.0;
    p.r21 = 0.0;
    const auto sp = coupled_leading(p, 8);
    std::vector<double> oracle;
    for (int k = 1; k <= 8; ++k) {
        const double w = (2 * k - 1) * M_PI / 2.0;
        oracle.push_back(-w * w);
        oracle.push_back(-2.0 * w * w);
    }
    std::sort(oracle.begin(), oracle.end(), std::greater<>());
    for (int i = 0; i < 8; ++i) {
        CHECK(sp[i].lambda == doctest::Approx(oracle[i]).epsilon(1e-10));
    }
}

TEST_CASE("coupled eigenvalues are roots of an RK4 shooting determinant")
{
    const CoupledPlant p = paper_plant();
    const auto sp = coupled_leading(p, 6);
    for (const auto& e : sp) {
        const double h = 1e-6 * std::max(1.0, std::abs(e.lambda));
        CHECK(rk4_det(p, e.lambda - h) * rk4_det(p, e.lambda + h) < 0.0);
        CHECK(std::abs(coupled_char_residual(e.lambda - p.alpha, p.r12, p.r21)) < 1e-10);
    }
    // leading value agrees with the published one to its printed digits
    CHECK(sp[0].lambda == doctest::Approx(11.56).epsilon(1e-3));
}

TEST_CASE("merged coupled list is non-increasing and has no missed root")
{
    const CoupledPlant p = paper_plant();
    const auto sp = coupled_leading(p, 12);
    for (std::size_t i = 1; i < sp.size(); ++i) {
        CHECK(sp[i].lambda < sp[i - 1].lambda);
    }
    // independent scan of the RK4 determinant above the 12th eigenvalue counts the same roots
    int changes = 0;
    const double top = p.alpha + std::sqrt(p.r12 * p.r21) + 5.0;
    const double bottom = sp.back().lambda - 0.1;  // next root is far below
    double prev = rk4_det(p, top, 2000);
    for (double l = top - 0.05; l > bottom; l -= 0.05) {
        const double v = rk4_det(p, l, 2000);
        if (v * prev < 0.0) ++changes;
        prev = v;
    }
    CHECK(changes == static_cast<int>(sp.size()));
}

TEST_CASE("coupled eigenvectors: boundary rows and biorthonormality")
{
    const CoupledPlant p = paper_plant();
    const auto sp = coupled_leading(p, 6);
    for (const auto& e : sp) {
        CHECK(std::abs(e.phi.derivative(0.0, 0)) < 1e-8);
        CHECK(std::abs(e.phi.value(0.0, 1)) < 1e-8);
        CHECK(std::abs(e.phi.value(1.0, 0)) < 1e-8);
        CHECK(std::abs(e.phi.derivative(1.0, 1)) < 1e-8);
    }
    for (std::size_t k = 0; k < sp.size(); ++k) {
        for (std::size_t l = 0; l < sp.size(); ++l) {
            const double v = simpson(
                [&](double z) {
                    return sp[k].phi.value(z, 0) * sp[l].psi.value(z, 0) + sp[k].phi.value(z, 1) * sp[l].psi.value(z, 1);
                },
                6000);
            CHECK(std::abs(v - (k == l ? 1.0 : 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("k = 30 coupled eigenvalues sit within O(k^-2) of the asymptotic branches")
{
    const CoupledPlant p = paper_plant();
    const auto sp = coupled_spectrum(p, 30);
    for (const auto& e : sp) {
        if (e.k != 30) continue;
        const double a = coupled_asymptotic_eigenvalue(p, e.branch, e.k);
        CHECK(30.0 * 30.0 * std::abs(e.lambda - a) < 10.0);
    }
}

TEST_CASE("Riesz closeness vanishes without coupling")
{
    CoupledPlant p;
    p.r12 = 0.0;
    p.r21 = 0.0;
    const auto rc = riesz_closeness(p, 5, 8);
    for (int b = 0; b < 2; ++b) {
        for (double v : rc.value[b]) {
            CHECK(v < 1e-12);
        }
    }
}

TEST_CASE("log-log slope of a power law")
{
    std::vector<double> x, y;
    for (int k = 1; k <= 20; ++k) {
        x.push_back(k);
        y.push_back(3.0 * std::pow(k, -2.5));
    }
    CHECK(loglog_slope(x, y) == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("pulse outside the domain is rejected")
{
    ScalarPlant p;
    p.actuation = Actuation::InDomain;
    p.zeta = 0.98;
    p.eps = 0.05;
    CHECK_THROWS_AS(p.validate(), Error);
}
