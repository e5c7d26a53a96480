#include "doctest.h"

#include "modalfb/assumptions.hpp"
#include "modalfb/errors.hpp"

#include <cmath>
#include <sstream>

using namespace modalfb;

namespace {

EigenvalueFn neg_square = [](int k) { return -static_cast<double>(k) * k; };

double simpson(const std::function<double(double)>& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

ModalCoefficients indomain(int K, double zeta = 0.5)
{
    ScalarPlant p;
    p.actuation = Actuation::InDomain;
    p.zeta = zeta;
    return scalar_modal(p, K);
}

}  // namespace

TEST_CASE("eigenvalue sum of -k^2 is the Basel constant")
{
    const auto r = check_A1(neg_square, 0, 1000);
    CHECK(r.pass);
    CHECK(r.monotone);
    CHECK(r.exponent == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(r.M_lambda - M_PI * M_PI / 6.0) < 1e-6);
    CHECK(r.tail >= M_PI * M_PI / 6.0 - r.partial);
}

TEST_CASE("harmonic eigenvalues diverge")
{
    CHECK_THROWS_AS(check_A1([](int k) { return -static_cast<double>(k); }, 0, 500), Error);
    try {
        check_A1([](int k) { return -static_cast<double>(k); }, 0, 500);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Divergent);
    }
}

TEST_CASE("unstable retained mode and non-monotone list are reported")
{
    // lambda_1 = 2, lambda_2 = -1
    const auto a = check_A1([](int k) { return 3.0 - k * k; }, 1, 200);
    CHECK(a.pass);
    const auto b = check_A1([](int k) { return 3.0 - k * k; }, 0, 200);
    CHECK_FALSE(b.pass);
    CHECK(b.witness == 1);
    // lambda_7 = -30 sits above lambda_6 = -36
    const auto c = check_A1([](int k) { return k == 7 ? -30.0 : -1.0 * k * k; }, 0, 200);
    CHECK_FALSE(c.monotone);
    CHECK(c.witness == 7);
}

TEST_CASE("in-domain actuation decays with alpha = 2")
{
    const auto mc = indomain(400);
    const auto r = check_A2a(mc, 5, 400, 2.0);
    CHECK(r.pass);
    CHECK(r.alpha == 2.0);
    CHECK(r.d1 <= 1.0 / (std::sqrt(2.0) * M_PI * 0.05));
    // largest |c_k| at the quarter point is sqrt2 cos(pi/8)
    CHECK(r.c2 == doctest::Approx(std::sqrt(2.0) * std::cos(M_PI / 8.0)).epsilon(1e-12));
    // fitted exponent is at least 2 on the envelope
    const auto f = check_A2a(mc, 5, 400);
    CHECK(f.alpha_fit > 1.9);
}

TEST_CASE("boundary actuation fails the summable-decay assumption")
{
    const auto mc = scalar_modal(ScalarPlant{}, 400);
    const auto r = check_A2a(mc, 5, 400);
    CHECK_FALSE(r.pass);
    CHECK(r.alpha_fit == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("decay fit ignores a rescaling of the input")
{
    auto mc = indomain(300);
    const auto a = check_A2a(mc, 5, 300);
    mc.B *= 3.0;
    const auto b = check_A2a(mc, 5, 300);
    CHECK(a.alpha_fit == doctest::Approx(b.alpha_fit).epsilon(1e-12));
    CHECK(b.d1 == doctest::Approx(3.0 * a.d1).epsilon(1e-12));
}

TEST_CASE("coupled plant satisfies the decay assumption")
{
    CoupledPlant p;
    const auto mc = coupled_modal(p, coupled_spectrum(p, 100));
    const auto r = check_A2a(mc, 10, 200);
    CHECK(r.pass);
    CHECK(r.alpha > 1.0);
}

TEST_CASE("boundary growth constants")
{
    const auto mc = scalar_modal(ScalarPlant{}, 200);
    const auto r = check_A2b_growth(mc, 3, 200);
    CHECK(r.pass);
    CHECK(r.c1 <= M_PI * std::sqrt(2.0) + 1e-12);
    CHECK(r.c3 > 0.0);
    CHECK(r.c3 <= M_PI * M_PI);
}

TEST_CASE("signed input series converges on the boundary plant")
{
    const auto mc = scalar_modal(ScalarPlant{}, 2000);
    const auto r = check_A2b_series(mc, 3, 1000);
    CHECK(r.pass);
    CHECK(r.spread < r.spread_prev);
    // a same-sign harmonic series keeps spreading
    auto bad = mc;
    for (int k = 0; k < bad.modes(); ++k) bad.B(k, 0) = std::abs(bad.B(k, 0)) * -1.0;
    CHECK_FALSE(check_A2b_series(bad, 3, 1000).pass);
}

TEST_CASE("pairing period of the sensor coefficients")
{
    ScalarPlant p;
    SUBCASE("quarter point")
    {
        const auto g = build_Sj(scalar_modal(p, 64), 3, 64);
        CHECK(g.k1 == 8);
        CHECK(g.pairing_residual < 1e-12);
        CHECK(g.s == 2);
        for (std::size_t i = 0; i < g.sets.size(); ++i) {
            for (int k : g.sets[i]) CHECK(k > 3);
        }
    }
    SUBCASE("sensor at the Neumann end")
    {
        p.xi = 0.0;
        CHECK(build_Sj(scalar_modal(p, 64), 0, 64).k1 == 2);
    }
    SUBCASE("irrational location has no period")
    {
        p.xi = 1.0 / std::sqrt(2.0);
        try {
            build_Sj(scalar_modal(p, 128), 0, 128);
            FAIL("expected NoPeriodFound");
        } catch (const NoPeriodFoundError& e) {
            CHECK(e.kind() == ErrorKind::NoPeriodFound);
            CHECK(e.residual() > 1e-10);
        }
    }
}

TEST_CASE("group members follow the mirror pairing")
{
    CHECK(group_members(1, 8) == std::vector<int>{1, 8});
    CHECK(group_members(4, 8) == std::vector<int>{4, 5});
    CHECK(group_members(5, 8) == std::vector<int>{9, 16});
    CHECK_THROWS_AS(group_members(1, 3), Error);
}

TEST_CASE("gamma sequence for quadratic eigenvalues")
{
    const auto g = check_gamma(neg_square, 0, 500, {0, 1, 2, 5});
    CHECK(g.at(0) == 0.0);
    for (int m : {1, 2, 5}) {
        // k^3 |1/k^2 - 1/(k+m)^2| = k(2km + m^2)/(k+m)^2 <= 2m
        CHECK(g.at(m) <= 2.0 * m + 1e-12);
        CHECK(g.at(m) > 1.5 * m);
    }
}

TEST_CASE("eta function")
{
    CHECK_THROWS_AS(eta_n(0.0, neg_square, 0, 10), Error);
    const double a = eta_n(0.1, neg_square, 2, 200).value;
    const double b = eta_n(0.2, neg_square, 2, 200).value;
    CHECK(b < a);
    CHECK(eta_n(0.3, neg_square, 4, 5).value == doctest::Approx(std::exp(-25.0 * 0.3)).epsilon(1e-15));
    // truncation bound covers the neglected tail
    const auto shortsum = eta_n(0.01, neg_square, 2, 30);
    const double longsum = eta_n(0.01, neg_square, 2, 3000).value;
    CHECK(longsum - shortsum.value <= shortsum.tail_bound);
}

TEST_CASE("eta integral against quadrature in s = sqrt(t)")
{
    const int n = 2, K = 200;
    const double T = 1.0;
    // int_0^T eta dt = int_0^sqrt(T) 2 s eta(s^2) ds, smooth at s = 0
    const double oracle = simpson(
        [&](double s) {
            double v = 0.0;
            for (int k = n + 1; k <= K; ++k) v += std::exp(-static_cast<double>(k) * k * s * s);
            return 2.0 * s * v;
        },
        0.0, std::sqrt(T), 20000);
    CHECK(std::abs(eta_integral(neg_square, n, K, T) - oracle) / oracle < 1e-6);
    double inv = 0.0;
    for (int k = n + 1; k <= K; ++k) inv += 1.0 / (static_cast<double>(k) * k);
    CHECK(eta_integral(neg_square, n, K) == doctest::Approx(inv).epsilon(1e-14));
}

TEST_CASE("Hurwitz zeta")
{
    CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-14));
    CHECK(hurwitz_zeta(3.0, 1.0) == doctest::Approx(1.2020569031595942).epsilon(1e-14));
    for (int n : {1, 5, 50}) CHECK(hurwitz_zeta(2.0, n + 1.0) <= 1.0 / n);
    double brute = 0.0;
    const int N = 1000000;
    for (int k = N - 1; k >= 0; --k) brute += 1.0 / ((11.0 + k) * (11.0 + k));
    brute += 1.0 / (N + 11.0 - 0.5);  // midpoint tail
    CHECK(hurwitz_zeta(2.0, 11.0) == doctest::Approx(brute).epsilon(1e-11));
    CHECK_THROWS_AS(hurwitz_zeta(1.0, 1.0), Error);
    CHECK_THROWS_AS(hurwitz_zeta(2.0, 0.0), Error);
}

TEST_CASE("group kernel integrals")
{
    const auto mc = scalar_modal(ScalarPlant{}, 64);
    SUBCASE("single mode has a closed form")
    {
        const double a = std::abs(mc.C(4, 0) * mc.B(4, 0)), l = mc.lambda[4];
        CHECK(group_abs_integral({5}, mc, 0.01) == doctest::Approx(a * -std::expm1(l * 0.01) / -l).epsilon(1e-13));
        CHECK(group_abs_integral({5}, mc, INFINITY) == doctest::Approx(a / -l).epsilon(1e-13));
        CHECK(group_abs_integral({5}, mc, 0.0) == 0.0);
    }
    SUBCASE("zero coefficient")
    {
        auto z = mc;
        z.B(6, 0) = 0.0;
        CHECK(group_abs_integral({7}, z, 1.0) == 0.0);
    }
    SUBCASE("pairs against a fine quadrature")
    {
        const auto g = build_Sj(mc, 3, 64);
        const auto r = check_Hj_bound(g, mc, INFINITY);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.sets.size(); ++i) {
            auto h = [&](double t) {
                double v = 0.0;
                for (int k : g.sets[i]) v += mc.C(k - 1, 0) * mc.B(k - 1, 0) * std::exp(mc.lambda[k - 1] * t);
                return std::abs(v);
            };
            const double slow = 1.0 / -mc.lambda[g.sets[i][0] - 1];
            // |h| has kinks at sign changes, so use many panels on a geometric split
            double oracle = simpson(h, 0.0, 0.05 * slow, 20000) + simpson(h, 0.05 * slow, 40.0 * slow, 200000);
            CHECK(r.integral[i] == doctest::Approx(oracle).epsilon(1e-6));
            worst = std::max(worst, static_cast<double>(g.j[i]) * g.j[i] * oracle);
        }
        CHECK(r.max_scaled == doctest::Approx(worst).epsilon(1e-6));
    }
}

TEST_CASE("closed-loop slow spectra and the full report")
{
    const auto mc = scalar_modal(ScalarPlant{}, 2000);
    const auto d = design_compensator(mc, 5, {-10.0, -11.0}, {-15.0, -16.0});
    const auto a0 = check_A0(mc, d);
    CHECK(a0.pass);
    CHECK(a0.delta < 0.0);
    std::vector<double> lam(mc.lambda.data(), mc.lambda.data() + mc.modes());
    const auto r = check_assumptions(mc, d, tabulated_eigenvalues(lam), 1000);
    CHECK(r.a1.pass);
    CHECK(r.grouping_ok);
    CHECK(r.grouping.k1 == 8);
    std::ostringstream os;
    write_report(os, r);
    CHECK(os.str().find("series_spread") != std::string::npos);
    CHECK_THROWS_AS(tabulated_eigenvalues(lam)(0), Error);
}
