#include "doctest.h"

#include "modalfb/config.hpp"
#include "modalfb/errors.hpp"
#include "modalfb/sim.hpp"

#include <cmath>

using namespace modalfb;

namespace {

const std::vector<double> kappa{-10.0, -11.0}, nu{-15.0, -16.0};

// largest singular value of a 2x2 matrix, closed form
double norm2x2(double a, double b, double c, double d)
{
    const double p = a * a + b * b + c * c + d * d;
    const double q = a * d - b * c;
    return std::sqrt(0.5 * (p + std::sqrt(std::max(0.0, p * p - 4.0 * q * q))));
}

struct Case {
    ExperimentConfig cfg;
    std::vector<EigenPair> sp;
    ModalCoefficients mc;
    CompensatorDesign d;
    LemmaSetup ls;
    Trajectory tr;
};

Case run_preset(const std::string& name)
{
    Case c;
    c.cfg = load_preset(name);
    const int M = c.cfg.sim_M, n = c.cfg.sim_n;
    c.mc = build_modal(c.cfg, M, &c.sp);
    c.d = design_compensator(c.mc, n, c.cfg.kappa, c.cfg.nu);
    c.ls = lemma_setup(c.mc, c.d, M);
    SimSettings s;
    s.M = M;
    s.T = c.cfg.sim_T;
    s.dt = c.cfg.sim_dt;
    const auto x0 = initial_state(c.cfg, M, &c.sp);
    c.tr = integrate(c.mc, c.d, x0, observer_at_rest(x0, n), s);
    return c;
}

bool all_pass(const std::vector<BoundCheck>& v)
{
    for (const auto& b : v) {
        if (!b.pass) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("zero data stays at rest")
{
    const auto mc = scalar_modal(ScalarPlant{}, 30);
    const auto d = design_compensator(mc, 5, kappa, nu);
    SimSettings s;
    s.M = 30;
    s.T = 0.5;
    const auto tr = integrate(mc, d, Eigen::VectorXd::Zero(30), Eigen::VectorXd::Zero(5), s);
    CHECK(tr.samples() == 501);
    CHECK(tr.norm_total().maxCoeff() == 0.0);
    CHECK(tr.u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagator of a diagonal matrix")
{
    Eigen::VectorXd l(4);
    l << 2.0, -1.0, -30.0, -400.0;
    const auto P = propagator(l.asDiagonal(), 1e-3);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(P(i, i) - std::exp(l[i] * 1e-3)) < 1e-12 * std::exp(l[i] * 1e-3));
    }
    CHECK((P - Eigen::MatrixXd(P.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("open loop is exact modal decay")
{
    const auto mc = scalar_modal(ScalarPlant{}, 40);
    const auto d = design_compensator(mc, 4, {}, {});
    SimSettings s;
    s.M = 40;
    s.T = 0.3;
    s.dt = 1e-3;
    const Eigen::VectorXd x0 = project_unit_scalar(40);
    const auto tr = integrate(mc, d, x0, Eigen::VectorXd::Zero(4), s);
    const int last = tr.samples() - 1;
    const double t = tr.t[last];
    for (int k = 0; k < 40; ++k) {
        const double got = k < 4 ? tr.xs(k, last) : tr.xf(k - 4, last);
        const double want = std::exp(mc.lambda[k] * t) * x0[k];
        // 300 products of the one-step propagator
        CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
    }
    // with no input the xk bound collapses to the free decay envelope and holds
    const auto ls = lemma_setup(scalar_modal(ScalarPlant{}, 40), design_compensator(mc, 4, kappa, nu), 40);
    CHECK(validate_lemma_xk(tr, mc, ls.constants).pass);
}

TEST_CASE("output and input are the modal sums")
{
    const auto mc = scalar_modal(ScalarPlant{}, 50);
    const auto d = design_compensator(mc, 5, kappa, nu);
    SimSettings s;
    s.M = 50;
    s.T = 0.2;
    const Eigen::VectorXd x0 = project_unit_scalar(50);
    const auto tr = integrate(mc, d, x0, observer_at_rest(x0, 5), s);
    for (int i : {0, 50, 200}) {
        double y = 0.0;
        for (int k = 0; k < 5; ++k) y += mc.C(k, 0) * tr.xs(k, i);
        for (int k = 5; k < 50; ++k) y += mc.C(k, 0) * tr.xf(k - 5, i);
        CHECK(tr.y(0, i) == doctest::Approx(y).epsilon(1e-12));
        double u = 0.0;
        for (int k = 0; k < 5; ++k) u -= d.K(0, k) * (tr.xs(k, i) - tr.es(k, i));
        CHECK(tr.u(0, i) == doctest::Approx(u).epsilon(1e-12));
    }
    // observer at rest: the estimate starts at zero
    CHECK((tr.xs.col(0) - tr.es.col(0)).norm() == 0.0);
}

TEST_CASE("store_every thins the record")
{
    const auto mc = scalar_modal(ScalarPlant{}, 20);
    const auto d = design_compensator(mc, 3, kappa, nu);
    SimSettings a, b;
    a.M = b.M = 20;
    a.T = b.T = 0.1;
    b.store_every = 10;
    const Eigen::VectorXd x0 = project_unit_scalar(20);
    const auto ta = integrate(mc, d, x0, observer_at_rest(x0, 3), a);
    const auto tb = integrate(mc, d, x0, observer_at_rest(x0, 3), b);
    CHECK(tb.samples() == 11);
    CHECK((ta.xf.col(100) - tb.xf.col(10)).norm() == 0.0);
    SimSettings bad = a;
    bad.dt = 0.0;
    CHECK_THROWS_AS(integrate(mc, d, x0, observer_at_rest(x0, 3), bad), Error);
}

TEST_CASE("decay fit")
{
    std::vector<double> t;
    Eigen::VectorXd y(201);
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.01 * i);
        y[i] = 3.0 * std::exp(-2.0 * t.back());
    }
    const auto f = fit_decay(t, y);
    CHECK(f.decay_rate == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(f.growth == -f.decay_rate);
    CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(f.residual < 1e-10);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(201);
    CHECK_THROWS_AS(fit_decay(t, z), Error);
    CHECK_THROWS_AS(fit_decay({0.0, 1.0}, Eigen::Vector2d(1.0, 0.5)), Error);
}

TEST_CASE("boundary loop decays no slower than its truncated spectral abscissa")
{
    const auto mc = scalar_modal(ScalarPlant{}, 400);
    const auto d = design_compensator(mc, 5, kappa, nu);
    SimSettings s;
    s.M = 400;
    const Eigen::VectorXd x0 = project_unit_scalar(400);
    const auto tr = integrate(mc, d, x0, observer_at_rest(x0, 5), s);
    const auto f = fit_decay(tr.t, tr.norm_total());
    CHECK(f.growth <= rho(assemble(5, 400, mc, d)) + 0.1);
    CHECK(f.growth < 0.0);
}

TEST_CASE("slowest closed-loop mode decays at exactly rho")
{
    ScalarPlant p;
    p.actuation = Actuation::InDomain;
    const auto mc = scalar_modal(p, 60);
    const auto d = design_compensator(mc, 5, kappa, nu);
    const auto sm = slowest_mode_state(mc, d, 60);
    SimSettings s;
    s.M = 60;
    s.T = 1.0;
    const auto a = integrate(mc, d, sm.re.x0, sm.re.e0, s);
    Eigen::VectorXd nrm = a.norm_total();
    if (sm.complex) {
        const auto b = integrate(mc, d, sm.im.x0, sm.im.e0, s);
        nrm = (nrm.array().square() + b.norm_total().array().square()).sqrt();
    }
    const auto f = fit_decay(a.t, nrm);
    CHECK(f.growth == doctest::Approx(rho(assemble(5, 60, mc, d))).epsilon(1e-6));
    CHECK(f.residual < 1e-8);
}

TEST_CASE("slow bound of a non-normal 2x2 block against a dense closed form")
{
    const double a = 6.0;
    Eigen::Matrix2d A;
    A << -1.0, a, 0.0, -2.0;
    const auto b = slow_bound(A);
    CHECK(b.lambda_tilde == doctest::Approx(0.2).epsilon(1e-14));
    // e^{At} = [[e^-t, a(e^-t - e^-2t)], [0, e^-2t]]
    double sup = 0.0, integral = 0.0, prev = 1.0;
    const int N = 200000;
    const double h = 60.0 / N;
    for (int i = 1; i <= N; ++i) {
        const double t = i * h;
        const double nrm = norm2x2(std::exp(-t), a * (std::exp(-t) - std::exp(-2 * t)), 0.0, std::exp(-2 * t));
        sup = std::max(sup, nrm * std::exp(0.2 * t));
        integral += 0.5 * h * (prev + nrm);
        prev = nrm;
    }
    CHECK(b.M_tilde >= sup * (1 - 1e-10));
    CHECK(b.M_tilde == doctest::Approx(sup).epsilon(1e-8));
    CHECK(b.int_norm == doctest::Approx(integral).epsilon(1e-4));
    Eigen::Matrix2d U;
    U << 0.5, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(slow_bound(U), Error);
}

TEST_CASE("slow ISS bound is trivial for the zero trajectory")
{
    const auto mc = scalar_modal(ScalarPlant{}, 30);
    const auto d = design_compensator(mc, 5, kappa, nu);
    const auto ls = lemma_setup(mc, d, 30);
    SimSettings s;
    s.M = 30;
    s.T = 0.1;
    const auto tr = integrate(mc, d, Eigen::VectorXd::Zero(30), Eigen::VectorXd::Zero(5), s);
    const auto r = validate_slow_iss(tr, z_norm_series(tr, mc, ls.constants), ls.constants);
    CHECK(r.pass);
    CHECK(r.min_slack >= 0.0);
}

TEST_CASE("proof bounds hold at full constants and lose at half")
{
    for (const char* name : {"scalar-boundary", "scalar-indomain-1"}) {
        CAPTURE(name);
        const auto c = run_preset(name);
        const auto full = c.ls.constants;
        const auto half = full.scaled(0.5);
        CHECK(all_pass(validate_all(c.tr, c.mc, full)));
        const auto pf = probe_fast_open_loop(c.mc, c.d, full, c.cfg.sim_M);
        const auto ps = probe_slow_only(c.mc, c.d, full);
        CHECK(validate_z_bound(pf, c.mc, full).pass);
        CHECK(validate_slow_iss(ps, z_norm_series(ps, c.mc, full), full).pass);
        // halved constants: every bound is caught by the default run or a probe
        for (const auto& b : validate_all(c.tr, c.mc, half)) {
            if (b.name == "xk" || b.name == "xf_l2" || b.name == "xf_l1") CHECK_FALSE(b.pass);
        }
        CHECK_FALSE(validate_z_bound(pf, c.mc, half).pass);
        CHECK_FALSE(validate_slow_iss(ps, z_norm_series(ps, c.mc, half), half).pass);
    }
}

TEST_CASE("field reconstruction")
{
    ScalarPlant p;
    const auto sp = scalar_spectrum(p, 400);
    const auto mc = scalar_modal(p, 400);
    SUBCASE("single mode is separable")
    {
        const auto d = design_compensator(mc.head(10), 3, {}, {});
        SimSettings s;
        s.M = 10;
        s.T = 0.1;
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);
        x0[1] = 1.0;
        const auto tr = integrate(mc.head(10), d, x0, Eigen::VectorXd::Zero(3), s);
        const std::vector<double> z{0.0, 0.3, 0.77};
        const auto f = reconstruct_field(tr, sp, z, {0, 100});
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double phi = std::sqrt(2.0) * std::cos(1.5 * M_PI * z[i]);
            CHECK(f[0](i, 0) == doctest::Approx(phi).epsilon(1e-12));
            CHECK(f[0](i, 1) == doctest::Approx(std::exp(mc.lambda[1] * 0.1) * phi).epsilon(1e-10));
        }
    }
    SUBCASE("unit profile from 400 modes")
    {
        const auto d = design_compensator(mc, 5, kappa, nu);
        SimSettings s;
        s.M = 400;
        s.T = 0.0;
        const Eigen::VectorXd x0 = project_unit_scalar(400);
        const auto tr = integrate(mc, d, x0, observer_at_rest(x0, 5), s);
        std::vector<double> z;
        for (int i = 0; i < 1000; ++i) z.push_back((i + 0.5) / 1000.0);
        const auto f = reconstruct_field(tr, sp, z, {0});
        const double l2 = std::sqrt((f[0].col(0).array() - 1.0).square().mean());
        // Parseval: the error is the energy left in modes > 400, with <1, phi_k> = 2 sqrt2 (-1)^{k+1} / ((2k-1) pi)
        double kept = 0.0;
        for (int k = 1; k <= 400; ++k) kept += 8.0 / std::pow((2 * k - 1) * M_PI, 2);
        CHECK(l2 == doctest::Approx(std::sqrt(1.0 - kept)).epsilon(0.05));
        CHECK_THROWS_AS(reconstruct_field(tr, sp, z, {5}), Error);
    }
}
