#include "modalfb/sim.hpp"

#include "modalfb/dimfind.hpp"
#include "modalfb/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modalfb {

namespace {

double op_norm(const Eigen::MatrixXd& A)
{
    if (A.size() == 0) {
        return 0.0;
    }
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
}

// Records rhs - lhs and lhs / rhs over a validation run.
struct Tally {
    BoundCheck r;
    explicit Tally(std::string name)
    {
        r.name = std::move(name);
        r.min_slack = std::numeric_limits<double>::infinity();
    }
    void add(double lhs, double rhs, double t, int k)
    {
        const double slack = rhs - lhs;
        if (slack < r.min_slack) {
            r.min_slack = slack;
            r.t_witness = t;
            r.k_witness = k;
        }
        if (rhs > 0.0) {
            r.tightness = std::max(r.tightness, lhs / rhs);
        } else if (lhs > 0.0) {
            r.tightness = std::numeric_limits<double>::infinity();
        }
        // round-off allowance only
        if (lhs > rhs * (1.0 + 1e-9) + 1e-14) {
            r.pass = false;
        }
    }
};

}  // namespace

Eigen::VectorXd Trajectory::norm_xs_tilde() const
{
    return (xs.colwise().squaredNorm() + es.colwise().squaredNorm()).cwiseSqrt().transpose();
}
Eigen::VectorXd Trajectory::norm_xs() const { return xs.colwise().norm().transpose(); }
Eigen::VectorXd Trajectory::norm_es() const { return es.colwise().norm().transpose(); }
Eigen::VectorXd Trajectory::norm_xf2() const { return xf.colwise().norm().transpose(); }
Eigen::VectorXd Trajectory::norm_xf1() const { return xf.cwiseAbs().colwise().sum().transpose(); }
Eigen::VectorXd Trajectory::norm_total() const
{
    return (xs.colwise().squaredNorm() + es.colwise().squaredNorm() + xf.colwise().squaredNorm())
        .cwiseSqrt()
        .transpose();
}

Eigen::VectorXd Trajectory::sup_estimate_input() const
{
    Eigen::VectorXd s = (xs - es).colwise().norm().transpose();
    for (Eigen::Index i = 1; i < s.size(); ++i) {
        s[i] = std::max(s[i], s[i - 1]);
    }
    return s;
}

Eigen::MatrixXd propagator(const Eigen::MatrixXd& A, double dt)
{
    Eigen::MatrixXd P = (A * dt).exp();
    if (!P.allFinite()) {
        throw Error(ErrorKind::PropagatorFailure, "matrix exponential produced non-finite entries");
    }
    return P;
}

Eigen::VectorXd observer_at_rest(const Eigen::VectorXd& x0, int n) { return x0.head(n); }

Trajectory integrate(const ModalCoefficients& mc, const CompensatorDesign& d, const Eigen::VectorXd& x0,
                     const Eigen::VectorXd& e0, const SimSettings& s)
{
    const int n = d.n;
    const int M = s.M;
    if (M < n || M > mc.modes() || x0.size() < M || e0.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "initial data or truncation inconsistent with the design");
    }
    if (!(s.dt > 0.0) || !(s.T >= 0.0) || s.store_every < 1) {
        throw Error(ErrorKind::InvalidArgument, "need dt > 0, T >= 0, store_every >= 1");
    }
    const Eigen::MatrixXd A = assemble(n, M, mc, d);
    const Eigen::MatrixXd P = propagator(A, s.dt);
    const long steps = std::lround(s.T / s.dt);
    const long stored = steps / s.store_every + 1;

    Trajectory tr;
    tr.n = n;
    tr.M = M;
    tr.dt = s.dt;
    tr.t.reserve(stored);
    tr.xs.resize(n, stored);
    tr.es.resize(n, stored);
    tr.xf.resize(M - n, stored);
    Eigen::VectorXd x(n + M);
    x << x0.head(n), e0, x0.segment(n, M - n);
    long col = 0;
    auto record = [&](long step) {
        tr.t.push_back(step * s.dt);
        tr.xs.col(col) = x.head(n);
        tr.es.col(col) = x.segment(n, n);
        tr.xf.col(col) = x.tail(M - n);
        ++col;
    };
    record(0);
    Eigen::VectorXd next(n + M);
    for (long i = 1; i <= steps; ++i) {
        next.noalias() = P * x;
        x.swap(next);
        if (i % s.store_every == 0) {
            record(i);
        }
    }
    tr.xs.conservativeResize(n, col);
    tr.es.conservativeResize(n, col);
    tr.xf.conservativeResize(M - n, col);
    tr.y = mc.C.topRows(n).transpose() * tr.xs + mc.C.middleRows(n, M - n).transpose() * tr.xf;
    tr.u = -d.K * (tr.xs - tr.es);
    return tr;
}

DecayFit fit_decay(const std::vector<double>& t, const Eigen::VectorXd& norm, double floor, double window_fraction)
{
    if (static_cast<Eigen::Index>(t.size()) != norm.size()) {
        throw Error(ErrorKind::DimensionMismatch, "time grid and series differ in length");
    }
    std::size_t end = 0;
    while (end < t.size() && norm[end] > floor && std::isfinite(norm[end])) {
        ++end;
    }
    if (end < 2) {
        throw Error(ErrorKind::WindowTooShort, "series drops below the floor immediately");
    }
    const double t_end = t[end - 1];
    const double t_begin = t_end - window_fraction * (t_end - t[0]);
    std::vector<double> tt, yy;
    for (std::size_t i = 0; i < end; ++i) {
        if (t[i] >= t_begin) {
            tt.push_back(t[i]);
            yy.push_back(std::log(norm[i]));
        }
    }
    if (tt.size() < 3) {
        throw Error(ErrorKind::WindowTooShort, "fewer than three samples in the fit window");
    }
    const double N = static_cast<double>(tt.size());
    const double mt = std::accumulate(tt.begin(), tt.end(), 0.0) / N;
    const double my = std::accumulate(yy.begin(), yy.end(), 0.0) / N;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
        sxx += (tt[i] - mt) * (tt[i] - mt);
        sxy += (tt[i] - mt) * (yy[i] - my);
    }
    DecayFit f;
    f.growth = sxy / sxx;
    f.decay_rate = -f.growth;
    const double b = my - f.growth * mt;
    f.prefactor = std::exp(b);
    double ss = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
        const double e = yy[i] - (b + f.growth * tt[i]);
        ss += e * e;
    }
    f.residual = std::sqrt(ss / N);
    f.t_from = tt.front();
    f.t_to = tt.back();
    f.points = static_cast<int>(tt.size());
    return f;
}

SlowBound slow_bound(const Eigen::MatrixXd& Atilde, double fraction, int grid)
{
    const Eigen::VectorXcd ev = sorted_eigenvalues(Atilde);
    const double abscissa = ev[ev.size() - 1].real();
    if (!(abscissa < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "slow closed-loop matrix is not Hurwitz");
    }
    SlowBound b;
    b.lambda_tilde = fraction * -abscissa;
    const double t_max = 50.0 / -abscissa;
    const double h = t_max / grid;
    const Eigen::MatrixXd P = propagator(Atilde, h);
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(Atilde.rows(), Atilde.cols());
    double prev = 1.0;
    b.M_tilde = 1.0;
    for (int i = 1; i <= grid; ++i) {
        E = P * E;
        const double nrm = op_norm(E);
        const double t = i * h;
        b.int_norm += 0.5 * h * (prev + nrm);
        prev = nrm;
        const double w = nrm * std::exp(b.lambda_tilde * t);
        if (w > b.M_tilde) {
            b.M_tilde = w;
            b.t_star = t;
        }
    }
    // polish the grid maximum so sampled trajectories can never exceed it
    {
        auto neg = [&](double t) { return -op_norm(propagator(Atilde, t)) * std::exp(b.lambda_tilde * t); };
        const double lo = std::max(0.0, b.t_star - h);
        const auto r = boost::math::tools::brent_find_minima(neg, lo, b.t_star + h, 40);
        if (-r.second > b.M_tilde) {
            b.M_tilde = -r.second;
            b.t_star = r.first;
        }
    }
    // remaining tail from the exponential envelope
    b.int_norm += b.M_tilde * std::exp(-b.lambda_tilde * t_max) / b.lambda_tilde;
    return b;
}

LemmaConstants LemmaConstants::scaled(double f) const
{
    LemmaConstants c = *this;
    c.C1 *= f;
    c.C2 *= f;
    c.C_l1 *= f;
    c.Ca1 *= f;
    c.Ca2 *= f;
    c.Cb1 *= f;
    c.Cb2 *= f;
    c.Cs1 *= f;
    c.Cs2 *= f;
    return c;
}

LemmaConstants fit_lemma_constants(const ModalCoefficients& mc, const CompensatorDesign& d, int M, double alpha,
                                   const Grouping* grouping)
{
    const int n = d.n;
    if (M <= n || M > mc.modes()) {
        throw Error(ErrorKind::DimensionMismatch, "truncation must exceed n and stay within the coefficients");
    }
    LemmaConstants c;
    c.n = n;
    c.alpha = alpha;
    c.norm_K = op_norm(d.K);
    double sum_ratio = 0.0, sq_ratio = 0.0, sum_cb = 0.0;
    for (int k = n + 1; k <= M; ++k) {
        const double ratio = mc.B.row(k - 1).norm() / std::abs(mc.lambda[k - 1]);
        const double cn = mc.C.row(k - 1).cwiseAbs().sum();
        c.C1 = std::max(c.C1, ratio * std::pow(k, alpha));
        sum_ratio += ratio;
        sq_ratio += ratio * ratio;
        sum_cb += cn * ratio;
    }
    c.C2 = std::sqrt(std::pow(n, alpha)) * std::sqrt(sq_ratio);
    if (alpha > 1.0) {
        c.has_l1 = true;
        c.zeta = hurwitz_zeta(alpha, n + 1.0);
        c.C_l1 = sum_ratio / c.zeta;
    }
    c.Ca2 = std::pow(n, alpha - 1.0) * c.norm_K * sum_cb;
    // sum_k |c_k| e^{lambda_k t} |x_k(0)| <= ||(|c_k| e^{lambda_k t})||_2 ||x_f(0)||_2, so the sharp
    // first-term constant is the sup over t of that norm divided by eta_n(t)
    {
        auto ratio = [&](double t) {
            double eta = 0.0, q = 0.0;
            for (int k = n + 1; k <= M; ++k) {
                const double e = std::exp(mc.lambda[k - 1] * t);
                const double w = mc.C.row(k - 1).cwiseAbs().sum() * e;
                eta += e;
                q += w * w;
            }
            return eta > 0.0 ? std::sqrt(q) / eta : 0.0;
        };
        const double slowest = std::abs(mc.lambda[n]);
        const int pts = 800;
        const double t0 = 1e-8, t1 = 40.0 / slowest;
        const double q = std::pow(t1 / t0, 1.0 / pts);
        for (int i = 0; i <= pts; ++i) {
            const double t = t0 * std::pow(q, i);
            if (ratio(t) > c.Ca1) {
                c.Ca1 = ratio(t);
                c.z_t_star = t;
            }
        }
        const auto r = boost::math::tools::brent_find_minima([&](double t) { return -ratio(t); }, c.z_t_star / q,
                                                             c.z_t_star * q, 40);
        if (-r.second > c.Ca1) {
            c.Ca1 = -r.second;
            c.z_t_star = r.first;
        }
        // the ratio tends to |c_{n+1}| for large t; make sure the constant covers that limit
        c.Ca1 = std::max(c.Ca1, mc.C.row(n).cwiseAbs().sum() * (1.0 + 1e-12));
    }
    if (grouping) {
        c.grouped = true;
        c.grouping = *grouping;
        c.Cb1 = c.Ca1;
        double h = 0.0;
        for (const auto& S : grouping->sets) {
            h += group_abs_integral(S, mc, std::numeric_limits<double>::infinity());
        }
        c.Cb2 = n * c.norm_K * h;
    }
    c.slow = slow_bound(nominal_loop(mc, d));
    c.norm_l = op_norm(d.L);
    c.Cs1 = c.slow.M_tilde;
    c.Cs2 = c.slow.int_norm * c.norm_l;
    return c;
}

LemmaSetup lemma_setup(const ModalCoefficients& mc, const CompensatorDesign& d, int M)
{
    LemmaSetup s;
    s.a2a = check_A2a(mc.head(M), d.n, M);
    if (s.a2a.pass) {
        s.constants = fit_lemma_constants(mc, d, M, s.a2a.alpha);
        return s;
    }
    if (mc.outputs() != 1) {
        throw Error(ErrorKind::InvalidArgument, "A2a fails and the grouped bound needs a single output");
    }
    const Grouping g = build_Sj(mc.head(M), d.n, M);
    s.grouped = true;
    s.constants = fit_lemma_constants(mc, d, M, 1.0, &g);
    return s;
}

BoundCheck validate_lemma_xk(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    Tally tally("xk");
    const int n = tr.n;
    const double l1 = mc.lambda[n];
    const Eigen::VectorXd S = tr.sup_estimate_input();
    for (int i = 0; i < tr.samples(); ++i) {
        const double decay = std::exp(l1 * tr.t[i]);
        for (int r = 0; r < tr.M - n; ++r) {
            const int k = n + 1 + r;
            const double rhs = decay * std::abs(tr.xf(r, 0)) + c.C1 * c.norm_K * S[i] / std::pow(k, c.alpha);
            tally.add(std::abs(tr.xf(r, i)), rhs, tr.t[i], k);
        }
    }
    return tally.r;
}

BoundCheck validate_l2_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    Tally tally("xf_l2");
    const double l1 = mc.lambda[tr.n];
    const Eigen::VectorXd S = tr.sup_estimate_input();
    const Eigen::VectorXd lhs = tr.norm_xf2();
    const double gain = c.C2 / std::sqrt(std::pow(tr.n, c.alpha)) * c.norm_K;
    for (int i = 0; i < tr.samples(); ++i) {
        tally.add(lhs[i], std::exp(l1 * tr.t[i]) * lhs[0] + gain * S[i], tr.t[i], 0);
    }
    return tally.r;
}

BoundCheck validate_l1_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    Tally tally("xf_l1");
    if (!c.has_l1) {
        throw Error(ErrorKind::InvalidArgument, "the l1 bound needs a decay exponent above 1");
    }
    const double l1 = mc.lambda[tr.n];
    const Eigen::VectorXd S = tr.sup_estimate_input();
    const Eigen::VectorXd lhs = tr.norm_xf1();
    for (int i = 0; i < tr.samples(); ++i) {
        tally.add(lhs[i], std::exp(l1 * tr.t[i]) * lhs[0] + c.C_l1 * c.zeta * c.norm_K * S[i], tr.t[i], 0);
    }
    return tally.r;
}

Eigen::VectorXd z_norm_series(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    const int n = tr.n;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(tr.samples());
    if (c.grouped) {
        for (const auto& S : c.grouping.sets) {
            Eigen::RowVectorXd zj = Eigen::RowVectorXd::Zero(tr.samples());
            for (int k : S) {
                if (k > tr.M) {
                    continue;
                }
                zj += mc.C(k - 1, 0) * tr.xf.row(k - n - 1);
            }
            z += zj.cwiseAbs().transpose();
        }
    } else {
        for (int k = n + 1; k <= tr.M; ++k) {
            z += mc.C.row(k - 1).cwiseAbs().sum() * tr.xf.row(k - n - 1).cwiseAbs().transpose();
        }
    }
    return z;
}

BoundCheck validate_z_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    Tally tally(c.grouped ? "z_grouped" : "z_modal");
    const int n = tr.n;
    const Eigen::VectorXd S = tr.sup_estimate_input();
    const Eigen::VectorXd z = z_norm_series(tr, mc, c);
    const double xf0 = tr.xf.col(0).norm();
    const double first = c.grouped ? c.Cb1 : c.Ca1;
    const double second = c.grouped ? c.Cb2 / n : c.Ca2 / std::pow(n, c.alpha - 1.0);
    for (int i = 1; i < tr.samples(); ++i) {  // eta_n is unbounded at t = 0
        double eta = 0.0;
        for (int k = n + 1; k <= tr.M; ++k) {
            eta += std::exp(mc.lambda[k - 1] * tr.t[i]);
        }
        tally.add(z[i], first * eta * xf0 + second * S[i], tr.t[i], 0);
    }
    return tally.r;
}

BoundCheck validate_slow_iss(const Trajectory& tr, const Eigen::VectorXd& z_norm, const LemmaConstants& c)
{
    Tally tally("slow_iss");
    const Eigen::VectorXd x = tr.norm_xs_tilde();
    double integral = 0.0;
    for (int i = 0; i < tr.samples(); ++i) {
        if (i > 0) {
            integral += 0.5 * (tr.t[i] - tr.t[i - 1]) * (z_norm[i] + z_norm[i - 1]);
        }
        const double rhs = c.Cs1 * std::exp(-c.slow.lambda_tilde * tr.t[i]) * x[0] + c.Cs2 * integral;
        tally.add(x[i], rhs, tr.t[i], 0);
    }
    return tally.r;
}

std::vector<BoundCheck> validate_all(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c)
{
    std::vector<BoundCheck> out;
    out.push_back(validate_lemma_xk(tr, mc, c));
    out.push_back(validate_l2_bound(tr, mc, c));
    if (c.has_l1) {
        out.push_back(validate_l1_bound(tr, mc, c));
    }
    out.push_back(validate_z_bound(tr, mc, c));
    out.push_back(validate_slow_iss(tr, z_norm_series(tr, mc, c), c));
    return out;
}

Eigen::VectorXd iss_adversarial_state(const Eigen::MatrixXd& Atilde, double t_star)
{
    const Eigen::MatrixXd E = (Atilde * t_star).exp();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
    Eigen::VectorXd v = svd.matrixV().col(0);
    if (v.sum() < 0.0) {
        v = -v;
    }
    return v;
}

Eigen::VectorXd z_adversarial_state(const ModalCoefficients& mc, int n, int M, double t_star)
{
    Eigen::VectorXd x = Eigen::VectorXd::Zero(M);
    for (int k = n + 1; k <= M; ++k) {
        const Eigen::RowVectorXd c = mc.C.row(k - 1);
        // first output channel sets the sign; all channels share it for single-output plants
        const double sign = c[0] < 0.0 ? -1.0 : 1.0;
        x[k - 1] = sign * c.cwiseAbs().sum() * std::exp(mc.lambda[k - 1] * t_star);
    }
    const double nrm = x.norm();
    if (nrm > 0.0) {
        x /= nrm;
    }
    return x;
}

SlowestMode slowest_mode_state(const ModalCoefficients& mc, const CompensatorDesign& d, int M)
{
    const int n = d.n;
    const Eigen::MatrixXd A = assemble(n, M, mc, d);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenSolverFailure, "closed-loop eigenvectors");
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) {
            best = i;
        }
    }
    SlowestMode out;
    out.lambda = es.eigenvalues()[best];
    out.complex = std::abs(out.lambda.imag()) > 1e-12 * std::max(1.0, std::abs(out.lambda));
    Eigen::VectorXcd v = es.eigenvectors().col(best);
    v /= v.norm();
    if (!out.complex) {
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        v *= std::conj(v[big]) / std::abs(v[big]);
    }
    auto split = [&](const Eigen::VectorXd& w) {
        SplitState st;
        st.x0.resize(M);
        st.x0.head(n) = w.head(n);
        st.x0.tail(M - n) = w.tail(M - n);
        st.e0 = w.segment(n, n);
        return st;
    };
    out.re = split(v.real());
    out.im = split(out.complex ? Eigen::VectorXd(v.imag()) : Eigen::VectorXd::Zero(v.size()));
    return out;
}

Trajectory probe_fast_open_loop(const ModalCoefficients& mc, const CompensatorDesign& d, const LemmaConstants& c,
                                int M)
{
    CompensatorDesign open = d;
    open.K.setZero();
    open.L.setZero();
    const double ts = c.z_t_star;
    SimSettings s;
    s.M = M;
    s.dt = ts / 100.0;
    s.T = 3.0 * ts;
    return integrate(mc, open, z_adversarial_state(mc, d.n, M, ts), Eigen::VectorXd::Zero(d.n), s);
}

Trajectory probe_slow_only(const ModalCoefficients& mc, const CompensatorDesign& d, const LemmaConstants& c)
{
    const int n = d.n;
    const Eigen::VectorXd v = iss_adversarial_state(nominal_loop(mc, d), c.slow.t_star);
    SimSettings s;
    s.M = n;
    s.dt = c.slow.t_star / 200.0;
    s.T = 2.0 * c.slow.t_star;
    return integrate(mc, d, v.head(n), v.tail(n), s);
}

std::vector<Eigen::MatrixXd> reconstruct_field(const Trajectory& tr, const std::vector<EigenPair>& spectrum,
                                               const std::vector<double>& z, const std::vector<int>& samples)
{
    if (static_cast<int>(spectrum.size()) < tr.M) {
        throw Error(ErrorKind::DimensionMismatch, "spectrum shorter than the trajectory truncation");
    }
    const int p = spectrum.front().phi.components();
    const int Z = static_cast<int>(z.size());
    std::vector<Eigen::MatrixXd> out(p, Eigen::MatrixXd::Zero(Z, samples.size()));
    for (int c = 0; c < p; ++c) {
        Eigen::MatrixXd Phi(Z, tr.M);
        for (int k = 0; k < tr.M; ++k) {
            for (int i = 0; i < Z; ++i) {
                Phi(i, k) = spectrum[k].phi.value(z[i], c);
            }
        }
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const int i = samples[s];
            if (i < 0 || i >= tr.samples()) {
                throw Error(ErrorKind::InvalidArgument, "sample index out of range");
            }
            Eigen::VectorXd coeff(tr.M);
            coeff << tr.xs.col(i), tr.xf.col(i);
            out[c].col(s) = Phi * coeff;
        }
    }
    return out;
}

}  // namespace modalfb
