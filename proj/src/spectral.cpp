#include "modalfb/spectral.hpp"

#include "modalfb/errors.hpp"
#include "modalfb/quadrature.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace modalfb {

namespace {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

double omega(int k) { return (2.0 * k - 1.0) * pi / 2.0; }

// sinh(r z)/r with its removable singularity at r = 0
cd sinhc(cd r, double z)
{
    const cd rz = r * z;
    if (std::abs(rz) < 1e-5) {
        return z * (1.0 + rz * rz / 6.0);
    }
    return std::sinh(rz) / r;
}

bool inside_unit(double lo, double hi) { return lo > 0.0 && hi < 1.0 && lo < hi; }

}  // namespace

void ScalarPlant::validate() const
{
    if (!std::isfinite(r)) {
        throw Error(ErrorKind::InvalidArgument, "plant.r must be finite");
    }
    if (actuation == Actuation::InDomain && !(eps > 0.0 && inside_unit(zeta - eps, zeta + eps))) {
        throw Error(ErrorKind::InvalidArgument, "plant.zeta/plant.eps: pulse support must lie inside (0,1)");
    }
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "plant.xi must lie in [0,1]");
    }
}

void CoupledPlant::validate() const
{
    if (!std::isfinite(alpha) || !std::isfinite(r12) || !std::isfinite(r21)) {
        throw Error(ErrorKind::InvalidArgument, "plant.alpha/r12/r21 must be finite");
    }
    for (int i = 0; i < 2; ++i) {
        const Pulse& p = actuators[i];
        if (!(p.eps > 0.0 && inside_unit(p.zeta - p.eps, p.zeta + p.eps))) {
            throw Error(ErrorKind::InvalidArgument,
                        "plant.zeta" + std::to_string(i + 1) + ": pulse support must lie inside (0,1)");
        }
        if (!(sensors[i] >= 0.0 && sensors[i] <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "plant.xi" + std::to_string(i + 1) + " must lie in [0,1]");
        }
    }
}

CoupledPlant CoupledPlant::adjoint() const
{
    CoupledPlant a = *this;
    std::swap(a.r12, a.r21);
    return a;
}

ModeFunction::ModeFunction(int components, std::vector<Term> terms)
    : components_(components), terms_(std::move(terms))
{
    roots_.reserve(terms_.size());
    for (const auto& t : terms_) {
        roots_.push_back(std::sqrt(t.s));
    }
}

double ModeFunction::value(double z, int comp) const
{
    cd acc = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const cd r = roots_[i];
        acc += std::cosh(r * z) * terms_[i].a[comp] + sinhc(r, z) * terms_[i].b[comp];
    }
    return acc.real();
}

double ModeFunction::derivative(double z, int comp) const
{
    cd acc = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const cd r = roots_[i];
        acc += terms_[i].s * sinhc(r, z) * terms_[i].a[comp] + std::cosh(r * z) * terms_[i].b[comp];
    }
    return acc.real();
}

double ModeFunction::frequency() const
{
    double f = 0.0;
    for (const auto& r : roots_) {
        f = std::max(f, std::abs(r.imag()));
    }
    return f;
}

void ModeFunction::scale(double f)
{
    for (auto& t : terms_) {
        t.a *= f;
        t.b *= f;
    }
}

int quadrature_pieces(double frequency) { return 1 + static_cast<int>(frequency / pi); }

double inner(const ModeFunction& f, const ModeFunction& g)
{
    const int p = std::min(f.components(), g.components());
    auto integrand = [&](double z) {
        double s = 0.0;
        for (int c = 0; c < p; ++c) {
            s += f.value(z, c) * g.value(z, c);
        }
        return s;
    };
    return quad(integrand, 0.0, 1.0, quadrature_pieces(f.frequency() + g.frequency()));
}

double inner(const ModeFunction& f, const std::function<double(double, int)>& g, double g_frequency)
{
    auto integrand = [&](double z) {
        double s = 0.0;
        for (int c = 0; c < f.components(); ++c) {
            s += f.value(z, c) * g(z, c);
        }
        return s;
    };
    return quad(integrand, 0.0, 1.0, quadrature_pieces(f.frequency() + g_frequency));
}

double scalar_eigenvalue(double r, int k)
{
    const double w = omega(k);
    return r - w * w;
}

std::vector<EigenPair> scalar_spectrum(const ScalarPlant& plant, int K)
{
    std::vector<EigenPair> out;
    out.reserve(std::max(K, 0));
    for (int k = 1; k <= K; ++k) {
        const double w = omega(k);
        ModeFunction::Term t;
        t.s = cd(-w * w, 0.0);
        t.a[0] = std::sqrt(2.0);
        EigenPair e;
        e.index = k;
        e.k = k;
        e.branch = 1;
        e.lambda = plant.r - w * w;
        e.phi = ModeFunction(1, {t});
        e.psi = e.phi;
        out.push_back(std::move(e));
    }
    return out;
}

double coupled_char_residual(double lbar, double r12, double r21)
{
    const double q = r12 * r21;
    const double d1 = lbar * lbar - q;
    const double d2 = lbar * lbar + 4.0 * q;
    const double scale = 1.0 + lbar * lbar + std::abs(q);
    if (q != 0.0 && (std::abs(d1) < 1e-12 * scale || std::abs(d2) < 1e-12 * scale)) {
        throw Error(ErrorKind::DegenerateDenominator, "characteristic residual denominator vanishes at lbar = " +
                                                          std::to_string(lbar));
    }
    const cd root = std::sqrt(cd(lbar * lbar + 8.0 * q, 0.0));
    const cd em = 0.5 * std::sqrt(cd(-3.0 * lbar, 0.0) - root);
    const cd ep = 0.5 * std::sqrt(cd(-3.0 * lbar, 0.0) + root);
    const cd lhs = std::cos(em) * std::cos(ep);
    if (q == 0.0) {
        return lhs.real();
    }
    const cd num = d1 + 3.0 / std::sqrt(8.0) * lbar * std::sqrt(cd(d1, 0.0)) * std::sin(em) * std::sin(ep);
    const cd rhs = -4.0 * q * num / (d1 * d2);
    return (lhs - rhs).real();
}

double coupled_asymptotic_eigenvalue(const CoupledPlant& plant, int branch, int k)
{
    const double mu = omega(k);
    const double q = plant.r12 * plant.r21;
    const double root = std::sqrt(std::pow(mu, 4) + 4.0 * q);
    const double sgn = branch == 1 ? 1.0 : -1.0;
    return plant.alpha - 1.5 * mu * mu + sgn * 0.5 * root;
}

namespace {

// Fundamental solution of x'' = M x with M = D^{-1}(lambda I - R), split by Sylvester's formula.
struct Shooting {
    std::array<cd, 2> s;
    std::array<Eigen::Matrix2cd, 2> P;
};

Shooting shooting_terms(const CoupledPlant& plant, double lambda)
{
    const double lb = lambda - plant.alpha;
    Eigen::Matrix2cd M;
    M << lb, -plant.r12, -plant.r21 / 2.0, lb / 2.0;
    const cd tr = 1.5 * lb;
    const cd det = lb * lb / 2.0 - plant.r12 * plant.r21 / 2.0;
    const cd disc = std::sqrt(tr * tr / 4.0 - det);
    Shooting sh;
    sh.s = {tr / 2.0 + disc, tr / 2.0 - disc};
    const cd gap = sh.s[0] - sh.s[1];
    if (std::abs(gap) < 1e-9 * (1.0 + std::abs(tr))) {
        throw Error(ErrorKind::DegenerateDenominator,
                    "confluent shooting exponents at lambda = " + std::to_string(lambda));
    }
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    sh.P[0] = (M - sh.s[1] * I) / gap;
    sh.P[1] = (M - sh.s[0] * I) / (-gap);
    return sh;
}

std::vector<ModeFunction::Term> shooting_solution(const Shooting& sh, double a, double b)
{
    std::vector<ModeFunction::Term> terms(2);
    for (int i = 0; i < 2; ++i) {
        terms[i].s = sh.s[i];
        terms[i].a = sh.P[i] * Eigen::Vector2cd(a, 0.0);
        terms[i].b = sh.P[i] * Eigen::Vector2cd(0.0, b);
    }
    return terms;
}

}  // namespace

Eigen::Matrix2d shooting_matrix(const CoupledPlant& plant, double lambda)
{
    const Shooting sh = shooting_terms(plant, lambda);
    const ModeFunction colA(2, shooting_solution(sh, 1.0, 0.0));
    const ModeFunction colB(2, shooting_solution(sh, 0.0, 1.0));
    Eigen::Matrix2d S;
    S << colA.value(1.0, 0), colB.value(1.0, 0), colA.derivative(1.0, 1), colB.derivative(1.0, 1);
    return S;
}

double shooting_det(const CoupledPlant& plant, double lambda) { return shooting_matrix(plant, lambda).determinant(); }

ModeFunction coupled_eigenfunction(const CoupledPlant& plant, double lambda)
{
    const Eigen::Matrix2d S = shooting_matrix(plant, lambda);
    const int row = S.row(0).norm() >= S.row(1).norm() ? 0 : 1;
    double a = -S(row, 1);
    double b = S(row, 0);
    const double nrm = std::hypot(a, b);
    if (nrm == 0.0) {
        // both boundary rows vanish: any admissible direction works, pick x1(0) = 1
        a = 1.0;
        b = 0.0;
    } else {
        a /= nrm;
        b /= nrm;
    }
    return ModeFunction(2, shooting_solution(shooting_terms(plant, lambda), a, b));
}

ModeFunction reference_basis(int branch, int k)
{
    const double mu = omega(k);
    ModeFunction::Term t;
    t.s = cd(-mu * mu, 0.0);
    if (branch == 1) {
        t.a[0] = std::sqrt(2.0);
    } else {
        t.b[1] = std::sqrt(2.0) * mu;  // sinh(i mu z)/(i mu) = sin(mu z)/mu
    }
    return ModeFunction(2, {t});
}

ModeFunction asymptotic_eigenfunction(const CoupledPlant& plant, int branch, int k)
{
    const double mu = omega(k);
    const double mu2 = mu * mu;
    const double f = std::sqrt(2.0) / std::sqrt(1.0 + plant.r12 * plant.r21 / (mu2 * mu2));
    ModeFunction::Term t;
    t.s = cd(-mu2, 0.0);
    if (branch == 1) {
        t.a[0] = f;
        t.a[1] = f * plant.r21 / mu2;
    } else {
        t.b[0] = -f * plant.r12 / mu2 * mu;
        t.b[1] = f * mu;
    }
    return ModeFunction(2, {t});
}

namespace {

struct Seed {
    double lambda;
    int branch;
    int k;
};

double refine(const CoupledPlant& plant, double lo, double hi, double flo, double fhi)
{
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    std::uintmax_t iters = 200;
    auto f = [&](double x) { return shooting_det(plant, x); };
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(),
                                               iters);
    return 0.5 * (r.first + r.second);
}

// All sign changes of the shooting determinant on [lo, hi] sampled with `cells` cells.
std::vector<double> scan_roots(const CoupledPlant& plant, double lo, double hi, int cells)
{
    std::vector<double> roots;
    const double h = (hi - lo) / cells;
    double x0 = lo;
    double f0 = shooting_det(plant, x0);
    for (int i = 1; i <= cells; ++i) {
        const double x1 = (i == cells) ? hi : lo + i * h;
        const double f1 = shooting_det(plant, x1);
        if (f0 == 0.0) {
            roots.push_back(x0);
        } else if (f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
            roots.push_back(refine(plant, x0, x1, f0, f1));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

EigenPair make_pair(const CoupledPlant& plant, double lambda, int branch, int k)
{
    EigenPair e;
    e.k = k;
    e.branch = branch;
    e.lambda = lambda;
    try {
        e.residual = coupled_char_residual(lambda - plant.alpha, plant.r12, plant.r21);
    } catch (const Error&) {
        e.residual = std::numeric_limits<double>::quiet_NaN();
    }
    ModeFunction phi = coupled_eigenfunction(plant, lambda);
    const double nrm = std::sqrt(inner(phi, phi));
    if (!(nrm > 0.0)) {
        throw Error(ErrorKind::NormalizationFailure, "zero eigenfunction at lambda = " + std::to_string(lambda));
    }
    phi.scale(1.0 / nrm);
    if (inner(phi, reference_basis(branch, k)) < 0.0) {
        phi.scale(-1.0);
    }
    ModeFunction psi = coupled_eigenfunction(plant.adjoint(), lambda);
    const double pp = inner(phi, psi);
    if (std::abs(pp) < 1e-10 * std::sqrt(inner(psi, psi))) {
        throw Error(ErrorKind::NormalizationFailure, "<phi, psi> vanishes at lambda = " + std::to_string(lambda));
    }
    psi.scale(1.0 / pp);
    e.phi = std::move(phi);
    e.psi = std::move(psi);
    return e;
}

}  // namespace

std::vector<EigenPair> coupled_spectrum(const CoupledPlant& plant, int K)
{
    plant.validate();
    if (K <= 0) {
        return {};
    }
    std::vector<Seed> seeds;
    for (int k = 1; k <= K; ++k) {
        seeds.push_back({coupled_asymptotic_eigenvalue(plant, 1, k), 1, k});
        seeds.push_back({coupled_asymptotic_eigenvalue(plant, 2, k), 2, k});
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.lambda > b.lambda; });

    // Numerical range of R bounds the spectrum from above.
    const double q = plant.r12 * plant.r21;
    double hi = plant.alpha + std::abs(plant.r12 + plant.r21) / 2.0 + 5.0;
    hi = std::max({hi, plant.alpha + std::sqrt(std::max(q, 0.0)) + 5.0, seeds.front().lambda + 5.0});

    constexpr int k_low = 5;
    std::size_t last_low = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (seeds[i].k <= k_low) {
            last_low = i;
        }
    }
    const double lo = last_low + 1 < seeds.size() ? 0.5 * (seeds[last_low].lambda + seeds[last_low + 1].lambda)
                                                    : seeds[last_low].lambda - 5.0;
    const std::size_t n_scan = last_low + 1;

    std::vector<double> scanned;
    int cells = static_cast<int>(std::ceil((hi - lo) / 0.25));
    for (int attempt = 0; attempt < 5; ++attempt, cells *= 2) {
        scanned = scan_roots(plant, lo, hi, cells);
        if (scanned.size() == n_scan) {
            break;
        }
    }
    if (scanned.size() != n_scan) {
        std::ostringstream msg;
        msg << "global scan on [" << lo << ", " << hi << "] found " << scanned.size() << " roots, expected "
            << n_scan;
        throw Error(ErrorKind::RootNotBracketed, msg.str());
    }
    std::sort(scanned.begin(), scanned.end(), std::greater<>());

    std::vector<std::pair<double, Seed>> found;
    for (std::size_t i = 0; i < n_scan; ++i) {
        found.push_back({scanned[i], seeds[i]});
    }

    auto claimed = [&](double x) {
        for (const auto& f : found) {
            if (std::abs(f.first - x) <= 1e-8 * std::max(1.0, std::abs(x))) {
                return true;
            }
        }
        return false;
    };

    for (std::size_t i = n_scan; i < seeds.size(); ++i) {
        const Seed& sd = seeds[i];
        double gap = std::abs(sd.lambda - seeds[i - 1].lambda);
        if (i + 1 < seeds.size()) {
            gap = std::min(gap, std::abs(sd.lambda - seeds[i + 1].lambda));
        }
        gap = std::max(gap, 1e-6 * std::abs(sd.lambda));
        double w = gap / 4.0;
        bool ok = false;
        for (int attempt = 0; attempt <= 4 && !ok; ++attempt, w += gap / 2.0) {
            const double b_hi = std::min(sd.lambda + w, lo);
            const double b_lo = sd.lambda - w;
            if (b_hi <= b_lo) {
                continue;
            }
            double best = 0.0;
            double best_d = std::numeric_limits<double>::infinity();
            for (double x : scan_roots(plant, b_lo, b_hi, 32)) {
                if (!claimed(x) && std::abs(x - sd.lambda) < best_d) {
                    best = x;
                    best_d = std::abs(x - sd.lambda);
                }
            }
            if (std::isfinite(best_d)) {
                found.push_back({best, sd});
                ok = true;
            }
        }
        if (!ok) {
            std::ostringstream msg;
            msg << "no sign change near seed of branch " << sd.branch << ", k = " << sd.k << " (" << sd.lambda
                << ")";
            throw Error(ErrorKind::RootNotBracketed, msg.str());
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 1; i < found.size(); ++i) {
        if (found[i - 1].first - found[i].first < 1e-8) {
            throw Error(ErrorKind::MultipleEigenvalue,
                        "eigenvalues closer than 1e-8 near " + std::to_string(found[i].first));
        }
    }

    std::vector<EigenPair> out;
    out.reserve(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        EigenPair e = make_pair(plant, found[i].first, found[i].second.branch, found[i].second.k);
        e.index = static_cast<int>(i) + 1;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<EigenPair> coupled_leading(const CoupledPlant& plant, int N)
{
    if (N <= 0) {
        return {};
    }
    int K = static_cast<int>(std::ceil(0.6 * N)) + 6;
    for (;;) {
        std::vector<EigenPair> all = coupled_spectrum(plant, K);
        double floor1 = std::numeric_limits<double>::infinity();
        double floor2 = floor1;
        for (const auto& e : all) {
            if (e.k == K) {
                (e.branch == 1 ? floor1 : floor2) = e.lambda;
            }
        }
        const double floor = std::max(floor1, floor2);
        if (static_cast<int>(all.size()) >= N && all[N - 1].lambda > floor) {
            all.resize(N);
            return all;
        }
        K *= 2;
    }
}

RieszCloseness riesz_closeness(const CoupledPlant& plant, int k_from, int k_to)
{
    RieszCloseness out;
    for (int k = k_from; k <= k_to; ++k) {
        out.k.push_back(k);
        for (int br = 1; br <= 2; ++br) {
            // phi^a and e share the exponent, so their difference is a single term
            const ModeFunction pa = asymptotic_eigenfunction(plant, br, k);
            const ModeFunction e = reference_basis(br, k);
            const double mu = omega(k);
            auto diff = [&](double z, int c) { return pa.value(z, c) - e.value(z, c); };
            auto integrand = [&](double z) { return diff(z, 0) * diff(z, 0) + diff(z, 1) * diff(z, 1); };
            const double v = quad(integrand, 0.0, 1.0, quadrature_pieces(2.0 * mu));
            auto& vals = out.value[br - 1];
            auto& part = out.partial[br - 1];
            vals.push_back(v);
            part.push_back((part.empty() ? 0.0 : part.back()) + v);
        }
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "slope fit needs at least two points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace modalfb
