#include "modalfb/dimfind.hpp"

#include "modalfb/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <thread>

namespace modalfb {

Eigen::MatrixXd assemble(int n, int m, const ModalCoefficients& mc, const CompensatorDesign& d)
{
    if (m < n || m > mc.modes() || d.n != n || d.K.cols() != n || d.L.rows() != n ||
        d.K.rows() != mc.inputs() || d.L.cols() != mc.outputs()) {
        throw Error(ErrorKind::DimensionMismatch, "assemble: n = " + std::to_string(n) + ", m = " + std::to_string(m) +
                                                      ", modes = " + std::to_string(mc.modes()));
    }
    const int f = m - n;
    const Eigen::MatrixXd Bs = mc.B.topRows(n);
    const Eigen::MatrixXd Bf = mc.B.middleRows(n, f);
    const Eigen::MatrixXd BK = Bs * d.K;
    const Eigen::MatrixXd BfK = Bf * d.K;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, n + m);
    A.block(0, 0, n, n) = -BK;
    A.block(0, 0, n, n).diagonal() += mc.lambda.head(n);
    A.block(0, n, n, n) = BK;
    A.block(n, n, n, n) = -d.L * mc.C.topRows(n).transpose();
    A.block(n, n, n, n).diagonal() += mc.lambda.head(n);
    A.block(n, 2 * n, n, f) = -d.L * mc.C.middleRows(n, f).transpose();
    A.block(2 * n, 0, f, n) = -BfK;
    A.block(2 * n, n, f, n) = BfK;
    A.block(2 * n, 2 * n, f, f).diagonal() = mc.lambda.segment(n, f);
    return A;
}

double rho(const Eigen::MatrixXd& A)
{
    if (A.size() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenSolverFailure, "dense eigenvalue iteration did not converge");
    }
    return es.eigenvalues().real().maxCoeff();
}

void summarize(RhoCurve& c, const SweepSettings& s)
{
    const int N = static_cast<int>(c.rho.size());
    c.converged = false;
    c.bounded = false;
    c.certified = false;
    if (N == 0) {
        return;
    }
    const int W = std::min(s.window, N);
    const auto tail_begin = c.rho.end() - W;
    const double hi = *std::max_element(tail_begin, c.rho.end());
    const double lo = *std::min_element(tail_begin, c.rho.end());
    c.converged = W == s.window && hi - lo < s.tol_conv;
    if (N >= 2 * s.window) {
        // compare against up to three earlier windows; in-domain curves wobble with a period
        // longer than one window
        const auto from = tail_begin - std::min(N - W, 3 * s.window);
        const double prev_hi = *std::max_element(from, tail_begin);
        c.bounded = hi <= prev_hi + s.tol_conv;
    }
    c.rho_limit = c.converged ? c.rho.back() : 0.5 * (hi + lo);
    c.lambda_bar = hi + s.margin;
    c.certified = (c.converged || c.bounded) && c.lambda_bar <= 0.0;
}

void require_converged(const RhoCurve& c)
{
    if (!c.converged && !c.bounded) {
        throw Error(ErrorKind::NotConverged, "rho_m did not settle for n = " + std::to_string(c.n));
    }
}

RhoCurve sweep(const ModalCoefficients& mc, const CompensatorDesign& d, int m_from, int m_to, int step,
               const SweepSettings& s)
{
    if (m_from < d.n + 1 || m_to > mc.modes() || step < 1) {
        throw Error(ErrorKind::DimensionMismatch, "sweep range [" + std::to_string(m_from) + ", " +
                                                      std::to_string(m_to) + "] invalid for n = " +
                                                      std::to_string(d.n));
    }
    RhoCurve c;
    c.n = d.n;
    for (int m = m_from; m <= m_to; m += step) {
        c.m.push_back(m);
    }
    c.rho.assign(c.m.size(), 0.0);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < c.m.size() && !failed; i = next++) {
            try {
                c.rho[i] = rho(assemble(d.n, c.m[i], mc, d));
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const int threads = std::max(1, std::min<int>(s.threads, static_cast<int>(c.m.size())));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    summarize(c, s);
    return c;
}

NoneStabilizesError::NoneStabilizesError(NTable table)
    : Error(ErrorKind::NoneStabilizes, "no slow order in the range is certified"), table_(std::move(table))
{
}

NTable find_min_n(const ModalCoefficients& mc, int n_lo, int n_hi, int m_max, const std::vector<double>& kappa,
                  const std::vector<double>& nu, const SweepSettings& s, bool full_curves)
{
    if (n_lo > n_hi || n_lo < 1) {
        throw Error(ErrorKind::InvalidArgument, "empty n range");
    }
    NTable t;
    for (int n = n_lo; n <= n_hi; ++n) {
        const CompensatorDesign d = design_compensator(mc, n, kappa, nu);
        const int from = full_curves ? n + 1 : std::max(n + 1, m_max - 4 * s.window + 1);
        RhoCurve c = sweep(mc, d, from, m_max, 1, s);
        t.n.push_back(n);
        t.rho_at_mmax.push_back(c.rho.back());
        if (t.n_min < 0 && c.certified) {
            t.n_min = n;
        }
        t.curves.push_back(std::move(c));
    }
    if (t.n_min < 0) {
        throw NoneStabilizesError(std::move(t));
    }
    return t;
}

}  // namespace modalfb
