#include "modalfb/design.hpp"

#include "modalfb/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace modalfb {

namespace {

void check_targets(const Eigen::VectorXd& lambda_s, const std::vector<double>& targets)
{
    const int n = static_cast<int>(lambda_s.size());
    const int j = static_cast<int>(targets.size());
    if (j > n) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::to_string(j) + " targets exceed the slow order " + std::to_string(n));
    }
    for (int a = 0; a < j; ++a) {
        if (!std::isfinite(targets[a])) {
            throw Error(ErrorKind::InvalidArgument, "targets must be finite reals");
        }
        for (int b = a + 1; b < j; ++b) {
            if (std::abs(targets[a] - targets[b]) < target_collision_tol) {
                throw Error(ErrorKind::TargetCollision, "repeated target " + std::to_string(targets[a]));
            }
        }
        for (int i = j; i < n; ++i) {
            if (std::abs(targets[a] - lambda_s[i]) < target_collision_tol) {
                std::ostringstream msg;
                msg << "target " << targets[a] << " collides with retained eigenvalue lambda_" << i + 1;
                throw Error(ErrorKind::TargetCollision, msg.str());
            }
        }
    }
}

// Explicit residue formula for a diagonal single-input pair.
Eigen::RowVectorXd place_siso(const Eigen::VectorXd& lam, const Eigen::VectorXd& b, const std::vector<double>& kappa)
{
    const int j = static_cast<int>(lam.size());
    Eigen::RowVectorXd k(j);
    for (int i = 0; i < j; ++i) {
        double num = 1.0;
        double den = b[i];
        for (int l = 0; l < j; ++l) {
            num *= lam[i] - kappa[l];
            if (l != i) {
                den *= lam[i] - lam[l];
            }
        }
        k[i] = num / den;
    }
    return k;
}

Eigen::MatrixXd orth(const Eigen::MatrixXd& A)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double tol = 1e-12 * std::max(1.0, s.size() ? s[0] : 0.0);
    int r = 0;
    while (r < s.size() && s[r] > tol) {
        ++r;
    }
    return svd.matrixU().leftCols(r);
}

// Orthogonality-based robust placement: eigenvectors v_i in the admissible subspaces
// ker[Lambda - kappa_i I, -B] chosen as mutually orthogonal as possible.
Eigen::MatrixXd place_mimo(const Eigen::VectorXd& lam, const Eigen::MatrixXd& B, const std::vector<double>& kappa,
                           ErrorKind fail)
{
    const int j = static_cast<int>(lam.size());
    const int m = static_cast<int>(B.cols());
    std::vector<Eigen::MatrixXd> NV(j), NW(j), Q(j);
    for (int i = 0; i < j; ++i) {
        Eigen::MatrixXd A(j, j + m);
        A.leftCols(j) = lam.asDiagonal();
        A.leftCols(j).diagonal().array() -= kappa[i];
        A.rightCols(m) = -B;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const Eigen::MatrixXd N = svd.matrixV().rightCols(m);
        NV[i] = N.topRows(j);
        NW[i] = N.bottomRows(m);
        Q[i] = orth(NV[i]);
        if (Q[i].cols() == 0) {
            throw Error(fail, "no admissible eigenvector for target " + std::to_string(kappa[i]));
        }
    }
    Eigen::MatrixXd V(j, j);
    for (int i = 0; i < j; ++i) {
        Eigen::VectorXd v = Q[i] * (Q[i].transpose() * Eigen::VectorXd::Unit(j, i));
        if (v.norm() < 1e-8) {
            v = Q[i].col(0);
        }
        V.col(i) = v.normalized();
    }
    for (int sweep = 0; sweep < 20 && j > 1; ++sweep) {
        for (int i = 0; i < j; ++i) {
            Eigen::MatrixXd others(j, j - 1);
            for (int l = 0, c = 0; l < j; ++l) {
                if (l != i) {
                    others.col(c++) = V.col(l);
                }
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(others, Eigen::ComputeFullU);
            const Eigen::VectorXd y = svd.matrixU().col(j - 1);
            const Eigen::VectorXd v = Q[i] * (Q[i].transpose() * y);
            if (v.norm() > 1e-8) {
                V.col(i) = v.normalized();
            }
        }
    }
    Eigen::MatrixXd W(m, j);
    for (int i = 0; i < j; ++i) {
        const Eigen::VectorXd c = NV[i].completeOrthogonalDecomposition().solve(V.col(i));
        W.col(i) = NW[i] * c;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) {
        throw Error(fail, "closed-loop eigenvector matrix is singular");
    }
    return W * lu.inverse();
}

Eigen::MatrixXd place_gain(const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& Bs,
                           const std::vector<double>& targets, ErrorKind fail, const char* channel)
{
    const int n = static_cast<int>(lambda_s.size());
    const int m = static_cast<int>(Bs.cols());
    const int j = static_cast<int>(targets.size());
    if (Bs.rows() != n) {
        throw Error(ErrorKind::DimensionMismatch, "input matrix rows differ from the slow order");
    }
    check_targets(lambda_s, targets);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, n);
    if (j == 0) {
        return K;
    }
    const Eigen::VectorXd lam = lambda_s.head(j);
    const Eigen::MatrixXd B1 = Bs.topRows(j);
    const double scale = std::max(1.0, B1.cwiseAbs().maxCoeff());
    for (int i = 0; i < j; ++i) {
        if (B1.row(i).norm() <= 1e-14 * scale) {
            throw Error(fail, "mode k = " + std::to_string(i + 1) + " has zero " + channel + " coefficient");
        }
    }
    if (m == 1) {
        for (int a = 0; a < j; ++a) {
            for (int b = a + 1; b < j; ++b) {
                if (lam[a] == lam[b]) {
                    throw Error(fail, "repeated eigenvalue at modes " + std::to_string(a + 1) + " and " + std::to_string(b + 1));
                }
            }
        }
        K.leftCols(j) = place_siso(lam, B1.col(0), targets);
    } else {
        K.leftCols(j) = place_mimo(lam, B1, targets, fail);
    }
    return K;
}

}  // namespace

Eigen::MatrixXd place_state_gain(const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& Bs,
                                 const std::vector<double>& targets)
{
    return place_gain(lambda_s, Bs, targets, ErrorKind::Uncontrollable, "input");
}

Eigen::MatrixXd place_observer_gain(const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& Cs,
                                    const std::vector<double>& targets)
{
    return place_gain(lambda_s, Cs, targets, ErrorKind::Unobservable, "output").transpose();
}

CompensatorDesign design_compensator(const ModalCoefficients& mc, int n, const std::vector<double>& kappa,
                                     const std::vector<double>& nu)
{
    if (kappa.size() != nu.size()) {
        throw Error(ErrorKind::InvalidArgument, "state and observer target counts differ");
    }
    if (n < static_cast<int>(kappa.size()) || n > mc.modes()) {
        throw Error(ErrorKind::DimensionMismatch, "slow order n = " + std::to_string(n) + " out of range");
    }
    CompensatorDesign d;
    d.n = n;
    d.j = static_cast<int>(kappa.size());
    d.kappa = kappa;
    d.nu = nu;
    const Eigen::VectorXd lam = mc.lambda.head(n);
    d.K = place_state_gain(lam, mc.B.topRows(n), kappa);
    d.L = place_observer_gain(lam, mc.C.topRows(n), nu);
    return d;
}

Eigen::MatrixXd nominal_loop(const ModalCoefficients& mc, const CompensatorDesign& d)
{
    const int n = d.n;
    const Eigen::MatrixXd Ls = mc.lambda.head(n).asDiagonal();
    const Eigen::MatrixXd BK = mc.B.topRows(n) * d.K;
    const Eigen::MatrixXd LC = d.L * mc.C.topRows(n).transpose();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    A.topLeftCorner(n, n) = Ls - BK;
    A.topRightCorner(n, n) = BK;
    A.bottomRightCorner(n, n) = Ls - LC;
    return A;
}

Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& A)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenSolverFailure, "dense eigenvalue iteration did not converge");
    }
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ev;
}

double multiset_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = -1;
        for (Eigen::Index l = 0; l < b.size(); ++l) {
            if (!used[l] && std::abs(a[i] - b[l]) < best) {
                best = std::abs(a[i] - b[l]);
                arg = l;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best / std::max(1.0, std::abs(a[i])));
    }
    return worst;
}

SeparationReport verify_separation(const ModalCoefficients& mc, const CompensatorDesign& d, double tol)
{
    const int n = d.n;
    const Eigen::MatrixXd Ls = mc.lambda.head(n).asDiagonal();
    const Eigen::VectorXcd es = sorted_eigenvalues(Ls - mc.B.topRows(n) * d.K);
    const Eigen::VectorXcd eo = sorted_eigenvalues(Ls - d.L * mc.C.topRows(n).transpose());
    SeparationReport r;
    Eigen::VectorXcd u(2 * n);
    u << es, eo;
    std::sort(u.data(), u.data() + u.size(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    r.expected = u;
    r.computed = sorted_eigenvalues(nominal_loop(mc, d));
    r.max_mismatch = multiset_distance(r.computed, r.expected);
    r.ok = r.max_mismatch < tol;
    return r;
}

}  // namespace modalfb
