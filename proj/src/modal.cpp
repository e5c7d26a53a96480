#include "modalfb/modal.hpp"

#include "modalfb/errors.hpp"
#include "modalfb/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace modalfb {

namespace {

constexpr double pi = std::numbers::pi;

double omega(int k) { return (2.0 * k - 1.0) * pi / 2.0; }

}  // namespace

void ModalCoefficients::validate() const
{
    if (B.rows() != lambda.size() || C.rows() != lambda.size()) {
        throw Error(ErrorKind::DimensionMismatch, "modal coefficient rows differ from the number of modes");
    }
    if (!lambda.allFinite() || !B.allFinite() || !C.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "modal coefficients contain non-finite entries");
    }
}

ModalCoefficients ModalCoefficients::head(int K) const
{
    if (K > modes()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "requested " + std::to_string(K) + " modes, only " + std::to_string(modes()) + " available");
    }
    ModalCoefficients h;
    h.lambda = lambda.head(K);
    h.B = B.topRows(K);
    h.C = C.topRows(K);
    if (!branch.empty()) {
        h.branch.assign(branch.begin(), branch.begin() + K);
    }
    return h;
}

double boundary_b(int k)
{
    // -d/dz sqrt(2) cos(w z) at z = 1
    const double w = omega(k);
    return std::sqrt(2.0) * w * std::sin(w);
}

double indomain_b(int k, double zeta, double eps)
{
    const double w = omega(k);
    return 2.0 * std::sqrt(2.0) * std::cos(w * zeta) * std::sin(w * eps) / (2.0 * w * eps);
}

double point_c(int k, double xi) { return std::sqrt(2.0) * std::cos(omega(k) * xi); }

ModalCoefficients scalar_modal(const ScalarPlant& plant, int K)
{
    plant.validate();
    ModalCoefficients mc;
    mc.lambda.resize(K);
    mc.B.resize(K, 1);
    mc.C.resize(K, 1);
    mc.branch.assign(K, 1);
    for (int k = 1; k <= K; ++k) {
        mc.lambda[k - 1] = scalar_eigenvalue(plant.r, k);
        mc.B(k - 1, 0) = plant.actuation == Actuation::Boundary ? boundary_b(k)
                                                                 : indomain_b(k, plant.zeta, plant.eps);
        mc.C(k - 1, 0) = point_c(k, plant.xi);
    }
    return mc;
}

ModalCoefficients coupled_modal(const CoupledPlant& plant, const std::vector<EigenPair>& spectrum)
{
    plant.validate();
    const int K = static_cast<int>(spectrum.size());
    ModalCoefficients mc;
    mc.lambda.resize(K);
    mc.B.resize(K, 2);
    mc.C.resize(K, 2);
    mc.branch.resize(K);
    for (int i = 0; i < K; ++i) {
        const EigenPair& e = spectrum[i];
        mc.lambda[i] = e.lambda;
        mc.branch[i] = e.branch;
        for (int c = 0; c < 2; ++c) {
            const Pulse& p = plant.actuators[c];
            const double lo = p.zeta - p.eps;
            const double hi = p.zeta + p.eps;
            const int pieces = quadrature_pieces(e.psi.frequency() * (hi - lo));
            mc.B(i, c) = quad([&](double z) { return e.psi.value(z, c); }, lo, hi, pieces) / (2.0 * p.eps);
            mc.C(i, c) = e.phi.value(plant.sensors[c], c);
        }
    }
    return mc;
}

double admissibility_ratio(const ModalCoefficients& mc, int channel, double h)
{
    double s = 0.0;
    for (int k = 0; k < mc.modes(); ++k) {
        if (mc.lambda[k] >= -h) {
            s += mc.C(k, channel) * mc.C(k, channel);
        }
    }
    return s / h;
}

double input_tail(const ModalCoefficients& mc, int n, int K)
{
    if (K > mc.modes()) {
        throw Error(ErrorKind::DimensionMismatch, "input tail beyond available modes");
    }
    double s = 0.0;
    for (int k = n; k < K; ++k) {
        s += mc.B.row(k).squaredNorm() / (mc.lambda[k] * mc.lambda[k]);
    }
    return s;
}

Eigen::VectorXd project(const std::vector<EigenPair>& spectrum, const std::function<double(double, int)>& x0)
{
    Eigen::VectorXd out(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        out[k] = inner(spectrum[k].psi, x0, 0.0);
    }
    return out;
}

Eigen::VectorXd project_unit_scalar(int K)
{
    Eigen::VectorXd out(K);
    for (int k = 1; k <= K; ++k) {
        const double w = omega(k);
        out[k - 1] = std::sqrt(2.0) * std::sin(w) / w;
    }
    return out;
}

}  // namespace modalfb
