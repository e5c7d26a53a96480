#pragma once

#include "modalfb/design.hpp"
#include "modalfb/errors.hpp"
#include "modalfb/modal.hpp"

#include <Eigen/Dense>

#include <vector>

namespace modalfb {

struct SweepSettings {
    int window = 20;
    double tol_conv = 1e-4;
    double margin = 1e-3;
    int threads = 1;
};

struct RhoCurve {
    int n = 0;
    std::vector<int> m;
    std::vector<double> rho;
    // last `window` samples spread below tol_conv
    bool converged = false;
    // upper envelope of the last window does not exceed that of the (up to three) windows before
    bool bounded = false;
    double rho_limit = 0.0;
    double lambda_bar = 0.0;
    bool certified = false;
};

// State order (x_s, e_s, x_f1); dimension n + m.
Eigen::MatrixXd assemble(int n, int m, const ModalCoefficients& mc, const CompensatorDesign& d);
double rho(const Eigen::MatrixXd& A);

RhoCurve sweep(const ModalCoefficients& mc, const CompensatorDesign& d, int m_from, int m_to, int step = 1,
               const SweepSettings& s = {});
// Fills converged/bounded/limit/certificate from the samples.
void summarize(RhoCurve& c, const SweepSettings& s);
// Throws NotConverged when neither convergence nor a bounded envelope was observed.
void require_converged(const RhoCurve& c);

struct NTable {
    std::vector<int> n;
    std::vector<double> rho_at_mmax;
    std::vector<RhoCurve> curves;
    int n_min = -1;
};

// For each n, sweeps m over [n+1, m_max] (full) or the last 4*window samples (tail only).
// Throws NoneStabilizesError (carrying the table) when no n is certified.
NTable find_min_n(const ModalCoefficients& mc, int n_lo, int n_hi, int m_max, const std::vector<double>& kappa,
                  const std::vector<double>& nu, const SweepSettings& s = {}, bool full_curves = true);

class NoneStabilizesError : public Error {
public:
    explicit NoneStabilizesError(NTable table);
    const NTable& table() const { return table_; }

private:
    NTable table_;
};

}  // namespace modalfb
