#pragma once

#include "modalfb/modal.hpp"

#include <Eigen/Dense>

#include <vector>

namespace modalfb {

struct CompensatorDesign {
    int n = 0;
    int j = 0;
    Eigen::MatrixXd K;  // inputs x n, zero beyond column j
    Eigen::MatrixXd L;  // n x outputs, zero beyond row j
    std::vector<double> kappa;
    std::vector<double> nu;
};

constexpr double target_collision_tol = 1e-6;

// Gain K (inputs x n) placing eig(diag(lambda_s) - Bs K) at targets on the first
// targets.size() modes. Bs is n x inputs. The tail columns of K are exactly zero.
Eigen::MatrixXd place_state_gain(const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& Bs,
                                 const std::vector<double>& targets);
// Gain L (n x outputs) for diag(lambda_s) - L Cs^T, with Cs given as n x outputs.
Eigen::MatrixXd place_observer_gain(const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& Cs,
                                    const std::vector<double>& targets);

CompensatorDesign design_compensator(const ModalCoefficients& mc, int n, const std::vector<double>& kappa,
                                     const std::vector<double>& nu);

struct SeparationReport {
    Eigen::VectorXcd computed;  // spectrum of the 2n x 2n nominal loop, sorted
    Eigen::VectorXcd expected;  // union of state and observer spectra, sorted
    double max_mismatch = 0.0;  // relative to max(1, |spectrum|)
    bool ok = false;
};

// Nominal loop on (x_s, e_s): [[Ls - Bs K, Bs K], [0, Ls - L Cs^T]].
Eigen::MatrixXd nominal_loop(const ModalCoefficients& mc, const CompensatorDesign& d);
SeparationReport verify_separation(const ModalCoefficients& mc, const CompensatorDesign& d, double tol = 1e-8);

// Eigenvalues sorted by real part, then imaginary part.
Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& A);
// Greedy pairing distance between two spectra of equal size.
double multiset_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace modalfb
