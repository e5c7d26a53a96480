#pragma once

#include "modalfb/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace modalfb {

// Row k of B holds b_k^T (one entry per input), row k of C holds c_k^T (one entry per output).
struct ModalCoefficients {
    Eigen::VectorXd lambda;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    std::vector<int> branch;

    int modes() const { return static_cast<int>(lambda.size()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.cols()); }
    void validate() const;
    ModalCoefficients head(int K) const;
};

double boundary_b(int k);
double indomain_b(int k, double zeta, double eps);
double point_c(int k, double xi);

ModalCoefficients scalar_modal(const ScalarPlant& plant, int K);
ModalCoefficients coupled_modal(const CoupledPlant& plant, const std::vector<EigenPair>& spectrum);

// (1/h) sum over lambda_k >= -h of c_{k,channel}^2
double admissibility_ratio(const ModalCoefficients& mc, int channel, double h);
// sum_{k=n+1}^{K} |b_k|^2 / lambda_k^2
double input_tail(const ModalCoefficients& mc, int n, int K);

// Modal coordinates <x0, psi_k> of a profile given componentwise.
Eigen::VectorXd project(const std::vector<EigenPair>& spectrum, const std::function<double(double, int)>& x0);
// Closed form for the scalar plant and x0 = 1.
Eigen::VectorXd project_unit_scalar(int K);

}  // namespace modalfb
