#pragma once

#include "modalfb/design.hpp"
#include "modalfb/errors.hpp"
#include "modalfb/modal.hpp"

#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace modalfb {

using EigenvalueFn = std::function<double(int)>;  // k (1-based) -> lambda_k

struct A0Report {
    double delta = 0.0;  // largest real part over both slow closed-loop spectra
    double norm_K = 0.0;
    double norm_L = 0.0;
    bool pass = false;
};

struct A1Report {
    double M_lambda = 0.0;
    double partial = 0.0;
    double tail = 0.0;
    double exponent = 0.0;  // fitted p in |lambda_k| ~ c k^p
    double coeff = 0.0;
    bool monotone = false;
    bool lambda_n1_negative = false;
    bool pass = false;
    int witness = 0;
};

struct A2aReport {
    double alpha_fit = 0.0;
    double alpha = 0.0;
    double d1 = 0.0;
    double c2 = 0.0;
    bool pass = false;
    int witness = 0;
};

struct A2bGrowthReport {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    bool pass = false;
    int witness = 0;
};

struct SeriesReport {
    double partial_K = 0.0;
    double partial_2K = 0.0;
    double spread = 0.0;       // oscillation of partial sums over [K, 2K]
    double spread_prev = 0.0;  // same over [K/2, K]
    bool pass = false;
};

struct Grouping {
    int k1 = 0;
    int s = 2;
    double c4 = 0.0;
    double c5 = 0.0;
    double pairing_residual = 0.0;
    std::vector<std::vector<int>> sets;  // 1-based mode indices
    std::vector<int> j;                  // group label of each set
};

struct EtaValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Lookup table as a generator; throws InvalidArgument outside 1..size.
EigenvalueFn tabulated_eigenvalues(std::vector<double> values);
// First `count` merged asymptotic eigenvalues of the coupled plant, descending,
// with the leading entries replaced by `computed`.
std::vector<double> coupled_merged_eigenvalues(const CoupledPlant& plant, const Eigen::VectorXd& computed, int count);

A0Report check_A0(const ModalCoefficients& mc, const CompensatorDesign& d);
A1Report check_A1(const EigenvalueFn& lambda, int n, int K = 1000);
A2aReport check_A2a(const ModalCoefficients& mc, int n, int k_max, double alpha = nan_value);
A2bGrowthReport check_A2b_growth(const ModalCoefficients& mc, int n, int k_max);
SeriesReport check_A2b_series(const ModalCoefficients& mc, int n, int K);
std::map<int, double> check_gamma(const EigenvalueFn& lambda, int n, int k_max, const std::vector<int>& m_list);

class NoPeriodFoundError : public Error {
public:
    NoPeriodFoundError(int best_k1, double residual);
    int best_k1() const { return best_k1_; }
    double residual() const { return residual_; }

private:
    int best_k1_;
    double residual_;
};

// Pairing S_j = {m k1 + k, (m+1) k1 - k + 1} with m = floor(2(j-1)/k1), k = j - m k1/2,
// restricted to [n+1, k_max]; groups straddling either end are split into singletons.
Grouping build_Sj(const ModalCoefficients& mc, int n, int k_max, int k1_search_max = 64, double tol = 1e-10);
std::vector<int> group_members(int j, int k1);

// max over groups of j^2 * int_0^t |sum_{k in S_j} c_k b_k e^{lambda_k tau}| dtau (t may be +inf)
struct HjReport {
    double max_scaled = 0.0;
    std::vector<double> integral;  // per group
};
HjReport check_Hj_bound(const Grouping& g, const ModalCoefficients& mc, double t);
double group_abs_integral(const std::vector<int>& set, const ModalCoefficients& mc, double t);

double hurwitz_zeta(double s, double a);
EtaValue eta_n(double t, const EigenvalueFn& lambda, int n, int K);
double eta_integral(const EigenvalueFn& lambda, int n, int K, double T = std::numeric_limits<double>::infinity());

double admissibility_constant(const ModalCoefficients& mc, const std::vector<double>& h_list);

struct AssumptionReport {
    A0Report a0;
    A1Report a1;
    bool has_a2a = false;
    A2aReport a2a;
    bool has_a2b = false;
    SeriesReport a2b_series;
    A2bGrowthReport a2b_growth;
    std::map<int, double> gamma;
    bool grouping_ok = false;
    Grouping grouping;
    std::string grouping_error;
    double m_c = 0.0;
    double input_tail_K = 0.0;
    double input_tail_2K = 0.0;
};

AssumptionReport check_assumptions(const ModalCoefficients& mc, const CompensatorDesign& d,
                                   const EigenvalueFn& lambda, int k_max);
void write_report(std::ostream& os, const AssumptionReport& r);

}  // namespace modalfb
