#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace modalfb {

enum class Actuation { Boundary, InDomain };

// x_t = x_zz + r x on (0,1), x_z(0) = 0, x(1) = boundary input or 0,
// optional pulse input f_{zeta,eps}(z) = 1/(2 eps) on |z - zeta| < eps, point output x(xi).
struct ScalarPlant {
    double r = 15.0;
    Actuation actuation = Actuation::Boundary;
    double zeta = 0.5;
    double eps = 0.05;
    double xi = 0.25;

    void validate() const;
};

struct Pulse {
    double zeta = 0.5;
    double eps = 0.05;
};

// x_t = D x_zz + R x with D = diag(1, 2), R = [[alpha, r12], [r21, alpha]],
// x1_z(0) = 0, x2(0) = 0, x1(1) = 0, x2_z(1) = 0.
struct CoupledPlant {
    double alpha = 10.0;
    double r12 = 5.0;
    double r21 = 10.0;
    std::array<Pulse, 2> actuators{{{0.3, 0.05}, {0.6, 0.05}}};
    std::array<double, 2> sensors{{0.0, 1.0}};

    void validate() const;
    CoupledPlant adjoint() const;
};

// Real part of sum_i [cosh(sqrt(s_i) z) a_i + sinh(sqrt(s_i) z)/sqrt(s_i) b_i].
// Covers the closed-form scalar modes and every shooting solution of x'' = M x.
class ModeFunction {
public:
    struct Term {
        std::complex<double> s;
        Eigen::Vector2cd a = Eigen::Vector2cd::Zero();
        Eigen::Vector2cd b = Eigen::Vector2cd::Zero();
    };

    ModeFunction() = default;
    ModeFunction(int components, std::vector<Term> terms);

    int components() const { return components_; }
    double value(double z, int comp = 0) const;
    double derivative(double z, int comp = 0) const;
    // largest spatial angular frequency, used to size quadrature panels
    double frequency() const;
    void scale(double f);

private:
    int components_ = 1;
    std::vector<Term> terms_;
    std::vector<std::complex<double>> roots_;
};

// L2(0,1)^p inner product by adaptive quadrature.
double inner(const ModeFunction& f, const ModeFunction& g);
double inner(const ModeFunction& f, const std::function<double(double, int)>& g, double g_frequency);
int quadrature_pieces(double frequency);

struct EigenPair {
    int index = 0;   // position in the merged, descending list (1-based)
    int k = 0;       // index within the branch
    int branch = 1;
    double lambda = 0.0;
    ModeFunction phi;
    ModeFunction psi;
    double residual = 0.0;  // characteristic residual (coupled only)
};

double scalar_eigenvalue(double r, int k);
std::vector<EigenPair> scalar_spectrum(const ScalarPlant& plant, int K);

double coupled_char_residual(double lbar, double r12, double r21);
double coupled_asymptotic_eigenvalue(const CoupledPlant& plant, int branch, int k);

// Rows: x1(1) and x2'(1) for the shooting directions (x1(0), x2'(0)) = (1,0) and (0,1).
Eigen::Matrix2d shooting_matrix(const CoupledPlant& plant, double lambda);
double shooting_det(const CoupledPlant& plant, double lambda);
// Unnormalized eigenfunction for the given eigenvalue candidate.
ModeFunction coupled_eigenfunction(const CoupledPlant& plant, double lambda);

// K modes per branch, merged in descending order.
std::vector<EigenPair> coupled_spectrum(const CoupledPlant& plant, int K);
// The N largest eigenvalues of the merged sequence.
std::vector<EigenPair> coupled_leading(const CoupledPlant& plant, int N);

// Decoupled reference basis and the asymptotic eigenfunctions of each branch.
ModeFunction reference_basis(int branch, int k);
ModeFunction asymptotic_eigenfunction(const CoupledPlant& plant, int branch, int k);

struct RieszCloseness {
    std::vector<int> k;
    std::array<std::vector<double>, 2> value;    // per branch
    std::array<std::vector<double>, 2> partial;  // running sums
};

RieszCloseness riesz_closeness(const CoupledPlant& plant, int k_from, int k_to);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace modalfb
