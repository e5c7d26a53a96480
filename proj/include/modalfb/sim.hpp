#pragma once

#include "modalfb/assumptions.hpp"
#include "modalfb/design.hpp"
#include "modalfb/modal.hpp"
#include "modalfb/spectral.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace modalfb {

struct SimSettings {
    int M = 400;         // modal truncation of the "true" plant
    double T = 2.0;
    double dt = 1e-3;
    int store_every = 1;
};

// Columns are stored samples.
struct Trajectory {
    int n = 0;
    int M = 0;
    double dt = 0.0;
    std::vector<double> t;
    Eigen::MatrixXd xs;  // n x S
    Eigen::MatrixXd es;  // n x S
    Eigen::MatrixXd xf;  // (M - n) x S, modes n+1..M
    Eigen::MatrixXd y;   // outputs x S
    Eigen::MatrixXd u;   // inputs x S

    int samples() const { return static_cast<int>(t.size()); }
    Eigen::VectorXd norm_xs_tilde() const;
    Eigen::VectorXd norm_xs() const;
    Eigen::VectorXd norm_es() const;
    Eigen::VectorXd norm_xf2() const;
    Eigen::VectorXd norm_xf1() const;
    Eigen::VectorXd norm_total() const;
    // running sup over stored samples of ||x_s - e_s||_2
    Eigen::VectorXd sup_estimate_input() const;
};

Eigen::MatrixXd propagator(const Eigen::MatrixXd& A, double dt);

// x0: modal initial data for modes 1..M; e0: initial observer error (n entries).
Trajectory integrate(const ModalCoefficients& mc, const CompensatorDesign& d, const Eigen::VectorXd& x0,
                     const Eigen::VectorXd& e0, const SimSettings& s);
// Observer started at zero state: e_s(0) = x_s(0).
Eigen::VectorXd observer_at_rest(const Eigen::VectorXd& x0, int n);

struct DecayFit {
    double growth = 0.0;      // least-squares slope of log-norm; same sign convention as rho
    double decay_rate = 0.0;  // -growth
    double prefactor = 0.0;
    double residual = 0.0;    // rms of the log-linear fit
    double t_from = 0.0;
    double t_to = 0.0;
    int points = 0;
};

// Fits the second half of the span where the series stays above `floor`.
DecayFit fit_decay(const std::vector<double>& t, const Eigen::VectorXd& norm, double floor = 1e-12,
                   double window_fraction = 0.5);

struct SlowBound {
    double lambda_tilde = 0.0;
    double M_tilde = 0.0;
    double t_star = 0.0;    // where ||e^{At}|| e^{lambda t} peaks
    double int_norm = 0.0;  // int_0^inf ||e^{At}|| dt
};
// lambda_tilde = fraction * |spectral abscissa|; sup and integral on a uniform grid.
SlowBound slow_bound(const Eigen::MatrixXd& Atilde, double fraction = 0.2, int grid = 4000);

struct LemmaConstants {
    int n = 0;
    double alpha = 1.0;
    double norm_K = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    bool has_l1 = false;
    double C_l1 = 0.0;
    double zeta = 0.0;  // hurwitz_zeta(alpha, n+1), l1 bound only
    bool grouped = false;
    Grouping grouping;
    double Ca1 = 0.0;
    double Ca2 = 0.0;
    double Cb1 = 0.0;
    double Cb2 = 0.0;
    double z_t_star = 0.0;  // where the first-term ratio of the z bound peaks
    SlowBound slow;
    double norm_l = 0.0;
    double Cs1 = 0.0;
    double Cs2 = 0.0;

    // every proof constant multiplied by f (teeth probe)
    LemmaConstants scaled(double f) const;
};

// Sharpest constants the proof chain certifies from the modal data over modes n+1..M.
// `grouping` selects the pairwise z-bound (single-output plants); otherwise z_k = c_k x_k.
LemmaConstants fit_lemma_constants(const ModalCoefficients& mc, const CompensatorDesign& d, int M, double alpha,
                                   const Grouping* grouping = nullptr);

// Picks the lemma case from the data: A2a with its fitted exponent and z_k = c_k x_k, otherwise
// A2b with alpha = 1 and the S_j grouping (single output only).
struct LemmaSetup {
    A2aReport a2a;
    bool grouped = false;
    LemmaConstants constants;
};
LemmaSetup lemma_setup(const ModalCoefficients& mc, const CompensatorDesign& d, int M);

struct BoundCheck {
    std::string name;
    bool pass = true;
    double min_slack = 0.0;  // min of rhs - lhs
    double tightness = 0.0;  // max of lhs / rhs
    double t_witness = 0.0;
    int k_witness = 0;
};

BoundCheck validate_lemma_xk(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);
BoundCheck validate_l2_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);
BoundCheck validate_l1_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);
// ||z||_1 along the trajectory (grouped or per-mode)
Eigen::VectorXd z_norm_series(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);
BoundCheck validate_z_bound(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);
BoundCheck validate_slow_iss(const Trajectory& tr, const Eigen::VectorXd& z_norm, const LemmaConstants& c);
std::vector<BoundCheck> validate_all(const Trajectory& tr, const ModalCoefficients& mc, const LemmaConstants& c);

// Slow initial state aligned with the top right singular vector of e^{A t*}.
Eigen::VectorXd iss_adversarial_state(const Eigen::MatrixXd& Atilde, double t_star);
// Modal initial data (M entries, slow part zero) aligned with (|c_k| e^{lambda_k t*} sign c_k)_{k>n},
// which makes the first term of the z bound sharp at t*.
Eigen::VectorXd z_adversarial_state(const ModalCoefficients& mc, int n, int M, double t_star);

// Modal data x0 (M entries) and observer error e0 (n entries).
struct SplitState {
    Eigen::VectorXd x0;
    Eigen::VectorXd e0;
};
// Eigenvector of assemble(n, M) for its rightmost eigenvalue. For a complex pair, re and im
// start the two quadrature solutions: sqrt(|x_re(t)|^2 + |x_im(t)|^2) = e^{rho t} exactly.
struct SlowestMode {
    std::complex<double> lambda;
    bool complex = false;
    SplitState re;
    SplitState im;  // zero for a real eigenvalue
};
SlowestMode slowest_mode_state(const ModalCoefficients& mc, const CompensatorDesign& d, int M);

// Teeth probes. Fast subsystem alone (K = L = 0) from the adversarial fast state, over [0, 3 t*].
Trajectory probe_fast_open_loop(const ModalCoefficients& mc, const CompensatorDesign& d, const LemmaConstants& c,
                                int M);
// Slow subsystem alone (no fast modes, z = 0) from the top singular direction at t*, over [0, 2 t*].
Trajectory probe_slow_only(const ModalCoefficients& mc, const CompensatorDesign& d, const LemmaConstants& c);

// x(z, t) per component on z-grid (rows) and requested sample indices (columns).
std::vector<Eigen::MatrixXd> reconstruct_field(const Trajectory& tr, const std::vector<EigenPair>& spectrum,
                                               const std::vector<double>& z, const std::vector<int>& samples);

}  // namespace modalfb
