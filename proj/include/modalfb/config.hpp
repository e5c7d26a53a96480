#pragma once

#include "modalfb/dimfind.hpp"
#include "modalfb/modal.hpp"
#include "modalfb/spectral.hpp"

#include <istream>
#include <string>
#include <vector>

namespace modalfb {

enum class PlantKind { Scalar, Coupled };

struct ExperimentConfig {
    std::string name;
    PlantKind kind = PlantKind::Scalar;
    ScalarPlant scalar;
    CoupledPlant coupled;

    std::vector<double> kappa{-10.0, -11.0};
    std::vector<double> nu{-15.0, -16.0};

    int spectrum_modes = 10;

    int n_from = 3;
    int n_to = 8;
    int m_max = 200;
    SweepSettings sweep;

    int sim_n = 5;
    int sim_M = 400;
    double sim_T = 2.0;
    double sim_dt = 1e-3;
    std::string sim_x0 = "unit";  // unit | mode:K | random
    unsigned long seed = 1;       // random initial data
    std::string sim_observer = "rest";  // rest | exact

    int assume_n = 5;
    int assume_k_max = 1000;

    void validate() const;
};

// INI-style text: [section] then key = value; '#' and ';' start comments.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_preset(const std::string& name);
std::vector<std::string> preset_names();
std::string preset_dir();

// Modal data for the first K modes; fills `spectrum` (eigenfunctions) when requested.
ModalCoefficients build_modal(const ExperimentConfig& cfg, int K, std::vector<EigenPair>* spectrum = nullptr);
// Modal coordinates of the initial profile descriptor (K entries).
Eigen::VectorXd initial_state(const ExperimentConfig& cfg, int K, const std::vector<EigenPair>* spectrum);
// Eigenvalue generator for the tail checks, asymptotic beyond the computed modes for the coupled plant.
std::function<double(int)> eigenvalue_fn(const ExperimentConfig& cfg, const ModalCoefficients& mc, int count);

}  // namespace modalfb
