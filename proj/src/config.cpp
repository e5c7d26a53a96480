#include "modalfb/config.hpp"

#include "modalfb/assumptions.hpp"
#include "modalfb/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace modalfb {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw Error(ErrorKind::Config, key + ": " + what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw)
{
    const std::string s = trim(raw);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) {
        fail(key, "expected a finite number, got '" + raw + "'");
    }
    return v;
}

int to_int(const std::string& key, const std::string& raw)
{
    const std::string s = trim(raw);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || v < -1000000000L || v > 1000000000L) {
        fail(key, "expected an integer, got '" + raw + "'");
    }
    return static_cast<int>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& raw)
{
    std::vector<double> out;
    std::istringstream ss(raw);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(to_double(key, cell));
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s{
        {"", {"name"}},
        {"plant",
         {"kind", "r", "actuation", "zeta", "eps", "xi", "alpha", "r12", "r21", "zeta1", "eps1", "zeta2", "eps2", "xi1",
          "xi2"}},
        {"design", {"kappa", "nu"}},
        {"spectrum", {"modes"}},
        {"sweep", {"n_from", "n_to", "m_max", "window", "tol_conv", "margin", "threads"}},
        {"sim", {"n", "M", "T", "dt", "x0", "observer", "seed"}},
        {"assumptions", {"n", "k_max"}},
    };
    return s;
}

void apply(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& raw)
{
    const std::string full = section.empty() ? key : "[" + section + "] " + key;
    const std::string v = trim(raw);
    if (section.empty()) {
        c.name = v;
    } else if (section == "plant") {
        if (key == "kind") {
            if (v == "scalar") {
                c.kind = PlantKind::Scalar;
            } else if (v == "coupled") {
                c.kind = PlantKind::Coupled;
            } else {
                fail(full, "expected scalar or coupled, got '" + v + "'");
            }
        } else if (key == "actuation") {
            if (v == "boundary") {
                c.scalar.actuation = Actuation::Boundary;
            } else if (v == "indomain") {
                c.scalar.actuation = Actuation::InDomain;
            } else {
                fail(full, "expected boundary or indomain, got '" + v + "'");
            }
        } else {
            const double x = to_double(full, v);
            if (key == "r") c.scalar.r = x;
            if (key == "zeta") c.scalar.zeta = x;
            if (key == "eps") c.scalar.eps = x;
            if (key == "xi") c.scalar.xi = x;
            if (key == "alpha") c.coupled.alpha = x;
            if (key == "r12") c.coupled.r12 = x;
            if (key == "r21") c.coupled.r21 = x;
            if (key == "zeta1") c.coupled.actuators[0].zeta = x;
            if (key == "eps1") c.coupled.actuators[0].eps = x;
            if (key == "zeta2") c.coupled.actuators[1].zeta = x;
            if (key == "eps2") c.coupled.actuators[1].eps = x;
            if (key == "xi1") c.coupled.sensors[0] = x;
            if (key == "xi2") c.coupled.sensors[1] = x;
        }
    } else if (section == "design") {
        (key == "kappa" ? c.kappa : c.nu) = to_list(full, v);
    } else if (section == "spectrum") {
        c.spectrum_modes = to_int(full, v);
    } else if (section == "sweep") {
        if (key == "n_from") c.n_from = to_int(full, v);
        if (key == "n_to") c.n_to = to_int(full, v);
        if (key == "m_max") c.m_max = to_int(full, v);
        if (key == "window") c.sweep.window = to_int(full, v);
        if (key == "threads") c.sweep.threads = to_int(full, v);
        if (key == "tol_conv") c.sweep.tol_conv = to_double(full, v);
        if (key == "margin") c.sweep.margin = to_double(full, v);
    } else if (section == "sim") {
        if (key == "n") c.sim_n = to_int(full, v);
        if (key == "M") c.sim_M = to_int(full, v);
        if (key == "T") c.sim_T = to_double(full, v);
        if (key == "dt") c.sim_dt = to_double(full, v);
        if (key == "x0") c.sim_x0 = v;
        if (key == "observer") c.sim_observer = v;
        if (key == "seed") {
            const int sd = to_int(full, v);
            if (sd < 0) {
                fail(full, "must be nonnegative");
            }
            c.seed = static_cast<unsigned long>(sd);
        }
    } else if (section == "assumptions") {
        if (key == "n") c.assume_n = to_int(full, v);
        if (key == "k_max") c.assume_k_max = to_int(full, v);
    }
}

}  // namespace

void ExperimentConfig::validate() const
{
    try {
        if (kind == PlantKind::Scalar) {
            scalar.validate();
        } else {
            coupled.validate();
        }
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("[plant] ") + e.what());
    }
    if (kappa.empty()) {
        fail("[design] kappa", "at least one target required");
    }
    if (kappa.size() != nu.size()) {
        fail("[design] nu", "needs as many targets as kappa");
    }
    const int j = static_cast<int>(kappa.size());
    if (spectrum_modes < 0) {
        fail("[spectrum] modes", "must be nonnegative");
    }
    if (n_from < j || n_to < n_from) {
        fail("[sweep] n_from", "need kappa count <= n_from <= n_to");
    }
    if (m_max <= n_to) {
        fail("[sweep] m_max", "must exceed n_to");
    }
    if (sweep.window < 2) {
        fail("[sweep] window", "must be at least 2");
    }
    if (!(sweep.tol_conv > 0.0)) {
        fail("[sweep] tol_conv", "must be positive");
    }
    if (!(sweep.margin >= 0.0)) {
        fail("[sweep] margin", "must be nonnegative");
    }
    if (sweep.threads < 1) {
        fail("[sweep] threads", "must be at least 1");
    }
    if (sim_n < j) {
        fail("[sim] n", "must be at least the kappa count");
    }
    if (sim_M <= sim_n) {
        fail("[sim] M", "must exceed n");
    }
    if (!(sim_T >= 0.0)) {
        fail("[sim] T", "must be nonnegative");
    }
    if (!(sim_dt > 0.0)) {
        fail("[sim] dt", "must be positive");
    }
    if (sim_x0 != "unit" && sim_x0 != "random" && sim_x0.rfind("mode:", 0) != 0) {
        fail("[sim] x0", "expected unit, random or mode:K");
    }
    if (sim_observer != "rest" && sim_observer != "exact") {
        fail("[sim] observer", "expected rest or exact");
    }
    if (assume_n < j) {
        fail("[assumptions] n", "must be at least the kappa count");
    }
    if (assume_k_max < assume_n + 16) {
        fail("[assumptions] k_max", "must exceed n by at least 16");
    }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream msg;
        msg << source << " line " << e.line() << ": " << e.message();
        throw Error(ErrorKind::Config, msg.str());
    }
    ExperimentConfig c;
    const auto& sch = schema();
    for (const auto& [name, node] : tree) {
        if (node.empty() && node.data().empty() && sch.count(name)) {
            continue;  // empty section
        }
        if (node.empty()) {
            if (!sch.at("").count(name)) {
                fail(name, "unknown top-level key");
            }
            apply(c, "", name, node.data());
            continue;
        }
        const auto it = sch.find(name);
        if (it == sch.end() || name.empty()) {
            fail("[" + name + "]", "unknown section");
        }
        for (const auto& [key, leaf] : node) {
            if (!it->second.count(key)) {
                fail("[" + name + "] " + key, "unknown key");
            }
            apply(c, name, key, leaf.data());
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw Error(ErrorKind::Config, "cannot open config file " + path);
    }
    return parse_config(f, path);
}

std::string preset_dir()
{
    if (const char* env = std::getenv("MODALFB_PRESETS")) {
        return env;
    }
    return MODALFB_PRESET_DIR;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(preset_dir(), ec)) {
        if (e.path().extension() == ".ini") {
            out.push_back(e.path().stem().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ExperimentConfig load_preset(const std::string& name)
{
    const auto path = std::filesystem::path(preset_dir()) / (name + ".ini");
    if (!std::filesystem::exists(path)) {
        std::string known;
        for (const auto& p : preset_names()) {
            known += (known.empty() ? "" : ", ") + p;
        }
        throw Error(ErrorKind::Config, "unknown preset '" + name + "' (known: " + known + ")");
    }
    ExperimentConfig c = load_config(path.string());
    if (c.name.empty()) {
        c.name = name;
    }
    return c;
}

ModalCoefficients build_modal(const ExperimentConfig& cfg, int K, std::vector<EigenPair>* spectrum)
{
    if (cfg.kind == PlantKind::Scalar) {
        if (spectrum) {
            *spectrum = scalar_spectrum(cfg.scalar, K);
        }
        return scalar_modal(cfg.scalar, K);
    }
    if (K == 0) {
        ModalCoefficients mc;
        mc.lambda.resize(0);
        mc.B.resize(0, 2);
        mc.C.resize(0, 2);
        if (spectrum) {
            spectrum->clear();
        }
        return mc;
    }
    std::vector<EigenPair> sp = coupled_leading(cfg.coupled, K);
    ModalCoefficients mc = coupled_modal(cfg.coupled, sp);
    if (spectrum) {
        *spectrum = std::move(sp);
    }
    return mc;
}

Eigen::VectorXd initial_state(const ExperimentConfig& cfg, int K, const std::vector<EigenPair>* spectrum)
{
    if (cfg.sim_x0 == "unit") {
        if (cfg.kind == PlantKind::Scalar) {
            return project_unit_scalar(K);
        }
        if (!spectrum || static_cast<int>(spectrum->size()) < K) {
            throw Error(ErrorKind::InvalidArgument, "projection needs the eigenfunctions");
        }
        std::vector<EigenPair> head(spectrum->begin(), spectrum->begin() + K);
        return project(head, [](double, int) { return 1.0; });
    }
    if (cfg.sim_x0 == "random") {
        // Gaussian modal coefficients damped like 1/k, so the profile lies in L2
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd x(K);
        for (int k = 1; k <= K; ++k) {
            x[k - 1] = g(rng) / k;
        }
        return x;
    }
    const int k = to_int("[sim] x0", cfg.sim_x0.substr(5));
    if (k < 1 || k > K) {
        fail("[sim] x0", "mode index outside 1.." + std::to_string(K));
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(K);
    x[k - 1] = 1.0;
    return x;
}

std::function<double(int)> eigenvalue_fn(const ExperimentConfig& cfg, const ModalCoefficients& mc, int count)
{
    if (cfg.kind == PlantKind::Scalar) {
        const double r = cfg.scalar.r;
        return [r](int k) { return scalar_eigenvalue(r, k); };
    }
    return tabulated_eigenvalues(coupled_merged_eigenvalues(cfg.coupled, mc.lambda, count));
}

}  // namespace modalfb
