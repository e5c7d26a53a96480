// modalfb: spectrum tables, the m-sweep certificate, closed-loop simulation and assumption reports.
#include "CLI11.hpp"

#include "modalfb/assumptions.hpp"
#include "modalfb/config.hpp"
#include "modalfb/csv.hpp"
#include "modalfb/design.hpp"
#include "modalfb/dimfind.hpp"
#include "modalfb/errors.hpp"
#include "modalfb/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace modalfb;

namespace {

enum Exit { Ok = 0, ConfigError = 2, Negative = 3, Numerical = 4 };

struct Options {
    std::string preset;
    std::string config;
    std::string out;
    std::string n_range;
    int m_max = -1;
    int threads = -1;
    long seed = -1;
    bool csv = false;
    bool plot = false;
    // per command
    int modes = -1;
    int k_max = -1;
    int M = -1;
    double T = -1.0;
    double dt = -1.0;
    std::string x0;
    std::string observer;
    bool tail_only = false;
};

struct Range {
    int lo = 0;
    int hi = 0;
};

Range parse_range(const std::string& s)
{
    auto num = [&](const std::string& t) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(t, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (t.empty() || pos != t.size()) {
            throw Error(ErrorKind::Config, "--n: expected A or A..B, got '" + s + "'");
        }
        return v;
    };
    const auto dots = s.find("..");
    Range r;
    if (dots == std::string::npos) {
        r.lo = r.hi = num(s);
    } else {
        r.lo = num(s.substr(0, dots));
        r.hi = num(s.substr(dots + 2));
    }
    if (r.hi < r.lo) {
        throw Error(ErrorKind::Config, "--n: empty range " + s);
    }
    return r;
}

int single_n(const Options& o)
{
    const Range r = parse_range(o.n_range);
    if (r.lo != r.hi) {
        throw Error(ErrorKind::Config, "--n: this command takes a single n, got " + o.n_range);
    }
    return r.lo;
}

ExperimentConfig load(const Options& o)
{
    if (o.preset.empty() == o.config.empty()) {
        throw Error(ErrorKind::Config, "give exactly one of --preset NAME or --config PATH");
    }
    ExperimentConfig c = o.preset.empty() ? load_config(o.config) : load_preset(o.preset);
    if (o.m_max >= 0) c.m_max = o.m_max;
    if (o.threads >= 0) c.sweep.threads = o.threads;
    if (o.seed >= 0) c.seed = static_cast<unsigned long>(o.seed);
    if (o.modes >= 0) c.spectrum_modes = o.modes;
    if (o.k_max >= 0) c.assume_k_max = o.k_max;
    if (o.M >= 0) c.sim_M = o.M;
    if (o.T >= 0.0) c.sim_T = o.T;
    if (o.dt >= 0.0) c.sim_dt = o.dt;
    if (!o.x0.empty()) c.sim_x0 = o.x0;
    if (!o.observer.empty()) c.sim_observer = o.observer;
    return c;
}

// command-line overrides are checked by the same rules as the file
void revalidate(const ExperimentConfig& c)
{
    c.validate();
}

std::optional<fs::path> out_dir(const Options& o)
{
    if (o.out.empty()) {
        return std::nullopt;
    }
    fs::create_directories(o.out);
    return fs::path(o.out);
}

void print_table(const CsvTable& t, bool csv)
{
    if (csv) {
        write_csv(std::cout, t);
        return;
    }
    for (const auto& h : t.header) {
        std::printf("%14s", h.c_str());
    }
    std::printf("\n");
    for (const auto& r : t.rows) {
        for (double v : r) {
            if (v == std::floor(v) && std::abs(v) < 1e9) {
                std::printf("%14.0f", v);
            } else {
                std::printf("%14.6f", v);
            }
        }
        std::printf("\n");
    }
}

// --- spectrum ---------------------------------------------------------------

int cmd_spectrum(const Options& o)
{
    ExperimentConfig c = load(o);
    revalidate(c);
    const int K = c.spectrum_modes;
    const ModalCoefficients mc = build_modal(c, K);
    CsvTable t;
    t.header = {"k", "branch", "lambda"};
    for (int i = 0; i < mc.inputs(); ++i) t.header.push_back("b" + std::to_string(i + 1));
    for (int i = 0; i < mc.outputs(); ++i) t.header.push_back("c" + std::to_string(i + 1));
    for (int k = 1; k <= mc.modes(); ++k) {
        std::vector<double> row{double(k), mc.branch.size() == std::size_t(mc.modes()) ? double(mc.branch[k - 1]) : 1.0,
                                mc.lambda[k - 1]};
        for (int i = 0; i < mc.inputs(); ++i) row.push_back(mc.B(k - 1, i));
        for (int i = 0; i < mc.outputs(); ++i) row.push_back(mc.C(k - 1, i));
        t.rows.push_back(std::move(row));
    }
    print_table(t, o.csv);
    if (auto d = out_dir(o)) {
        write_csv((*d / "spectrum.csv").string(), t);
    }
    return Ok;
}

// --- find-n ------------------------------------------------------------------

void write_find_n_plot(const fs::path& dir, const NTable& tab)
{
    std::ofstream g(dir / "find_n.gp");
    g << "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set multiplot layout 1,2\n"
         "set xlabel 'm'\nset ylabel 'rho_m'\n"
         "plot for [n="
      << tab.n.front() << ":" << tab.n.back()
      << "] 'rho_curves.csv' using ($1==n ? $2 : 1/0):3 with lines title sprintf('n = %d', n)\n"
         "set xlabel 'n'\nset ylabel 'rho at m_max'\n"
         "plot 'rho_vs_n.csv' using 1:2 with linespoints title 'rho(m_max)'\n"
         "unset multiplot\n";
}

int cmd_find_n(const Options& o)
{
    ExperimentConfig c = load(o);
    if (!o.n_range.empty()) {
        const Range r = parse_range(o.n_range);
        c.n_from = r.lo;
        c.n_to = r.hi;
    }
    revalidate(c);
    const ModalCoefficients mc = build_modal(c, c.m_max);
    NTable tab;
    bool none = false;
    try {
        tab = find_min_n(mc, c.n_from, c.n_to, c.m_max, c.kappa, c.nu, c.sweep, !o.tail_only);
    } catch (const NoneStabilizesError& e) {
        tab = e.table();
        none = true;
    }
    CsvTable summary;
    summary.header = {"n", "rho_mmax", "rho_limit", "lambda_bar", "converged", "bounded", "certified"};
    CsvTable curves;
    curves.header = {"n", "m", "rho"};
    for (const auto& cv : tab.curves) {
        summary.rows.push_back({double(cv.n), cv.rho.back(), cv.rho_limit, cv.lambda_bar, double(cv.converged),
                                double(cv.bounded), double(cv.certified)});
        for (std::size_t i = 0; i < cv.m.size(); ++i) {
            curves.rows.push_back({double(cv.n), double(cv.m[i]), cv.rho[i]});
        }
    }
    print_table(summary, o.csv);
    if (auto d = out_dir(o)) {
        write_csv((*d / "rho_vs_n.csv").string(), summary);
        write_csv((*d / "rho_curves.csv").string(), curves);
        if (o.plot) {
            write_find_n_plot(*d, tab);
        }
    }
    if (none) {
        std::fprintf(stderr, "no n in [%d, %d] certified at m_max = %d\n", c.n_from, c.n_to, c.m_max);
        return Negative;
    }
    if (!o.csv) {
        std::printf("minimal n = %d (m_max = %d)\n", tab.n_min, c.m_max);
    }
    return Ok;
}

// --- simulate ----------------------------------------------------------------

void write_simulate_plot(const fs::path& dir, int components)
{
    std::ofstream g(dir / "simulate.gp");
    g << "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set multiplot layout 1,2\n"
         "set logscale y\nset xlabel 't'\nset ylabel 'norm'\n"
         "plot 'trajectory.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n"
         "unset logscale y\nset xlabel 'z'\nset ylabel 'x(z,t)'\n"
         "plot 'field.csv' using 1:3 with lines title 'x1'";
    if (components > 1) {
        g << ", '' using 1:4 with lines title 'x2'";
    }
    g << "\nunset multiplot\n";
}

int cmd_simulate(const Options& o)
{
    ExperimentConfig c = load(o);
    if (!o.n_range.empty()) {
        c.sim_n = single_n(o);
    }
    revalidate(c);
    const int n = c.sim_n;
    const int M = c.sim_M;
    std::vector<EigenPair> spectrum;
    const ModalCoefficients mc = build_modal(c, M, &spectrum);
    const CompensatorDesign d = design_compensator(mc, n, c.kappa, c.nu);
    const Eigen::VectorXd x0 = initial_state(c, M, &spectrum);
    const Eigen::VectorXd e0 = c.sim_observer == "rest" ? observer_at_rest(x0, n) : Eigen::VectorXd::Zero(n);
    SimSettings s;
    s.M = M;
    s.T = c.sim_T;
    s.dt = c.sim_dt;
    const Trajectory tr = integrate(mc, d, x0, e0, s);

    std::printf("n = %d  M = %d  T = %g  dt = %g  samples = %d\n", n, M, s.T, s.dt, tr.samples());
    const Eigen::VectorXd total = tr.norm_total();
    try {
        const DecayFit f = fit_decay(tr.t, total);
        std::printf("lambda_fit = %.6f  decay_rate = %.6f  prefactor = %.4g  residual = %.3g  window = [%g, %g]\n",
                    f.growth, f.decay_rate, f.prefactor, f.residual, f.t_from, f.t_to);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::WindowTooShort) {
            throw;
        }
        std::printf("lambda_fit = n/a  (%s)\n", e.what());
    }

    bool all_pass = true;
    try {
        const LemmaSetup ls = lemma_setup(mc, d, M);
        std::printf("lemma case: %s  alpha = %.4f\n", ls.grouped ? "A2b (grouped z)" : "A2a (z_k = c_k x_k)",
                    ls.constants.alpha);
        for (const auto& b : validate_all(tr, mc, ls.constants)) {
            std::printf("  %-10s %s  tightness = %.4f  min slack = %.3g  at t = %g\n", b.name.c_str(),
                        b.pass ? "PASS" : "FAIL", b.tightness, b.min_slack, b.t_witness);
            all_pass = all_pass && b.pass;
        }
    } catch (const Error& e) {
        std::printf("lemma checks skipped: %s\n", e.what());
    }

    if (auto dir = out_dir(o)) {
        CsvTable t;
        t.header = {"t", "norm_xs", "norm_es", "norm_xf2", "norm_xf1"};
        for (int i = 0; i < mc.outputs(); ++i) t.header.push_back("y" + std::to_string(i + 1));
        for (int i = 0; i < mc.inputs(); ++i) t.header.push_back("u" + std::to_string(i + 1));
        const Eigen::VectorXd xs = tr.norm_xs(), es = tr.norm_es(), f2 = tr.norm_xf2(), f1 = tr.norm_xf1();
        for (int i = 0; i < tr.samples(); ++i) {
            std::vector<double> row{tr.t[i], xs[i], es[i], f2[i], f1[i]};
            for (int k = 0; k < mc.outputs(); ++k) row.push_back(tr.y(k, i));
            for (int k = 0; k < mc.inputs(); ++k) row.push_back(tr.u(k, i));
            t.rows.push_back(std::move(row));
        }
        write_csv((*dir / "trajectory.csv").string(), t);

        std::vector<double> z;
        for (int i = 0; i <= 100; ++i) z.push_back(i / 100.0);
        std::vector<int> idx;
        for (int q = 0; q <= 4; ++q) {
            const int i = (tr.samples() - 1) * q / 4;
            if (idx.empty() || idx.back() != i) idx.push_back(i);
        }
        const auto field = reconstruct_field(tr, spectrum, z, idx);
        CsvTable ft;
        ft.header = {"z", "t"};
        for (std::size_t p = 0; p < field.size(); ++p) ft.header.push_back("x" + std::to_string(p + 1));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            for (std::size_t i = 0; i < z.size(); ++i) {
                std::vector<double> row{z[i], tr.t[idx[j]]};
                for (const auto& F : field) row.push_back(F(i, j));
                ft.rows.push_back(std::move(row));
            }
        }
        write_csv((*dir / "field.csv").string(), ft);
        if (o.plot) {
            write_simulate_plot(*dir, static_cast<int>(field.size()));
        }
    }
    return all_pass ? Ok : Negative;
}

// --- check-assumptions -------------------------------------------------------

int cmd_check_assumptions(const Options& o)
{
    ExperimentConfig c = load(o);
    if (!o.n_range.empty()) {
        c.assume_n = single_n(o);
    }
    revalidate(c);
    const int n = c.assume_n;
    const int K = c.assume_k_max;
    const ModalCoefficients mc = build_modal(c, K);
    const CompensatorDesign d = design_compensator(mc, n, c.kappa, c.nu);
    const auto lambda = eigenvalue_fn(c, mc, std::max(2000, 2 * K));
    const AssumptionReport r = check_assumptions(mc, d, lambda, K);
    std::ostringstream text;
    text << "# n = " << n << ", k_max = " << K << "\n";
    write_report(text, r);
    std::cout << text.str();
    if (auto dir = out_dir(o)) {
        std::ofstream(*dir / "assumptions.txt") << text.str();
    }
    const bool a2a = r.has_a2a && r.a2a.pass;
    const bool a2b = r.a2b_growth.pass && (!r.has_a2b || r.a2b_series.pass) && r.grouping_ok;
    return r.a0.pass && r.a1.pass && (a2a || a2b) ? Ok : Negative;
}

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--preset", o.preset, "preset name (see --list-presets)");
    sub->add_option("--config", o.config, "config file path");
    sub->add_option("--out", o.out, "directory for CSV (and plot script) output");
    sub->add_option("--m-max", o.m_max, "largest residual order m");
    sub->add_option("--seed", o.seed, "seed for random initial data");
    sub->add_option("--threads", o.threads, "worker threads for the m sweep");
    sub->add_flag("--csv", o.csv, "print the main table as CSV");
    sub->add_flag("--plot", o.plot, "also write a gnuplot script next to the CSV files");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"modal feedback design and certification for parabolic PDEs"};
    app.require_subcommand(0, 1);
    Options o;
    bool list = false;
    app.add_flag("--list-presets", list, "print the shipped preset names");

    auto* spec = app.add_subcommand("spectrum", "eigenvalues and modal input/output coefficients");
    add_common(spec, o);
    spec->add_option("--modes", o.modes, "number of modes K");

    auto* fn = app.add_subcommand("find-n", "m-sweep certificate and minimal n");
    add_common(fn, o);
    fn->add_option("--n", o.n_range, "range A..B of design dimensions");
    fn->add_flag("--tail-only", o.tail_only, "sweep only the last 4 windows of m");

    auto* sim = app.add_subcommand("simulate", "closed-loop simulation, decay fit and lemma checks");
    add_common(sim, o);
    sim->add_option("--n", o.n_range, "design dimension n");
    sim->add_option("--M", o.M, "modal truncation of the plant");
    sim->add_option("--T", o.T, "final time");
    sim->add_option("--dt", o.dt, "sample step");
    sim->add_option("--x0", o.x0, "unit | random | mode:K");
    sim->add_option("--observer", o.observer, "rest | exact");

    auto* chk = app.add_subcommand("check-assumptions", "assumption report for a design dimension");
    add_common(chk, o);
    chk->add_option("--n", o.n_range, "design dimension n");
    chk->add_option("--k-max", o.k_max, "last mode used by the tail checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : ConfigError;
    }

    try {
        if (list) {
            for (const auto& p : preset_names()) {
                std::printf("%s\n", p.c_str());
            }
            return Ok;
        }
        if (*spec) return cmd_spectrum(o);
        if (*fn) return cmd_find_n(o);
        if (*sim) return cmd_simulate(o);
        if (*chk) return cmd_check_assumptions(o);
        std::cout << app.help();
        return ConfigError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        if (e.kind() == ErrorKind::Config) return ConfigError;
        if (e.kind() == ErrorKind::NoneStabilizes) return Negative;
        return Numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Numerical;
    }
}
