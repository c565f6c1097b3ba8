// mwtool: command-line front end for the mw library.

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mw/cclock.hpp"
#include "mw/constants.hpp"
#include "mw/io.hpp"
#include "mw/kernel.hpp"
#include "mw/metrology.hpp"
#include "mw/penning.hpp"
#include "mw/phases.hpp"
#include "mw/sme.hpp"

using nlohmann::json;
using namespace mw;

namespace {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string out_dir;
    std::string species_file;
    std::string data_dir = MW_DATA_DIR;
};

SpeciesRegistry registry(const Globals& g) {
    SpeciesRegistry r;
    if (!g.species_file.empty()) r.load_file(g.species_file);
    return r;
}

json scenario(const Globals& g, const std::string& name) {
    const json all = load_json_file(g.data_dir + "/scenarios.json");
    if (!all.at("scenarios").contains(name)) throw ValidationError("unknown scenario '" + name + "'");
    return all["scenarios"][name];
}

Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ValidationError("cannot parse rational '" + s + "'");
    }
}

std::string rational_str(const Rational& r) {
    return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
}

/// JSON report to stdout, and to <out>/<name>.json when an output directory is set.
void emit(const Globals& g, const std::string& name, const json& report) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    const char* env = std::getenv("MW_OUTPUT_DIR");
    if (!g.out_dir.empty() || (env && *env)) write_text(output_dir(g.out_dir) / (name + ".json"), text);
}

void emit_text(const Globals& g, const std::string& filename, const std::string& text, bool to_stdout = true) {
    if (to_stdout) std::cout << text;
    const char* env = std::getenv("MW_OUTPUT_DIR");
    if (!g.out_dir.empty() || (env && *env)) write_text(output_dir(g.out_dir) / filename, text);
}

json solution_json(const ClockConfig& cfg, const ClockSolution& s) {
    return {{"n", cfg.bragg_order_n},
            {"N", rational_str(cfg.divisor_N)},
            {"beta", s.beta},
            {"beta_prime", s.beta_prime},
            {"omega_m_over_omega_C", s.omega_m / cfg.omega_C},
            {"omega_L_over_omega_C", s.omega_L / cfg.omega_C},
            {"omega_plus_over_omega_C", s.omega_plus / cfg.omega_C},
            {"omega_minus_over_omega_C", s.omega_minus / cfg.omega_C},
            {"omega_C_over_omega_m", rational_str(s.ratio_C_over_m)},
            {"omega_L_over_omega_m", rational_str(s.ratio_L_over_m)},
            {"omega_C", cfg.omega_C},
            {"phi_F", s.phi_F},
            {"phi_I", s.phi_I}};
}

NoiseModel load_noise(const Globals& g, const std::string& spec) {
    std::string path = spec;
    if (spec == "high" || spec == "low" || spec == "very-low") {
        path = g.data_dir + "/noise_" + (spec == "very-low" ? std::string("very_low") : spec) + ".json";
    }
    return NoiseModel::from_json(load_json_file(path));
}

double scenario_keff(const json& sc) {
    return sc.at("photon_recoils").get<double>() * 2.0 * pi / sc.at("wavelength_m").get<double>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mwtool: matter-wave interferometry and precision-measurement models"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out_dir, "Output directory (default: $MW_OUTPUT_DIR, else stdout only)");
    app.add_option("--species-file", g.species_file, "Extra species registry (JSON)");
    app.add_option("--data-dir", g.data_dir, "Directory holding shipped scenario and model files");

    std::function<int()> action;

    // ---------------- clock
    auto* clock = app.add_subcommand("clock", "Compton-clock lock ratios and phases");
    clock->require_subcommand(1);
    {
        auto* solve = clock->add_subcommand("solve", "Solve the lock for one (n, N)");
        static int n = 1;
        static std::string N = "1/2", sp = "electron";
        static double T = 0.0;
        solve->add_option("--n", n, "Bragg order")->check(CLI::PositiveNumber);
        solve->add_option("--N", N, "Divisor N, rational like 1/2");
        solve->add_option("--species", sp, "Species supplying omega_C");
        solve->add_option("--T", T, "Pulse separation [s]");
        solve->callback([&] {
            action = [&] {
                const auto reg = registry(g);
                ClockConfig cfg{n, parse_rational(N), compton_frequency(reg.get(sp)), T};
                emit(g, "clock_solve", make_report("clock solve", {{"n", n}, {"N", N}, {"species", sp}, {"T", T}},
                                                   solution_json(cfg, solve_lock(cfg))));
                return 0;
            };
        });

        auto* table = clock->add_subcommand("table", "CSV of the notable Compton-clock configurations");
        static std::string tsp = "electron";
        table->add_option("--species", tsp, "Species");
        table->callback([&] {
            action = [&] {
                const auto reg = registry(g);
                const double wC = compton_frequency(reg.get(tsp));
                CsvTable t;
                t.header = {"n", "N", "beta", "beta_prime", "omega_m/omega_C", "omega_L/omega_C", "omega_plus/omega_C",
                            "omega_minus/omega_C", "omega_C_rad_s"};
                const std::vector<std::pair<int, Rational>> rows = {{2, Rational(1, 2)}, {1, Rational(1, 2)}, {1, Rational(1000)}};
                for (auto& [n_, N_] : rows) {
                    ClockConfig cfg{n_, N_, wC, 0.0};
                    auto s = solve_lock(cfg);
                    t.rows.push_back({std::to_string(n_), rational_str(N_), fmt(s.beta), fmt(s.beta_prime),
                                      fmt(s.omega_m / wC), fmt(s.omega_L / wC), fmt(s.omega_plus / wC),
                                      fmt(s.omega_minus / wC), fmt(wC)});
                }
                emit_text(g, "clock_table.csv", to_csv(t));
                return 0;
            };
        });

        auto* chain = clock->add_subcommand("chain", "Frequency-chain bookkeeping");
        chain->callback([&] {
            action = [&] {
                const json j = load_json_file(g.data_dir + "/frequency_chain.json");
                FrequencyChain c;
                c.nu_ref = j.value("nu_ref_Hz", c.nu_ref);
                c.eta1 = j.value("eta1", c.eta1);
                c.eta2 = j.value("eta2", c.eta2);
                c.eta3 = j.value("eta3", c.eta3);
                if (j.contains("offsets"))
                    for (int i = 0; i < 3; ++i) c.offsets[i] = j["offsets"].at(std::size_t(i)).get<double>();
                c.comb_harmonic = j.value("comb_harmonic", c.comb_harmonic);
                c.comb_step = j.value("comb_step", c.comb_step);
                c.dds_numerator = j.value("dds_numerator", c.dds_numerator);
                c.dds_bits = j.value("dds_bits", c.dds_bits);
                c.bragg_n = j.value("bragg_n", c.bragg_n);
                emit(g, "clock_chain",
                     make_report("clock chain", j,
                                 {{"nu_hfs_Hz", c.nu_hfs()}, {"N_c", c.N_c()}, {"N_dds", c.N_dds()}, {"nu_L_Hz", c.nu_L()},
                                  {"nu_m_Hz", c.nu_m()}, {"nu_C_Hz", c.nu_C()},
                                  {"nu_ref_from_measured_nu_C_Hz", c.nu_ref_from(nu_C_Cs133_measured)}}));
                return 0;
            };
        });
    }

    // ---------------- alpha
    auto* alpha = app.add_subcommand("alpha", "Fine-structure constant from a Compton frequency");
    {
        static std::string sp = "Cs133";
        static double nuC = 0.0, nuC_sigma = 0.0;
        alpha->add_option("--species", sp, "Species");
        alpha->add_option("--nu-C", nuC, "Compton frequency [Hz] (default: measured Cs value, else m c^2/h)");
        alpha->add_option("--nu-C-sigma", nuC_sigma, "Uncertainty of nu_C [Hz]");
        alpha->callback([&] {
            action = [&] {
                const auto reg = registry(g);
                const Species& s = reg.get(sp);
                double nu = nuC, sig = nuC_sigma;
                std::string source = "user";
                if (nu == 0.0) {
                    if (sp == "Cs133") {
                        nu = nu_C_Cs133_measured, sig = nu_C_Cs133_measured_sigma, source = "measured";
                    } else {
                        nu = s.mass * codata2010.c * codata2010.c / codata2010.h, source = "m c^2 / h";
                    }
                }
                const double a = alpha_from_compton(nu, codata2010.Rinf, s.relative_mass, codata2010.Ar_e);
                char line[128];
                std::snprintf(line, sizeof line, "%.9e", a);
                emit(g, "alpha",
                     make_report("alpha", {{"species", sp}, {"nu_C", nu}, {"nu_C_sigma", sig}},
                                 {{"alpha", a}, {"alpha_text", line}, {"sigma", 0.5 * a * sig / nu},
                                  {"relative_sigma", 0.5 * sig / nu}, {"inverse_alpha", 1.0 / a},
                                  {"nu_C_Hz", nu}, {"nu_C_source", source}}));
                return 0;
            };
        });
    }

    // ---------------- phase
    auto* phase = app.add_subcommand("phase", "Interferometer phase models");
    phase->require_subcommand(1);
    {
        auto* mz = phase->add_subcommand("mz", "Mach-Zehnder phase and its clock-comparison decomposition");
        static double k = 2 * pi / 852e-9, gg = 9.81, T = 1.0;
        static int n = 1;
        static std::string sp = "Cs133";
        mz->add_option("--k", k, "Wavenumber [1/m]");
        mz->add_option("--n", n, "Order")->check(CLI::PositiveNumber);
        mz->add_option("--g", gg, "Acceleration [m/s^2]");
        mz->add_option("--T", T, "Pulse separation [s]")->check(CLI::PositiveNumber);
        mz->add_option("--species", sp, "Species");
        mz->callback([&] {
            action = [&] {
                const auto reg = registry(g);
                const Species& s = reg.get(sp);
                InterferometerGeometry geo;
                geo.order_n = n, geo.wavenumber_k = k, geo.T = T, geo.gravity_g = gg;
                const double v0 = 2.0 * n * codata2010.hbar * k / s.mass;
                const double wC = compton_frequency(s);
                const auto tr = mz_trajectories(0.0, 0.0, -gg, v0, T);
                // g points down; potential U = g x
                const auto d = clock_comparison_decompose(tr.upper, tr.lower, wC, v0, gg);
                emit(g, "phase_mz",
                     make_report("phase mz", {{"k", k}, {"n", n}, {"g", gg}, {"T", T}, {"species", sp}},
                                 {{"mz_phase", mz_phase(geo)}, {"phi_U", d.phi_U}, {"phi_TD", d.phi_TD},
                                  {"phi_I", d.phi_I}, {"total", d.total}}));
                return 0;
            };
        });

        auto* ab = phase->add_subcommand("ab", "Gravitational Aharonov-Bohm phase for a scenario");
        static std::string scen = "present";
        ab->add_option("--scenario", scen, "present | future");
        ab->callback([&] {
            action = [&] {
                const json sc = scenario(g, scen);
                const auto reg = registry(g);
                const Species& s = reg.get(sc.at("species").get<std::string>());
                const auto opt = ab_optimal_geometry(1.0);
                const double R = sc.at("sphere_radius_m").get<double>();
                SourceMassConfig c{R, 0.0, opt.center_spacing_L * R, sc.at("density_kg_m3").get<double>(),
                                   sc.at("T_s").get<double>()};
                c.separation_s = near_saddle(c);
                const auto ps = ab_position_systematic(sc.at("sigma_x_m").get<double>(), sc.at("sigma_r_m").get<double>(), R);
                emit(g, "phase_ab",
                     make_report("phase ab", sc,
                                 {{"L_over_R", opt.center_spacing_L}, {"s_over_R", opt.separation_s},
                                  {"dU_over_G_rho_s2", ab_delta_U(opt) / (codata2010.G * opt.separation_s * opt.separation_s)},
                                  {"separation_m", c.separation_s}, {"phase_rad", ab_phase(c, s)},
                                  {"position_mean_ppt", 1e3 * ps.mean}, {"position_std_ppt", 1e3 * ps.std}}));
                return 0;
            };
        });
    }

    // ---------------- kernel
    auto* kernel = app.add_subcommand("kernel", "Quantum-kernel checks");
    kernel->require_subcommand(1);
    {
        auto* dirac = kernel->add_subcommand("dirac", "Anticommutator residuals over random metrics");
        static int samples = 1000;
        static unsigned long long seed = 1;
        dirac->add_option("--samples", samples)->check(CLI::PositiveNumber);
        dirac->add_option("--seed", seed);
        dirac->callback([&] {
            action = [&] {
                std::mt19937_64 rng(seed);
                std::uniform_real_distribution<double> u(-0.2, 0.2);
                double worst = 0.0;
                for (int i = 0; i < samples; ++i) {
                    Eigen::Matrix4d h;
                    for (int a = 0; a < 4; ++a)
                        for (int b = a; b < 4; ++b) h(a, b) = h(b, a) = u(rng);
                    MetricSample m{Eigen::Vector4d(-1, 1, 1, 1).asDiagonal().toDenseMatrix() + h};
                    try {
                        worst = std::max(worst, anticommutator_residual(dirac_curved(m)));
                    } catch (const NotPositiveDefinite&) {
                    }
                }
                emit(g, "kernel_dirac",
                     make_report("kernel dirac", {{"samples", samples}, {"seed", seed}}, {{"max_residual", worst}}));
                return 0;
            };
        });

        auto* bragg = kernel->add_subcommand("bragg", "Momentum-ladder evolution of a Gaussian Bragg pulse");
        static double rabi = 0.0, bsigma = 250e-9, bk = 2 * 2 * pi / 243e-9, bv = -1.0;
        static int border = 1;
        static std::string bsp = "H";
        bragg->add_option("--rabi", rabi, "Peak two-photon Rabi frequency [rad/s] (default: pi pulse at order 1)");
        bragg->add_option("--sigma", bsigma, "Envelope time constant [s]")->check(CLI::PositiveNumber);
        bragg->add_option("--k-eff", bk, "Ladder momentum step [1/m]")->check(CLI::PositiveNumber);
        bragg->add_option("--order", border, "Resonant order (sets the default velocity)")->check(CLI::PositiveNumber);
        bragg->add_option("--velocity", bv, "Atom velocity [m/s] (default: on resonance for --order)");
        bragg->add_option("--species", bsp);
        bragg->callback([&] {
            action = [&] {
                const auto reg = registry(g);
                BraggPulse p;
                p.mass = reg.get(bsp).mass;
                p.effective_wavenumber = bk;
                p.envelope_sigma = bsigma;
                p.order_truncation = std::max(8, border + 4);
                p.steps = 4000;
                // order n resonance between rungs 0 and n: v = -n hbar k / (2 m)
                const double v = bv >= 0.0 ? bv : -border * codata2010.hbar * bk / (2.0 * p.mass);
                // Gaussian pulse area Omega0 sigma sqrt(2 pi) = pi
                p.two_photon_rabi_peak = rabi > 0.0 ? rabi : std::sqrt(pi / 2.0) / bsigma;
                std::vector<cplx> c(std::size_t(2 * p.order_truncation + 1), 0.0);
                c[std::size_t(p.order_truncation)] = 1.0;
                const auto out = bragg_pulse_evolve(c, p, v);
                CsvTable t;
                t.header = {"index", "re", "im", "population"};
                for (std::size_t i = 0; i < out.size(); ++i)
                    t.rows.push_back({std::to_string(int(i) - p.order_truncation), fmt(out[i].real()), fmt(out[i].imag()),
                                      fmt(std::norm(out[i]))});
                emit_text(g, "bragg.csv", to_csv(t));
                return 0;
            };
        });

        auto* prop = kernel->add_subcommand("propagate", "Path integral against split-step for a Gaussian packet");
        static int points = 512, slices = 64, ref_steps = 8192;
        static double duration = 10.0, k0 = 0.0, curvature = 0.0, half_width = 24.0, psigma = 2.0, x0 = 0.0;
        prop->add_option("--points", points)->check(CLI::PositiveNumber);
        prop->add_option("--slices", slices)->check(CLI::PositiveNumber);
        prop->add_option("--reference-steps", ref_steps, "Split-step reference steps")->check(CLI::PositiveNumber);
        prop->add_option("--duration", duration, "In units where hbar/m = 1 m^2/s");
        prop->add_option("--half-width", half_width, "Grid spans [-w, w] [m]")->check(CLI::PositiveNumber);
        prop->add_option("--sigma", psigma, "Packet width [m]")->check(CLI::PositiveNumber);
        prop->add_option("--x0", x0, "Packet centre [m]");
        prop->add_option("--k0", k0, "Initial wavenumber [1/m]");
        prop->add_option("--curvature", curvature, "Harmonic h00 curvature, U = curvature x^2 / 2 per unit mass");
        prop->callback([&] {
            action = [&] {
                const double m = codata2010.hbar;  // hbar/m = 1
                auto psi = gaussian_packet(-half_width, half_width, std::size_t(points), m, x0, psigma, k0);
                std::vector<double> h00(static_cast<std::size_t>(points)), U(static_cast<std::size_t>(points));
                const double c2 = codata2010.c * codata2010.c;
                for (std::size_t i = 0; i < psi.size(); ++i) {
                    U[i] = 0.5 * m * curvature * psi.x(i) * psi.x(i);
                    h00[i] = -2.0 * U[i] / (m * c2);
                }
                const auto a = path_integral_propagate(psi, h00, duration, slices);
                const auto b = splitstep_schrodinger(psi, U, duration, ref_steps);
                double diff = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a.psi[i] - b.psi[i]));
                emit(g, "kernel_propagate",
                     make_report("kernel propagate",
                                 {{"points", points}, {"slices", slices}, {"duration", duration}, {"k0", k0},
                                  {"curvature", curvature}, {"half_width", half_width}, {"sigma", psigma}, {"x0", x0},
                                  {"reference_steps", ref_steps}},
                                 {{"max_pointwise_difference", diff}, {"norm_path_integral", a.norm()},
                                  {"norm_split_step", b.norm()}}));
                return 0;
            };
        });
    }

    // ---------------- penning
    auto* penning = app.add_subcommand("penning", "Electron interferometer in a Penning trap");
    penning->require_subcommand(1);
    {
        static double k0k = 0.0, phi0 = 0.0, dz = 0.0;
        auto* ph = penning->add_subcommand("phase", "Single-interferometer phase");
        ph->add_option("--k0-over-k", k0k);
        ph->add_option("--phi0", phi0);
        ph->add_option("--delta-z", dz, "Axial-frequency offset [rad/s]");
        ph->callback([&] {
            action = [&] {
                const json sc = scenario(g, "electron");
                const double wr = sc["omega_r_rad_s"], T = sc["T_s"];
                emit(g, "penning_phase",
                     make_report("penning phase", {{"k0_over_k", k0k}, {"phi0", phi0}, {"delta_z", dz}},
                                 {{"phase_rad", single_phase(wr, T, k0k, phi0, dz)},
                                  {"double_diffraction_rad", double_diffraction_phase(wr, T, dz)},
                                  {"Phi0_rad", phi0_reference(wr, T)}}));
                return 0;
            };
        });

        static double gamma = 2 * pi * 1e-6;
        auto* opt = penning->add_subcommand("optimum", "Damping-limited optimum");
        opt->add_option("--gamma", gamma, "Axial damping [rad/s]")->check(CLI::PositiveNumber);
        opt->callback([&] {
            action = [&] {
                const json sc = scenario(g, "electron");
                const auto o = damping_optimum(sc["omega_r_rad_s"], gamma);
                emit(g, "penning_optimum",
                     make_report("penning optimum", {{"gamma", gamma}},
                                 {{"T_opt_s", o.T_opt}, {"omega_z_opt_rad_s", o.omega_z_opt},
                                  {"f_z_opt_Hz", o.omega_z_opt / (2 * pi)}, {"Phi_opt_rad", o.Phi_opt}}));
                return 0;
            };
        });

        static double D3 = 0.0, D4 = 1e-4, k0 = 0.0, T_anh = 2.8e-3, d_anh = 0.02;
        auto* anh = penning->add_subcommand("anharmonic", "Anharmonic phase shift");
        anh->add_option("--D3", D3);
        anh->add_option("--D4", D4);
        anh->add_option("--k0", k0, "Initial-motion wavenumber [1/m]");
        anh->add_option("--phi0", phi0);
        anh->add_option("--T", T_anh, "Pulse separation [s]");
        anh->add_option("--d", d_anh, "Trap length [m]");
        anh->callback([&] {
            action = [&] {
                const double wr = 2 * pi * 1.2e9, k = 2 * 2 * pi / 1064e-9;
                TrapConfig trap;
                trap.D3 = D3, trap.D4 = D4, trap.d = d_anh, trap.omega_z = pi / (2 * T_anh);
                const double dphi = anharmonic_shift(trap, wr, T_anh, k, k0, phi0);
                emit(g, "penning_anharmonic",
                     make_report("penning anharmonic", {{"D3", D3}, {"D4", D4}, {"k0", k0}, {"phi0", phi0}, {"T", T_anh}, {"d", d_anh}},
                                 {{"delta_Phi_rad", dphi}, {"ratio_to_Phi0", dphi / phi0_reference(wr, T_anh)}}));
                return 0;
            };
        });

        static double v0 = 0.0;
        auto* gap = penning->add_subcommand("gap", "Closure gap and electron-temperature limit");
        gap->add_option("--D4", D4);
        gap->add_option("--v0", v0, "Initial velocity amplitude [m/s]");
        gap->add_option("--phi0", phi0);
        gap->callback([&] {
            action = [&] {
                const json sc = scenario(g, "electron");
                TrapConfig trap;
                trap.D4 = D4, trap.d = sc["d_m"], trap.omega_z = sc["omega_z_rad_s"];
                const double vr = codata2010.hbar * sc["k_eff_per_m"].get<double>() / trap.mass;
                const auto r = closure_gap_and_temperature(trap, vr, v0, sc["T_s"], phi0);
                json res = {{"gap_m", r.gap}, {"v_r_m_s", vr}};
                res["Te_limit_K"] = r.Te_limit ? json(*r.Te_limit) : json("unbounded");
                emit(g, "penning_gap", make_report("penning gap", {{"D4", D4}, {"v0", v0}, {"phi0", phi0}}, res));
                return 0;
            };
        });

        auto* dbl = penning->add_subcommand("double", "Double-diffraction phase, exact and expanded");
        dbl->add_option("--delta-z", dz, "Axial-frequency offset [rad/s]");
        dbl->callback([&] {
            action = [&] {
                const json sc = scenario(g, "electron");
                const double wr = sc["omega_r_rad_s"], T = sc["T_s"];
                emit(g, "penning_double",
                     make_report("penning double", {{"delta_z", dz}},
                                 {{"exact_rad", double_diffraction_phase(wr, T, dz)},
                                  {"expansion_rad", double_diffraction_expansion(wr, T, dz)},
                                  {"Phi0_rad", phi0_reference(wr, T)}}));
                return 0;
            };
        });

        auto* pb = penning->add_subcommand("budget", "Derived quantities for the electron design parameters");
        pb->callback([&] {
            action = [&] {
                const json sc = scenario(g, "electron");
                const double wr = sc["omega_r_rad_s"], T = sc["T_s"], k = sc["k_eff_per_m"];
                TrapConfig trap;
                trap.omega_z = sc["omega_z_rad_s"], trap.d = sc["d_m"], trap.gamma = sc["gamma_rad_s"];
                trap.D4 = sc["D4_assumed"];
                const double m = trap.mass;
                const double vr = codata2010.hbar * k / m;
                const auto gap = closure_gap_and_temperature(trap, vr, 0.0, T, 0.0);
                const double phi0 = phi0_reference(wr, T);
                json res = {{"Phi0_rad", phi0},
                            {"T_check_s", pi / (2.0 * trap.omega_z)},
                            {"recoil_temperature_K", m * vr * vr / codata2010.kB},
                            {"anharmonic_ratio_D4", anharmonic_shift(trap, wr, T, k, 0.0, 0.0) / phi0},
                            {"coherence_time_s", trap.omega_z / (wr * trap.gamma)}};
                res["Te_limit_K"] = gap.Te_limit ? json(*gap.Te_limit) : json("unbounded");
                emit(g, "penning_budget", make_report("penning budget", sc, res));
                return 0;
            };
        });

        static double lambda = 1064e-9, intensity = 1.0;
        auto* rabi = penning->add_subcommand("rabi", "Two-photon Rabi frequency of a free charge");
        rabi->add_option("--lambda", lambda, "Laser wavelength [m]")->check(CLI::PositiveNumber);
        rabi->add_option("--intensity", intensity, "Intensity [W/m^2]")->check(CLI::PositiveNumber);
        rabi->callback([&] {
            action = [&] {
                const auto r = charged_rabi(codata2010.e, intensity, 2 * pi * codata2010.c / lambda,
                                            codata2010.Ar_e * codata2010.amu);
                emit(g, "penning_rabi",
                     make_report("penning rabi", {{"lambda", lambda}, {"intensity", intensity}},
                                 {{"omega_rad_s", r.omega}, {"ratio_to_hydrogen", r.ratio_to_hydrogen},
                                  {"ratio_closed_form", r.ratio_closed_form}}));
                return 0;
            };
        });
    }

    // ---------------- noise
    auto* noise = app.add_subcommand("noise", "Vibration noise integrals");
    noise->require_subcommand(1);
    {
        static std::string model = "low", scen = "present";
        static double fmin = 0.01, fmax = 1000.0, target = 0.0;
        static std::string write;
        auto* integ = noise->add_subcommand("integrate", "rms phase noise for a model and scenario timings");
        integ->add_option("--model", model, "high | low | very-low | path to model JSON");
        integ->add_option("--scenario", scen, "present | future");
        integ->add_option("--fmin", fmin);
        integ->add_option("--fmax", fmax);
        integ->callback([&] {
            action = [&] {
                const json sc = scenario(g, scen);
                const auto m = load_noise(g, model);
                const double phi = vibration_phase_noise(m, sc["t0_s"], sc["t1_s"], scenario_keff(sc), fmin, fmax);
                emit(g, "noise_integrate",
                     make_report("noise integrate", {{"model", m.to_json()}, {"scenario", scen}, {"fmin", fmin}, {"fmax", fmax}},
                                 {{"rms_phase_rad", phi}}));
                return 0;
            };
        });

        auto* cal = noise->add_subcommand("calibrate", "Rescale a model so it reproduces a target rms phase");
        cal->add_option("--model", model, "high | low | very-low | path to model JSON");
        cal->add_option("--scenario", scen, "present | future");
        cal->add_option("--target", target, "Target rms phase [rad]")->required()->check(CLI::PositiveNumber);
        cal->add_option("--write", write, "Write the calibrated model to this path");
        cal->add_option("--fmin", fmin);
        cal->add_option("--fmax", fmax);
        cal->callback([&] {
            action = [&] {
                const json sc = scenario(g, scen);
                const auto m = load_noise(g, model);
                const double phi = vibration_phase_noise(m, sc["t0_s"], sc["t1_s"], scenario_keff(sc), fmin, fmax);
                if (!(phi > 0.0)) throw ValidationError("model gives zero noise; cannot calibrate");
                const double factor = target / phi;
                NoiseModel cm = m.scaled(factor);
                json out = cm.to_json();
                out["schema_version"] = schema_version;
                out["calibration"] = {{"scenario", scen}, {"target_rad", target}, {"fmin", fmin}, {"fmax", fmax}};
                if (!write.empty()) write_text(write, out.dump(2) + "\n");
                emit(g, "noise_calibrate",
                     make_report("noise calibrate", {{"model", m.to_json()}, {"scenario", scen}, {"target", target}},
                                 {{"scale_factor", factor}, {"model", out}}));
                return 0;
            };
        });
    }

    // ---------------- allan
    auto* allan = app.add_subcommand("allan", "Allan deviation of a CSV time series (columns t, value)");
    {
        static std::string input, column = "value", plot;
        static std::vector<double> taus;
        allan->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
        allan->add_option("--column", column, "Value column");
        allan->add_option("--tau", taus, "Averaging times [s] (default: octave spacing)");
        allan->add_option("--plot", plot, "Write an SVG plot to this file name");
        allan->callback([&] {
            action = [&] {
                const std::string text = read_text(input);
                const auto t = parse_csv(text);
                const auto tt = t.numeric("t");
                const auto y = t.numeric(column);
                if (tt.size() < 3) throw ValidationError("series too short");
                const double tau0 = tt[1] - tt[0];
                for (std::size_t i = 1; i < tt.size(); ++i)
                    if (std::abs(tt[i] - tt[i - 1] - tau0) > 1e-6 * tau0) throw ValidationError("series not uniformly sampled");
                std::vector<double> ts = taus;
                if (ts.empty())
                    for (double m = 1; y.size() / std::size_t(m) >= 3; m *= 2) ts.push_back(m * tau0);
                const auto pts = allan_deviation(y, tau0, ts);
                CsvTable out;
                out.header = {"tau", "rav"};
                PlotSeries s{"RAV", {}, {}};
                PlotSeries guide{"1e-8 (tau/1000 s)^-1/2", {}, {}, false, true, "#b03030"};
                for (auto& p : pts) {
                    out.rows.push_back({fmt(p.tau), fmt(p.rav)});
                    s.x.push_back(p.tau), s.y.push_back(p.rav);
                    guide.x.push_back(p.tau), guide.y.push_back(1e-8 / std::sqrt(p.tau / 1000.0));
                }
                emit_text(g, "allan.csv", to_csv(out));
                if (!plot.empty()) {
                    PlotStyle st{"Root Allan variance", "tau [s]", "RAV", true, true};
                    write_text(output_dir(g.out_dir) / plot, emit_plot({s, guide}, st));
                }
                return 0;
            };
        });
    }

    // ---------------- budget
    auto* budget = app.add_subcommand("budget", "Combine an error budget");
    {
        static std::string file = "present";
        budget->add_option("--file", file, "present | future | compton-clock | path to budget JSON");
        budget->callback([&] {
            action = [&] {
                std::string path = file;
                if (file == "present" || file == "future") path = g.data_dir + "/budget_" + file + ".json";
                if (file == "compton-clock") path = g.data_dir + "/budget_compton_clock.json";
                const json j = load_json_file(path);
                const auto b = ErrorBudget::from_json(j);
                const auto t = budget_combine(b);
                emit(g, "budget",
                     make_report("budget", j, {{"name", b.name}, {"total_offset", t.offset},
                                               {"total_uncertainty", t.uncertainty}, {"units", t.units}}));
                return 0;
            };
        });
    }

    // ---------------- sme
    auto* sme = app.add_subcommand("sme", "Lorentz-violation and EEP fits");
    sme->require_subcommand(1);
    {
        static std::string input;
        static double chi = pi / 2, i4 = -0.5, lphi = 0.0;
        auto* iso = sme->add_subcommand("fit-isotropy", "Fit the seven sigma combinations to a CSV (t, value, sigma)");
        iso->add_option("--input", input)->required()->check(CLI::ExistingFile);
        iso->add_option("--chi", chi, "Colatitude [rad]");
        iso->add_option("--phi", lphi, "Longitude phase at t = 0 [rad]");
        iso->add_option("--i4", i4);
        iso->callback([&] {
            action = [&] {
                const auto t = parse_csv(read_text(input));
                const auto tt = t.numeric("t"), v = t.numeric("value"), s = t.numeric("sigma");
                std::vector<Sample> data;
                for (std::size_t i = 0; i < tt.size(); ++i) data.push_back({tt[i], v[i], s[i]});
                LabFrame f;
                f.colatitude_chi = chi, f.i4 = i4, f.phi = lphi;
                const auto r = fit_isotropy(data, f);
                json est = json::object(), err = json::object();
                for (int i = 0; i < kSigmaCount; ++i) {
                    est[sigma_name(i)] = r.estimates(i);
                    err[sigma_name(i)] = std::sqrt(r.covariance(i, i));
                }
                std::vector<std::vector<double>> corr;
                const auto C = r.correlation();
                for (int i = 0; i < kSigmaCount; ++i) {
                    corr.emplace_back();
                    for (int j = 0; j < kSigmaCount; ++j) corr.back().push_back(C(i, j));
                }
                emit(g, "sme_fit_isotropy",
                     make_report("sme fit-isotropy", {{"input_digest", digest(read_text(input))}, {"chi", chi}, {"i4", i4}},
                                 {{"estimates", est}, {"sigma", err}, {"correlation", corr}, {"condition", r.condition}}));
                return 0;
            };
        });

        static std::string cfile;
        auto* glob = sme->add_subcommand("fit-global", "Generalized least squares over EEP constraints");
        glob->add_option("--constraints", cfile, "Constraint JSON (default: shipped reference limits)");
        glob->callback([&] {
            action = [&] {
                const json j = load_json_file(cfile.empty() ? g.data_dir + "/eep_limits_reference.json" : cfile);
                std::vector<ExperimentConstraint> cs;
                for (const auto& c : j.at("constraints")) {
                    const auto row = c.at("row").get<std::vector<double>>();
                    ExperimentConstraint e;
                    e.label = c.value("label", "");
                    e.row = Eigen::Map<const Eigen::VectorXd>(row.data(), Eigen::Index(row.size()));
                    e.value = c.at("value");
                    e.sigma = c.at("sigma");
                    e.citation = c.value("citation", "");
                    cs.push_back(e);
                }
                try {
                    const auto r = global_fit(cs);
                    std::vector<double> est, sig;
                    for (Eigen::Index i = 0; i < r.fit.estimates.size(); ++i)
                        est.push_back(r.fit.estimates(i)), sig.push_back(std::sqrt(r.fit.covariance(i, i)));
                    emit(g, "sme_fit_global",
                         make_report("sme fit-global", j,
                                     {{"estimates", est}, {"sigma", sig}, {"condition", r.fit.condition},
                                      {"best_single_sigma_min", r.best_single_sigma.minCoeff()}}));
                } catch (const RankDeficient& e) {
                    std::vector<std::vector<double>> ns;
                    for (Eigen::Index c = 0; c < e.null_space.cols(); ++c) {
                        ns.emplace_back();
                        for (Eigen::Index i = 0; i < e.null_space.rows(); ++i) ns.back().push_back(e.null_space(i, c));
                    }
                    std::cerr << "error: " << e.what() << "\n" << json{{"null_space", ns}}.dump() << "\n";
                    return 1;
                }
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "\n" << app.help();
        return 2;
    }
    try {
        return action ? action() : 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
