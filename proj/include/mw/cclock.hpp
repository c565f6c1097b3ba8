#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/rational.hpp>

#include "mw/constants.hpp"

namespace mw {

using Rational = boost::rational<std::int64_t>;

struct ClockConfig {
    int bragg_order_n = 1;
    Rational divisor_N{1, 2};
    double omega_C = 1.0;  // rad/s
    double T = 0.0;        // s

    void validate() const {
        if (bragg_order_n < 1) throw std::invalid_argument("clock: n must be >= 1");
        if (divisor_N <= 0) throw std::invalid_argument("clock: N must be positive");
    }
};

struct BeamsplitterFrame {
    double beta, gamma, beta_prime, gamma_prime, omega_plus, omega_minus;
};

struct ClockSolution {
    double beta, beta_prime, gamma, gamma_prime;
    double omega_L, omega_plus, omega_minus, omega_m;
    double phi_F, phi_I;
    // exact ratios omega_C : omega_L : omega_m = 2nN^2 : N : 1
    Rational ratio_C_over_m, ratio_L_over_m;
};

/// beta gamma = n omega_L / omega_C, i.e. beta = x / sqrt(1 + x^2).
inline BeamsplitterFrame beamsplitter_frame(int n, double omega_L, double omega_C) {
    if (n < 1 || !(omega_L > 0.0) || !(omega_C > 0.0)) throw std::invalid_argument("beamsplitter_frame: bad input");
    const double x = n * omega_L / omega_C;
    BeamsplitterFrame f;
    f.beta = x / std::sqrt(1.0 + x * x);
    f.gamma = std::sqrt(1.0 + x * x);
    const double b2 = f.beta * f.beta;
    f.beta_prime = 2.0 * f.beta / (1.0 + b2);
    f.gamma_prime = (1.0 + b2) / (1.0 - b2);
    f.omega_plus = omega_L * std::sqrt((1.0 + f.beta) / (1.0 - f.beta));
    f.omega_minus = omega_L * std::sqrt((1.0 - f.beta) / (1.0 + f.beta));
    return f;
}

inline double as_double(const Rational& r) { return double(r.numerator()) / double(r.denominator()); }

inline ClockSolution solve_lock(const ClockConfig& cfg) {
    cfg.validate();
    const Rational N = cfg.divisor_N;
    const std::int64_t n = cfg.bragg_order_n;
    ClockSolution s;
    s.ratio_C_over_m = Rational(2 * n) * N * N;
    // omega_L = N omega_m together with beta gamma = 1/(2N) = n omega_L / omega_C
    s.ratio_L_over_m = N;
    const double Nd = as_double(N);
    s.beta = 1.0 / std::sqrt(1.0 + 4.0 * Nd * Nd);
    const double b2 = s.beta * s.beta;
    s.gamma = 1.0 / std::sqrt(1.0 - b2);
    s.beta_prime = 2.0 * s.beta / (1.0 + b2);
    s.gamma_prime = (1.0 + b2) / (1.0 - b2);
    s.omega_m = cfg.omega_C / as_double(s.ratio_C_over_m);
    s.omega_L = s.omega_m * as_double(s.ratio_L_over_m);
    s.omega_plus = s.omega_L * std::sqrt((1.0 + s.beta) / (1.0 - s.beta));
    s.omega_minus = s.omega_L * std::sqrt((1.0 - s.beta) / (1.0 + s.beta));
    s.phi_F = -4.0 * cfg.omega_C * cfg.T * b2 / (1.0 + b2);
    s.phi_I = -s.phi_F;
    return s;
}

struct ClockPhases {
    double phi_F, phi_I;
};

/// phi_F = 2 omega_C T (1/gamma' - 1); phi_I from the locked laser frequencies.
inline ClockPhases clock_phases(const ClockConfig& cfg) {
    const ClockSolution s = solve_lock(cfg);
    const double b2 = s.beta * s.beta;
    // 1/gamma' - 1 = -2 beta^2 / (1 + beta^2), free of cancellation at small beta
    const double phiF = 2.0 * cfg.omega_C * cfg.T * (-2.0 * b2 / (1.0 + b2));
    const double phiI = 4.0 * cfg.omega_C * cfg.T * b2 / (1.0 + b2);
    return {phiF, phiI};
}

/// alpha^2 = (2 R_inf c / nu_C) A_r(atom) / A_r(e), nu_C in Hz.
inline double alpha_from_compton(double nu_C, double Rinf, double Ar_atom, double Ar_e) {
    if (!(nu_C > 0.0) || !(Rinf > 0.0) || !(Ar_atom > 0.0) || !(Ar_e > 0.0))
        throw std::invalid_argument("alpha_from_compton: inputs must be positive");
    return std::sqrt(2.0 * Rinf * codata2010.c / nu_C * Ar_atom / Ar_e);
}

/// Inverse of alpha_from_compton.
inline double compton_from_alpha(double alpha, double Rinf, double Ar_atom, double Ar_e) {
    return 2.0 * Rinf * codata2010.c / (alpha * alpha) * Ar_atom / Ar_e;
}

/// m = h nu_C / c^2
inline double mass_from_compton(double nu_C) {
    if (!(nu_C > 0.0)) throw std::invalid_argument("mass_from_compton: nu_C must be positive");
    return codata2010.h * nu_C / (codata2010.c * codata2010.c);
}

/// Measured Cs Compton frequency with the exponent read as 1e25.
inline constexpr double nu_C_Cs133_measured = 2.993486252e25;      // Hz
inline constexpr double nu_C_Cs133_measured_sigma = 0.000000012e25;  // Hz

/// Frequency-chain bookkeeping for a conventional Cs clock and a Compton clock.
struct FrequencyChain {
    double nu_ref = 10e6;
    double eta1 = 18, eta2 = 51, eta3 = 1.263177;
    double comb_harmonic = 1758678, comb_step = 20;  // N_c = step * harmonic + offsets
    double offsets[3] = {2, 3, 29.165};
    double dds_numerator = 2326621801616.0;
    int dds_bits = 48;
    int bragg_n = 5;

    double nu_hfs() const { return nu_ref * (eta1 * eta2 + eta3); }
    double N_c() const { return comb_step * comb_harmonic + offsets[0] + offsets[1] + offsets[2]; }
    double N_dds() const { return dds_numerator / std::ldexp(1.0, dds_bits); }
    double nu_L() const { return nu_ref * N_c(); }
    double nu_m() const { return 2.0 * nu_ref * N_dds(); }
    /// closed loop: nu_C = 4 n nu_ref N_c^2 / N_DDS
    double nu_C() const { return 4.0 * bragg_n * nu_ref * N_c() * N_c() / N_dds(); }
    /// reference frequency delivered for a given nu_C
    double nu_ref_from(double nu0) const { return nu0 / (4.0 * bragg_n * N_c() * N_c() / N_dds()); }
};

}  // namespace mw
