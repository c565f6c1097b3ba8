#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mw/constants.hpp"

namespace mw {

struct PerturbationInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrapConfig {
    double omega_z = 2 * pi * 10e3;  // rad/s
    double d = 0.1;                  // m
    double D3 = 0.0, D4 = 0.0;
    double gamma = 0.0;   // rad/s
    double R_loss = 0.0;  // ohm, informational
    double mass = codata2010.Ar_e * codata2010.amu;

    /// true when |D3| or |D4| leaves the perturbative regime
    bool strongly_anharmonic() const { return std::abs(D3) > 1e-2 || std::abs(D4) > 1e-2; }
    void validate() const {
        if (!(omega_z > 0.0)) throw std::invalid_argument("trap: omega_z must be positive");
        if (gamma < 0.0) throw std::invalid_argument("trap: gamma must be >= 0");
    }
};

struct ElectronState {
    double A0 = 0.0;  // m
    double phi0 = 0.0;

    static ElectronState from_k0(double k0, const TrapConfig& trap) {
        return {codata2010.hbar * k0 / (trap.mass * trap.omega_z), 0.0};
    }
};

struct ZPoint {
    double z, zdot;
};

/// Arms 1 and 3 carry recoil +k / -k, arm 2 is unkicked. Valid on [0, 3T].
inline ZPoint trajectories(const ElectronState& s, const TrapConfig& trap, double k, double T, int arm, double t) {
    if (arm < 1 || arm > 3) throw std::invalid_argument("trajectories: arm must be 1, 2 or 3");
    const double w = trap.omega_z;
    const double A = codata2010.hbar * k / (trap.mass * w);
    ZPoint p{s.A0 * std::sin(w * t + s.phi0), s.A0 * w * std::cos(w * t + s.phi0)};
    if (arm == 2) return p;
    const double sg = arm == 1 ? 1.0 : -1.0;
    double z = std::sin(w * t), v = w * std::cos(w * t);
    if (t > T) {
        z -= std::sin(w * (t - T));
        v -= w * std::cos(w * (t - T));
    }
    if (t > 2 * T) {
        z += std::sin(w * (t - 2 * T));
        v += w * std::cos(w * (t - 2 * T));
    }
    p.z += sg * A * z;
    p.zdot += sg * A * v;
    return p;
}

/// Single interferometer, expansion to first order in delta_z; sign fixed so that
/// k0 = 0, delta_z = 0 gives -(4/pi) omega_r T.
inline double single_phase(double omega_r, double T, double k0_over_k, double phi0, double delta_z) {
    if (std::abs(delta_z * T) > 0.1) throw PerturbationInvalid("single_phase: |delta_z T| > 0.1");
    const double c = std::cos(phi0), s = std::sin(phi0);
    const double lead = 4.0 / pi * omega_r * T * (1.0 - k0_over_k * (c - s));
    const double lin = 4.0 / (pi * pi) * omega_r * delta_z * T * T *
                       (2.0 * (pi - 1.0) + k0_over_k * (2.0 * (pi + 1.0) * c + (pi - 2.0) * s));
    return -(lead - lin);
}

/// Single-interferometer phase straight from the trajectories: action difference of arms
/// (recoil sign `recoil` = +1 or -1) and 2, plus the laser phase k z at the four pulses.
/// omega_z = pi/(2T) + delta_z.
inline double single_phase_exact(double omega_r, double T, double k0_over_k, double phi0, double delta_z,
                                 int recoil = 1) {
    if (!(omega_r > 0.0) || !(T > 0.0)) throw std::invalid_argument("single_phase_exact: omega_r, T > 0");
    if (recoil != 1 && recoil != -1) throw std::invalid_argument("single_phase_exact: recoil must be +1 or -1");
    // units with hbar = m = 1: omega_r = k^2 / 2
    const double w = pi / (2.0 * T) + delta_z;
    const double k = recoil * std::sqrt(2.0 * omega_r);
    const double A = k / w, A0 = k0_over_k * std::abs(k) / w;
    auto z = [&](double t) {
        double r = A0 * std::sin(w * t + phi0) + A * std::sin(w * t);
        if (t > T) r -= A * std::sin(w * (t - T));
        if (t > 2 * T) r += A * std::sin(w * (t - 2 * T));
        return r;
    };
    auto v = [&](double t) {
        double r = A0 * w * std::cos(w * t + phi0) + A * w * std::cos(w * t);
        if (t > T) r -= A * w * std::cos(w * (t - T));
        if (t > 2 * T) r += A * w * std::cos(w * (t - 2 * T));
        return r;
    };
    auto dL = [&](double t) {
        const double z2 = A0 * std::sin(w * t + phi0), v2 = A0 * w * std::cos(w * t + phi0);
        const double z1 = z(t), v1 = v(t);
        return 0.5 * (v1 * v1 - v2 * v2) - 0.5 * w * w * (z1 * z1 - z2 * z2);
    };
    double F = 0.0;
    for (int i = 0; i < 3; ++i)
        F += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dL, i * T, (i + 1) * T, 0, 0.0);
    // arm 1 absorbs at 0 and 2T, emits at T and 3T; evaluate after the kick at T
    const double I = k * (z(0.0) - z(std::nextafter(T, 2 * T)) + z(2 * T) - z(3 * T));
    return F + I;
}

/// Exact closed form of the summed double-diffraction phase, omega_z = pi/(2T) + delta_z.
inline double double_diffraction_phase(double omega_r, double T, double delta_z) {
    const double wz = pi / (2.0 * T) + delta_z;
    const double x = wz * T;
    return 2.0 * omega_r / wz * std::sin(0.5 * x) *
           (3.0 * std::cos(0.5 * x) - std::cos(1.5 * x) + 2.0 * std::cos(3.5 * x) - std::cos(4.5 * x) +
            std::cos(5.5 * x));
}

/// Second-order expansion of double_diffraction_phase in delta_z.
inline double double_diffraction_expansion(double omega_r, double T, double delta_z) {
    return 8.0 / pi * omega_r * T + 16.0 / (pi * pi) * (pi - 1.0) * omega_r * T * T * delta_z +
           4.0 / (pi * pi * pi) * omega_r * T * T * T * delta_z * delta_z * (8.0 - 8.0 * pi + 7.0 * pi * pi);
}

/// Anharmonic shift of the double-diffraction phase; one trap length d throughout.
inline double anharmonic_shift(const TrapConfig& trap, double omega_r, double T, double k, double k0, double phi0) {
    if (trap.strongly_anharmonic()) throw PerturbationInvalid("anharmonic_shift: |D3| or |D4| above 1e-2");
    const double d = trap.d;
    const double q = k0 / k;
    const double pre = 8.0 * omega_r * omega_r * T * T / (k * k * pi * pi * pi * d * d);
    const double t3 = 4.0 * trap.D3 * k0 * pi * d * (std::cos(phi0) - std::sin(phi0));
    const double t4 = trap.D4 * omega_r * T *
                      (9.0 * pi - 16.0 + 24.0 * q * q * (pi - 1.0) + 6.0 * q * q * pi * std::sin(2.0 * phi0));
    return pre * (t3 + t4);
}

inline double phi0_reference(double omega_r, double T) { return 8.0 / pi * omega_r * T; }

struct ClosureGap {
    double gap = 0.0;                     // m
    std::optional<double> Te_limit;       // K; empty means no constraint (D4 = 0)
};

/// Gap between arms 1 and 2 at 3T to first order in v0, and the temperature at which it
/// equals the thermal de Broglie wavelength.
inline ClosureGap closure_gap_and_temperature(const TrapConfig& trap, double v_r, double v0, double T, double phi0) {
    const auto& K = codata2010;
    ClosureGap r;
    const double d2 = trap.d * trap.d;
    r.gap = 32.0 * std::sqrt(2.0) * trap.D4 * v_r * v_r * v0 * T * T * T / (d2 * pi * pi * pi) *
            std::sin(phi0 - pi / 4.0);
    if (trap.D4 != 0.0)
        r.Te_limit = K.h * d2 * std::pow(pi, 2.5) / (64.0 * std::abs(trap.D4) * v_r * v_r * T * T * T * K.kB);
    return r;
}

struct DampingOptimum {
    double T_opt, omega_z_opt, Phi_opt;
};

/// 4T = tau = omega_z/(omega_r gamma) together with omega_z T = pi/2.
inline DampingOptimum damping_optimum(double omega_r, double gamma) {
    if (!(gamma > 0.0) || !(omega_r > 0.0)) throw std::invalid_argument("damping_optimum: rates must be positive");
    DampingOptimum o;
    o.T_opt = std::sqrt(pi / (8.0 * omega_r * gamma));
    o.omega_z_opt = pi / (2.0 * o.T_opt);
    o.Phi_opt = phi0_reference(omega_r, o.T_opt);
    return o;
}

struct ChargedRabi {
    double omega;              // rad/s
    double ratio_to_hydrogen;  // from the polarizability form
    double ratio_closed_form;  // (256/81) lambda^2 / lambda0^2
};

inline double lyman_alpha_wavelength() { return 4.0 / (3.0 * codata2010.Rinf); }

/// Omega = q^2 I / (hbar eps0 c omega_L^2 m); hydrogen Omega = alpha_H I / (2 eps0 hbar c).
inline ChargedRabi charged_rabi(double q, double I, double omega_L, double m) {
    if (!(I > 0.0) || !(omega_L > 0.0) || !(m > 0.0)) throw std::invalid_argument("charged_rabi: inputs must be positive");
    const auto& K = codata2010;
    ChargedRabi r;
    r.omega = q * q * I / (K.hbar * K.eps0 * K.c * omega_L * omega_L * m);
    const double omega_H = hydrogen_polarizability() * I / (2.0 * K.eps0 * K.hbar * K.c);
    r.ratio_to_hydrogen = r.omega / omega_H;
    const double lambda = 2.0 * pi * K.c / omega_L;
    const double l0 = lyman_alpha_wavelength();
    r.ratio_closed_form = 256.0 / 81.0 * lambda * lambda / (l0 * l0);
    return r;
}

}  // namespace mw
