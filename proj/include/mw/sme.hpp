#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mw/constants.hpp"

namespace mw {

struct SymmetryViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Carries the null-space basis of the rejected design.
struct RankDeficient : std::runtime_error {
    Eigen::MatrixXd null_space;
    RankDeficient(const std::string& what, Eigen::MatrixXd ns) : std::runtime_error(what), null_space(std::move(ns)) {}
};

inline double levi_civita(int i, int j, int k) {
    return 0.5 * double((i - j) * (j - k) * (k - i));  // for i, j, k in {0, 1, 2}
}

/// (k_F)^{kappa lambda mu nu}, contravariant, indices 0..3.
struct KFTensor {
    std::array<double, 256> v{};

    double& operator()(int a, int b, int c, int d) { return v[((a * 4 + b) * 4 + c) * 4 + d]; }
    double operator()(int a, int b, int c, int d) const { return v[((a * 4 + b) * 4 + c) * 4 + d]; }

    /// Largest violation of the Riemann-like symmetries and the double-trace condition.
    double symmetry_residual() const {
        double r = 0.0;
        const double eta[4] = {-1, 1, 1, 1};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) {
                        const double x = (*this)(a, b, c, d);
                        r = std::max(r, std::abs(x + (*this)(b, a, c, d)));
                        r = std::max(r, std::abs(x + (*this)(a, b, d, c)));
                        r = std::max(r, std::abs(x - (*this)(c, d, a, b)));
                        r = std::max(r, std::abs(x + (*this)(a, c, d, b) + (*this)(a, d, b, c)));
                    }
        double tr = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) tr += eta[a] * eta[b] * (*this)(a, b, a, b);
        return std::max(r, std::abs(tr));
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

struct KappaBlocks {
    Eigen::Matrix3d DE = Eigen::Matrix3d::Zero(), HB = Eigen::Matrix3d::Zero(), DB = Eigen::Matrix3d::Zero(),
                    HE = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d e_plus = Eigen::Matrix3d::Zero(), e_minus = Eigen::Matrix3d::Zero(),
                    o_plus = Eigen::Matrix3d::Zero(), o_minus = Eigen::Matrix3d::Zero();
    double tr = 0.0;
};

inline KappaBlocks kappa_combinations(const KFTensor& kF, double tol = 1e-12) {
    if (kF.symmetry_residual() > tol * std::max(1.0, kF.max_abs()))
        throw SymmetryViolation("kappa_combinations: k_F lacks the required symmetries");
    KappaBlocks k;
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
            k.DE(j, l) = -2.0 * kF(0, j + 1, 0, l + 1);
            double hb = 0.0, db = 0.0;
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) {
                    db += kF(0, j + 1, p + 1, q + 1) * levi_civita(l, p, q);
                    for (int r = 0; r < 3; ++r)
                        for (int s = 0; s < 3; ++s) {
                            const double e = levi_civita(j, p, q) * levi_civita(l, r, s);
                            if (e != 0.0) hb += 0.5 * e * kF(p + 1, q + 1, r + 1, s + 1);
                        }
                }
            k.HB(j, l) = hb;
            k.DB(j, l) = db;
        }
    k.HE = -k.DB.transpose();
    k.tr = k.DE.trace() / 3.0;
    k.e_plus = 0.5 * (k.DE + k.HB);
    k.e_minus = 0.5 * (k.DE - k.HB) - k.tr * Eigen::Matrix3d::Identity();
    k.o_plus = 0.5 * (k.DB + k.HE);
    k.o_minus = 0.5 * (k.DB - k.HE);
    return k;
}

/// Builds k_F from the tilde blocks. e_plus, e_minus, o_minus symmetric traceless; o_plus antisymmetric.
inline KFTensor kF_from_kappas(const Eigen::Matrix3d& e_plus, const Eigen::Matrix3d& e_minus,
                               const Eigen::Matrix3d& o_plus, const Eigen::Matrix3d& o_minus, double tr) {
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d DE = e_plus + e_minus + tr * I;
    const Eigen::Matrix3d HB = e_plus - e_minus - tr * I;
    const Eigen::Matrix3d DB = o_plus + o_minus;
    KFTensor kF;
    auto set4 = [&](int a, int b, int c, int d, double x) {
        kF(a, b, c, d) = x;
        kF(b, a, c, d) = -x;
        kF(a, b, d, c) = -x;
        kF(b, a, d, c) = x;
    };
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) set4(0, j + 1, 0, l + 1, -0.5 * DE(j, l));
    for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                double x = 0.0;
                for (int l = 0; l < 3; ++l) x += 0.5 * levi_civita(l, p, q) * DB(j, l);
                set4(0, j + 1, p + 1, q + 1, x);
                set4(p + 1, q + 1, 0, j + 1, x);
            }
    for (int p = 0; p < 3; ++p)
        for (int q = p + 1; q < 3; ++q)
            for (int r = 0; r < 3; ++r)
                for (int s = r + 1; s < 3; ++s) {
                    double x = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int l = 0; l < 3; ++l) x += 0.5 * levi_civita(j, p, q) * levi_civita(l, r, s) * HB(j, l);
                    set4(p + 1, q + 1, r + 1, s + 1, x);
                }
    return kF;
}

struct PhotonDispersion {
    double rho, sigma, k0_plus, k0_minus;  // k0 per unit |k|
};

inline PhotonDispersion photon_dispersion(const KFTensor& kF, const Eigen::Vector3d& direction) {
    if (std::abs(direction.norm() - 1.0) > 1e-12) throw std::invalid_argument("photon_dispersion: direction must be unit");
    const double eta[4] = {-1, 1, 1, 1};
    const double p_lo[4] = {-1.0, direction(0), direction(1), direction(2)};
    Eigen::Matrix4d kt = Eigen::Matrix4d::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) kt(a, b) += kF(a, m, b, n) * p_lo[m] * p_lo[n];
    double trace = 0.0, sq = 0.0;
    for (int a = 0; a < 4; ++a) {
        trace += eta[a] * kt(a, a);
        for (int b = 0; b < 4; ++b) sq += eta[a] * eta[b] * kt(a, b) * kt(a, b);
    }
    PhotonDispersion d;
    d.rho = -0.5 * trace;
    d.sigma = std::sqrt(std::max(0.0, 0.5 * sq - d.rho * d.rho));
    d.k0_plus = 1.0 + d.rho + d.sigma;
    d.k0_minus = 1.0 + d.rho - d.sigma;
    return d;
}

/// Gravity-sector s-bar (index 0 = T, 1..3 = X, Y, Z) plus the photon tilde blocks.
struct SMECoefficients {
    Eigen::Matrix4d s_bar = Eigen::Matrix4d::Zero();
    KappaBlocks kappa;

    SMECoefficients operator+(const SMECoefficients& o) const {
        SMECoefficients r = *this;
        r.s_bar += o.s_bar;
        r.kappa.e_minus += o.kappa.e_minus;
        r.kappa.o_plus += o.kappa.o_plus;
        r.kappa.e_plus += o.kappa.e_plus;
        r.kappa.o_minus += o.kappa.o_minus;
        r.kappa.tr += o.kappa.tr;
        return r;
    }
    SMECoefficients operator*(double a) const {
        SMECoefficients r = *this;
        r.s_bar *= a;
        r.kappa.e_minus *= a;
        r.kappa.o_plus *= a;
        r.kappa.e_plus *= a;
        r.kappa.o_minus *= a;
        r.kappa.tr *= a;
        return r;
    }
};

inline constexpr double sidereal_day = 86164.0905;         // s
inline constexpr double sidereal_year = 365.25636 * 86400;  // s

struct LabFrame {
    double colatitude_chi = 0.0;
    double phi = 0.0;  // longitude phase at t = 0
    double eta = 23.44 * pi / 180.0;
    double V_earth = 9.93e-5;
    double i4 = -0.5;
    double omega_earth = 2.0 * pi / sidereal_day;
    double Omega = 2.0 * pi / sidereal_year;

    void validate() const {
        if (colatitude_chi < 0.0 || colatitude_chi > pi) throw std::invalid_argument("LabFrame: chi outside [0, pi]");
    }
};

/// The seven fitted combinations, in units of sigma (u = i4 sigma enters the signal).
enum SigmaIndex { sTX = 0, sTY, sTZ, sXXmYY, sXY, sXZ, sYZ, kSigmaCount };
inline const char* sigma_name(int i) {
    static const char* n[] = {"TX", "TY", "TZ", "XX-YY", "XY", "XZ", "YZ"};
    return n[i];
}

/// i4 sigma^{JK} = i4 s^{JK} - ke-^{JK}, i4 sigma^{TJ} = i4 s^{TJ} + (1/2) eps_{JKL} ko+^{KL}.
inline Eigen::Matrix<double, 7, 1> i4_sigma(const SMECoefficients& c, double i4) {
    const auto& s = c.s_bar;
    const auto& em = c.kappa.e_minus;
    const auto& op = c.kappa.o_plus;
    Eigen::Matrix<double, 7, 1> u;
    u(sTX) = i4 * s(0, 1) + op(1, 2);
    u(sTY) = i4 * s(0, 2) - op(0, 2);
    u(sTZ) = i4 * s(0, 3) + op(0, 1);
    u(sXXmYY) = i4 * (s(1, 1) - s(2, 2)) - (em(0, 0) - em(1, 1));
    u(sXY) = i4 * s(1, 2) - em(0, 1);
    u(sXZ) = i4 * s(1, 3) - em(0, 2);
    u(sYZ) = i4 * s(2, 3) - em(1, 2);
    return u;
}

struct SignalRow {
    std::string name;
    int harmonic;     // 1 or 2 in omega_earth
    int orbit_sign;   // -1, 0, +1 in Omega
    bool sine;        // D (sine) vs C (cosine) quadrature
    Eigen::Matrix<double, 7, 1> weights;  // amplitude = weights . u
};

/// The twelve amplitude rows as linear maps of u = i4 sigma.
inline std::vector<SignalRow> signal_rows(const LabFrame& f) {
    const double s2 = std::sin(f.colatitude_chi) * std::sin(f.colatitude_chi);
    const double sin2chi = std::sin(2.0 * f.colatitude_chi);
    const double ce = std::cos(f.eta), se = std::sin(f.eta), V = f.V_earth;
    using W = Eigen::Matrix<double, 7, 1>;
    auto w = [](std::initializer_list<std::pair<int, double>> l) {
        W x = W::Zero();
        for (auto& [i, v] : l) x(i) += v;
        return x;
    };
    return {
        {"C_2w", 2, 0, false, w({{sXXmYY, 0.25 * s2}})},
        {"D_2w", 2, 0, true, w({{sXY, 0.5 * s2}})},
        {"C_w", 1, 0, false, w({{sXZ, 0.5 * sin2chi}})},
        {"D_w", 1, 0, true, w({{sYZ, 0.5 * sin2chi}})},
        {"C_2w+W", 2, 1, false, w({{sTY, -0.25 * (ce - 1.0) * V * s2}})},
        {"D_2w+W", 2, 1, true, w({{sTX, 0.25 * (ce - 1.0) * V * s2}})},
        {"C_2w-W", 2, -1, false, w({{sTY, -0.25 * (ce + 1.0) * V * s2}})},
        {"D_2w-W", 2, -1, true, w({{sTX, 0.25 * (ce + 1.0) * V * s2}})},
        {"C_w+W", 1, 1, false, w({{sTX, 0.25 * V * se * s2}})},
        {"D_w+W", 1, 1, true, w({{sTZ, 0.25 * V * s2 * (1.0 - ce)}, {sTY, -0.25 * V * s2 * se}})},
        {"C_w-W", 1, -1, false, w({{sTX, 0.25 * V * se * s2}})},
        {"D_w-W", 1, -1, true, w({{sTZ, 0.25 * V * s2 * (1.0 + ce)}, {sTY, 0.25 * V * s2 * se}})},
    };
}

inline double row_basis(const SignalRow& r, const LabFrame& f, double t) {
    const double arg = (r.harmonic * f.omega_earth + r.orbit_sign * f.Omega) * t + r.harmonic * f.phi;
    return r.sine ? std::sin(arg) : std::cos(arg);
}

/// delta phi / phi_0 at the given times.
inline std::vector<double> isotropy_signal(const SMECoefficients& c, const LabFrame& f, const std::vector<double>& times) {
    f.validate();
    const auto u = i4_sigma(c, f.i4);
    const auto rows = signal_rows(f);
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (const auto& r : rows) out[i] += r.weights.dot(u) * row_basis(r, f, times[i]);
    return out;
}

struct Sample {
    double t, value, sigma;
};

struct FitResult {
    Eigen::VectorXd estimates;
    Eigen::MatrixXd covariance;
    double condition = 0.0;

    Eigen::VectorXd sigmas() const { return covariance.diagonal().cwiseSqrt(); }
    Eigen::MatrixXd correlation() const {
        const Eigen::VectorXd s = sigmas();
        return covariance.cwiseQuotient(s * s.transpose());
    }
};

/// Weighted linear least squares on design A (rows = samples). Condition number is taken
/// after column equilibration of the whitened design.
inline FitResult weighted_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& sigma,
                                        double max_condition = 1e12) {
    if (A.rows() < A.cols()) throw std::invalid_argument("least squares: fewer rows than parameters");
    if ((sigma.array() <= 0.0).any()) throw std::invalid_argument("least squares: sigma must be positive");
    const Eigen::VectorXd w = sigma.cwiseInverse();
    Eigen::MatrixXd Aw = w.asDiagonal() * A;
    const Eigen::VectorXd yw = w.asDiagonal() * y;
    Eigen::VectorXd scale = Aw.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    const Eigen::MatrixXd As = Aw * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond <= max_condition)) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (!(sv(i) * max_condition >= sv(0))) idx.push_back(i);
        Eigen::MatrixXd ns(A.cols(), Eigen::Index(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Eigen::VectorXd v = scale.cwiseInverse().asDiagonal() * svd.matrixV().col(idx[k]);
            ns.col(Eigen::Index(k)) = v.normalized();
        }
        throw RankDeficient("least squares: design condition number exceeds limit", ns);
    }
    FitResult r;
    r.condition = cond;
    const Eigen::VectorXd inv = sv.cwiseInverse();
    const Eigen::MatrixXd Vs = scale.cwiseInverse().asDiagonal() * svd.matrixV();
    r.estimates = Vs * inv.asDiagonal() * svd.matrixU().transpose() * yw;
    r.covariance = Vs * inv.cwiseProduct(inv).asDiagonal() * Vs.transpose();
    return r;
}

/// Fits sigma (not i4 sigma) in the SigmaIndex order.
inline FitResult fit_isotropy(const std::vector<Sample>& data, const LabFrame& f) {
    f.validate();
    if (f.i4 == 0.0) throw std::invalid_argument("fit_isotropy: i4 = 0 removes the s-bar dependence");
    if (data.size() < 2 * kSigmaCount) throw std::invalid_argument("fit_isotropy: need at least 14 samples");
    const auto rows = signal_rows(f);
    const Eigen::Index n = Eigen::Index(data.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, kSigmaCount);
    Eigen::VectorXd y(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (const auto& r : rows) A.row(i) += f.i4 * r.weights.transpose() * row_basis(r, f, data[i].t);
        y(i) = data[i].value;
        s(i) = data[i].sigma;
    }
    return weighted_least_squares(A, y, s);
}

/// Twelve free Fourier amplitudes in signal_rows order, no parameter sharing between rows.
inline FitResult fit_fourier_components(const std::vector<Sample>& data, const LabFrame& f) {
    const auto rows = signal_rows(f);
    const Eigen::Index n = Eigen::Index(data.size());
    Eigen::MatrixXd A(n, Eigen::Index(rows.size()));
    Eigen::VectorXd y(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) A(i, Eigen::Index(j)) = row_basis(rows[j], f, data[i].t);
        y(i) = data[i].value;
        s(i) = data[i].sigma;
    }
    return weighted_least_squares(A, y, s);
}

/// sigma values from coefficients, for comparison with fit_isotropy.
inline Eigen::Matrix<double, 7, 1> sigma_parameters(const SMECoefficients& c, double i4) { return i4_sigma(c, i4) / i4; }

// ---------------------------------------------------------------- EEP

/// Particle masses in GeV.
struct ParticleMassesGeV {
    double e = 0.510998928e-3, p = 0.938272046, n = 0.939565379, u = 0.931494061;
};
inline constexpr ParticleMassesGeV masses_gev{};

/// alpha (a_eff)_0 [GeV] and (c)_00 per species, order e, p, n.
struct EEPParams {
    std::array<double, 3> alpha_a{};
    std::array<double, 3> c00{};
    std::string frame = "sun-centered";

    EEPParams operator+(const EEPParams& o) const {
        EEPParams r = *this;
        for (int i = 0; i < 3; ++i) r.alpha_a[i] += o.alpha_a[i], r.c00[i] += o.c00[i];
        return r;
    }
    EEPParams operator*(double s) const {
        EEPParams r = *this;
        for (int i = 0; i < 3; ++i) r.alpha_a[i] *= s, r.c00[i] *= s;
        return r;
    }
};

inline double species_mass_gev(const Species& s) { return s.relative_mass * masses_gev.u; }

/// (c^T)_00 = (1/m^T) sum N^w m^w (c^w)_00
inline double composite_c00(const Species& s, const EEPParams& p) {
    const auto& m = masses_gev;
    const auto& N = s.composition;
    return (N.electrons * m.e * p.c00[0] + N.protons * m.p * p.c00[1] + N.neutrons * m.n * p.c00[2]) /
           species_mass_gev(s);
}

/// beta^T = (2/m^T) alpha (a^T)_0 - (2/3) (c^T)_00
inline double eep_beta(const Species& s, const EEPParams& p) {
    const auto& N = s.composition;
    const double a = N.electrons * p.alpha_a[0] + N.protons * p.alpha_a[1] + N.neutrons * p.alpha_a[2];
    return 2.0 * a / species_mass_gev(s) - 2.0 / 3.0 * composite_c00(s, p);
}

/// Free-particle and antiparticle anomalies, order e, p, n.
inline std::array<double, 3> particle_beta(const EEPParams& p) {
    const double m[3] = {masses_gev.e, masses_gev.p, masses_gev.n};
    std::array<double, 3> b;
    for (int i = 0; i < 3; ++i) b[i] = 2.0 * p.alpha_a[i] / m[i] - 2.0 / 3.0 * p.c00[i];
    return b;
}
inline std::array<double, 3> antiparticle_beta(const EEPParams& p) {
    const double m[3] = {masses_gev.e, masses_gev.p, masses_gev.n};
    std::array<double, 3> b;
    for (int i = 0; i < 3; ++i) b[i] = -2.0 * p.alpha_a[i] / m[i] - 2.0 / 3.0 * p.c00[i];
    return b;
}

enum class ClockSystem { H_hfs, Fe57_mossbauer, Optical };

/// xi for a clock transition. Optical needs the atom; the Mossbauer value excludes beta^grav.
inline double clock_sensitivity(ClockSystem sys, const EEPParams& p, const Species* atom = nullptr) {
    const auto& m = masses_gev;
    switch (sys) {
        case ClockSystem::H_hfs:
            return -2.0 / 3.0 * (m.p * (2.0 * p.c00[0] - p.c00[1]) + m.e * (2.0 * p.c00[1] - p.c00[0])) / (m.p + m.e);
        case ClockSystem::Fe57_mossbauer: {
            static const auto table = builtin_species();
            const Species& fe56 = table.at("Fe56");
            const Species& fe57 = table.at("Fe57");
            return -2.0 / 3.0 * (species_mass_gev(fe56) * p.c00[2] + m.n * composite_c00(fe56, p)) /
                   species_mass_gev(fe57);
        }
        case ClockSystem::Optical: {
            if (!atom) throw std::invalid_argument("clock_sensitivity: optical clock needs an atom");
            const double ma = species_mass_gev(*atom);
            return -2.0 / 3.0 * (ma * p.c00[0] + m.e * composite_c00(*atom, p)) / (m.e + ma);
        }
    }
    throw std::invalid_argument("clock_sensitivity: unknown system");
}

/// Fractional frequency shift of a ground-to-probe maser comparison.
inline double gpa_shift(double dphi_prime, double v_s, double xi_H, double beta_probe) {
    const double c2 = codata2010.c * codata2010.c;
    return dphi_prime / c2 * (1.0 + xi_H - beta_probe) - v_s * v_s / (2.0 * c2);
}

/// delta phi = (1 + beta^At) k g T^2
inline double matter_wave_phase(const Species& atom, const EEPParams& p, double k, double g, double T) {
    return (1.0 + eep_beta(atom, p)) * k * g * T * T;
}

/// Bound kinetic energies T^w_int / (M c^2), order e, p, n.
using KineticFractions = std::array<double, 3>;

/// beta^A - beta^B through the neutron-excess and mass-defect charges plus kinetic terms.
inline double neutron_excess_decomposition(const Species& A, const KineticFractions& TA, const Species& B,
                                           const KineticFractions& TB, const EEPParams& p) {
    const auto& m = masses_gev;
    const double a = (m.e + m.p) / m.n;
    const auto bw = particle_beta(p);
    const auto bbar = antiparticle_beta(p);
    const double b_ep = m.e / m.p * bw[0] + bw[1];
    const double b_minus = b_ep - a * bw[2];
    const double b_plus = a * b_ep + bw[2];
    auto charges = [&](const Species& s) {
        const auto& N = s.composition;
        const double M = species_mass_gev(s);
        const double mprime = N.electrons * m.e + N.protons * m.p + N.neutrons * m.n - M;
        const double delta = (m.e + m.p) / m.p * N.neutrons - N.protons;
        const double mtilde = mprime - (m.n - m.p) * (m.e + m.p) / m.n * N.protons;
        return std::pair{delta / M, mtilde / M};
    };
    const auto [dA, mA] = charges(A);
    const auto [dB, mB] = charges(B);
    double r = (-(dA - dB) * m.p * b_minus + (mA - mB) * b_plus) / (1.0 + a * a);
    for (int w = 0; w < 3; ++w) r -= 0.5 * (TA[w] - TB[w]) * (bw[w] + bbar[w]);
    return r;
}

/// Global parameter order: alpha a^n, alpha a^{e+p}, c^n, c^p, c^e.
enum GlobalIndex { gAn = 0, gAep, gCn, gCp, gCe, kGlobalCount };
inline const char* global_name(int i) {
    static const char* n[] = {"alpha_a_n", "alpha_a_e+p", "c_n", "c_p", "c_e"};
    return n[i];
}

/// d beta^T / d parameter for a neutral species.
inline Eigen::VectorXd beta_row(const Species& s) {
    const auto& m = masses_gev;
    const auto& N = s.composition;
    if (N.electrons != N.protons) throw std::invalid_argument("beta_row: species must be neutral");
    const double M = species_mass_gev(s);
    Eigen::VectorXd r(kGlobalCount);
    r(gAn) = 2.0 * N.neutrons / M;
    r(gAep) = 2.0 * N.protons / M;
    r(gCn) = -2.0 / 3.0 * N.neutrons * m.n / M;
    r(gCp) = -2.0 / 3.0 * N.protons * m.p / M;
    r(gCe) = -2.0 / 3.0 * N.electrons * m.e / M;
    return r;
}

struct ExperimentConstraint {
    std::string label;
    Eigen::VectorXd row;
    double value = 0.0, sigma = 1.0;
    std::string citation;
};

/// Matter-wave constraint on beta^At from a measured (delta phi / k g T^2) - 1.
inline ExperimentConstraint matter_wave_constraint(const std::string& label, const Species& atom, double value,
                                                   double sigma) {
    return {label, beta_row(atom), value, sigma, ""};
}

struct GlobalFitResult {
    FitResult fit;
    Eigen::VectorXd best_single_sigma;  // per constraint, sigma / |row|
};

inline GlobalFitResult global_fit(const std::vector<ExperimentConstraint>& cs) {
    if (cs.empty()) throw std::invalid_argument("global_fit: no constraints");
    const Eigen::Index np = cs.front().row.size();
    const Eigen::Index n = Eigen::Index(cs.size());
    Eigen::MatrixXd A(n, np);
    Eigen::VectorXd y(n), s(n);
    GlobalFitResult r;
    r.best_single_sigma.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cs[std::size_t(i)].row.size() != np) throw std::invalid_argument("global_fit: inconsistent row lengths");
        A.row(i) = cs[std::size_t(i)].row.transpose();
        y(i) = cs[std::size_t(i)].value;
        s(i) = cs[std::size_t(i)].sigma;
        r.best_single_sigma(i) = s(i) / A.row(i).norm();
    }
    if (n < np) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        throw RankDeficient("global_fit: fewer constraints than parameters", svd.matrixV().rightCols(np - n));
    }
    r.fit = weighted_least_squares(A, y, s);
    return r;
}

}  // namespace mw
