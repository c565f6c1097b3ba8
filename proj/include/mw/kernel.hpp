#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "mw/constants.hpp"

namespace mw {

using cplx = std::complex<double>;
using Mat4c = Eigen::Matrix<cplx, 4, 4>;

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridTooNarrow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationLeak : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- Dirac algebra

struct MetricSample {
    Eigen::Matrix4d g_inv = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();  // signature -+++

    static MetricSample minkowski() { return {}; }
};

struct DiracOperatorSet {
    std::array<Mat4c, 3> alpha;
    Mat4c beta;
    std::array<Mat4c, 3> alpha_bar;
    Eigen::Vector3d g0j_bar = Eigen::Vector3d::Zero();
    Eigen::Matrix3d dreibein = Eigen::Matrix3d::Identity();  // d(j, a)
    Eigen::Matrix3d spatial = Eigen::Matrix3d::Identity();   // gbar^{0j} gbar^{0k} + gbar^{jk}
    double m_bar_over_m = 1.0;
};

inline std::array<Eigen::Matrix2cd, 3> pauli() {
    const cplx I(0, 1);
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -I, I, 0;
    sz << 1, 0, 0, -1;
    return {sx, sy, sz};
}

/// Standard (Dirac) representation: beta = diag(1,1,-1,-1), alpha = offdiag(sigma, sigma).
inline DiracOperatorSet dirac_flat() {
    DiracOperatorSet d;
    auto s = pauli();
    d.beta.setZero();
    d.beta.diagonal() << 1, 1, -1, -1;
    for (int a = 0; a < 3; ++a) {
        d.alpha[a].setZero();
        d.alpha[a].topRightCorner<2, 2>() = s[a];
        d.alpha[a].bottomLeftCorner<2, 2>() = s[a];
        d.alpha_bar[a] = d.alpha[a];
    }
    return d;
}

/// Barred quantities gbar = g/(-g^00), mbar = m/sqrt(-g^00); dreibein is the
/// principal square root of the spatial block.
inline DiracOperatorSet dirac_curved(const MetricSample& metric, double mass = 1.0) {
    const Eigen::Matrix4d& g = metric.g_inv;
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("dirac_curved: inverse metric not symmetric");
    const double mg00 = -g(0, 0);
    if (!(mg00 > 0.0)) throw NotPositiveDefinite("dirac_curved: g^00 must be negative");
    (void)mass;
    const Eigen::Matrix4d gb = g / mg00;
    DiracOperatorSet d = dirac_flat();
    d.g0j_bar = gb.block<1, 3>(0, 1).transpose();
    d.spatial = d.g0j_bar * d.g0j_bar.transpose() + gb.block<3, 3>(1, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(d.spatial);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NotPositiveDefinite("dirac_curved: spatial block is not positive definite");
    d.dreibein = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    for (int j = 0; j < 3; ++j) {
        d.alpha_bar[j].setZero();
        for (int a = 0; a < 3; ++a) d.alpha_bar[j] += d.dreibein(j, a) * d.alpha[a];
    }
    d.m_bar_over_m = 1.0 / std::sqrt(mg00);
    return d;
}

inline Mat4c anticommutator(const Mat4c& a, const Mat4c& b) { return a * b + b * a; }

/// Largest max-norm residual over all curved-space anticommutator relations.
inline double anticommutator_residual(const DiracOperatorSet& d) {
    double r = 0.0;
    const Mat4c I = Mat4c::Identity();
    r = std::max(r, (d.beta * d.beta - I).cwiseAbs().maxCoeff());
    for (int j = 0; j < 3; ++j) {
        r = std::max(r, anticommutator(d.alpha_bar[j], d.beta).cwiseAbs().maxCoeff());
        for (int k = 0; k < 3; ++k) {
            Mat4c target = 2.0 * d.spatial(j, k) * I;
            r = std::max(r, (anticommutator(d.alpha_bar[j], d.alpha_bar[k]) - target).cwiseAbs().maxCoeff());
        }
    }
    return r;
}

/// alpha_bar^j p_j + beta mbar c, with mbar c given directly.
inline Mat4c dirac_momentum_operator(const DiracOperatorSet& d, const Eigen::Vector3d& p, double mbar_c) {
    Mat4c m = mbar_c * d.beta;
    for (int j = 0; j < 3; ++j) m += p(j) * d.alpha_bar[j];
    return m;
}

// ---------------------------------------------------------------- wave packets

struct WavePacket1D {
    double x0 = 0.0;   // first grid point [m]
    double dx = 1.0;   // spacing [m]
    std::vector<cplx> psi;
    double mass = 1.0;  // kg
    double t = 0.0;

    std::size_t size() const { return psi.size(); }
    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
    std::vector<double> grid() const {
        std::vector<double> g(psi.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = x(i);
        return g;
    }
    double norm() const {
        double s = 0.0;
        for (auto& a : psi) s += std::norm(a);
        return s * dx;
    }
    void normalize() {
        const double n = std::sqrt(norm());
        for (auto& a : psi) a /= n;
    }
};

inline WavePacket1D gaussian_packet(double xmin, double xmax, std::size_t n, double mass, double center,
                                    double sigma, double k0 = 0.0) {
    WavePacket1D w;
    w.x0 = xmin;
    w.dx = (xmax - xmin) / static_cast<double>(n);
    w.mass = mass;
    w.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (w.x(i) - center) / sigma;
        w.psi[i] = std::exp(-0.25 * u * u) * std::exp(cplx(0, k0 * w.x(i)));
    }
    w.normalize();
    return w;
}

inline double boundary_amplitude(const WavePacket1D& w) {
    double peak = 0.0;
    for (auto& a : w.psi) peak = std::max(peak, std::abs(a));
    if (peak == 0.0) return 0.0;
    return std::max(std::abs(w.psi.front()), std::abs(w.psi.back())) / peak;
}

inline void check_boundary(const WavePacket1D& w, double tol = 1e-6) {
    if (boundary_amplitude(w) > tol)
        throw GridTooNarrow("wave packet amplitude at grid boundary exceeds " + std::to_string(tol));
}

/// Iterated short-time kernel: free Gaussian kernel times exp(+i m c^2 h00 eps/(2 hbar)),
/// the global Compton phase exp(-i omega_C t) factored out. The potential phase is split
/// evenly between the two ends of each slice (trapezoidal action). The kernel is tapered
/// smoothly where its local wavenumber s m/(hbar eps) runs from 0.2 to 1.7 times the grid
/// Nyquist wavenumber, where it would otherwise alias. Packets must be band limited below
/// 0.2 pi/dx and slices need hbar eps/m well above dx^2.
inline WavePacket1D path_integral_propagate(const WavePacket1D& psi0, const std::vector<double>& h00,
                                            double duration, int slices) {
    if (slices < 1) throw std::invalid_argument("path_integral_propagate: slices must be >= 1");
    if (!(duration > 0.0)) throw std::invalid_argument("path_integral_propagate: duration must be positive");
    const std::size_t n = psi0.size();
    if (!h00.empty() && h00.size() != n) throw std::invalid_argument("path_integral_propagate: h00 size mismatch");
    const auto& k = codata2010;
    const double eps = duration / slices;
    const double m = psi0.mass;
    const cplx pref = std::sqrt(cplx(m / (2.0 * pi * k.hbar * eps), 0) / cplx(0, 1)) * psi0.dx;

    // Kernel depends only on |i - j|.
    // Planck taper on the local wavenumber, from 0.2 to 1.7 times Nyquist; a sampled chirp
    // only folds back onto the packet band near twice Nyquist
    const double s_nyq = 1.7 * pi / psi0.dx * k.hbar * eps / m;
    const double s_a = 0.2 / 1.7 * s_nyq;
    auto kernel_at = [&](std::size_t d) {
        const double s = psi0.dx * static_cast<double>(d);
        double w = 1.0;
        if (s >= s_nyq) w = 0.0;
        else if (s > s_a) {
            const double u = (s_nyq - s) / (s_nyq - s_a);
            w = 1.0 / (1.0 + std::exp(1.0 / u - 1.0 / (1.0 - u)));
        }
        return w * pref * std::exp(cplx(0, m * s * s / (2.0 * k.hbar * eps)));
    };
    // the taper leaves a small error in the zero-momentum response of the unbounded lattice
    // kernel; restore it to exactly 1
    const auto d_max = static_cast<std::size_t>(std::ceil(s_nyq / psi0.dx));
    cplx dc = kernel_at(0);
    for (std::size_t d = 1; d <= d_max; ++d) dc += 2.0 * kernel_at(d);
    std::vector<cplx> kern(n);
    for (std::size_t d = 0; d < n; ++d) kern[d] = kernel_at(d) / dc;
    std::vector<cplx> vphase(n, cplx(1, 0));
    if (!h00.empty())
        for (std::size_t i = 0; i < n; ++i) vphase[i] = std::exp(cplx(0, m * k.c * k.c * h00[i] * eps / (4.0 * k.hbar)));

    WavePacket1D cur = psi0;
    check_boundary(cur);
    std::vector<cplx> next(n);
    for (int s = 0; s < slices; ++s) {
        for (std::size_t j = 0; j < n; ++j) cur.psi[j] *= vphase[j];
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += kern[i > j ? i - j : j - i] * cur.psi[j];
            next[i] = vphase[i] * acc;
        }
        cur.psi.swap(next);
        cur.t += eps;
        check_boundary(cur);
    }
    return cur;
}

/// Strang split-step Fourier: half potential, full kinetic, half potential. U in joules.
inline WavePacket1D splitstep_schrodinger(const WavePacket1D& psi0, const std::vector<double>& U, double duration,
                                          int steps) {
    if (steps < 1) throw std::invalid_argument("splitstep_schrodinger: steps must be >= 1");
    const std::size_t n = psi0.size();
    if (!U.empty() && U.size() != n) throw std::invalid_argument("splitstep_schrodinger: potential size mismatch");
    const double hbar = codata2010.hbar;
    const double dt = duration / steps;
    std::vector<cplx> half(n, cplx(1, 0)), kin(n);
    if (!U.empty())
        for (std::size_t i = 0; i < n; ++i) half[i] = std::exp(cplx(0, -U[i] * dt / (2.0 * hbar)));
    const double dk = 2.0 * pi / (psi0.dx * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double kk = dk * (i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n));
        kin[i] = std::exp(cplx(0, -hbar * kk * kk * dt / (2.0 * psi0.mass)));
    }
    Eigen::FFT<double> fft;
    WavePacket1D cur = psi0;
    std::vector<cplx> spec(n);
    for (int s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) cur.psi[i] *= half[i];
        fft.fwd(spec, cur.psi);
        for (std::size_t i = 0; i < n; ++i) spec[i] *= kin[i];
        fft.inv(cur.psi, spec);
        for (std::size_t i = 0; i < n; ++i) cur.psi[i] *= half[i];
        cur.t += dt;
    }
    return cur;
}

/// Free evolution of a Gaussian with initial rms width sigma (|psi|^2 width), zero mean momentum.
inline cplx free_gaussian_amplitude(double x, double t, double center, double sigma, double mass) {
    const double hbar = codata2010.hbar;
    const cplx st = sigma * (1.0 + cplx(0, hbar * t / (2.0 * mass * sigma * sigma)));
    const double u = x - center;
    return std::pow(2.0 * pi * sigma * sigma, -0.25) * std::sqrt(sigma / st) * std::exp(-u * u / (4.0 * sigma * st));
}

// ---------------------------------------------------------------- Bragg ladder

/// Omega^n / [(8 w_r)^(n-1) ((n-1)!)^2], accumulated as a product to avoid overflow.
inline double effective_rabi(double two_photon_rabi, int order_n, double omega_r) {
    if (order_n < 1) throw std::invalid_argument("effective_rabi: order must be >= 1");
    double r = two_photon_rabi;
    for (int j = 1; j < order_n; ++j) r *= two_photon_rabi / (8.0 * omega_r * double(j) * double(j));
    return r;
}

struct BraggPulse {
    double two_photon_rabi_peak = 0.0;  // rad/s
    double envelope_sigma = 250e-9;     // s
    double detuning_ramp = 0.0;         // rad/s^2
    int order_truncation = 8;
    double effective_wavenumber = 0.0;  // 1/m, momentum step hbar k_eff between ladder rungs
    double mass = 0.0;                  // kg
    double span_sigmas = 6.0;
    int steps = 4000;
};

/// Amplitudes indexed n = -N..N (index n + N). Piecewise-constant Hamiltonian steps,
/// each exponentiated exactly.
inline std::vector<cplx> bragg_pulse_evolve(const std::vector<cplx>& c0, const BraggPulse& p, double atom_velocity) {
    const int N = p.order_truncation;
    const int dim = 2 * N + 1;
    if (static_cast<int>(c0.size()) != dim) throw std::invalid_argument("bragg_pulse_evolve: amplitude size mismatch");
    if (!(p.envelope_sigma > 0.0) || !(p.mass > 0.0)) throw std::invalid_argument("bragg_pulse_evolve: bad pulse");
    double nrm = 0.0;
    for (auto& a : c0) nrm += std::norm(a);
    if (std::abs(nrm - 1.0) > 1e-9) throw std::invalid_argument("bragg_pulse_evolve: input not normalized");

    const double hbar = codata2010.hbar;
    Eigen::VectorXd kinetic(dim);
    for (int i = 0; i < dim; ++i) {
        const double pn = (i - N) * hbar * p.effective_wavenumber + p.mass * atom_velocity;
        kinetic(i) = pn * pn / (2.0 * p.mass * hbar);
    }
    Eigen::VectorXcd c(dim);
    for (int i = 0; i < dim; ++i) c(i) = c0[i];

    const double t0 = -p.span_sigmas * p.envelope_sigma;
    const double dt = 2.0 * p.span_sigmas * p.envelope_sigma / p.steps;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (int s = 0; s < p.steps; ++s) {
        const double t = t0 + (s + 0.5) * dt;
        const double u = t / p.envelope_sigma;
        const double om = p.two_photon_rabi_peak * std::exp(-0.5 * u * u);
        const double delta = p.detuning_ramp * t;
        for (int i = 0; i < dim; ++i) {
            H(i, i) = kinetic(i) - (i - N) * delta;
            if (i + 1 < dim) H(i, i + 1) = H(i + 1, i) = 0.5 * om;
        }
        es.compute(H);
        Eigen::VectorXcd ph(dim);
        for (int i = 0; i < dim; ++i) ph(i) = std::exp(cplx(0, -es.eigenvalues()(i) * dt));
        const Eigen::MatrixXd& V = es.eigenvectors();
        c = V.cast<cplx>() * (ph.asDiagonal() * (V.transpose().cast<cplx>() * c));
    }
    double edge = 0.0;
    for (int i = 0; i < dim; ++i)
        if (std::abs(i - N) >= N - 1) edge += std::norm(c(i));
    if (edge > 1e-4) throw TruncationLeak("bragg_pulse_evolve: population near truncation boundary " + std::to_string(edge));
    std::vector<cplx> out(dim);
    for (int i = 0; i < dim; ++i) out[i] = c(i);
    return out;
}

}  // namespace mw
