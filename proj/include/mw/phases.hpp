#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mw/constants.hpp"

namespace mw {

struct NotClosed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Branch { upper = +1, lower = -1 };

struct InterferometerGeometry {
    int order_n = 1;
    double wavenumber_k = 0.0;  // 1/m
    double T = 0.0;             // s
    double T_prime = 0.0;       // s, Ramsey-Borde middle interval
    double laser_phase_ref = 0.0;
    Branch branch = Branch::upper;
    double gravity_g = 9.81;

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("geometry: T must be positive");
        if (order_n < 1) throw std::invalid_argument("geometry: order_n must be >= 1");
    }
};

/// n (2 k g T^2 - phi_L)
inline double mz_phase(const InterferometerGeometry& g) {
    g.validate();
    return g.order_n * (2.0 * g.wavenumber_k * g.gravity_g * g.T * g.T - g.laser_phase_ref);
}

/// +-8 n^2 w_r T + 2 n k g (T + T') T + n phi_L
inline double rb_phase(const InterferometerGeometry& g, double omega_r) {
    g.validate();
    const double n = g.order_n;
    const double sgn = g.branch == Branch::upper ? 1.0 : -1.0;
    return sgn * 8.0 * n * n * omega_r * g.T + 2.0 * n * g.wavenumber_k * g.gravity_g * (g.T + g.T_prime) * g.T +
           n * g.laser_phase_ref;
}

// ---------------------------------------------------------------- piecewise free fall

struct Kick {
    double t;   // s
    double dv;  // m/s
};

/// Parabolic arcs under a constant acceleration, joined at velocity kicks.
struct PiecewiseTrajectory {
    double x_init = 0.0;
    double v_init = 0.0;
    double accel = -9.81;
    std::vector<Kick> kicks;  // sorted by time, t >= 0
    double t_end = 0.0;

    /// Velocity just after all kicks with time <= t (kicks at exactly t applied).
    double velocity(double t) const {
        double v = v_init + accel * t;
        for (auto& k : kicks)
            if (k.t <= t) v += k.dv;
        return v;
    }
    double position(double t) const {
        double x = x_init + v_init * t + 0.5 * accel * t * t;
        for (auto& k : kicks)
            if (k.t < t) x += k.dv * (t - k.t);
        return x;
    }
    std::vector<double> breakpoints() const {
        std::vector<double> b{0.0};
        for (auto& k : kicks)
            if (k.t > 0.0 && k.t < t_end) b.push_back(k.t);
        b.push_back(t_end);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }
};

/// Upper arm kicked +v0 at 0, -v0 at T, +v0 at 2T (recombination); lower arm kicked +v0 at T.
struct ClockComparisonPair {
    PiecewiseTrajectory upper, lower;
};

inline ClockComparisonPair mz_trajectories(double x0, double u0, double accel, double v0, double T) {
    ClockComparisonPair p;
    p.upper = {x0, u0, accel, {{0.0, v0}, {T, -v0}, {2 * T, v0}}, 2 * T};
    p.lower = {x0, u0, accel, {{T, v0}}, 2 * T};
    return p;
}

struct ClockComparisonResult {
    double phi_U = 0.0;
    double phi_TD = 0.0;
    double phi_I = 0.0;
    double total = 0.0;
    double turning_point_sum = 0.0;  // x1 - x2 + x3 - x4
};

using PotentialFn = std::function<double(double x, double t)>;  // J/kg

namespace detail {
template <class F>
double integrate_pieces(F f, const std::vector<double>& bp) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, bp[i], bp[i + 1], 8, 1e-14);
    return s;
}
}  // namespace detail

/// Phases reported as lower arm minus upper arm, so total = phi_U = mz_phase.
/// Laser phase: every kick dv imprints (omega/c^2) dv x(t_kick) on its arm.
inline ClockComparisonResult clock_comparison_decompose(const PiecewiseTrajectory& up, const PiecewiseTrajectory& lo,
                                                        double omega_clock, double v0, PotentialFn U_up,
                                                        PotentialFn U_lo, double closure_tol = 1e-9) {
    const double c2 = codata2010.c * codata2010.c;
    const double te = up.t_end;
    if (std::abs(lo.t_end - te) > 1e-15 * (1 + te)) throw NotClosed("trajectories end at different times");
    const double scale = 1.0 + std::abs(v0) * te + std::abs(up.accel) * te * te;
    if (std::abs(up.position(te) - lo.position(te)) > closure_tol * scale ||
        std::abs(up.x_init - lo.x_init) > closure_tol * scale)
        throw NotClosed("trajectories do not share start and end positions");
    // the final kicks at t_end bring the velocities together
    if (std::abs(up.velocity(te) - lo.velocity(te)) > closure_tol * (1 + std::abs(v0)) ||
        std::abs(up.v_init - lo.v_init) > closure_tol * (1 + std::abs(v0)))
        throw NotClosed("trajectories do not share initial and final velocities");

    std::vector<double> bp = up.breakpoints();
    for (double b : lo.breakpoints()) bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    // one-sided velocities inside each segment are what enter the integrand
    auto vmid = [](const PiecewiseTrajectory& tr, double t) {
        double v = tr.v_init + tr.accel * t;
        for (auto& k : tr.kicks)
            if (k.t < t) v += k.dv;
        return v;
    };
    ClockComparisonResult r;
    const double dU = detail::integrate_pieces(
        [&](double t) { return U_up(up.position(t), t) - U_lo(lo.position(t), t); }, bp);
    const double dv2 = detail::integrate_pieces(
        [&](double t) {
            const double a = vmid(up, t), b = vmid(lo, t);
            return a * a - b * b;
        },
        bp);
    r.phi_U = omega_clock * dU / c2;
    r.phi_TD = -0.5 * omega_clock * dv2 / c2;
    double laser = 0.0;
    for (auto& k : up.kicks) laser -= k.dv * up.position(k.t);
    for (auto& k : lo.kicks) laser += k.dv * lo.position(k.t);
    r.phi_I = omega_clock * laser / c2;
    r.total = r.phi_U + r.phi_TD + r.phi_I;
    if (up.kicks.size() >= 2 && !lo.kicks.empty()) {
        const double x1 = up.position(0.0), x2 = up.position(up.kicks[1].t), x3 = up.position(te),
                     x4 = lo.position(lo.kicks[0].t);
        r.turning_point_sum = x1 - x2 + x3 - x4;
    }
    return r;
}

inline ClockComparisonResult clock_comparison_decompose(const PiecewiseTrajectory& up, const PiecewiseTrajectory& lo,
                                                        double omega_clock, double v0, double g) {
    PotentialFn U = [g](double x, double) { return g * x; };
    return clock_comparison_decompose(up, lo, omega_clock, v0, U, U);
}

// ---------------------------------------------------------------- source masses

struct InsideSource : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SourceMassConfig {
    double sphere_radius_R = 0.0;   // m
    double separation_s = 0.0;      // m, wave packet separation
    double center_spacing_L = 0.0;  // m
    double density_rho = 0.0;       // kg/m^3
    double hold_time_T = 1.0;       // s

    void validate() const {
        if (!(sphere_radius_R > 0.0) || !(density_rho > 0.0)) throw std::invalid_argument("source mass: R, rho > 0");
        if (!(center_spacing_L > 2.0 * sphere_radius_R)) throw std::invalid_argument("source mass: spheres overlap");
    }
    double sphere_mass() const { return 4.0 / 3.0 * pi * std::pow(sphere_radius_R, 3) * density_rho; }
};

enum class SphereModel { solid, exterior_only };

/// Potential [J/kg] of one uniform sphere at distance r from its center.
inline double sphere_potential(double GM, double R, double r, SphereModel model) {
    if (r >= R) return -GM / r;
    if (model == SphereModel::exterior_only) throw InsideSource("point lies inside a source sphere");
    return -GM * (3.0 * R * R - r * r) / (2.0 * R * R * R);
}

/// Spheres centered at (+-L/2, 0, 0); general 3D point.
inline double sphere_pair_potential(const SourceMassConfig& c, double x, double y = 0.0, double z = 0.0,
                                    SphereModel model = SphereModel::solid) {
    const double GM = codata2010.G * c.sphere_mass();
    const double h = 0.5 * c.center_spacing_L;
    const double t2 = y * y + z * z;
    return sphere_potential(GM, c.sphere_radius_R, std::sqrt((x - h) * (x - h) + t2), model) +
           sphere_potential(GM, c.sphere_radius_R, std::sqrt((x + h) * (x + h) + t2), model);
}

/// Axial derivative of sphere_pair_potential (solid model).
inline double sphere_pair_gradient(const SourceMassConfig& c, double x) {
    const double GM = codata2010.G * c.sphere_mass();
    const double R = c.sphere_radius_R, h = 0.5 * c.center_spacing_L;
    auto one = [&](double d) {  // d = x - center
        const double r = std::abs(d);
        if (r >= R) return GM * d / (r * r * r);
        return GM * d / (R * R * R);
    };
    return one(x - h) + one(x + h);
}

inline double sphere_pair_curvature(const SourceMassConfig& c, double x) {
    const double GM = codata2010.G * c.sphere_mass();
    const double R = c.sphere_radius_R, h = 0.5 * c.center_spacing_L;
    auto one = [&](double d) {
        const double r = std::abs(d);
        if (r >= R) return -2.0 * GM / (r * r * r);
        return GM / (R * R * R);
    };
    return one(x - h) + one(x + h);
}

/// Off-axis second derivative d^2U/dy^2 on the axis.
inline double sphere_pair_transverse_curvature(const SourceMassConfig& c, double x) {
    const double GM = codata2010.G * c.sphere_mass();
    const double R = c.sphere_radius_R, h = 0.5 * c.center_spacing_L;
    auto one = [&](double d) {
        const double r = std::abs(d);
        if (r >= R) return GM / (r * r * r);
        return GM / (R * R * R);
    };
    return one(x - h) + one(x + h);
}

/// Saddle between the midpoint and the +x sphere center (Newton on the axial gradient).
inline double near_saddle(const SourceMassConfig& c) {
    const double h = 0.5 * c.center_spacing_L;
    // bracket: gradient negative just right of the midpoint, positive near the center
    double lo = 1e-9 * h, hi = h * (1 - 1e-12);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = sphere_pair_gradient(c, x);
        if (g < 0) lo = x;
        else hi = x;
        const double d = sphere_pair_curvature(c, x);
        double xn = x - g / d;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * h) return xn;
        x = xn;
    }
    return x;
}

inline double ab_delta_U(const SourceMassConfig& c) {
    return sphere_pair_potential(c, 0.0) - sphere_pair_potential(c, near_saddle(c));
}

/// Maximizes dU/(G rho s^2) over the sphere spacing at fixed R.
inline SourceMassConfig ab_optimal_geometry(double R, double rho = 1.0, double T = 1.0) {
    if (!(R > 0.0)) throw std::invalid_argument("ab_optimal_geometry: R must be positive");
    auto ratio = [&](double Lr) {
        SourceMassConfig c{R, 0.0, Lr * R, rho, T};
        const double s = near_saddle(c);
        return ab_delta_U(c) / (codata2010.G * rho * s * s);
    };
    // golden-section search on L/R
    double a = 2.05, b = 4.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = ratio(x1), f2 = ratio(x2);
    while (b - a > 1e-10) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = ratio(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = ratio(x2);
        }
    }
    SourceMassConfig c{R, 0.0, 0.5 * (a + b) * R, rho, T};
    c.separation_s = near_saddle(c);
    return c;
}

/// Geometry with the separation s given (scale the dimensionless optimum).
inline SourceMassConfig ab_geometry_for_separation(double s, double rho, double T) {
    SourceMassConfig unit = ab_optimal_geometry(1.0);
    const double R = s / unit.separation_s;
    return {R, s, unit.center_spacing_L * R, rho, T};
}

inline double ab_phase(const SourceMassConfig& c, const Species& sp) {
    c.validate();
    return sp.mass * ab_delta_U(c) * c.hold_time_T / codata2010.hbar;
}

struct PositionSystematic {
    double mean = 0.0;
    double std = 0.0;
};

/// Quadratic-response coefficients of the normalized phase at the optimal geometry:
/// dphi/phi = a_x (dxA^2) + b_x (dxB^2) + a_r dyA^2 + b_r dyB^2.
struct PositionCoefficients {
    double a_x, b_x, a_r, b_r;  // in units of 1/R^2
};

inline PositionCoefficients ab_position_coefficients() {
    SourceMassConfig c = ab_optimal_geometry(1.0);
    const double dU = ab_delta_U(c);
    const double xb = c.separation_s;
    return {0.5 * sphere_pair_curvature(c, 0.0) / dU, -0.5 * sphere_pair_curvature(c, xb) / dU,
            0.5 * sphere_pair_transverse_curvature(c, 0.0) / dU, -0.5 * sphere_pair_transverse_curvature(c, xb) / dU};
}

/// Each atom cloud displaced by independent Gaussians: sigma_x along the axis, sigma_r
/// along one transverse direction.
inline PositionSystematic ab_position_systematic(double sigma_x, double sigma_r, double R) {
    const auto k = ab_position_coefficients();
    const double sx2 = sigma_x * sigma_x / (R * R), sr2 = sigma_r * sigma_r / (R * R);
    PositionSystematic p;
    p.mean = (k.a_x + k.b_x) * sx2 + (k.a_r + k.b_r) * sr2;
    // var(a X^2) = 2 a^2 sigma^4
    const double var = 2.0 * (k.a_x * k.a_x + k.b_x * k.b_x) * sx2 * sx2 + 2.0 * (k.a_r * k.a_r + k.b_r * k.b_r) * sr2 * sr2;
    p.std = std::sqrt(var);
    return p;
}

}  // namespace mw
