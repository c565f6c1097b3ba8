#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "mw/constants.hpp"

namespace mw {

struct CoverageGap : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnitMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// F(omega) = 4 sin(omega (t0 + t1)/2) sin(omega (t0 - t1)/2), times relative to the
/// symmetric center of the pulse sequence.
inline double sensitivity_function(double t0, double t1, double omega) {
    return 4.0 * std::sin(0.5 * omega * (t0 + t1)) * std::sin(0.5 * omega * (t0 - t1));
}

/// Mach-Zehnder special case 4 sin^2(omega T / 2).
inline double sensitivity_function_mz(double T, double omega) {
    const double s = std::sin(0.5 * omega * T);
    return 4.0 * s * s;
}

struct NoiseSegment {
    double f_lo, f_hi;  // Hz
    double a0;          // m s^-2 / sqrt(Hz) at f_ref
    double p;           // slope
    double f_ref;       // Hz
};

/// Piecewise power-law acceleration spectral density a(f).
struct NoiseModel {
    std::string name = "custom";
    std::vector<NoiseSegment> segments;

    void validate() const {
        if (segments.empty()) throw std::invalid_argument("noise model '" + name + "': no segments");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const auto& s = segments[i];
            if (!(s.f_lo >= 0.0) || !(s.f_hi > s.f_lo)) throw std::invalid_argument("noise model: bad band edges");
            if (s.a0 < 0.0 || !(s.f_ref > 0.0)) throw std::invalid_argument("noise model: bad amplitude or f_ref");
            if (i > 0 && std::abs(s.f_lo - segments[i - 1].f_hi) > 1e-12 * s.f_lo)
                throw std::invalid_argument("noise model '" + name + "': bands not contiguous");
        }
    }
    double f_min() const { return segments.front().f_lo; }
    double f_max() const { return segments.back().f_hi; }

    double operator()(double f) const {
        for (const auto& s : segments)
            if (f >= s.f_lo && f <= s.f_hi) return s.a0 * std::pow(f / s.f_ref, s.p);
        throw CoverageGap("noise model '" + name + "' does not cover f = " + std::to_string(f));
    }

    NoiseModel scaled(double factor) const {
        NoiseModel m = *this;
        for (auto& s : m.segments) s.a0 *= factor;
        return m;
    }

    static NoiseModel from_json(const nlohmann::json& j) {
        NoiseModel m;
        m.name = j.value("name", "custom");
        for (const auto& s : j.at("segments")) {
            const double lo = s.at("f_lo").get<double>();
            m.segments.push_back({lo, s.at("f_hi").get<double>(), s.at("a0").get<double>(), s.value("p", 0.0),
                                  s.value("f_ref", lo > 0.0 ? lo : 1.0)});
        }
        m.validate();
        return m;
    }
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["segments"] = nlohmann::json::array();
        for (const auto& s : segments)
            j["segments"].push_back({{"f_lo", s.f_lo}, {"f_hi", s.f_hi}, {"a0", s.a0}, {"p", s.p}, {"f_ref", s.f_ref}});
        return j;
    }
};

/// k_eff [ integral (a(f) F(2 pi f) / (2 pi f)^2)^2 df ]^(1/2), a(f) one-sided in Hz.
inline double vibration_phase_noise(const NoiseModel& model, double t0, double t1, double k_eff, double f_lo,
                                    double f_hi) {
    model.validate();
    if (!(f_hi > f_lo) || f_lo < 0.0) throw std::invalid_argument("vibration_phase_noise: bad frequency range");
    if (f_lo < model.f_min() || f_hi > model.f_max())
        throw CoverageGap("noise model '" + model.name + "' does not cover the integration range");
    const double tmax = std::max({std::abs(t0), std::abs(t1), 1e-9});
    auto integrand = [&](double f) {
        if (f <= 0.0) return 0.0;
        const double w = 2.0 * pi * f;
        const double x = model(f) * sensitivity_function(t0, t1, w) / (w * w);
        return x * x;
    };
    double total = 0.0;
    for (const auto& s : model.segments) {
        double a = std::max(s.f_lo, f_lo), b = std::min(s.f_hi, f_hi);
        if (!(b > a)) continue;
        // pieces shorter than a quarter oscillation of F and at most 1.5x in frequency
        double f = a;
        while (f < b) {
            double g = std::min({b, f + 0.25 / tmax, f > 0.0 ? 1.5 * f : f + 0.25 / tmax});
            if (b - g < 1e-12 * b) g = b;
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, f, g, 3, 1e-10);
            f = g;
        }
    }
    return k_eff * std::sqrt(total);
}

struct AllanPoint {
    double tau, rav;
};

/// Non-overlapping two-sample deviation of fractional-frequency samples spaced tau0.
inline std::vector<AllanPoint> allan_deviation(const std::vector<double>& y, double tau0,
                                               const std::vector<double>& taus) {
    if (!(tau0 > 0.0)) throw std::invalid_argument("allan_deviation: tau0 must be positive");
    std::vector<AllanPoint> out;
    for (double tau : taus) {
        const double mr = tau / tau0;
        const auto m = static_cast<std::size_t>(std::llround(mr));
        if (m < 1 || std::abs(mr - double(m)) > 1e-9 * mr)
            throw std::invalid_argument("allan_deviation: tau must be a multiple of the sample interval");
        const std::size_t bins = y.size() / m;
        if (bins < 3) throw InsufficientData("allan_deviation: fewer than 3 bins at tau = " + std::to_string(tau));
        std::vector<double> avg(bins, 0.0);
        for (std::size_t k = 0; k < bins; ++k) {
            for (std::size_t i = 0; i < m; ++i) avg[k] += y[k * m + i];
            avg[k] /= double(m);
        }
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < bins; ++k) s += (avg[k + 1] - avg[k]) * (avg[k + 1] - avg[k]);
        out.push_back({tau, std::sqrt(s / (2.0 * double(bins - 1)))});
    }
    return out;
}

/// Least-squares slope of log(rav) against log(tau).
inline double loglog_slope(const std::vector<AllanPoint>& pts) {
    if (pts.size() < 2) throw InsufficientData("loglog_slope: need 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& p : pts) {
        const double x = std::log(p.tau), yv = std::log(p.rav);
        sx += x, sy += yv, sxx += x * x, sxy += x * yv;
    }
    const double n = double(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Per-run 1/(C sqrt(N)), averaged over R runs.
inline double shot_noise(double n_atoms, double contrast, double repetitions = 1.0) {
    if (!(n_atoms >= 1.0)) throw std::invalid_argument("shot_noise: need at least one atom");
    if (!(contrast > 0.0) || contrast > 1.0) throw std::invalid_argument("shot_noise: contrast outside (0, 1]");
    if (!(repetitions >= 1.0)) throw std::invalid_argument("shot_noise: repetitions must be >= 1");
    return 1.0 / (contrast * std::sqrt(n_atoms) * std::sqrt(repetitions));
}

struct BudgetEntry {
    std::string label;
    double offset = 0.0;
    double uncertainty = 0.0;
    std::string units;
};

struct ErrorBudget {
    std::string name;
    std::vector<BudgetEntry> entries;

    static ErrorBudget from_json(const nlohmann::json& j) {
        ErrorBudget b;
        b.name = j.value("name", "");
        const std::string def = j.value("units", "");
        for (const auto& e : j.at("entries"))
            b.entries.push_back({e.at("label").get<std::string>(), e.value("offset", 0.0),
                                 e.value("uncertainty", 0.0), e.value("units", def)});
        return b;
    }
};

struct BudgetTotal {
    double offset, uncertainty;
    std::string units;
};

/// Offsets add, uncertainties add in quadrature.
inline BudgetTotal budget_combine(const ErrorBudget& b) {
    if (b.entries.empty()) throw std::invalid_argument("budget_combine: empty budget");
    BudgetTotal t{0.0, 0.0, b.entries.front().units};
    for (const auto& e : b.entries) {
        if (e.units != t.units) throw UnitMismatch("budget '" + b.name + "': entry '" + e.label + "' in " + e.units);
        if (e.uncertainty < 0.0) throw std::invalid_argument("budget: negative uncertainty in '" + e.label + "'");
        t.offset += e.offset;
        t.uncertainty += e.uncertainty * e.uncertainty;
    }
    t.uncertainty = std::sqrt(t.uncertainty);
    return t;
}

/// Order-of-magnitude rotation phase (k_eff v0) Omega (t1 - t0).
inline double rotation_phase_estimate(double k_eff, double v0, double Omega, double t0, double t1) {
    return k_eff * v0 * Omega * std::abs(t1 - t0);
}

/// Mean-field phase 4 pi hbar a n T / m.
inline double mean_field_phase(double scattering_length, double density, double T, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("mean_field_phase: mass must be positive");
    return 4.0 * pi * codata2010.hbar * scattering_length * density * T / mass;
}

}  // namespace mw
