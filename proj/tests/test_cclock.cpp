#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mw/cclock.hpp"

using namespace mw;

namespace {

ClockSolution solve(int n, Rational N) {
    ClockConfig c;
    c.bragg_order_n = n;
    c.divisor_N = N;
    c.omega_C = 1.0;
    c.T = 1.0;
    return solve_lock(c);
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

TEST(ClockTable, ElectronRows) {
    auto a = solve(2, Rational(1, 2));
    EXPECT_EQ(round3(a.beta), 0.707);
    EXPECT_EQ(round3(a.beta_prime), 0.943);
    EXPECT_EQ(round3(a.omega_m), 1.0);
    EXPECT_EQ(round3(a.omega_L), 0.5);
    EXPECT_EQ(round3(a.omega_plus), 1.207);
    EXPECT_EQ(round3(a.omega_minus), 0.207);

    auto b = solve(1, Rational(1, 2));
    EXPECT_EQ(round3(b.omega_m), 2.0);
    EXPECT_EQ(round3(b.omega_L), 1.0);
    EXPECT_EQ(round3(b.omega_plus), 2.414);
    EXPECT_EQ(round3(b.omega_minus), 0.414);

    auto c = solve(1, Rational(1000));
    EXPECT_NEAR(c.beta, 0.0005, 5e-8);
    EXPECT_DOUBLE_EQ(c.omega_m, 5e-7);
    EXPECT_NEAR(c.omega_plus, 0.00050025, 5e-9);
    EXPECT_NEAR(c.omega_minus, 0.00049975, 5e-9);
}

TEST(ClockTable, RationalRatiosExact) {
    for (int n = 1; n <= 6; ++n)
        for (auto N : {Rational(1, 2), Rational(3, 7), Rational(5), Rational(1000)}) {
            auto s = solve(n, N);
            EXPECT_EQ(s.ratio_C_over_m, Rational(2 * n) * N * N);
            EXPECT_EQ(s.ratio_L_over_m, N);
            // beta gamma = n omega_L / omega_C
            EXPECT_NEAR(s.beta * s.gamma, n * s.omega_L, 1e-14 * n * s.omega_L);
        }
}

TEST(ClockSolve, InvalidConfig) {
    ClockConfig c;
    c.bragg_order_n = 0;
    EXPECT_THROW(solve_lock(c), std::invalid_argument);
    c.bragg_order_n = 1;
    c.divisor_N = Rational(-1, 2);
    EXPECT_THROW(solve_lock(c), std::invalid_argument);
}

TEST(BeamsplitterFrame, KinematicIdentities) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-6, 1);
    for (int i = 0; i < 1000; ++i) {
        const int n = 1 + int(rng() % 8);
        const double wL = std::pow(10.0, u(rng));
        auto f = beamsplitter_frame(n, wL, 1.0);
        ASSERT_GT(f.beta, 0.0);
        ASSERT_LT(f.beta, 1.0);
        EXPECT_NEAR(f.gamma, 1.0 / std::sqrt(1.0 - f.beta * f.beta), 1e-12 * f.gamma);
        EXPECT_NEAR(f.beta * f.gamma / (n * wL), 1.0, 1e-12);
        EXPECT_NEAR(f.omega_plus * f.omega_minus / (wL * wL), 1.0, 1e-12);
        EXPECT_NEAR(f.beta_prime, 2 * f.beta / (1 + f.beta * f.beta), 1e-15);
    }
}

TEST(BeamsplitterFrame, Limits) {
    auto f = beamsplitter_frame(3, 1e-6, 1.0);
    EXPECT_NEAR(f.beta / 3e-6, 1.0, 1e-11);
    auto g = beamsplitter_frame(1, 1.0, 2.0);  // beta gamma = 1/2 from N = 1
    EXPECT_NEAR(g.beta, 1.0 / std::sqrt(5.0), 1e-15);
    auto h = beamsplitter_frame(1, 1.0, 1.0);
    EXPECT_NEAR(h.beta, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_THROW(beamsplitter_frame(0, 1.0, 1.0), std::invalid_argument);
}

// Lab frame with the lower arm at rest: n photons absorbed from omega_+ (forward) and
// n emitted into omega_- (backward) must put the atom on shell at beta'.
TEST(BeamsplitterFrame, FourMomentumConservation) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 0.5);
    for (int i = 0; i < 500; ++i) {
        const int n = 1 + int(rng() % 5);
        const double wL = std::pow(10.0, u(rng));
        auto f = beamsplitter_frame(n, wL, 1.0);
        const double E = 1.0 + n * (f.omega_plus - f.omega_minus);
        const double p = n * (f.omega_plus + f.omega_minus);
        EXPECT_NEAR(E * E - p * p, 1.0, 1e-11 * E * E);
        EXPECT_NEAR(p / E, f.beta_prime, 1e-12);
        EXPECT_NEAR(E, f.gamma_prime, 1e-11 * E);
    }
}

TEST(ClockPhases, CancelOverRandomConfigs) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 10000; ++i) {
        ClockConfig c;
        c.bragg_order_n = 1 + int(rng() % 10);
        c.divisor_N = Rational(1 + std::int64_t(rng() % 2000), 1 + std::int64_t(rng() % 50));
        c.omega_C = std::pow(10.0, 10 + 12 * u(rng));
        c.T = std::pow(10.0, -4 + 4 * u(rng));
        auto ph = clock_phases(c);
        const double scale = std::max(std::abs(ph.phi_F), std::abs(ph.phi_I));
        ASSERT_GT(scale, 0.0);
        EXPECT_LE(std::abs(ph.phi_F + ph.phi_I), 1e-12 * scale);
        // proper-time deficit of the moving arm, computed from beta' alone
        auto s = solve_lock(c);
        const double bp = s.beta_prime;
        const double tau = 2.0 * c.omega_C * c.T * (-bp * bp / (1.0 + std::sqrt(1.0 - bp * bp)));
        EXPECT_NEAR(ph.phi_F / tau, 1.0, 1e-12);
        EXPECT_NEAR(s.phi_F, ph.phi_F, 1e-12 * scale);
    }
}

TEST(Alpha, FromMeasuredCesiumComptonFrequency) {
    const auto& K = codata2010;
    const double a = alpha_from_compton(nu_C_Cs133_measured, K.Rinf, 132.905451947, K.Ar_e);
    // mpmath oracle
    EXPECT_NEAR(a / 0.0072973525883592111, 1.0, 1e-14);
    EXPECT_NEAR(a / 7.297352589e-3, 1.0, 2e-9);
    EXPECT_NEAR(compton_from_alpha(a, K.Rinf, 132.905451947, K.Ar_e) / nu_C_Cs133_measured, 1.0, 1e-14);
    // d alpha / alpha = -1/2 d nu / nu
    const double a2 = alpha_from_compton(nu_C_Cs133_measured * (1 + 1e-8), K.Rinf, 132.905451947, K.Ar_e);
    EXPECT_NEAR((a2 / a - 1) / 1e-8, -0.5, 1e-6);
    EXPECT_THROW(alpha_from_compton(0.0, K.Rinf, 1, 1), std::invalid_argument);
}

TEST(MassStandard, RoundTrip) {
    SpeciesRegistry r;
    const double m = r.get("Cs133").mass;
    EXPECT_NEAR(mass_from_compton(compton_frequency(r.get("Cs133")) / (2 * pi)) / m, 1.0, 1e-14);
    EXPECT_NEAR(mass_from_compton(nu_C_Cs133_measured) / m, 1.0, 1e-8);
    EXPECT_THROW(mass_from_compton(-1), std::invalid_argument);
}

TEST(FrequencyChain, DefaultValues) {
    FrequencyChain f;
    EXPECT_NEAR(f.nu_hfs(), 9192631770.0, 1e-3);
    EXPECT_DOUBLE_EQ(f.N_c(), 35173594.165);
    EXPECT_NEAR(f.N_dds(), 0.008265821099996629, 1e-17);
    // python float oracle of 4 n nu_ref N_c^2 / N_dds
    EXPECT_NEAR(f.nu_C() / 2.9934877890948467e25, 1.0, 1e-14);
    EXPECT_NEAR(f.nu_C() / nu_C_Cs133_measured, 1.0, 1e-6);
}

TEST(FrequencyChain, ReferenceInverse) {
    FrequencyChain f;
    EXPECT_NEAR(f.nu_ref_from(f.nu_C()) / f.nu_ref, 1.0, 1e-15);
    EXPECT_NEAR(f.nu_ref_from(2 * f.nu_C()) / f.nu_ref, 2.0, 1e-15);
}
