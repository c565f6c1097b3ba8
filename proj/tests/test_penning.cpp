#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mw/penning.hpp"

using namespace mw;

namespace {
const double me = codata2010.Ar_e * codata2010.amu;
}

TEST(PenningExact, MatchesActionOracle) {
    // mpmath quadrature of the same action integral, hbar = m = 1
    EXPECT_NEAR(single_phase_exact(0.5, 1, 0, 0, 0), -0.63661977236758134, 1e-14);
    EXPECT_NEAR(single_phase_exact(0.5, 1, 0.3, 0.2, 0.05), -0.69410786193378558, 1e-13);
    EXPECT_NEAR(single_phase_exact(0.5, 1, 0.7, 1.3, -0.08), -0.52350046789291628, 1e-13);
    EXPECT_NEAR(single_phase_exact(0.5, 1, 1.1, -0.4, 0.02), -0.67915067576256856, 1e-13);
    EXPECT_NEAR(single_phase_exact(2 * pi * 1.2e9, 25e-6, 0.5, 0.9, 300, -1) / -241361.89185294049, 1.0, 1e-12);
    EXPECT_THROW(single_phase_exact(0.5, 1, 0, 0, 0, 2), std::invalid_argument);
}

TEST(PenningExact, ResonantPhaseIgnoresInitialMotion) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 50; ++i) {
        const double wr = 0.1 + 5 * u(rng), T = 0.2 + 3 * u(rng);
        const double ref = -4.0 / pi * wr * T;
        for (int s : {1, -1})
            EXPECT_NEAR(single_phase_exact(wr, T, 2 * u(rng), 2 * pi * u(rng), 0.0, s) / ref, 1.0, 1e-12);
    }
}

TEST(PenningPrinted, ResonantValue) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 100; ++i) {
        const double wr = std::pow(10.0, 3 + 7 * u(rng)), T = std::pow(10.0, -6 + 3 * u(rng));
        EXPECT_EQ(single_phase(wr, T, 0.0, 2 * pi * u(rng), 0.0), -(4.0 / pi * wr * T));
    }
    EXPECT_THROW(single_phase(1, 1, 0, 0, 0.2), PerturbationInvalid);
}

TEST(PenningPrinted, ConjugatePairCancelsInitialMotion) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    const double wr = 2 * pi * 1.2e9, T = 25e-6;
    const double dz = 0.05 / T;
    const double ref = single_phase(wr, T, 0, 0, dz) * 2;
    for (int i = 0; i < 100; ++i) {
        const double q = 3 * u(rng), phi = 2 * pi * u(rng);
        // the recoil-down interferometer sees k0/k with the opposite sign
        const double sum = single_phase(wr, T, q, phi, dz) + single_phase(wr, T, -q, phi, dz);
        EXPECT_LE(std::abs(sum - ref), 1e-12 * std::abs(ref));
    }
}

TEST(DoubleDiffraction, ExactPairIndependentOfInitialState) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    const double wr = 0.5, T = 1.0;
    for (double dz : {0.0, 0.01, -0.04}) {
        const double ref = single_phase_exact(wr, T, 0, 0, dz, 1) + single_phase_exact(wr, T, 0, 0, dz, -1);
        for (int i = 0; i < 100; ++i) {
            const double q = 2 * u(rng), phi = 2 * pi * u(rng);
            const double sum = single_phase_exact(wr, T, q, phi, dz, 1) + single_phase_exact(wr, T, q, phi, dz, -1);
            EXPECT_LE(std::abs(sum - ref), 1e-12 * std::abs(ref)) << dz << " " << q << " " << phi;
        }
    }
}

// The closed form carries the opposite overall sign to the action-integral pair; value
// and slope agree at resonance, curvature does not.
TEST(DoubleDiffraction, ClosedFormAgainstActionPair) {
    const double wr = 0.5, T = 1.0;
    auto pair = [&](double dz) { return single_phase_exact(wr, T, 0, 0, dz, 1) + single_phase_exact(wr, T, 0, 0, dz, -1); };
    EXPECT_NEAR(pair(0.0), -double_diffraction_phase(wr, T, 0.0), 1e-14);
    EXPECT_NEAR(double_diffraction_phase(wr, T, 0.0), 8.0 / pi * wr * T, 1e-15);
    const double h = 1e-4;
    const double dp = (pair(h) - pair(-h)) / (2 * h);
    const double dc = (double_diffraction_phase(wr, T, h) - double_diffraction_phase(wr, T, -h)) / (2 * h);
    EXPECT_NEAR(dp / -dc, 1.0, 1e-6);
    EXPECT_NEAR(dc, 16.0 / (pi * pi) * (pi - 1.0) * wr * T * T, 1e-6);
}

TEST(DoubleDiffraction, ExpansionErrorIsThirdOrder) {
    const double wr = 2 * pi * 1.2e9, T = 25e-6;
    auto err = [&](double x) {
        const double dz = x / T;
        return std::abs(double_diffraction_phase(wr, T, dz) - double_diffraction_expansion(wr, T, dz));
    };
    for (double x : {0.004, 0.002, 0.001}) {
        const double r = err(x) / err(0.5 * x);
        EXPECT_NEAR(r, 8.0, 0.25) << x;
    }
    EXPECT_LT(err(1e-3) / (8 / pi * wr * T), 1e-8);
}

TEST(Trajectories, ArmsCloseAtResonance) {
    TrapConfig trap;
    const double T = 25e-6;
    trap.omega_z = pi / (2 * T);
    const double k = 2 * 2 * pi / 1064e-9;
    auto st = ElectronState::from_k0(0.3 * k, trap);
    st.phi0 = 0.4;
    EXPECT_NEAR(st.A0 / (codata2010.hbar * 0.3 * k / (me * trap.omega_z)), 1.0, 1e-15);
    const double A = codata2010.hbar * k / (me * trap.omega_z);
    for (int arm : {1, 3})
        EXPECT_NEAR(trajectories(st, trap, k, T, arm, 3 * T).z, trajectories(st, trap, k, T, 2, 3 * T).z, 1e-12 * A);
    // arms 1 and 3 mirror each other about arm 2
    for (double t : {0.3 * T, 1.4 * T, 2.5 * T}) {
        const double z1 = trajectories(st, trap, k, T, 1, t).z, z2 = trajectories(st, trap, k, T, 2, t).z,
                     z3 = trajectories(st, trap, k, T, 3, t).z;
        EXPECT_NEAR(z1 + z3, 2 * z2, 1e-12 * A);
    }
    EXPECT_NEAR(trajectories(st, trap, k, T, 1, T).z - trajectories(st, trap, k, T, 2, T).z, A, 1e-12 * A);
    EXPECT_THROW(trajectories(st, trap, k, T, 4, 0.0), std::invalid_argument);
}

TEST(Anharmonic, RatioToReferencePhase) {
    TrapConfig trap;
    trap.d = 0.02;
    trap.D4 = 1e-4;
    const double k = 2 * 2 * pi / 1064e-9, wr = 2 * pi * 1.2e9, T = 2.8e-3;
    const double r = anharmonic_shift(trap, wr, T, k, 0.0, 0.0) / phi0_reference(wr, T);
    EXPECT_NEAR(r / 1e-4, 9934.3627780301661, 1e-8);
    // linear in D4, D3 drops out at k0 = 0
    trap.D3 = 3e-3;
    EXPECT_NEAR(anharmonic_shift(trap, wr, T, k, 0.0, 0.0) / phi0_reference(wr, T), r, 1e-12 * r);
    trap.D4 = 0.02;
    EXPECT_THROW(anharmonic_shift(trap, wr, T, k, 0.0, 0.0), PerturbationInvalid);
}

TEST(Closure, ElectronTemperatureLimit) {
    TrapConfig trap;
    trap.d = 0.1;
    trap.D4 = 1e-4;
    const double vr = codata2010.hbar * 1.2e7 / me, T = 25e-6;
    auto g = closure_gap_and_temperature(trap, vr, 0.0, T, 0.0);
    ASSERT_TRUE(g.Te_limit.has_value());
    EXPECT_NEAR(*g.Te_limit / 0.043502140918384843, 1.0, 1e-12);
    EXPECT_EQ(g.gap, 0.0);
    auto g2 = closure_gap_and_temperature(trap, vr, 2.0, T, 0.0);
    auto g3 = closure_gap_and_temperature(trap, vr, 4.0, 2 * T, 0.0);
    EXPECT_NEAR(g3.gap / g2.gap, 16.0, 1e-12);
    EXPECT_NEAR(closure_gap_and_temperature(trap, vr, 2.0, T, pi / 4).gap, 0.0, 1e-30);
    trap.D4 = 0.0;
    EXPECT_FALSE(closure_gap_and_temperature(trap, vr, 2.0, T, 0.3).Te_limit.has_value());
}

TEST(Damping, OptimumMatchesOracle) {
    auto o = damping_optimum(2 * pi * 1.2e9, 2 * pi * 1e-6);
    EXPECT_NEAR(o.T_opt / 0.002879117912261129, 1.0, 1e-12);
    EXPECT_NEAR(o.omega_z_opt / (2 * pi) / 86.832150546992119, 1.0, 1e-12);
    EXPECT_NEAR(o.Phi_opt / 55279063.915413677, 1.0, 1e-12);
    // 4T equals the damping-limited coherence time omega_z / (omega_r gamma)
    EXPECT_NEAR(4 * o.T_opt / (o.omega_z_opt / (2 * pi * 1.2e9 * 2 * pi * 1e-6)), 1.0, 1e-12);
    EXPECT_THROW(damping_optimum(1.0, 0.0), std::invalid_argument);
}

TEST(ChargedRabi, RatioToHydrogen) {
    const auto& K = codata2010;
    for (auto [lam, oracle] : {std::pair{1064e-9, 242.36471592916836}, std::pair{266e-9, 15.147794745573022}}) {
        auto r = charged_rabi(K.e, 1e6, 2 * pi * K.c / lam, me);
        EXPECT_NEAR(r.ratio_to_hydrogen / oracle, 1.0, 1e-12);
        EXPECT_NEAR(r.ratio_closed_form / r.ratio_to_hydrogen, 1.0, 1e-3);
    }
    auto a = charged_rabi(K.e, 1.0, 1e15, me), b = charged_rabi(K.e, 3.0, 1e15, me);
    EXPECT_NEAR(b.omega / a.omega, 3.0, 1e-14);
    EXPECT_THROW(charged_rabi(K.e, 0.0, 1e15, me), std::invalid_argument);
}
