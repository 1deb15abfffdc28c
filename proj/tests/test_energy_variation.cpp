#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qtraj/energy_variation.hpp"

using namespace qtraj;

namespace {

const VariationFrame& well_frame()
{
    static const VariationFrame f =
        make_variation_frame(PotentialSpec::infinite_well(1.0), Grid(0, 1, 4001), 1, 2, {2, 1, 0});
    return f;
}

const VariationFrame& oscillator_frame()
{
    static const VariationFrame f =
        make_variation_frame(PotentialSpec::harmonic(1.0, -5, 5), Grid(-5, 5, 8001), 0, 1, {1, 1, 0}, 0.3);
    return f;
}

} // namespace

TEST(BeatPeriod, ClosedForms)
{
    const double pi = std::numbers::pi;
    EXPECT_NEAR(beat_period(oracle::infinite_well_level(1, 1), oracle::infinite_well_level(2, 1)), 4.0 / (3.0 * pi),
                1e-15);
    EXPECT_NEAR(beat_period(0.5, 1.5), 2.0 * pi, 1e-15);
    EXPECT_NEAR(well_frame().beat_period(), 0.424413181578, 1e-9);
    EXPECT_NEAR(oscillator_frame().beat_period(), 2.0 * pi, 1e-6);
}

TEST(BeatPeriod, DegenerateEnergies)
{
    try {
        beat_period(1.25, 1.25);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateBeat);
    }
}

TEST(Variation, QuantumPotentialComplement)
{
    EXPECT_DOUBLE_EQ(delta_Q_delta_E(1.0), 0.0);
    EXPECT_DOUBLE_EQ(delta_Q_delta_E(0.25), 0.75);
    EXPECT_DOUBLE_EQ(delta_Q_delta_E(-2.0), 3.0);
    EXPECT_DOUBLE_EQ(quantum_mass(2.0, 0.5).m_q, 1.0);
}

TEST(Variation, FrameRequiresMatchingCoefficients)
{
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto eig = find_bound_eigenvalues(spec, Grid(0, 1, 2001), 2);
    const auto a = build_microstate(solution_pair(eig[0]), {2, 1, 0}, spec);
    const auto b = build_microstate(solution_pair(eig[1]), {1, 1, 0.5}, spec);
    EXPECT_THROW(make_variation_frame(a, b), Error);
    EXPECT_THROW(make_variation_frame(a, a), Error);
}

TEST(Variation, BeatFormAgainstBruteForce)
{
    std::mt19937_64 rng(11);
    for (const VariationFrame* f : {&well_frame(), &oscillator_frame()}) {
        const auto& g = f->ms_i.grid();
        const double span = g.q_max - g.q_min;
        std::uniform_real_distribution<double> uq(g.q_min + 0.1 * span, g.q_max - 0.1 * span);
        std::uniform_real_distribution<double> ut(0.0, f->beat_period());
        int n = 0;
        while (n < 10) {
            const double q = uq(rng), t = ut(rng);
            const auto b = delta_T_delta_E_discrete(*f, q, t);
            if (std::abs(b.cos_phase) < 0.2)
                continue;
            const double ref = oracle::brute_force_dtde(*f, q, t);
            EXPECT_NEAR(b.value, ref, 1e-4 * std::max(1.0, std::abs(ref))) << "q = " << q << " t = " << t;
            ++n;
        }
    }
}

TEST(Variation, PeriodicInBeatPeriod)
{
    const auto& f = well_frame();
    const double T = f.beat_period();
    for (double q : {0.2, 0.45, 0.8})
        for (double t : {0.01, 0.13, 0.3}) {
            const double a = delta_T_delta_E_discrete(f, q, t).value;
            const double b = delta_T_delta_E_discrete(f, q, t + T).value;
            EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a)));
        }
}

TEST(Variation, ReversedSignIsTimeReversal)
{
    const auto& f = oscillator_frame();
    const auto r = f.with_reversed_sign();
    for (double q : {-1.0, 0.4, 1.7})
        for (double t : {0.2, 1.1, 3.9}) {
            const double a = delta_T_delta_E_discrete(r, q, t).value;
            const double b = delta_T_delta_E_discrete(f, q, -t).value;
            EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(b)));
        }
}

TEST(Variation, PoleFlagged)
{
    const auto& f = well_frame();
    const double q = 0.3;
    const auto loc = f.local(q);
    // choose t so that the phase sits on pi/2
    const double t = (loc.delta_w / f.ms_i.units.hbar + f.delta_alpha - std::numbers::pi / 2) * f.ms_i.units.hbar
                     / f.delta_e;
    const auto b = delta_T_delta_E_discrete(f, q, t);
    EXPECT_TRUE(b.pole);
    EXPECT_TRUE(std::isnan(b.value));
    EXPECT_NE(b.divergence, 0);
    EXPECT_NEAR(beat_velocity(f, q, t), 0.0, 1e-6);
}

TEST(Variation, UnitCoefficientsGiveSteadyBeat)
{
    // constant W' in the well: no amplitude slope, dT/dE independent of t
    const auto f = make_variation_frame(PotentialSpec::infinite_well(1.0), Grid(0, 1, 2001), 1, 2, {1, 1, 0});
    const double a = delta_T_delta_E_discrete(f, 0.3, 0.0).value;
    const double b = delta_T_delta_E_discrete(f, 0.3, 0.17).value;
    EXPECT_NEAR(a, b, 1e-6 * std::abs(a));
}

TEST(Continuum, FreeParticleIsClassical)
{
    const auto sys = make_continuum_system(PotentialSpec::constant(0, -5, 5), 0.5);
    for (double q : {-4.0, 0.0, 2.5})
        EXPECT_NEAR(delta_T_delta_E_continuum(sys, q), 1.0, 1e-6);
}

TEST(Continuum, StepInterferenceChangesSign)
{
    const auto sys = make_continuum_system(PotentialSpec::step(0.75, -10, 10), 1.0);
    bool pos = false, neg = false;
    for (double q = -6.0; q < 0.0; q += 0.01) {
        const double v = delta_T_delta_E_continuum(sys, q);
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    EXPECT_TRUE(pos && neg);
    // transmitted side: single running wave, classical behavior in a flat region
    EXPECT_NEAR(delta_T_delta_E_continuum(sys, 3.0), 1.0, 1e-6);
}

TEST(Continuum, RejectsBoundFamily)
{
    EXPECT_THROW(make_continuum_system(PotentialSpec::infinite_well(1), 1.0), Error);
}

TEST(Model, DescribesItself)
{
    const auto m = VariationModel::beat(well_frame());
    EXPECT_NE(m.describe().find("DiscreteBeat"), std::string::npos);
    const auto p = m.at(0.3, 0.05);
    EXPECT_NEAR(p.action_gradient * p.w_prime / m.units().mass, p.dtde, 1e-12 * std::abs(p.dtde));
}
