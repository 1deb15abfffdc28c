#include <gtest/gtest.h>

#include <cmath>

#include "qtraj/qshje_microstates.hpp"

using namespace qtraj;

namespace {

RealField sampled(const Grid& g, double (*w)(double), double (*dw)(double))
{
    RealField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        f.values[i] = w(g.at(i));
        f.derivative[i] = dw(g.at(i));
    }
    return f;
}

Microstate well_state(int level, MicrostateCoefficients k, std::size_t n = 4001)
{
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto eig = find_bound_eigenvalues(spec, Grid(0, 1, n), level);
    return build_microstate(solution_pair(eig[level - 1]), k, spec);
}

} // namespace

TEST(Schwarzian, LogarithmAtOne)
{
    const Grid g(0.5, 1.5, 1001);
    const auto s = schwarzian(sampled(g, [](double q) { return std::log(q); }, [](double q) { return 1.0 / q; }));
    EXPECT_NEAR(s[g.nearest(1.0)], 0.5, 1e-4);
}

TEST(Schwarzian, LinearActionVanishes)
{
    const Grid g(-1, 1, 201);
    const auto s = schwarzian(sampled(g, [](double q) { return 2.5 * q; }, [](double) { return 2.5; }));
    for (double x : s) {
        if (!std::isnan(x)) {
            EXPECT_NEAR(x, 0.0, 1e-12);
        }
    }
}

TEST(Schwarzian, VanishingSlopeRaises)
{
    const Grid g(-1, 1, 201);
    try {
        schwarzian(sampled(g, [](double q) { return q * q * q; }, [](double q) { return 3 * q * q; }));
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularDerivative);
    }
}

TEST(BohmPotential, GaussianAmplitude)
{
    const Grid g(-3, 3, 601);
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        r[i] = std::exp(-0.5 * g.at(i) * g.at(i));
    const auto q = quantum_potential_bohm(g, r);
    EXPECT_NEAR(q.values[g.nearest(0.0)], 0.5, 1e-6);
}

TEST(Coefficients, NotPositiveDefinite)
{
    for (MicrostateCoefficients k : {MicrostateCoefficients{1, 1, 2}, MicrostateCoefficients{1, 1, 3},
                                     MicrostateCoefficients{0, 1, 0}, MicrostateCoefficients{1, -1, 0}}) {
        try {
            k.validate();
            FAIL() << k.a << " " << k.b << " " << k.c;
        }
        catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::InvalidCoefficients);
        }
    }
}

TEST(Microstate, ResidualSmallForWellLevels)
{
    for (int level : {1, 2})
        for (MicrostateCoefficients k : {MicrostateCoefficients{1, 1, 0}, MicrostateCoefficients{2, 1, 0},
                                         MicrostateCoefficients{1, 1, 0.5}})
            EXPECT_LT(qshje_residual(well_state(level, k)), 1e-6) << level << " " << k.a << " " << k.c;
}

TEST(Microstate, MisScaledPairFails)
{
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto eig = find_bound_eigenvalues(spec, Grid(0, 1, 2001), 1);
    BuildOptions raw;
    raw.calibrate = false;
    auto pair = solution_pair(eig[0]);
    for (auto* v : {&pair.theta.values, &pair.theta.derivative})
        for (auto& x : *v)
            x *= 3.0;
    pair.wronskian *= 3.0;
    const auto ms = build_microstate(pair, {1, 1, 0}, spec, {}, std::nullopt, raw);
    EXPECT_GT(qshje_residual(ms), 0.1 * eig[0].energy);
}

TEST(Microstate, CalibrationFailureReported)
{
    // a non-eigen energy in the well leaves a kink in phi
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto pair = solution_pair(spec, 7.0, Grid(0, 1, 2001));
    EXPECT_GT(pair.match_defect, 0.0);
    try {
        build_microstate(pair, {1, 1, 0}, spec);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CalibrationFailure);
    }
}

TEST(Microstate, AmplitudeTimesSlopeConstant)
{
    const auto ms = well_state(2, {2, 1, 0});
    const double ref = ms.r[10] * ms.r[10] * ms.w_prime.values[10];
    for (std::size_t i = 0; i < ms.r.size(); ++i)
        EXPECT_NEAR(ms.r[i] * ms.r[i] * ms.w_prime.values[i], ref, 1e-12 * std::abs(ref));
}

TEST(Microstate, SchwarzianMatchesBohmForm)
{
    const auto ms = well_state(1, {1, 1, 0.5});
    const auto qs = quantum_potential_schwarzian(ms);
    const auto qb = quantum_potential_bohm(ms.grid(), ms.r, ms.units);
    for (std::size_t i = 5; i + 5 < qs.size(); ++i) {
        if (!std::isnan(qb.values[i])) {
            EXPECT_NEAR(qs[i], qb.values[i], 1e-5);
        }
    }
}

TEST(Microstate, ConstantFormForUnitCoefficients)
{
    // (1,1,0) over the well eigenpair gives a constant F, hence constant W'
    const auto ms = well_state(1, {1, 1, 0});
    double lo = 1e300, hi = -1e300;
    for (double v : ms.w_prime.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_LT(hi - lo, 1e-6 * std::abs(hi));
}

TEST(Microstate, ReversedSign)
{
    const auto ms = well_state(1, {2, 1, 0});
    const auto rev = ms.with_reversed_sign();
    const double q = 0.37;
    EXPECT_DOUBLE_EQ(rev.local(q).w_prime, -ms.local(q).w_prime);
    EXPECT_DOUBLE_EQ(rev.local(q).w, -ms.local(q).w);
    EXPECT_LT(qshje_residual(rev), 1e-6);
}

TEST(Microstate, EigenfunctionIsBipolar)
{
    // a real eigenfunction splits into two running waves of equal weight
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto eig = find_bound_eigenvalues(spec, Grid(0, 1, 4001), 1);
    const auto ms = build_microstate(solution_pair(eig[0]), {2, 1, 0}, spec);
    const auto bw = bipolar_decomposition(ms, as_complex(eig[0].psi));
    EXPECT_LT(bw.fit_residual, 1e-8);
    EXPECT_NEAR(bw.scale_plus, bw.scale_minus, 1e-8 * bw.scale_plus);
}

TEST(Microstate, HarmonicGroundState)
{
    const auto spec = PotentialSpec::harmonic(1.0, -5, 5);
    const auto eig = find_bound_eigenvalues(spec, Grid(-5, 5, 8001), 1);
    const auto ms = build_microstate(solution_pair(eig[0]), {1, 1, 0}, spec);
    EXPECT_LT(qshje_residual(ms), 1e-6);
}
