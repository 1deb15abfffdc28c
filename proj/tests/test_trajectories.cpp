#include <gtest/gtest.h>

#include <cmath>

#include "qtraj/spectral.hpp"
#include "qtraj/trajectories.hpp"

using namespace qtraj;

namespace {

Flow uniform_flow(double v)
{
    Flow f;
    f.velocity = [v](double, double) { return v; };
    f.q_min = -100;
    f.q_max = 100;
    return f;
}

} // namespace

TEST(Integrator, UniformMotion)
{
    for (auto method : {Method::RK4, Method::RK45}) {
        IntegratorConfig cfg;
        cfg.method = method;
        const auto r = integrate_trajectory(uniform_flow(1.0), 0.0, 0.0, 2.0, cfg);
        EXPECT_TRUE(r.completed);
        EXPECT_NEAR(r.last().t, 2.0, 1e-12);
        EXPECT_NEAR(r.last().q, 2.0, 1e-12);
    }
}

TEST(Integrator, ExponentialGrowthAccuracy)
{
    Flow f;
    f.velocity = [](double q, double) { return q; };
    f.q_min = 0;
    f.q_max = 100;
    const auto r = integrate_trajectory(f, 1.0, 0.0, 2.0);
    EXPECT_NEAR(r.last().q, std::exp(2.0), 1e-7);
}

TEST(Integrator, TimeReversalReturns)
{
    Flow f;
    f.velocity = [](double q, double t) { return std::sin(q) + 0.3 * std::cos(2 * t); };
    f.q_min = -50;
    f.q_max = 50;
    const auto fwd = integrate_trajectory(f, 0.4, 0.0, 3.0);
    const auto back = integrate_trajectory(f, fwd.last().q, 3.0, 0.0);
    EXPECT_NEAR(back.last().q, 0.4, 1e-7);
    EXPECT_LT(back.samples.back().t, back.samples.front().t);
}

TEST(Integrator, DomainExitEvent)
{
    Flow f = uniform_flow(1.0);
    f.q_max = 0.5;
    const auto r = integrate_trajectory(f, 0.0, 0.0, 2.0);
    EXPECT_FALSE(r.completed);
    ASSERT_TRUE(r.has_event(EventKind::DomainExit));
    EXPECT_NEAR(r.events.front().t, 0.5, 1e-6);
}

TEST(Integrator, UniformSampling)
{
    IntegratorConfig cfg;
    cfg.sample_dt = 0.25;
    const auto r = integrate_trajectory(uniform_flow(-0.5), 1.0, 0.0, 2.0, cfg);
    ASSERT_EQ(r.samples.size(), 9u);
    for (std::size_t k = 0; k < r.samples.size(); ++k)
        EXPECT_NEAR(r.samples[k].t, 0.25 * k, 1e-12);
}

TEST(Integrator, BadStart)
{
    EXPECT_THROW(integrate_trajectory(uniform_flow(1.0), 200.0, 0.0, 1.0), Error);
}

TEST(Trajectory, FreeParticleFloydBohmClassical)
{
    const auto spec = PotentialSpec::constant(0, -5, 5);
    const auto sys = make_continuum_system(spec, 0.5);
    IntegratorConfig cfg;
    cfg.sample_dt = 0.1;
    const auto floyd = integrate_trajectory(floyd_flow(VariationModel::continuum(sys)), -2.0, 0.0, 3.0, cfg);
    const auto bohm = integrate_trajectory(bohm_flow(sys), -2.0, 0.0, 3.0, cfg);
    const auto cl = integrate_trajectory(classical_flow(spec, 0.5), -2.0, 0.0, 3.0, cfg);
    ASSERT_EQ(floyd.samples.size(), bohm.samples.size());
    ASSERT_EQ(cl.samples.size(), bohm.samples.size());
    for (std::size_t k = 0; k < bohm.samples.size(); ++k) {
        EXPECT_NEAR(floyd.samples[k].q, bohm.samples[k].q, 1e-8);
        EXPECT_NEAR(cl.samples[k].q, bohm.samples[k].q, 1e-8);
        EXPECT_NEAR(bohm.samples[k].q, -2.0 + bohm.samples[k].t, 1e-9);
    }
}

TEST(Trajectory, RealEigenstateIsStationary)
{
    const auto spec = PotentialSpec::infinite_well(1.0);
    const auto eig = find_bound_eigenvalues(spec, Grid(0, 1, 2001), 2);
    const auto phase = phase_field(as_complex(eig[1].psi));
    for (double q : {0.1, 0.33, 0.77})
        EXPECT_EQ(bohm_velocity(phase, q), 0.0);
    const auto r = integrate_trajectory(bohm_flow(phase), 0.3, 0.0, 1.0);
    EXPECT_EQ(r.last().q, 0.3);
    EXPECT_EQ(r.last().dqde, 1.0);
}

TEST(Trajectory, StepFloydHitsSingularVelocity)
{
    const auto sys = make_continuum_system(PotentialSpec::step(0.75, -10, 10), 1.0);
    const auto r = integrate_trajectory(floyd_flow(VariationModel::continuum(sys)), -2.5, 0.0, 20.0);
    EXPECT_TRUE(r.has_event(EventKind::SingularVelocity));
    EXPECT_FALSE(r.completed);
}

TEST(Trajectory, QuantumTimeOfClassicalFlowIsTime)
{
    const auto spec = PotentialSpec::constant(0, -5, 5);
    IntegratorConfig cfg;
    cfg.sample_dt = 0.05;
    const auto r = quantum_time_along(integrate_trajectory(classical_flow(spec, 0.5), 0.0, 0.0, 1.0, cfg));
    for (const auto& s : r.samples)
        EXPECT_NEAR(s.t_q, s.t, 1e-12);
}

TEST(Trajectory, StepTimeDeformation)
{
    const auto sys = make_continuum_system(PotentialSpec::step(0.75, -10, 10), 1.0);
    const auto td = bohm_floyd_time_deformation(sys, -0.9, 2.0);
    ASSERT_FALSE(td.segments.empty());
    EXPECT_LT(td.max_discrepancy, 1e-4);
}

TEST(Trajectory, EpochIdentityAlongFloydPath)
{
    const auto sys = make_continuum_system(PotentialSpec::step(0.75, -10, 10), 1.0);
    const auto model = VariationModel::continuum(sys);
    IntegratorConfig cfg;
    cfg.sample_dt = 1e-3;
    const auto r = integrate_trajectory(floyd_flow(model), -0.9, 0.0, 1.0, cfg);
    EXPECT_LT(epoch_identity_check(model, r), 1e-3);
}

TEST(Trajectory, InitialKinematicsClassicalExact)
{
    const auto spec = PotentialSpec::harmonic(1.0, -5, 5);
    const auto eig = find_bound_eigenvalues(spec, Grid(-5, 5, 8001), 1);
    const auto ms = build_microstate(solution_pair(eig[0]), {2, 1, 0}, spec);
    const auto model = VariationModel::classical(ms);
    const auto k = microstate_initial_kinematics(model, 0.7);
    const auto loc = ms.local(0.7);
    EXPECT_DOUBLE_EQ(k.v0, loc.w_prime);
    EXPECT_NEAR(k.a0, loc.w_prime * loc.w_second, 1e-12 * std::abs(k.a0) + 1e-14);
}

TEST(Trajectory, InitialKinematicsAtPoleRaises)
{
    const auto f = make_variation_frame(PotentialSpec::infinite_well(1.0), Grid(0, 1, 2001), 1, 2, {2, 1, 0});
    const auto loc = f.local(0.3);
    const double t = (loc.delta_w + f.delta_alpha - std::numbers::pi / 2) / f.delta_e;
    try {
        microstate_initial_kinematics(VariationModel::beat(f), 0.3, t);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularKinematics);
    }
}

TEST(Spectral, PureToneBin)
{
    const std::size_t n = 512;
    const double dt = 0.01;
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = 2.0 + std::sin(2 * std::numbers::pi * 12.0 * k / n);
    const auto p = dominant_frequency(x, dt);
    EXPECT_EQ(p.bin, 12u);
    EXPECT_NEAR(p.frequency, 12.0 / (n * dt), 1e-12);
}
