#include "psmpm/benchmarks.hpp"
#include "psmpm/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace psmpm;

TEST(MmsExact, InitialStateAndPeriod)
{
    const MmsParameters p;
    EXPECT_NEAR(p.period(), 0.02, 1e-15);
    for (double x : {0.1, 0.37, 0.8}) {
        const MmsState s = mms_exact(x, 1.0 - x, 0.0);
        EXPECT_NEAR(s.u.norm(), 0.0, 1e-16);
        EXPECT_NEAR(s.dxx, 1.0, 1e-15);
        EXPECT_NEAR(s.dyy, 1.0, 1e-15);
        for (double t : {0.0013, 0.0071}) {
            const MmsState a = mms_exact(x, 0.3, t), b = mms_exact(x, 0.3, t + 0.02);
            EXPECT_NEAR((a.u - b.u).norm(), 0.0, 1e-14);
            EXPECT_NEAR(a.dxx, b.dxx, 1e-13);
        }
    }
    EXPECT_NEAR(mms_exact(0.25, 0.6, 0.005).u.x(), 0.05, 1e-15);
}

TEST(MmsExact, VelocityIsTimeDerivative)
{
    const double h = 1e-7;
    for (double t : {0.0, 0.003, 0.011}) {
        const Vec2 fd = (mms_exact(0.3, 0.7, t + h).u - mms_exact(0.3, 0.7, t - h).u) / (2 * h);
        EXPECT_LT((fd - mms_velocity(0.3, 0.7, t)).norm(), 1e-6 * mms_velocity(0.3, 0.7, 0.0).norm());
    }
}

TEST(MmsBodyForce, VanishesAtStartAndSwapsUnderReflection)
{
    EXPECT_NEAR(mms_body_force(0.3, 0.6, 0.0).norm(), 0.0, 1e-9);
    const double shift = M_PI / MmsParameters{}.omega();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double a = u(rng), b = u(rng), t = 0.02 * u(rng);
        const double gy = mms_body_force(a, b, t).y();
        const double gx = mms_body_force(b, a, t + shift).x();
        EXPECT_NEAR(gy, gx, 1e-9 * std::max(1.0, std::abs(gx)));
    }
}

TEST(MmsBodyForce, SpotValueAgainstScalarFormula)
{
    const double rho = 1e3, u0 = 0.05, e = 1e7, nu = 0.3;
    const double lambda = e * nu / ((1 + nu) * (1 - 2 * nu)), mu = e / (2 * (1 + nu));
    const double x = 0.25, y = 0.25, t = 0.005, w = std::sqrt(e / rho) * M_PI;
    const double ux = u0 * std::sin(2 * M_PI * x) * std::sin(w * t);
    const double dxx = 1 + 2 * u0 * M_PI * std::cos(2 * M_PI * x) * std::sin(w * t);
    const double dyy = 1 + 2 * u0 * M_PI * std::cos(2 * M_PI * y) * std::sin(w * t + M_PI);
    const double gx = M_PI * M_PI * ux *
                      (4 * mu / rho - e / rho - 4 * (lambda * (std::log(dxx * dyy) - 1) - mu) / (rho * dxx * dxx));
    EXPECT_NEAR(mms_body_force(x, y, t).x(), gx, 1e-9 * std::abs(gx));
}

TEST(MmsBodyForce, BalancesMomentumOfExactField)
{
    // rho0 d2u/dt2 = div_X P + rho0 g with P = J sigma F^-T from the model
    const MmsParameters p;
    const MaterialModel m = p.material();
    auto pk1_xx = [&](double x, double y, double t) {
        const MmsState s = mms_exact(x, y, t);
        const Mat2 f = Vec2(s.dxx, s.dyy).asDiagonal();
        const Mat2 pk = f.determinant() * m.stress(f) * f.inverse().transpose();
        return pk(0, 0);
    };
    auto pk1_yy = [&](double x, double y, double t) {
        const MmsState s = mms_exact(x, y, t);
        const Mat2 f = Vec2(s.dxx, s.dyy).asDiagonal();
        const Mat2 pk = f.determinant() * m.stress(f) * f.inverse().transpose();
        return pk(1, 1);
    };
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double hx = 1e-5, ht = 1e-6;
    for (int i = 0; i < 30; ++i) {
        const double x = u(rng), y = u(rng), t = 0.02 * u(rng);
        const Vec2 acc = (mms_exact(x, y, t + ht).u - 2.0 * mms_exact(x, y, t).u + mms_exact(x, y, t - ht).u) / (ht * ht);
        const double div_x = (pk1_xx(x + hx, y, t) - pk1_xx(x - hx, y, t)) / (2 * hx);
        const double div_y = (pk1_yy(x, y + hx, t) - pk1_yy(x, y - hx, t)) / (2 * hx);
        const Vec2 g = mms_body_force(x, y, t);
        const double scale = p.density * p.omega() * p.omega() * p.amplitude;
        EXPECT_LT(std::abs(p.density * acc.x() - div_x - p.density * g.x()), 1e-6 * scale);
        EXPECT_LT(std::abs(p.density * acc.y() - div_y - p.density * g.y()), 1e-6 * scale);
    }
}

TEST(RmsError, HandExamples)
{
    const Trajectories a{{Vec2(0, 0), Vec2(1, 1)}, {Vec2(2, 0), Vec2(0, 0)}};
    EXPECT_EQ(rms_error(a, a), 0.0);
    Trajectories shifted = a;
    for (auto& step : shifted)
        for (auto& x : step)
            x += Vec2(0.6, 0.8);
    EXPECT_NEAR(rms_error(shifted, a), 1.0, 1e-15);
    const Trajectories sim{{Vec2(0, 0), Vec2(0, 0)}, {Vec2(3, 0), Vec2(0, 4)}};
    const Trajectories zero{{Vec2(0, 0), Vec2(0, 0)}, {Vec2(0, 0), Vec2(0, 0)}};
    EXPECT_DOUBLE_EQ(rms_error(sim, zero), 2.5);
    EXPECT_THROW(rms_error(sim, Trajectories{zero[0]}), MismatchedSeries);
    EXPECT_THROW(rms_error(sim, Trajectories{zero[0], {Vec2(0, 0)}}), MismatchedSeries);
}

TEST(LogLogSlope, PowerLaws)
{
    EXPECT_NEAR(loglog_slope({0.25, 0.125, 0.0625}, {2.0 * std::pow(0.25, 3), 2.0 * std::pow(0.125, 3),
                                                     2.0 * std::pow(0.0625, 3)}),
                3.0, 1e-12);
    EXPECT_NEAR(loglog_slope({4, 8, 16}, {1.0 / 4, 1.0 / 8, 1.0 / 16}), -1.0, 1e-12);
    EXPECT_EQ(loglog_slope({1, 2}, {0, 0}), 0.0);
}

TEST(ConvergenceStudy, ExactStubGivesZeros)
{
    ConvergenceOptions opt;
    opt.runner = [](const BenchmarkSpec& s) {
        MmsRun r;
        r.dt = s.dt;
        r.h_measured = s.h;
        return r;
    };
    const auto report = convergence_study(BasisFamily::Hat, {0.5, 0.25}, {1, 4}, opt);
    ASSERT_EQ(report.rows.size(), 4u);
    for (const auto& row : report.rows) {
        EXPECT_EQ(row.rms_error, 0.0);
        EXPECT_GT(row.dt, 0.0);
    }
    EXPECT_EQ(report.slope, 0.0);
}

TEST(ConvergenceStudy, SlopeUsesLargestPpeAndIsThreadIndependent)
{
    ConvergenceOptions opt;
    opt.runner = [](const BenchmarkSpec& s) {
        MmsRun r;
        r.dt = s.dt;
        r.h_measured = s.h;
        r.rms_error = std::pow(s.h, 3) + (s.ppe < 4 ? 1.0 : 0.0);
        return r;
    };
    opt.threads = 1;
    const auto serial = convergence_study(BasisFamily::Hat, {0.5, 0.25}, {1, 4}, opt);
    EXPECT_NEAR(serial.slope, 3.0, 1e-12);
    opt.threads = 3;
    const auto parallel = convergence_study(BasisFamily::Hat, {0.5, 0.25}, {1, 4}, opt);
    ASSERT_EQ(parallel.rows.size(), serial.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i)
        EXPECT_EQ(parallel.rows[i].rms_error, serial.rows[i].rms_error);

    std::ostringstream csv;
    write_error_report(serial, csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "benchmark,basis,h,ppe,dt,rms_error,slope");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(ConvergenceStudy, ParticleSlopePerNominalH)
{
    ConvergenceOptions opt;
    opt.runner = [](const BenchmarkSpec& s) {
        MmsRun r;
        r.dt = s.dt;
        r.h_measured = s.h;
        r.rms_error = s.h * s.h / std::sqrt(double(s.ppe));
        return r;
    };
    const auto report = convergence_study(BasisFamily::Hat, {0.5, 0.25}, {1, 4, 16}, opt);
    ASSERT_EQ(report.particle_slopes.size(), 2u);
    for (const auto& [h, slope] : report.particle_slopes)
        EXPECT_NEAR(slope, -1.0, 1e-12) << h;
}

TEST(MmsSpec, CourantAndWholePeriod)
{
    const auto s = mms_spec(BasisFamily::PowellSabin, 0.25, 4, 0.2, 1, ParticleLayoutKind::PerElement);
    const auto setup = build_benchmark(s);
    EXPECT_NEAR(courant_number(s, setup.h_measured), 0.2, 0.2 * 0.05);
    EXPECT_LE(courant_number(s, setup.h_measured), 0.2 + 1e-12);
    const double steps = s.t_end / s.dt;
    EXPECT_NEAR(steps, std::round(steps), 1e-9);
    EXPECT_EQ(setup.particles.size(), 4u * setup.mesh->num_elements());
    EXPECT_NEAR(total_mass(setup.particles), 1e3, 1e-9);
}

TEST(MmsSpec, LatticeMatchesParticleBudget)
{
    const auto s = mms_spec(BasisFamily::Hat, 0.25, 16);
    const auto setup = build_benchmark(s);
    const double n = std::sqrt(16.0 * setup.mesh->num_elements());
    EXPECT_EQ(s.lattice_x, static_cast<int>(std::lround(n)));
    EXPECT_EQ(setup.particles.size(), static_cast<std::size_t>(s.lattice_x * s.lattice_y));
    EXPECT_NEAR(total_mass(setup.particles), 1e3, 1e-9);
}

TEST(BarSpec, ParametersAndInitialVelocity)
{
    const auto s = vibrating_bar_spec();
    EXPECT_NEAR(s.dt * std::sqrt(50.0 / 25.0) / 0.025, 0.283, 1e-3);
    EXPECT_NEAR(bar_amplitude(s), 0.0225, 1e-4);
    EXPECT_NEAR(bar_period(s), 1.414, 1e-3);
    const auto setup = build_benchmark(s);
    EXPECT_LT(courant_number(s, setup.h_measured), 1.0);
    for (const auto& p : setup.particles) {
        EXPECT_NEAR(p.v.x(), 0.1 * std::sin(M_PI * p.x0.x()), 1e-15);
        EXPECT_EQ(p.v.y(), 0.0);
    }
}

TEST(SoilSpec, GeometryAndStaticOracle)
{
    const auto s = soil_column_spec(MassMode::PartialLumped, 8);
    const auto setup = build_benchmark(s);
    EXPECT_EQ(setup.mesh->num_elements(), 18);
    // the top row starts empty
    for (const auto& p : setup.particles)
        EXPECT_LT(p.x.y(), 1.0);
    EXPECT_NEAR(total_mass(setup.particles), 100.0, 1e-9);
    EXPECT_NEAR(soil_static_stress(s, 0.0), -9810.0, 1e-9);
    // small-strain static displacement at mid height
    const double rho_g = s.density * -s.gravity.y();
    EXPECT_NEAR(rho_g / s.material.youngs_modulus * (0.5 - 0.125), 0.0368, 1e-4);
}

TEST(BarRun, EnergyDriftOverOnePeriod)
{
    auto s = vibrating_bar_spec();
    auto setup = build_benchmark(s);
    Simulation sim(setup.basis, setup.particles, setup.options);
    const double e0 = total_energy(sim.particles(), s.material);
    double worst = 0.0;
    while (sim.time() < bar_period(s))
    {
        sim.step();
        worst = std::max(worst, std::abs(total_energy(sim.particles(), s.material) - e0) / e0);
    }
    EXPECT_LT(worst, 0.05);
    EXPECT_EQ(total_mass(sim.particles()), total_mass(setup.particles));
}

TEST(Diagnostics, OscillationOfSampledSine)
{
    std::vector<double> t, v;
    for (int i = 0; i <= 2000; ++i) {
        t.push_back(i * 1e-3);
        v.push_back(0.3 * std::sin(2.0 * M_PI * t.back() / 0.7));
    }
    const auto osc = measure_oscillation(t, v);
    EXPECT_NEAR(osc.amplitude, 0.3, 1e-5);
    EXPECT_NEAR(osc.period, 0.7, 1e-5);
    EXPECT_EQ(measure_oscillation({0.0, 1.0}, {1.0, 2.0}).period, 0.0);
    EXPECT_THROW(measure_oscillation({0.0}, {1.0, 2.0}), MismatchedSeries);
}

TEST(Diagnostics, SignAlternations)
{
    EXPECT_EQ(count_sign_alternations({-3, -2, -1, 0, 1, 2, 3}, 0.02), 0);
    EXPECT_EQ(count_sign_alternations({0, 2, 1, 3, 2, 4}, 0.02), 4);
    // wiggles below the tolerance do not count
    EXPECT_EQ(count_sign_alternations({0, 1, 0.99, 2, 3}, 0.02), 0);
    EXPECT_EQ(count_sign_alternations({}, 0.02), 0);
}

TEST(Diagnostics, BinnedStressAndNearestParticle)
{
    std::vector<Particle> ps(4);
    const double xs[] = {0.1, 0.2, 0.6, 0.95};
    for (int i = 0; i < 4; ++i) {
        ps[i].x = ps[i].x0 = Vec2(xs[i], 0.5);
        ps[i].sigma(0, 0) = i;
    }
    const auto bins = binned_stress(ps, 0, 0, 0.0, 1.0, 4);
    ASSERT_EQ(bins.size(), 4u);
    EXPECT_DOUBLE_EQ(bins[0], 0.5);
    EXPECT_TRUE(std::isnan(bins[1]));
    EXPECT_DOUBLE_EQ(bins[2], 2.0);
    EXPECT_DOUBLE_EQ(bins[3], 3.0);
    EXPECT_EQ(nearest_particle(ps, Vec2(0.58, 0.4)), 2u);
    EXPECT_THROW(nearest_particle({}, Vec2::Zero()), ValidationError);
}

TEST(Diagnostics, SoilBottomStressAveragesLowestLayer)
{
    const auto s = soil_column_spec(MassMode::Lumped);
    std::vector<Particle> ps(3);
    ps[0].x0 = Vec2(0.05, 0.01);
    ps[0].sigma(1, 1) = -9000;
    ps[1].x0 = Vec2(0.05, 0.05);
    ps[1].sigma(1, 1) = -9500;
    ps[2].x0 = Vec2(0.05, 0.5);
    ps[2].sigma(1, 1) = -5000;
    EXPECT_DOUBLE_EQ(soil_bottom_stress(ps, s), -9250.0);
}

TEST(Diagnostics, TracedParticleOnCoarsePlate)
{
    auto s = mms_spec(BasisFamily::Hat, 0.25, 4);
    const auto traced = trace_mms_particle(s, Vec2(0.25, 0.47));
    EXPECT_LT((traced.x0 - Vec2(0.25, 0.47)).norm(), 0.1);
    EXPECT_GT(traced.max_stress_jump, 0.0);
    EXPECT_GT(traced.rms_error, 0.0);
    EXPECT_LT(traced.rms_error, 0.05);
    EXPECT_EQ(traced.run.steps, std::lround(s.t_end / s.dt));
}
