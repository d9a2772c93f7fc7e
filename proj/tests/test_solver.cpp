#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "pmelab/barenblatt.hpp"
#include "pmelab/harness.hpp"
#include "pmelab/solver.hpp"

using namespace pmelab;

namespace {

Problem make(int n, double L, int N, double alpha, FluxModel f, InitialDatum u0,
             BoundaryPolicy b = BoundaryPolicy::zero_flux) {
    return Problem{Grid(n, L, N), alpha, 1.0, std::move(f), std::move(u0), b};
}

FluxModel random_flux(oracle::Gen& gen, int n) {
    switch (gen.integer(0, 3)) {
        case 0: return flux::zero(n);
        case 1: return flux::linear(n, gen.uniform(-2, 2));
        case 2: return flux::burgers(n);
        default: return flux::figure1(n, gen.uniform(0.5, 2.0));
    }
}

// Smooth random bump of either sign.
InitialDatum random_datum(oracle::Gen& gen) {
    const double a1 = gen.uniform(-1.5, 1.5), a2 = gen.uniform(-1.5, 1.5);
    const double c1 = gen.uniform(-2, 2), c2 = gen.uniform(-2, 2);
    const double w1 = gen.uniform(0.4, 1.5), w2 = gen.uniform(0.4, 1.5);
    return {"random", [=](const Point& x) {
                const double r1 = (x[0] - c1) * (x[0] - c1) + x[1] * x[1];
                const double r2 = (x[0] - c2) * (x[0] - c2) + x[1] * x[1];
                return a1 * std::exp(-r1 / (w1 * w1)) + a2 * std::exp(-r2 / (w2 * w2));
            }};
}

}  // namespace

TEST(StableDt, DiffusionOnly) {
    const Problem p = make(1, 1.0, 20, 1.0, flux::zero(1), initial::zero());
    SchemeConfig c;
    c.t_end = 100.0;
    std::vector<double> v(20, 0.0);
    v[7] = 1.0;
    v[8] = -0.5;
    EXPECT_NEAR(stable_dt(State(p.grid, 0.0, v), p, c), 0.0045, 1e-15);
}

TEST(StableDt, ZeroStateIsCappedByRemainingTime) {
    const Problem p = make(1, 1.0, 20, 1.0, flux::burgers(1), initial::zero());
    SchemeConfig c;
    c.t_end = 0.7;
    EXPECT_DOUBLE_EQ(stable_dt(State::zeros(p.grid, 0.2), p, c), 0.5);
}

TEST(StableDt, AdvectionAndDiffusionCombine) {
    // Burgers with |u| = 2 and dx = 1: 0.9 / (2*2/1 + 2*2^alpha/1).
    const Problem p = make(1, 5.0, 10, 0.5, flux::burgers(1), initial::zero());
    SchemeConfig c;
    c.t_end = 100.0;
    const State s(p.grid, 0.0, std::vector<double>(10, 2.0));
    EXPECT_NEAR(stable_dt(s, p, c), 0.9 / (4.0 + 2.0 * std::sqrt(2.0)), 1e-15);

    // With dx large the diffusive share vanishes: 0.9 * dx / (2*2).
    const Problem coarse = make(1, 5000.0, 10, 0.5, flux::burgers(1), initial::zero());
    const State sc(coarse.grid, 0.0, std::vector<double>(10, 2.0));
    c.t_end = 1e9;
    EXPECT_NEAR(stable_dt(sc, coarse, c) / coarse.grid.spacing(), 0.225, 1e-3);
}

TEST(Step, ZeroStaysZero) {
    oracle::Gen gen(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(1, 2);
        const Problem p = make(n, 3.0, 16, gen.uniform(0.3, 3), random_flux(gen, n), initial::zero(),
                               gen.integer(0, 1) ? BoundaryPolicy::zero_flux : BoundaryPolicy::dirichlet_zero);
        const State s = step(State::zeros(p.grid, 0.0), p, 0.01);
        for (double v : s.values) EXPECT_EQ(v, 0.0);
        EXPECT_DOUBLE_EQ(s.time, 0.01);
    }
}

TEST(Step, ConstantStateUnchanged) {
    for (int n : {1, 2}) {
        const Problem p = make(n, 3.0, 16, 1.3, flux::zero(n), initial::constant(0.7));
        SchemeConfig c;
        State s = sample_initial(p);
        for (int k = 0; k < 50; ++k) s = step(s, p, stable_dt(s, p, c));
        for (double v : s.values) EXPECT_NEAR(v, 0.7, 1e-15);
    }
}

TEST(Step, BlowUpReportsCell) {
    Problem p = make(1, 1.0, 8, 1.0, flux::zero(1), initial::constant(1.0));
    p.flux.f = [](const Point& x, double, double) {
        return Vec{x[0] > 0.5 ? std::numeric_limits<double>::infinity() : 0.0, 0.0};
    };
    try {
        step(sample_initial(p), p, 1e-3);
        FAIL() << "expected BlowUpError";
    } catch (const BlowUpError& e) {
        EXPECT_LT(e.cell(), 8u);
        EXPECT_NEAR(e.time(), 1e-3, 1e-18);
    }
}

TEST(Run, BlowUpReportsStep) {
    Problem p = make(1, 1.0, 8, 1.0, flux::zero(1), initial::constant(1.0));
    p.flux.f = [](const Point&, double t, double) {
        return Vec{t > 0.05 ? std::numeric_limits<double>::quiet_NaN() : 0.0, 0.0};
    };
    SchemeConfig c;
    c.t_end = 1.0;
    try {
        run(p, c);
        FAIL() << "expected BlowUpError";
    } catch (const BlowUpError& e) {
        EXPECT_GT(e.step(), 1);
    }
}

TEST(Run, ZeroDatumStaysZeroForEveryFlux) {
    for (int n : {1, 2})
        for (const auto& f : {flux::zero(n), flux::linear(n, 1.0), flux::burgers(n), flux::figure1(n, 1.5)}) {
            SchemeConfig c;
            c.t_end = 1.0;
            c.snapshot_times = {0.0, 0.5, 1.0};
            const RunResult r = run(make(n, 2.0, 10, 1.0, f, initial::zero()), c);
            ASSERT_EQ(r.snapshots.size(), 3u);
            for (const auto& s : r.snapshots)
                for (double v : s.values) EXPECT_EQ(v, 0.0);
        }
}

TEST(Run, SnapshotsLandExactly) {
    const Problem p = make(1, 5.0, 100, 1.0, flux::burgers(1), initial::gaussian());
    SchemeConfig c;
    c.t_end = 1.0;
    c.snapshot_times = {0.0, 0.1234, 0.5, 0.77777, 1.0};
    const RunResult r = run(p, c);
    ASSERT_EQ(r.snapshots.size(), c.snapshot_times.size());
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) EXPECT_EQ(r.snapshots[i].time, c.snapshot_times[i]);
    EXPECT_EQ(r.mass_series.size(), static_cast<std::size_t>(r.step_count) + 1);
    EXPECT_GT(r.min_dt, 0.0);
    EXPECT_LE(r.min_dt, r.max_dt);
    for (std::size_t i = 1; i < r.mass_series.size(); ++i) EXPECT_GT(r.mass_series[i].first, r.mass_series[i - 1].first);
}

TEST(Run, BudgetExhaustion) {
    SchemeConfig c;
    c.t_end = 1.0;
    c.max_steps = 3;
    EXPECT_THROW(run(make(1, 5.0, 200, 1.0, flux::zero(1), initial::gaussian()), c), BudgetError);
}

TEST(Run, RejectsBadConfig) {
    const Problem p = make(1, 5.0, 20, 1.0, flux::zero(1), initial::gaussian());
    SchemeConfig c;
    c.cfl_safety = 0.0;
    EXPECT_THROW(run(p, c), ParameterError);
    c.cfl_safety = 1.5;
    EXPECT_THROW(run(p, c), ParameterError);
    c.cfl_safety = 0.9;
    c.snapshot_times = {0.5, 0.2};
    EXPECT_THROW(run(p, c), ParameterError);
    c.snapshot_times = {0.5, 2.0};
    EXPECT_THROW(run(p, c), ParameterError);
    c.snapshot_times = {};
    c.t_end = 0.0;
    EXPECT_THROW(run(p, c), ParameterError);
}

TEST(Run, BoundaryMassIsFlagged) {
    SchemeConfig c;
    c.t_end = 0.5;
    const RunResult inside = run(make(1, 10.0, 200, 1.0, flux::zero(1), initial::gaussian()), c);
    EXPECT_FALSE(inside.boundary_flagged);
    const RunResult touching = run(make(1, 2.0, 40, 1.0, flux::zero(1), initial::constant(1.0)), c);
    EXPECT_TRUE(touching.boundary_flagged);
    EXPECT_GT(touching.boundary_mass_max, 1e-2);
}

TEST(Run, DirichletWallsDrainMass) {
    SchemeConfig c;
    c.t_end = 1.0;
    const RunResult r =
        run(make(1, 2.0, 40, 1.0, flux::zero(1), initial::constant(1.0), BoundaryPolicy::dirichlet_zero), c);
    EXPECT_LT(r.mass_series.back().second, r.mass_series.front().second * 0.99);
}

TEST(Properties, MassConservedWithZeroFluxWalls) {
    oracle::Gen gen(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = gen.integer(1, 2);
        const Problem p = make(n, 5.0, n == 1 ? gen.integer(20, 200) : gen.integer(10, 30), gen.uniform(0.3, 3.0),
                               random_flux(gen, n), random_datum(gen));
        SchemeConfig c;
        c.t_end = gen.uniform(0.05, 0.5);
        const RunResult r = run(p, c);
        double signed0 = 0.0;
        for (double v : r.initial.values) signed0 += v;
        double signed1 = 0.0;
        for (double v : r.snapshots.back().values) signed1 += v;
        const double scale = l1_mass(r.initial);
        EXPECT_NEAR(signed1 * p.grid.cell_volume(), signed0 * p.grid.cell_volume(), 1e-10 * scale) << p.flux.name;
    }
}

TEST(Properties, NonnegativeMassExactForZeroFlux) {
    oracle::Gen gen(43);
    for (int trial = 0; trial < 10; ++trial) {
        const Problem p = make(1, 8.0, gen.integer(50, 300), gen.uniform(0.3, 3.0), flux::zero(1),
                               initial::gaussian(gen.uniform(0.2, 2), gen.uniform(0.3, 1.5)));
        SchemeConfig c;
        c.t_end = 1.0;
        const RunResult r = run(p, c);
        const double m0 = r.mass_series.front().second;
        for (const auto& [t, m] : r.mass_series) ASSERT_NEAR(m, m0, 1e-10 * m0);
    }
}

TEST(Properties, ComparisonPrinciple) {
    oracle::Gen gen(44);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(1, 2);
        const Problem p = make(n, 4.0, n == 1 ? gen.integer(20, 120) : gen.integer(8, 24), gen.uniform(0.3, 3.0),
                               random_flux(gen, n), random_datum(gen),
                               gen.integer(0, 1) ? BoundaryPolicy::zero_flux : BoundaryPolicy::dirichlet_zero);
        const State lo = sample_initial(p);
        std::vector<double> hv = lo.values;
        for (double& v : hv) v += gen.uniform(0.0, 0.5);
        SchemeConfig c;
        c.t_end = gen.uniform(0.05, 0.5);
        double worst = 0.0;
        run_coupled(p, {lo, State(p.grid, lo.time, hv)}, c, [&](std::span<const State> s) {
            for (std::size_t i = 0; i < s[0].values.size(); ++i) worst = std::min(worst, s[1].values[i] - s[0].values[i]);
        });
        EXPECT_GE(worst, -1e-12) << p.flux.name;
    }
}

TEST(Properties, SignPreservation) {
    oracle::Gen gen(45);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(1, 2);
        const Problem p = make(n, 4.0, n == 1 ? 80 : 16, gen.uniform(0.3, 3.0), random_flux(gen, n),
                               initial::gaussian(gen.uniform(0.1, 2), gen.uniform(0.3, 1.5), gen.uniform(-1, 1)));
        SchemeConfig c;
        c.t_end = gen.uniform(0.05, 0.5);
        double worst = 0.0;
        run(p, c, [&](std::span<const State> s) {
            for (double v : s[0].values) worst = std::min(worst, v);
        });
        EXPECT_GE(worst, 0.0) << p.flux.name;
    }
}

TEST(Accuracy, BarenblattRefinement) {
    const BarenblattProfile b(1, 1.0, 1.0);
    std::vector<double> errs;
    for (int N : {200, 400, 800}) {
        Problem p = make(1, 20.0, N, 1.0, flux::zero(1), initial::barenblatt(b, 1.0));
        p.t_start = 1.0;
        SchemeConfig c;
        c.t_end = 2.0;
        const RunResult r = run(p, c);
        const State exact = sample_barenblatt(b, p.grid, 2.0);
        double e = 0.0;
        for (std::size_t i = 0; i < exact.values.size(); ++i) e += std::abs(exact.values[i] - r.snapshots.back().values[i]);
        errs.push_back(e * p.grid.cell_volume());
    }
    EXPECT_LT(errs[1], errs[0]);
    EXPECT_LT(errs[2], errs[1]);
    EXPECT_GE(std::log2(errs[1] / errs[2]), 0.9);
}

TEST(Accuracy, TwoDimensionalBarenblattKeepsSymmetryAndMass) {
    const BarenblattProfile b(2, 1.0, 1.0);
    Problem p = make(2, 6.0, 48, 1.0, flux::zero(2), initial::barenblatt(b, 1.0));
    p.t_start = 1.0;
    SchemeConfig c;
    c.t_end = 1.5;
    const RunResult r = run(p, c);
    const State& s = r.snapshots.back();
    const int N = 48;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double v = s.values[i + N * j];
            EXPECT_NEAR(v, s.values[j + N * i], 1e-13);
            EXPECT_NEAR(v, s.values[(N - 1 - i) + N * j], 1e-13);
        }
    EXPECT_NEAR(l1_mass(s), l1_mass(r.initial), 1e-12 * l1_mass(r.initial));
    const State exact = sample_barenblatt(b, p.grid, 1.5);
    EXPECT_NEAR(lq_norm(s, kInfNorm), lq_norm(exact, kInfNorm), 0.05 * lq_norm(exact, kInfNorm));
}
