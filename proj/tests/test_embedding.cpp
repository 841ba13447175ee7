#include "cogarch/cogarch.hpp"
#include "cogarch/embedding.hpp"
#include "cogarch/error.hpp"
#include "cogarch/levy.hpp"
#include "cogarch/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cogarch;
using namespace cogarch::embedding;

namespace {

const CogarchParams kTable2{1.0, 0.06, 0.0425};

levy::LevySpec unit_poisson() {
    return levy::LevySpec::compound_poisson(1.0, levy::JumpDist::standard_normal());
}

/// Innovation set with prescribed ε on a grid (marks chosen so ε comes out as given).
levy::InnovationSet with_epsilons(const Grid& grid, const std::vector<double>& eps) {
    levy::InnovationSet set{grid, 0.0, {}};
    for (double e : eps) set.cells.push_back({std::numeric_limits<double>::infinity(), e, 0.0, 1.0, e});
    return set;
}

}  // namespace

TEST(Embed, NoiselessGeometricSum) {
    const std::size_t n = 30;
    const double dt = 0.5;
    const Grid grid = Grid::uniform(n * dt, n);
    const EmbeddedSeries s = embed(with_epsilons(grid, std::vector<double>(n, 0.0)), kTable2, 20.0);
    ASSERT_EQ(s.g.size(), n + 1);
    const double c = std::exp(-kTable2.eta * dt);
    for (std::size_t i = 0; i <= n; ++i) {
        const double ci = std::pow(c, static_cast<double>(i));
        const double want = kTable2.beta * dt * (1.0 - ci) / (1.0 - c) + 20.0 * ci;
        EXPECT_NEAR(s.sigma2[i] / want, 1.0, 1e-13);
        EXPECT_EQ(s.g[i], 0.0);
    }
}

TEST(Embed, SingleCellHandValues) {
    const Grid grid({0.0, 0.7});
    const EmbeddedSeries s = embed(with_epsilons(grid, {1.3}), kTable2, 9.0);
    EXPECT_DOUBLE_EQ(s.g[1], 3.0 * std::sqrt(0.7) * 1.3);
    EXPECT_NEAR(s.sigma2[1], 0.7 + (1.0 + 0.0425 * 0.7 * 1.69) * std::exp(-0.06 * 0.7) * 9.0, 1e-14);
    EXPECT_LE(explicit_sigma_check(s), 1e-15);
}

TEST(Embed, TextbookGarchMapping) {
    // Equal spacing: σ²_i = a + bσ²_{i-1}ε²_i + cσ²_{i-1} with a = βΔt, b = φΔt e^{-ηΔt}, c = e^{-ηΔt}.
    const double dt = 0.25;
    const std::size_t n = 500;
    Rng rng(5);
    std::normal_distribution<double> z;
    std::vector<double> eps(n);
    for (double& e : eps) e = z(rng);
    const EmbeddedSeries s = embed(with_epsilons(Grid::uniform(n * dt, n), eps), kTable2, 50.0);
    const double a = kTable2.beta * dt;
    const double b = kTable2.phi * dt * std::exp(-kTable2.eta * dt);
    const double c = std::exp(-kTable2.eta * dt);
    double sig = 50.0;
    for (std::size_t i = 1; i <= n; ++i) {
        sig = a + b * sig * eps[i - 1] * eps[i - 1] + c * sig;
        EXPECT_NEAR(s.sigma2[i] / sig, 1.0, 1e-13);
        EXPECT_GT(s.sigma2[i], 0.0);
    }
}

TEST(Embed, ExplicitRepresentationIdentity) {
    Rng rng(1);
    std::exponential_distribution<double> gap(4.0);
    std::normal_distribution<double> z;
    std::vector<double> spacings(10000), eps(10000);
    for (double& d : spacings) d = 1e-3 + gap(rng);
    for (double& e : eps) e = z(rng);
    const EmbeddedSeries s = embed(with_epsilons(Grid::from_spacings(spacings), eps), kTable2, 30.0);
    EXPECT_LE(explicit_sigma_check(s), 1e-8);
}

TEST(Lift, HalfOpenCellsAndOrigin) {
    const Grid grid = Grid::uniform(3.0, 3);
    const EmbeddedSeries s = embed(with_epsilons(grid, {1.0, -2.0, 0.5}), kTable2, 10.0);
    const BivariatePath lifted = lift(s);
    EXPECT_EQ(lifted.g[lifted.index_at(0.0)], 0.0);
    EXPECT_EQ(lifted.g[lifted.index_at(1.0)], s.g[1]);
    EXPECT_EQ(lifted.g[lifted.index_at(1.5)], s.g[1]);
    EXPECT_EQ(lifted.g[lifted.index_at(std::nextafter(3.0, 0.0))], s.g[2]);
    EXPECT_EQ(lifted.sigma2[lifted.index_at(3.0)], s.sigma2[3]);
}

TEST(TimeChange, ValidHomeomorphism) {
    const levy::LevySpec spec = unit_poisson();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const levy::LevyPath p = levy::simulate_levy_path(spec, 40.0, seed);
        const Grid grid = Grid::uniform(40.0, 80);
        const TimeChange lambda = time_change(levy::extract_innovations(p, grid, 0.0, spec));
        EXPECT_EQ(lambda(0.0), 0.0);
        EXPECT_EQ(lambda(40.0), 40.0);
        double prev = -1.0;
        for (double t = 0.0; t <= 40.0; t += 0.01) {
            const double v = lambda(t);
            EXPECT_GT(v, prev);
            EXPECT_LE(std::abs(v - t), grid.mesh() + 1e-12);
            prev = v;
        }
    }
}

TEST(Skorokhod, IdenticalPathsGiveMesh) {
    // No jumps and β-only dynamics evaluated on the same grid: the tilde process
    // equals the exact one at every sample, leaving only the mesh term for G.
    levy::LevyPath none;
    none.horizon = 10.0;
    const levy::LevySpec spec = unit_poisson();
    const Grid grid = Grid::uniform(10.0, 10);
    const levy::InnovationSet innov = levy::extract_innovations(none, grid, 0.0, spec);
    const BivariatePath exact = simulate_exact(none, kTable2, grid, 5.0);
    BivariatePath copy = exact;
    copy.flavor = PathFlavor::EmbeddedPiecewiseConstant;
    const SkorokhodBound b = skorokhod_bound(copy, exact, innov);
    EXPECT_EQ(b.sup_g, 0.0);
    EXPECT_DOUBLE_EQ(b.mesh, 1.0);
    // σ² relaxes inside a cell, so the left limit differs from the held value;
    // the gap is largest in the first cell where σ² is furthest from β/η.
    EXPECT_NEAR(b.sup_sigma2, std::abs(exact.sigma2[0] - exact.sigma2_left[1]), 1e-12);
}

TEST(Skorokhod, NoJumpsConvergesToZero) {
    levy::LevyPath none;
    none.horizon = 10.0;
    const levy::LevySpec spec = unit_poisson();
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t cells : {10u, 40u, 160u, 640u}) {
        const Grid grid = Grid::uniform(10.0, cells);
        const levy::InnovationSet innov = levy::extract_innovations(none, grid, 0.0, spec);
        const BivariatePath exact = simulate_exact(none, kTable2, grid, 80.0);
        const SkorokhodBound b = skorokhod_bound(lift(embed(innov, kTable2, 80.0)), exact, innov);
        EXPECT_EQ(b.sup_g, 0.0);
        EXPECT_LT(b.bound, prev);
        prev = b.bound;
    }
    EXPECT_LT(prev, 0.1);
}

TEST(Skorokhod, MismatchedHorizons) {
    const levy::LevySpec spec = unit_poisson();
    const levy::LevyPath p = levy::simulate_levy_path(spec, 10.0, 1);
    const Grid grid = Grid::uniform(10.0, 10);
    const levy::InnovationSet innov = levy::extract_innovations(p, grid, 0.0, spec);
    const BivariatePath exact = simulate_exact(p, kTable2, Grid::uniform(5.0, 5), 5.0);
    EXPECT_THROW(skorokhod_bound(lift(embed(innov, kTable2, 5.0)), exact, innov), ValidationError);
}

TEST(Convergence, OneLevelIsTriviallyMonotone) {
    ConvergenceDesign d;
    d.params = kTable2;
    d.cells = {100};
    d.seeds = 4;
    const ConvergenceReport r = convergence_study(d);
    EXPECT_TRUE(r.monotone);
    ASSERT_EQ(r.levels.size(), 1u);
}

TEST(Convergence, RejectsNonRefiningLadder) {
    ConvergenceDesign d;
    d.cells = {100, 150};
    EXPECT_THROW(convergence_study(d), ValidationError);
    EXPECT_THROW(ladder_from_spacings(100.0, {0.3}), ValidationError);
    EXPECT_EQ(ladder_from_spacings(100.0, {1.0, 0.5, 0.25, 0.125}), (std::vector<std::size_t>{100, 200, 400, 800}));
}

TEST(Convergence, SharedPathLadder) {
    ConvergenceDesign d;
    d.params = kTable2;
    d.horizon = 100.0;
    d.cells = ladder_from_spacings(100.0, {1.0, 0.5, 0.25, 0.125});
    d.seeds = 50;
    d.master_seed = 1;
    const ConvergenceReport r = convergence_study(d);
    EXPECT_TRUE(r.monotone);
    std::size_t improved = 0;
    for (std::size_t s = 0; s < d.seeds; ++s) {
        if (r.bounds.back()[s] < r.bounds.front()[s]) ++improved;
        for (std::size_t l = 0; l < r.levels.size(); ++l) {
            EXPECT_GE(r.bounds[l][s], r.levels[l].mesh);
        }
    }
    EXPECT_GE(improved, 45u);
}

TEST(Convergence, Reproducible) {
    ConvergenceDesign d;
    d.cells = {50, 100};
    d.horizon = 50.0;
    d.seeds = 3;
    const ConvergenceReport a = convergence_study(d);
    const ConvergenceReport b = convergence_study(d);
    EXPECT_EQ(a.bounds, b.bounds);
}

TEST(Convergence, PureDiffusionDeterministicVolatilityLimit) {
    ConvergenceDesign d;
    d.driver = levy::LevySpec::pure_diffusion();
    d.params = kTable2;
    d.horizon = 10.0;
    d.cells = {10, 40, 160, 640};
    d.seeds = 16;
    const ConvergenceReport r = convergence_study(d);
    for (std::size_t l = 1; l < r.levels.size(); ++l) {
        EXPECT_LT(r.levels[l].terminal_sigma2_variance, r.levels[l - 1].terminal_sigma2_variance);
    }
    // The discretization noise variance scales like Δt, a factor 64 across this ladder.
    EXPECT_LT(r.levels.back().terminal_sigma2_variance, 0.2 * r.levels.front().terminal_sigma2_variance);
}
