#pragma once

#include "cogarch/cogarch.hpp"
#include "cogarch/grid.hpp"
#include "cogarch/levy.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cogarch::embedding {

/**
 * Discrete GARCH approximation on a grid:
 *   G_i   = G_{i-1} + σ_{i-1} √Δt_i ε_i
 *   σ²_i  = βΔt_i + (1 + φΔt_i ε_i²) e^{-ηΔt_i} σ²_{i-1}
 * Index i runs over 0..N; cell i (1-based) spans [t_{i-1}, t_i).
 */
struct EmbeddedSeries {
    Grid grid;
    levy::InnovationSet innovations;
    CogarchParams params;
    std::vector<double> g;
    std::vector<double> sigma2;
};

EmbeddedSeries embed(const levy::InnovationSet& innovations, const CogarchParams& params,
                     double sigma0_sq);

/// Max relative deviation between the recursive σ²_i and the product-sum
/// representation σ²_i = β Σ_j Δt_j Π_{k>j} a_k + σ²_0 Π_j a_j,
/// a_k = e^{-ηΔt_k}(1 + φΔt_k ε_k²).
double explicit_sigma_check(const EmbeddedSeries& series);

/// Piecewise-constant càdlàg lift: value index i on [t_i, t_{i+1}), value N at T.
BivariatePath lift(const EmbeddedSeries& series);

/// Knots (t_i, λ(t_i)) of the piecewise-linear time change λ_n: λ(0) = 0,
/// λ(t_i) = τ*_i = min(τ_i, t_i) for 0 < i < N, λ(T) = T.
struct TimeChange {
    std::vector<double> knots;
    std::vector<double> values;

    [[nodiscard]] double operator()(double t) const;
};
TimeChange time_change(const levy::InnovationSet& innovations);

struct SkorokhodBound {
    double sup_g = 0.0;
    double sup_sigma2 = 0.0;
    double mesh = 0.0;
    double bound = 0.0;
    /// A jump qualified in the last cell (the event the construction ignores).
    bool last_cell_jump = false;
};

/**
 * sup|G̃_n - G| + sup|σ̃²_n - σ²| + Δt(n), where the tilde processes carry the
 * embedded values re-timed to τ*_i. `exact` must contain every grid time of the
 * embedding and every jump time, with left limits.
 */
SkorokhodBound skorokhod_bound(const BivariatePath& embedded, const BivariatePath& exact,
                               const levy::InnovationSet& innovations);

struct LevelSummary {
    double mesh = 0.0;
    std::size_t cells = 0;
    double sup_g_median = 0.0;
    double sup_sigma2_median = 0.0;
    double bound_median = 0.0;
    /// Across-seed sample variance of σ̃²_n(T).
    double terminal_sigma2_variance = 0.0;
    std::size_t last_cell_jumps = 0;
    bool threshold_warning = false;
};

struct ConvergenceReport {
    std::vector<LevelSummary> levels;
    std::size_t seeds = 0;
    std::uint64_t master_seed = 0;
    bool monotone = true;
    /// bounds[level][seed]
    std::vector<std::vector<double>> bounds;
};

struct ConvergenceDesign {
    levy::LevySpec driver = levy::LevySpec::compound_poisson(1.0, levy::JumpDist::standard_normal());
    CogarchParams params;
    Sigma0Policy sigma0 = Sigma0Policy::stationary();
    double horizon = 100.0;
    /// Cell counts per level, strictly increasing, each a multiple of the previous.
    std::vector<std::size_t> cells;
    std::size_t seeds = 16;
    std::uint64_t master_seed = 1;
};

/// One driver path per seed, shared by every level of the ladder.
ConvergenceReport convergence_study(const ConvergenceDesign& design);

/// Uniform ladder T/Δt for each Δt.
std::vector<std::size_t> ladder_from_spacings(double horizon, const std::vector<double>& spacings);

}  // namespace cogarch::embedding
