#pragma once

#include "cogarch/grid.hpp"
#include "cogarch/levy.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cogarch {

/// COGARCH(1,1) parameters: dσ² = (β - ησ²(t-))dt + φσ²(t-)d[L,L](t).
struct CogarchParams {
    double beta = 1.0;
    double eta = 0.06;
    double phi = 0.0425;

    /// Throws ValidationError unless β > 0, η > 0, φ ≥ 0.
    void validate() const;
    [[nodiscard]] bool stationary() const noexcept { return eta > phi; }
    /// β/(η - φ); throws unless η > φ.
    [[nodiscard]] double stationary_mean() const;
};

/// How σ²(0) is chosen for a simulation.
struct Sigma0Policy {
    enum class Kind { Stationary, Fixed } kind = Kind::Stationary;
    double value = 0.0;

    static Sigma0Policy stationary() { return {}; }
    static Sigma0Policy fixed(double v) { return {Kind::Fixed, v}; }
    [[nodiscard]] double resolve(const CogarchParams& params) const;
};

enum class PathFlavor { ExactAtEvents, EmbeddedPiecewiseConstant, EulerOracle };
std::string_view to_string(PathFlavor flavor);

/**
 * Sampled (G, σ²) trajectory. Values are right-continuous; g_left/sigma2_left
 * hold the left limits, which differ from the values only at jump times.
 */
struct BivariatePath {
    PathFlavor flavor = PathFlavor::ExactAtEvents;
    std::vector<double> times;
    std::vector<double> g;
    std::vector<double> sigma2;
    std::vector<double> g_left;
    std::vector<double> sigma2_left;
    std::vector<bool> at_jump;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] double horizon() const { return times.back(); }
    /// Step-function lookup: value at the last stored time ≤ t.
    [[nodiscard]] std::size_t index_at(double t) const;
    /// Restriction to the stored times that belong to `grid` (up to tol).
    [[nodiscard]] BivariatePath restrict_to(const Grid& grid, double tol = 1e-9) const;

    void push(double t, double g_value, double s2, double g_before, double s2_before, bool jump);
};

/// σ²(t) = (β∫₀ᵗ e^{X(s)}ds + σ²(0)) e^{-X(t)}, integrated segment by segment
/// between jumps, where X is linear. Includes a jump at exactly t.
double exact_variance(const levy::LevyPath& path, const CogarchParams& params, double t,
                      double sigma0_sq);

/// Exact (G, σ²) at every grid time and every jump time. G is the finite sum
/// Σ σ(s-)ΔL(s); a Brownian part contributes Σ σ(t_k)ς ΔB_k on its mesh.
BivariatePath simulate_exact(const levy::LevyPath& path, const CogarchParams& params,
                             const Grid& sample_times, double sigma0_sq);

/// Explicit Euler for the variance SDE with step `step`, landing exactly on
/// jump times; pre-jump σ² drives both the jump update and G. Sampled at
/// `sample_times` and at jumps.
BivariatePath euler_oracle(const levy::LevyPath& path, const CogarchParams& params, double step,
                           const Grid& sample_times, double sigma0_sq);

/// β/(η - φ), the stationary mean of σ². The seed is unused: the mean is
/// deterministic. Kept for interface symmetry with random initializations.
double stationary_sigma0(const CogarchParams& params, std::uint64_t seed = 0);

}  // namespace cogarch
