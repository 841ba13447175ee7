#pragma once

#include "cogarch/cogarch.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace cogarch::pml {

/// Observation times t_0 < ... < t_N (shifted so t_0 = 0) and returns
/// Y_i = G(t_i) - G(t_{i-1}), i = 1..N.
struct ReturnsSeries {
    std::vector<double> times;
    std::vector<double> returns;

    /// Throws ValidationError on non-increasing times, size mismatch or N < min_returns.
    /// Fitting needs N ≥ 3; evaluating the likelihood needs only N ≥ 1.
    void validate(std::size_t min_returns = 3) const;
    [[nodiscard]] std::size_t size() const noexcept { return returns.size(); }
    [[nodiscard]] double horizon() const { return times.back() - times.front(); }
    [[nodiscard]] std::vector<double> spacings() const;

    /// Differences of a level series (e.g. sampled G) at the given times.
    static ReturnsSeries from_levels(std::span<const double> times, std::span<const double> levels);
};

enum class VarianceMode { Exact, FirstOrder };
std::string_view to_string(VarianceMode mode);

enum class WeightKind { Identity, Constant, LogParametric, PerDeltaT };
std::string_view to_string(WeightKind kind);

/**
 * Reweighting of the spacings subject to Σ_i w(Δt_i) = T.
 *   Identity:      w(Δt) = Δt
 *   Constant:      w(Δt) = T/N
 *   LogParametric: w(Δt) = γ log Δt + c(γ), c(γ) = (T - γ Σ log Δt_i)/N
 *   PerDeltaT:     w(d_k) ∝ multiplier_k for each distinct spacing d_k
 */
struct WeightScheme {
    WeightKind kind = WeightKind::Identity;
    double gamma = 0.0;
    /// (distinct spacing, positive raw multiplier), only for PerDeltaT.
    std::vector<std::pair<double, double>> multipliers;

    static WeightScheme identity() { return {}; }
    static WeightScheme constant() { return {WeightKind::Constant, 0.0, {}}; }
    static WeightScheme log_parametric(double gamma) { return {WeightKind::LogParametric, gamma, {}}; }
    static WeightScheme per_delta_t(std::vector<std::pair<double, double>> multipliers) {
        return {WeightKind::PerDeltaT, 0.0, std::move(multipliers)};
    }
};

/// Weighted spacings; throws ValidationError("weight positivity violated") if any w ≤ 0.
std::vector<double> weight_apply(const WeightScheme& scheme, std::span<const double> spacings);

/// Conditional variance of the next return given σ²(t_{i-1}):
///   Exact:      (σ² - β/(η-φ))·(e^{(η-φ)Δt} - 1)/(η-φ) + βΔt/(η-φ)
///   FirstOrder: σ²·Δt
double conditional_variance(double sigma2_prev, double dt, const CogarchParams& params,
                            VarianceMode mode);

/// σ²_i = βΔt + e^{-ηΔt}σ²_{i-1} + φe^{-ηΔt}Y².
double volatility_recursion(double sigma2_prev, double dt, double y, const CogarchParams& params);

/// Gaussian pseudo-log-likelihood with σ² started at β/(η-φ). Returns -inf when
/// η ≤ φ or any intermediate is non-positive or non-finite.
double pseudo_log_likelihood(const ReturnsSeries& series, const CogarchParams& params,
                             VarianceMode mode, const WeightScheme& weights = WeightScheme::identity());

struct FitConfig {
    VarianceMode mode = VarianceMode::FirstOrder;
    std::size_t restarts = 10;
    double xtol = 1e-14;
    std::size_t max_iterations = 20000;
    std::uint64_t seed = 1;
    double floor = 1e-12;
    bool standard_errors = true;
};

struct FitResult {
    CogarchParams estimates;
    double log_likelihood = 0.0;
    /// (β, η, φ) order. Valid only when se_available.
    std::array<double, 3> standard_errors{};
    bool se_available = false;
    std::size_t restarts = 0;
    std::size_t finite_restarts = 0;
    std::size_t iterations = 0;
    double spread = 0.0;
    bool converged = false;
    bool hit_floor = false;
    bool stationary = false;
    std::vector<double> filtered_variance;
};

/// Multi-start Nelder–Mead in (log β, log η, log φ).
FitResult fit(const ReturnsSeries& series, const FitConfig& config = {});

struct WarmStart {
    CogarchParams params;
    WeightScheme scheme;
};

struct WeightedFit {
    FitResult fit;
    WeightScheme scheme;
    std::size_t extra_parameters = 0;
};

/// Joint optimization of (β, η, φ) and the scheme's free parameters (γ, or one
/// log-multiplier per distinct spacing beyond the first). Warm starts whose
/// weights the family can represent are added as extra starting simplices.
WeightedFit fit_weighted(const ReturnsSeries& series, WeightKind kind, const FitConfig& config = {},
                         std::span<const WarmStart> warm_starts = {});

/// Negative Hessian of L_N in (β, η, φ) by central differences with relative
/// step h = 1e-5·|x| (absolute 1e-5 for a zero coordinate).
std::array<std::array<double, 3>, 3> likelihood_hessian(const ReturnsSeries& series,
                                                        const CogarchParams& at, VarianceMode mode,
                                                        const WeightScheme& weights);

enum class FilterForm {
    /// σ̂²_i = β + (1 - η)σ̂²_{i-1} + φY_i², unit-spacing form.
    UnitSpacing,
    /// σ̂²_i = βΔt_i + e^{-ηΔt_i}σ̂²_{i-1} + φe^{-ηΔt_i}Y_i².
    SpacingAware,
};

/// Filtered variances σ̂²_0..σ̂²_N started at β/(η-φ).
std::vector<double> filter_volatility(const ReturnsSeries& series, const CogarchParams& estimates,
                                      FilterForm form = FilterForm::UnitSpacing);

/// Discrete GARCH(1,1) parameters implied over a spacing Δt.
struct GarchEquivalent {
    double omega;  // βΔt²
    double theta;  // φe^{-ηΔt}Δt
    double kappa;  // e^{-ηΔt}

    [[nodiscard]] double annualized_omega_root(double days_per_year = 365.0) const;
};
GarchEquivalent transform_to_garch(const CogarchParams& params, double dt);

/// sqrt(365 β/(η - φ)).
double long_run_volatility(const CogarchParams& params, double days_per_year = 365.0);

}  // namespace cogarch::pml
