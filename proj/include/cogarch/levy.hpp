#pragma once

#include "cogarch/grid.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cogarch {

struct CogarchParams;

namespace levy {

/// Symmetric jump-size law. Normal(scale) has standard deviation `scale`;
/// TwoPoint(scale) puts mass 1/2 on each of +scale and -scale.
class JumpDist {
public:
    enum class Law { Normal, TwoPoint };

    static JumpDist standard_normal() { return JumpDist(Law::Normal, 1.0); }
    static JumpDist scaled_normal(double sd);
    static JumpDist two_point(double a);

    [[nodiscard]] Law law() const noexcept { return law_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] JumpDist rescaled(double factor) const;

    /// P(|J| > m).
    [[nodiscard]] double tail_probability(double m) const;
    /// E[J^k ; |J| > m] for k = 1, 2.
    [[nodiscard]] double truncated_moment(int k, double m) const;
    [[nodiscard]] double second_moment() const noexcept { return scale_ * scale_; }

    template <class Urbg>
    double sample(Urbg& g) const;

private:
    JumpDist(Law law, double scale) : law_(law), scale_(scale) {}
    Law law_;
    double scale_;
};

enum class DriverKind { CompoundPoisson, JumpDiffusion, PureDiffusion };

/**
 * Centered, unit-variance Lévy driver: a compound Poisson jump part, optionally
 * plus a Brownian part with scale ς.
 *
 * Construction rescales the jump law so that E L(1) = 0 and E L(1)^2 = 1,
 * i.e. ς² + rate·E[J²] = 1.
 */
class LevySpec {
public:
    static LevySpec compound_poisson(double rate, JumpDist jumps);
    static LevySpec jump_diffusion(double diffusion_scale, double rate, JumpDist jumps);
    /// L = B. Only meaningful for the deterministic-volatility limit check.
    static LevySpec pure_diffusion();

    [[nodiscard]] DriverKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool has_jumps() const noexcept { return kind_ != DriverKind::PureDiffusion; }
    [[nodiscard]] double rate() const noexcept { return rate_; }
    [[nodiscard]] const JumpDist& jumps() const noexcept { return jumps_; }
    [[nodiscard]] double diffusion_scale() const noexcept { return diffusion_scale_; }

    /// E L(1) from the closed-form jump moments.
    [[nodiscard]] double mean() const;
    /// E L(1)^2 from the closed-form jump moments.
    [[nodiscard]] double second_moment() const;

    /// Π̄(m) = Π{|x| > m}.
    [[nodiscard]] double tail(double m) const;
    /// ∫_{|x|>m} x^k Π(dx) for k = 1, 2.
    [[nodiscard]] double jump_moment(int k, double m) const;

private:
    LevySpec(DriverKind kind, double rate, JumpDist jumps, double diffusion_scale)
        : kind_(kind), rate_(rate), jumps_(jumps), diffusion_scale_(diffusion_scale) {}

    DriverKind kind_;
    double rate_;
    JumpDist jumps_;
    double diffusion_scale_;
};

struct Jump {
    double time;
    double size;
};

/// A realized driver path on [0, T]. The Brownian part, when present, is stored
/// as B at the times of `diffusion_mesh`.
struct LevyPath {
    double horizon = 0.0;
    std::vector<Jump> jumps;
    std::optional<Grid> diffusion_mesh;
    std::vector<double> brownian;
    double diffusion_scale = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] bool has_diffusion() const noexcept { return !brownian.empty(); }
    /// ς·(B(b) - B(a)) for mesh-aligned a < b.
    [[nodiscard]] double diffusion_increment(double a, double b) const;
};

/// Simulates a driver path on (0, T]. Deterministic in (spec, horizon, seed).
/// If the driver has a Brownian part and no mesh is given, a uniform mesh of
/// step 1/1024 is used, so dyadic grids down to that step are coarsenings of it.
LevyPath simulate_levy_path(const LevySpec& spec, double horizon, std::uint64_t seed,
                            const std::optional<Grid>& diffusion_mesh = std::nullopt);

/// Tail function stub for drivers without a shipped sampler (infinite activity).
using TailFunction = std::function<double(double)>;

struct ThresholdChoice {
    double m = 0.0;
    bool rate_condition_met = true;
    std::string warning;
};

inline constexpr double kThresholdTolerance = 0.01;

/// Truncation level for the first-jump construction. Finite-activity drivers
/// keep every jump (m = 0); the warning reports whether Δt(n)·Π̄(0)² ≤ θ.
ThresholdChoice choose_threshold(const Grid& grid, const LevySpec& spec,
                                 double tolerance = kThresholdTolerance);
/// Smallest m on a fixed ladder 1 ≥ m ≥ 1e-6 with Δt(n)·Π̄(m)² ≤ θ.
ThresholdChoice choose_threshold(const Grid& grid, const TailFunction& tail,
                                 double tolerance = kThresholdTolerance);

struct InnovationMoments {
    double mean;      // ν
    double variance;  // ξ²
};

/// Mean and variance of the first-jump mark 1{τ<∞}ΔL(τ) over a cell of length dt,
/// plus ς²·dt when the driver has a Brownian part.
InnovationMoments innovation_moments(const LevySpec& spec, double dt, double m);

struct InnovationCell {
    double tau;   // first qualifying jump time in [t_k, t_{k+1}), +inf if none
    double mark;  // 1{τ<∞}ΔL(τ), plus the Brownian increment if any
    double mean;
    double sd;
    double epsilon;
};

struct InnovationSet {
    Grid grid;
    double threshold = 0.0;
    std::vector<InnovationCell> cells;

    [[nodiscard]] std::vector<double> epsilons() const;
};

InnovationSet extract_innovations(const LevyPath& path, const Grid& grid, double m,
                                  const LevySpec& spec);

/// X(t) = (η - φς²)t - Σ_{0<s≤t} log(1 + φ ΔL(s)²).
double auxiliary_process(const LevyPath& path, const CogarchParams& params, double t);

// ---- inline ----

template <class Urbg>
double JumpDist::sample(Urbg& g) const {
    if (law_ == Law::Normal) {
        std::normal_distribution<double> n(0.0, scale_);
        return n(g);
    }
    std::bernoulli_distribution coin(0.5);
    return coin(g) ? scale_ : -scale_;
}

}  // namespace levy
}  // namespace cogarch
