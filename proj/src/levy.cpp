#include "cogarch/levy.hpp"

#include "cogarch/cogarch.hpp"
#include "cogarch/error.hpp"
#include "cogarch/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cogarch::levy {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::size_t mesh_index(const Grid& mesh, double t) {
    const auto& times = mesh.times();
    const double tol = 1e-9 * std::max(1.0, mesh.horizon());
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) {
        throw ValidationError("time is not on the diffusion mesh; grids must coarsen the mesh");
    }
    return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

// ---- JumpDist ----

JumpDist JumpDist::scaled_normal(double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw ValidationError("normal jump sd must be positive");
    return JumpDist(Law::Normal, sd);
}

JumpDist JumpDist::two_point(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("two-point jump size must be positive");
    return JumpDist(Law::TwoPoint, a);
}

JumpDist JumpDist::rescaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("invalid jump rescale");
    return JumpDist(law_, scale_ * factor);
}

double JumpDist::tail_probability(double m) const {
    if (m < 0.0) throw ValidationError("threshold must be non-negative");
    if (law_ == Law::Normal) return std::erfc(m / scale_ * kInvSqrt2);
    return scale_ > m ? 1.0 : 0.0;
}

double JumpDist::truncated_moment(int k, double m) const {
    if (m < 0.0) throw ValidationError("threshold must be non-negative");
    if (k == 1) return 0.0;  // symmetric laws
    if (k != 2) throw ValidationError("only first and second truncated moments are available");
    if (law_ == Law::Normal) {
        const double z = m / scale_;
        return scale_ * scale_ * (std::erfc(z * kInvSqrt2) + 2.0 * z * normal_pdf(z));
    }
    return scale_ > m ? scale_ * scale_ : 0.0;
}

// ---- LevySpec ----

LevySpec LevySpec::compound_poisson(double rate, JumpDist jumps) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("jump rate must be positive");
    const double factor = 1.0 / std::sqrt(rate * jumps.second_moment());
    return LevySpec(DriverKind::CompoundPoisson, rate, jumps.rescaled(factor), 0.0);
}

LevySpec LevySpec::jump_diffusion(double diffusion_scale, double rate, JumpDist jumps) {
    if (!(diffusion_scale >= 0.0) || !std::isfinite(diffusion_scale)) {
        throw ValidationError("diffusion scale must be non-negative");
    }
    if (diffusion_scale == 0.0) return compound_poisson(rate, jumps);
    const double s2 = diffusion_scale * diffusion_scale;
    if (s2 == 1.0) {
        throw ValidationError("pure-diffusion driver requires jump part (use pure_diffusion explicitly)");
    }
    if (s2 > 1.0) {
        throw ValidationError("diffusion variance exceeds one; driver cannot be normalized");
    }
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("jump rate must be positive");
    const double factor = std::sqrt((1.0 - s2) / (rate * jumps.second_moment()));
    return LevySpec(DriverKind::JumpDiffusion, rate, jumps.rescaled(factor), diffusion_scale);
}

LevySpec LevySpec::pure_diffusion() {
    return LevySpec(DriverKind::PureDiffusion, 0.0, JumpDist::standard_normal(), 1.0);
}

double LevySpec::mean() const {
    return has_jumps() ? rate_ * jumps_.truncated_moment(1, 0.0) : 0.0;
}

double LevySpec::second_moment() const {
    const double jump_part = has_jumps() ? rate_ * jumps_.second_moment() : 0.0;
    return diffusion_scale_ * diffusion_scale_ + jump_part;
}

double LevySpec::tail(double m) const {
    if (m < 0.0) throw ValidationError("threshold must be non-negative");
    return has_jumps() ? rate_ * jumps_.tail_probability(m) : 0.0;
}

double LevySpec::jump_moment(int k, double m) const {
    return has_jumps() ? rate_ * jumps_.truncated_moment(k, m) : 0.0;
}

// ---- paths ----

double LevyPath::diffusion_increment(double a, double b) const {
    if (!has_diffusion()) return 0.0;
    const std::size_t ia = mesh_index(*diffusion_mesh, a);
    const std::size_t ib = mesh_index(*diffusion_mesh, b);
    return diffusion_scale * (brownian[ib] - brownian[ia]);
}

LevyPath simulate_levy_path(const LevySpec& spec, double horizon, std::uint64_t seed,
                            const std::optional<Grid>& diffusion_mesh) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("T must be positive");

    LevyPath path;
    path.horizon = horizon;
    path.seed = seed;
    Rng rng(seed);

    if (spec.has_jumps()) {
        std::poisson_distribution<long long> count(spec.rate() * horizon);
        const auto n = static_cast<std::size_t>(count(rng));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> times(n);
        // 1 - U lies in (0, 1], so times land in (0, T].
        for (double& t : times) t = horizon * (1.0 - unit(rng));
        std::sort(times.begin(), times.end());
        for (bool tied = true; tied;) {
            tied = false;
            for (std::size_t i = 1; i < times.size(); ++i) {
                if (times[i] == times[i - 1]) {
                    times[i] = horizon * (1.0 - unit(rng));
                    tied = true;
                }
            }
            if (tied) std::sort(times.begin(), times.end());
        }
        path.jumps.reserve(n);
        for (double t : times) path.jumps.push_back({t, spec.jumps().sample(rng)});
    }

    if (spec.diffusion_scale() > 0.0) {
        Grid mesh = diffusion_mesh ? *diffusion_mesh
                                   : Grid::uniform(horizon, static_cast<std::size_t>(
                                                                std::ceil(horizon * 1024.0)));
        if (std::abs(mesh.horizon() - horizon) > 1e-9 * std::max(1.0, horizon)) {
            throw ValidationError("diffusion mesh horizon differs from path horizon");
        }
        std::normal_distribution<double> z(0.0, 1.0);
        path.brownian.resize(mesh.cells() + 1);
        path.brownian[0] = 0.0;
        for (std::size_t k = 0; k < mesh.cells(); ++k) {
            path.brownian[k + 1] = path.brownian[k] + std::sqrt(mesh.spacing(k)) * z(rng);
        }
        path.diffusion_mesh = std::move(mesh);
        path.diffusion_scale = spec.diffusion_scale();
    }
    return path;
}

// ---- first-jump construction ----

ThresholdChoice choose_threshold(const Grid& grid, const LevySpec& spec, double tolerance) {
    ThresholdChoice choice;
    if (!spec.has_jumps()) return choice;
    const double tail0 = spec.tail(0.0);
    const double lhs = grid.mesh() * tail0 * tail0;
    choice.rate_condition_met = lhs <= tolerance * (1.0 + 1e-12);
    if (!choice.rate_condition_met) {
        std::ostringstream msg;
        msg << "rate condition not met at this resolution: dt(n)*tail(0)^2 = " << lhs << " > "
            << tolerance;
        choice.warning = msg.str();
    }
    return choice;
}

ThresholdChoice choose_threshold(const Grid& grid, const TailFunction& tail, double tolerance) {
    static constexpr std::array kLadder{1.0,  0.5,  0.2,  0.1,  0.05, 0.02, 0.01,
                                        5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4, 5e-5,
                                        2e-5, 1e-5, 5e-6, 2e-6, 1e-6};
    ThresholdChoice choice;
    choice.m = kLadder.front();
    choice.rate_condition_met = false;
    for (double m : kLadder) {
        const double pi_bar = tail(m);
        if (grid.mesh() * pi_bar * pi_bar <= tolerance * (1.0 + 1e-12)) {
            choice.m = m;
            choice.rate_condition_met = true;
        } else {
            break;
        }
    }
    if (!choice.rate_condition_met) {
        choice.warning = "rate condition not met at this resolution even at m = 1";
    }
    return choice;
}

InnovationMoments innovation_moments(const LevySpec& spec, double dt, double m) {
    if (!(dt > 0.0)) throw ValidationError("cell length must be positive");
    if (m < 0.0) throw ValidationError("threshold must be non-negative");
    const double s2 = spec.diffusion_scale() * spec.diffusion_scale();
    if (!spec.has_jumps()) return {0.0, s2 * dt};

    const double pi_bar = spec.tail(m);
    if (!(pi_bar > 0.0)) throw ValidationError("no jumps above threshold");
    const double hit = -std::expm1(-dt * pi_bar) / pi_bar;
    const double nu = hit * spec.jump_moment(1, m);
    const double xi2 = hit * spec.jump_moment(2, m) - nu * nu + s2 * dt;
    return {nu, xi2};
}

std::vector<double> InnovationSet::epsilons() const {
    std::vector<double> e(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) e[k] = cells[k].epsilon;
    return e;
}

InnovationSet extract_innovations(const LevyPath& path, const Grid& grid, double m,
                                  const LevySpec& spec) {
    if (std::abs(path.horizon - grid.horizon()) > 1e-9 * std::max(1.0, grid.horizon())) {
        throw ValidationError("grid/path horizon mismatch");
    }
    InnovationSet set{grid, m, {}};
    set.cells.reserve(grid.cells());

    auto jump = path.jumps.begin();
    for (std::size_t k = 0; k < grid.cells(); ++k) {
        const double lo = grid.time(k);
        const double hi = grid.time(k + 1);
        const double dt = hi - lo;
        while (jump != path.jumps.end() && jump->time < lo) ++jump;

        InnovationCell cell{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0, 0.0};
        for (auto j = jump; j != path.jumps.end() && j->time < hi; ++j) {
            if (std::abs(j->size) > m) {
                cell.tau = j->time;
                cell.mark = j->size;
                break;
            }
        }
        if (path.has_diffusion()) cell.mark += path.diffusion_increment(lo, hi);

        const InnovationMoments mom = innovation_moments(spec, dt, m);
        cell.mean = mom.mean;
        cell.sd = std::sqrt(mom.variance);
        cell.epsilon = (cell.mark - cell.mean) / cell.sd;
        set.cells.push_back(cell);
    }
    return set;
}

double auxiliary_process(const LevyPath& path, const CogarchParams& params, double t) {
    if (t < 0.0 || t > path.horizon) throw ValidationError("t outside [0, T]");
    const double s2 = path.diffusion_scale * path.diffusion_scale;
    double x = (params.eta - params.phi * s2) * t;
    for (const Jump& j : path.jumps) {
        if (j.time > t) break;
        x -= std::log1p(params.phi * j.size * j.size);
    }
    return x;
}

}  // namespace cogarch::levy
