#include "cogarch/embedding.hpp"

#include "cogarch/error.hpp"
#include "cogarch/parallel.hpp"
#include "cogarch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cogarch::embedding {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// τ*_i = min(τ_i, t_i) for i = 1..N, with τ*_N forced to T.
std::vector<double> retimed_jumps(const levy::InnovationSet& innovations, bool& last_cell_jump) {
    const Grid& grid = innovations.grid;
    const std::size_t n = grid.cells();
    std::vector<double> star(n);
    for (std::size_t i = 1; i <= n; ++i) {
        star[i - 1] = std::min(innovations.cells[i - 1].tau, grid.time(i));
    }
    last_cell_jump = std::isfinite(innovations.cells[n - 1].tau);
    star[n - 1] = grid.horizon();
    return star;
}

}  // namespace

EmbeddedSeries embed(const levy::InnovationSet& innovations, const CogarchParams& params,
                     double sigma0_sq) {
    params.validate();
    if (!(sigma0_sq > 0.0)) throw ValidationError("sigma^2(0) must be positive");
    const Grid& grid = innovations.grid;
    const std::size_t n = grid.cells();

    EmbeddedSeries s{grid, innovations, params, std::vector<double>(n + 1), std::vector<double>(n + 1)};
    s.g[0] = 0.0;
    s.sigma2[0] = sigma0_sq;
    for (std::size_t i = 1; i <= n; ++i) {
        const double dt = grid.spacing(i - 1);
        const double eps = innovations.cells[i - 1].epsilon;
        s.g[i] = s.g[i - 1] + std::sqrt(s.sigma2[i - 1] * dt) * eps;
        s.sigma2[i] = params.beta * dt +
                      (1.0 + params.phi * dt * eps * eps) * std::exp(-params.eta * dt) * s.sigma2[i - 1];
    }
    return s;
}

double explicit_sigma_check(const EmbeddedSeries& series) {
    const Grid& grid = series.grid;
    const std::size_t n = grid.cells();
    const CogarchParams& p = series.params;

    std::vector<double> factor(n + 1, 1.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double dt = grid.spacing(k - 1);
        const double eps = series.innovations.cells[k - 1].epsilon;
        factor[k] = std::exp(-p.eta * dt) * (1.0 + p.phi * dt * eps * eps);
    }

    double worst = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        // β Σ_{j≤i} Δt_j Π_{k=j+1}^{i} a_k + σ²_0 Π_{j≤i} a_j, accumulated from j = i down.
        double sum = 0.0;
        double prod = 1.0;
        for (std::size_t j = i; j >= 1; --j) {
            sum += grid.spacing(j - 1) * prod;
            prod *= factor[j];
        }
        const double explicit_value = p.beta * sum + series.sigma2[0] * prod;
        const double rel = std::abs(explicit_value - series.sigma2[i]) / std::abs(explicit_value);
        worst = std::max(worst, rel);
    }
    return worst;
}

BivariatePath lift(const EmbeddedSeries& series) {
    BivariatePath out;
    out.flavor = PathFlavor::EmbeddedPiecewiseConstant;
    const auto& t = series.grid.times();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t before = i == 0 ? 0 : i - 1;
        out.push(t[i], series.g[i], series.sigma2[i], series.g[before], series.sigma2[before], false);
    }
    return out;
}

double TimeChange::operator()(double t) const {
    if (t <= knots.front()) return values.front();
    if (t >= knots.back()) return values.back();
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const auto k = static_cast<std::size_t>(it - knots.begin());
    const double w = (t - knots[k - 1]) / (knots[k] - knots[k - 1]);
    return values[k - 1] + w * (values[k] - values[k - 1]);
}

TimeChange time_change(const levy::InnovationSet& innovations) {
    bool ignored = false;
    const std::vector<double> star = retimed_jumps(innovations, ignored);
    TimeChange lambda;
    lambda.knots = innovations.grid.times();
    lambda.values.reserve(lambda.knots.size());
    lambda.values.push_back(0.0);
    lambda.values.insert(lambda.values.end(), star.begin(), star.end());
    return lambda;
}

SkorokhodBound skorokhod_bound(const BivariatePath& embedded, const BivariatePath& exact,
                               const levy::InnovationSet& innovations) {
    const Grid& grid = innovations.grid;
    const double tol = 1e-9 * std::max(1.0, grid.horizon());
    if (std::abs(embedded.horizon() - exact.horizon()) > tol ||
        std::abs(embedded.horizon() - grid.horizon()) > tol) {
        throw ValidationError("mismatched horizons");
    }
    if (embedded.size() != grid.cells() + 1) {
        throw ValidationError("embedded path does not match the innovation grid");
    }

    SkorokhodBound result;
    const std::vector<double> star = retimed_jumps(innovations, result.last_cell_jump);

    // Tilde processes change value only at τ*; each τ* must be an exact sample time.
    for (double s : star) {
        auto it = std::lower_bound(exact.times.begin(), exact.times.end(), s - tol);
        if (it == exact.times.end() || std::abs(*it - s) > tol) {
            throw ValidationError("exact path lacks a sample at a re-timed jump");
        }
    }

    // Between consecutive exact samples G is constant and σ² is monotone, so
    // the supremum over each segment is attained at its start or approached at
    // the left limit of its end.
    std::size_t level = 0;  // N_n(t) = #{i : τ*_i ≤ t}
    for (std::size_t k = 0; k < exact.size(); ++k) {
        const double t = exact.times[k];
        if (k > 0) {
            result.sup_g = std::max(result.sup_g, std::abs(embedded.g[level] - exact.g_left[k]));
            result.sup_sigma2 =
                std::max(result.sup_sigma2, std::abs(embedded.sigma2[level] - exact.sigma2_left[k]));
        }
        while (level < star.size() && star[level] <= t + tol) ++level;
        result.sup_g = std::max(result.sup_g, std::abs(embedded.g[level] - exact.g[k]));
        result.sup_sigma2 = std::max(result.sup_sigma2, std::abs(embedded.sigma2[level] - exact.sigma2[k]));
    }
    result.mesh = grid.mesh();
    result.bound = result.sup_g + result.sup_sigma2 + result.mesh;
    return result;
}

std::vector<std::size_t> ladder_from_spacings(double horizon, const std::vector<double>& spacings) {
    std::vector<std::size_t> cells;
    for (double dt : spacings) {
        if (!(dt > 0.0)) throw ValidationError("ladder spacings must be positive");
        const double n = horizon / dt;
        const double rounded = std::round(n);
        if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * n) {
            throw ValidationError("ladder spacing must divide the horizon");
        }
        cells.push_back(static_cast<std::size_t>(rounded));
    }
    return cells;
}

ConvergenceReport convergence_study(const ConvergenceDesign& design) {
    if (design.cells.empty()) throw ValidationError("empty resolution ladder");
    if (design.seeds == 0) throw ValidationError("need at least one seed");
    for (std::size_t l = 1; l < design.cells.size(); ++l) {
        if (design.cells[l] <= design.cells[l - 1] || design.cells[l] % design.cells[l - 1] != 0) {
            throw ValidationError("ladder must be strictly refining");
        }
    }
    design.params.validate();
    const double sigma0 = design.sigma0.resolve(design.params);
    const std::size_t levels = design.cells.size();
    const Grid finest = Grid::uniform(design.horizon, design.cells.back());

    struct SeedOutcome {
        std::vector<SkorokhodBound> bounds;
        std::vector<double> terminal;
        std::vector<bool> warned;
    };
    std::vector<SeedOutcome> outcomes(design.seeds);

    parallel_for(design.seeds, [&](std::size_t s) {
        std::optional<Grid> mesh;
        if (design.driver.diffusion_scale() > 0.0) {
            mesh = Grid::uniform(design.horizon, design.cells.back() * 8);
        }
        const levy::LevyPath path = levy::simulate_levy_path(
            design.driver, design.horizon, derive_seed(design.master_seed, s), mesh);
        const BivariatePath exact = simulate_exact(path, design.params, finest, sigma0);

        SeedOutcome& out = outcomes[s];
        for (std::size_t l = 0; l < levels; ++l) {
            const Grid grid = Grid::uniform(design.horizon, design.cells[l]);
            const levy::ThresholdChoice m = levy::choose_threshold(grid, design.driver);
            const levy::InnovationSet innov = levy::extract_innovations(path, grid, m.m, design.driver);
            const EmbeddedSeries series = embed(innov, design.params, sigma0);
            out.bounds.push_back(skorokhod_bound(lift(series), exact, innov));
            out.terminal.push_back(series.sigma2.back());
            out.warned.push_back(!m.rate_condition_met);
        }
    });

    ConvergenceReport report;
    report.seeds = design.seeds;
    report.master_seed = design.master_seed;
    report.bounds.assign(levels, std::vector<double>(design.seeds));
    for (std::size_t l = 0; l < levels; ++l) {
        std::vector<double> sup_g(design.seeds), sup_s(design.seeds), terminal(design.seeds);
        LevelSummary level;
        level.cells = design.cells[l];
        level.mesh = design.horizon / static_cast<double>(design.cells[l]);
        for (std::size_t s = 0; s < design.seeds; ++s) {
            const SkorokhodBound& b = outcomes[s].bounds[l];
            sup_g[s] = b.sup_g;
            sup_s[s] = b.sup_sigma2;
            report.bounds[l][s] = b.bound;
            terminal[s] = outcomes[s].terminal[l];
            if (b.last_cell_jump) ++level.last_cell_jumps;
            level.threshold_warning = level.threshold_warning || outcomes[s].warned[l];
        }
        level.sup_g_median = median(sup_g);
        level.sup_sigma2_median = median(sup_s);
        level.bound_median = median(report.bounds[l]);
        if (design.seeds > 1) {
            double mean = 0.0;
            for (double v : terminal) mean += v;
            mean /= static_cast<double>(design.seeds);
            double ss = 0.0;
            for (double v : terminal) ss += (v - mean) * (v - mean);
            level.terminal_sigma2_variance = ss / static_cast<double>(design.seeds - 1);
        }
        report.levels.push_back(level);
    }
    for (std::size_t l = 1; l < levels; ++l) {
        if (!(report.levels[l].bound_median < report.levels[l - 1].bound_median)) report.monotone = false;
    }
    return report;
}

}  // namespace cogarch::embedding
