#include "cogarch/cogarch.hpp"

#include "cogarch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cogarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// ∫_0^h e^{-a(h-s)} ds = (1 - e^{-ah})/a.
double decay_integral(double a, double h) {
    return a == 0.0 ? h : -std::expm1(-a * h) / a;
}

/// Net mean-reversion rate of σ² between jumps: η - φς².
double reversion_rate(const CogarchParams& p, const levy::LevyPath& path) {
    return p.eta - p.phi * path.diffusion_scale * path.diffusion_scale;
}

void check_sampling(const levy::LevyPath& path, const Grid& sample_times) {
    if (sample_times.horizon() > path.horizon * (1.0 + 1e-12)) {
        throw ValidationError("sample times extend beyond the path horizon");
    }
}

/// Walks the merged event stream (grid times, jumps, diffusion mesh) and
/// records (G, σ²) at grid times and jumps. `advance(s2, h)` moves σ² across a
/// jump-free gap of length h.
template <class Advance>
BivariatePath sweep(const levy::LevyPath& path, const CogarchParams& params, const Grid& grid,
                    double sigma0_sq, PathFlavor flavor, Advance&& advance) {
    params.validate();
    if (!(sigma0_sq > 0.0)) throw ValidationError("sigma^2(0) must be positive");
    check_sampling(path, grid);

    BivariatePath out;
    out.flavor = flavor;
    const std::size_t reserve = grid.times().size() + path.jumps.size();
    out.times.reserve(reserve);
    out.g.reserve(reserve);
    out.sigma2.reserve(reserve);
    out.g_left.reserve(reserve);
    out.sigma2_left.reserve(reserve);
    out.at_jump.reserve(reserve);

    const auto& gt = grid.times();
    const double end = grid.horizon();
    const std::vector<double>* mesh = path.has_diffusion() ? &path.diffusion_mesh->times() : nullptr;

    double t = 0.0;
    double g = 0.0;
    double s2 = sigma0_sq;
    double sigma_mesh_left = std::sqrt(s2);
    out.push(0.0, 0.0, s2, 0.0, s2, false);

    std::size_t gi = 1;
    std::size_t ji = 0;
    std::size_t mi = 1;
    while (true) {
        const double tg = gi < gt.size() ? gt[gi] : kInf;
        const double tj = ji < path.jumps.size() ? path.jumps[ji].time : kInf;
        const double tm = (mesh && mi < mesh->size()) ? (*mesh)[mi] : kInf;
        const double tn = std::min({tg, tj, tm});
        if (tn == kInf || tn > end) break;

        s2 = advance(s2, tn - t);
        t = tn;

        if (tm == tn) {
            g += sigma_mesh_left * path.diffusion_scale * (path.brownian[mi] - path.brownian[mi - 1]);
            ++mi;
        }
        const double g_before = g;
        const double s2_before = s2;
        const bool jump = tj == tn;
        if (jump) {
            const double dl = path.jumps[ji].size;
            g += std::sqrt(std::max(s2, 0.0)) * dl;
            s2 += params.phi * s2 * dl * dl;
            ++ji;
        }
        if (tm == tn) sigma_mesh_left = std::sqrt(std::max(s2, 0.0));
        if (tg == tn) ++gi;
        if (jump || tg == tn) out.push(t, g, s2, g_before, s2_before, jump);
    }
    return out;
}

}  // namespace

void CogarchParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ValidationError("phi must be non-negative");
}

double CogarchParams::stationary_mean() const {
    if (!(eta > phi)) throw ValidationError("stationarity requires eta > phi");
    return beta / (eta - phi);
}

double Sigma0Policy::resolve(const CogarchParams& params) const {
    if (kind == Kind::Stationary) return params.stationary_mean();
    if (!(value > 0.0)) throw ValidationError("fixed sigma^2(0) must be positive");
    return value;
}

std::string_view to_string(PathFlavor flavor) {
    switch (flavor) {
        case PathFlavor::ExactAtEvents: return "exact";
        case PathFlavor::EmbeddedPiecewiseConstant: return "embedded";
        case PathFlavor::EulerOracle: return "euler";
    }
    return "unknown";
}

std::size_t BivariatePath::index_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) throw ValidationError("time precedes path start");
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

BivariatePath BivariatePath::restrict_to(const Grid& grid, double tol) const {
    BivariatePath out;
    out.flavor = flavor;
    const double scale = tol * std::max(1.0, grid.horizon());
    for (double t : grid.times()) {
        auto it = std::lower_bound(times.begin(), times.end(), t - scale);
        if (it == times.end() || std::abs(*it - t) > scale) {
            throw ValidationError("path has no sample at a requested grid time");
        }
        const auto i = static_cast<std::size_t>(it - times.begin());
        out.push(times[i], g[i], sigma2[i], g_left[i], sigma2_left[i], at_jump[i]);
    }
    return out;
}

void BivariatePath::push(double t, double g_value, double s2, double g_before, double s2_before,
                         bool jump) {
    times.push_back(t);
    g.push_back(g_value);
    sigma2.push_back(s2);
    g_left.push_back(g_before);
    sigma2_left.push_back(s2_before);
    at_jump.push_back(jump);
}

double exact_variance(const levy::LevyPath& path, const CogarchParams& params, double t,
                      double sigma0_sq) {
    params.validate();
    if (t < 0.0 || t > path.horizon) throw ValidationError("t outside [0, T]");
    if (!(sigma0_sq > 0.0)) throw ValidationError("sigma^2(0) must be positive");

    // integral = ∫_0^t e^{X(s) - X(t)} ds, carried forward segment by segment.
    const double a = reversion_rate(params, path);
    double integral = 0.0;
    double log_drop = 0.0;  // Σ log(1 + φΔL²) over jumps ≤ t
    double prev = 0.0;
    for (const levy::Jump& j : path.jumps) {
        if (j.time > t) break;
        const double h = j.time - prev;
        integral = integral * std::exp(-a * h) + decay_integral(a, h);
        const double log_factor = std::log1p(params.phi * j.size * j.size);
        integral *= std::exp(log_factor);
        log_drop += log_factor;
        prev = j.time;
    }
    const double h = t - prev;
    integral = integral * std::exp(-a * h) + decay_integral(a, h);
    const double x_t = a * t - log_drop;
    return params.beta * integral + sigma0_sq * std::exp(-x_t);
}

BivariatePath simulate_exact(const levy::LevyPath& path, const CogarchParams& params,
                             const Grid& sample_times, double sigma0_sq) {
    const double a = reversion_rate(params, path);
    const double beta = params.beta;
    return sweep(path, params, sample_times, sigma0_sq, PathFlavor::ExactAtEvents,
                 [a, beta](double s2, double h) {
                     return beta * decay_integral(a, h) + s2 * std::exp(-a * h);
                 });
}

BivariatePath euler_oracle(const levy::LevyPath& path, const CogarchParams& params, double step,
                           const Grid& sample_times, double sigma0_sq) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("step must be positive");
    const double a = reversion_rate(params, path);
    const double beta = params.beta;
    return sweep(path, params, sample_times, sigma0_sq, PathFlavor::EulerOracle,
                 [a, beta, step](double s2, double h) {
                     if (h <= 0.0) return s2;
                     const auto n = static_cast<std::size_t>(std::ceil(h / step));
                     const double dt = h / static_cast<double>(n);
                     for (std::size_t k = 0; k < n; ++k) s2 += (beta - a * s2) * dt;
                     return s2;
                 });
}

double stationary_sigma0(const CogarchParams& params, std::uint64_t /*seed*/) {
    params.validate();
    return params.stationary_mean();
}

}  // namespace cogarch
