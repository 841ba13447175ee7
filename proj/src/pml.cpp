#include "cogarch/pml.hpp"

#include "cogarch/error.hpp"
#include "cogarch/nelder_mead.hpp"
#include "cogarch/parallel.hpp"
#include "cogarch/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

namespace cogarch::pml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Series compressed onto its distinct spacings: every weighting is a function
/// of the spacing, so per-evaluation work on exponentials is O(distinct).
struct Prepared {
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> index;
    std::vector<double> y2;
    double horizon = 0.0;
    double sum_log = 0.0;

    explicit Prepared(const ReturnsSeries& series, std::size_t min_returns = 3) {
        series.validate(min_returns);
        const std::vector<double> dts = series.spacings();
        std::map<double, std::size_t> slot;
        for (double d : dts) slot.emplace(d, 0);
        for (auto& [d, k] : slot) {
            k = distinct.size();
            distinct.push_back(d);
        }
        counts.assign(distinct.size(), 0);
        index.reserve(dts.size());
        y2.reserve(dts.size());
        for (std::size_t i = 0; i < dts.size(); ++i) {
            const std::size_t k = slot.at(dts[i]);
            index.push_back(k);
            ++counts[k];
            y2.push_back(series.returns[i] * series.returns[i]);
            horizon += dts[i];
            sum_log += std::log(dts[i]);
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return index.size(); }
};

/// Weighted value of each distinct spacing, or empty if some weight is ≤ 0.
std::vector<double> distinct_weights(const Prepared& p, const WeightScheme& scheme) {
    const auto n = static_cast<double>(p.size());
    std::vector<double> w(p.distinct.size());
    switch (scheme.kind) {
        case WeightKind::Identity:
            w = p.distinct;
            break;
        case WeightKind::Constant:
            std::fill(w.begin(), w.end(), p.horizon / n);
            break;
        case WeightKind::LogParametric: {
            const double c = (p.horizon - scheme.gamma * p.sum_log) / n;
            for (std::size_t k = 0; k < w.size(); ++k) w[k] = scheme.gamma * std::log(p.distinct[k]) + c;
            break;
        }
        case WeightKind::PerDeltaT: {
            double mass = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                auto it = std::find_if(scheme.multipliers.begin(), scheme.multipliers.end(),
                                       [&](const auto& m) { return m.first == p.distinct[k]; });
                if (it == scheme.multipliers.end()) {
                    throw ValidationError("per-spacing weights lack a multiplier for a spacing");
                }
                if (!(it->second > 0.0)) return {};
                w[k] = it->second;
                mass += static_cast<double>(p.counts[k]) * w[k];
            }
            for (double& v : w) v *= p.horizon / mass;
            break;
        }
    }
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) return {};
    }
    return w;
}

double log_likelihood(const Prepared& p, const CogarchParams& params, VarianceMode mode,
                      const std::vector<double>& w) {
    if (w.empty()) return kNegInf;
    if (!(params.beta > 0.0) || !(params.eta > 0.0) || !(params.phi >= 0.0)) return kNegInf;
    if (!(params.eta > params.phi)) return kNegInf;

    const double gap = params.eta - params.phi;
    const double mu = params.beta / gap;
    const std::size_t k_count = w.size();
    std::vector<double> decay(k_count), growth(k_count), level(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        decay[k] = std::exp(-params.eta * w[k]);
        growth[k] = std::expm1(gap * w[k]) / gap;
        level[k] = params.beta * w[k];
    }

    double s2 = mu;
    double acc = 0.0;
    const bool first_order = mode == VarianceMode::FirstOrder;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t k = p.index[i];
        const double rho2 = first_order ? s2 * w[k] : (s2 - mu) * growth[k] + mu * w[k];
        if (!(rho2 > 0.0)) return kNegInf;
        acc += p.y2[i] / rho2 + std::log(rho2);
        s2 = level[k] + decay[k] * (s2 + params.phi * p.y2[i]);
    }
    const double value = -0.5 * acc - 0.5 * static_cast<double>(p.size()) * kLog2Pi;
    return std::isfinite(value) ? value : kNegInf;
}

/// Coordinates of the joint search: (log β, log η, log φ, scheme extras...).
struct Family {
    WeightKind kind;
    const Prepared* prepared;
    double floor;

    [[nodiscard]] std::size_t extras() const {
        switch (kind) {
            case WeightKind::LogParametric: return 1;
            case WeightKind::PerDeltaT: return prepared->distinct.size() - 1;
            default: return 0;
        }
    }

    [[nodiscard]] CogarchParams params(const optim::Point& x) const {
        return {std::max(std::exp(x[0]), floor), std::max(std::exp(x[1]), floor),
                std::max(std::exp(x[2]), floor)};
    }

    [[nodiscard]] WeightScheme scheme(const optim::Point& x) const {
        switch (kind) {
            case WeightKind::Identity: return WeightScheme::identity();
            case WeightKind::Constant: return WeightScheme::constant();
            case WeightKind::LogParametric: return WeightScheme::log_parametric(x[3]);
            case WeightKind::PerDeltaT: {
                std::vector<std::pair<double, double>> m;
                m.emplace_back(prepared->distinct[0], 1.0);
                for (std::size_t k = 1; k < prepared->distinct.size(); ++k) {
                    m.emplace_back(prepared->distinct[k], std::exp(x[2 + k]));
                }
                return WeightScheme::per_delta_t(std::move(m));
            }
        }
        return WeightScheme::identity();
    }

    /// Joint coordinates of a warm start, if this family can represent its weights.
    [[nodiscard]] std::optional<optim::Point> encode(const WarmStart& start) const {
        const CogarchParams& p = start.params;
        if (!(p.beta > 0.0 && p.eta > 0.0 && p.phi > 0.0)) return std::nullopt;
        optim::Point x{std::log(p.beta), std::log(p.eta), std::log(p.phi)};
        switch (kind) {
            case WeightKind::Identity:
            case WeightKind::Constant:
                if (start.scheme.kind != kind) return std::nullopt;
                return x;
            case WeightKind::LogParametric:
                if (start.scheme.kind == WeightKind::LogParametric) {
                    x.push_back(start.scheme.gamma);
                } else if (start.scheme.kind == WeightKind::Constant) {
                    x.push_back(0.0);
                } else {
                    return std::nullopt;
                }
                return x;
            case WeightKind::PerDeltaT: {
                const std::vector<double> w = distinct_weights(*prepared, start.scheme);
                if (w.empty()) return std::nullopt;
                for (std::size_t k = 1; k < w.size(); ++k) x.push_back(std::log(w[k] / w[0]));
                return x;
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] double objective(const optim::Point& x, VarianceMode mode) const {
        const std::vector<double> w = distinct_weights(*prepared, scheme(x));
        return -log_likelihood(*prepared, params(x), mode, w);
    }
};

/// Least-squares γ making γ log Δt + c(γ) track Δt itself.
double identity_like_gamma(const Prepared& p) {
    const auto n = static_cast<double>(p.size());
    const double mean_log = p.sum_log / n;
    const double mean_dt = p.horizon / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < p.distinct.size(); ++k) {
        const double lx = std::log(p.distinct[k]) - mean_log;
        const auto c = static_cast<double>(p.counts[k]);
        sxy += c * lx * (p.distinct[k] - mean_dt);
        sxx += c * lx * lx;
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

optim::Point base_point(const Prepared& p, const Family& family) {
    constexpr double eta0 = 0.1;
    constexpr double phi0 = 0.05;
    double ss = 0.0;
    for (double v : p.y2) ss += v;
    const double per_time = ss / p.horizon;
    const double beta0 = std::max(per_time * (eta0 - phi0), 10.0 * family.floor);
    optim::Point x{std::log(beta0), std::log(eta0), std::log(phi0)};
    if (family.kind == WeightKind::LogParametric) x.push_back(identity_like_gamma(p));
    if (family.kind == WeightKind::PerDeltaT) {
        for (std::size_t k = 1; k < p.distinct.size(); ++k) x.push_back(std::log(p.distinct[k] / p.distinct[0]));
    }
    return x;
}

struct RunOutcome {
    optim::NelderMeadResult nm;
    bool started = false;
};

FitResult assemble(const ReturnsSeries& series, const Prepared& prepared, const Family& family,
                   const FitConfig& config, std::vector<RunOutcome>& runs, WeightScheme& scheme_out) {
    FitResult result;
    result.restarts = runs.size();
    const RunOutcome* best = nullptr;
    for (const RunOutcome& r : runs) {
        if (!r.started || !std::isfinite(r.nm.value)) continue;
        ++result.finite_restarts;
        result.iterations += r.nm.iterations;
        if (best == nullptr || r.nm.value < best->nm.value) best = &r;
    }
    if (best == nullptr) {
        throw NumericalError("all " + std::to_string(runs.size()) +
                             " restarts failed to produce a finite likelihood");
    }
    const optim::Point& x = best->nm.argmin;
    result.estimates = family.params(x);
    scheme_out = family.scheme(x);
    result.log_likelihood = -best->nm.value;
    result.spread = best->nm.spread;
    result.converged = best->nm.converged;
    result.stationary = result.estimates.eta > result.estimates.phi;
    const double lim = 2.0 * config.floor;
    result.hit_floor = result.estimates.beta <= lim || result.estimates.eta <= lim ||
                       result.estimates.phi <= lim;

    if (config.standard_errors) {
        const auto neg_h = likelihood_hessian(series, result.estimates, config.mode, scheme_out);
        Eigen::Matrix3d info;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) info(i, j) = neg_h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        const bool finite = info.allFinite();
        if (finite) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info);
            if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0) {
                const Eigen::Matrix3d cov = info.inverse();
                for (int i = 0; i < 3; ++i) result.standard_errors[static_cast<std::size_t>(i)] = std::sqrt(cov(i, i));
                result.se_available = true;
            }
        }
    }
    if (result.estimates.eta <= 1.0 && result.stationary) {
        result.filtered_variance = filter_volatility(series, result.estimates, FilterForm::UnitSpacing);
    }
    (void)prepared;
    return result;
}

WeightedFit run_fit(const ReturnsSeries& series, WeightKind kind, const FitConfig& config,
                    std::span<const WarmStart> warm_starts) {
    if (config.restarts == 0) throw ValidationError("need at least one restart");
    if (!(config.xtol > 0.0)) throw ValidationError("xtol must be positive");
    const Prepared prepared(series);
    const Family family{kind, &prepared, config.floor};
    const std::size_t dim = 3 + family.extras();

    std::vector<optim::Point> starts;
    const optim::Point base = base_point(prepared, family);
    starts.push_back(base);
    for (std::size_t r = 1; r < config.restarts; ++r) {
        Rng rng(derive_seed(config.seed, r));
        std::normal_distribution<double> jitter(0.0, 0.5);
        optim::Point x = base;
        for (int attempt = 0; attempt < 100; ++attempt) {
            x = base;
            for (double& v : x) v += jitter(rng);
            if (std::isfinite(family.objective(x, config.mode))) break;
        }
        starts.push_back(std::move(x));
    }
    const std::size_t dispersed = starts.size();
    for (const WarmStart& w : warm_starts) {
        if (auto x = family.encode(w)) starts.push_back(std::move(*x));
    }

    std::vector<RunOutcome> runs(starts.size());
    const optim::NelderMeadOptions options{config.xtol, config.max_iterations};
    parallel_for(starts.size(), [&](std::size_t r) {
        const double step = r < dispersed ? 0.3 : 0.05;
        const optim::Point steps(dim, step);
        auto f = [&](const optim::Point& x) { return family.objective(x, config.mode); };
        runs[r].nm = optim::nelder_mead(f, optim::axis_simplex(starts[r], steps), options);
        runs[r].started = true;
    });

    WeightedFit out;
    out.extra_parameters = family.extras();
    out.fit = assemble(series, prepared, family, config, runs, out.scheme);
    return out;
}

}  // namespace

void ReturnsSeries::validate(std::size_t min_returns) const {
    if (times.size() != returns.size() + 1) {
        throw ValidationError("returns series needs one more time than returns");
    }
    if (returns.size() < std::max<std::size_t>(min_returns, 1)) {
        throw ValidationError("returns series needs at least " + std::to_string(min_returns) + " returns");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ValidationError("observation times must be strictly increasing (index " +
                                  std::to_string(i) + ")");
        }
    }
    for (double y : returns) {
        if (!std::isfinite(y)) throw ValidationError("returns must be finite");
    }
}

std::vector<double> ReturnsSeries::spacings() const {
    std::vector<double> d(returns.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = times[i + 1] - times[i];
    return d;
}

ReturnsSeries ReturnsSeries::from_levels(std::span<const double> times, std::span<const double> levels) {
    if (times.size() != levels.size()) throw ValidationError("times and levels differ in length");
    if (times.empty()) throw ValidationError("empty level series");
    ReturnsSeries s;
    s.times.reserve(times.size());
    for (double t : times) s.times.push_back(t - times.front());
    for (std::size_t i = 1; i < levels.size(); ++i) s.returns.push_back(levels[i] - levels[i - 1]);
    return s;
}

std::string_view to_string(VarianceMode mode) {
    return mode == VarianceMode::Exact ? "exact" : "first-order";
}

std::string_view to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::Identity: return "identity";
        case WeightKind::Constant: return "constant";
        case WeightKind::LogParametric: return "log";
        case WeightKind::PerDeltaT: return "per-dt";
    }
    return "unknown";
}

std::vector<double> weight_apply(const WeightScheme& scheme, std::span<const double> spacings) {
    if (spacings.empty()) throw ValidationError("no spacings to weight");
    ReturnsSeries shell;
    shell.times.push_back(0.0);
    for (double d : spacings) {
        if (!(d > 0.0)) throw ValidationError("spacings must be positive");
        shell.times.push_back(shell.times.back() + d);
    }
    shell.returns.assign(spacings.size(), 0.0);
    const Prepared p(shell, 1);
    const std::vector<double> w = distinct_weights(p, scheme);
    if (w.empty()) throw ValidationError("weight positivity violated");
    std::vector<double> out(spacings.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[p.index[i]];
    return out;
}

double conditional_variance(double sigma2_prev, double dt, const CogarchParams& params, VarianceMode mode) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(sigma2_prev > 0.0)) throw ValidationError("previous variance must be positive");
    if (mode == VarianceMode::FirstOrder) return sigma2_prev * dt;
    const double gap = params.eta - params.phi;
    if (gap == 0.0) throw ValidationError("exact conditional variance requires eta != phi");
    const double mu = params.beta / gap;
    return (sigma2_prev - mu) * (std::expm1(gap * dt) / gap) + mu * dt;
}

double volatility_recursion(double sigma2_prev, double dt, double y, const CogarchParams& params) {
    const double decay = std::exp(-params.eta * dt);
    return params.beta * dt + decay * sigma2_prev + params.phi * decay * y * y;
}

double pseudo_log_likelihood(const ReturnsSeries& series, const CogarchParams& params, VarianceMode mode,
                             const WeightScheme& weights) {
    const Prepared p(series, 1);
    return log_likelihood(p, params, mode, distinct_weights(p, weights));
}

FitResult fit(const ReturnsSeries& series, const FitConfig& config) {
    return run_fit(series, WeightKind::Identity, config, {}).fit;
}

WeightedFit fit_weighted(const ReturnsSeries& series, WeightKind kind, const FitConfig& config,
                         std::span<const WarmStart> warm_starts) {
    return run_fit(series, kind, config, warm_starts);
}

std::array<std::array<double, 3>, 3> likelihood_hessian(const ReturnsSeries& series, const CogarchParams& at,
                                                        VarianceMode mode, const WeightScheme& weights) {
    const Prepared p(series, 1);
    const std::vector<double> w = distinct_weights(p, weights);
    const std::array<double, 3> x0{at.beta, at.eta, at.phi};
    std::array<double, 3> h{};
    for (std::size_t i = 0; i < 3; ++i) h[i] = 1e-5 * (x0[i] != 0.0 ? std::abs(x0[i]) : 1.0);

    auto f = [&](std::array<double, 3> x) {
        return log_likelihood(p, CogarchParams{x[0], x[1], x[2]}, mode, w);
    };
    const double f0 = f(x0);
    std::array<std::array<double, 3>, 3> neg{};
    for (std::size_t i = 0; i < 3; ++i) {
        auto xp = x0, xm = x0;
        xp[i] += h[i];
        xm[i] -= h[i];
        neg[i][i] = -(f(xp) - 2.0 * f0 + f(xm)) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            auto pp = x0, pm = x0, mp = x0, mm = x0;
            pp[i] += h[i]; pp[j] += h[j];
            pm[i] += h[i]; pm[j] -= h[j];
            mp[i] -= h[i]; mp[j] += h[j];
            mm[i] -= h[i]; mm[j] -= h[j];
            const double v = -(f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
            neg[i][j] = v;
            neg[j][i] = v;
        }
    }
    return neg;
}

std::vector<double> filter_volatility(const ReturnsSeries& series, const CogarchParams& estimates,
                                      FilterForm form) {
    series.validate(1);
    estimates.validate();
    const double start = estimates.stationary_mean();
    if (form == FilterForm::UnitSpacing && 1.0 - estimates.eta < 0.0) {
        throw ValidationError("unit-spacing filter needs eta <= 1 to keep variances positive");
    }
    std::vector<double> out(series.size() + 1);
    out[0] = start;
    for (std::size_t i = 1; i <= series.size(); ++i) {
        const double y = series.returns[i - 1];
        if (form == FilterForm::UnitSpacing) {
            out[i] = estimates.beta + (1.0 - estimates.eta) * out[i - 1] + estimates.phi * y * y;
        } else {
            const double dt = series.times[i] - series.times[i - 1];
            out[i] = volatility_recursion(out[i - 1], dt, y, estimates);
        }
    }
    return out;
}

double GarchEquivalent::annualized_omega_root(double days_per_year) const {
    return std::sqrt(days_per_year * omega);
}

GarchEquivalent transform_to_garch(const CogarchParams& params, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const double kappa = std::exp(-params.eta * dt);
    return {params.beta * dt * dt, params.phi * kappa * dt, kappa};
}

double long_run_volatility(const CogarchParams& params, double days_per_year) {
    return std::sqrt(days_per_year * params.stationary_mean());
}

}  // namespace cogarch::pml
