// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.
// COGARCH_ACCEPT_R sets the Monte Carlo replication count (default 200). Below
// 200 the study criteria widen their tolerance from 3 to 5 standard errors.

#include "cogarch/cogarch.hpp"
#include "cogarch/embedding.hpp"
#include "cogarch/levy.hpp"
#include "cogarch/mc.hpp"
#include "cogarch/pml.hpp"
#include "cogarch/rng.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cogarch;

namespace {

const CogarchParams kTable2{1.0, 0.06, 0.0425};
const CogarchParams kTable3{1.5, 0.085, 0.069};
const CogarchParams kAsx{0.023654 * 0.023654 / 365.0, 0.0847, 0.0685};

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::size_t replications_from_env() {
    const char* env = std::getenv("COGARCH_ACCEPT_R");
    if (env == nullptr || *env == '\0') return 200;
    const long r = std::strtol(env, nullptr, 10);
    return r >= 1 ? static_cast<std::size_t>(r) : 200;
}

levy::LevySpec unit_poisson() {
    return levy::LevySpec::compound_poisson(1.0, levy::JumpDist::standard_normal());
}

Outcome closed_form_vs_oracle() {
    const Grid at_end = Grid::uniform(100.0, 1);
    const double s0 = kTable2.stationary_mean();
    Outcome o;
    double worst_err = 0.0, min_ratio = 1e300, max_ratio = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const levy::LevyPath p = levy::simulate_levy_path(unit_poisson(), 100.0, derive_seed(20080519, s));
        const double exact = exact_variance(p, kTable2, 100.0, s0);
        const double coarse = euler_oracle(p, kTable2, 1e-4, at_end, s0).sigma2.back();
        const double fine = euler_oracle(p, kTable2, 5e-5, at_end, s0).sigma2.back();
        const double e1 = std::abs(coarse - exact) / exact;
        const double e2 = std::abs(fine - exact) / exact;
        const double ratio = e1 / e2;
        worst_err = std::max(worst_err, e1);
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
        if (!(e1 <= 1e-3) || !(std::abs(ratio - 2.0) <= 0.6)) o.pass = false;
    }
    std::ostringstream d;
    d << "max rel err " << worst_err << ", halving ratio in [" << min_ratio << ", " << max_ratio << "]";
    o.detail = d.str();
    return o;
}

Outcome jump_free() {
    levy::LevyPath none;
    none.horizon = 100.0;
    const double s0 = 12.0;
    const BivariatePath path = simulate_exact(none, kTable2, Grid::uniform(100.0, 100), s0);
    double worst = 0.0;
    const double mu = kTable2.beta / kTable2.eta;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double t = path.times[i];
        const double want = mu + (s0 - mu) * std::exp(-kTable2.eta * t);
        worst = std::max(worst, std::abs(path.sigma2[i] - want) / want);
    }
    std::ostringstream d;
    d << "max rel err " << worst << " over 100 times";
    return {worst <= 1e-12, d.str()};
}

Outcome explicit_identity() {
    Rng rng(20080519);
    std::exponential_distribution<double> gap(2.0);
    std::vector<double> spacings(10000);
    for (double& d : spacings) d = 0.01 + gap(rng);
    const Grid grid = Grid::from_spacings(spacings);
    const levy::LevySpec spec = unit_poisson();
    const levy::LevyPath path = levy::simulate_levy_path(spec, grid.horizon(), 7);
    const levy::InnovationSet innov = levy::extract_innovations(path, grid, 0.0, spec);
    const embedding::EmbeddedSeries s = embedding::embed(innov, kTable2, kTable2.stationary_mean());
    const double dev = embedding::explicit_sigma_check(s);
    std::ostringstream d;
    d << "max rel deviation " << dev << " over 10^4 cells";
    return {dev <= 1e-8, d.str()};
}

Outcome skorokhod_ladder() {
    embedding::ConvergenceDesign design;
    design.params = kTable2;
    design.horizon = 100.0;
    design.cells = embedding::ladder_from_spacings(100.0, {1.0, 0.5, 0.25, 0.125});
    design.seeds = 16;
    const embedding::ConvergenceReport r = embedding::convergence_study(design);
    std::ostringstream d;
    d << "median bounds";
    for (const auto& l : r.levels) d << ' ' << l.bound_median;
    return {r.monotone, d.str()};
}

Outcome study(const mc::StudyDesign& design, const std::array<double, 3>& published_means,
              const std::array<double, 3>* published_rel_rmse, bool check_bias_signs) {
    const mc::StudyReport rep = mc::run_study(design);
    const double k = design.replications >= 200 ? 3.0 : 5.0;
    Outcome o;
    std::ostringstream d;
    d << "R=" << design.replications << " ok=" << rep.estimates.size() << " failed=" << rep.failures << ";";
    for (std::size_t p = 0; p < 3; ++p) {
        const mc::ParamSummary& s = rep.params[p];
        const double gap = std::abs(s.mean - published_means[p]);
        const double tol = k * s.standard_error();
        d << ' ' << mc::kParamNames[p] << " mean " << s.mean << " (published " << published_means[p] << ", |diff| "
          << gap << " vs " << k << "SE " << tol << ")";
        if (!(gap <= tol)) o.pass = false;
        if (check_bias_signs) {
            const double published_bias = published_means[p] - s.truth;
            if ((s.bias > 0.0) != (published_bias > 0.0)) {
                o.pass = false;
                d << " bias sign mismatch";
            }
        }
        if (published_rel_rmse != nullptr) {
            const double target = (*published_rel_rmse)[p];
            const double rel = std::abs(s.relative_rmse - target) / target;
            d << " relRMSE " << s.relative_rmse << " (published " << target << ")";
            if (!(rel <= 0.25)) o.pass = false;
        }
        d << ';';
    }
    o.detail = d.str();
    return o;
}

Outcome table2(std::size_t r) {
    mc::StudyDesign design;
    design.truth = kTable2;
    design.grid = mc::GridTemplate::equally_spaced(5000, 1.0);
    design.replications = r;
    design.estimator.standard_errors = false;
    return study(design, {1.2356, 0.0337, 0.0554}, nullptr, true);
}

Outcome table3(std::size_t r) {
    mc::StudyDesign design;
    design.truth = kTable3;
    design.grid = mc::GridTemplate::frequency(mc::asx_frequency_table());
    design.replications = r;
    design.estimator.standard_errors = false;
    static const std::array<double, 3> rel{0.6733, 0.3291, 0.2848};
    return study(design, {1.9573, 0.0516, 0.0718}, &rel, false);
}

Outcome table1() {
    const double root[] = {0.0237, 0.0473, 0.0710, 0.0946, 0.1183, 0.1419};
    const double theta[] = {0.0629, 0.1157, 0.1594, 0.1953, 0.2243, 0.2472};
    const double kappa[] = {0.9188, 0.8442, 0.7756, 0.7126, 0.6548, 0.6016};
    auto printed = [](double x) { return std::round(x * 1e4) / 1e4; };
    std::size_t matched = 0;
    for (int k = 0; k < 6; ++k) {
        const pml::GarchEquivalent g = pml::transform_to_garch(kAsx, k + 1.0);
        matched += std::abs(printed(g.annualized_omega_root()) - root[k]) < 1e-9;
        matched += std::abs(printed(g.theta) - theta[k]) < 1e-9;
        matched += std::abs(printed(g.kappa) - kappa[k]) < 1e-9;
    }
    return {matched == 18, std::to_string(matched) + "/18 cells match to 4 decimals"};
}

Outcome long_run() {
    const double pct = 100.0 * pml::long_run_volatility(kAsx);
    std::ostringstream d;
    d << pct << "% p.a.";
    return {std::abs(pct - 18.6) <= 0.1, d.str()};
}

Outcome weight_nesting() {
    // Calendar gaps 1..6 carry information time w(Δt) = γ log Δt + c(γ) with γ = 0.5.
    const std::vector<double> calendar = mc::spacings_from_table(mc::asx_frequency_table(), 1994);
    const std::vector<double> info = pml::weight_apply(pml::WeightScheme::log_parametric(0.5), calendar);
    const Grid info_grid = Grid::from_spacings(info);
    const levy::LevySpec spec = unit_poisson();
    const double burn = 1000.0;
    std::vector<double> shifted{0.0};
    for (double t : info_grid.times()) shifted.push_back(burn + t);
    const Grid sampling(shifted);
    const levy::LevyPath path = levy::simulate_levy_path(spec, sampling.horizon(), 20080519);
    const BivariatePath sim =
        simulate_exact(path, kTable3, sampling, kTable3.stationary_mean()).restrict_to(sampling);

    pml::ReturnsSeries series;
    series.times.push_back(0.0);
    for (std::size_t i = 0; i < calendar.size(); ++i) {
        series.times.push_back(series.times.back() + calendar[i]);
        series.returns.push_back(sim.g[i + 2] - sim.g[i + 1]);
    }

    pml::FitConfig cfg;
    cfg.standard_errors = false;
    const pml::WeightedFit identity = pml::fit_weighted(series, pml::WeightKind::Identity, cfg);
    const pml::WeightedFit constant = pml::fit_weighted(series, pml::WeightKind::Constant, cfg);
    const std::vector<pml::WarmStart> for_log{{constant.fit.estimates, constant.scheme}};
    const pml::WeightedFit log = pml::fit_weighted(series, pml::WeightKind::LogParametric, cfg, for_log);
    const std::vector<pml::WarmStart> for_per{{identity.fit.estimates, identity.scheme},
                                              {log.fit.estimates, log.scheme}};
    const pml::WeightedFit per = pml::fit_weighted(series, pml::WeightKind::PerDeltaT, cfg, for_per);

    const double li = identity.fit.log_likelihood;
    const double ll = log.fit.log_likelihood;
    const double lp = per.fit.log_likelihood;
    std::ostringstream d;
    d.precision(10);
    d << "L(per-dt) " << lp << " >= L(log, gamma " << log.scheme.gamma << ") " << ll << " >= L(identity) " << li;
    return {lp >= ll - 1e-6 && ll >= li - 1e-6, d.str()};
}

Outcome innovation_moments() {
    const levy::LevySpec spec = unit_poisson();
    const double n = 1e5;
    const levy::LevyPath p = levy::simulate_levy_path(spec, n, 20080519);
    const levy::InnovationSet set =
        levy::extract_innovations(p, Grid::uniform(n, static_cast<std::size_t>(n)), 0.0, spec);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (double e : set.epsilons()) {
        sum += e;
        sum2 += e * e;
        sum4 += e * e * e * e;
    }
    const double mean = sum / n;
    const double m2 = sum2 / n;
    const double var = m2 - mean * mean;
    const double mean_se = std::sqrt(var / n);
    const double var_se = std::sqrt((sum4 / n - m2 * m2) / n);
    const double xi2 = levy::innovation_moments(spec, 1.0, 0.0).variance;
    const double xi_err = std::abs(xi2 - (1.0 - std::exp(-1.0)));
    std::ostringstream d;
    d << "mean " << mean << " (3SE " << 3 * mean_se << "), var " << var << " (3SE " << 3 * var_se
      << "), |xi^2 - (1 - 1/e)| " << xi_err;
    return {std::abs(mean) <= 3 * mean_se && std::abs(var - 1.0) <= 3 * var_se && xi_err <= 1e-12, d.str()};
}

}  // namespace

int main() {
    const std::size_t r = replications_from_env();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed form vs Euler oracle", closed_form_vs_oracle},
        {"jump-free analytic solution", jump_free},
        {"explicit representation identity", explicit_identity},
        {"Skorokhod bound decreasing along ladder", skorokhod_ladder},
        {"Table 2 Monte Carlo means", [r] { return table2(r); }},
        {"Table 3 Monte Carlo means and relative RMSE", [r] { return table3(r); }},
        {"Table 1 GARCH transforms", table1},
        {"long-run volatility", long_run},
        {"weight-scheme likelihood nesting", weight_nesting},
        {"innovation moments", innovation_moments},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s [%.1f s] %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                    criteria[i].first.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
