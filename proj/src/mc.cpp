#include "cogarch/mc.hpp"

#include "cogarch/error.hpp"
#include "cogarch/parallel.hpp"
#include "cogarch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>

namespace cogarch::mc {

namespace {

/// Seed of the spacing order shared by all replications of a fixed-order design.
constexpr std::uint64_t kFixedOrderSeed = 1994;
/// Salts separating the random streams used inside one replication.
constexpr std::uint64_t kShuffleSalt = 0x5348554646ULL;
constexpr std::uint64_t kFitSalt = 0x464954ULL;

}  // namespace

FrequencyTable asx_frequency_table() {
    return {{1.0, 1991}, {2.0, 13}, {3.0, 483}, {4.0, 24}, {5.0, 17}, {6.0, 1}};
}

std::vector<double> spacings_from_table(const FrequencyTable& table, std::uint64_t seed) {
    std::vector<double> out;
    for (const auto& [dt, count] : table) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("frequency table spacing must be positive");
        out.insert(out.end(), count, dt);
    }
    if (out.empty()) throw ValidationError("frequency table is empty");
    Rng rng(seed);
    // Explicit Fisher-Yates so the order does not depend on the standard library.
    for (std::size_t i = out.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(out[i], out[j]);
    }
    return out;
}

Grid GridTemplate::grid(std::uint64_t master_seed, std::size_t replication) const {
    if (kind == Kind::EquallySpaced) {
        if (cells == 0) throw ValidationError("grid needs at least one cell");
        if (!(spacing > 0.0)) throw ValidationError("spacing must be positive");
        return Grid::uniform(spacing * static_cast<double>(cells), cells);
    }
    const std::uint64_t seed =
        shuffle_per_replication ? derive_seed(master_seed ^ kShuffleSalt, replication) : kFixedOrderSeed;
    const std::vector<double> dts = spacings_from_table(table, seed);
    return Grid::from_spacings(dts);
}

void StudyDesign::validate() const {
    truth.validate();
    if (!truth.stationary()) throw ValidationError("truth must satisfy eta > phi");
    if (replications == 0) throw ValidationError("need at least one replication");
    if (!(burn_in >= 0.0) || !std::isfinite(burn_in)) throw ValidationError("burn-in must be non-negative");
    if (grid.kind == GridTemplate::Kind::EquallySpaced) {
        if (grid.cells < 3) throw ValidationError("need at least 3 observations");
        if (!(grid.spacing > 0.0)) throw ValidationError("spacing must be positive");
    } else {
        std::size_t n = 0;
        for (const auto& row : grid.table) n += row.second;
        if (n < 3) throw ValidationError("frequency table needs at least 3 observations");
    }
}

double ParamSummary::standard_error() const {
    return count > 0 ? sd / std::sqrt(static_cast<double>(count)) : 0.0;
}

ParamSummary aggregate(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw ValidationError("cannot aggregate an empty list");
    const auto r = static_cast<double>(estimates.size());
    ParamSummary s;
    s.truth = truth;
    s.count = estimates.size();
    double sum = 0.0, abs_err = 0.0, sq_err = 0.0;
    for (double v : estimates) {
        sum += v;
        abs_err += std::abs(v - truth);
        sq_err += (v - truth) * (v - truth);
    }
    s.mean = sum / r;
    s.bias = s.mean - truth;
    s.mae = abs_err / r;
    s.rmse = std::sqrt(sq_err / r);
    s.relative_rmse = truth != 0.0 ? s.rmse / std::abs(truth) : 0.0;
    if (estimates.size() > 1) {
        double ss = 0.0;
        for (double v : estimates) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (r - 1.0));
    }
    return s;
}

pml::ReturnsSeries simulate_returns(const StudyDesign& design, std::size_t replication) {
    const Grid obs = design.grid.grid(design.master_seed, replication);
    std::vector<double> times;
    times.reserve(obs.times().size() + 1);
    times.push_back(0.0);
    for (double t : obs.times()) times.push_back(design.burn_in + t);
    if (design.burn_in == 0.0) times.erase(times.begin());
    const Grid sampling(times);

    const levy::LevyPath path =
        levy::simulate_levy_path(design.driver, sampling.horizon(), derive_seed(design.master_seed, replication));
    const BivariatePath bp = simulate_exact(path, design.truth, sampling, design.truth.stationary_mean());
    const BivariatePath at = bp.restrict_to(sampling);

    const std::size_t offset = design.burn_in == 0.0 ? 0 : 1;
    pml::ReturnsSeries series;
    series.times = obs.times();
    series.returns.reserve(obs.cells());
    for (std::size_t i = 1; i <= obs.cells(); ++i) {
        series.returns.push_back(at.g[offset + i] - at.g[offset + i - 1]);
    }
    return series;
}

StudyReport run_study(const StudyDesign& design) {
    design.validate();
    struct Outcome {
        std::optional<std::array<double, 3>> estimate;
    };
    std::vector<Outcome> outcomes(design.replications);

    parallel_for(design.replications, [&](std::size_t r) {
        const pml::ReturnsSeries series = simulate_returns(design, r);
        pml::FitConfig config = design.estimator;
        config.seed = derive_seed(design.estimator.seed ^ kFitSalt, r);
        try {
            const pml::FitResult f = pml::fit(series, config);
            const CogarchParams& p = f.estimates;
            if (f.hit_floor || !std::isfinite(f.log_likelihood)) return;
            outcomes[r].estimate = std::array<double, 3>{p.beta, p.phi, p.eta};
        } catch (const NumericalError&) {
            // counted as a failure below
        }
    });

    StudyReport report;
    report.replications = design.replications;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (outcomes[r].estimate) {
            report.estimates.push_back(*outcomes[r].estimate);
            report.replication_ids.push_back(r);
        } else {
            ++report.failures;
        }
    }
    if (report.estimates.empty()) throw NumericalError("all replications failed");

    const std::array<double, 3> truth{design.truth.beta, design.truth.phi, design.truth.eta};
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> column;
        column.reserve(report.estimates.size());
        for (const auto& e : report.estimates) column.push_back(e[k]);
        report.params[k] = aggregate(column, truth[k]);
    }
    return report;
}

std::string format_report(const StudyReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(10) << "" << std::right;
    for (const char* name : kParamNames) out << std::setw(12) << name;
    out << '\n';
    auto row = [&](const char* label, auto field) {
        out << std::left << std::setw(10) << label << std::right;
        for (const ParamSummary& p : report.params) out << std::setw(12) << field(p);
        out << '\n';
    };
    row("true", [](const ParamSummary& p) { return p.truth; });
    row("mean", [](const ParamSummary& p) { return p.mean; });
    row("bias", [](const ParamSummary& p) { return p.bias; });
    row("MAE", [](const ParamSummary& p) { return p.mae; });
    row("RMSE", [](const ParamSummary& p) { return p.rmse; });
    row("relRMSE", [](const ParamSummary& p) { return p.relative_rmse; });
    out << "replications " << report.replications << ", failures " << report.failures << '\n';
    return out.str();
}

}  // namespace cogarch::mc
