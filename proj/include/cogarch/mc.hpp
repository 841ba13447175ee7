#pragma once

#include "cogarch/cogarch.hpp"
#include "cogarch/levy.hpp"
#include "cogarch/pml.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cogarch::mc {

/// (spacing, count) rows.
using FrequencyTable = std::vector<std::pair<double, std::size_t>>;

/// Inter-observation frequencies of the daily ASX200 series, Mar 1994 - Mar 2004.
FrequencyTable asx_frequency_table();

/// Spacings of a frequency table in a fixed pseudo-random order derived from `seed`.
std::vector<double> spacings_from_table(const FrequencyTable& table, std::uint64_t seed);

struct GridTemplate {
    enum class Kind { EquallySpaced, Frequency } kind = Kind::EquallySpaced;
    std::size_t cells = 5000;
    double spacing = 1.0;
    FrequencyTable table;
    /// Reshuffle the spacing order for every replication instead of reusing one order.
    bool shuffle_per_replication = false;

    static GridTemplate equally_spaced(std::size_t n, double dt) { return {Kind::EquallySpaced, n, dt, {}, false}; }
    static GridTemplate frequency(FrequencyTable t, bool shuffle = false) {
        return {Kind::Frequency, 0, 0.0, std::move(t), shuffle};
    }
    /// Observation grid used by replication r.
    [[nodiscard]] Grid grid(std::uint64_t master_seed, std::size_t replication) const;
};

struct StudyDesign {
    CogarchParams truth;
    levy::LevySpec driver = levy::LevySpec::compound_poisson(1.0, levy::JumpDist::standard_normal());
    GridTemplate grid;
    std::size_t replications = 200;
    std::uint64_t master_seed = 20080519;
    double burn_in = 1000.0;
    pml::FitConfig estimator;

    void validate() const;
};

struct ParamSummary {
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double relative_rmse = 0.0;
    /// Sample standard deviation (divisor R - 1); 0 when R = 1.
    double sd = 0.0;
    std::size_t count = 0;
    /// sd / √R, the standard error of the mean.
    [[nodiscard]] double standard_error() const;
};

ParamSummary aggregate(std::span<const double> estimates, double truth);

/// Parameter order used throughout reports: β, φ, η.
inline constexpr std::array<const char*, 3> kParamNames{"beta", "phi", "eta"};

struct StudyReport {
    std::array<ParamSummary, 3> params{};
    /// Successful replications, each (β̂, φ̂, η̂).
    std::vector<std::array<double, 3>> estimates;
    std::vector<std::size_t> replication_ids;
    std::size_t failures = 0;
    std::size_t replications = 0;
};

/// One replication: simulated returns on the design grid (with burn-in).
pml::ReturnsSeries simulate_returns(const StudyDesign& design, std::size_t replication);

StudyReport run_study(const StudyDesign& design);

/// Tables 2-3 style text table.
std::string format_report(const StudyReport& report);

}  // namespace cogarch::mc
