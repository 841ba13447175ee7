#pragma once

#include "cogarch/cogarch.hpp"
#include "cogarch/embedding.hpp"
#include "cogarch/levy.hpp"
#include "cogarch/mc.hpp"
#include "cogarch/pml.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cogarch::io {

/// Shortest-free lossless text form: 17 significant digits.
std::string format_double(double x);

/// How the value column of a series file is interpreted.
enum class SeriesMode {
    Prices,   // Y_i = log v_i - log v_{i-1}
    Levels,   // Y_i = v_i - v_{i-1}
    Returns,  // Y_i = v_i; the first row only anchors t_0
};
SeriesMode parse_series_mode(std::string_view text);

/// Reads a `time,<column>` CSV (lines starting with '#' are ignored). Times are
/// shifted so t_0 = 0. Errors name the offending line.
pml::ReturnsSeries ingest(std::istream& in, SeriesMode mode, std::string_view column = "value");
pml::ReturnsSeries ingest_file(const std::filesystem::path& path, SeriesMode mode,
                               std::string_view column = "value");

/// Distinct spacings (exact match) with counts, ascending.
mc::FrequencyTable frequency_table(const pml::ReturnsSeries& series);

/// Flat `key = value` text with '#' comments.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
std::string write_key_values(const KeyValues& kv);

KeyValues to_key_values(const levy::LevySpec& spec);
levy::LevySpec levy_spec_from(const KeyValues& kv);

/// Run metadata embedded in every output artifact.
struct RunStamp {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_hash;
};
/// FNV-1a 64 of the text, as 16 hex digits.
std::string config_hash(std::string_view resolved_config);

void write_levy_path_csv(std::ostream& out, const levy::LevyPath& path);
void write_path_csv(std::ostream& out, const BivariatePath& path, const RunStamp& stamp);
void write_embedded_csv(std::ostream& out, const embedding::EmbeddedSeries& series,
                        const RunStamp& stamp);
void write_convergence_csv(std::ostream& out, const embedding::ConvergenceReport& report,
                           const RunStamp& stamp);
std::string convergence_json(const embedding::ConvergenceReport& report, const RunStamp& stamp);

std::string fit_json(const pml::FitResult& fit, const pml::ReturnsSeries& series,
                     const pml::FitConfig& config, const RunStamp& stamp);
void write_filtered_csv(std::ostream& out, const pml::ReturnsSeries& series,
                        const std::vector<double>& sigma2_hat, const RunStamp& stamp,
                        double days_per_year = 365.0);
/// Table 1 style transform report for each distinct spacing.
std::string transform_report(const pml::FitResult& fit, const mc::FrequencyTable& table,
                             double days_per_year = 365.0);

std::string study_json(const mc::StudyReport& report, const mc::StudyDesign& design,
                       const RunStamp& stamp);
void write_study_estimates_csv(std::ostream& out, const mc::StudyReport& report,
                               const RunStamp& stamp);

/// Writes a `time,value` price file from a returns series, starting at `start_level`.
void write_price_csv(std::ostream& out, const pml::ReturnsSeries& series, double start_level,
                     const RunStamp& stamp);

}  // namespace cogarch::io
