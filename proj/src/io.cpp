#include "cogarch/io.hpp"

#include "cogarch/error.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace cogarch::io {

namespace {

using nlohmann::ordered_json;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ValidationError("line " + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
    if (!std::isfinite(v)) throw ValidationError("line " + std::to_string(line_no) + ": value is not finite");
    return v;
}

void write_stamp(std::ostream& out, const RunStamp& stamp) {
    out << "# command=" << stamp.command << " seed=" << stamp.seed << " config_hash=" << stamp.config_hash << '\n';
}

ordered_json stamp_json(const RunStamp& stamp) {
    return {{"command", stamp.command}, {"seed", stamp.seed}, {"config_hash", stamp.config_hash}};
}

std::string parse_error_prefix(const KeyValues& kv, const std::string& key) {
    (void)kv;
    return "config key '" + key + "': ";
}

double kv_number(const KeyValues& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double v = 0.0;
    const std::string& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError(parse_error_prefix(kv, key) + "not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    if (ec != std::errc()) throw ValidationError("cannot format number");
    return std::string(buf.data(), ptr);
}

SeriesMode parse_series_mode(std::string_view text) {
    if (text == "prices" || text == "price") return SeriesMode::Prices;
    if (text == "levels" || text == "level") return SeriesMode::Levels;
    if (text == "returns" || text == "return") return SeriesMode::Returns;
    throw ValidationError("unknown series mode '" + std::string(text) + "' (expected prices, levels or returns)");
}

pml::ReturnsSeries ingest(std::istream& in, SeriesMode mode, std::string_view column) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t value_col = 0;
    bool have_header = false;
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split_csv(t);
        if (!have_header) {
            if (fields.empty() || fields.front() != "time") {
                throw ValidationError("line " + std::to_string(line_no) + ": expected header starting with 'time'");
            }
            bool found = false;
            for (std::size_t k = 1; k < fields.size(); ++k) {
                if (fields[k] == column) {
                    value_col = k;
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw ValidationError("line " + std::to_string(line_no) + ": no column named '" + std::string(column) + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() <= value_col) {
            throw ValidationError("line " + std::to_string(line_no) + ": too few fields");
        }
        const double time = parse_number(fields[0], line_no);
        const double value = parse_number(fields[value_col], line_no);
        if (!times.empty() && !(time > times.back())) {
            throw ValidationError("line " + std::to_string(line_no) + ": time not strictly increasing");
        }
        if (mode == SeriesMode::Prices && !(value > 0.0)) {
            throw ValidationError("line " + std::to_string(line_no) + ": prices must be positive");
        }
        times.push_back(time);
        values.push_back(value);
    }
    if (!have_header) throw ValidationError("missing header line");
    if (times.size() < 4) throw ValidationError("series needs at least 4 rows");

    pml::ReturnsSeries s;
    s.times.reserve(times.size());
    for (double t : times) s.times.push_back(t - times.front());
    for (std::size_t i = 1; i < values.size(); ++i) {
        switch (mode) {
            case SeriesMode::Prices: s.returns.push_back(std::log(values[i]) - std::log(values[i - 1])); break;
            case SeriesMode::Levels: s.returns.push_back(values[i] - values[i - 1]); break;
            case SeriesMode::Returns: s.returns.push_back(values[i]); break;
        }
    }
    s.validate();
    return s;
}

pml::ReturnsSeries ingest_file(const std::filesystem::path& path, SeriesMode mode, std::string_view column) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    return ingest(in, mode, column);
}

mc::FrequencyTable frequency_table(const pml::ReturnsSeries& series) {
    std::map<double, std::size_t> counts;
    for (double d : series.spacings()) ++counts[d];
    return {counts.begin(), counts.end()};
}

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string t = trim(std::string_view(line).substr(0, hash));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty key");
        kv[key] = trim(std::string_view(t).substr(eq + 1));
    }
    return kv;
}

std::string write_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

KeyValues to_key_values(const levy::LevySpec& spec) {
    KeyValues kv;
    switch (spec.kind()) {
        case levy::DriverKind::CompoundPoisson: kv["driver"] = "compound-poisson"; break;
        case levy::DriverKind::JumpDiffusion: kv["driver"] = "jump-diffusion"; break;
        case levy::DriverKind::PureDiffusion: kv["driver"] = "pure-diffusion"; break;
    }
    if (spec.has_jumps()) {
        kv["rate"] = format_double(spec.rate());
        kv["jumps"] = spec.jumps().law() == levy::JumpDist::Law::Normal ? "normal" : "two-point";
    }
    if (spec.kind() == levy::DriverKind::JumpDiffusion) kv["diffusion"] = format_double(spec.diffusion_scale());
    return kv;
}

levy::LevySpec levy_spec_from(const KeyValues& kv) {
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    const std::string driver = get("driver", "compound-poisson");
    const std::string law = get("jumps", "normal");
    levy::JumpDist jumps = levy::JumpDist::standard_normal();
    if (law == "two-point") {
        jumps = levy::JumpDist::two_point(1.0);
    } else if (law != "normal") {
        throw ValidationError("unknown jump law '" + law + "' (expected normal or two-point)");
    }
    const double rate = kv_number(kv, "rate", 1.0);
    if (driver == "compound-poisson") return levy::LevySpec::compound_poisson(rate, jumps);
    if (driver == "jump-diffusion") {
        return levy::LevySpec::jump_diffusion(kv_number(kv, "diffusion", 0.5), rate, jumps);
    }
    if (driver == "pure-diffusion") return levy::LevySpec::pure_diffusion();
    throw ValidationError("unknown driver '" + driver + "'");
}

std::string config_hash(std::string_view resolved_config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : resolved_config) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

void write_levy_path_csv(std::ostream& out, const levy::LevyPath& path) {
    out << "# horizon=" << format_double(path.horizon) << " seed=" << path.seed << '\n';
    out << "time,jump\n";
    for (const levy::Jump& j : path.jumps) out << format_double(j.time) << ',' << format_double(j.size) << '\n';
}

void write_path_csv(std::ostream& out, const BivariatePath& path, const RunStamp& stamp) {
    write_stamp(out, stamp);
    out << "time,G,sigma2,flavor\n";
    const std::string_view flavor = to_string(path.flavor);
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_double(path.times[i]) << ',' << format_double(path.g[i]) << ','
            << format_double(path.sigma2[i]) << ',' << flavor << '\n';
    }
}

void write_embedded_csv(std::ostream& out, const embedding::EmbeddedSeries& series, const RunStamp& stamp) {
    write_stamp(out, stamp);
    out << "time,G,sigma2,epsilon\n";
    const auto& t = series.grid.times();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double eps = i == 0 ? 0.0 : series.innovations.cells[i - 1].epsilon;
        out << format_double(t[i]) << ',' << format_double(series.g[i]) << ',' << format_double(series.sigma2[i])
            << ',' << format_double(eps) << '\n';
    }
}

void write_convergence_csv(std::ostream& out, const embedding::ConvergenceReport& report, const RunStamp& stamp) {
    write_stamp(out, stamp);
    out << "cells,mesh,sup_g_median,sup_sigma2_median,bound_median,terminal_sigma2_variance,last_cell_jumps,"
           "threshold_warning\n";
    for (const auto& l : report.levels) {
        out << l.cells << ',' << format_double(l.mesh) << ',' << format_double(l.sup_g_median) << ','
            << format_double(l.sup_sigma2_median) << ',' << format_double(l.bound_median) << ','
            << format_double(l.terminal_sigma2_variance) << ',' << l.last_cell_jumps << ','
            << (l.threshold_warning ? 1 : 0) << '\n';
    }
}

std::string convergence_json(const embedding::ConvergenceReport& report, const RunStamp& stamp) {
    ordered_json j;
    j["run"] = stamp_json(stamp);
    j["seeds"] = report.seeds;
    j["master_seed"] = report.master_seed;
    j["monotone"] = report.monotone;
    ordered_json levels = ordered_json::array();
    for (std::size_t l = 0; l < report.levels.size(); ++l) {
        const auto& lv = report.levels[l];
        levels.push_back({{"cells", lv.cells},
                          {"mesh", lv.mesh},
                          {"sup_g_median", lv.sup_g_median},
                          {"sup_sigma2_median", lv.sup_sigma2_median},
                          {"bound_median", lv.bound_median},
                          {"terminal_sigma2_variance", lv.terminal_sigma2_variance},
                          {"last_cell_jumps", lv.last_cell_jumps},
                          {"threshold_warning", lv.threshold_warning},
                          {"bounds", report.bounds[l]}});
    }
    j["levels"] = levels;
    return j.dump(2) + "\n";
}

std::string fit_json(const pml::FitResult& fit, const pml::ReturnsSeries& series, const pml::FitConfig& config,
                     const RunStamp& stamp) {
    ordered_json j;
    j["run"] = stamp_json(stamp);
    j["observations"] = series.size();
    j["horizon"] = series.horizon();
    j["mode"] = std::string(to_string(config.mode));
    j["estimates"] = {{"beta", fit.estimates.beta}, {"eta", fit.estimates.eta}, {"phi", fit.estimates.phi}};
    if (fit.se_available) {
        j["standard_errors"] = {{"beta", fit.standard_errors[0]},
                                {"eta", fit.standard_errors[1]},
                                {"phi", fit.standard_errors[2]}};
    } else {
        j["standard_errors"] = nullptr;
    }
    j["log_likelihood"] = fit.log_likelihood;
    j["flags"] = {{"converged", fit.converged},
                  {"hit_floor", fit.hit_floor},
                  {"stationary", fit.stationary},
                  {"se_available", fit.se_available}};
    j["restarts"] = fit.restarts;
    j["finite_restarts"] = fit.finite_restarts;
    j["iterations"] = fit.iterations;
    j["simplex_spread"] = fit.spread;
    if (fit.stationary) j["long_run_volatility"] = pml::long_run_volatility(fit.estimates);
    return j.dump(2) + "\n";
}

void write_filtered_csv(std::ostream& out, const pml::ReturnsSeries& series, const std::vector<double>& sigma2_hat,
                        const RunStamp& stamp, double days_per_year) {
    if (sigma2_hat.size() != series.times.size()) {
        throw ValidationError("filtered variances do not match the series length");
    }
    write_stamp(out, stamp);
    out << "t,sigma2_hat,annualized_vol\n";
    for (std::size_t i = 0; i < sigma2_hat.size(); ++i) {
        out << format_double(series.times[i]) << ',' << format_double(sigma2_hat[i]) << ','
            << format_double(std::sqrt(days_per_year * sigma2_hat[i])) << '\n';
    }
}

std::string transform_report(const pml::FitResult& fit, const mc::FrequencyTable& table, double days_per_year) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(16) << "dt" << std::right;
    for (const auto& row : table) out << std::setw(10) << row.first;
    out << '\n' << std::left << std::setw(16) << "count" << std::right;
    for (const auto& row : table) out << std::setw(10) << row.second;
    out << '\n';
    auto line = [&](const char* label, auto value) {
        out << std::left << std::setw(16) << label << std::right;
        for (const auto& row : table) out << std::setw(10) << value(pml::transform_to_garch(fit.estimates, row.first));
        out << '\n';
    };
    line("sqrt(365*omega)", [&](const pml::GarchEquivalent& g) { return g.annualized_omega_root(days_per_year); });
    line("theta", [](const pml::GarchEquivalent& g) { return g.theta; });
    line("kappa", [](const pml::GarchEquivalent& g) { return g.kappa; });
    if (fit.stationary) {
        out << "long-run volatility " << std::setprecision(2)
            << 100.0 * pml::long_run_volatility(fit.estimates, days_per_year) << "%\n";
    }
    return out.str();
}

std::string study_json(const mc::StudyReport& report, const mc::StudyDesign& design, const RunStamp& stamp) {
    ordered_json j;
    j["run"] = stamp_json(stamp);
    j["replications"] = report.replications;
    j["failures"] = report.failures;
    j["master_seed"] = design.master_seed;
    j["mode"] = std::string(to_string(design.estimator.mode));
    ordered_json params;
    for (std::size_t k = 0; k < 3; ++k) {
        const mc::ParamSummary& p = report.params[k];
        params[mc::kParamNames[k]] = {{"truth", p.truth},
                                      {"mean", p.mean},
                                      {"bias", p.bias},
                                      {"mae", p.mae},
                                      {"rmse", p.rmse},
                                      {"relative_rmse", p.relative_rmse},
                                      {"sd", p.sd},
                                      {"standard_error", p.standard_error()}};
    }
    j["params"] = params;
    return j.dump(2) + "\n";
}

void write_study_estimates_csv(std::ostream& out, const mc::StudyReport& report, const RunStamp& stamp) {
    write_stamp(out, stamp);
    out << "replication,beta,phi,eta\n";
    for (std::size_t i = 0; i < report.estimates.size(); ++i) {
        const auto& e = report.estimates[i];
        out << report.replication_ids[i] << ',' << format_double(e[0]) << ',' << format_double(e[1]) << ','
            << format_double(e[2]) << '\n';
    }
}

void write_price_csv(std::ostream& out, const pml::ReturnsSeries& series, double start_level, const RunStamp& stamp) {
    if (!(start_level > 0.0)) throw ValidationError("start level must be positive");
    write_stamp(out, stamp);
    out << "time,value\n";
    double log_level = std::log(start_level);
    out << format_double(series.times[0]) << ',' << format_double(start_level) << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        log_level += series.returns[i];
        out << format_double(series.times[i + 1]) << ',' << format_double(std::exp(log_level)) << '\n';
    }
}

}  // namespace cogarch::io
