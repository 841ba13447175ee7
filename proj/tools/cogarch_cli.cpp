// Command-line frontend: simulate, embed, converge, fit, mc-study, generate-asx.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

#include "cogarch/cogarch.hpp"
#include "cogarch/embedding.hpp"
#include "cogarch/error.hpp"
#include "cogarch/io.hpp"
#include "cogarch/levy.hpp"
#include "cogarch/mc.hpp"
#include "cogarch/pml.hpp"
#include "cogarch/rng.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

using namespace cogarch;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

/// Published ASX200 fit, with √(365β̂) carried at the precision that
/// reproduces the rounded transform table.
constexpr double kAsxRootAnnualBeta = 0.023654;
constexpr double kAsxEta = 0.0847;
constexpr double kAsxPhi = 0.0685;

struct DriverOptions {
    std::string driver = "compound-poisson";
    double rate = 1.0;
    std::string jumps = "normal";
    double diffusion = 0.5;

    void add(CLI::App* app) {
        app->add_option("--driver", driver, "compound-poisson | jump-diffusion | pure-diffusion")
            ->capture_default_str();
        app->add_option("--rate", rate, "jump rate")->capture_default_str();
        app->add_option("--jumps", jumps, "jump law: normal | two-point")->capture_default_str();
        app->add_option("--diffusion", diffusion, "Brownian scale for jump-diffusion")->capture_default_str();
    }
    [[nodiscard]] levy::LevySpec spec() const {
        io::KeyValues kv{{"driver", driver}, {"rate", io::format_double(rate)}, {"jumps", jumps},
                         {"diffusion", io::format_double(diffusion)}};
        return io::levy_spec_from(kv);
    }
};

struct ParamOptions {
    CogarchParams params;
    void add(CLI::App* app) {
        app->add_option("--beta", params.beta, "beta > 0")->capture_default_str();
        app->add_option("--eta", params.eta, "eta > 0")->capture_default_str();
        app->add_option("--phi", params.phi, "phi >= 0")->capture_default_str();
    }
};

struct Output {
    std::ofstream file;
    std::ostream* stream = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw ValidationError("cannot open '" + path + "' for writing");
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

void write_text(const std::string& path, const std::string& text) {
    Output out(path);
    *out << text;
}

/// Hashes the resolved settings of a subcommand; output destinations are left
/// out so the same run written to different files carries the same stamp.
io::RunStamp stamp_for(const CLI::App* sub, std::uint64_t seed) {
    std::istringstream all(sub->config_to_str(true, false));
    std::string resolved = "seed=" + std::to_string(seed) + "\n";
    for (std::string line; std::getline(all, line);) {
        if (line.rfind("out", 0) == 0 || line.rfind("driver-out", 0) == 0) continue;
        resolved += line + "\n";
    }
    return {sub->get_name(), seed, io::config_hash(resolved)};
}

double resolve_sigma0(const std::optional<double>& sigma0, const CogarchParams& params) {
    return sigma0 ? Sigma0Policy::fixed(*sigma0).resolve(params) : Sigma0Policy::stationary().resolve(params);
}

std::optional<Grid> mesh_for(const levy::LevySpec& spec, const Grid& grid, std::size_t refine) {
    if (spec.diffusion_scale() == 0.0) return std::nullopt;
    return Grid::uniform(grid.horizon(), grid.cells() * refine);
}

pml::VarianceMode parse_variance(const std::string& s) {
    if (s == "exact") return pml::VarianceMode::Exact;
    if (s == "first-order") return pml::VarianceMode::FirstOrder;
    throw ValidationError("unknown variance mode '" + s + "' (expected exact or first-order)");
}

pml::WeightKind parse_weights(const std::string& s) {
    if (s == "identity") return pml::WeightKind::Identity;
    if (s == "constant") return pml::WeightKind::Constant;
    if (s == "log") return pml::WeightKind::LogParametric;
    if (s == "per-dt") return pml::WeightKind::PerDeltaT;
    throw ValidationError("unknown weight scheme '" + s + "' (expected identity, constant, log or per-dt)");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("cannot parse list entry '" + item + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"COGARCH simulation, GARCH embedding and pseudo-likelihood estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "read options from a key = value file");

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "master seed")->envname("COGARCH_SEED")->capture_default_str();

    std::function<void()> action;

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "simulate a COGARCH path on a grid");
    DriverOptions sim_driver;
    ParamOptions sim_params;
    double sim_horizon = 100.0;
    std::size_t sim_cells = 100;
    std::optional<double> sim_sigma0;
    std::string sim_flavor = "exact";
    double sim_step = 1e-3;
    bool sim_jumps = false;
    std::string sim_out, sim_driver_out;
    sim_driver.add(sim);
    sim_params.add(sim);
    sim->add_option("--horizon", sim_horizon, "T")->capture_default_str();
    sim->add_option("--cells", sim_cells, "number of equal grid cells")->capture_default_str();
    sim->add_option("--sigma0", sim_sigma0, "sigma^2(0); default is the stationary mean");
    sim->add_option("--flavor", sim_flavor, "exact | euler | both")->capture_default_str();
    sim->add_option("--euler-step", sim_step, "Euler oracle step")->capture_default_str();
    sim->add_flag("--include-jumps", sim_jumps, "also emit samples at jump times");
    sim->add_option("--out", sim_out, "path CSV (default stdout)");
    sim->add_option("--driver-out", sim_driver_out, "optional CSV of the driver's jumps");
    sim->callback([&] {
        action = [&] {
            const levy::LevySpec spec = sim_driver.spec();
            const Grid grid = Grid::uniform(sim_horizon, sim_cells);
            const levy::LevyPath path = levy::simulate_levy_path(spec, sim_horizon, seed, mesh_for(spec, grid, 64));
            const double s0 = resolve_sigma0(sim_sigma0, sim_params.params);
            const io::RunStamp stamp = stamp_for(sim, seed);
            if (sim_flavor != "exact" && sim_flavor != "euler" && sim_flavor != "both") {
                throw ValidationError("unknown flavor '" + sim_flavor + "'");
            }
            Output out(sim_out);
            auto emit = [&](const BivariatePath& p) {
                io::write_path_csv(*out, sim_jumps ? p : p.restrict_to(grid), stamp);
            };
            if (sim_flavor != "euler") emit(simulate_exact(path, sim_params.params, grid, s0));
            if (sim_flavor != "exact") emit(euler_oracle(path, sim_params.params, sim_step, grid, s0));
            if (!sim_driver_out.empty()) {
                Output d(sim_driver_out);
                io::write_levy_path_csv(*d, path);
            }
        };
    });

    // ---- embed ----
    auto* emb = app.add_subcommand("embed", "embedded GARCH series from one driver path");
    DriverOptions emb_driver;
    ParamOptions emb_params;
    double emb_horizon = 100.0;
    std::size_t emb_cells = 100;
    std::optional<double> emb_sigma0;
    std::string emb_out;
    emb_driver.add(emb);
    emb_params.add(emb);
    emb->add_option("--horizon", emb_horizon, "T")->capture_default_str();
    emb->add_option("--cells", emb_cells, "number of equal grid cells")->capture_default_str();
    emb->add_option("--sigma0", emb_sigma0, "sigma^2(0); default is the stationary mean");
    emb->add_option("--out", emb_out, "embedded series CSV (default stdout)");
    emb->callback([&] {
        action = [&] {
            const levy::LevySpec spec = emb_driver.spec();
            const Grid grid = Grid::uniform(emb_horizon, emb_cells);
            const levy::LevyPath path = levy::simulate_levy_path(spec, emb_horizon, seed, mesh_for(spec, grid, 1));
            const levy::ThresholdChoice m = levy::choose_threshold(grid, spec);
            if (!m.rate_condition_met) std::cerr << "warning: " << m.warning << '\n';
            const levy::InnovationSet innov = levy::extract_innovations(path, grid, m.m, spec);
            const embedding::EmbeddedSeries series =
                embedding::embed(innov, emb_params.params, resolve_sigma0(emb_sigma0, emb_params.params));
            Output out(emb_out);
            io::write_embedded_csv(*out, series, stamp_for(emb, seed));
            std::cerr << "explicit representation max relative deviation: "
                      << io::format_double(embedding::explicit_sigma_check(series)) << '\n';
        };
    });

    // ---- converge ----
    auto* conv = app.add_subcommand("converge", "Skorokhod-bound ladder study");
    DriverOptions conv_driver;
    ParamOptions conv_params;
    double conv_horizon = 100.0;
    std::string conv_ladder = "1,0.5,0.25,0.125";
    std::size_t conv_seeds = 16;
    std::string conv_csv, conv_json;
    conv_driver.add(conv);
    conv_params.add(conv);
    conv->add_option("--horizon", conv_horizon, "T")->capture_default_str();
    conv->add_option("--ladder", conv_ladder, "comma-separated spacings, coarse to fine")->capture_default_str();
    conv->add_option("--seeds", conv_seeds, "number of shared-path seeds")->capture_default_str();
    conv->add_option("--out-csv", conv_csv, "per-level CSV (default stdout)");
    conv->add_option("--out-json", conv_json, "full JSON report");
    conv->callback([&] {
        action = [&] {
            embedding::ConvergenceDesign d;
            d.driver = conv_driver.spec();
            d.params = conv_params.params;
            d.horizon = conv_horizon;
            d.cells = embedding::ladder_from_spacings(conv_horizon, parse_list(conv_ladder));
            d.seeds = conv_seeds;
            d.master_seed = seed;
            const embedding::ConvergenceReport report = embedding::convergence_study(d);
            const io::RunStamp stamp = stamp_for(conv, seed);
            Output out(conv_csv);
            io::write_convergence_csv(*out, report, stamp);
            if (!conv_json.empty()) write_text(conv_json, io::convergence_json(report, stamp));
            std::cerr << "median bound " << (report.monotone ? "decreasing" : "NOT decreasing")
                      << " along the ladder\n";
        };
    });

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "pseudo-maximum-likelihood fit of a returns file");
    std::string fit_input, fit_mode = "prices", fit_column = "value", fit_variance = "first-order";
    std::string fit_weights = "identity", fit_filter = "unit";
    pml::FitConfig fit_config;
    double fit_annualize = 365.0;
    std::string fit_json_out, fit_filtered_out, fit_transform_out;
    fit->add_option("--input", fit_input, "CSV with a time column")->required();
    fit->add_option("--series-mode", fit_mode, "prices | levels | returns")->capture_default_str();
    fit->add_option("--column", fit_column, "value column name")->capture_default_str();
    fit->add_option("--variance", fit_variance, "exact | first-order")->capture_default_str();
    fit->add_option("--weights", fit_weights, "identity | constant | log | per-dt")->capture_default_str();
    fit->add_option("--restarts", fit_config.restarts, "starting simplices")->capture_default_str();
    fit->add_option("--xtol", fit_config.xtol, "simplex spread tolerance")->capture_default_str();
    fit->add_option("--max-iterations", fit_config.max_iterations, "per restart")->capture_default_str();
    fit->add_option("--filter", fit_filter, "unit | spacing (filtered-volatility recursion)")->capture_default_str();
    fit->add_option("--annualize", fit_annualize, "days per year for display")->capture_default_str();
    fit->add_option("--out-json", fit_json_out, "fit result JSON (default stdout)");
    fit->add_option("--out-filtered", fit_filtered_out, "filtered volatility CSV");
    fit->add_option("--out-transform", fit_transform_out, "GARCH transform report");
    fit->callback([&] {
        action = [&] {
            const pml::ReturnsSeries series = io::ingest_file(fit_input, io::parse_series_mode(fit_mode), fit_column);
            fit_config.mode = parse_variance(fit_variance);
            fit_config.seed = seed;
            const pml::WeightKind kind = parse_weights(fit_weights);
            const pml::FilterForm form = fit_filter == "unit"      ? pml::FilterForm::UnitSpacing
                                         : fit_filter == "spacing" ? pml::FilterForm::SpacingAware
                                                                   : throw ValidationError("unknown filter '" + fit_filter + "'");
            std::vector<pml::WarmStart> warm;
            if (kind != pml::WeightKind::Identity) {
                pml::FitConfig quick = fit_config;
                quick.standard_errors = false;
                warm.push_back({pml::fit(series, quick).estimates, pml::WeightScheme::identity()});
                if (kind != pml::WeightKind::Constant) {
                    const pml::WeightedFit flat = pml::fit_weighted(series, pml::WeightKind::Constant, quick);
                    warm.push_back({flat.fit.estimates, flat.scheme});
                }
            }
            const pml::WeightedFit wf = pml::fit_weighted(series, kind, fit_config, warm);
            const io::RunStamp stamp = stamp_for(fit, seed);
            write_text(fit_json_out, io::fit_json(wf.fit, series, fit_config, stamp));
            if (!fit_filtered_out.empty()) {
                Output out(fit_filtered_out);
                io::write_filtered_csv(*out, series, pml::filter_volatility(series, wf.fit.estimates, form), stamp,
                                       fit_annualize);
            }
            const std::string report = io::transform_report(wf.fit, io::frequency_table(series), fit_annualize);
            if (!fit_transform_out.empty()) write_text(fit_transform_out, report);
            std::cerr << report;
        };
    });

    // ---- mc-study ----
    auto* study = app.add_subcommand("mc-study", "Monte Carlo study of the estimator");
    std::string st_design = "table2", st_variance = "first-order", st_json, st_csv;
    std::size_t st_reps = 200, st_restarts = 10, st_cells = 5000;
    double st_spacing = 1.0, st_xtol = 1e-14, st_burn = 1000.0;
    bool st_shuffle = false;
    std::optional<double> st_beta, st_eta, st_phi;
    study->add_option("--design", st_design, "table2 | table3 | custom")->capture_default_str();
    study->add_option("--replications", st_reps, "R")->capture_default_str();
    study->add_option("--variance", st_variance, "exact | first-order")->capture_default_str();
    study->add_option("--restarts", st_restarts, "starting simplices per fit")->capture_default_str();
    study->add_option("--xtol", st_xtol, "simplex spread tolerance")->capture_default_str();
    study->add_option("--burn-in", st_burn, "discarded time before the first observation")->capture_default_str();
    study->add_option("--cells", st_cells, "custom design: N")->capture_default_str();
    study->add_option("--spacing", st_spacing, "custom design: dt")->capture_default_str();
    study->add_flag("--shuffle", st_shuffle, "reshuffle irregular spacings per replication");
    study->add_option("--beta", st_beta, "override true beta");
    study->add_option("--eta", st_eta, "override true eta");
    study->add_option("--phi", st_phi, "override true phi");
    study->add_option("--out-json", st_json, "study report JSON");
    study->add_option("--out-csv", st_csv, "per-replication estimates CSV");
    study->callback([&] {
        action = [&] {
            mc::StudyDesign d;
            if (st_design == "table2") {
                d.truth = {1.0, 0.06, 0.0425};
                d.grid = mc::GridTemplate::equally_spaced(5000, 1.0);
            } else if (st_design == "table3") {
                d.truth = {1.5, 0.085, 0.069};
                d.grid = mc::GridTemplate::frequency(mc::asx_frequency_table(), st_shuffle);
            } else if (st_design == "custom") {
                d.grid = mc::GridTemplate::equally_spaced(st_cells, st_spacing);
            } else {
                throw ValidationError("unknown design '" + st_design + "'");
            }
            if (st_beta) d.truth.beta = *st_beta;
            if (st_eta) d.truth.eta = *st_eta;
            if (st_phi) d.truth.phi = *st_phi;
            d.replications = st_reps;
            d.master_seed = seed;
            d.burn_in = st_burn;
            d.estimator.mode = parse_variance(st_variance);
            d.estimator.restarts = st_restarts;
            d.estimator.xtol = st_xtol;
            d.estimator.standard_errors = false;
            const mc::StudyReport report = mc::run_study(d);
            const io::RunStamp stamp = stamp_for(study, seed);
            std::cout << mc::format_report(report);
            if (!st_json.empty()) write_text(st_json, io::study_json(report, d, stamp));
            if (!st_csv.empty()) {
                Output out(st_csv);
                io::write_study_estimates_csv(*out, report, stamp);
            }
        };
    });

    // ---- generate-asx ----
    auto* gen = app.add_subcommand("generate-asx", "synthetic price file on the ASX observation grid");
    double gen_start = 3000.0;
    std::string gen_out;
    gen->add_option("--start-level", gen_start, "initial index level")->capture_default_str();
    gen->add_option("--out", gen_out, "price CSV (default stdout)");
    gen->callback([&] {
        action = [&] {
            mc::StudyDesign d;
            d.truth = {kAsxRootAnnualBeta * kAsxRootAnnualBeta / 365.0, kAsxEta, kAsxPhi};
            d.grid = mc::GridTemplate::frequency(mc::asx_frequency_table());
            d.master_seed = seed;
            d.replications = 1;
            d.validate();
            const pml::ReturnsSeries series = mc::simulate_returns(d, 0);
            Output out(gen_out);
            io::write_price_csv(*out, series, gen_start, stamp_for(gen, seed));
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (action) action();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
