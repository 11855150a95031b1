// peakprob: coincident-peak scenario generation, probability estimation and
// strategy backtesting from hourly load CSVs.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "peakprob/calendar.hpp"
#include "peakprob/errors.hpp"
#include "peakprob/estimators.hpp"
#include "peakprob/model_io.hpp"
#include "peakprob/scengen.hpp"
#include "peakprob/series.hpp"
#include "peakprob/stats.hpp"
#include "peakprob/strategies.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace peakprob;

namespace {

struct RunConfig {
    std::string program;
    std::string zone;
    std::string parent_zone;
    std::string actual_path;
    std::string forecast_path;
    std::string parent_actual_path;
    std::string parent_forecast_path;
    CsvSchema csv;
    std::string vintage = "23";
    int n_scenarios = 1000;
    std::uint64_t seed = 1;
    EngineConfig engine;
    std::vector<std::string> strategies = {"1aS"};
    double color_floor = 0.2;
    int start_year = 2014;
    int end_year = 2023;
    int history_start_year = 2011;
    std::string holidays_path;
    std::string registry_path;
    std::string output_dir = "out";
    int refit_every_days = 1;
    int workers = 1;

    json resolved; // manifest snapshot
};

std::string resolve_data_path(const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    if (const char* base = std::getenv("PEAKPROB_DATA_DIR")) {
        const fs::path candidate = fs::path(base) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    RunConfig c;
    try {
        c.program = j.at("program").get<std::string>();
        c.zone = j.value("zone", c.program);
        c.parent_zone = j.value("parent_zone", std::string{});
        const json data = j.value("data", json::object());
        c.actual_path = resolve_data_path(data.value("actual", std::string{}));
        c.forecast_path = resolve_data_path(data.value("forecast", std::string{}));
        c.parent_actual_path = resolve_data_path(data.value("parent_actual", std::string{}));
        c.parent_forecast_path =
            resolve_data_path(data.value("parent_forecast", std::string{}));
        const json csv = j.value("csv", json::object());
        c.csv.datetime_column = csv.value("datetime_column", std::string{});
        c.csv.date_column = csv.value("date_column", std::string{});
        c.csv.hour_column = csv.value("hour_column", std::string{});
        c.csv.value_column = csv.value("value_column", std::string{"mw"});
        c.csv.hour_is_one_based = csv.value("hour_is_one_based", false);
        c.vintage = j.value("vintage", c.vintage);
        c.n_scenarios = j.value("scenarios", c.n_scenarios);
        c.seed = j.value("seed", c.seed);
        c.engine.marginal.tail_fraction = j.value("tail_fraction", 0.15);
        c.engine.glasso.lambda = j.value("lambda", 0.01);
        c.engine.glasso.penalize_diagonal = j.value("penalize_diagonal", false);
        c.engine.lambda_grid = j.value("lambda_grid", std::vector<double>{});
        c.engine.cv_folds = j.value("cv_folds", 5);
        c.engine.min_history_days = j.value("min_history_days", 30);
        c.strategies = j.value("strategies", c.strategies);
        c.color_floor = j.value("color_floor", 0.2);
        const json years = j.value("years", json::object());
        c.start_year = years.value("start", c.start_year);
        c.end_year = years.value("end", c.end_year);
        c.history_start_year = j.value("history_start_year", c.history_start_year);
        c.holidays_path = resolve_data_path(j.value("holidays", std::string{}));
        c.registry_path = resolve_data_path(j.value("registry", std::string{}));
        c.output_dir = j.value("output_dir", c.output_dir);
        c.refit_every_days = j.value("refit_every_days", 1);
        c.workers = j.value("workers", 1);
    } catch (const json::exception& e) {
        throw ConfigError("config field error: " + std::string(e.what()));
    }

    if (c.n_scenarios < 1) throw ConfigError("scenarios must be >= 1");
    if (c.refit_every_days < 1) throw ConfigError("refit_every_days must be >= 1");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");

    const bool conditional = !c.parent_zone.empty();
    if (conditional) {
        if (c.parent_actual_path.empty() || c.parent_forecast_path.empty()) {
            throw ConfigError("conditional mode needs parent_actual and parent_forecast");
        }
        if (!c.forecast_path.empty()) {
            throw ConfigError(
                "conditional mode takes the forecast on the parent zone only; "
                "remove data.forecast");
        }
        if (c.actual_path.empty()) throw ConfigError("conditional mode needs data.actual");
    } else {
        if (c.actual_path.empty() || c.forecast_path.empty()) {
            throw ConfigError("need data.actual and data.forecast");
        }
    }

    // Effective values, for the run manifest.
    c.resolved = {
        {"program", c.program},
        {"zone", c.zone},
        {"parent_zone", c.parent_zone},
        {"data",
         {{"actual", c.actual_path},
          {"forecast", c.forecast_path},
          {"parent_actual", c.parent_actual_path},
          {"parent_forecast", c.parent_forecast_path}}},
        {"csv",
         {{"datetime_column", c.csv.datetime_column},
          {"date_column", c.csv.date_column},
          {"hour_column", c.csv.hour_column},
          {"value_column", c.csv.value_column},
          {"hour_is_one_based", c.csv.hour_is_one_based}}},
        {"vintage", c.vintage},
        {"scenarios", c.n_scenarios},
        {"seed", c.seed},
        {"tail_fraction", c.engine.marginal.tail_fraction},
        {"lambda", c.engine.glasso.lambda},
        {"penalize_diagonal", c.engine.glasso.penalize_diagonal},
        {"lambda_grid", c.engine.lambda_grid},
        {"cv_folds", c.engine.cv_folds},
        {"min_history_days", c.engine.min_history_days},
        {"strategies", c.strategies},
        {"color_floor", c.color_floor},
        {"years", {{"start", c.start_year}, {"end", c.end_year}}},
        {"history_start_year", c.history_start_year},
        {"holidays", c.holidays_path},
        {"registry", c.registry_path},
        {"output_dir", c.output_dir},
        {"refit_every_days", c.refit_every_days},
        {"workers", c.workers},
    };
    return c;
}

CpProgramRule lookup_rule(const RunConfig& c) {
    if (!c.registry_path.empty()) {
        for (const auto& r : load_program_registry_file(c.registry_path)) {
            if (r.jurisdiction_id == c.program) return r;
        }
        throw ConfigError("program '" + c.program + "' not found in registry file " +
                          c.registry_path);
    }
    return registry_lookup(c.program);
}

DataBundle load_bundle(const RunConfig& c) {
    DataBundle bundle;
    bundle.vintage = vintage_by_label(c.vintage);
    bundle.actual = parse_load_csv(c.actual_path, c.csv, c.zone, SeriesKind::Actual);
    if (!c.forecast_path.empty()) {
        bundle.forecast =
            parse_load_csv(c.forecast_path, c.csv, c.zone, SeriesKind::Forecast);
    }
    if (!c.parent_zone.empty()) {
        bundle.parent_actual = parse_load_csv(c.parent_actual_path, c.csv, c.parent_zone,
                                              SeriesKind::Actual);
        bundle.parent_forecast = parse_load_csv(c.parent_forecast_path, c.csv, c.parent_zone,
                                                SeriesKind::Forecast);
    }
    if (!c.holidays_path.empty()) bundle.holidays = load_holidays_file(c.holidays_path);
    return bundle;
}

void write_manifest(const RunConfig& c, const std::string& command, const json& extra) {
    fs::create_directories(c.output_dir);
    json manifest = c.resolved;
    manifest["command"] = command;
    for (const auto& [k, v] : extra.items()) manifest[k] = v;
    std::ofstream out(fs::path(c.output_dir) / "run_manifest.json");
    out << manifest.dump(2) << '\n';
}

// Fits an engine for generating scenarios on `day`, training on eligible
// history strictly before it.
FittedEngine fit_engine_for_day(const DataBundle& bundle, const RunConfig& c,
                                const CpProgramRule& rule, Date day) {
    std::vector<ProgramYear> years;
    for (int y = c.history_start_year; y <= year_of(day); ++y) {
        years.push_back(eligible_days(rule, y, bundle.holidays));
    }
    const std::set<Date> eligible = union_eligible(years);

    if (bundle.conditional()) {
        const DeviationSeries dev =
            compute_deviations(*bundle.parent_actual, *bundle.parent_forecast, bundle.vintage);
        DayMatrix z1 = build_level_matrix(*bundle.parent_actual, day, eligible, 0);
        DayMatrix z2 = build_level_matrix(bundle.actual, day, eligible, 0);
        DayMatrix zdev = build_deviation_matrix(dev, day, eligible);
        align_day_matrices({&z1, &z2, &zdev});
        return fit_conditional(z1, z2, zdev, c.engine, day, bundle.parent_actual->zone_id(),
                               bundle.actual.zone_id(), bundle.vintage.label);
    }
    const DeviationSeries dev =
        compute_deviations(bundle.actual, *bundle.forecast, bundle.vintage);
    const DayMatrix zdev = build_deviation_matrix(dev, day, eligible);
    return fit_unconditional(zdev, c.engine, day, bundle.actual.zone_id(),
                             bundle.vintage.label);
}

Eigen::VectorXd forecast_for_day(const DataBundle& bundle, Date day) {
    const HourlyLoadSeries& fc =
        bundle.conditional() ? *bundle.parent_forecast : *bundle.forecast;
    const int h0 = bundle.vintage.horizon_start_hour;
    Eigen::VectorXd v(24 - h0);
    for (int h = h0; h <= 23; ++h) {
        const auto p = fc.get(day, h);
        if (!p) {
            throw DataError("forecast incomplete on " + to_iso(day) + " hour " +
                            std::to_string(h));
        }
        v[h - h0] = *p;
    }
    return v;
}

ScenarioBatch simulate_for_day(const FittedEngine& engine, const DataBundle& bundle,
                               const RunConfig& c, Date day) {
    const Eigen::VectorXd fc = forecast_for_day(bundle, day);
    if (bundle.conditional()) {
        return simulate_conditional(engine, day, fc, c.n_scenarios, c.seed, c.workers);
    }
    return simulate_unconditional(engine, day, fc, c.n_scenarios, c.seed, c.workers);
}

int cmd_fit(const RunConfig& c, const std::string& date_str) {
    const Date day = parse_date(date_str);
    const CpProgramRule rule = lookup_rule(c);
    const DataBundle bundle = load_bundle(c);
    const FittedEngine engine = fit_engine_for_day(bundle, c, rule, day);

    fs::create_directories(c.output_dir);
    const fs::path engine_path = fs::path(c.output_dir) / "engine.txt";
    write_engine_file(engine_path.string(), engine);

    json diagnostics = {
        {"cutoff", to_iso(engine.cutoff)},
        {"first_hour", engine.first_hour},
        {"horizon", engine.horizon()},
        {"lambda", engine.dev_model.lambda},
        {"conditional", engine.is_conditional()},
    };
    json tails = json::array();
    for (const auto& m : engine.dev_marginals) {
        tails.push_back({{"hour", m.hour()},
                         {"lower_xi", m.lower().xi},
                         {"lower_beta", m.lower().beta},
                         {"upper_xi", m.upper().xi},
                         {"upper_beta", m.upper().beta}});
    }
    diagnostics["deviation_tails"] = tails;
    std::ofstream diag_out(fs::path(c.output_dir) / "fit_diagnostics.json");
    diag_out << diagnostics.dump(2) << '\n';
    write_manifest(c, "fit", {{"date", date_str}});
    std::cout << "engine written to " << engine_path.string() << '\n';
    return 0;
}

int cmd_simulate(const RunConfig& c, const std::string& date_str,
                 const std::string& engine_path) {
    const Date day = parse_date(date_str);
    const CpProgramRule rule = lookup_rule(c);
    const DataBundle bundle = load_bundle(c);
    const FittedEngine engine = engine_path.empty()
                                    ? fit_engine_for_day(bundle, c, rule, day)
                                    : read_engine_file(engine_path);
    if (day < engine.cutoff) {
        throw ConfigError("simulate date " + date_str + " precedes engine cutoff " +
                          to_iso(engine.cutoff));
    }
    const ScenarioBatch batch = simulate_for_day(engine, bundle, c, day);

    fs::create_directories(c.output_dir);
    {
        std::ofstream out(fs::path(c.output_dir) / "batch.csv");
        write_batch_csv(out, batch);
    }
    {
        std::ofstream out(fs::path(c.output_dir) / "batch.bin", std::ios::binary);
        write_batch_binary(out, batch);
    }
    {
        // Fan-chart data: per-hour quantiles across scenarios.
        std::ofstream out(fs::path(c.output_dir) / "fan.csv");
        out << "hour,q05,q25,q50,q75,q95,mean,forecast\n";
        const Eigen::VectorXd fc = forecast_for_day(bundle, day);
        for (int h = 0; h < batch.horizon(); ++h) {
            std::vector<double> col(batch.paths.col(h).data(),
                                    batch.paths.col(h).data() + batch.n_scenarios());
            out << batch.first_hour + h << ',' << percentile(col, 5) << ','
                << percentile(col, 25) << ',' << percentile(col, 50) << ','
                << percentile(col, 75) << ',' << percentile(col, 95) << ','
                << batch.paths.col(h).mean() << ',' << fc[h] << '\n';
        }
    }
    write_manifest(c, "simulate", {{"date", date_str}, {"nonpositive", batch.nonpositive_count}});
    std::cout << "wrote " << batch.n_scenarios() << " scenarios for " << date_str << " to "
              << c.output_dir << '\n';
    return 0;
}

int cmd_predict(const RunConfig& c, const std::string& date_str,
                const std::string& engine_path) {
    const Date day = parse_date(date_str);
    const CpProgramRule rule = lookup_rule(c);
    const DataBundle bundle = load_bundle(c);
    const StrategySpec spec = StrategySpec::parse(c.strategies.front(), c.color_floor);

    const ProgramYear py = eligible_days(rule, year_of(day), bundle.holidays);
    if (!py.contains(day)) {
        throw DataError("predict date " + date_str + " is not an eligible day of " +
                        c.program);
    }
    const int h0 = bundle.vintage.horizon_start_hour;

    RunningCPState state(rule, py);
    for (const Date d : py.eligible) {
        if (d >= day) break;
        if (const auto m = bundle.actual.day_max(d, h0)) {
            (void)m;
            std::vector<double> hours;
            for (int h = h0; h <= 23; ++h) hours.push_back(bundle.actual.at(d, h));
            state.update(d, hours, h0);
        }
    }

    double threshold = 0.0;
    if (spec.threshold_method != ThresholdMethod::None) {
        std::vector<double> history;
        for (int y = c.history_start_year; y < year_of(day); ++y) {
            const ProgramYear hy = eligible_days(rule, y, bundle.holidays);
            for (const Date d : hy.eligible) {
                if (const auto m = bundle.actual.day_max(d, h0)) history.push_back(m->first);
            }
        }
        threshold = percentile_threshold(
            history, spec.threshold_method == ThresholdMethod::Pctl95 ? 95.0 : 90.0);
    }

    const FittedEngine engine = engine_path.empty()
                                    ? fit_engine_for_day(bundle, c, rule, day)
                                    : read_engine_file(engine_path);
    if (day < engine.cutoff) {
        throw ConfigError("predict date precedes engine cutoff " + to_iso(engine.cutoff));
    }
    const ScenarioBatch batch = simulate_for_day(engine, bundle, c, day);
    const auto levels = modified_cp_levels(state, spec, threshold);
    const CpDayEstimate est = prob_rank_bands(batch, state, levels);
    const CpHourEstimate hours = prob_peak_hour(batch);

    fs::create_directories(c.output_dir);
    {
        std::ofstream out(fs::path(c.output_dir) / "predict_day.csv");
        write_estimates_csv(out, std::span<const CpDayEstimate>(&est, 1));
    }
    {
        std::ofstream out(fs::path(c.output_dir) / "predict_hours.csv");
        out << "hour,prob\n";
        for (Eigen::Index h = 0; h < hours.prob.size(); ++h) {
            out << hours.first_hour + static_cast<int>(h) << ',' << hours.prob[h] << '\n';
        }
    }
    write_manifest(c, "predict",
                   {{"date", date_str}, {"strategy", spec.label()}, {"threshold", threshold}});
    std::cout << "P(CP day) total = " << est.total << " for " << date_str << '\n';
    return 0;
}

int cmd_backtest(const RunConfig& c) {
    const CpProgramRule rule = lookup_rule(c);
    const DataBundle bundle = load_bundle(c);

    BacktestConfig bt;
    bt.rule = rule;
    bt.start_year = c.start_year;
    bt.end_year = c.end_year;
    bt.history_start_year = c.history_start_year;
    bt.n_scenarios = c.n_scenarios;
    bt.seed = c.seed;
    bt.engine = c.engine;
    bt.refit_every_days = c.refit_every_days;
    bt.workers = c.workers;

    std::vector<BacktestReport> reports;
    for (const auto& label : c.strategies) {
        const StrategySpec spec = StrategySpec::parse(label, c.color_floor);
        reports.push_back(run_backtest(bundle, bt, spec));
    }

    fs::create_directories(c.output_dir);
    {
        std::ofstream out(fs::path(c.output_dir) / "summary.csv");
        write_summary_csv(out, reports);
    }
    {
        std::ofstream out(fs::path(c.output_dir) / "report.csv");
        out << "";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::ostringstream buf;
            write_report_csv(buf, reports[i]);
            std::string text = buf.str();
            if (i > 0) text.erase(0, text.find('\n') + 1); // keep one header
            out << text;
        }
    }
    for (const auto& r : reports) {
        {
            std::ofstream out(fs::path(c.output_dir) /
                              ("alerts_" + r.spec.label() + ".csv"));
            write_alerts_csv(out, r);
        }
        {
            std::ofstream out(fs::path(c.output_dir) /
                              ("plot_data_" + r.spec.label() + ".csv"));
            write_plotdata_csv(out, r);
        }
    }
    write_manifest(c, "backtest", json::object());
    report_tables(std::cout, reports);
    return 0;
}

int cmd_report(const RunConfig& c) {
    const fs::path summary = fs::path(c.output_dir) / "summary.csv";
    std::ifstream in(summary);
    if (!in) {
        throw DataError("no summary.csv in " + c.output_dir + "; run backtest first");
    }
    std::string line;
    std::getline(in, line); // header
    std::cout << "strategy  #alerts  #CP  (R/O/Y/G alerts)  (R/O/Y/G CP)\n";
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() < 11) continue;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-8s  %7.1f  %5.1f  (%s/%s/%s/%s)  (%s/%s/%s/%s)\n",
                      f[0].c_str(), std::stod(f[1]), std::stod(f[2]), f[3].c_str(),
                      f[4].c_str(), f[5].c_str(), f[6].c_str(), f[7].c_str(), f[8].c_str(),
                      f[9].c_str(), f[10].c_str());
        std::cout << buf;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coincident-peak prediction toolkit"};
    app.require_subcommand(1);

    std::string config_path, date_str, engine_path;

    auto* fit = app.add_subcommand("fit", "fit an engine for a target day");
    fit->add_option("--config", config_path, "config JSON")->required();
    fit->add_option("--date", date_str, "target day YYYY-MM-DD")->required();

    auto* simulate = app.add_subcommand("simulate", "generate a scenario batch");
    simulate->add_option("--config", config_path, "config JSON")->required();
    simulate->add_option("--date", date_str, "target day YYYY-MM-DD")->required();
    simulate->add_option("--engine", engine_path, "reuse a persisted engine file");

    auto* predict = app.add_subcommand("predict", "CP-day and CP-hour probabilities");
    predict->add_option("--config", config_path, "config JSON")->required();
    predict->add_option("--date", date_str, "target day YYYY-MM-DD")->required();
    predict->add_option("--engine", engine_path, "reuse a persisted engine file");

    auto* backtest = app.add_subcommand("backtest", "run the strategy backtest");
    backtest->add_option("--config", config_path, "config JSON")->required();

    auto* report = app.add_subcommand("report", "print the summary table of a backtest");
    report->add_option("--config", config_path, "config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig c = load_config(config_path);
        if (fit->parsed()) return cmd_fit(c, date_str);
        if (simulate->parsed()) return cmd_simulate(c, date_str, engine_path);
        if (predict->parsed()) return cmd_predict(c, date_str, engine_path);
        if (backtest->parsed()) return cmd_backtest(c);
        if (report->parsed()) return cmd_report(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
