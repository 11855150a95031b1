#include "peakprob/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "peakprob/errors.hpp"
#include "peakprob/rng.hpp"

namespace peakprob {

std::string StrategySpec::label() const {
    std::string s;
    s += static_cast<char>('0' + static_cast<int>(threshold_method));
    if (alpha == 1.0) s += 'a';
    else if (alpha == 0.975) s += 'b';
    else if (alpha == 0.95) s += 'c';
    else if (alpha == 0.90) s += 'd';
    else s += '?';
    s += signal == SignalType::Simple ? 'S' : 'C';
    return s;
}

StrategySpec StrategySpec::parse(std::string_view label, double color_floor) {
    if (label.size() != 3) {
        throw ConfigError("strategy label must look like '2aS', got '" + std::string(label) +
                          "'");
    }
    StrategySpec spec;
    switch (label[0]) {
        case '1': spec.threshold_method = ThresholdMethod::None; break;
        case '2': spec.threshold_method = ThresholdMethod::Pctl95; break;
        case '3': spec.threshold_method = ThresholdMethod::Pctl90; break;
        default: throw ConfigError("unknown threshold digit in '" + std::string(label) + "'");
    }
    switch (label[1]) {
        case 'a': spec.alpha = 1.0; break;
        case 'b': spec.alpha = 0.975; break;
        case 'c': spec.alpha = 0.95; break;
        case 'd': spec.alpha = 0.90; break;
        default: throw ConfigError("unknown version letter in '" + std::string(label) + "'");
    }
    switch (label[2]) {
        case 'S': spec.signal = SignalType::Simple; break;
        case 'C': spec.signal = SignalType::Color; break;
        default: throw ConfigError("unknown signal letter in '" + std::string(label) + "'");
    }
    spec.color_floor = color_floor;
    return spec;
}

std::vector<double> modified_cp_levels(const RunningCPState& state, const StrategySpec& spec,
                                       double threshold) {
    std::vector<double> levels(static_cast<std::size_t>(state.n_peaks()));
    for (int k = 1; k <= state.n_peaks(); ++k) {
        levels[static_cast<std::size_t>(k - 1)] =
            std::max(spec.alpha * state.level(k), threshold);
    }
    return levels;
}

AlertRecord classify_signal(const CpDayEstimate& est, const StrategySpec& spec) {
    if (!(est.total >= 0.0 && est.total <= 1.0 + 1e-12)) {
        throw DataError("estimate total outside [0,1]: " + std::to_string(est.total));
    }
    AlertRecord rec;
    rec.date = est.date;
    rec.prob_total = est.total;
    if (spec.signal == SignalType::Simple) {
        rec.fired = est.total >= 0.5;
        return rec;
    }
    rec.fired = est.total >= spec.color_floor;
    if (rec.fired) {
        if (est.total > 0.8) rec.color = AlertColor::Red;
        else if (est.total > 0.6) rec.color = AlertColor::Orange;
        else if (est.total > 0.4) rec.color = AlertColor::Yellow;
        else rec.color = AlertColor::Green;
    }
    return rec;
}

int rank_error(const CpHourEstimate& est, int true_peak_hour) {
    const int idx = true_peak_hour - est.first_hour;
    if (idx < 0 || idx >= est.prob.size()) {
        throw DataError("true peak hour " + std::to_string(true_peak_hour) +
                        " outside the estimate horizon");
    }
    std::vector<int> order(static_cast<std::size_t>(est.prob.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (est.prob[a] != est.prob[b]) return est.prob[a] > est.prob[b];
        return a < b;
    });
    const auto pos = std::find(order.begin(), order.end(), idx) - order.begin();
    return std::min(static_cast<int>(pos), 4);
}

char to_char(AlertColor c) {
    switch (c) {
        case AlertColor::Red: return 'R';
        case AlertColor::Orange: return 'O';
        case AlertColor::Yellow: return 'Y';
        case AlertColor::Green: return 'G';
    }
    return '?';
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t day_seed(const BacktestConfig& config, int year, Date d,
                       const std::string& vintage) {
    return derive_seed({config.seed, static_cast<std::uint64_t>(year),
                        static_cast<std::uint64_t>(d.time_since_epoch().count()),
                        fnv1a(vintage)});
}

// Horizon-restricted maxima of eligible days in [from_year, to_year].
std::vector<double> eligible_day_maxima(const HourlyLoadSeries& actual,
                                        const CpProgramRule& rule,
                                        const std::set<Date>& holidays, int from_year,
                                        int to_year, int first_hour) {
    std::vector<double> maxima;
    for (int y = from_year; y <= to_year; ++y) {
        const ProgramYear py = eligible_days(rule, y, holidays);
        for (const Date d : py.eligible) {
            if (const auto m = actual.day_max(d, first_hour)) maxima.push_back(m->first);
        }
    }
    return maxima;
}

void check_coverage(const HourlyLoadSeries& actual, const CpProgramRule& rule,
                    const std::set<Date>& holidays, int from_year, int to_year,
                    int first_hour) {
    for (int y = from_year; y <= to_year; ++y) {
        const ProgramYear py = eligible_days(rule, y, holidays);
        bool any = false;
        for (const Date d : py.eligible) {
            if (actual.day_max(d, first_hour)) {
                any = true;
                break;
            }
        }
        if (!any) {
            throw DataError("no actual-load data for any eligible day of program year " +
                            std::to_string(y) + " (zone " + actual.zone_id() + ")");
        }
    }
}

Eigen::VectorXd horizon_forecast(const HourlyLoadSeries& forecast, Date d, int first_hour) {
    Eigen::VectorXd v(24 - first_hour);
    for (int h = first_hour; h <= 23; ++h) {
        const auto p = forecast.get(d, h);
        if (!p) throw DataError("forecast incomplete on " + to_iso(d));
        v[h - first_hour] = *p;
    }
    return v;
}

struct EngineCache {
    std::optional<FittedEngine> engine;
    Date fitted_at{};
};

} // namespace

BacktestReport run_backtest(const DataBundle& bundle, const BacktestConfig& config,
                            const StrategySpec& spec) {
    if (config.end_year < config.start_year) {
        throw ConfigError("backtest: end year precedes start year");
    }
    if (bundle.conditional()) {
        if (!bundle.parent_forecast) {
            throw ConfigError("conditional backtest needs the parent-zone forecast");
        }
        if (bundle.forecast) {
            throw ConfigError(
                "conditional backtest expects a forecast for the parent zone only");
        }
    } else if (!bundle.forecast) {
        throw ConfigError("backtest needs a forecast for the target zone");
    }

    const CpProgramRule& rule = config.rule;
    const int h0 = bundle.vintage.horizon_start_hour;
    check_coverage(bundle.actual, rule, bundle.holidays, config.history_start_year,
                   config.end_year, h0);

    // Deviations of whichever zone carries the forecast.
    const HourlyLoadSeries& forecast_zone_actual =
        bundle.conditional() ? *bundle.parent_actual : bundle.actual;
    const HourlyLoadSeries& forecast_series =
        bundle.conditional() ? *bundle.parent_forecast : *bundle.forecast;
    const DeviationSeries dev =
        compute_deviations(forecast_zone_actual, forecast_series, bundle.vintage);

    BacktestReport report;
    report.program_id = rule.jurisdiction_id;
    report.spec = spec;

    for (int y = config.start_year; y <= config.end_year; ++y) {
        YearResult yr;
        yr.year = y;

        if (spec.threshold_method != ThresholdMethod::None) {
            const double pct = spec.threshold_method == ThresholdMethod::Pctl95 ? 95.0 : 90.0;
            const auto history = eligible_day_maxima(bundle.actual, rule, bundle.holidays,
                                                     config.history_start_year, y - 1, h0);
            yr.threshold = percentile_threshold(history, pct);
        }

        const ProgramYear py = eligible_days(rule, y, bundle.holidays);
        RunningCPState state(rule, py);

        // Training pool: eligible days of every program year up to and
        // including the current one; the cutoff restricts to days < d.
        std::vector<ProgramYear> years;
        for (int hy = config.history_start_year; hy <= y; ++hy) {
            years.push_back(eligible_days(rule, hy, bundle.holidays));
        }
        const std::set<Date> eligible = union_eligible(years);

        EngineCache cache;
        for (const Date d : py.eligible) {
            DayOutcome day;
            day.alert.date = d;
            day.first_hour = h0;

            const auto actual_max = bundle.actual.day_max(d, h0);
            if (actual_max) {
                day.has_actual = true;
                day.daily_max = actual_max->first;
            }

            try {
                const bool refit = !cache.engine ||
                                   (d - cache.fitted_at) >=
                                       std::chrono::days{config.refit_every_days};
                if (refit) {
                    if (bundle.conditional()) {
                        DayMatrix z1 = build_level_matrix(*bundle.parent_actual, d, eligible, 0);
                        DayMatrix z2 = build_level_matrix(bundle.actual, d, eligible, 0);
                        DayMatrix zdev = build_deviation_matrix(dev, d, eligible);
                        align_day_matrices({&z1, &z2, &zdev});
                        cache.engine = fit_conditional(z1, z2, zdev, config.engine, d,
                                                       bundle.parent_actual->zone_id(),
                                                       bundle.actual.zone_id(),
                                                       bundle.vintage.label);
                        if (config.training_probe) {
                            for (const Date t : z1.days) config.training_probe(t, d);
                        }
                    } else {
                        DayMatrix zdev = build_deviation_matrix(dev, d, eligible);
                        cache.engine = fit_unconditional(zdev, config.engine, d,
                                                         bundle.actual.zone_id(),
                                                         bundle.vintage.label);
                        if (config.training_probe) {
                            for (const Date t : zdev.days) config.training_probe(t, d);
                        }
                    }
                    cache.fitted_at = d;
                }

                const Eigen::VectorXd fc = horizon_forecast(forecast_series, d, h0);
                const std::uint64_t seed = day_seed(config, y, d, bundle.vintage.label);
                const ScenarioBatch batch =
                    bundle.conditional()
                        ? simulate_conditional(*cache.engine, d, fc, config.n_scenarios, seed,
                                               config.workers)
                        : simulate_unconditional(*cache.engine, d, fc, config.n_scenarios,
                                                 seed, config.workers);

                day.levels = modified_cp_levels(state, spec, yr.threshold);
                const CpDayEstimate est = prob_rank_bands(batch, state, day.levels);
                const CpHourEstimate hour_est = prob_peak_hour(batch);
                day.rank_probs = est.prob;
                day.hour_probs = hour_est.prob;
                day.alert = classify_signal(est, spec);
            } catch (const DataError& e) {
                day.skipped = true;
                day.skip_reason = e.what();
            } catch (const NumericError& e) {
                day.skipped = true;
                day.skip_reason = e.what();
            }

            // Fold in the realized actuals only after the day's estimate.
            if (day.has_actual) {
                std::vector<double> hours;
                hours.reserve(static_cast<std::size_t>(24 - h0));
                for (int h = h0; h <= 23; ++h) hours.push_back(bundle.actual.at(d, h));
                state.update(d, hours, h0);
            }
            yr.days.push_back(std::move(day));
        }

        yr.true_cps = state.entries();
        for (auto& day : yr.days) {
            const Date d = day.alert.date;
            const auto cp =
                std::find_if(yr.true_cps.begin(), yr.true_cps.end(),
                             [&](const CpEntry& e) { return e.date == d; });
            day.alert.was_true_cp = cp != yr.true_cps.end();
            if (day.skipped) continue;
            if (day.alert.fired) {
                ++yr.n_alerts;
                if (day.alert.color) {
                    ++yr.alerts_by_color[static_cast<std::size_t>(*day.alert.color)];
                }
            }
            if (day.alert.was_true_cp) {
                CpHourEstimate he;
                he.date = d;
                he.first_hour = day.first_hour;
                he.prob = day.hour_probs;
                day.alert.rank_error = rank_error(he, cp->hour);
                ++yr.rank_error_hist[static_cast<std::size_t>(*day.alert.rank_error)];
                if (day.alert.fired) {
                    ++yr.n_caught;
                    if (day.alert.color) {
                        ++yr.caught_by_color[static_cast<std::size_t>(*day.alert.color)];
                    }
                }
            }
        }
        report.years.push_back(std::move(yr));
    }

    const double ny = static_cast<double>(report.years.size());
    for (const auto& yr : report.years) {
        report.avg_alerts += yr.n_alerts;
        report.avg_caught += yr.n_caught;
        for (std::size_t c = 0; c < 4; ++c) {
            report.avg_alerts_by_color[c] += yr.alerts_by_color[c];
            report.avg_caught_by_color[c] += yr.caught_by_color[c];
        }
        for (std::size_t r = 0; r < 5; ++r) {
            report.avg_rank_error_hist[r] += yr.rank_error_hist[r];
        }
    }
    report.avg_alerts /= ny;
    report.avg_caught /= ny;
    for (std::size_t c = 0; c < 4; ++c) {
        report.avg_alerts_by_color[c] /= ny;
        report.avg_caught_by_color[c] /= ny;
    }
    for (std::size_t r = 0; r < 5; ++r) report.avg_rank_error_hist[r] /= ny;
    return report;
}

void report_tables(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "strategy  #alerts  #CP";
    const bool any_color = std::any_of(reports.begin(), reports.end(), [](const auto& r) {
        return r.spec.signal == SignalType::Color;
    });
    if (any_color) out << "  #alerts (R/O/Y/G)  #CP (R/O/Y/G)";
    out << '\n';
    for (const auto& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-8s  %7.1f  %5.1f", r.spec.label().c_str(),
                      r.avg_alerts, r.avg_caught);
        out << line;
        if (r.spec.signal == SignalType::Color) {
            std::snprintf(line, sizeof(line), "  (%.1f/%.1f/%.1f/%.1f)  (%.1f/%.1f/%.1f/%.1f)",
                          r.avg_alerts_by_color[0], r.avg_alerts_by_color[1],
                          r.avg_alerts_by_color[2], r.avg_alerts_by_color[3],
                          r.avg_caught_by_color[0], r.avg_caught_by_color[1],
                          r.avg_caught_by_color[2], r.avg_caught_by_color[3]);
            out << line;
        }
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "strategy,avg_alerts,avg_cp_caught,"
           "alerts_R,alerts_O,alerts_Y,alerts_G,cp_R,cp_O,cp_Y,cp_G,"
           "rank_err_0,rank_err_1,rank_err_2,rank_err_3,rank_err_4\n";
    for (const auto& r : reports) {
        out << r.spec.label() << ',' << r.avg_alerts << ',' << r.avg_caught;
        for (const double v : r.avg_alerts_by_color) out << ',' << v;
        for (const double v : r.avg_caught_by_color) out << ',' << v;
        for (const double v : r.avg_rank_error_hist) out << ',' << v;
        out << '\n';
    }
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
    out << "strategy,year,threshold,n_alerts,n_caught,n_true_cp,"
           "alerts_R,alerts_O,alerts_Y,alerts_G,cp_R,cp_O,cp_Y,cp_G,"
           "rank_err_0,rank_err_1,rank_err_2,rank_err_3,rank_err_4\n";
    for (const auto& yr : report.years) {
        out << report.spec.label() << ',' << yr.year << ',' << yr.threshold << ','
            << yr.n_alerts << ',' << yr.n_caught << ',' << yr.true_cps.size();
        for (const int v : yr.alerts_by_color) out << ',' << v;
        for (const int v : yr.caught_by_color) out << ',' << v;
        for (const int v : yr.rank_error_hist) out << ',' << v;
        out << '\n';
    }
}

void write_alerts_csv(std::ostream& out, const BacktestReport& report) {
    out << "strategy,year,date,prob_total,fired,color,was_true_cp,rank_error,skipped\n";
    for (const auto& yr : report.years) {
        for (const auto& day : yr.days) {
            out << report.spec.label() << ',' << yr.year << ',' << to_iso(day.alert.date) << ','
                << day.alert.prob_total << ',' << (day.alert.fired ? 1 : 0) << ','
                << (day.alert.color ? std::string(1, to_char(*day.alert.color)) : "") << ','
                << (day.alert.was_true_cp ? 1 : 0) << ','
                << (day.alert.rank_error ? std::to_string(*day.alert.rank_error) : "") << ','
                << (day.skipped ? 1 : 0) << '\n';
        }
    }
}

void write_plotdata_csv(std::ostream& out, const BacktestReport& report) {
    int n_ranks = 1;
    for (const auto& yr : report.years) {
        for (const auto& day : yr.days) {
            n_ranks = std::max(n_ranks, static_cast<int>(day.rank_probs.size()));
        }
    }
    out << "date";
    for (int r = 1; r <= n_ranks; ++r) out << ",prob_" << r;
    out << ",total,daily_max,is_cp\n";
    for (const auto& yr : report.years) {
        for (const auto& day : yr.days) {
            out << to_iso(day.alert.date);
            for (int r = 0; r < n_ranks; ++r) {
                out << ',' << (r < day.rank_probs.size() ? day.rank_probs[r] : 0.0);
            }
            out << ',' << day.alert.prob_total << ','
                << (day.has_actual ? day.daily_max : 0.0) << ','
                << (day.alert.was_true_cp ? 1 : 0) << '\n';
        }
    }
}

} // namespace peakprob
