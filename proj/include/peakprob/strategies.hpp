#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peakprob/estimators.hpp"
#include "peakprob/scengen.hpp"

namespace peakprob {

// Threshold methods 1-3 as strategy-label digits.
enum class ThresholdMethod { None = 1, Pctl95 = 2, Pctl90 = 3 };
enum class SignalType { Simple, Color };
enum class AlertColor { Red, Orange, Yellow, Green };

// A strategy is threshold method x alpha version x signal type, labeled
// like "2aS": threshold digit, version letter (a=1.0, b=0.975, c=0.95,
// d=0.90), signal letter (S or C).
struct StrategySpec {
    ThresholdMethod threshold_method = ThresholdMethod::None;
    double alpha = 1.0;
    SignalType signal = SignalType::Simple;
    double color_floor = 0.2; // 0.4 for the utility program

    std::string label() const;
    static StrategySpec parse(std::string_view label, double color_floor = 0.2);
};

// Band edges the day's estimate is computed against:
// level_k = max(alpha * running_cp_k, threshold). Missing ranks enter as 0.
std::vector<double> modified_cp_levels(const RunningCPState& state, const StrategySpec& spec,
                                       double threshold);

struct AlertRecord {
    Date date{};
    double prob_total = 0.0;
    bool fired = false;
    std::optional<AlertColor> color; // set only for fired Color signals
    bool was_true_cp = false;
    std::optional<int> rank_error; // set only on true CP days
};

// Signal rule. Simple fires at total >= 0.5. Color fires at
// total >= color_floor with bands R (0.8, 1], O (0.6, 0.8], Y (0.4, 0.6],
// G [0.2, 0.4]; interior band edges belong to the lower color, and the
// 0.2 edge belongs to G so every fired total gets a color.
AlertRecord classify_signal(const CpDayEstimate& est, const StrategySpec& spec);

// 0 when the true peak hour carries the highest probability, k when it is
// ranked (k+1)-th, clipped at 4. Probability ties rank the earlier hour
// first. `true_peak_hour` is an absolute hour inside the horizon.
int rank_error(const CpHourEstimate& est, int true_peak_hour);

char to_char(AlertColor c);

// Input data for one backtest. Conditional mode (parent zone present)
// requires actuals for both zones and a forecast for the parent only.
struct DataBundle {
    HourlyLoadSeries actual; // target zone
    std::optional<HourlyLoadSeries> forecast;
    std::optional<HourlyLoadSeries> parent_actual;
    std::optional<HourlyLoadSeries> parent_forecast;
    ForecastVintage vintage;
    std::set<Date> holidays;

    bool conditional() const { return parent_actual.has_value(); }
};

struct BacktestConfig {
    CpProgramRule rule;
    int start_year = 2014;
    int end_year = 2023;
    int history_start_year = 2011;
    int n_scenarios = 1000;
    std::uint64_t seed = 1;
    EngineConfig engine;
    int refit_every_days = 1;
    int workers = 1;
    // Test hook: called with (training day, decision day) for every row
    // that enters a fit.
    std::function<void(Date, Date)> training_probe;
};

// One evaluated day inside a backtest year.
struct DayOutcome {
    AlertRecord alert;
    Eigen::VectorXd rank_probs;
    std::vector<double> levels;
    Eigen::VectorXd hour_probs;
    int first_hour = 0;
    double daily_max = 0.0;
    bool has_actual = false;
    bool skipped = false; // no estimate produced
    std::string skip_reason;
};

struct YearResult {
    int year = 0;
    double threshold = 0.0;
    std::vector<DayOutcome> days;
    std::vector<CpEntry> true_cps;
    int n_alerts = 0;
    int n_caught = 0;
    std::array<int, 4> alerts_by_color{};  // R, O, Y, G
    std::array<int, 4> caught_by_color{};
    std::array<int, 5> rank_error_hist{}; // over true CP days with estimates
};

struct BacktestReport {
    std::string program_id;
    StrategySpec spec;
    std::vector<YearResult> years;
    double avg_alerts = 0.0;
    double avg_caught = 0.0;
    std::array<double, 4> avg_alerts_by_color{};
    std::array<double, 4> avg_caught_by_color{};
    std::array<double, 5> avg_rank_error_hist{};
};

// Sliding-expanding-window backtest: for each year, iterate the eligible
// days in order, refit the engine on all eligible history strictly before
// the day, simulate, estimate against the strategy's modified levels,
// classify, then fold the realized actuals into the running-CP state.
// True CP days are the season-end top-n maxima. Percentile thresholds use
// strictly prior years only.
BacktestReport run_backtest(const DataBundle& bundle, const BacktestConfig& config,
                            const StrategySpec& spec);

// Average-performance table in the usual "# alerts / # CP" layout, one row
// per report.
void report_tables(std::ostream& out, std::span<const BacktestReport> reports);

void write_summary_csv(std::ostream& out, std::span<const BacktestReport> reports);
void write_report_csv(std::ostream& out, const BacktestReport& report);
void write_alerts_csv(std::ostream& out, const BacktestReport& report);
void write_plotdata_csv(std::ostream& out, const BacktestReport& report);

} // namespace peakprob
