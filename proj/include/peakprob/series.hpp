#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peakprob/calendar.hpp"
#include "peakprob/dates.hpp"

namespace peakprob {

enum class SeriesKind { Actual, Forecast };

// Hourly MW values for one zone, keyed by (date, hour 0-23). Values are
// strictly positive; missing hours are gaps, which are allowed and
// reportable but never imputed.
class HourlyLoadSeries {
public:
    HourlyLoadSeries() = default;
    HourlyLoadSeries(std::string zone_id, SeriesKind kind)
        : zone_id_(std::move(zone_id)), kind_(kind) {}

    const std::string& zone_id() const { return zone_id_; }
    SeriesKind kind() const { return kind_; }

    // Throws DataError on non-positive load or duplicate key.
    void add(Date date, int hour, double mw);

    bool has(Date date, int hour) const;
    double at(Date date, int hour) const; // throws DataError if missing
    std::optional<double> get(Date date, int hour) const;

    bool day_complete(Date date, int first_hour, int last_hour = 23) const;
    // Maximum and its hour over [first_hour, 23]; nullopt if any hour missing.
    std::optional<std::pair<double, int>> day_max(Date date, int first_hour) const;

    std::size_t size() const { return n_points_; }
    bool empty() const { return n_points_ == 0; }
    Date first_date() const;
    Date last_date() const;

    // Missing (date, hour) keys between first and last stored date, hours
    // restricted to [hour_lo, hour_hi].
    std::vector<std::pair<Date, int>> gaps(int hour_lo = 0, int hour_hi = 23) const;

    const std::map<Date, std::array<double, 24>>& days() const { return days_; }

private:
    std::string zone_id_;
    SeriesKind kind_ = SeriesKind::Actual;
    std::map<Date, std::array<double, 24>> days_; // NaN where missing
    std::size_t n_points_ = 0;
};

// Column mapping for CSV ingestion. Either `datetime_column` (formats
// "YYYY-MM-DD HH:MM[:SS]" or "YYYY-MM-DDTHH:MM[:SS]") or the
// date/hour column pair must be set.
//
// DST policy: a duplicated fall-back hour (hour 1 or 2) keeps the first
// occurrence; duplicates at any other hour are an error. A missing
// spring-forward hour simply stays a gap.
struct CsvSchema {
    std::string datetime_column;
    std::string date_column;
    std::string hour_column;
    std::string value_column;
    char delimiter = ',';
    bool hour_is_one_based = false; // some feeds label hours 1..24
};

struct ParseStats {
    std::size_t rows = 0;
    std::size_t dst_duplicates_dropped = 0;
};

HourlyLoadSeries parse_load_csv(const std::string& path, const CsvSchema& schema,
                                const std::string& zone_id, SeriesKind kind,
                                ParseStats* stats = nullptr);
HourlyLoadSeries parse_load_csv(std::istream& in, const CsvSchema& schema,
                                const std::string& zone_id, SeriesKind kind,
                                ParseStats* stats = nullptr);

// A forecast issue time and its horizon. `issue_offset_hours` is relative
// to the target day's midnight (negative = issued before the target day);
// forecasts are truncated to hours [horizon_start_hour, 23].
struct ForecastVintage {
    std::string label;
    int issue_offset_hours = -1;
    int horizon_start_hour = 0;
};

// The four intraday issue times of the PJM feed plus a noon-day-ahead one.
const std::vector<ForecastVintage>& standard_vintages();
ForecastVintage vintage_by_label(std::string_view label);

// Signed actual-minus-forecast deviations, defined on the intersection of
// the two inputs restricted to the vintage horizon.
class DeviationSeries {
public:
    DeviationSeries() = default;
    DeviationSeries(std::string zone_id, std::string vintage_label, int first_hour)
        : zone_id_(std::move(zone_id)), vintage_label_(std::move(vintage_label)),
          first_hour_(first_hour) {}

    const std::string& zone_id() const { return zone_id_; }
    const std::string& vintage_label() const { return vintage_label_; }
    int first_hour() const { return first_hour_; }

    void add(Date date, int hour, double mw);
    bool has(Date date, int hour) const;
    double at(Date date, int hour) const;
    bool day_complete(Date date) const;
    std::size_t size() const { return n_points_; }
    const std::map<Date, std::array<double, 24>>& days() const { return days_; }

private:
    std::string zone_id_;
    std::string vintage_label_;
    int first_hour_ = 0;
    std::map<Date, std::array<double, 24>> days_;
    std::size_t n_points_ = 0;
};

DeviationSeries compute_deviations(const HourlyLoadSeries& actual,
                                   const HourlyLoadSeries& forecast,
                                   const ForecastVintage& vintage);

// Day-by-hour matrix: one row per fully populated day, columns are hours
// [first_hour, 23] in order.
struct DayMatrix {
    Eigen::MatrixXd values;
    std::vector<Date> days;
    int first_hour = 0;

    Eigen::Index n_days() const { return values.rows(); }
    Eigen::Index n_hours() const { return values.cols(); }
};

// Rows are eligible days strictly before `cutoff`; days with any missing
// hour in the horizon are dropped. Throws DataError when no row remains.
DayMatrix build_deviation_matrix(const DeviationSeries& dev, Date cutoff,
                                 const std::set<Date>& eligible);
DayMatrix build_level_matrix(const HourlyLoadSeries& series, Date cutoff,
                             const std::set<Date>& eligible, int first_hour);

std::set<Date> union_eligible(std::span<const ProgramYear> years);

// Restrict matrices to their common days (row-aligning them in place).
void align_day_matrices(std::vector<DayMatrix*> mats);

// Canonical export format: zone,kind,vintage,date,hour,value
void write_canonical_csv(std::ostream& out, const HourlyLoadSeries& series,
                         const std::string& vintage_label = "");
void write_canonical_csv(std::ostream& out, const DeviationSeries& dev);

} // namespace peakprob
