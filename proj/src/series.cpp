#include "peakprob/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "peakprob/errors.hpp"

namespace peakprob {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::array<double, 24> empty_day() {
    std::array<double, 24> d;
    d.fill(kNaN);
    return d;
}

void check_hour(int hour) {
    if (hour < 0 || hour > 23) {
        throw DataError("hour out of range 0-23: " + std::to_string(hour));
    }
}

} // namespace

void HourlyLoadSeries::add(Date date, int hour, double mw) {
    check_hour(hour);
    if (!(mw > 0.0) || !std::isfinite(mw)) {
        throw DataError("non-positive load " + std::to_string(mw) + " at " + to_iso(date) +
                        " hour " + std::to_string(hour) + " (zone " + zone_id_ + ")");
    }
    auto [it, created] = days_.try_emplace(date, empty_day());
    if (!created && !std::isnan(it->second[hour])) {
        throw DataError("duplicate (date, hour) key " + to_iso(date) + " hour " +
                        std::to_string(hour) + " (zone " + zone_id_ + ")");
    }
    it->second[hour] = mw;
    ++n_points_;
}

bool HourlyLoadSeries::has(Date date, int hour) const {
    check_hour(hour);
    auto it = days_.find(date);
    return it != days_.end() && !std::isnan(it->second[hour]);
}

double HourlyLoadSeries::at(Date date, int hour) const {
    auto v = get(date, hour);
    if (!v) {
        throw DataError("missing load at " + to_iso(date) + " hour " + std::to_string(hour));
    }
    return *v;
}

std::optional<double> HourlyLoadSeries::get(Date date, int hour) const {
    check_hour(hour);
    auto it = days_.find(date);
    if (it == days_.end() || std::isnan(it->second[hour])) return std::nullopt;
    return it->second[hour];
}

bool HourlyLoadSeries::day_complete(Date date, int first_hour, int last_hour) const {
    auto it = days_.find(date);
    if (it == days_.end()) return false;
    for (int h = first_hour; h <= last_hour; ++h) {
        if (std::isnan(it->second[h])) return false;
    }
    return true;
}

std::optional<std::pair<double, int>> HourlyLoadSeries::day_max(Date date,
                                                                int first_hour) const {
    auto it = days_.find(date);
    if (it == days_.end()) return std::nullopt;
    double best = -1.0;
    int best_hour = -1;
    for (int h = first_hour; h <= 23; ++h) {
        const double v = it->second[h];
        if (std::isnan(v)) return std::nullopt;
        if (v > best) {
            best = v;
            best_hour = h;
        }
    }
    return std::make_pair(best, best_hour);
}

Date HourlyLoadSeries::first_date() const {
    if (days_.empty()) throw DataError("empty series");
    return days_.begin()->first;
}

Date HourlyLoadSeries::last_date() const {
    if (days_.empty()) throw DataError("empty series");
    return days_.rbegin()->first;
}

std::vector<std::pair<Date, int>> HourlyLoadSeries::gaps(int hour_lo, int hour_hi) const {
    std::vector<std::pair<Date, int>> out;
    if (days_.empty()) return out;
    for (Date d = first_date(); d <= last_date(); d += std::chrono::days{1}) {
        auto it = days_.find(d);
        for (int h = hour_lo; h <= hour_hi; ++h) {
            if (it == days_.end() || std::isnan(it->second[h])) out.emplace_back(d, h);
        }
    }
    return out;
}

namespace {

struct SplitRow {
    std::vector<std::string> fields;
};

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(field);
    }
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& what) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ConfigError("CSV schema: " + what + " column '" + name + "' not found in header");
    }
    return static_cast<int>(it - header.begin());
}

// "YYYY-MM-DD HH:MM[:SS]" or with 'T' separator.
std::pair<Date, int> parse_datetime(const std::string& s, std::size_t row_no) {
    if (s.size() < 13 || (s[10] != ' ' && s[10] != 'T')) {
        throw DataError("row " + std::to_string(row_no) + ": unparseable timestamp '" + s + "'");
    }
    Date d = [&] {
        try {
            return parse_date(std::string_view(s).substr(0, 10));
        } catch (const DataError&) {
            throw DataError("row " + std::to_string(row_no) + ": unparseable timestamp '" + s +
                            "'");
        }
    }();
    if (!std::isdigit(static_cast<unsigned char>(s[11])) ||
        !std::isdigit(static_cast<unsigned char>(s[12]))) {
        throw DataError("row " + std::to_string(row_no) + ": unparseable timestamp '" + s + "'");
    }
    const int hour = (s[11] - '0') * 10 + (s[12] - '0');
    if (hour > 23) {
        throw DataError("row " + std::to_string(row_no) + ": hour out of range in '" + s + "'");
    }
    return {d, hour};
}

} // namespace

HourlyLoadSeries parse_load_csv(std::istream& in, const CsvSchema& schema,
                                const std::string& zone_id, SeriesKind kind,
                                ParseStats* stats) {
    if (schema.value_column.empty()) {
        throw ConfigError("CSV schema: value column not set");
    }
    const bool single_col = !schema.datetime_column.empty();
    if (!single_col && (schema.date_column.empty() || schema.hour_column.empty())) {
        throw ConfigError("CSV schema: set either datetime_column or date+hour columns");
    }

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV input");
    const auto header = split_line(line, schema.delimiter);

    const int value_idx = find_column(header, schema.value_column, "value");
    const int dt_idx = single_col ? find_column(header, schema.datetime_column, "datetime") : -1;
    const int date_idx = single_col ? -1 : find_column(header, schema.date_column, "date");
    const int hour_idx = single_col ? -1 : find_column(header, schema.hour_column, "hour");

    HourlyLoadSeries series(zone_id, kind);
    ParseStats local;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line, schema.delimiter);
        const int max_idx = std::max({value_idx, dt_idx, date_idx, hour_idx});
        if (static_cast<int>(fields.size()) <= max_idx) {
            throw DataError("row " + std::to_string(row_no) + ": too few columns");
        }

        Date date;
        int hour;
        if (single_col) {
            std::tie(date, hour) = parse_datetime(fields[dt_idx], row_no);
        } else {
            try {
                date = parse_date(fields[date_idx]);
            } catch (const DataError&) {
                throw DataError("row " + std::to_string(row_no) + ": unparseable date '" +
                                fields[date_idx] + "'");
            }
            try {
                hour = std::stoi(fields[hour_idx]);
            } catch (const std::exception&) {
                throw DataError("row " + std::to_string(row_no) + ": unparseable hour '" +
                                fields[hour_idx] + "'");
            }
            if (schema.hour_is_one_based) --hour;
        }
        if (hour < 0 || hour > 23) {
            throw DataError("row " + std::to_string(row_no) + ": hour out of range");
        }

        double mw;
        try {
            mw = std::stod(fields[value_idx]);
        } catch (const std::exception&) {
            throw DataError("row " + std::to_string(row_no) + ": unparseable value '" +
                            fields[value_idx] + "'");
        }
        if (!(mw > 0.0) || !std::isfinite(mw)) {
            throw DataError("row " + std::to_string(row_no) + ": non-positive load " +
                            fields[value_idx]);
        }

        if (series.has(date, hour)) {
            // Fall-back duplicates land on hour 1 or 2; keep the first value.
            if (hour == 1 || hour == 2) {
                ++local.dst_duplicates_dropped;
                continue;
            }
            throw DataError("row " + std::to_string(row_no) + ": duplicate (date, hour) key " +
                            to_iso(date) + " hour " + std::to_string(hour));
        }
        series.add(date, hour, mw);
        ++local.rows;
    }
    if (stats) *stats = local;
    return series;
}

HourlyLoadSeries parse_load_csv(const std::string& path, const CsvSchema& schema,
                                const std::string& zone_id, SeriesKind kind,
                                ParseStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);
    return parse_load_csv(in, schema, zone_id, kind, stats);
}

const std::vector<ForecastVintage>& standard_vintages() {
    static const std::vector<ForecastVintage> v = {
        {"23", -1, 0},   // ~11:45 pm the day before, hours 0-23
        {"05", 5, 6},    // ~5:45 am the day of, hours 6-23
        {"11", 11, 12},  // ~11:45 am the day of, hours 12-23
        {"17", 17, 18},  // ~5:45 pm the day of, hours 18-23
        {"noon", -12, 0} // noon the day before, hours 0-23
    };
    return v;
}

ForecastVintage vintage_by_label(std::string_view label) {
    for (const auto& v : standard_vintages()) {
        if (v.label == label) return v;
    }
    std::ostringstream msg;
    msg << "unknown forecast vintage '" << label << "'; available:";
    for (const auto& v : standard_vintages()) msg << ' ' << v.label;
    throw ConfigError(msg.str());
}

void DeviationSeries::add(Date date, int hour, double mw) {
    check_hour(hour);
    if (!std::isfinite(mw)) throw DataError("non-finite deviation");
    auto [it, created] = days_.try_emplace(date, empty_day());
    if (!created && !std::isnan(it->second[hour])) {
        throw DataError("duplicate deviation key " + to_iso(date) + " hour " +
                        std::to_string(hour));
    }
    it->second[hour] = mw;
    ++n_points_;
}

bool DeviationSeries::has(Date date, int hour) const {
    check_hour(hour);
    auto it = days_.find(date);
    return it != days_.end() && !std::isnan(it->second[hour]);
}

double DeviationSeries::at(Date date, int hour) const {
    if (!has(date, hour)) {
        throw DataError("missing deviation at " + to_iso(date) + " hour " + std::to_string(hour));
    }
    return days_.at(date)[hour];
}

bool DeviationSeries::day_complete(Date date) const {
    auto it = days_.find(date);
    if (it == days_.end()) return false;
    for (int h = first_hour_; h <= 23; ++h) {
        if (std::isnan(it->second[h])) return false;
    }
    return true;
}

DeviationSeries compute_deviations(const HourlyLoadSeries& actual,
                                   const HourlyLoadSeries& forecast,
                                   const ForecastVintage& vintage) {
    if (actual.zone_id() != forecast.zone_id()) {
        throw DataError("deviations need matching zones, got '" + actual.zone_id() + "' vs '" +
                        forecast.zone_id() + "'");
    }
    DeviationSeries dev(actual.zone_id(), vintage.label, vintage.horizon_start_hour);
    for (const auto& [date, hours] : forecast.days()) {
        for (int h = vintage.horizon_start_hour; h <= 23; ++h) {
            if (std::isnan(hours[h])) continue;
            const auto a = actual.get(date, h);
            if (!a) continue;
            dev.add(date, h, *a - hours[h]);
        }
    }
    if (dev.size() == 0) {
        throw DataError("no overlapping (date, hour) between actual and forecast for zone " +
                        actual.zone_id());
    }
    return dev;
}

namespace {

template <typename SeriesLike>
DayMatrix build_matrix(const SeriesLike& s, Date cutoff, const std::set<Date>& eligible,
                       int first_hour, bool (SeriesLike::*complete)(Date) const,
                       const char* what) {
    DayMatrix m;
    m.first_hour = first_hour;
    const int n_hours = 24 - first_hour;
    std::vector<Date> days;
    for (const auto& [date, hours] : s.days()) {
        (void)hours;
        if (date >= cutoff) break;
        if (!eligible.empty() && !eligible.count(date)) continue;
        if (!(s.*complete)(date)) continue;
        days.push_back(date);
    }
    if (days.empty()) {
        throw DataError(std::string("insufficient history: no complete ") + what +
                        " day before " + to_iso(cutoff));
    }
    m.values.resize(static_cast<Eigen::Index>(days.size()), n_hours);
    for (std::size_t i = 0; i < days.size(); ++i) {
        const auto& hours = s.days().at(days[i]);
        for (int h = first_hour; h <= 23; ++h) {
            m.values(static_cast<Eigen::Index>(i), h - first_hour) = hours[h];
        }
    }
    m.days = std::move(days);
    return m;
}

} // namespace

DayMatrix build_deviation_matrix(const DeviationSeries& dev, Date cutoff,
                                 const std::set<Date>& eligible) {
    struct Adapter {
        const DeviationSeries& s;
        const std::map<Date, std::array<double, 24>>& days() const { return s.days(); }
        bool complete(Date d) const { return s.day_complete(d); }
    } a{dev};
    return build_matrix<Adapter>(a, cutoff, eligible, dev.first_hour(), &Adapter::complete,
                                 "deviation");
}

DayMatrix build_level_matrix(const HourlyLoadSeries& series, Date cutoff,
                             const std::set<Date>& eligible, int first_hour) {
    struct Adapter {
        const HourlyLoadSeries& s;
        int h0;
        const std::map<Date, std::array<double, 24>>& days() const { return s.days(); }
        bool complete(Date d) const { return s.day_complete(d, h0); }
    } a{series, first_hour};
    return build_matrix<Adapter>(a, cutoff, eligible, first_hour, &Adapter::complete, "load");
}

std::set<Date> union_eligible(std::span<const ProgramYear> years) {
    std::set<Date> out;
    for (const auto& y : years) out.insert(y.eligible.begin(), y.eligible.end());
    return out;
}

void align_day_matrices(std::vector<DayMatrix*> mats) {
    if (mats.size() < 2) return;
    std::vector<Date> common = mats[0]->days;
    for (std::size_t i = 1; i < mats.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), mats[i]->days.begin(),
                              mats[i]->days.end(), std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty()) throw DataError("no common day across aligned matrices");
    for (auto* m : mats) {
        Eigen::MatrixXd v(static_cast<Eigen::Index>(common.size()), m->values.cols());
        Eigen::Index row = 0;
        std::size_t j = 0;
        for (const Date d : common) {
            while (m->days[j] != d) ++j;
            v.row(row++) = m->values.row(static_cast<Eigen::Index>(j));
        }
        m->values = std::move(v);
        m->days = common;
    }
}

namespace {

void canonical_rows(std::ostream& out, const std::map<Date, std::array<double, 24>>& days,
                    const std::string& zone, const std::string& kind,
                    const std::string& vintage) {
    for (const auto& [date, hours] : days) {
        for (int h = 0; h < 24; ++h) {
            if (std::isnan(hours[h])) continue;
            out << zone << ',' << kind << ',' << vintage << ',' << to_iso(date) << ',' << h << ','
                << hours[h] << '\n';
        }
    }
}

} // namespace

void write_canonical_csv(std::ostream& out, const HourlyLoadSeries& series,
                         const std::string& vintage_label) {
    out << "zone,kind,vintage,date,hour,value\n";
    canonical_rows(out, series.days(), series.zone_id(),
                   series.kind() == SeriesKind::Actual ? "actual" : "forecast", vintage_label);
}

void write_canonical_csv(std::ostream& out, const DeviationSeries& dev) {
    out << "zone,kind,vintage,date,hour,value\n";
    canonical_rows(out, dev.days(), dev.zone_id(), "deviation", dev.vintage_label());
}

} // namespace peakprob
