#include "peakprob/calendar.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace peakprob {

bool ProgramYear::contains(Date d) const {
    return std::binary_search(eligible.begin(), eligible.end(), d);
}

namespace {

void validate_month_day(const MonthDay& md, const std::string& id) {
    static constexpr unsigned days_in_month[12] = {31, 29, 31, 30, 31, 30,
                                                   31, 31, 30, 31, 30, 31};
    if (md.month < 1 || md.month > 12 || md.day < 1 || md.day > days_in_month[md.month - 1]) {
        throw ConfigError("invalid window month-day " + std::to_string(md.month) + "-" +
                          std::to_string(md.day) + " in program " + id);
    }
}

} // namespace

ProgramYear eligible_days(const CpProgramRule& rule, int year,
                          const std::set<Date>& holidays) {
    validate_month_day(rule.window_start, rule.jurisdiction_id);
    validate_month_day(rule.window_end, rule.jurisdiction_id);

    const Date start = make_date(year, rule.window_start.month, rule.window_start.day);
    const bool wraps = rule.window_end.month < rule.window_start.month ||
                       (rule.window_end.month == rule.window_start.month &&
                        rule.window_end.day < rule.window_start.day);
    const Date end = make_date(wraps ? year + 1 : year, rule.window_end.month,
                               rule.window_end.day);
    if (end < start) {
        throw ConfigError("window end precedes start in program " + rule.jurisdiction_id);
    }

    ProgramYear py;
    py.year = year;
    for (Date d = start; d <= end; d += std::chrono::days{1}) {
        if (rule.day_filter == DayFilter::BusinessDays) {
            if (is_weekend(d) || holidays.count(d)) continue;
        }
        py.eligible.push_back(d);
    }
    if (py.eligible.empty()) {
        throw DataError("no eligible day in program year " + std::to_string(year) +
                        " for " + rule.jurisdiction_id);
    }
    return py;
}

namespace {

CpProgramRule rule(std::string id, int n, unsigned m0, unsigned d0, unsigned m1, unsigned d1,
                   DayFilter f = DayFilter::BusinessDays,
                   BaseInterval b = BaseInterval::Hour) {
    return CpProgramRule{std::move(id), n, {m0, d0}, {m1, d1}, f, b};
}

// ISO/RTO programs plus the PJM transmission-zone methodologies. Entries
// with both a summer and a winter window are split into "<ID>" and
// "<ID>-WINTER" records. Mirrored by data/cp_programs.csv.
const std::vector<CpProgramRule>& builtin_registry() {
    static const std::vector<CpProgramRule> reg = {
        rule("NYISO", 1, 7, 1, 8, 31),
        rule("PJM-RTO", 5, 6, 1, 9, 30),
        rule("ISONE", 1, 6, 1, 5, 31),
        rule("ERCOT", 4, 6, 1, 9, 30, DayFilter::AllDays, BaseInterval::QuarterHour),
        rule("CAISO", 12, 1, 1, 12, 31, DayFilter::AllDays, BaseInterval::QuarterHour),
        rule("APS", 1, 6, 1, 9, 30),
        rule("AEP", 1, 11, 1, 10, 31),
        rule("AECO", 5, 6, 1, 9, 30),
        rule("ATSI", 5, 6, 1, 9, 30),
        rule("ATSI-WINTER", 5, 12, 1, 3, 31),
        rule("BGE", 5, 6, 1, 9, 30),
        rule("COMED", 1, 6, 1, 9, 30),
        rule("DPL", 5, 11, 1, 10, 31),
        rule("DOM/DVP", 12, 11, 1, 10, 31),
        rule("DEOK", 1, 11, 1, 10, 31),
        rule("DUQ", 1, 1, 1, 12, 31),
        rule("EKPC", 1, 6, 1, 9, 30),
        rule("JCPL", 5, 6, 1, 9, 30),
        rule("JCPL-WINTER", 5, 12, 1, 3, 31),
        rule("METED", 5, 6, 1, 9, 30),
        rule("METED-WINTER", 5, 12, 1, 3, 31),
        rule("ODEC", 5, 11, 1, 10, 31),
        rule("PECO", 1, 11, 1, 10, 31),
        rule("PENELEC", 5, 6, 1, 9, 30),
        rule("PENELEC-WINTER", 5, 12, 1, 3, 31),
        rule("PPL", 5, 11, 1, 10, 31),
        rule("PEPCO", 1, 6, 1, 9, 30),
        rule("PSEG", 1, 6, 1, 9, 30),
    };
    return reg;
}

} // namespace

const CpProgramRule& registry_lookup(std::string_view jurisdiction_id) {
    for (const auto& r : builtin_registry()) {
        if (r.jurisdiction_id == jurisdiction_id) return r;
    }
    std::ostringstream msg;
    msg << "unknown CP program id '" << jurisdiction_id << "'; available:";
    for (const auto& r : builtin_registry()) msg << ' ' << r.jurisdiction_id;
    throw ConfigError(msg.str());
}

std::vector<std::string> registry_ids() {
    std::vector<std::string> ids;
    ids.reserve(builtin_registry().size());
    for (const auto& r : builtin_registry()) ids.push_back(r.jurisdiction_id);
    return ids;
}

std::string_view to_string(DayFilter f) {
    return f == DayFilter::BusinessDays ? "business-days" : "all-days";
}

std::string_view to_string(BaseInterval b) {
    return b == BaseInterval::Hour ? "hour" : "quarter-hour";
}

namespace {

MonthDay parse_month_day(const std::string& s, int line_no) {
    if (s.size() != 5 || s[2] != '-') {
        throw ConfigError("registry line " + std::to_string(line_no) +
                          ": expected MM-DD, got '" + s + "'");
    }
    return MonthDay{static_cast<unsigned>(std::stoi(s.substr(0, 2))),
                    static_cast<unsigned>(std::stoi(s.substr(3, 2)))};
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

std::vector<CpProgramRule> load_program_registry(std::istream& in) {
    std::vector<CpProgramRule> rules;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != 6) {
            throw ConfigError("registry line " + std::to_string(line_no) +
                              ": expected 6 fields, got " + std::to_string(f.size()));
        }
        CpProgramRule r;
        r.jurisdiction_id = f[0];
        r.n_peaks = std::stoi(f[1]);
        if (r.n_peaks < 1) {
            throw ConfigError("registry line " + std::to_string(line_no) + ": n_peaks < 1");
        }
        r.window_start = parse_month_day(f[2], line_no);
        r.window_end = parse_month_day(f[3], line_no);
        validate_month_day(r.window_start, r.jurisdiction_id);
        validate_month_day(r.window_end, r.jurisdiction_id);
        if (f[4] == "business-days") {
            r.day_filter = DayFilter::BusinessDays;
        } else if (f[4] == "all-days") {
            r.day_filter = DayFilter::AllDays;
        } else {
            throw ConfigError("registry line " + std::to_string(line_no) +
                              ": unknown day filter '" + f[4] + "'");
        }
        if (f[5] == "hour") {
            r.base_interval = BaseInterval::Hour;
        } else if (f[5] == "quarter-hour") {
            r.base_interval = BaseInterval::QuarterHour;
        } else {
            throw ConfigError("registry line " + std::to_string(line_no) +
                              ": unknown base interval '" + f[5] + "'");
        }
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<CpProgramRule> load_program_registry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open registry file: " + path);
    return load_program_registry(in);
}

std::set<Date> load_holidays(std::istream& in) {
    std::set<Date> days;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        days.insert(parse_date(std::string_view(line).substr(b, e - b + 1)));
    }
    return days;
}

std::set<Date> load_holidays_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open holiday file: " + path);
    return load_holidays(in);
}

} // namespace peakprob
