#pragma once

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peakprob/dates.hpp"

namespace peakprob {

enum class DayFilter { BusinessDays, AllDays };
enum class BaseInterval { Hour, QuarterHour };

struct MonthDay {
    unsigned month = 1;
    unsigned day = 1;
};

// One coincident-peak program: how many peaks count, over which window of
// the year, and which days are eligible. Windows whose end month-day falls
// before the start wrap into the following year and are anchored to the
// year containing the start (e.g. Nov 1 - Oct 31).
struct CpProgramRule {
    std::string jurisdiction_id;
    int n_peaks = 1;
    MonthDay window_start;
    MonthDay window_end;
    DayFilter day_filter = DayFilter::BusinessDays;
    BaseInterval base_interval = BaseInterval::Hour;
};

// The eligible dates of one program year, ascending.
struct ProgramYear {
    int year = 0;
    std::vector<Date> eligible;

    bool contains(Date d) const;
    Date first() const { return eligible.front(); }
    Date last() const { return eligible.back(); }
};

// All dates in the rule's window for `year` that pass the day filter and
// are not holidays. Throws ConfigError on a malformed window, DataError if
// no day qualifies.
ProgramYear eligible_days(const CpProgramRule& rule, int year,
                          const std::set<Date>& holidays);

// Built-in program registry. Throws ConfigError for unknown ids, listing
// the available ones.
const CpProgramRule& registry_lookup(std::string_view jurisdiction_id);
std::vector<std::string> registry_ids();

// Registry file: one CSV record per jurisdiction,
//   id,n_peaks,window_start(MM-DD),window_end(MM-DD),day_filter,base_interval
// '#' starts a comment line.
std::vector<CpProgramRule> load_program_registry(std::istream& in);
std::vector<CpProgramRule> load_program_registry_file(const std::string& path);

// Holiday file: one ISO-8601 date per line, '#' comments allowed.
std::set<Date> load_holidays(std::istream& in);
std::set<Date> load_holidays_file(const std::string& path);

std::string_view to_string(DayFilter f);
std::string_view to_string(BaseInterval b);

} // namespace peakprob
