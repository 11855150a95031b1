#include <doctest.h>

#include <sstream>

#include "peakprob/calendar.hpp"

using namespace peakprob;

namespace {

std::set<Date> us_federal_2023() {
    return {
        make_date(2023, 1, 2),  make_date(2023, 1, 16), make_date(2023, 2, 20),
        make_date(2023, 5, 29), make_date(2023, 6, 19), make_date(2023, 7, 4),
        make_date(2023, 9, 4),  make_date(2023, 10, 9), make_date(2023, 11, 10),
        make_date(2023, 11, 23), make_date(2023, 12, 25),
    };
}

// Enumeration oracle: weekdays inside [start, end] minus holidays.
int count_weekdays(Date start, Date end, const std::set<Date>& holidays) {
    int n = 0;
    for (Date d = start; d <= end; d += std::chrono::days{1}) {
        if (!is_weekend(d) && !holidays.count(d)) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("registry entries carry the published program parameters") {
    const auto& pseg = registry_lookup("PSEG");
    CHECK(pseg.n_peaks == 1);
    CHECK(pseg.window_start.month == 6);
    CHECK(pseg.window_start.day == 1);
    CHECK(pseg.window_end.month == 9);
    CHECK(pseg.window_end.day == 30);

    const auto& pjm = registry_lookup("PJM-RTO");
    CHECK(pjm.n_peaks == 5);
    CHECK(pjm.window_start.month == 6);
    CHECK(pjm.window_end.month == 9);

    const auto& dom = registry_lookup("DOM/DVP");
    CHECK(dom.n_peaks == 12);
    CHECK(dom.window_start.month == 11);
    CHECK(dom.window_start.day == 1);
    CHECK(dom.window_end.month == 10);
    CHECK(dom.window_end.day == 31);

    for (const auto& id : registry_ids()) {
        const auto& rule = registry_lookup(id);
        const bool known_n = rule.n_peaks == 1 || rule.n_peaks == 4 || rule.n_peaks == 5 ||
                             rule.n_peaks == 12;
        CHECK(known_n);
    }
    CHECK_THROWS_AS(registry_lookup("NOPE"), ConfigError);
    try {
        registry_lookup("NOPE");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("PSEG") != std::string::npos);
    }
}

TEST_CASE("PJM eligible days exclude weekends and July 4") {
    const auto rule = registry_lookup("PJM-RTO");
    const ProgramYear py = eligible_days(rule, 2023, us_federal_2023());
    CHECK(py.year == 2023);
    CHECK(!py.contains(make_date(2023, 7, 4)));
    CHECK(!py.contains(make_date(2023, 6, 19))); // Juneteenth
    CHECK(!py.contains(make_date(2023, 9, 4)));  // Labor Day
    for (const Date d : py.eligible) {
        CHECK(!is_weekend(d));
        CHECK(d >= make_date(2023, 6, 1));
        CHECK(d <= make_date(2023, 9, 30));
    }
    const int expected = count_weekdays(make_date(2023, 6, 1), make_date(2023, 9, 30),
                                        us_federal_2023());
    CHECK(static_cast<int>(py.eligible.size()) == expected);
}

TEST_CASE("all-days rule keeps every calendar date in the window") {
    CpProgramRule rule{"TEST", 4, {6, 1}, {6, 30}, DayFilter::AllDays, BaseInterval::Hour};
    const ProgramYear py = eligible_days(rule, 2022, {});
    CHECK(py.eligible.size() == 30);
    CHECK(py.first() == make_date(2022, 6, 1));
    CHECK(py.last() == make_date(2022, 6, 30));
}

TEST_CASE("NYISO 2023 eligible-day count matches enumeration") {
    const auto rule = registry_lookup("NYISO");
    const ProgramYear py = eligible_days(rule, 2023, us_federal_2023());
    // Weekdays of Jul+Aug 2023 are 44; July 4 is a Tuesday holiday.
    CHECK(py.eligible.size() == 43);
    const int oracle = count_weekdays(make_date(2023, 7, 1), make_date(2023, 8, 31),
                                      us_federal_2023());
    CHECK(static_cast<int>(py.eligible.size()) == oracle);
}

TEST_CASE("eligible_days output is strictly increasing and idempotent") {
    const auto rule = registry_lookup("PJM-RTO");
    const auto a = eligible_days(rule, 2021, us_federal_2023());
    const auto b = eligible_days(rule, 2021, us_federal_2023());
    CHECK(a.eligible == b.eligible);
    for (std::size_t i = 1; i < a.eligible.size(); ++i) {
        CHECK(a.eligible[i] > a.eligible[i - 1]);
    }
}

TEST_CASE("cross-year window anchors to the year of the window start") {
    const auto rule = registry_lookup("DOM/DVP"); // Nov 1 - Oct 31
    const ProgramYear py = eligible_days(rule, 2021, {});
    CHECK(py.first() >= make_date(2021, 11, 1));
    CHECK(py.last() <= make_date(2022, 10, 31));
    CHECK(py.contains(make_date(2022, 3, 15)));
}

TEST_CASE("malformed windows are configuration errors") {
    CpProgramRule bad{"BAD", 1, {13, 1}, {9, 30}, DayFilter::AllDays, BaseInterval::Hour};
    CHECK_THROWS_AS(eligible_days(bad, 2022, {}), ConfigError);
    CpProgramRule bad_day{"BAD2", 1, {2, 30}, {9, 30}, DayFilter::AllDays, BaseInterval::Hour};
    CHECK_THROWS_AS(eligible_days(bad_day, 2022, {}), ConfigError);
}

TEST_CASE("registry and holiday files round-trip") {
    std::istringstream reg(
        "# test registry\n"
        "ZONE-A, 5, 06-01, 09-30, business-days, hour\n"
        "ZONE-B, 12, 11-01, 10-31, all-days, quarter-hour\n");
    const auto rules = load_program_registry(reg);
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].jurisdiction_id == "ZONE-A");
    CHECK(rules[0].n_peaks == 5);
    CHECK(rules[0].day_filter == DayFilter::BusinessDays);
    CHECK(rules[1].base_interval == BaseInterval::QuarterHour);
    CHECK(rules[1].window_end.month == 10);

    std::istringstream bad("ZONE-C, 5, 06-01, 09-30, fortnights, hour\n");
    CHECK_THROWS_AS(load_program_registry(bad), ConfigError);

    std::istringstream hol("# holidays\n2023-07-04\n 2023-09-04  # Labor Day\n");
    const auto days = load_holidays(hol);
    CHECK(days.size() == 2);
    CHECK(days.count(make_date(2023, 7, 4)) == 1);
    CHECK(days.count(make_date(2023, 9, 4)) == 1);
}

TEST_CASE("shipped registry file mirrors the built-in registry") {
    const auto rules = load_program_registry_file(std::string(PEAKPROB_SOURCE_DIR) +
                                                  "/data/cp_programs.csv");
    CHECK(rules.size() == registry_ids().size());
    for (const auto& rule : rules) {
        const auto& builtin = registry_lookup(rule.jurisdiction_id);
        CHECK(rule.n_peaks == builtin.n_peaks);
        CHECK(rule.window_start.month == builtin.window_start.month);
        CHECK(rule.window_start.day == builtin.window_start.day);
        CHECK(rule.window_end.month == builtin.window_end.month);
        CHECK(rule.window_end.day == builtin.window_end.day);
        CHECK(rule.day_filter == builtin.day_filter);
        CHECK(rule.base_interval == builtin.base_interval);
    }
}

TEST_CASE("shipped holiday file loads and covers the backtest window") {
    const auto days =
        load_holidays_file(std::string(PEAKPROB_SOURCE_DIR) + "/data/holidays_us_federal.txt");
    CHECK(days.size() > 150);
    CHECK(days.count(make_date(2023, 7, 4)) == 1);
    CHECK(days.count(make_date(2021, 7, 5)) == 1);  // observed Independence Day
    CHECK(days.count(make_date(2011, 1, 1)) == 0);  // observed on 2010-12-31
    CHECK(days.count(make_date(2010, 12, 31)) == 1);
}
