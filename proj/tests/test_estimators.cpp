#include <doctest.h>

#include <cmath>
#include <sstream>

#include "peakprob/errors.hpp"
#include "peakprob/estimators.hpp"
#include "support/test_support.hpp"

using namespace peakprob;

namespace {

CpProgramRule test_rule(int n_peaks) {
    return CpProgramRule{"TEST", n_peaks, {6, 1}, {9, 30}, DayFilter::AllDays,
                         BaseInterval::Hour};
}

RunningCPState make_state(int n_peaks, int year = 2023) {
    const auto rule = test_rule(n_peaks);
    return RunningCPState(rule, eligible_days(rule, year, {}));
}

// A day's flat 24-hour profile with one peak value at `peak_hour`.
std::vector<double> day_profile(double base, double peak, int peak_hour) {
    std::vector<double> v(24, base);
    v[static_cast<std::size_t>(peak_hour)] = peak;
    return v;
}

ScenarioBatch batch_from_maxima(const std::vector<double>& maxima, Date day,
                                int first_hour = 0) {
    ScenarioBatch b;
    b.day = day;
    b.first_hour = first_hour;
    b.paths.resize(static_cast<Eigen::Index>(maxima.size()), 24 - first_hour);
    for (std::size_t s = 0; s < maxima.size(); ++s) {
        for (int h = 0; h < 24 - first_hour; ++h) {
            b.paths(static_cast<Eigen::Index>(s), h) = maxima[s] * 0.5;
        }
        b.paths(static_cast<Eigen::Index>(s), 10) = maxima[s];
    }
    return b;
}

} // namespace

TEST_CASE("running-CP list: insertion, eviction, rejection") {
    auto state = make_state(5);
    CHECK(state.level(1) == 0.0); // empty list convention

    state.update(make_date(2023, 6, 1), day_profile(100, 150, 17), 0);
    CHECK(state.entries().size() == 1);
    CHECK(state.entries()[0].value == 150);
    CHECK(state.entries()[0].hour == 17);

    // Below-rank-n day on a full list leaves the state unchanged.
    auto full = make_state(5);
    for (int i = 0; i < 5; ++i) {
        full.update(make_date(2023, 6, 1) + std::chrono::days{i},
                    day_profile(100, 200.0 + i, 12), 0);
    }
    const auto before = full.entries();
    full.update(make_date(2023, 6, 10), day_profile(50, 60, 12), 0);
    CHECK(full.entries() == std::vector<CpEntry>(before));

    // Six strictly increasing maxima: the final list holds days 2-6.
    auto inc = make_state(5);
    for (int i = 0; i < 6; ++i) {
        inc.update(make_date(2023, 6, 1) + std::chrono::days{i},
                   day_profile(100, 300.0 + 10 * i, 15), 0);
    }
    REQUIRE(inc.entries().size() == 5);
    for (int r = 0; r < 5; ++r) {
        CHECK(inc.entries()[static_cast<std::size_t>(r)].value == 350.0 - 10 * r);
        CHECK(inc.entries()[static_cast<std::size_t>(r)].date ==
              make_date(2023, 6, 6) - std::chrono::days{r});
    }

    // Non-eligible and out-of-order days are rejected.
    CHECK_THROWS_AS(state.update(make_date(2023, 5, 1), day_profile(1, 2, 3), 0), DataError);
    CHECK_THROWS_AS(state.update(make_date(2023, 6, 1), day_profile(1, 2, 3), 0), DataError);
}

TEST_CASE("running-CP equals brute force over randomized seasons") {
    RngStream rng(606);
    for (int trial = 0; trial < 50; ++trial) {
        auto state = make_state(5);
        std::vector<ppt::DayMax> days;
        for (int i = 0; i < 40; ++i) {
            const Date d = make_date(2023, 6, 1) + std::chrono::days{i};
            std::vector<double> profile(24);
            for (auto& v : profile) v = 100.0 + 50.0 * rng.uniform();
            state.update(d, profile, 0);
            const auto mx = std::max_element(profile.begin(), profile.end());
            days.push_back({d, *mx, static_cast<int>(mx - profile.begin())});
        }
        const auto expect = ppt::brute_force_top_k(days, 5);
        REQUIRE(state.entries().size() == expect.size());
        for (std::size_t r = 0; r < expect.size(); ++r) {
            CHECK(state.entries()[r].date == expect[r].date);
            CHECK(state.entries()[r].value == expect[r].value);
            CHECK(state.entries()[r].hour == expect[r].hour);
        }
    }
}

TEST_CASE("prob_new_cp counts scenario maxima above the level") {
    auto state = make_state(1);
    state.update(make_date(2023, 6, 1), day_profile(100, 120, 14), 0);
    const Date day = make_date(2023, 6, 5);

    const auto all_above = prob_new_cp(batch_from_maxima({200, 210, 220}, day), state);
    CHECK(all_above.total == 1.0);

    const auto none = prob_new_cp(batch_from_maxima({200, 210}, day), state, 1e12);
    CHECK(none.total == 0.0);

    const auto half = prob_new_cp(batch_from_maxima({10, 20, 30, 40}, day), state, 25.0);
    CHECK(half.total == doctest::Approx(0.5));
    CHECK(half.prob.size() == 1);

    // Monotone nonincreasing in the level.
    const auto b = batch_from_maxima({10, 20, 30, 40, 50}, day);
    double prev = 1.1;
    for (double level = 5; level <= 55; level += 5) {
        const double p = prob_new_cp(b, state, level).total;
        CHECK(p <= prev);
        prev = p;
    }

    ScenarioBatch empty;
    empty.day = day;
    CHECK_THROWS_AS(prob_new_cp(empty, state), DataError);
    // Day not after stored entries.
    CHECK_THROWS_AS(prob_new_cp(batch_from_maxima({1}, make_date(2023, 6, 1)), state),
                    DataError);
}

TEST_CASE("prob_rank_bands assigns each scenario to exactly one band") {
    auto state = make_state(5);
    const Date day = make_date(2023, 7, 1);
    const auto batch = batch_from_maxima({5, 15, 25, 35, 45}, day);

    const auto est = prob_rank_bands(batch, state, {40, 30, 20, 10, 0});
    for (int r = 0; r < 5; ++r) CHECK(est.prob[r] == doctest::Approx(0.2));
    CHECK(est.total == doctest::Approx(1.0));

    // Collapsed bands: all mass lands in rank 1, higher ranks stay empty.
    const auto collapsed =
        prob_rank_bands(batch_from_maxima({50, 60}, day), state, {42, 42, 42, 42, 42});
    CHECK(collapsed.prob[0] == 1.0);
    for (int r = 1; r < 5; ++r) CHECK(collapsed.prob[r] == 0.0);

    // Total is a probability.
    const auto partial =
        prob_rank_bands(batch_from_maxima({1, 2, 100}, day), state, {90, 80, 70, 60, 50});
    CHECK(partial.total <= 1.0 + 1e-12);
    CHECK(partial.total == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(prob_rank_bands(batch, state, {1, 2, 3, 4, 5}), DataError); // increasing
    CHECK_THROWS_AS(prob_rank_bands(batch, state, {3, 2, 1}), DataError);       // wrong size
}

TEST_CASE("prob_rank_bands with one peak reduces to prob_new_cp") {
    auto state = make_state(1);
    state.update(make_date(2023, 6, 1), day_profile(100, 130, 15), 0);
    const auto batch =
        batch_from_maxima({100, 120, 125, 131, 140, 170}, make_date(2023, 6, 9));
    for (const double level : {0.0, 120.0, 129.9, 130.0, 135.0, 200.0}) {
        const auto bands = prob_rank_bands(batch, state, {level});
        const auto single = prob_new_cp(batch, state, level);
        CHECK(bands.total == single.total);
        CHECK(bands.prob[0] == single.prob[0]);
    }
}

TEST_CASE("percentile_threshold") {
    std::vector<double> history;
    for (int i = 1; i <= 100; ++i) history.push_back(static_cast<double>(i));
    CHECK(percentile_threshold(history, 95) == doctest::Approx(95.05));
    CHECK(percentile_threshold(history, 90) == doctest::Approx(90.1));
    const std::vector<double> constant(30, 500.0);
    for (const double k : {80.0, 90.0, 95.0}) {
        CHECK(percentile_threshold(constant, k) == 500.0);
    }
    CHECK_THROWS_AS(percentile_threshold(std::vector<double>{}, 95), DataError);
}

TEST_CASE("prob_peak_hour: one-hot, symmetry, shift invariance") {
    ScenarioBatch b;
    b.day = make_date(2023, 7, 5);
    b.first_hour = 0;
    b.paths.resize(50, 24);
    RngStream rng(8);
    for (int s = 0; s < 50; ++s) {
        for (int h = 0; h < 24; ++h) b.paths(s, h) = 100.0 + rng.uniform();
        b.paths(s, 17) = 200.0;
    }
    const auto est = prob_peak_hour(b);
    CHECK(est.prob[17] == 1.0);
    CHECK(est.prob.sum() == doctest::Approx(1.0).epsilon(1e-12));

    // Uniform over a 4-hour horizon: each hour near 1/4.
    ScenarioBatch u;
    u.day = b.day;
    u.first_hour = 20;
    u.paths.resize(20000, 4);
    for (int s = 0; s < 20000; ++s) {
        for (int h = 0; h < 4; ++h) u.paths(s, h) = rng.uniform();
    }
    const auto ue = prob_peak_hour(u);
    for (int h = 0; h < 4; ++h) CHECK(ue.prob[h] == doctest::Approx(0.25).epsilon(0.06));
    CHECK(ue.prob.sum() == doctest::Approx(1.0).epsilon(1e-12));

    // Adding a constant to every path does not change the argmax law.
    ScenarioBatch shifted = u;
    shifted.paths.array() += 5000.0;
    CHECK(prob_peak_hour(shifted).prob == ue.prob);

    // Intra-scenario ties resolve to the earliest hour.
    ScenarioBatch tie;
    tie.day = b.day;
    tie.first_hour = 10;
    tie.paths.resize(1, 3);
    tie.paths << 7.0, 7.0, 3.0;
    CHECK(prob_peak_hour(tie).prob[0] == 1.0);
}

TEST_CASE("estimates CSV layout") {
    CpDayEstimate e;
    e.date = make_date(2023, 7, 1);
    e.prob = Eigen::VectorXd::Zero(2);
    e.prob << 0.25, 0.5;
    e.total = 0.75;
    std::ostringstream out;
    write_estimates_csv(out, std::span<const CpDayEstimate>(&e, 1));
    CHECK(out.str() == "date,prob_1,prob_2,total\n2023-07-01,0.25,0.5,0.75\n");
}
