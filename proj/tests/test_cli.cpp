#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "peakprob/calendar.hpp"
#include "peakprob/series.hpp"
#include "support/test_support.hpp"

using namespace peakprob;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PEAKPROB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_series_csv(const fs::path& path, const HourlyLoadSeries& s) {
    std::ofstream out(path);
    out << "datetime,mw\n";
    for (const auto& [date, hours] : s.days()) {
        for (int h = 0; h < 24; ++h) {
            if (std::isnan(hours[h])) continue;
            out << to_iso(date) << ' ' << (h < 10 ? "0" : "") << h << ":00," << hours[h]
                << '\n';
        }
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliFixture {
    fs::path dir;
    fs::path config_path;

    CliFixture() {
        dir = ppt::make_temp_dir("cli");
        const CpProgramRule rule{"SYN", 1, {6, 1}, {6, 30}, DayFilter::BusinessDays,
                                 BaseInterval::Hour};
        std::vector<Date> days;
        for (int y : {2020, 2021}) {
            const auto py = eligible_days(rule, y, {});
            days.insert(days.end(), py.eligible.begin(), py.eligible.end());
        }
        const auto season = ppt::make_synthetic_season(days, 4242, "SYN", 12.0,
                                                       {make_date(2021, 6, 16)}, 1.12, 0.02);
        write_series_csv(dir / "actual.csv", season.actual);
        write_series_csv(dir / "forecast.csv", season.forecast);

        std::ofstream reg(dir / "registry.csv");
        reg << "SYN, 1, 06-01, 06-30, business-days, hour\n";

        std::ofstream cfg(config_path = dir / "config.json");
        cfg << R"({
  "program": "SYN",
  "zone": "SYN",
  "data": {"actual": ")" << (dir / "actual.csv").string() << R"(",
           "forecast": ")" << (dir / "forecast.csv").string() << R"("},
  "csv": {"datetime_column": "datetime", "value_column": "mw"},
  "vintage": "23",
  "scenarios": 200,
  "seed": 7,
  "min_history_days": 15,
  "strategies": ["1aS", "2aS"],
  "years": {"start": 2021, "end": 2021},
  "history_start_year": 2020,
  "registry": ")" << (dir / "registry.csv").string() << R"(",
  "output_dir": ")" << (dir / "out").string() << R"("
})";
    }
};

} // namespace

TEST_CASE("cli: fit, simulate, predict, backtest, report") {
    const CliFixture fx;
    const std::string cfg = " --config " + fx.config_path.string();

    SUBCASE("backtest writes reports and exits 0") {
        CHECK(run_cli("backtest" + cfg) == 0);
        CHECK(fs::exists(fx.dir / "out" / "summary.csv"));
        CHECK(fs::exists(fx.dir / "out" / "report.csv"));
        CHECK(fs::exists(fx.dir / "out" / "alerts_1aS.csv"));
        CHECK(fs::exists(fx.dir / "out" / "plot_data_2aS.csv"));
        CHECK(fs::exists(fx.dir / "out" / "run_manifest.json"));
        const std::string summary = read_file(fx.dir / "out" / "summary.csv");
        CHECK(summary.find("1aS") != std::string::npos);
        CHECK(summary.find("2aS") != std::string::npos);
        CHECK(run_cli("report" + cfg) == 0);
    }

    SUBCASE("simulate is deterministic across reruns") {
        REQUIRE(run_cli("simulate --date 2021-06-16" + cfg) == 0);
        const std::string first = read_file(fx.dir / "out" / "batch.bin");
        REQUIRE(run_cli("simulate --date 2021-06-16" + cfg) == 0);
        CHECK(read_file(fx.dir / "out" / "batch.bin") == first);
        CHECK(fs::exists(fx.dir / "out" / "fan.csv"));
        CHECK(!first.empty());
    }

    SUBCASE("fit persists an engine that simulate can reuse") {
        REQUIRE(run_cli("fit --date 2021-06-16" + cfg) == 0);
        const fs::path engine = fx.dir / "out" / "engine.txt";
        REQUIRE(fs::exists(engine));
        CHECK(fs::exists(fx.dir / "out" / "fit_diagnostics.json"));
        CHECK(run_cli("simulate --date 2021-06-16 --engine " + engine.string() + cfg) == 0);
        // Look-ahead guard: simulating before the engine cutoff is refused.
        CHECK(run_cli("simulate --date 2021-06-01 --engine " + engine.string() + cfg) == 2);
    }

    SUBCASE("predict emits day and hour estimates") {
        CHECK(run_cli("predict --date 2021-06-16" + cfg) == 0);
        const std::string day = read_file(fx.dir / "out" / "predict_day.csv");
        CHECK(day.find("2021-06-16") != std::string::npos);
        const std::string hours = read_file(fx.dir / "out" / "predict_hours.csv");
        CHECK(hours.find("hour,prob") == 0);
    }

    SUBCASE("error exit codes") {
        CHECK(run_cli("backtest --config /nonexistent.json") == 2);
        // Unknown program id: config error.
        std::ofstream bad(fx.dir / "bad_program.json");
        bad << read_file(fx.config_path);
        bad.close();
        std::string text = read_file(fx.dir / "bad_program.json");
        text.replace(text.find("\"SYN\""), 5, "\"XXX\"");
        std::ofstream(fx.dir / "bad_program.json") << text;
        CHECK(run_cli("backtest --config " + (fx.dir / "bad_program.json").string()) == 2);
        // Missing data file: data error.
        std::string text2 = read_file(fx.config_path);
        const auto pos = text2.find("actual.csv");
        text2.replace(pos, 10, "missing.csv");
        std::ofstream(fx.dir / "bad_data.json") << text2;
        CHECK(run_cli("backtest --config " + (fx.dir / "bad_data.json").string()) == 3);
        // Predict on a non-eligible day (weekend): data error.
        CHECK(run_cli("predict --date 2021-06-13" + cfg) == 3);
    }
}
