#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "peakprob/calendar.hpp"
#include "peakprob/scengen.hpp"

namespace peakprob {

struct CpEntry {
    double value = 0.0; // daily maximum MW
    Date date{};
    int hour = -1;

    bool operator==(const CpEntry&) const = default;
};

// Ordered list of the top-n daily maxima seen so far in a program year,
// one entry per day, values strictly decreasing by rank. Rank levels
// default to 0 while the list is filling up.
class RunningCPState {
public:
    RunningCPState(CpProgramRule rule, ProgramYear year);

    // Folds one day's realized hourly loads (hours [first_hour, 23]) into
    // the list. Throws DataError if the day is not eligible or not after
    // every stored entry.
    void update(Date day, std::span<const double> hourly, int first_hour);

    const std::vector<CpEntry>& entries() const { return entries_; }
    int n_peaks() const { return rule_.n_peaks; }
    int year() const { return year_.year; }
    const CpProgramRule& rule() const { return rule_; }
    const ProgramYear& program_year() const { return year_; }

    // Running CP value of the given rank (1-based); 0 when the list has
    // not reached that rank yet.
    double level(int rank) const;

private:
    CpProgramRule rule_;
    ProgramYear year_;
    std::vector<CpEntry> entries_;
};

// Per-rank probabilities that a day lands in each running-CP band.
struct CpDayEstimate {
    Date date{};
    Eigen::VectorXd prob; // length n_peaks, rank 1 first
    double total = 0.0;
    int n_scenarios = 0;
    std::vector<double> levels; // the band edges actually applied
};

// Probability that the day's maximum (over the batch horizon) strictly
// exceeds `modified_level` (default: the rank-1 running value). The batch
// day must postdate every stored entry.
CpDayEstimate prob_new_cp(const ScenarioBatch& batch, const RunningCPState& state,
                          std::optional<double> modified_level = std::nullopt);

// Band probabilities: rank 1 is (level_1, inf), rank k >= 2 is
// (level_k, level_{k-1}]. Ties between equal adjacent levels leave the
// higher-rank band empty. Levels must be non-increasing.
CpDayEstimate prob_rank_bands(const ScenarioBatch& batch, const RunningCPState& state,
                              const std::vector<double>& modified_levels);

// Empirical percentile of past daily maxima (linear interpolation between
// order statistics). `pct` in percent, e.g. 95.
double percentile_threshold(std::span<const double> history, double pct);

struct CpHourEstimate {
    Date date{};
    int first_hour = 0;
    Eigen::VectorXd prob; // per horizon hour, sums to 1
};

// Frequency with which each hour carries the scenario maximum; ties within
// a scenario go to the earliest hour.
CpHourEstimate prob_peak_hour(const ScenarioBatch& batch);

// CSV export: date,prob_1..prob_k,total
void write_estimates_csv(std::ostream& out, std::span<const CpDayEstimate> estimates);

} // namespace peakprob
