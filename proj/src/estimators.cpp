#include "peakprob/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "peakprob/errors.hpp"
#include "peakprob/stats.hpp"

namespace peakprob {

RunningCPState::RunningCPState(CpProgramRule rule, ProgramYear year)
    : rule_(std::move(rule)), year_(std::move(year)) {}

void RunningCPState::update(Date day, std::span<const double> hourly, int first_hour) {
    if (!year_.contains(day)) {
        throw DataError("running-CP update rejected: " + to_iso(day) +
                        " is not an eligible day of program year " + std::to_string(year_.year));
    }
    if (!entries_.empty()) {
        for (const auto& e : entries_) {
            if (day <= e.date) {
                throw DataError("running-CP update rejected: " + to_iso(day) +
                                " is not after stored entry " + to_iso(e.date));
            }
        }
    }
    if (hourly.empty() || first_hour + static_cast<int>(hourly.size()) != 24) {
        throw DataError("running-CP update needs hours [first_hour, 23]");
    }

    double best = hourly[0];
    int best_hour = first_hour;
    for (std::size_t i = 1; i < hourly.size(); ++i) {
        if (hourly[i] > best) {
            best = hourly[i];
            best_hour = first_hour + static_cast<int>(i);
        }
    }

    if (static_cast<int>(entries_.size()) == rule_.n_peaks && best <= entries_.back().value) {
        return;
    }
    const CpEntry entry{best, day, best_hour};
    const auto pos = std::upper_bound(
        entries_.begin(), entries_.end(), entry,
        [](const CpEntry& a, const CpEntry& b) { return a.value > b.value; });
    entries_.insert(pos, entry);
    if (static_cast<int>(entries_.size()) > rule_.n_peaks) entries_.pop_back();
}

double RunningCPState::level(int rank) const {
    if (rank < 1 || rank > rule_.n_peaks) {
        throw DataError("running-CP rank out of range: " + std::to_string(rank));
    }
    if (rank > static_cast<int>(entries_.size())) return 0.0;
    return entries_[static_cast<std::size_t>(rank - 1)].value;
}

namespace {

void check_batch_after_state(const ScenarioBatch& batch, const RunningCPState& state) {
    if (batch.n_scenarios() == 0) throw DataError("empty scenario batch");
    for (const auto& e : state.entries()) {
        if (batch.day <= e.date) {
            throw DataError("estimate day " + to_iso(batch.day) +
                            " is not after running-CP entry " + to_iso(e.date));
        }
    }
}

Eigen::VectorXd scenario_maxima(const ScenarioBatch& batch) {
    return batch.paths.rowwise().maxCoeff();
}

} // namespace

CpDayEstimate prob_new_cp(const ScenarioBatch& batch, const RunningCPState& state,
                          std::optional<double> modified_level) {
    check_batch_after_state(batch, state);
    const double level = modified_level.value_or(state.level(1));
    const Eigen::VectorXd maxima = scenario_maxima(batch);
    const auto k = static_cast<double>(batch.n_scenarios());
    const double p = (maxima.array() > level).count() / k;

    CpDayEstimate est;
    est.date = batch.day;
    est.prob = Eigen::VectorXd::Constant(1, p);
    est.total = p;
    est.n_scenarios = batch.n_scenarios();
    est.levels = {level};
    return est;
}

CpDayEstimate prob_rank_bands(const ScenarioBatch& batch, const RunningCPState& state,
                              const std::vector<double>& modified_levels) {
    check_batch_after_state(batch, state);
    const int n = state.n_peaks();
    if (static_cast<int>(modified_levels.size()) != n) {
        throw DataError("expected " + std::to_string(n) + " levels, got " +
                        std::to_string(modified_levels.size()));
    }
    for (std::size_t i = 1; i < modified_levels.size(); ++i) {
        if (modified_levels[i] > modified_levels[i - 1]) {
            throw DataError("rank-band levels must be non-increasing");
        }
    }

    const Eigen::VectorXd maxima = scenario_maxima(batch);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (Eigen::Index s = 0; s < maxima.size(); ++s) {
        const double m = maxima[s];
        if (m > modified_levels[0]) {
            counts[0] += 1.0;
            continue;
        }
        for (int r = 1; r < n; ++r) {
            // band (level_r, level_{r-1}]; empty when the levels tie
            if (m > modified_levels[static_cast<std::size_t>(r)] &&
                m <= modified_levels[static_cast<std::size_t>(r - 1)]) {
                counts[r] += 1.0;
                break;
            }
        }
    }

    CpDayEstimate est;
    est.date = batch.day;
    est.prob = counts / static_cast<double>(batch.n_scenarios());
    est.total = est.prob.sum();
    est.n_scenarios = batch.n_scenarios();
    est.levels = modified_levels;
    return est;
}

double percentile_threshold(std::span<const double> history, double pct) {
    if (history.empty()) throw DataError("percentile_threshold: empty history");
    return percentile(history, pct);
}

CpHourEstimate prob_peak_hour(const ScenarioBatch& batch) {
    if (batch.n_scenarios() == 0) throw DataError("empty scenario batch");
    const int nh = batch.horizon();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(nh);
    for (int s = 0; s < batch.n_scenarios(); ++s) {
        int arg = 0;
        double best = batch.paths(s, 0);
        for (int h = 1; h < nh; ++h) {
            if (batch.paths(s, h) > best) { // strict: ties keep the earliest hour
                best = batch.paths(s, h);
                arg = h;
            }
        }
        counts[arg] += 1.0;
    }
    CpHourEstimate est;
    est.date = batch.day;
    est.first_hour = batch.first_hour;
    est.prob = counts / static_cast<double>(batch.n_scenarios());
    return est;
}

void write_estimates_csv(std::ostream& out, std::span<const CpDayEstimate> estimates) {
    const int n = estimates.empty() ? 1 : static_cast<int>(estimates.front().prob.size());
    out << "date";
    for (int r = 1; r <= n; ++r) out << ",prob_" << r;
    out << ",total\n";
    for (const auto& e : estimates) {
        out << to_iso(e.date);
        for (Eigen::Index r = 0; r < e.prob.size(); ++r) out << ',' << e.prob[r];
        out << ',' << e.total << '\n';
    }
}

} // namespace peakprob
