#pragma once

// Shared oracles and synthetic-data builders for the test suites. Oracles
// here are deliberately independent of the implementation paths they
// check: closed-form inverse sampling, brute-force enumeration, dense
// linear algebra on full matrices.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "peakprob/dates.hpp"
#include "peakprob/rng.hpp"
#include "peakprob/series.hpp"

namespace ppt {

// Closed-form GPD inverse sampling (independent of the fitting code).
inline std::vector<double> sample_gpd(std::size_t n, double xi, double beta,
                                      std::uint64_t seed) {
    peakprob::RngStream rng(seed);
    std::vector<double> out(n);
    for (auto& y : out) {
        const double u = rng.uniform();
        y = std::abs(xi) < 1e-12 ? -beta * std::log1p(-u)
                                 : beta / xi * (std::pow(1.0 - u, -xi) - 1.0);
    }
    return out;
}

// Brute-force top-k (day, max) selection with the one-entry-per-day rule.
struct DayMax {
    peakprob::Date date{};
    double value = 0.0;
    int hour = -1;
};

inline std::vector<DayMax> brute_force_top_k(std::vector<DayMax> days, int k) {
    std::stable_sort(days.begin(), days.end(),
                     [](const DayMax& a, const DayMax& b) { return a.value > b.value; });
    if (static_cast<int>(days.size()) > k) days.resize(static_cast<std::size_t>(k));
    return days;
}

// Dense conditional-Gaussian oracle via the precision matrix of the joint:
// mean = -Theta_tt^-1 Theta_tg x_g, cov = Theta_tt^-1. Algebraically
// independent of the Schur-complement route.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> conditional_oracle(
    const Eigen::MatrixXd& cov, const std::vector<int>& target, const std::vector<int>& given,
    const Eigen::VectorXd& given_values) {
    const Eigen::MatrixXd theta = cov.inverse();
    const auto nt = static_cast<Eigen::Index>(target.size());
    const auto ng = static_cast<Eigen::Index>(given.size());
    Eigen::MatrixXd ttt(nt, nt), ttg(nt, ng);
    for (Eigen::Index a = 0; a < nt; ++a) {
        for (Eigen::Index b = 0; b < nt; ++b) ttt(a, b) = theta(target[a], target[b]);
        for (Eigen::Index b = 0; b < ng; ++b) ttg(a, b) = theta(target[a], given[b]);
    }
    const Eigen::MatrixXd ttt_inv = ttt.inverse();
    return {-ttt_inv * ttg * given_values, ttt_inv};
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(int p, std::uint64_t seed, double lo = 0.5, double hi = 2.0) {
    peakprob::RngStream rng(seed);
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eigs(p);
    for (int i = 0; i < p; ++i) eigs[i] = lo + (hi - lo) * rng.uniform();
    return q * eigs.asDiagonal() * q.transpose();
}

// Draws n rows from N(0, cov).
inline Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& cov, int n, std::uint64_t seed) {
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    peakprob::RngStream rng(seed);
    Eigen::MatrixXd z(n, cov.rows());
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd eps(cov.rows());
        for (Eigen::Index j = 0; j < cov.rows(); ++j) eps[j] = rng.normal();
        z.row(i) = (l * eps).transpose();
    }
    return z;
}

// One synthetic program year of hourly data: a smooth daily shape with a
// day-level scale factor, plus an additive forecast error.
struct SyntheticSeason {
    peakprob::HourlyLoadSeries actual;
    peakprob::HourlyLoadSeries forecast;
};

inline double daily_shape(int hour) {
    // Peaks at hour 17.
    return 1000.0 + 250.0 * std::exp(-0.5 * std::pow((hour - 17.0) / 4.0, 2.0));
}

inline SyntheticSeason make_synthetic_season(
    const std::vector<peakprob::Date>& days, std::uint64_t seed, const std::string& zone,
    double error_sd = 15.0, const std::set<peakprob::Date>& boosted = {},
    double boost_factor = 1.10, double day_scale_sd = 0.05) {
    using namespace peakprob;
    SyntheticSeason s;
    s.actual = HourlyLoadSeries(zone, SeriesKind::Actual);
    s.forecast = HourlyLoadSeries(zone, SeriesKind::Forecast);
    RngStream rng(seed);
    for (const Date d : days) {
        const double day_scale = 1.0 + day_scale_sd * rng.normal();
        const double boost = boosted.count(d) ? boost_factor : 1.0;
        for (int h = 0; h < 24; ++h) {
            const double level = daily_shape(h) * day_scale * boost;
            const double err = error_sd * rng.normal();
            s.forecast.add(d, h, std::max(1.0, level));
            s.actual.add(d, h, std::max(1.0, level + err));
        }
    }
    return s;
}

// Unique writable directory under the system temp root.
inline std::filesystem::path make_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("peakprob_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace ppt
