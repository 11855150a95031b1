#include "peakprob/scengen.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

#include "peakprob/errors.hpp"
#include "peakprob/rng.hpp"

namespace peakprob {

namespace {

void check_history(const DayMatrix& m, const EngineConfig& config, Date cutoff,
                   const char* what) {
    if (m.n_days() < config.min_history_days) {
        throw DataError(std::string("insufficient history for ") + what + ": " +
                        std::to_string(m.n_days()) + " days, need " +
                        std::to_string(config.min_history_days));
    }
    for (const Date d : m.days) {
        if (d >= cutoff) {
            throw DataError(std::string("look-ahead in ") + what + " history: " + to_iso(d) +
                            " is not before cutoff " + to_iso(cutoff));
        }
    }
}

GaussianDependenceModel fit_dependence(const GaussianizedPanel& panel,
                                       const EngineConfig& config) {
    GlassoOptions opts = config.glasso;
    if (!config.lambda_grid.empty()) {
        opts.lambda = select_lambda(panel.z, config.lambda_grid, config.cv_folds,
                                    config.glasso).lambda;
    }
    return glasso_fit(empirical_covariance(panel), opts);
}

// Cholesky factor with diagonal jitter retries.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& m, const char* what) {
    Eigen::MatrixXd a = m;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        a.diagonal().array() += 1e-10;
    }
    throw NumericError(std::string("Cholesky failed for ") + what +
                       " even after jitter; the engine is corrupt");
}

// Runs fn(s) for each scenario index, split across workers. Scenario
// streams are derived from (seed, s), so the partition does not affect
// results. The first exception raised in any worker is rethrown on the
// calling thread.
template <typename Fn>
void for_each_scenario(int n_scenarios, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, n_scenarios));
    if (workers == 1) {
        for (int s = 0; s < n_scenarios; ++s) fn(s);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            try {
                for (int s = next.fetch_add(1); s < n_scenarios && !failed.load();
                     s = next.fetch_add(1)) {
                    fn(s);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

FittedEngine fit_unconditional(const DayMatrix& dev_matrix, const EngineConfig& config,
                               Date cutoff, const std::string& zone_id,
                               const std::string& vintage_label) {
    check_history(dev_matrix, config, cutoff, "deviation");

    FittedEngine engine;
    engine.cutoff = cutoff;
    engine.first_hour = dev_matrix.first_hour;
    engine.zone_id = zone_id;
    engine.vintage_label = vintage_label;
    engine.config = config;

    // The per-hour sample count is the row count, so the configured history
    // floor is also the marginal-fit floor.
    MarginalOptions marg = config.marginal;
    marg.min_samples = std::min(marg.min_samples, config.min_history_days);

    GaussianizedPanel panel;
    try {
        panel = gaussianize_panel(dev_matrix.values, marg);
    } catch (const NumericError& e) {
        throw NumericError("deviation " + std::string(e.what()));
    }
    for (auto& m : panel.marginals) m.set_hour(dev_matrix.first_hour + m.hour());
    engine.dev_model = fit_dependence(panel, config);
    engine.dev_marginals = std::move(panel.marginals);
    return engine;
}

FittedEngine fit_conditional(const DayMatrix& z1_actual, const DayMatrix& z2_actual,
                             const DayMatrix& z1_dev, const EngineConfig& config, Date cutoff,
                             const std::string& zone1_id, const std::string& zone2_id,
                             const std::string& vintage_label) {
    if (z1_actual.days != z2_actual.days || z1_actual.days != z1_dev.days) {
        throw DataError("fit_conditional: matrices must be row-aligned on the same days");
    }
    if (z1_actual.first_hour != 0 || z2_actual.first_hour != 0) {
        throw DataError("fit_conditional: actual-load matrices must cover hours 0-23");
    }
    check_history(z1_actual, config, cutoff, "actual-load");

    // The deviation sub-engine simulates zone 1; the conditional scheme
    // turns those paths into zone-2 scenarios.
    FittedEngine engine =
        fit_unconditional(z1_dev, config, cutoff, zone1_id, vintage_label);

    MarginalOptions marg = config.marginal;
    marg.min_samples = std::min(marg.min_samples, config.min_history_days);
    auto fit_zone = [&](const DayMatrix& m, const std::string& id) {
        try {
            return gaussianize_panel(m.values, marg);
        } catch (const NumericError& e) {
            throw NumericError("zone " + id + " " + std::string(e.what()));
        }
    };
    GaussianizedPanel p1 = fit_zone(z1_actual, zone1_id);
    GaussianizedPanel p2 = fit_zone(z2_actual, zone2_id);

    GaussianizedPanel joint;
    joint.z.resize(p1.z.rows(), p1.z.cols() + p2.z.cols());
    joint.z << p1.z, p2.z;

    FittedEngine::ConditionalPart cond;
    cond.zone1_id = zone1_id;
    cond.zone2_id = zone2_id == zone1_id ? zone2_id + "(2)" : zone2_id;
    cond.joint = fit_dependence(joint, config);
    BlockLayout layout;
    layout.zones[cond.zone1_id] = {0, static_cast<int>(p1.z.cols())};
    layout.zones[cond.zone2_id] = {static_cast<int>(p1.z.cols()),
                                   static_cast<int>(p2.z.cols())};
    cond.joint.layout = layout;
    cond.zone1_marginals = std::move(p1.marginals);
    cond.zone2_marginals = std::move(p2.marginals);
    engine.cond = std::move(cond);
    return engine;
}

namespace {

ScenarioBatch make_batch(const FittedEngine& engine, Date day, int n_scenarios,
                         std::uint64_t seed, const std::string& zone_id) {
    ScenarioBatch batch;
    batch.zone_id = zone_id;
    batch.day = day;
    batch.vintage_label = engine.vintage_label;
    batch.first_hour = engine.first_hour;
    batch.seed = seed;
    batch.paths.resize(n_scenarios, engine.horizon());
    return batch;
}

void validate_simulation_args(const FittedEngine& engine, Date day,
                              const Eigen::VectorXd& forecast, int n_scenarios) {
    if (n_scenarios < 1) throw DataError("need at least 1 scenario");
    if (forecast.size() != engine.horizon()) {
        throw DataError("forecast length " + std::to_string(forecast.size()) +
                        " does not match engine horizon " + std::to_string(engine.horizon()));
    }
    if (day < engine.cutoff) {
        throw DataError("simulation day " + to_iso(day) + " precedes training cutoff " +
                        to_iso(engine.cutoff));
    }
}

int count_nonpositive(const Eigen::MatrixXd& paths) {
    int bad = 0;
    for (Eigen::Index i = 0; i < paths.rows(); ++i) {
        for (Eigen::Index j = 0; j < paths.cols(); ++j) {
            if (!(paths(i, j) > 0.0) || !std::isfinite(paths(i, j))) ++bad;
        }
    }
    return bad;
}

} // namespace

ScenarioBatch simulate_unconditional(const FittedEngine& engine, Date day,
                                     const Eigen::VectorXd& forecast, int n_scenarios,
                                     std::uint64_t seed, int workers) {
    validate_simulation_args(engine, day, forecast, n_scenarios);
    const int nh = engine.horizon();
    const Eigen::MatrixXd l = cholesky_with_jitter(engine.dev_model.covariance, "deviation model");

    ScenarioBatch batch = make_batch(engine, day, n_scenarios, seed, engine.zone_id);
    for_each_scenario(n_scenarios, workers, [&](int s) {
        RngStream rng(derive_seed({seed, static_cast<std::uint64_t>(s)}));
        Eigen::VectorXd eps(nh);
        for (int h = 0; h < nh; ++h) eps[h] = rng.normal();
        const Eigen::VectorXd z = l * eps;
        for (int h = 0; h < nh; ++h) {
            batch.paths(s, h) = forecast[h] + engine.dev_marginals[h].degaussianize(z[h]);
        }
    });
    batch.nonpositive_count = count_nonpositive(batch.paths);
    return batch;
}

ScenarioBatch simulate_conditional(const FittedEngine& engine, Date day,
                                   const Eigen::VectorXd& z1_forecast, int n_scenarios,
                                   std::uint64_t seed, int workers) {
    if (!engine.is_conditional()) {
        throw DataError("simulate_conditional called on an unconditional engine");
    }
    validate_simulation_args(engine, day, z1_forecast, n_scenarios);
    const auto& cond = *engine.cond;
    const int nh = engine.horizon();
    const int h0 = engine.first_hour;

    // Horizon coordinates inside the stacked 48-dim joint model.
    const auto& z1_range = cond.joint.layout->zones.at(cond.zone1_id);
    const auto& z2_range = cond.joint.layout->zones.at(cond.zone2_id);
    std::vector<int> given(static_cast<std::size_t>(nh)), target(static_cast<std::size_t>(nh));
    for (int j = 0; j < nh; ++j) {
        given[static_cast<std::size_t>(j)] = z1_range.start + h0 + j;
        target[static_cast<std::size_t>(j)] = z2_range.start + h0 + j;
    }
    const ConditionalGaussian cg = conditional_params(
        cond.joint.covariance, target, given, Eigen::VectorXd::Zero(nh));
    const Eigen::MatrixXd l_cond = cholesky_with_jitter(cg.covariance, "conditional covariance");
    const Eigen::MatrixXd l_dev = cholesky_with_jitter(engine.dev_model.covariance,
                                                       "deviation model");

    ScenarioBatch batch = make_batch(engine, day, n_scenarios, seed, cond.zone2_id);
    for_each_scenario(n_scenarios, workers, [&](int s) {
        RngStream rng(derive_seed({seed, static_cast<std::uint64_t>(s)}));
        Eigen::VectorXd eps(nh);
        for (int h = 0; h < nh; ++h) eps[h] = rng.normal();
        const Eigen::VectorXd zdev = l_dev * eps;

        // Zone-1 load path, then its Gaussian coordinates.
        Eigen::VectorXd z1_gauss(nh);
        for (int h = 0; h < nh; ++h) {
            const double load =
                z1_forecast[h] + engine.dev_marginals[h].degaussianize(zdev[h]);
            z1_gauss[h] = cond.zone1_marginals[static_cast<std::size_t>(h0 + h)].gaussianize(load);
        }

        const Eigen::VectorXd mu = cg.gain * z1_gauss;
        for (int h = 0; h < nh; ++h) eps[h] = rng.normal();
        const Eigen::VectorXd z2 = mu + l_cond * eps;
        for (int h = 0; h < nh; ++h) {
            batch.paths(s, h) =
                cond.zone2_marginals[static_cast<std::size_t>(h0 + h)].degaussianize(z2[h]);
        }
    });
    batch.nonpositive_count = count_nonpositive(batch.paths);
    return batch;
}

} // namespace peakprob
