#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peakprob/glasso.hpp"
#include "peakprob/marginal.hpp"
#include "peakprob/series.hpp"

namespace peakprob {

// K simulated daily load paths for one zone and day. Entries should come
// out positive; any that do not are kept as-is but counted.
struct ScenarioBatch {
    std::string zone_id;
    Date day{};
    std::string vintage_label;
    int first_hour = 0;
    Eigen::MatrixXd paths; // K x horizon
    std::uint64_t seed = 0;
    int nonpositive_count = 0;

    int n_scenarios() const { return static_cast<int>(paths.rows()); }
    int horizon() const { return static_cast<int>(paths.cols()); }
};

struct EngineConfig {
    MarginalOptions marginal;
    GlassoOptions glasso;
    std::vector<double> lambda_grid; // when non-empty, lambda is cross-validated
    int cv_folds = 5;
    int min_history_days = 30;
};

// Everything fitted from history strictly before `cutoff`: per-hour
// deviation marginals plus their dependence model, and for the two-zone
// scheme the per-zone actual-load marginals with the joint 48-dim model.
struct FittedEngine {
    Date cutoff{};
    int first_hour = 0;
    std::string zone_id;
    std::string vintage_label;
    EngineConfig config;

    std::vector<SemiParametricMarginal> dev_marginals; // one per horizon hour
    GaussianDependenceModel dev_model;

    struct ConditionalPart {
        std::string zone1_id;
        std::string zone2_id;
        std::vector<SemiParametricMarginal> zone1_marginals; // 24 actual-load fits
        std::vector<SemiParametricMarginal> zone2_marginals;
        GaussianDependenceModel joint; // 48-dim, zone1 block first
    };
    std::optional<ConditionalPart> cond;

    bool is_conditional() const { return cond.has_value(); }
    int horizon() const { return static_cast<int>(dev_marginals.size()); }
};

// Fits deviation marginals and the dependence model on the rows of
// `dev_matrix`, which must all predate `cutoff`. Throws DataError when
// history is shorter than config.min_history_days, NumericError with the
// offending hour on a marginal fit failure.
FittedEngine fit_unconditional(const DayMatrix& dev_matrix, const EngineConfig& config,
                               Date cutoff, const std::string& zone_id = "",
                               const std::string& vintage_label = "");

// Two-zone engine: actual-load marginals for both zones, a joint dependence
// model over the stacked 48 Gaussianized coordinates, and the zone-1
// deviation sub-engine. All three matrices must be row-aligned on the same
// days.
FittedEngine fit_conditional(const DayMatrix& z1_actual, const DayMatrix& z2_actual,
                             const DayMatrix& z1_dev, const EngineConfig& config, Date cutoff,
                             const std::string& zone1_id, const std::string& zone2_id,
                             const std::string& vintage_label = "");

// Draws K multivariate-normal deviation vectors, maps them through the
// fitted marginals and adds the forecast. Each scenario has its own
// deterministic substream, so output is reproducible and independent of
// `workers`. `day` must be on or after the training cutoff.
ScenarioBatch simulate_unconditional(const FittedEngine& engine, Date day,
                                     const Eigen::VectorXd& forecast, int n_scenarios,
                                     std::uint64_t seed, int workers = 1);

// Two-zone scheme, per scenario: draw a zone-1 deviation path, add the
// forecast, map the zone-1 load into Gaussian coordinates, draw the zone-2
// coordinates from their conditional law, and map back through the zone-2
// marginals. Hours before the vintage horizon are excluded end to end.
ScenarioBatch simulate_conditional(const FittedEngine& engine, Date day,
                                   const Eigen::VectorXd& z1_forecast, int n_scenarios,
                                   std::uint64_t seed, int workers = 1);

} // namespace peakprob
