#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "peakprob/gpd.hpp"

namespace peakprob {

enum class TailSide { Lower, Upper };

struct GpdTail {
    TailSide side = TailSide::Upper;
    double threshold = 0.0;
    double xi = 0.0;
    double beta = 1.0;
    double tail_fraction = 0.0; // probability mass beyond the threshold
    bool used_pwm_fallback = false;
};

// Distribution of one hour's values: interpolated empirical CDF between two
// thresholds, GPD tails beyond them, stitched continuously. CDF and
// quantile are mutual inverses up to interpolation tolerance; CDF output is
// clamped to [1e-12, 1 - 1e-12].
class SemiParametricMarginal {
public:
    SemiParametricMarginal() = default;
    SemiParametricMarginal(std::vector<double> body_x, std::vector<double> body_p,
                           GpdTail lower, GpdTail upper, int n, int hour = -1);

    double cdf(double x) const;
    double quantile(double p) const; // throws DataError for p outside (0,1)

    // Standard-normal-quantile of the CDF, and its inverse.
    double gaussianize(double x) const;
    double degaussianize(double z) const;

    const GpdTail& lower() const { return lower_; }
    const GpdTail& upper() const { return upper_; }
    int sample_size() const { return n_; }
    int hour() const { return hour_; }
    void set_hour(int hour) { hour_ = hour; }

    // Body knots, for serialization and diagnostics.
    const std::vector<double>& body_x() const { return body_x_; }
    const std::vector<double>& body_p() const { return body_p_; }

private:
    std::vector<double> body_x_; // strictly increasing
    std::vector<double> body_p_; // strictly increasing, in (0,1)
    GpdTail lower_;
    GpdTail upper_;
    int n_ = 0;
    int hour_ = -1;
};

struct MarginalOptions {
    double tail_fraction = 0.15; // per side
    int min_samples = 30;
};

// Fits GPD tails by maximum likelihood to the exceedances beyond the
// tail-fraction order statistics, both sides. Throws DataError on too few
// samples, NumericError on degenerate input.
SemiParametricMarginal fit_marginal(std::span<const double> samples,
                                    const MarginalOptions& options = {});

// A day-by-hour data matrix mapped column-wise to standard-normal scale.
struct GaussianizedPanel {
    Eigen::MatrixXd z;
    std::vector<SemiParametricMarginal> marginals;

    Eigen::Index n_days() const { return z.rows(); }
    Eigen::Index dim() const { return z.cols(); }
};

GaussianizedPanel gaussianize_panel(const Eigen::MatrixXd& data,
                                    const MarginalOptions& options = {});

struct PanelDiagnostics {
    Eigen::VectorXd col_mean;
    Eigen::VectorXd col_var;
    bool ok = false;
    std::string detail;
};

// Sanity check that each column is close to N(0,1): |mean| <= 4/sqrt(N),
// variance inside the two-sided 99.9% chi-squared band.
PanelDiagnostics check_panel_normality(const GaussianizedPanel& panel);

} // namespace peakprob
