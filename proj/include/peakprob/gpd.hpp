#pragma once

#include <span>

namespace peakprob {

// Generalized Pareto distribution of exceedances y >= 0 with shape `xi` and
// scale `beta`. For xi < 0 the support is bounded at -beta/xi.

double gpd_cdf(double y, double xi, double beta);
double gpd_survival(double y, double xi, double beta);
double gpd_quantile(double q, double xi, double beta); // q in [0,1)
double gpd_loglik(std::span<const double> exceedances, double xi, double beta);

struct GpdFit {
    double xi = 0.0;
    double beta = 1.0;
    double loglik = 0.0;
    int iterations = 0;
    bool mle_converged = false;
    bool used_pwm_fallback = false;
};

// Probability-weighted-moment estimates; the MLE starting point.
GpdFit fit_gpd_pwm(std::span<const double> exceedances);

// Maximum-likelihood fit via projected BFGS on (xi, log beta), initialized
// at the PWM estimates and falling back to them when the optimizer stalls.
// Throws NumericError on degenerate input (fewer than 3 points or no
// spread).
GpdFit fit_gpd(std::span<const double> exceedances);

} // namespace peakprob
