#pragma once

#include <functional>
#include <span>
#include <vector>

namespace peakprob {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal quantile (inverse CDF), accurate to ~1e-15 over (0,1).
// Throws DataError for p outside (0,1).
double norm_quantile(double p);

// Empirical percentile with linear interpolation between order statistics
// (the h = (n-1)p + 1 convention). `pct` is in percent, e.g. 95.
// Throws DataError on empty input.
double percentile(std::span<const double> values, double pct);

// One-sample Kolmogorov-Smirnov statistic sup|F_n - F| against `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Critical value for the one-sample KS test at significance `alpha`
// (supported: 0.10, 0.05, 0.01), with Stephens' finite-sample correction.
double ks_critical(std::size_t n, double alpha);

// Critical value for the two-sample KS test.
double ks_critical(std::size_t n, std::size_t m, double alpha);

// Chi-squared quantile via the Wilson-Hilferty approximation. Adequate for
// sanity bounds, not for precision work.
double chi2_quantile(double p, double dof);

} // namespace peakprob
