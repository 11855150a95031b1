#include "peakprob/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "peakprob/errors.hpp"
#include "peakprob/stats.hpp"

namespace peakprob {

namespace {

constexpr double kClampEps = 1e-12;

} // namespace

SemiParametricMarginal::SemiParametricMarginal(std::vector<double> body_x,
                                               std::vector<double> body_p, GpdTail lower,
                                               GpdTail upper, int n, int hour)
    : body_x_(std::move(body_x)), body_p_(std::move(body_p)), lower_(lower), upper_(upper),
      n_(n), hour_(hour) {
    if (body_x_.size() != body_p_.size() || body_x_.size() < 2) {
        throw DataError("marginal body needs at least 2 knots");
    }
}

double SemiParametricMarginal::cdf(double x) const {
    double p;
    if (x < body_x_.front()) {
        p = lower_.tail_fraction * gpd_survival(lower_.threshold - x, lower_.xi, lower_.beta);
    } else if (x > body_x_.back()) {
        p = 1.0 -
            upper_.tail_fraction * gpd_survival(x - upper_.threshold, upper_.xi, upper_.beta);
    } else {
        const auto it = std::lower_bound(body_x_.begin(), body_x_.end(), x);
        const auto i = static_cast<std::size_t>(it - body_x_.begin());
        if (body_x_[i] == x) {
            p = body_p_[i];
        } else {
            const double w = (x - body_x_[i - 1]) / (body_x_[i] - body_x_[i - 1]);
            p = body_p_[i - 1] + w * (body_p_[i] - body_p_[i - 1]);
        }
    }
    return std::clamp(p, kClampEps, 1.0 - kClampEps);
}

double SemiParametricMarginal::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        throw DataError("quantile: p must lie in (0,1), got " + std::to_string(p));
    }
    if (p < body_p_.front()) {
        // survival of the lower GPD equals p / p_l
        const double q = 1.0 - p / lower_.tail_fraction;
        return lower_.threshold - gpd_quantile(q, lower_.xi, lower_.beta);
    }
    if (p > body_p_.back()) {
        const double q = 1.0 - (1.0 - p) / upper_.tail_fraction;
        return upper_.threshold + gpd_quantile(q, upper_.xi, upper_.beta);
    }
    const auto it = std::lower_bound(body_p_.begin(), body_p_.end(), p);
    const auto i = static_cast<std::size_t>(it - body_p_.begin());
    if (body_p_[i] == p || i == 0) return body_x_[i];
    const double w = (p - body_p_[i - 1]) / (body_p_[i] - body_p_[i - 1]);
    return body_x_[i - 1] + w * (body_x_[i] - body_x_[i - 1]);
}

double SemiParametricMarginal::gaussianize(double x) const {
    return norm_quantile(cdf(x));
}

double SemiParametricMarginal::degaussianize(double z) const {
    const double p = std::clamp(norm_cdf(z), kClampEps, 1.0 - kClampEps);
    return quantile(p);
}

SemiParametricMarginal fit_marginal(std::span<const double> samples,
                                    const MarginalOptions& options) {
    const auto n = static_cast<int>(samples.size());
    if (n < options.min_samples) {
        throw DataError("fit_marginal needs at least " + std::to_string(options.min_samples) +
                        " samples, got " + std::to_string(n));
    }
    if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 0.5)) {
        throw ConfigError("tail_fraction must lie in (0, 0.5]");
    }
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double spread = x.back() - x.front();
    if (!(spread > 1e-12 * std::max(1.0, std::abs(x.back())))) {
        throw NumericError("degenerate sample: all values equal");
    }

    int k = static_cast<int>(std::lround(options.tail_fraction * n));
    k = std::clamp(k, 3, (n - 2) / 2);

    const double lower_u = x[static_cast<std::size_t>(k)];        // rank k+1
    const double upper_u = x[static_cast<std::size_t>(n - k - 1)]; // rank n-k
    const double tail_mass = static_cast<double>(k + 1) / (n + 1);

    std::vector<double> deficits(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) deficits[static_cast<std::size_t>(i)] = lower_u - x[i];
    std::vector<double> excesses(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        excesses[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(n - k + i)] - upper_u;
    }

    auto fit_tail = [&](std::span<const double> y, TailSide side, double threshold) {
        GpdFit f;
        try {
            f = fit_gpd(y);
        } catch (const NumericError& e) {
            std::ostringstream msg;
            msg << (side == TailSide::Lower ? "lower" : "upper") << " tail fit failed: "
                << e.what();
            throw NumericError(msg.str());
        }
        GpdTail tail;
        tail.side = side;
        tail.threshold = threshold;
        tail.xi = f.xi;
        tail.beta = f.beta;
        tail.tail_fraction = tail_mass;
        tail.used_pwm_fallback = f.used_pwm_fallback;
        return tail;
    };
    const GpdTail lower = fit_tail(deficits, TailSide::Lower, lower_u);
    const GpdTail upper = fit_tail(excesses, TailSide::Upper, upper_u);

    // Body knots at (order statistic, rank/(n+1)); duplicates collapse to
    // the largest plotting position so knots stay strictly increasing.
    std::vector<double> bx, bp;
    bx.reserve(static_cast<std::size_t>(n - 2 * k));
    bp.reserve(static_cast<std::size_t>(n - 2 * k));
    for (int i = k; i <= n - k - 1; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double pi = static_cast<double>(i + 1) / (n + 1);
        if (!bx.empty() && xi <= bx.back()) {
            bp.back() = pi;
            continue;
        }
        bx.push_back(xi);
        bp.push_back(pi);
    }
    if (bx.size() < 2) {
        throw NumericError("degenerate sample: body collapsed to a single knot");
    }
    return SemiParametricMarginal(std::move(bx), std::move(bp), lower, upper, n);
}

GaussianizedPanel gaussianize_panel(const Eigen::MatrixXd& data,
                                    const MarginalOptions& options) {
    GaussianizedPanel panel;
    panel.z.resize(data.rows(), data.cols());
    panel.marginals.reserve(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        std::vector<double> col(data.col(j).data(), data.col(j).data() + data.rows());
        SemiParametricMarginal m;
        try {
            m = fit_marginal(col, options);
        } catch (const NumericError& e) {
            throw NumericError("marginal fit failed for column " + std::to_string(j) + ": " +
                               e.what());
        } catch (const DataError& e) {
            throw DataError("marginal fit failed for column " + std::to_string(j) + ": " +
                            e.what());
        }
        m.set_hour(static_cast<int>(j));
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            panel.z(i, j) = m.gaussianize(data(i, j));
        }
        panel.marginals.push_back(std::move(m));
    }
    return panel;
}

PanelDiagnostics check_panel_normality(const GaussianizedPanel& panel) {
    PanelDiagnostics diag;
    const auto n = static_cast<double>(panel.z.rows());
    diag.col_mean = panel.z.colwise().mean();
    diag.col_var.resize(panel.z.cols());
    for (Eigen::Index j = 0; j < panel.z.cols(); ++j) {
        const double m = diag.col_mean[j];
        diag.col_var[j] = (panel.z.col(j).array() - m).square().sum() / (n - 1.0);
    }
    const double mean_bound = 4.0 / std::sqrt(n);
    const double var_lo = chi2_quantile(0.0005, n - 1.0) / (n - 1.0);
    const double var_hi = chi2_quantile(0.9995, n - 1.0) / (n - 1.0);
    diag.ok = true;
    std::ostringstream msg;
    for (Eigen::Index j = 0; j < panel.z.cols(); ++j) {
        if (std::abs(diag.col_mean[j]) > mean_bound) {
            diag.ok = false;
            msg << "column " << j << " mean " << diag.col_mean[j] << " exceeds bound "
                << mean_bound << "; ";
        }
        if (diag.col_var[j] < var_lo || diag.col_var[j] > var_hi) {
            diag.ok = false;
            msg << "column " << j << " variance " << diag.col_var[j] << " outside ["
                << var_lo << ", " << var_hi << "]; ";
        }
    }
    diag.detail = msg.str();
    return diag;
}

} // namespace peakprob
