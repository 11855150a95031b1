#include "peakprob/gpd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "peakprob/errors.hpp"

namespace peakprob {

namespace {

constexpr double kXiTiny = 1e-12;
constexpr double kXiLo = -0.9;
constexpr double kXiHi = 2.0;

} // namespace

double gpd_cdf(double y, double xi, double beta) {
    if (y <= 0.0) return 0.0;
    if (std::abs(xi) < kXiTiny) return -std::expm1(-y / beta);
    const double z = 1.0 + xi * y / beta;
    if (z <= 0.0) return xi < 0.0 ? 1.0 : 0.0; // beyond bounded support
    return -std::expm1(-std::log1p(xi * y / beta) / xi);
}

double gpd_survival(double y, double xi, double beta) {
    if (y <= 0.0) return 1.0;
    if (std::abs(xi) < kXiTiny) return std::exp(-y / beta);
    const double z = 1.0 + xi * y / beta;
    if (z <= 0.0) return xi < 0.0 ? 0.0 : 1.0;
    return std::exp(-std::log1p(xi * y / beta) / xi);
}

double gpd_quantile(double q, double xi, double beta) {
    if (!(q >= 0.0 && q < 1.0)) {
        throw DataError("gpd_quantile: q must lie in [0,1)");
    }
    if (std::abs(xi) < kXiTiny) return -beta * std::log1p(-q);
    return beta / xi * (std::pow(1.0 - q, -xi) - 1.0);
}

double gpd_loglik(std::span<const double> exceedances, double xi, double beta) {
    if (beta <= 0.0) return -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    const double logb = std::log(beta);
    for (double y : exceedances) {
        if (y < 0.0) return -std::numeric_limits<double>::infinity();
        const double t = y / beta;
        if (std::abs(xi) < 1e-8) {
            ll += -logb - t + xi * (0.5 * t * t - t);
            continue;
        }
        const double z = 1.0 + xi * t;
        if (z <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += -logb - (1.0 + 1.0 / xi) * std::log1p(xi * t);
    }
    return ll;
}

GpdFit fit_gpd_pwm(std::span<const double> exceedances) {
    const std::size_t n = exceedances.size();
    std::vector<double> y(exceedances.begin(), exceedances.end());
    std::sort(y.begin(), y.end());
    double b0 = 0.0, a1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        b0 += y[i];
        a1 += y[i] * static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
    }
    b0 /= static_cast<double>(n);
    a1 /= static_cast<double>(n);

    GpdFit fit;
    const double denom = b0 - 2.0 * a1;
    if (std::abs(denom) < 1e-14 * b0) {
        fit.xi = 0.0;
        fit.beta = b0;
    } else {
        fit.xi = (b0 - 4.0 * a1) / denom;
        fit.beta = b0 * (1.0 - fit.xi);
    }
    fit.xi = std::clamp(fit.xi, kXiLo, kXiHi);
    if (!(fit.beta > 0.0)) fit.beta = std::max(b0, 1e-12);
    const double ymax = y.back();
    if (fit.xi < 0.0 && fit.beta <= -fit.xi * ymax) {
        fit.beta = -fit.xi * ymax * (1.0 + 1e-6);
    }
    fit.loglik = gpd_loglik(exceedances, fit.xi, fit.beta);
    return fit;
}

namespace {

// Gradient of the log-likelihood in (xi, b = log beta).
Eigen::Vector2d loglik_grad(std::span<const double> y, double xi, double b) {
    const double beta = std::exp(b);
    double gx = 0.0, gb = 0.0;
    for (double yi : y) {
        const double t = yi / beta;
        if (std::abs(xi) < 1e-8) {
            gx += 0.5 * t * t - t;
            gb += -1.0 + t; // limit of -1 + (1+xi) t/z
            continue;
        }
        const double z = 1.0 + xi * t;
        gx += std::log1p(xi * t) / (xi * xi) - (1.0 + 1.0 / xi) * t / z;
        gb += -1.0 + (1.0 + xi) * t / z;
    }
    return {gx, gb};
}

} // namespace

GpdFit fit_gpd(std::span<const double> exceedances) {
    if (exceedances.size() < 3) {
        throw NumericError("GPD fit needs at least 3 exceedances, got " +
                           std::to_string(exceedances.size()));
    }
    const auto [mn, mx] = std::minmax_element(exceedances.begin(), exceedances.end());
    if (!(*mx > 0.0) || *mx - *mn < 1e-12 * std::max(1.0, *mx)) {
        throw NumericError("degenerate GPD sample: no spread in exceedances");
    }

    GpdFit pwm = fit_gpd_pwm(exceedances);

    const double b_lo = std::log(pwm.beta) - 10.0;
    const double b_hi = std::log(pwm.beta) + 10.0;
    auto project = [&](Eigen::Vector2d x) {
        x[0] = std::clamp(x[0], kXiLo, kXiHi);
        x[1] = std::clamp(x[1], b_lo, b_hi);
        return x;
    };
    auto negll = [&](const Eigen::Vector2d& x) {
        return -gpd_loglik(exceedances, x[0], std::exp(x[1]));
    };

    Eigen::Vector2d x = project({pwm.xi, std::log(pwm.beta)});
    double f = negll(x);
    Eigen::Vector2d g = -loglik_grad(exceedances, x[0], x[1]);
    Eigen::Matrix2d h = Eigen::Matrix2d::Identity();

    const double n = static_cast<double>(exceedances.size());
    const double grad_tol = 1e-8 * n;
    bool converged = false;
    int iter = 0;
    for (; iter < 200; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
            converged = true;
            break;
        }
        Eigen::Vector2d dir = -h * g;
        if (dir.dot(g) >= 0.0) { // not a descent direction; reset
            h.setIdentity();
            dir = -g;
        }
        double step = 1.0;
        Eigen::Vector2d xn;
        double fn = std::numeric_limits<double>::infinity();
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = project(x + step * dir);
            fn = negll(xn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(xn - x)) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok || (x - xn).lpNorm<Eigen::Infinity>() < 1e-14) break;
        const Eigen::Vector2d gn = -loglik_grad(exceedances, xn[0], xn[1]);
        const Eigen::Vector2d s = xn - x;
        const Eigen::Vector2d yv = gn - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12) { // BFGS inverse-Hessian update
            const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
            h = (i2 - s * yv.transpose() / sy) * h * (i2 - yv * s.transpose() / sy) +
                s * s.transpose() / sy;
        }
        x = xn;
        f = fn;
        g = gn;
    }

    GpdFit fit;
    fit.iterations = iter;
    const double mle_ll = -f;
    if (converged && mle_ll >= pwm.loglik - 1e-9) {
        fit.xi = x[0];
        fit.beta = std::exp(x[1]);
        fit.loglik = mle_ll;
        fit.mle_converged = true;
    } else {
        fit = pwm;
        fit.iterations = iter;
        fit.used_pwm_fallback = true;
    }
    return fit;
}

} // namespace peakprob
