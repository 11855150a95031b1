#include "peakprob/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peakprob/errors.hpp"

namespace peakprob {

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& panel) {
    if (panel.rows() < 2) {
        throw DataError("empirical_covariance needs at least 2 rows, got " +
                        std::to_string(panel.rows()));
    }
    Eigen::MatrixXd s = panel.transpose() * panel / static_cast<double>(panel.rows());
    return (s + s.transpose()) / 2.0;
}

double glasso_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta, double lambda,
                        bool penalize_diagonal) {
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    }
    double pen = theta.cwiseAbs().sum();
    if (!penalize_diagonal) pen -= theta.diagonal().cwiseAbs().sum();
    return (S * theta).trace() - logdet + lambda * pen;
}

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Certified duality gap: f(theta) - (log det W~ + p) where W~ is the
// current inverse projected onto the dual feasible box. +inf when the
// projection is not positive definite.
double certified_gap(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta,
                     const Eigen::MatrixXd& w, double lambda, bool penalize_diagonal) {
    const Eigen::Index p = S.rows();
    Eigen::MatrixXd wt = w;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j && !penalize_diagonal) {
                wt(i, i) = S(i, i);
            } else {
                wt(i, j) = std::clamp(w(i, j), S(i, j) - lambda, S(i, j) + lambda);
            }
        }
    }
    wt = (wt + wt.transpose()) / 2.0;
    Eigen::LLT<Eigen::MatrixXd> llt(wt);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    double logdet_w = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) logdet_w += 2.0 * std::log(llt.matrixL()(i, i));
    const double primal = glasso_objective(S, theta, lambda, penalize_diagonal);
    return primal - logdet_w - static_cast<double>(p);
}

} // namespace

GaussianDependenceModel glasso_fit(const Eigen::MatrixXd& S, const GlassoOptions& options,
                                   GlassoDiagnostics* diagnostics) {
    const Eigen::Index p = S.rows();
    if (S.cols() != p || p == 0) throw DataError("glasso_fit: S must be square and non-empty");
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + S.cwiseAbs().maxCoeff())) {
        throw DataError("glasso_fit: S must be symmetric");
    }
    if (S.diagonal().minCoeff() <= 0.0) {
        throw DataError("glasso_fit: S must have a strictly positive diagonal");
    }
    if (options.lambda < 0.0) throw ConfigError("glasso_fit: lambda must be >= 0");

    const double lambda = options.lambda;
    if (lambda == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
        if (eig.eigenvalues().minCoeff() < 1e-12 * eig.eigenvalues().maxCoeff()) {
            throw NumericError(
                "glasso_fit: S is singular and lambda = 0; use a positive lambda");
        }
    }
    const double lambda_diag = options.penalize_diagonal ? lambda : 0.0;

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        theta(i, i) = 1.0 / (S(i, i) + lambda_diag);
        w(i, i) = S(i, i) + lambda_diag;
    }

    GlassoDiagnostics diag;
    const double gap_tol = options.gap_tol * static_cast<double>(p);
    const double inner_tol = std::max(1e-15, options.gap_tol * 1e-4);

    // Index scratch: all rows except the active column.
    std::vector<Eigen::Index> rest(static_cast<std::size_t>(p - 1));
    Eigen::MatrixXd q(p - 1, p - 1);
    Eigen::VectorXd w12(p - 1), s12(p - 1), th12(p - 1), r(p - 1), qcol(p - 1);

    bool converged = false;
    int sweep = 0;
    for (; sweep < options.max_sweeps && p > 1; ++sweep) {
        for (Eigen::Index col = 0; col < p; ++col) {
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < p; ++i) {
                if (i != col) rest[static_cast<std::size_t>(k++)] = i;
            }
            for (Eigen::Index a = 0; a < p - 1; ++a) {
                const Eigen::Index ia = rest[static_cast<std::size_t>(a)];
                w12[a] = w(ia, col);
                s12[a] = S(ia, col);
                th12[a] = theta(ia, col);
                for (Eigen::Index b = 0; b < p - 1; ++b) {
                    q(a, b) = w(ia, rest[static_cast<std::size_t>(b)]);
                }
            }
            const double w22 = w(col, col);
            q.noalias() -= w12 * w12.transpose() / w22; // inverse of the trailing block
            const double d = S(col, col) + lambda_diag;

            // Lasso inner loop: minimize d t'Qt + 2 s12't + 2 lambda |t|_1.
            r.noalias() = q * th12;
            for (int inner = 0; inner < 1000; ++inner) {
                double delta = 0.0;
                for (Eigen::Index m = 0; m < p - 1; ++m) {
                    const double old = th12[m];
                    const double c = d * (r[m] - q(m, m) * old) + s12[m];
                    const double nv = soft_threshold(-c, lambda) / (d * q(m, m));
                    if (nv != old) {
                        r.noalias() += q.col(m) * (nv - old);
                        th12[m] = nv;
                        delta = std::max(delta, std::abs(nv - old));
                    }
                }
                const double scale = std::max(1.0, th12.cwiseAbs().maxCoeff());
                if (delta <= inner_tol * scale) break;
            }

            const double gamma = 1.0 / d;
            r.noalias() = q * th12; // refresh Q t
            const double th22 = gamma + th12.dot(r);

            // Scatter theta and rebuild the exact inverse blocks.
            theta(col, col) = th22;
            w(col, col) = d;
            for (Eigen::Index a = 0; a < p - 1; ++a) {
                const Eigen::Index ia = rest[static_cast<std::size_t>(a)];
                theta(ia, col) = th12[a];
                theta(col, ia) = th12[a];
                w(ia, col) = -d * r[a];
                w(col, ia) = -d * r[a];
            }
            for (Eigen::Index a = 0; a < p - 1; ++a) {
                const Eigen::Index ia = rest[static_cast<std::size_t>(a)];
                for (Eigen::Index b = 0; b <= a; ++b) {
                    const Eigen::Index ib = rest[static_cast<std::size_t>(b)];
                    const double v = q(a, b) + d * r[a] * r[b];
                    w(ia, ib) = v;
                    w(ib, ia) = v;
                }
            }
        }

        diag.objective_per_sweep.push_back(
            glasso_objective(S, theta, lambda, options.penalize_diagonal));
        diag.final_gap = certified_gap(S, theta, w, lambda, options.penalize_diagonal);
        if (diag.final_gap <= gap_tol) {
            converged = true;
            ++sweep;
            break;
        }
    }
    if (p == 1) {
        diag.objective_per_sweep.push_back(
            glasso_objective(S, theta, lambda, options.penalize_diagonal));
        diag.final_gap = 0.0;
        converged = true;
    }
    diag.sweeps = sweep;
    diag.converged = converged;
    if (!converged) {
        throw NumericError("glasso_fit did not reach gap tolerance " +
                           std::to_string(gap_tol) + " within " +
                           std::to_string(options.max_sweeps) +
                           " sweeps (gap " + std::to_string(diag.final_gap) + ")");
    }
    if (diagnostics) *diagnostics = diag;

    GaussianDependenceModel model;
    model.precision = (theta + theta.transpose()) / 2.0;
    model.covariance = (w + w.transpose()) / 2.0;
    model.lambda = lambda;
    model.diagonal_penalized = options.penalize_diagonal;
    return model;
}

LambdaSelection select_lambda(const Eigen::MatrixXd& panel, const std::vector<double>& grid,
                              int k_folds, const GlassoOptions& base) {
    if (grid.empty()) throw ConfigError("select_lambda: empty grid");
    for (double l : grid) {
        if (l < 0.0) throw ConfigError("select_lambda: negative lambda in grid");
    }
    if (k_folds < 2) throw ConfigError("select_lambda: need at least 2 folds");
    const Eigen::Index n = panel.rows();
    const Eigen::Index p = panel.cols();

    // Round-robin fold assignment keeps the split deterministic.
    std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k_folds));
    for (Eigen::Index i = 0; i < n; ++i) {
        folds[static_cast<std::size_t>(i % k_folds)].push_back(i);
    }
    for (const auto& f : folds) {
        if (f.size() < 2) {
            throw DataError("select_lambda: a fold has fewer than 2 rows (n = " +
                            std::to_string(n) + ", k = " + std::to_string(k_folds) + ")");
        }
    }

    LambdaSelection sel;
    sel.mean_loglik.assign(grid.size(), -std::numeric_limits<double>::infinity());
    const double log2pi = std::log(2.0 * M_PI);

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double total = 0.0;
        bool valid = true;
        for (int f = 0; f < k_folds && valid; ++f) {
            std::vector<Eigen::Index> train;
            for (int g = 0; g < k_folds; ++g) {
                if (g == f) continue;
                train.insert(train.end(), folds[static_cast<std::size_t>(g)].begin(),
                             folds[static_cast<std::size_t>(g)].end());
            }
            Eigen::MatrixXd ztr(static_cast<Eigen::Index>(train.size()), p);
            for (std::size_t i = 0; i < train.size(); ++i) {
                ztr.row(static_cast<Eigen::Index>(i)) = panel.row(train[i]);
            }
            GlassoOptions opt = base;
            opt.lambda = grid[gi];
            GaussianDependenceModel model;
            try {
                model = glasso_fit(empirical_covariance(ztr), opt);
            } catch (const NumericError&) {
                valid = false; // e.g. lambda = 0 on a rank-deficient fold
                break;
            }
            Eigen::LLT<Eigen::MatrixXd> llt(model.precision);
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < p; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
            double fold_ll = 0.0;
            const auto& test = folds[static_cast<std::size_t>(f)];
            for (const Eigen::Index row : test) {
                const Eigen::VectorXd x = panel.row(row);
                fold_ll += 0.5 * (logdet - static_cast<double>(p) * log2pi -
                                  x.dot(model.precision * x));
            }
            total += fold_ll / static_cast<double>(test.size());
        }
        if (valid) sel.mean_loglik[gi] = total / static_cast<double>(k_folds);
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi) {
        if (sel.mean_loglik[gi] > sel.mean_loglik[best]) best = gi;
    }
    if (!std::isfinite(sel.mean_loglik[best])) {
        throw NumericError("select_lambda: no grid value produced a valid fit");
    }
    sel.lambda = grid[best];
    return sel;
}

ConditionalGaussian conditional_params(const Eigen::MatrixXd& cov,
                                       const std::vector<int>& target,
                                       const std::vector<int>& given,
                                       const Eigen::VectorXd& given_values) {
    if (static_cast<Eigen::Index>(given.size()) != given_values.size()) {
        throw DataError("conditional_params: given index/value size mismatch");
    }
    const auto nt = static_cast<Eigen::Index>(target.size());
    const auto ng = static_cast<Eigen::Index>(given.size());
    Eigen::MatrixXd sgg(ng, ng), stg(nt, ng), stt(nt, nt);
    for (Eigen::Index a = 0; a < ng; ++a) {
        for (Eigen::Index b = 0; b < ng; ++b) sgg(a, b) = cov(given[a], given[b]);
    }
    for (Eigen::Index a = 0; a < nt; ++a) {
        for (Eigen::Index b = 0; b < ng; ++b) stg(a, b) = cov(target[a], given[b]);
        for (Eigen::Index b = 0; b < nt; ++b) stt(a, b) = cov(target[a], target[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sgg);
    if (llt.info() != Eigen::Success) {
        throw NumericError("conditional_params: conditioning block is not positive definite");
    }
    const Eigen::MatrixXd m = llt.solve(stg.transpose()).transpose(); // Sigma_tg Sigma_gg^-1

    ConditionalGaussian out;
    out.gain = m;
    out.mean = m * given_values;
    Eigen::MatrixXd c = stt - m * stg.transpose();
    c = (c + c.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
        throw NumericError("conditional_params: conditional covariance has eigenvalue " +
                           std::to_string(eig.eigenvalues().minCoeff()));
    }
    if (eig.eigenvalues().minCoeff() < 0.0) {
        const Eigen::VectorXd fixed = eig.eigenvalues().cwiseMax(0.0);
        c = eig.eigenvectors() * fixed.asDiagonal() * eig.eigenvectors().transpose();
        c = (c + c.transpose()) / 2.0;
    }
    out.covariance = std::move(c);
    return out;
}

ConditionalGaussian conditional_params(const GaussianDependenceModel& model,
                                       const Eigen::VectorXd& zone1_values) {
    if (!model.layout || model.layout->zones.size() != 2) {
        throw DataError("conditional_params: model needs a two-zone block layout");
    }
    // Zone 1 (the conditioning block) is the one placed first in the
    // stacked coordinates, regardless of name order.
    auto first_it = model.layout->zones.begin();
    auto second_it = std::next(first_it);
    if (second_it->second.start < first_it->second.start) std::swap(first_it, second_it);
    const auto& z1 = first_it->second;
    const auto& z2 = second_it->second;
    if (zone1_values.size() != z1.len) {
        throw DataError("conditional_params: zone-1 vector length " +
                        std::to_string(zone1_values.size()) + " does not match block size " +
                        std::to_string(z1.len));
    }
    std::vector<int> given(static_cast<std::size_t>(z1.len));
    std::vector<int> target(static_cast<std::size_t>(z2.len));
    for (int i = 0; i < z1.len; ++i) given[static_cast<std::size_t>(i)] = z1.start + i;
    for (int i = 0; i < z2.len; ++i) target[static_cast<std::size_t>(i)] = z2.start + i;
    return conditional_params(model.covariance, target, given, zone1_values);
}

} // namespace peakprob
