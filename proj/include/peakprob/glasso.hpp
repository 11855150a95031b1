#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peakprob/marginal.hpp"

namespace peakprob {

struct BlockRange {
    int start = 0;
    int len = 0;
};

// Zone -> contiguous index range inside a stacked coordinate vector.
struct BlockLayout {
    std::map<std::string, BlockRange> zones;
};

// Estimated Gaussian dependence structure over standard-normal coordinates:
// precision matrix, its inverse, and the penalty it was fitted with.
struct GaussianDependenceModel {
    Eigen::MatrixXd precision;
    Eigen::MatrixXd covariance;
    double lambda = 0.0;
    bool diagonal_penalized = false;
    std::optional<BlockLayout> layout;

    int dim() const { return static_cast<int>(precision.rows()); }
};

// Uncentered second-moment matrix S = Z'Z / N. Columns are assumed
// zero-mean by construction of the Gaussianization. Throws DataError for
// fewer than 2 rows.
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& panel);
inline Eigen::MatrixXd empirical_covariance(const GaussianizedPanel& panel) {
    return empirical_covariance(panel.z);
}

struct GlassoOptions {
    double lambda = 0.01;
    // Penalty applies to off-diagonal entries only by default; set to true
    // to penalize the full matrix.
    bool penalize_diagonal = false;
    double gap_tol = 1e-6; // duality-gap tolerance per dimension
    int max_sweeps = 500;
};

struct GlassoDiagnostics {
    std::vector<double> objective_per_sweep;
    double final_gap = 0.0;
    int sweeps = 0;
    bool converged = false;
};

// Penalized objective trace(S T) - log det T + lambda * ||T||_1, with the
// L1 norm over the off-diagonal or the full matrix per the stated
// convention.
double glasso_objective(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta, double lambda,
                        bool penalize_diagonal);

// L1-penalized maximum-likelihood precision estimation, solved by block
// coordinate descent over columns of the precision matrix with a lasso
// inner loop. The exact inverse is maintained throughout, the objective is
// non-increasing per sweep, and termination is certified by a projected
// dual feasible point (duality gap <= gap_tol * dim).
//
// Throws ConfigError for lambda < 0, NumericError for lambda = 0 with a
// singular S.
GaussianDependenceModel glasso_fit(const Eigen::MatrixXd& S, const GlassoOptions& options = {},
                                   GlassoDiagnostics* diagnostics = nullptr);

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<double> mean_loglik; // aligned with the input grid
};

// Picks the grid value maximizing mean held-out Gaussian log-likelihood
// under k-fold row splits (round-robin fold assignment; ties keep the
// earlier grid entry). Throws DataError when a fold has fewer than 2 rows.
LambdaSelection select_lambda(const Eigen::MatrixXd& panel, const std::vector<double>& grid,
                              int k_folds = 5, const GlassoOptions& base = {});

struct ConditionalGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    // Regression matrix Sigma_tg Sigma_gg^-1; mean = gain * given_values.
    Eigen::MatrixXd gain;
};

// Gaussian conditioning: law of the `target` coordinates given observed
// values at the `given` coordinates. The conditional covariance is
// symmetrized and negative eigenvalues above -1e-10 are clamped to zero.
ConditionalGaussian conditional_params(const Eigen::MatrixXd& cov,
                                       const std::vector<int>& target,
                                       const std::vector<int>& given,
                                       const Eigen::VectorXd& given_values);

// Two-zone convenience: condition the second zone block on the first.
// Requires a layout with exactly two zones.
ConditionalGaussian conditional_params(const GaussianDependenceModel& model,
                                       const Eigen::VectorXd& zone1_values);

} // namespace peakprob
