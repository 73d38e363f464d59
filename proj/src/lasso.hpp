#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace shapkit::detail {

// Weighted regression problem without intercept.
struct WeightedProblem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

// Minimizes sum_k w_k (y_k - x_k b)^2 through a column-pivoted QR of the
// sqrt(w)-scaled system. Returns false when the system is rank deficient.
bool weighted_least_squares(const WeightedProblem& p, Eigen::VectorXd& beta);

// Least squares using only the columns in `support`; others are zero.
bool weighted_least_squares_on(const WeightedProblem& p,
                               const std::vector<int>& support,
                               Eigen::VectorXd& beta);

// Smallest penalty at which the lasso solution is identically zero.
double lasso_lambda_max(const WeightedProblem& p);

// Coordinate descent for 1/(2W) sum w (y - x b)^2 + lambda |b|_1 where
// W = sum w. `beta` is the warm start and receives the solution.
void weighted_lasso(const WeightedProblem& p, double lambda,
                    Eigen::VectorXd& beta, int max_sweeps = 5000,
                    double tol = 1e-12);

// Lasso fit followed by the unpenalized refit on its support.
Eigen::VectorXd relaxed_lasso(const WeightedProblem& p, double lambda);

struct LassoPath {
  std::vector<double> lambdas;
  std::vector<double> cv_error;
  std::size_t best = 0;
};

// 5-fold weighted cross-validation of relaxed_lasso over `grid_size`
// log-spaced penalties from lambda_max down to lambda_max * 1e-3.
// K-fold CV over a log grid from lambda_max down to lambda_max * 1e-3.
// When `twin_offset` is nonzero, row k and row k + twin_offset always land
// in the same fold.
LassoPath cross_validate_lambda(const WeightedProblem& p, std::uint64_t seed,
                                int folds = 5, int grid_size = 20,
                                Eigen::Index twin_offset = 0);

}  // namespace shapkit::detail
