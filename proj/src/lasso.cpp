#include "lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace shapkit::detail {

bool weighted_least_squares(const WeightedProblem& p, Eigen::VectorXd& beta) {
  std::vector<int> all(p.x.cols());
  std::iota(all.begin(), all.end(), 0);
  return weighted_least_squares_on(p, all, beta);
}

bool weighted_least_squares_on(const WeightedProblem& p,
                               const std::vector<int>& support,
                               Eigen::VectorXd& beta) {
  beta = Eigen::VectorXd::Zero(p.x.cols());
  if (support.empty()) return true;
  const Eigen::VectorXd sw = p.w.cwiseSqrt();
  Eigen::MatrixXd a(p.x.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    a.col(static_cast<Eigen::Index>(j)) = sw.cwiseProduct(p.x.col(support[j]));
  }
  const Eigen::VectorXd b = sw.cwiseProduct(p.y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < static_cast<Eigen::Index>(support.size())) return false;
  const Eigen::VectorXd sol = qr.solve(b);
  for (std::size_t j = 0; j < support.size(); ++j) {
    beta(support[j]) = sol(static_cast<Eigen::Index>(j));
  }
  return true;
}

double lasso_lambda_max(const WeightedProblem& p) {
  const double total = p.w.sum();
  const Eigen::VectorXd c = p.x.transpose() * p.w.cwiseProduct(p.y);
  return c.cwiseAbs().maxCoeff() / total;
}

void weighted_lasso(const WeightedProblem& p, double lambda,
                    Eigen::VectorXd& beta, int max_sweeps, double tol) {
  const Eigen::Index d = p.x.cols();
  if (beta.size() != d) beta = Eigen::VectorXd::Zero(d);
  // Covariance updates: with G = X'WX / sum(w) and grad = X'Wy / sum(w) - G b
  // each coordinate step costs O(d) instead of O(n).
  const double total = p.w.sum();
  const Eigen::MatrixXd wx = p.x.array().colwise() * p.w.array();
  const Eigen::MatrixXd gram = (p.x.transpose() * wx) / total;
  Eigen::VectorXd grad = (wx.transpose() * p.y) / total - gram * beta;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double scale = gram(j, j);
      if (scale <= 0.0) {
        beta(j) = 0.0;
        continue;
      }
      const double old = beta(j);
      const double rho = grad(j) + scale * old;
      double next = 0.0;
      if (rho > lambda) {
        next = (rho - lambda) / scale;
      } else if (rho < -lambda) {
        next = (rho + lambda) / scale;
      }
      if (next != old) {
        grad -= (next - old) * gram.col(j);
        beta(j) = next;
        max_step = std::max(max_step, std::abs(next - old) * std::sqrt(scale));
      }
    }
    if (max_step < tol) break;
  }
}

Eigen::VectorXd relaxed_lasso(const WeightedProblem& p, double lambda) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p.x.cols());
  weighted_lasso(p, lambda, beta);
  std::vector<int> support;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) support.push_back(static_cast<int>(j));
  }
  Eigen::VectorXd refit;
  if (!weighted_least_squares_on(p, support, refit)) return beta;
  return refit;
}

namespace {

WeightedProblem take_rows(const WeightedProblem& p,
                          const std::vector<Eigen::Index>& rows) {
  WeightedProblem out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, p.x.cols());
  out.y.resize(n);
  out.w.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.x.row(k) = p.x.row(rows[k]);
    out.y(k) = p.y(rows[k]);
    out.w(k) = p.w(rows[k]);
  }
  return out;
}

}  // namespace

LassoPath cross_validate_lambda(const WeightedProblem& p, std::uint64_t seed,
                                int folds, int grid_size, Eigen::Index twin_offset) {
  LassoPath path;
  const double top = lasso_lambda_max(p);
  for (int k = 0; k < grid_size; ++k) {
    const double frac = grid_size > 1 ? static_cast<double>(k) / (grid_size - 1) : 0.0;
    path.lambdas.push_back(top * std::pow(10.0, -3.0 * frac));
  }
  path.cv_error.assign(path.lambdas.size(), 0.0);
  if (top <= 0.0) return path;

  const Eigen::Index n = twin_offset > 0 ? twin_offset : p.x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int used_folds = static_cast<int>(std::min<Eigen::Index>(folds, n));
  for (int f = 0; f < used_folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto& dst = static_cast<int>(k % used_folds) == f ? test : train;
      dst.push_back(order[k]);
      if (twin_offset > 0) dst.push_back(order[k] + twin_offset);
    }
    if (train.empty() || test.empty()) continue;
    const WeightedProblem tr = take_rows(p, train);
    const WeightedProblem te = take_rows(p, test);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(p.x.cols());
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
      weighted_lasso(tr, path.lambdas[l], warm);
      std::vector<int> support;
      for (Eigen::Index j = 0; j < warm.size(); ++j) {
        if (warm(j) != 0.0) support.push_back(static_cast<int>(j));
      }
      Eigen::VectorXd refit;
      if (!weighted_least_squares_on(tr, support, refit)) refit = warm;
      const Eigen::VectorXd r = te.y - te.x * refit;
      path.cv_error[l] += te.w.dot(r.cwiseAbs2());
    }
  }
  path.best = static_cast<std::size_t>(
      std::min_element(path.cv_error.begin(), path.cv_error.end()) -
      path.cv_error.begin());
  return path;
}

}  // namespace shapkit::detail
