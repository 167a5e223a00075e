#pragma once
// Textbook Granger causality in long double: two separate regressions of
// y_j(t) on lagged blocks, solved by Householder QR, compared through their
// residual sums of squares.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline long double ssr(const MatL& X, const VecL& y) {
  const VecL beta = X.householderQr().solve(y);
  return (y - X * beta).squaredNorm();
}

/// values is K x T. Regressors: intercept (optional) and lags 1..p of every
/// series in `included`; rows t = p .. T-1.
inline MatL lag_design(const Eigen::MatrixXd& values, const std::vector<int>& included, int p, bool intercept) {
  const auto T = values.cols();
  const Eigen::Index rows = T - p;
  const Eigen::Index cols = (intercept ? 1 : 0) + static_cast<Eigen::Index>(included.size()) * p;
  MatL X(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Eigen::Index c = 0;
    if (intercept) X(r, c++) = 1.0L;
    for (int v : included)
      for (int lag = 1; lag <= p; ++lag) X(r, c++) = values(v, r + p - lag);
  }
  return X;
}

/// ln(SSR without source lags / SSR with all lags) for target j.
inline double classical_gc(const Eigen::MatrixXd& values, int source, int target, int p, bool intercept) {
  std::vector<int> all, reduced;
  for (int v = 0; v < values.rows(); ++v) {
    all.push_back(v);
    if (v != source) reduced.push_back(v);
  }
  VecL y(values.cols() - p);
  for (Eigen::Index r = 0; r < y.size(); ++r) y(r) = values(target, r + p);
  const long double u = ssr(lag_design(values, all, p, intercept), y);
  const long double rr = ssr(lag_design(values, reduced, p, intercept), y);
  return static_cast<double>(std::log(rr / u));
}

}  // namespace oracle
