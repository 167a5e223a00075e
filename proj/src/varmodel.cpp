#include "chaos/varmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "chaos/error.hpp"

namespace chaos::var {
namespace {

void check_spec(const VarSpec& spec, std::size_t K) {
  if (spec.p < 1) throw ContractViolation("lag order p must be >= 1");
  if (K < 2) throw ContractViolation("VAR needs at least 2 series");
}

bool excluded(std::span<const Exclusion> exclusions, int variable, int lag) {
  const LagKind kind = lag == 0 ? LagKind::contemporaneous : LagKind::lagged;
  return std::any_of(exclusions.begin(), exclusions.end(),
                     [&](const Exclusion& e) { return e.variable == variable && e.kind == kind; });
}

}  // namespace

std::string Regressor::describe(const std::vector<std::string>& names) const {
  if (is_intercept()) return "const";
  const std::string& name = names.at(static_cast<std::size_t>(variable));
  return lag == 0 ? name + "(t)" : name + "(t-" + std::to_string(lag) + ")";
}

Design build_design(const panel::SeriesTable& table, int target, const VarSpec& spec,
                    std::span<const Exclusion> exclusions, std::optional<std::size_t> first_row) {
  const std::size_t K = table.series();
  const std::size_t T = table.length();
  check_spec(spec, K);
  if (target < 0 || static_cast<std::size_t>(target) >= K) {
    throw ContractViolation("target index " + std::to_string(target) + " out of range");
  }
  for (const auto& e : exclusions) {
    if (e.variable < 0 || static_cast<std::size_t>(e.variable) >= K) {
      throw ContractViolation("exclusion references unknown variable " + std::to_string(e.variable));
    }
    if (e.variable == target && e.kind == LagKind::contemporaneous) {
      throw ContractViolation("the target's own lag-0 term is never a regressor and cannot be excluded");
    }
    if (e.kind == LagKind::contemporaneous && !spec.include_instantaneous) {
      throw ContractViolation("lag-0 exclusion requested but the instantaneous block is disabled");
    }
  }
  const std::size_t start = first_row.value_or(static_cast<std::size_t>(spec.p));
  if (start < static_cast<std::size_t>(spec.p)) throw ContractViolation("first_row must be >= p");

  Design d;
  d.target = target;
  d.first_row = start;
  if (spec.include_intercept) d.regressors.push_back({-1, 0});
  auto add_lags = [&](int v) {
    for (int k = 1; k <= spec.p; ++k) {
      if (!excluded(exclusions, v, k)) d.regressors.push_back({v, k});
    }
  };
  add_lags(target);
  for (int v = 0; v < static_cast<int>(K); ++v) {
    if (v != target) add_lags(v);
  }
  if (spec.include_instantaneous) {
    for (int v = 0; v < static_cast<int>(K); ++v) {
      if (v != target && !excluded(exclusions, v, 0)) d.regressors.push_back({v, 0});
    }
  }

  if (T <= start || T - start < d.regressors.size() + kMinDegreesOfFreedom) {
    throw InsufficientData("VAR design needs at least " + std::to_string(d.regressors.size() + kMinDegreesOfFreedom) +
                           " usable rows, have " + std::to_string(T > start ? T - start : 0));
  }

  const auto rows = static_cast<Eigen::Index>(T - start);
  const auto& v = table.values();
  d.X.resize(rows, static_cast<Eigen::Index>(d.regressors.size()));
  d.y = v.row(target).segment(static_cast<Eigen::Index>(start), rows).transpose();
  for (std::size_t c = 0; c < d.regressors.size(); ++c) {
    const auto& r = d.regressors[c];
    const auto col = static_cast<Eigen::Index>(c);
    if (r.is_intercept()) {
      d.X.col(col).setOnes();
    } else {
      d.X.col(col) = v.row(r.variable).segment(static_cast<Eigen::Index>(start) - r.lag, rows).transpose();
    }
  }
  return d;
}

Design select_columns(const Design& design, std::span<const int> columns) {
  Design out;
  out.target = design.target;
  out.first_row = design.first_row;
  out.y = design.y;
  out.X.resize(design.X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.X.col(static_cast<Eigen::Index>(c)) = design.X.col(columns[c]);
    out.regressors.push_back(design.regressors.at(static_cast<std::size_t>(columns[c])));
  }
  return out;
}

LeastSquares::LeastSquares(const Eigen::MatrixXd& X) {
  if (X.rows() <= X.cols()) throw InsufficientData("least squares needs more rows than columns");
  scale_ = X.colwise().norm().transpose();
  std::vector<int> zero;
  for (Eigen::Index c = 0; c < scale_.size(); ++c) {
    if (!(scale_(c) > 0.0)) zero.push_back(static_cast<int>(c));
  }
  if (!zero.empty()) throw RankDeficient("design has all-zero columns", zero);

  qr_.setThreshold(1e-10);
  qr_.compute(X * scale_.cwiseInverse().asDiagonal());
  if (qr_.rank() < X.cols()) {
    std::vector<int> dependent;
    const auto& perm = qr_.colsPermutation().indices();
    for (Eigen::Index k = qr_.rank(); k < X.cols(); ++k) dependent.push_back(perm(k));
    std::sort(dependent.begin(), dependent.end());
    std::string list;
    for (int c : dependent) list += (list.empty() ? "" : ", ") + std::to_string(c);
    throw RankDeficient("design is rank deficient; collinear columns: " + list, dependent);
  }
}

Eigen::VectorXd LeastSquares::coefficients(const Eigen::VectorXd& y) const {
  return qr_.solve(y).cwiseQuotient(scale_);
}

double LeastSquares::ssr(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd qty = qr_.householderQ().transpose() * y;
  return qty.tail(qr_.rows() - qr_.cols()).squaredNorm();
}

EquationFit ols_fit(const Design& design) {
  const LeastSquares ls(design.X);
  EquationFit fit;
  fit.target = design.target;
  fit.regressors = design.regressors;
  fit.coefficients = ls.coefficients(design.y);
  fit.fitted = design.X * fit.coefficients;
  fit.residuals = design.y - fit.fitted;
  fit.t_eff = static_cast<std::size_t>(design.y.size());
  fit.residual_variance = fit.residuals.squaredNorm() / static_cast<double>(fit.t_eff);
  return fit;
}

double var_bic(const panel::SeriesTable& table, int p, std::size_t first_row, bool include_intercept) {
  const std::size_t K = table.series();
  const std::size_t T = table.length();
  if (p < 1) throw ContractViolation("lag order p must be >= 1");
  if (first_row < static_cast<std::size_t>(p)) throw ContractViolation("first_row must be >= p");
  const std::size_t cols = K * static_cast<std::size_t>(p) + (include_intercept ? 1 : 0);
  if (T <= first_row || T - first_row < cols + kMinDegreesOfFreedom) {
    throw InsufficientData("VAR(" + std::to_string(p) + ") needs at least " +
                           std::to_string(cols + kMinDegreesOfFreedom) + " usable rows");
  }
  const auto n = static_cast<Eigen::Index>(T - first_row);
  const auto& v = table.values();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(cols));
  Eigen::Index c = 0;
  if (include_intercept) X.col(c++).setOnes();
  for (int k = 1; k <= p; ++k) {
    for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(K); ++s) {
      X.col(c++) = v.row(s).segment(static_cast<Eigen::Index>(first_row) - k, n).transpose();
    }
  }
  const Eigen::MatrixXd Y = v.middleCols(static_cast<Eigen::Index>(first_row), n).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd E = Y - X * qr.solve(Y);
  const Eigen::MatrixXd sigma = (E.transpose() * E) / static_cast<double>(n);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw RankDeficient("residual covariance is singular", {});
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double nd = static_cast<double>(n);
  return log_det + std::log(nd) * static_cast<double>(K * cols) / nd;
}

int select_lag(const panel::SeriesTable& table, int p_max, bool include_intercept) {
  if (p_max < 1) throw ContractViolation("p_max must be >= 1");
  const auto first_row = static_cast<std::size_t>(p_max);
  int best = 1;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    const double bic = var_bic(table, p, first_row, include_intercept);
    if (bic < best_bic) {
      best_bic = bic;
      best = p;
    }
  }
  return best;
}

}  // namespace chaos::var
