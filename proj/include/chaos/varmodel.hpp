#pragma once
// Single-equation least squares for vector autoregressions that may carry a
// contemporaneous (lag-0) block:
//
//   y_j(t) = c + sum_{k=1..p} sum_v b_{v,k} y_v(t-k) + sum_{v != j} b_{v,0} y_v(t) + e(t)

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaos/panel.hpp"

namespace chaos::var {

struct VarSpec {
  int p = 1;
  bool include_instantaneous = true;
  bool include_intercept = true;
};

enum class LagKind { lagged, contemporaneous };

/// One design column. variable < 0 marks the intercept.
struct Regressor {
  int variable = -1;
  int lag = 0;

  bool is_intercept() const noexcept { return variable < 0; }
  std::string describe(const std::vector<std::string>& names) const;
  friend auto operator<=>(const Regressor&, const Regressor&) = default;
};

/// Drops every lag 1..p (lagged) or the lag-0 term (contemporaneous) of a
/// variable from a design.
struct Exclusion {
  int variable = 0;
  LagKind kind = LagKind::lagged;
  friend auto operator<=>(const Exclusion&, const Exclusion&) = default;
};

struct Design {
  int target = 0;
  /// Rows cover t = first_row .. T-1.
  std::size_t first_row = 0;
  std::vector<Regressor> regressors;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

/// Minimum surplus of observations over regressors.
inline constexpr std::size_t kMinDegreesOfFreedom = 10;

/// Column order: intercept, own lags 1..p, then lags 1..p of every other
/// variable in table order, then lag-0 of every other variable. The target's
/// own lag-0 is never present. `first_row` (default p) fixes a common sample
/// across designs with different p; it must be >= p.
Design build_design(const panel::SeriesTable& table, int target, const VarSpec& spec,
                    std::span<const Exclusion> exclusions = {}, std::optional<std::size_t> first_row = {});

/// Design restricted to a subset of its columns (in the given order).
Design select_columns(const Design& design, std::span<const int> columns);

/// Pivoted-QR least squares on a fixed design. Columns are scaled to unit
/// norm before factoring, so rank decisions and fitted values do not depend
/// on column units. Throws RankDeficient naming the dependent columns.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::MatrixXd& X);

  Eigen::Index rows() const noexcept { return qr_.rows(); }
  Eigen::Index cols() const noexcept { return qr_.cols(); }

  Eigen::VectorXd coefficients(const Eigen::VectorXd& y) const;
  /// Sum of squared residuals, read off Q^T y without forming the fit.
  double ssr(const Eigen::VectorXd& y) const;

 private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::VectorXd scale_;
};

struct EquationFit {
  int target = 0;
  std::vector<Regressor> regressors;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  /// Maximum-likelihood estimate: SSR / T_eff.
  double residual_variance = 0.0;
  std::size_t t_eff = 0;
};

EquationFit ols_fit(const Design& design);

/// Lag order in 1..p_max minimizing the BIC of the reduced-form VAR (lags and
/// intercept only) on the common sample t = p_max .. T-1.
int select_lag(const panel::SeriesTable& table, int p_max, bool include_intercept = true);

/// BIC of the reduced-form VAR(p) on rows first_row .. T-1:
/// ln det(Sigma_ML) + ln(n) * K * (K p + c) / n.
double var_bic(const panel::SeriesTable& table, int p, std::size_t first_row, bool include_intercept = true);

}  // namespace chaos::var
