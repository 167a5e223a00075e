#pragma once
// Financial Chaos Index.
//
// Each period t defines a reciprocal pairwise comparison matrix
// A(t)_ij = r_i(t) / r_j(t). Stacked over time these form an N x N x T
// tensor. The tensor is approximated by a rank-one term z o (x y^T) and the
// index at t is read off the dominant eigenvalue of the approximated slice:
//
//   FCIX(t) = (lambda_max(t) - N) / (N - 1),   lambda_max(t) = z_t <x, y>.
//
// The tensor is never materialized. Every contraction the fit needs
// factors through the return vector and its elementwise reciprocal, so a
// sweep costs O(N T).

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "chaos/panel.hpp"

namespace chaos::fcix {

/// Implicit view of the comparison tensor over a range of return periods.
/// Holds a pointer to the source panel, which must outlive it, plus the
/// reciprocal returns of the covered range.
class ImplicitRpct {
 public:
  explicit ImplicitRpct(const panel::ReturnPanel& returns, std::size_t first = 0,
                        std::size_t count = std::numeric_limits<std::size_t>::max());

  std::size_t assets() const noexcept { return assets_; }
  std::size_t slices() const noexcept { return slices_; }
  /// r(t): contiguous return vector of the t-th covered period.
  const double* returns(std::size_t t) const noexcept { return first_column_ + t * assets_; }
  /// 1 / r(t), elementwise.
  const double* reciprocals(std::size_t t) const noexcept { return reciprocals_.data() + t * assets_; }
  const panel::ReturnPanel& source() const noexcept { return *source_; }
  std::size_t first_period() const noexcept { return first_; }

 private:
  const panel::ReturnPanel* source_;
  std::size_t first_;
  std::size_t assets_;
  std::size_t slices_;
  const double* first_column_;
  std::vector<double> reciprocals_;
};

/// Materializes slice t: entry (i, j) = r_i(t) / r_j(t).
Eigen::MatrixXd rpcm_slice(const panel::ReturnPanel& returns, std::size_t t);

/// Squared Frobenius norm of the whole tensor, via
/// sum_t (sum_i r_i^2)(sum_j r_j^-2).
double frobenius_norm_sq(const ImplicitRpct& rpct);

struct FitOptions {
  int max_sweeps = 500;
  /// Converged when |f_prev - f| <= tol * max(f_prev, 1e-16 * ||A||^2).
  double tol = 1e-10;
  /// Optional warm start for x and y (positive, any scale). Default: the
  /// sums over t of r(t) / ||r(t)|| and of (1/r(t)) / ||1/r(t)||.
  std::optional<Eigen::VectorXd> init_x;
  std::optional<Eigen::VectorXd> init_y;
  /// Also record the objective after every block update (x, y, z).
  bool record_block_trace = false;
};

struct RankOneFactors {
  Eigen::VectorXd x;  ///< positive, unit norm
  Eigen::VectorXd y;  ///< positive, unit norm
  Eigen::VectorXd z;  ///< positive, carries all scale
  double objective = 0.0;          ///< ||A - z o (x y^T)||_F^2
  double norm_sq = 0.0;            ///< ||A||_F^2
  double relative_residual = 0.0;  ///< sqrt(objective / norm_sq)
  int iterations = 0;
  bool converged = false;
  /// Objective at the initial point and after every full sweep.
  std::vector<double> objective_trace;
  /// Objective after each block update; filled only when requested.
  std::vector<double> block_trace;
};

/// Alternating least squares for the rank-one approximation. Each block
/// update is the exact minimizer over that block, so the objective never
/// increases. Positive data keeps every iterate positive.
RankOneFactors fit_rank_one(const ImplicitRpct& rpct, const FitOptions& opts = {});

/// Squared Frobenius residual of the rank-one model z o (x y^T) against the
/// implicit tensor, evaluated without cancellation. x and y need unit norm.
double rank_one_objective(const ImplicitRpct& rpct, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& z);

struct EigenOptions {
  /// Stops when |lambda_k - lambda_{k-1}| <= tol * max(1, lambda_k).
  double tol = 1e-12;
  int max_iters = 10000;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;  ///< unit norm, positive
  int iterations = 0;
};

/// Power iteration for the Perron root of an entrywise-positive matrix.
/// Throws NonConvergence (carrying the last iterate) when max_iters runs out.
EigenPair dominant_eigenvalue(const Eigen::MatrixXd& matrix, const EigenOptions& opts = {});

struct FcixSeries {
  std::vector<Date> timestamps;
  std::vector<double> values;
  std::vector<double> lambda_max;
};

/// lambda_max(t) = z_t <y, x>, the Perron root of the rank-one slice
/// z_t x y^T; FCIX(t) = (lambda_max(t) - N) / (N - 1).
FcixSeries fcix_series(const RankOneFactors& factors, std::size_t assets, std::vector<Date> timestamps);

struct PipelineOptions {
  FitOptions fit;
  /// Sliding window length in return periods. Each date from window-1 on is
  /// scored by a fit on the window ending at that date.
  std::optional<std::size_t> window;
};

struct FcixRun {
  FcixSeries series;
  /// Full-sample factors, or those of the last window in windowed mode.
  RankOneFactors factors;
  /// False if any fit hit max_sweeps.
  bool all_converged = true;
};

FcixRun fcix_pipeline(const panel::PricePanel& prices, const PipelineOptions& opts = {});

/// `date,fcix,lambda_max`, preceded by `# ...` comment lines.
void write_fcix_csv(std::ostream& out, const FcixSeries& series, const std::vector<std::string>& comments = {});

/// {x, y, z, relative_residual, iterations, converged}
nlohmann::json factors_to_json(const RankOneFactors& factors);

}  // namespace chaos::fcix
