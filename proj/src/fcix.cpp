#include "chaos/fcix.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "chaos/error.hpp"
#include "chaos/parallel.hpp"
#include "chaos/simd/kernels.hpp"

namespace chaos::fcix {
namespace {

// Slices per work unit. Fixed, so partial sums never depend on thread count.
constexpr std::size_t kBlock = 64;

std::size_t block_count(std::size_t slices) { return (slices + kBlock - 1) / kBlock; }

// Calls fn(t) for every slice, block-parallel.
template <typename Fn>
void for_each_slice(std::size_t slices, Fn&& fn) {
  parallel_for(block_count(slices), [&](std::size_t b) {
    const std::size_t end = std::min(slices, (b + 1) * kBlock);
    for (std::size_t t = b * kBlock; t < end; ++t) fn(t);
  });
}

// sum_t weight[t] * column(t), reduced block-wise then pairwise.
template <typename ColumnFn>
Eigen::VectorXd weighted_column_sum(std::size_t slices, std::size_t n, const std::vector<double>& weight,
                                    ColumnFn&& column) {
  const auto& k = simd::kernels();
  std::vector<std::vector<double>> partials(block_count(slices), std::vector<double>(n, 0.0));
  parallel_for(partials.size(), [&](std::size_t b) {
    const std::size_t end = std::min(slices, (b + 1) * kBlock);
    double* acc = partials[b].data();
    for (std::size_t t = b * kBlock; t < end; ++t) k.axpy(weight[t], column(t), acc, n);
  });
  tree_reduce_vectors(partials);
  return Eigen::Map<const Eigen::VectorXd>(partials.front().data(), static_cast<Eigen::Index>(n));
}

double sum_sq(const std::vector<double>& v) {
  std::vector<double> sq(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) sq[t] = v[t] * v[t];
  return tree_sum(sq);
}

void require_positive(const Eigen::VectorXd& v, const char* what) {
  if (!(v.array() > 0.0).all() || !v.allFinite()) {
    throw InternalError(std::string("rank-one fit produced a non-positive entry in ") + what);
  }
}

// Per-slice residual of a_t b_t^T - c x y^T with unit x, y. Writing
// a = alpha x + a_perp and b = beta y + b_perp splits the difference into four
// mutually orthogonal rank-one pieces, so no large terms cancel.
double slice_residual(double alpha, double beta, double c, double a_perp_sq, double b_perp_sq) {
  const double d = alpha * beta - c;
  return d * d + alpha * alpha * b_perp_sq + beta * beta * a_perp_sq + a_perp_sq * b_perp_sq;
}

struct SliceState {
  std::vector<double> u;  // x . r(t)
  std::vector<double> s;  // y . r(t)^-1
};

}  // namespace

ImplicitRpct::ImplicitRpct(const panel::ReturnPanel& returns, std::size_t first, std::size_t count)
    : source_(&returns), first_(first), assets_(returns.assets()) {
  const std::size_t total = returns.periods();
  if (first >= total) throw ContractViolation("tensor range starts past the last return period");
  slices_ = std::min(count, total - first);
  if (slices_ == 0) throw ContractViolation("empty tensor range");
  first_column_ = returns.returns().data() + first * assets_;
  reciprocals_.resize(slices_ * assets_);
  simd::kernels().reciprocal(first_column_, reciprocals_.data(), reciprocals_.size());
}

Eigen::MatrixXd rpcm_slice(const panel::ReturnPanel& returns, std::size_t t) {
  if (t >= returns.periods()) {
    throw ContractViolation("slice index " + std::to_string(t) + " out of range [0, " +
                            std::to_string(returns.periods()) + ")");
  }
  const auto r = returns.returns().col(static_cast<Eigen::Index>(t));
  const Eigen::Index n = r.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = r(i) / r(j);
  }
  return a;
}

double frobenius_norm_sq(const ImplicitRpct& rpct) {
  const auto& k = simd::kernels();
  const std::size_t n = rpct.assets();
  std::vector<double> per(rpct.slices());
  for_each_slice(rpct.slices(), [&](std::size_t t) {
    const double* r = rpct.returns(t);
    const double* q = rpct.reciprocals(t);
    per[t] = k.dot(r, r, n) * k.dot(q, q, n);
  });
  return tree_sum(per);
}

double rank_one_objective(const ImplicitRpct& rpct, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& z) {
  const auto& k = simd::kernels();
  const std::size_t n = rpct.assets();
  std::vector<double> per(rpct.slices());
  for_each_slice(rpct.slices(), [&](std::size_t t) {
    const double* r = rpct.returns(t);
    const double* q = rpct.reciprocals(t);
    const double alpha = k.dot(x.data(), r, n);
    const double beta = k.dot(y.data(), q, n);
    per[t] = slice_residual(alpha, beta, z(static_cast<Eigen::Index>(t)), k.residual_sq(r, x.data(), alpha, n),
                            k.residual_sq(q, y.data(), beta, n));
  });
  return tree_sum(per);
}

RankOneFactors fit_rank_one(const ImplicitRpct& rpct, const FitOptions& opts) {
  const std::size_t n = rpct.assets();
  const std::size_t T = rpct.slices();
  if (n < 2) throw ContractViolation("rank-one fit needs at least 2 assets");
  if (opts.max_sweeps < 1) throw ContractViolation("max_sweeps must be >= 1");
  const auto& k = simd::kernels();
  const auto ni = static_cast<Eigen::Index>(n);

  RankOneFactors out;
  out.norm_sq = frobenius_norm_sq(rpct);

  // Each period enters the default start at unit norm, so rescaling a
  // period (which leaves its slice unchanged) does not move the start.
  std::vector<double> inv_norm(T);
  if (opts.init_x) {
    if (opts.init_x->size() != ni) throw ContractViolation("init_x has the wrong length");
    out.x = *opts.init_x;
  } else {
    for_each_slice(T, [&](std::size_t t) { inv_norm[t] = 1.0 / std::sqrt(k.dot(rpct.returns(t), rpct.returns(t), n)); });
    out.x = weighted_column_sum(T, n, inv_norm, [&](std::size_t t) { return rpct.returns(t); });
  }
  if (opts.init_y) {
    if (opts.init_y->size() != ni) throw ContractViolation("init_y has the wrong length");
    out.y = *opts.init_y;
  } else {
    for_each_slice(T, [&](std::size_t t) {
      inv_norm[t] = 1.0 / std::sqrt(k.dot(rpct.reciprocals(t), rpct.reciprocals(t), n));
    });
    out.y = weighted_column_sum(T, n, inv_norm, [&](std::size_t t) { return rpct.reciprocals(t); });
  }
  require_positive(out.x, "initial x");
  require_positive(out.y, "initial y");
  out.x.normalize();
  out.y.normalize();

  SliceState st{std::vector<double>(T), std::vector<double>(T)};
  std::vector<double> weight(T);
  std::vector<double> z(T);

  for_each_slice(T, [&](std::size_t t) {
    st.u[t] = k.dot(out.x.data(), rpct.returns(t), n);
    st.s[t] = k.dot(out.y.data(), rpct.reciprocals(t), n);
    z[t] = st.u[t] * st.s[t];
  });

  auto z_vector = [&] { return Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(T)); };
  auto record_block = [&] {
    if (opts.record_block_trace) out.block_trace.push_back(rank_one_objective(rpct, out.x, out.y, z_vector()));
  };

  double f_prev = rank_one_objective(rpct, out.x, out.y, z_vector());
  out.objective_trace.push_back(f_prev);
  const double floor = 1e-16 * out.norm_sq;

  std::vector<double> residual(T);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    // x <- argmin with y, z fixed: sum_t z_t A(t) y = sum_t z_t s_t r(t).
    for (std::size_t t = 0; t < T; ++t) weight[t] = z[t] * st.s[t];
    Eigen::VectorXd w = weighted_column_sum(T, n, weight, [&](std::size_t t) { return rpct.returns(t); });
    require_positive(w, "x");
    double scale = w.norm() / sum_sq(z);
    out.x = w / w.norm();
    for (double& zt : z) zt *= scale;
    record_block();

    // y <- sum_t z_t A(t)^T x = sum_t z_t u_t / r(t).
    for_each_slice(T, [&](std::size_t t) { st.u[t] = k.dot(out.x.data(), rpct.returns(t), n); });
    for (std::size_t t = 0; t < T; ++t) weight[t] = z[t] * st.u[t];
    w = weighted_column_sum(T, n, weight, [&](std::size_t t) { return rpct.reciprocals(t); });
    require_positive(w, "y");
    scale = w.norm() / sum_sq(z);
    out.y = w / w.norm();
    for (double& zt : z) zt *= scale;
    record_block();

    // z_t <- x^T A(t) y = u_t s_t; the residual comes out of the same pass.
    for_each_slice(T, [&](std::size_t t) {
      const double* r = rpct.returns(t);
      const double* q = rpct.reciprocals(t);
      st.s[t] = k.dot(out.y.data(), q, n);
      z[t] = st.u[t] * st.s[t];
      residual[t] = slice_residual(st.u[t], st.s[t], z[t], k.residual_sq(r, out.x.data(), st.u[t], n),
                                   k.residual_sq(q, out.y.data(), st.s[t], n));
    });
    const double f = tree_sum(residual);
    if (opts.record_block_trace) out.block_trace.push_back(f);
    out.objective_trace.push_back(f);
    out.iterations = sweep;

    if (std::abs(f_prev - f) <= opts.tol * std::max(f_prev, floor)) {
      out.converged = true;
      f_prev = f;
      break;
    }
    f_prev = f;
  }

  out.z = z_vector();
  require_positive(out.z, "z");
  out.objective = f_prev;
  out.relative_residual = out.norm_sq > 0.0 ? std::clamp(std::sqrt(f_prev / out.norm_sq), 0.0, 1.0) : 0.0;
  return out;
}

EigenPair dominant_eigenvalue(const Eigen::MatrixXd& matrix, const EigenOptions& opts) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ContractViolation("dominant_eigenvalue needs a non-empty square matrix");
  }
  if (!(matrix.array() > 0.0).all()) throw ContractViolation("dominant_eigenvalue needs a positive matrix");

  const Eigen::Index n = matrix.rows();
  EigenPair out;
  out.vector = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda_prev = 0.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    Eigen::VectorXd w = matrix * out.vector;
    const double lambda = w.norm();
    out.vector = w / lambda;
    out.value = lambda;
    out.iterations = it;
    if (it > 1 && std::abs(lambda - lambda_prev) <= opts.tol * std::max(1.0, lambda)) return out;
    lambda_prev = lambda;
  }
  throw NonConvergence("power iteration did not converge in " + std::to_string(opts.max_iters) + " iterations",
                       out.value, std::vector<double>(out.vector.data(), out.vector.data() + n), opts.max_iters);
}

FcixSeries fcix_series(const RankOneFactors& factors, std::size_t assets, std::vector<Date> timestamps) {
  if (assets < 2) throw ContractViolation("FCIX needs at least 2 assets");
  if (static_cast<std::size_t>(factors.z.size()) != timestamps.size()) {
    throw ContractViolation("timestamps do not match the length of z");
  }
  const double alignment = factors.y.dot(factors.x);
  const double nd = static_cast<double>(assets);
  FcixSeries out;
  out.timestamps = std::move(timestamps);
  out.values.resize(out.timestamps.size());
  out.lambda_max.resize(out.timestamps.size());
  for (std::size_t t = 0; t < out.timestamps.size(); ++t) {
    const double lambda = factors.z(static_cast<Eigen::Index>(t)) * alignment;
    out.lambda_max[t] = lambda;
    out.values[t] = (lambda - nd) / (nd - 1.0);
  }
  return out;
}

FcixRun fcix_pipeline(const panel::PricePanel& prices, const PipelineOptions& opts) {
  const panel::ReturnPanel returns = panel::gross_returns(prices);
  const std::size_t n = returns.assets();
  FcixRun run;

  if (!opts.window) {
    const ImplicitRpct rpct(returns);
    run.factors = fit_rank_one(rpct, opts.fit);
    run.all_converged = run.factors.converged;
    run.series = fcix_series(run.factors, n, returns.timestamps());
    return run;
  }

  const std::size_t w = *opts.window;
  if (w < 1 || w > returns.periods()) {
    throw ContractViolation("window must lie in [1, " + std::to_string(returns.periods()) + "]");
  }
  FitOptions fit = opts.fit;
  for (std::size_t end = w - 1; end < returns.periods(); ++end) {
    const ImplicitRpct rpct(returns, end + 1 - w, w);
    run.factors = fit_rank_one(rpct, fit);
    run.all_converged = run.all_converged && run.factors.converged;
    const double lambda = run.factors.z(static_cast<Eigen::Index>(w - 1)) * run.factors.y.dot(run.factors.x);
    run.series.timestamps.push_back(returns.timestamps()[end]);
    run.series.lambda_max.push_back(lambda);
    run.series.values.push_back((lambda - static_cast<double>(n)) / (static_cast<double>(n) - 1.0));
    fit.init_x = run.factors.x;
    fit.init_y = run.factors.y;
  }
  return run;
}

void write_fcix_csv(std::ostream& out, const FcixSeries& series, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "date,fcix,lambda_max\n";
  for (std::size_t t = 0; t < series.timestamps.size(); ++t) {
    out << series.timestamps[t].to_string() << ',' << panel::format_double(series.values[t]) << ','
        << panel::format_double(series.lambda_max[t]) << '\n';
  }
}

nlohmann::json factors_to_json(const RankOneFactors& factors) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return nlohmann::json{{"x", vec(factors.x)},
                        {"y", vec(factors.y)},
                        {"z", vec(factors.z)},
                        {"relative_residual", factors.relative_residual},
                        {"iterations", factors.iterations},
                        {"converged", factors.converged}};
}

}  // namespace chaos::fcix
