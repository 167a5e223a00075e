#include "chaos/synth.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "chaos/error.hpp"

namespace chaos::synth {
namespace {

Eigen::MatrixXd grid_from_json(const nlohmann::json& g, std::size_t K, const std::string& what) {
  if (!g.is_array() || g.size() != K) throw ValidationError(what + " must be a " + std::to_string(K) + "x" +
                                                            std::to_string(K) + " array");
  Eigen::MatrixXd m(K, K);
  for (std::size_t j = 0; j < K; ++j) {
    if (!g[j].is_array() || g[j].size() != K) throw ValidationError(what + " row " + std::to_string(j) + " has the wrong length");
    for (std::size_t i = 0; i < K; ++i) {
      if (!g[j][i].is_number()) throw ValidationError(what + " entries must be numbers");
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g[j][i].get<double>();
    }
  }
  return m;
}

nlohmann::json grid_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.cols(); ++i) row.push_back(m(j, i));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<int> generation_order(const Eigen::MatrixXd& b0) {
  const auto K = static_cast<int>(b0.rows());
  std::vector<int> indegree(static_cast<std::size_t>(K), 0);
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      if (i != j && b0(j, i) != 0.0) ++indegree[static_cast<std::size_t>(j)];
    }
  }
  // Kahn's algorithm, always taking the smallest ready index.
  std::vector<int> order;
  std::vector<bool> done(static_cast<std::size_t>(K), false);
  while (static_cast<int>(order.size()) < K) {
    int next = -1;
    for (int v = 0; v < K; ++v) {
      if (!done[static_cast<std::size_t>(v)] && indegree[static_cast<std::size_t>(v)] == 0) {
        next = v;
        break;
      }
    }
    if (next < 0) throw ValidationError("instantaneous coupling contains a directed cycle");
    done[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (int j = 0; j < K; ++j) {
      if (j != next && b0(j, next) != 0.0) --indegree[static_cast<std::size_t>(j)];
    }
  }
  return order;
}

double spectral_radius(const VarGroundTruth& truth) {
  const auto K = static_cast<Eigen::Index>(truth.K());
  const auto p = static_cast<Eigen::Index>(truth.p());
  if (p == 0) return 0.0;
  const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(K, K) - truth.instantaneous).inverse();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(K * p, K * p);
  for (Eigen::Index k = 0; k < p; ++k) {
    companion.block(0, k * K, K, K) = inv * truth.lags[static_cast<std::size_t>(k)];
  }
  if (p > 1) companion.block(K, 0, K * (p - 1), K * (p - 1)).setIdentity();
  return Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
}

void validate(const VarGroundTruth& truth) {
  const auto K = static_cast<Eigen::Index>(truth.K());
  if (K < 2) throw ValidationError("ground truth needs at least 2 series (a series table holds K >= 2)");
  if (truth.lags.empty()) throw ValidationError("ground truth needs at least one lag grid");
  for (const auto& b : truth.lags) {
    if (b.rows() != K || b.cols() != K) throw ValidationError("lag grids must be K x K");
    if (!b.allFinite()) throw ValidationError("lag grids must be finite");
  }
  if (truth.instantaneous.rows() != K || truth.instantaneous.cols() != K || !truth.instantaneous.allFinite()) {
    throw ValidationError("instantaneous grid must be a finite K x K matrix");
  }
  for (Eigen::Index j = 0; j < K; ++j) {
    if (truth.instantaneous(j, j) != 0.0) throw ValidationError("instantaneous grid must have a zero diagonal");
  }
  if (truth.sd.size() != K || !truth.sd.allFinite() || (truth.sd.array() <= 0.0).any()) {
    throw ValidationError("innovation standard deviations must be K positive numbers");
  }
  generation_order(truth.instantaneous);
  const double rho = spectral_radius(truth);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os.precision(6);
    os << "unstable system: companion spectral radius " << rho << " >= 1";
    throw ValidationError(os.str());
  }
}

EdgeSet true_edges(const VarGroundTruth& truth, egc::Kind kind) {
  EdgeSet out;
  const auto K = static_cast<int>(truth.K());
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      if (i == j) continue;
      bool present = false;
      if (kind == egc::Kind::lagged || kind == egc::Kind::total) {
        for (const auto& b : truth.lags) present = present || b(j, i) != 0.0;
      }
      if (kind == egc::Kind::instantaneous || kind == egc::Kind::total) {
        present = present || truth.instantaneous(j, i) != 0.0;
      }
      if (present) out.emplace(i, j);
    }
  }
  return out;
}

panel::SeriesTable simulate_var(const VarGroundTruth& truth, std::size_t T, std::size_t burn_in,
                                std::uint64_t seed) {
  validate(truth);
  if (T == 0) throw ContractViolation("series length must be positive");
  const auto K = static_cast<Eigen::Index>(truth.K());
  const std::size_t p = truth.lags.size();
  const std::vector<int> order = generation_order(truth.instantaneous);
  const std::size_t total = T + burn_in;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, static_cast<Eigen::Index>(total));
  Eigen::VectorXd e(K);
  for (std::size_t t = 0; t < total; ++t) {
    for (Eigen::Index k = 0; k < K; ++k) e(k) = truth.sd(k) * normal(rng);
    const auto tc = static_cast<Eigen::Index>(t);
    Eigen::VectorXd base = e;
    for (std::size_t lag = 1; lag <= p && lag <= t; ++lag) {
      base.noalias() += truth.lags[lag - 1] * x.col(tc - static_cast<Eigen::Index>(lag));
    }
    for (int j : order) {
      double v = base(j);
      for (Eigen::Index i = 0; i < K; ++i) {
        if (truth.instantaneous(j, i) != 0.0) v += truth.instantaneous(j, i) * x(i, tc);
      }
      x(j, tc) = v;
    }
  }

  std::vector<Date> dates;
  const Date start(2000, 1, 1);
  for (std::size_t t = 0; t < T; ++t) dates.push_back(start.plus_days(static_cast<int>(t)));
  return panel::SeriesTable(truth.names, std::move(dates),
                            x.rightCols(static_cast<Eigen::Index>(T)));
}

panel::PricePanel simulate_price_panel(const PanelSpec& spec, std::size_t T, const std::vector<double>& schedule,
                                       std::uint64_t seed) {
  if (spec.assets < 2) throw ValidationError("price panel needs at least 2 assets");
  if (T < 2) throw ValidationError("price panel needs at least two dates");
  if (schedule.size() != T - 1) {
    throw ValidationError("dispersion schedule has " + std::to_string(schedule.size()) + " entries, expected " +
                          std::to_string(T - 1) + " (one per return period)");
  }
  for (double s : schedule) {
    if (!std::isfinite(s) || s < 0.0) throw ValidationError("dispersion schedule entries must be finite and >= 0");
  }
  if (!(spec.market_sd >= 0.0) || !(spec.start_price > 0.0)) {
    throw ValidationError("market_sd must be >= 0 and start_price > 0");
  }
  const auto N = static_cast<Eigen::Index>(spec.assets);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd prices(N, static_cast<Eigen::Index>(T));
  Eigen::VectorXd log_price = Eigen::VectorXd::Constant(N, std::log(spec.start_price));
  prices.col(0) = log_price.array().exp();
  for (std::size_t t = 1; t < T; ++t) {
    const double market = spec.market_sd * normal(rng);
    const double spread = schedule[t - 1];
    for (Eigen::Index i = 0; i < N; ++i) {
      const double shock = normal(rng);
      log_price(i) += market + spread * shock;
    }
    prices.col(static_cast<Eigen::Index>(t)) = log_price.array().exp();
  }

  std::vector<std::string> ids;
  const int width = static_cast<int>(std::to_string(spec.assets).size());
  for (std::size_t i = 0; i < spec.assets; ++i) {
    std::string num = std::to_string(i + 1);
    ids.push_back("A" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num);
  }
  std::vector<Date> dates;
  const Date start(1990, 1, 1);
  for (std::size_t t = 0; t < T; ++t) dates.push_back(start.plus_days(static_cast<int>(t)));
  return panel::PricePanel(std::move(ids), std::move(dates), std::move(prices));
}

RecoveryScore score_edges(const EdgeSet& truth, const EdgeSet& inferred) {
  RecoveryScore s;
  for (const auto& e : inferred) {
    if (truth.contains(e)) {
      ++s.true_positives;
    } else {
      ++s.false_positives;
    }
  }
  s.false_negatives = truth.size() - s.true_positives;
  s.no_inferred_edges = inferred.empty();
  s.no_true_edges = truth.empty();
  if (!s.no_inferred_edges) s.precision = static_cast<double>(s.true_positives) / static_cast<double>(inferred.size());
  if (!s.no_true_edges) s.recall = static_cast<double>(s.true_positives) / static_cast<double>(truth.size());
  return s;
}

RecoveryReport edge_recovery_score(const VarGroundTruth& truth, const egc::CausalNetwork& inferred) {
  EdgeSet lagged, instantaneous;
  for (const auto& e : inferred.edges) {
    if (e.kind == egc::Kind::lagged) lagged.emplace(e.source, e.target);
    if (e.kind == egc::Kind::instantaneous) instantaneous.emplace(e.source, e.target);
  }
  return {score_edges(true_edges(truth, egc::Kind::lagged), lagged),
          score_edges(true_edges(truth, egc::Kind::instantaneous), instantaneous)};
}

VarGroundTruth truth_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("ground-truth spec must be a JSON object");
  if (!doc.contains("lags") || !doc["lags"].is_array() || doc["lags"].empty()) {
    throw ValidationError("ground-truth spec needs a non-empty 'lags' array of grids");
  }
  const auto& first = doc["lags"][0];
  if (!first.is_array() || first.empty()) throw ValidationError("lag grids must be non-empty arrays");
  const std::size_t K = first.size();

  VarGroundTruth truth;
  if (doc.contains("names")) {
    if (!doc["names"].is_array() || doc["names"].size() != K) throw ValidationError("'names' must list K names");
    for (const auto& n : doc["names"]) {
      if (!n.is_string()) throw ValidationError("'names' entries must be strings");
      truth.names.push_back(n.get<std::string>());
    }
  } else {
    for (std::size_t k = 0; k < K; ++k) truth.names.push_back("x" + std::to_string(k));
  }
  for (std::size_t k = 0; k < doc["lags"].size(); ++k) {
    truth.lags.push_back(grid_from_json(doc["lags"][k], K, "lag grid " + std::to_string(k + 1)));
  }
  truth.instantaneous = doc.contains("instantaneous") ? grid_from_json(doc["instantaneous"], K, "instantaneous grid")
                                                      : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K),
                                                                              static_cast<Eigen::Index>(K));
  truth.sd = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(K));
  if (doc.contains("sd")) {
    const auto& sd = doc["sd"];
    if (!sd.is_array() || sd.size() != K) throw ValidationError("'sd' must list K numbers");
    for (std::size_t k = 0; k < K; ++k) {
      if (!sd[k].is_number()) throw ValidationError("'sd' entries must be numbers");
      truth.sd(static_cast<Eigen::Index>(k)) = sd[k].get<double>();
    }
  }
  validate(truth);
  return truth;
}

nlohmann::json truth_to_json(const VarGroundTruth& truth) {
  using nlohmann::json;
  json lags = json::array();
  for (const auto& b : truth.lags) lags.push_back(grid_to_json(b));
  json sd = json::array();
  for (Eigen::Index k = 0; k < truth.sd.size(); ++k) sd.push_back(truth.sd(k));
  auto edge_list = [&](egc::Kind kind) {
    json out = json::array();
    for (const auto& [s, t] : true_edges(truth, kind)) {
      out.push_back({{"src", truth.names[static_cast<std::size_t>(s)]}, {"dst", truth.names[static_cast<std::size_t>(t)]}});
    }
    return out;
  };
  return json{{"names", truth.names},
              {"lags", lags},
              {"instantaneous", grid_to_json(truth.instantaneous)},
              {"sd", sd},
              {"edges", {{"lagged", edge_list(egc::Kind::lagged)},
                         {"instantaneous", edge_list(egc::Kind::instantaneous)}}}};
}

}  // namespace chaos::synth
