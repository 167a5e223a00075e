#pragma once
// Ground-truth generators: structural VARs with known coupling and
// positive price panels with a prescribed cross-sectional dispersion.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "chaos/egc.hpp"
#include "chaos/panel.hpp"

namespace chaos::synth {

/// x_t = B_0 x_t + sum_k B_k x_{t-k} + diag(sd) e_t,  e_t ~ N(0, I).
/// Entry (j, i) of any grid is the effect of series i on series j.
struct VarGroundTruth {
  std::vector<std::string> names;
  /// B_1..B_p, each K x K.
  std::vector<Eigen::MatrixXd> lags;
  /// B_0, K x K with zero diagonal and no directed cycle.
  Eigen::MatrixXd instantaneous;
  Eigen::VectorXd sd;

  std::size_t K() const noexcept { return names.size(); }
  int p() const noexcept { return static_cast<int>(lags.size()); }
};

/// Order in which B_0 lets the series be generated (parents first). Throws
/// ValidationError when the instantaneous graph has a cycle.
std::vector<int> generation_order(const Eigen::MatrixXd& instantaneous);

/// Spectral radius of the reduced-form companion matrix built from
/// (I - B_0)^{-1} B_k.
double spectral_radius(const VarGroundTruth& truth);

/// Shape, diagonal, acyclicity, sd > 0 and stability checks; throws
/// ValidationError (reporting the spectral radius when unstable).
void validate(const VarGroundTruth& truth);

using EdgeSet = std::set<std::pair<int, int>>;  ///< (source, target)

/// Lagged: any nonzero B_k(j, i), k >= 1, i != j. Instantaneous: nonzero B_0(j, i).
EdgeSet true_edges(const VarGroundTruth& truth, egc::Kind kind);

/// Dates run daily from 2000-01-01. Zero initial state; the first burn_in
/// draws are discarded.
panel::SeriesTable simulate_var(const VarGroundTruth& truth, std::size_t T, std::size_t burn_in,
                                std::uint64_t seed);

struct PanelSpec {
  std::size_t assets = 10;
  /// Standard deviation of the log-return shared by every asset.
  double market_sd = 0.01;
  double start_price = 100.0;
};

/// Log-returns m_t + schedule[t] * e_{i,t}; schedule has one entry per
/// return period (T - 1). Dates run daily from 1990-01-01.
panel::PricePanel simulate_price_panel(const PanelSpec& spec, std::size_t T, const std::vector<double>& schedule,
                                       std::uint64_t seed);

struct RecoveryScore {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  /// Nothing was inferred; precision is reported as 1.
  bool no_inferred_edges = false;
  /// Nothing is true; recall is reported as 1.
  bool no_true_edges = false;
};

RecoveryScore score_edges(const EdgeSet& truth, const EdgeSet& inferred);

struct RecoveryReport {
  RecoveryScore lagged;
  RecoveryScore instantaneous;
};

/// Compares retained network edges with the true edge sets, kind by kind.
RecoveryReport edge_recovery_score(const VarGroundTruth& truth, const egc::CausalNetwork& inferred);

/// {names, lags:[K x K grids], instantaneous, sd}. `names` may be omitted
/// (defaults x0..x{K-1}); a missing instantaneous grid means zero.
VarGroundTruth truth_from_json(const nlohmann::json& doc);
/// Adds an "edges" object listing the true lagged and instantaneous edges.
nlohmann::json truth_to_json(const VarGroundTruth& truth);

}  // namespace chaos::synth
