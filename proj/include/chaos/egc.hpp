#pragma once
// Extended Granger causality.
//
// For a source i and target j, the unrestricted equation for j contains
// lags 1..p of every series plus lag-0 of every other series. Restricted
// equations drop a block of it, and the measure is the log variance ratio
//
//   eGC = ln(sigma^2_restricted / sigma^2_unrestricted) >= 0   (nats)
//
// with both fits on the same rows. The dropped block depends on the kind:
//   lagged         lags 1..p of i
//   instantaneous  lag 0 of i
//   total          both
//   self           lags 1..p of j itself (i == j)

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "chaos/panel.hpp"
#include "chaos/varmodel.hpp"

namespace chaos::egc {

enum class Kind { lagged, instantaneous, total, self };

std::string_view kind_name(Kind kind) noexcept;
/// Throws ValidationError for unknown names.
Kind parse_kind(std::string_view name);

enum class BootstrapScheme {
  /// Surrogate = restricted fit + residuals drawn with replacement.
  residual,
  /// Surrogate = restricted fit + a random permutation of the residuals.
  permutation,
};

struct EgcResult {
  int source = 0;
  int target = 0;
  Kind kind = Kind::lagged;
  double measure = 0.0;
  /// NaN until a bootstrap has run.
  double p_value = std::numeric_limits<double>::quiet_NaN();
  int bootstrap_count = 0;
  double restricted_variance = 0.0;
  double unrestricted_variance = 0.0;
};

EgcResult egc_measure(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec,
                      Kind kind);

/// Residual bootstrap under the restricted (null) model with the design held
/// fixed. Replication b draws from its own generator seeded by
/// (seed, source, target, kind, b), so results do not depend on scheduling.
/// p = (1 + #{measure* >= measure}) / (B + 1).
EgcResult bootstrap_p(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec, Kind kind,
                      int replications, std::uint64_t seed, BootstrapScheme scheme = BootstrapScheme::residual);

struct Edge {
  int source = 0;
  int target = 0;
  Kind kind = Kind::lagged;
  double measure = 0.0;
  double p_value = 1.0;
};

struct SelfLoop {
  int node = 0;
  double measure = 0.0;
  double p_value = 1.0;
};

struct CausalNetwork {
  std::vector<std::string> nodes;
  double alpha = 0.01;
  std::vector<Edge> edges;
  std::vector<SelfLoop> self_loops;
  /// Every test that was run, retained or not.
  std::vector<EgcResult> tests;
};

struct NetworkOptions {
  var::VarSpec spec;
  double alpha = 0.01;
  int replications = 500;
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::residual;
};

/// Lagged and (when enabled) instantaneous tests for every ordered pair, a
/// self-dependence test for every node; keeps those with p <= alpha.
CausalNetwork egc_network(const panel::SeriesTable& table, const NetworkOptions& opts);

struct Heatmaps {
  /// measure(i, j) = eGC from j to i; the diagonal holds self-dependence.
  Eigen::MatrixXd measure;
  /// probability(i, j) = 1 - p for the same cell.
  Eigen::MatrixXd probability;
};

/// Built from the retained edges of one kind plus retained self loops.
Heatmaps egc_heatmaps(const CausalNetwork& network, Kind kind = Kind::lagged);
/// Built from raw results (nothing filtered); entries without a result stay 0.
Heatmaps egc_heatmaps(const std::vector<EgcResult>& results, std::size_t nodes, Kind kind = Kind::lagged);

/// {nodes, alpha, edges:[{src,dst,kind,measure,p}], self:[{node,measure,p}], tests:[...]}
nlohmann::json network_to_json(const CausalNetwork& network);
/// Throws ValidationError on malformed documents.
CausalNetwork network_from_json(const nlohmann::json& doc);

/// Square matrix with node labels on the first row and column.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& labels);

}  // namespace chaos::egc
