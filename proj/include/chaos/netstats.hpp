#pragma once
// Topology diagnostics for a causal network. Metrics are unweighted unless
// stated otherwise; self loops are kept aside and never enter a metric.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "chaos/egc.hpp"

namespace chaos::net {

/// Bit flags recording which causality kinds produced an edge.
enum EdgeKindBits : std::uint8_t { kLaggedBit = 1, kInstantaneousBit = 2 };

struct DirectedEdge {
  int source = 0;
  int target = 0;
  double weight = 1.0;
  std::uint8_t kinds = 0;
};

class DirectedGraph {
 public:
  /// Sorts edges, rejects duplicates, out-of-range endpoints and self loops
  /// (those go in `self_loops`).
  DirectedGraph(std::vector<std::string> labels, std::vector<DirectedEdge> edges,
                std::vector<std::pair<int, double>> self_loops = {});

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<DirectedEdge>& edges() const noexcept { return edges_; }
  const std::vector<std::pair<int, double>>& self_loops() const noexcept { return self_loops_; }
  const std::vector<int>& successors(int v) const { return out_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& predecessors(int v) const { return in_.at(static_cast<std::size_t>(v)); }

 private:
  std::vector<std::string> labels_;
  std::vector<DirectedEdge> edges_;
  std::vector<std::pair<int, double>> self_loops_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// Collapses retained edges of the selected kinds into a simple digraph.
/// Parallel edges merge into one carrying the largest measure.
DirectedGraph from_causal_network(const egc::CausalNetwork& network, const std::set<egc::Kind>& kinds);

struct IterationOptions {
  double tol = 1e-12;
  int max_iters = 10000;
  /// Use edge weights instead of 0/1 adjacency.
  bool weighted = false;
};

struct HitsScores {
  std::vector<double> authority;
  std::vector<double> hub;
  int iterations = 0;
  /// True when the graph has no edges; both vectors are then all zero.
  bool edgeless = false;
};

/// Kleinberg hub/authority scores, each vector at unit Euclidean norm.
HitsScores hits(const DirectedGraph& g, const IterationOptions& opts = {});

/// Damped random-surfer fixed point; dangling mass is spread uniformly.
std::vector<double> pagerank(const DirectedGraph& g, double damping = 0.85, const IterationOptions& opts = {});

/// Shortest-path betweenness (Brandes), splitting credit evenly over
/// equal-length paths. Normalized divides by (n-1)(n-2).
std::vector<double> betweenness(const DirectedGraph& g, bool normalized = true);

/// On the undirected projection: BC(v) = (1/d(v)) / sum_{w in N(v)} 1/d(w);
/// isolated nodes score 0.
std::vector<double> bridging_coefficient(const DirectedGraph& g);

struct GlobalStats {
  int diameter = 0;
  /// Mean distance over ordered reachable pairs (s != t); 0 if none.
  double average_path_length = 0.0;
  double density = 0.0;
  std::size_t reachable_pairs = 0;
  std::size_t unreachable_pairs = 0;
  std::size_t edges = 0;
};

GlobalStats global_stats(const DirectedGraph& g);

struct NodeStats {
  std::vector<double> authority, hub, pagerank, betweenness, bridging;
};

NodeStats node_stats(const DirectedGraph& g, const IterationOptions& opts = {});

/// `node,authority,hub,pagerank,betweenness,bridging`
void write_node_stats_csv(std::ostream& out, const DirectedGraph& g, const NodeStats& stats,
                          const std::vector<std::string>& comments = {});
/// Lagged-only edges dashed, anything instantaneous solid; labels carry weights.
void write_dot(std::ostream& out, const DirectedGraph& g);
nlohmann::json global_stats_to_json(const GlobalStats& stats);

}  // namespace chaos::net
