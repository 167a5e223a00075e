#include "chaos/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>

#include "chaos/error.hpp"
#include "chaos/panel.hpp"
#include "chaos/parallel.hpp"

namespace chaos::net {
namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void scale(std::vector<double>& v, double by) {
  for (double& x : v) x *= by;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// BFS distances from s; -1 marks unreachable.
std::vector<int> bfs(const DirectedGraph& g, int s) {
  std::vector<int> dist(g.size(), -1);
  std::deque<int> queue{s};
  dist[static_cast<std::size_t>(s)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : g.successors(v)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace

DirectedGraph::DirectedGraph(std::vector<std::string> labels, std::vector<DirectedEdge> edges,
                             std::vector<std::pair<int, double>> self_loops)
    : labels_(std::move(labels)), edges_(std::move(edges)), self_loops_(std::move(self_loops)) {
  const int n = static_cast<int>(labels_.size());
  auto in_range = [&](int v) { return v >= 0 && v < n; };
  for (const auto& e : edges_) {
    if (!in_range(e.source) || !in_range(e.target)) throw ValidationError("edge endpoint out of range");
    if (e.source == e.target) throw ValidationError("self loop in edge list; store it with self_loops");
  }
  for (const auto& [v, w] : self_loops_) {
    if (!in_range(v)) throw ValidationError("self loop node out of range");
  }
  std::sort(edges_.begin(), edges_.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].source == edges_[k - 1].source && edges_[k].target == edges_[k - 1].target) {
      throw ValidationError("duplicate edge " + labels_[static_cast<std::size_t>(edges_[k].source)] + " -> " +
                            labels_[static_cast<std::size_t>(edges_[k].target)]);
    }
  }
  out_.resize(labels_.size());
  in_.resize(labels_.size());
  for (const auto& e : edges_) {
    out_[static_cast<std::size_t>(e.source)].push_back(e.target);
    in_[static_cast<std::size_t>(e.target)].push_back(e.source);
  }
}

DirectedGraph from_causal_network(const egc::CausalNetwork& network, const std::set<egc::Kind>& kinds) {
  std::map<std::pair<int, int>, DirectedEdge> merged;
  for (const auto& e : network.edges) {
    if (!kinds.contains(e.kind)) continue;
    auto [it, fresh] = merged.try_emplace({e.source, e.target}, DirectedEdge{e.source, e.target, e.measure, 0});
    if (!fresh) it->second.weight = std::max(it->second.weight, e.measure);
    it->second.kinds |= e.kind == egc::Kind::lagged ? kLaggedBit : kInstantaneousBit;
  }
  std::vector<DirectedEdge> edges;
  for (auto& [key, e] : merged) edges.push_back(e);
  std::vector<std::pair<int, double>> loops;
  for (const auto& s : network.self_loops) loops.emplace_back(s.node, s.measure);
  return DirectedGraph(network.nodes, std::move(edges), std::move(loops));
}

HitsScores hits(const DirectedGraph& g, const IterationOptions& opts) {
  const std::size_t n = g.size();
  HitsScores out;
  out.authority.assign(n, 0.0);
  out.hub.assign(n, 0.0);
  if (g.edges().empty()) {
    out.edgeless = true;
    return out;
  }
  std::vector<double> hub(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> auth(n, 0.0);
  for (int it = 1; it <= opts.max_iters; ++it) {
    std::vector<double> a(n, 0.0);
    for (const auto& e : g.edges()) {
      a[static_cast<std::size_t>(e.target)] += (opts.weighted ? e.weight : 1.0) * hub[static_cast<std::size_t>(e.source)];
    }
    scale(a, 1.0 / norm2(a));
    std::vector<double> h(n, 0.0);
    for (const auto& e : g.edges()) {
      h[static_cast<std::size_t>(e.source)] += (opts.weighted ? e.weight : 1.0) * a[static_cast<std::size_t>(e.target)];
    }
    scale(h, 1.0 / norm2(h));
    const double change = std::max(max_abs_diff(a, auth), max_abs_diff(h, hub));
    auth = std::move(a);
    hub = std::move(h);
    out.iterations = it;
    if (it > 1 && change <= opts.tol) {
      out.authority = std::move(auth);
      out.hub = std::move(hub);
      return out;
    }
  }
  throw NonConvergence("HITS did not converge", 0.0, auth, opts.max_iters);
}

std::vector<double> pagerank(const DirectedGraph& g, double damping, const IterationOptions& opts) {
  if (!(damping >= 0.0 && damping < 1.0)) throw ContractViolation("damping must lie in [0, 1)");
  const std::size_t n = g.size();
  if (n == 0) return {};
  const double nd = static_cast<double>(n);
  std::vector<double> out_weight(n, 0.0);
  for (const auto& e : g.edges()) out_weight[static_cast<std::size_t>(e.source)] += opts.weighted ? e.weight : 1.0;

  std::vector<double> rank(n, 1.0 / nd);
  for (int it = 1; it <= opts.max_iters; ++it) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (out_weight[v] == 0.0) dangling += rank[v];
    }
    std::vector<double> next(n, (1.0 - damping) / nd + damping * dangling / nd);
    for (const auto& e : g.edges()) {
      const auto s = static_cast<std::size_t>(e.source);
      next[static_cast<std::size_t>(e.target)] += damping * rank[s] * (opts.weighted ? e.weight : 1.0) / out_weight[s];
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - rank[v]);
    rank = std::move(next);
    if (change <= opts.tol) {
      double total = 0.0;
      for (double r : rank) total += r;
      scale(rank, 1.0 / total);
      return rank;
    }
  }
  throw NonConvergence("PageRank did not converge", 0.0, rank, opts.max_iters);
}

std::vector<double> betweenness(const DirectedGraph& g, bool normalized) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> per_source(n, std::vector<double>(n, 0.0));
  parallel_for(n, [&](std::size_t s) {
    std::vector<double> sigma(n, 0.0), delta(n, 0.0);
    std::vector<int> dist(n, -1);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    std::deque<int> queue{static_cast<int>(s)};
    sigma[s] = 1.0;
    dist[s] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      const auto vi = static_cast<std::size_t>(v);
      for (int w : g.successors(v)) {
        const auto wi = static_cast<std::size_t>(w);
        if (dist[wi] < 0) {
          dist[wi] = dist[vi] + 1;
          queue.push_back(w);
        }
        if (dist[wi] == dist[vi] + 1) {
          sigma[wi] += sigma[vi];
          preds[wi].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto wi = static_cast<std::size_t>(*it);
      for (int v : preds[wi]) {
        const auto vi = static_cast<std::size_t>(v);
        delta[vi] += sigma[vi] / sigma[wi] * (1.0 + delta[wi]);
      }
      if (wi != s) per_source[s][wi] = delta[wi];
    }
  });

  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t v = 0; v < n; ++v) out[v] += per_source[s][v];
  }
  if (normalized && n > 2) scale(out, 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)));
  return out;
}

std::vector<double> bridging_coefficient(const DirectedGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::set<int>> nbrs(n);
  for (const auto& e : g.edges()) {
    nbrs[static_cast<std::size_t>(e.source)].insert(e.target);
    nbrs[static_cast<std::size_t>(e.target)].insert(e.source);
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    if (nbrs[v].empty()) continue;
    double inv_sum = 0.0;
    for (int w : nbrs[v]) inv_sum += 1.0 / static_cast<double>(nbrs[static_cast<std::size_t>(w)].size());
    out[v] = (1.0 / static_cast<double>(nbrs[v].size())) / inv_sum;
  }
  return out;
}

GlobalStats global_stats(const DirectedGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<int>> dist(n);
  parallel_for(n, [&](std::size_t s) { dist[s] = bfs(g, static_cast<int>(s)); });

  GlobalStats st;
  st.edges = g.edges().size();
  std::size_t total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      const int d = dist[s][t];
      if (d < 0) {
        ++st.unreachable_pairs;
      } else {
        ++st.reachable_pairs;
        total += static_cast<std::size_t>(d);
        st.diameter = std::max(st.diameter, d);
      }
    }
  }
  if (st.reachable_pairs > 0) {
    st.average_path_length = static_cast<double>(total) / static_cast<double>(st.reachable_pairs);
  }
  if (n > 1) st.density = static_cast<double>(st.edges) / (static_cast<double>(n) * static_cast<double>(n - 1));
  return st;
}

NodeStats node_stats(const DirectedGraph& g, const IterationOptions& opts) {
  NodeStats s;
  const HitsScores h = hits(g, opts);
  s.authority = h.authority;
  s.hub = h.hub;
  s.pagerank = pagerank(g, 0.85, opts);
  s.betweenness = betweenness(g, true);
  s.bridging = bridging_coefficient(g);
  return s;
}

void write_node_stats_csv(std::ostream& out, const DirectedGraph& g, const NodeStats& stats,
                          const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "node,authority,hub,pagerank,betweenness,bridging\n";
  for (std::size_t v = 0; v < g.size(); ++v) {
    out << g.labels()[v] << ',' << panel::format_double(stats.authority[v]) << ','
        << panel::format_double(stats.hub[v]) << ',' << panel::format_double(stats.pagerank[v]) << ','
        << panel::format_double(stats.betweenness[v]) << ',' << panel::format_double(stats.bridging[v]) << '\n';
  }
}

void write_dot(std::ostream& out, const DirectedGraph& g) {
  auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + "\"";
  };
  char buf[32];
  out << "digraph egc {\n";
  for (const auto& l : g.labels()) out << "  " << quoted(l) << ";\n";
  for (const auto& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%.3f", e.weight);
    const bool dashed = e.kinds == kLaggedBit;
    out << "  " << quoted(g.labels()[static_cast<std::size_t>(e.source)]) << " -> "
        << quoted(g.labels()[static_cast<std::size_t>(e.target)]) << " [label=\"" << buf << "\""
        << (dashed ? ", style=dashed" : "") << "];\n";
  }
  for (const auto& [v, w] : g.self_loops()) {
    std::snprintf(buf, sizeof buf, "%.3f", w);
    const auto& l = g.labels()[static_cast<std::size_t>(v)];
    out << "  " << quoted(l) << " -> " << quoted(l) << " [label=\"" << buf << "\", style=dashed];\n";
  }
  out << "}\n";
}

nlohmann::json global_stats_to_json(const GlobalStats& stats) {
  return nlohmann::json{{"diameter", stats.diameter},
                        {"average_path_length", stats.average_path_length},
                        {"density", stats.density},
                        {"edges", stats.edges},
                        {"reachable_pairs", stats.reachable_pairs},
                        {"unreachable_pairs", stats.unreachable_pairs}};
}

}  // namespace chaos::net
