#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "chaos/error.hpp"
#include "chaos/netstats.hpp"
#include "graph_oracles.hpp"

using namespace chaos;
using namespace chaos::net;

namespace {

DirectedGraph cycle(int n) {
  std::vector<std::string> labels;
  std::vector<DirectedEdge> edges;
  for (int v = 0; v < n; ++v) {
    labels.push_back("v" + std::to_string(v));
    edges.push_back({v, (v + 1) % n, 1.0, kLaggedBit});
  }
  return DirectedGraph(labels, edges);
}

DirectedGraph star(int leaves) {
  std::vector<std::string> labels{"hub"};
  std::vector<DirectedEdge> edges;
  for (int v = 1; v <= leaves; ++v) {
    labels.push_back("leaf" + std::to_string(v));
    edges.push_back({0, v, 1.0, kLaggedBit});
  }
  return DirectedGraph(labels, edges);
}

// Undirected projection, straight from the definition.
std::vector<double> dense_bridging(const DirectedGraph& g) {
  const Eigen::MatrixXd a = oracle::adjacency(g);
  const Eigen::MatrixXd u = (a + a.transpose()).cwiseMin(1.0);
  const auto n = u.rows();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index v = 0; v < n; ++v) {
    const double dv = u.row(v).sum();
    if (dv == 0.0) continue;
    double s = 0.0;
    for (Eigen::Index w = 0; w < n; ++w)
      if (u(v, w) > 0.0) s += 1.0 / u.row(w).sum();
    out[static_cast<std::size_t>(v)] = (1.0 / dv) / s;
  }
  return out;
}

}  // namespace

TEST_CASE("directed 4-cycle") {
  const DirectedGraph g = cycle(4);
  const GlobalStats s = global_stats(g);
  CHECK(s.diameter == 3);
  CHECK(s.average_path_length == 2.0);
  CHECK(s.density == 1.0 / 3.0);
  CHECK(s.reachable_pairs == 12);
  CHECK(s.unreachable_pairs == 0);
  CHECK(s.edges == 4);
  for (double v : pagerank(g)) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  // Each node is interior to three of the twelve shortest paths.
  for (double v : betweenness(g)) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  for (double v : bridging_coefficient(g)) CHECK(v == 0.5);
}

TEST_CASE("star bridging coefficients") {
  for (int k : {2, 3, 5, 8}) {
    const auto bc = bridging_coefficient(star(k));
    CHECK(bc[0] == doctest::Approx(1.0 / (k * k)).epsilon(1e-15));
    for (int v = 1; v <= k; ++v) CHECK(bc[static_cast<std::size_t>(v)] == doctest::Approx(k).epsilon(1e-15));
  }
}

TEST_CASE("metrics match dense oracles on random digraphs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(3, 12);
  std::uniform_real_distribution<double> dens(0.1, 0.6);
  int hits_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const DirectedGraph g = oracle::random_digraph(rng, size(rng), dens(rng));
    CAPTURE(trial);
    const auto pr = pagerank(g);
    const Eigen::VectorXd pr_ref = oracle::dense_pagerank(g, 0.85);
    for (std::size_t v = 0; v < g.size(); ++v) CHECK(std::abs(pr[v] - pr_ref(static_cast<Eigen::Index>(v))) <= 1e-8);

    const auto bc = betweenness(g);
    const auto bc_ref = oracle::dense_betweenness(g, true);
    for (std::size_t v = 0; v < g.size(); ++v) CHECK(std::abs(bc[v] - bc_ref[v]) <= 1e-8);
    const auto raw = betweenness(g, false);
    const auto raw_ref = oracle::dense_betweenness(g, false);
    for (std::size_t v = 0; v < g.size(); ++v) CHECK(std::abs(raw[v] - raw_ref[v]) <= 1e-8);

    const auto br = bridging_coefficient(g);
    const auto br_ref = dense_bridging(g);
    for (std::size_t v = 0; v < g.size(); ++v) CHECK(std::abs(br[v] - br_ref[v]) <= 1e-12);

    if (const auto ref = oracle::dense_hits(g)) {
      ++hits_checked;
      const HitsScores h = hits(g);
      for (std::size_t v = 0; v < g.size(); ++v) {
        CHECK(std::abs(h.authority[v] - ref->authority(static_cast<Eigen::Index>(v))) <= 1e-8);
        CHECK(std::abs(h.hub[v] - ref->hub(static_cast<Eigen::Index>(v))) <= 1e-8);
      }
    }
  }
  CHECK(hits_checked >= 20);
}

TEST_CASE("HITS on special graphs") {
  const DirectedGraph empty({"a", "b", "c"}, {});
  const HitsScores h = hits(empty);
  CHECK(h.edgeless);
  for (double v : h.authority) CHECK(v == 0.0);
  for (double v : pagerank(empty)) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const GlobalStats s = global_stats(empty);
  CHECK(s.diameter == 0);
  CHECK(s.average_path_length == 0.0);
  CHECK(s.unreachable_pairs == 6);

  // All authority sits on the leaves of an out-star; all hub weight on the centre.
  const HitsScores st = hits(star(4));
  CHECK(st.hub[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.authority[0] == 0.0);
  for (int v = 1; v <= 4; ++v) CHECK(st.authority[static_cast<std::size_t>(v)] == doctest::Approx(0.5).epsilon(1e-12));

  IterationOptions tight;
  tight.max_iters = 1;
  tight.tol = 0.0;
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(hits(oracle::random_digraph(rng, 8, 0.4), tight), NonConvergence);
}

TEST_CASE("graph construction rejects bad edges") {
  CHECK_THROWS_AS(DirectedGraph({"a", "b"}, {{0, 1, 1.0, kLaggedBit}, {0, 1, 2.0, kLaggedBit}}), ValidationError);
  CHECK_THROWS_AS(DirectedGraph({"a", "b"}, {{0, 0, 1.0, kLaggedBit}}), ValidationError);
  CHECK_THROWS_AS(DirectedGraph({"a", "b"}, {{0, 2, 1.0, kLaggedBit}}), ValidationError);
  const DirectedGraph g({"a", "b", "c"}, {{2, 0, 1.0, kLaggedBit}, {0, 1, 1.0, kLaggedBit}}, {{1, 0.5}});
  CHECK(g.edges().front().source == 0);
  CHECK(g.successors(2) == std::vector<int>{0});
  CHECK(g.predecessors(1) == std::vector<int>{0});
  CHECK(g.self_loops().size() == 1);
}

TEST_CASE("causal networks collapse into simple digraphs") {
  egc::CausalNetwork net;
  net.nodes = {"a", "b", "c"};
  net.edges = {{0, 1, egc::Kind::lagged, 0.2, 0.001},
               {0, 1, egc::Kind::instantaneous, 0.5, 0.001},
               {1, 0, egc::Kind::instantaneous, 0.5, 0.001},
               {2, 1, egc::Kind::lagged, 0.1, 0.002}};
  net.self_loops = {{2, 0.3, 0.001}};
  const DirectedGraph both = from_causal_network(net, {egc::Kind::lagged, egc::Kind::instantaneous});
  REQUIRE(both.edges().size() == 3);
  CHECK(both.edges()[0].weight == 0.5);
  CHECK(both.edges()[0].kinds == (kLaggedBit | kInstantaneousBit));
  CHECK(both.self_loops().size() == 1);
  const DirectedGraph lagged = from_causal_network(net, {egc::Kind::lagged});
  CHECK(lagged.edges().size() == 2);

  std::ostringstream dot;
  write_dot(dot, both);
  const std::string d = dot.str();
  CHECK(d.find("\"a\" -> \"b\" [label=\"0.500\"];") != std::string::npos);
  CHECK(d.find("\"c\" -> \"b\" [label=\"0.100\", style=dashed];") != std::string::npos);
  CHECK(d.find("\"c\" -> \"c\" [label=\"0.300\", style=dashed];") != std::string::npos);

  std::ostringstream csv;
  write_node_stats_csv(csv, both, node_stats(both), {"note"});
  CHECK(csv.str().rfind("# note\nnode,authority,hub,pagerank,betweenness,bridging\n", 0) == 0);
}

TEST_CASE("weighted iteration uses edge weights") {
  const DirectedGraph g({"a", "b", "c"}, {{0, 1, 3.0, kLaggedBit}, {0, 2, 1.0, kLaggedBit}});
  IterationOptions w;
  w.weighted = true;
  const auto pr = pagerank(g, 0.85, w);
  const auto pu = pagerank(g);
  CHECK(pr[1] > pr[2]);
  CHECK(pu[1] == doctest::Approx(pu[2]).epsilon(1e-14));
  const HitsScores h = hits(g, w);
  CHECK(h.authority[1] == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-12));
}
