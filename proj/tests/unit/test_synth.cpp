#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"

#include "chaos/error.hpp"
#include "chaos/fcix.hpp"
#include "chaos/synth.hpp"
#include "fixtures.hpp"

using namespace chaos;
using namespace chaos::synth;

namespace {

// Stationary covariance of x = A x(-1) + u, Cov(u) = Q, from
// vec(S) = (I - A (x) A)^{-1} vec(Q).
Eigen::MatrixXd lyapunov(const VarGroundTruth& t) {
  const auto K = static_cast<Eigen::Index>(t.K());
  const Eigen::MatrixXd m = (Eigen::MatrixXd::Identity(K, K) - t.instantaneous).inverse();
  const Eigen::MatrixXd a = m * t.lags[0];
  const Eigen::MatrixXd q = m * t.sd.array().square().matrix().asDiagonal() * m.transpose();
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(K * K, K * K) - Eigen::kroneckerProduct(a, a).eval();
  const Eigen::VectorXd vec_q = Eigen::Map<const Eigen::VectorXd>(q.data(), K * K);
  const Eigen::VectorXd s = lhs.fullPivLu().solve(vec_q);
  return Eigen::Map<const Eigen::MatrixXd>(s.data(), K, K);
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd c = v.colwise() - v.rowwise().mean();
  return c * c.transpose() / static_cast<double>(v.cols());
}

}  // namespace

TEST_CASE("simulated covariance matches the Lyapunov solution") {
  const VarGroundTruth t = fixture::five_variable_system();
  const Eigen::MatrixXd want = lyapunov(t);
  const Eigen::MatrixXd got = sample_cov(simulate_var(t, 100000, 500, 1).values());
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(std::abs(got(i, i) - want(i, i)) <= 0.05 * want(i, i));
    for (Eigen::Index j = 0; j < i; ++j) {
      CHECK(std::abs(got(i, j) - want(i, j)) <= 0.05 * std::sqrt(want(i, i) * want(j, j)));
    }
  }
}

TEST_CASE("AR(1) autocorrelation and white noise") {
  VarGroundTruth t = fixture::diagonal_system(2, 0.0);
  t.lags[0](0, 0) = 0.7;
  const Eigen::MatrixXd v = simulate_var(t, 10000, 500, 2).values();
  const Eigen::VectorXd x = v.row(0).transpose().array() - v.row(0).mean();
  const double rho = x.head(9999).dot(x.tail(9999)) / x.squaredNorm();
  CHECK(std::abs(rho - 0.7) <= 0.03);
  const Eigen::VectorXd w = v.row(1).transpose().array() - v.row(1).mean();
  const double r1 = w.head(9999).dot(w.tail(9999)) / w.squaredNorm();
  CHECK(std::abs(r1) <= 5.0 / std::sqrt(10000.0));
  CHECK(std::abs(w.squaredNorm() / 10000.0 - 1.0) <= 0.05);
}

TEST_CASE("simulation is a function of the seed") {
  const VarGroundTruth t = fixture::five_variable_system();
  const auto a = simulate_var(t, 300, 50, 9);
  const auto b = simulate_var(t, 300, 50, 9);
  const auto c = simulate_var(t, 300, 50, 10);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.names() == t.names);
  CHECK(a.timestamps().front() == Date(2000, 1, 1));
  CHECK(a.length() == 300);
}

TEST_CASE("validation rejects unstable, cyclic and malformed systems") {
  VarGroundTruth t = fixture::bivariate_lagged(0.5);
  t.lags[0](0, 0) = 1.1;
  try {
    validate(t);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("spectral radius") != std::string::npos);
  }
  CHECK(spectral_radius(t) == doctest::Approx(1.1).epsilon(1e-12));

  VarGroundTruth cyc = fixture::diagonal_system(3, 0.2);
  cyc.instantaneous(1, 0) = 0.3;
  cyc.instantaneous(2, 1) = 0.3;
  CHECK(generation_order(cyc.instantaneous) == std::vector<int>{0, 1, 2});
  cyc.instantaneous(0, 2) = 0.3;
  CHECK_THROWS_AS(validate(cyc), ValidationError);

  VarGroundTruth diag = fixture::diagonal_system(2, 0.2);
  diag.instantaneous(0, 0) = 0.1;
  CHECK_THROWS_AS(validate(diag), ValidationError);
  VarGroundTruth sd = fixture::diagonal_system(2, 0.2);
  sd.sd(1) = 0.0;
  CHECK_THROWS_AS(validate(sd), ValidationError);
  VarGroundTruth one = fixture::diagonal_system(2, 0.2);
  one.names.pop_back();
  CHECK_THROWS_AS(validate(one), ValidationError);
}

TEST_CASE("instantaneous effects are generated in topological order") {
  // x1 = 0.8 x0 (same period) + e1, no lags.
  VarGroundTruth t = fixture::diagonal_system(2, 0.0);
  t.instantaneous(0, 1) = 0.8;  // x1 -> x0, so x1 is drawn first
  CHECK(generation_order(t.instantaneous) == std::vector<int>{1, 0});
  const Eigen::MatrixXd c = sample_cov(simulate_var(t, 50000, 10, 3).values());
  CHECK(std::abs(c(0, 1) - 0.8) <= 0.05);
  CHECK(std::abs(c(0, 0) - 1.64) <= 0.08);
}

TEST_CASE("price panels follow the dispersion schedule") {
  PanelSpec spec;
  spec.assets = 6;
  const std::vector<double> flat(99, 0.0);
  const panel::PricePanel p = simulate_price_panel(spec, 100, flat, 4);
  CHECK(p.asset_ids().front() == "A1");  // padded to the width of the asset count
  CHECK(p.timestamps().front() == Date(1990, 1, 1));
  // Zero dispersion: every asset moves with the market, so every slice is all ones.
  const fcix::FcixRun run = fcix::fcix_pipeline(p);
  for (double v : run.series.values) CHECK(std::abs(v) <= 1e-10);

  std::vector<double> sched(99, 0.001);
  for (std::size_t t = 40; t < 50; ++t) sched[t] = 0.05;
  const fcix::FcixRun spiky = fcix::fcix_pipeline(simulate_price_panel(spec, 100, sched, 4));
  double calm = 0.0, storm = 0.0;
  for (std::size_t t = 0; t < 99; ++t) {
    const double v = spiky.series.values[t];
    if (t >= 40 && t < 50) storm = std::max(storm, v);
    else calm = std::max(calm, v);
  }
  CHECK(storm > 10.0 * calm);

  try {
    simulate_price_panel(spec, 100, std::vector<double>(100, 0.01), 4);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
  spec.assets = 1;
  CHECK_THROWS_AS(simulate_price_panel(spec, 100, flat, 4), ValidationError);
}

TEST_CASE("edge scoring conventions") {
  const EdgeSet truth{{0, 1}, {1, 2}};
  const RecoveryScore s = score_edges(truth, {{0, 1}, {2, 1}});
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 0.5);
  CHECK(s.true_positives == 1);
  CHECK(s.false_positives == 1);
  CHECK(s.false_negatives == 1);
  const RecoveryScore none = score_edges(truth, {});
  CHECK(none.no_inferred_edges);
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  const RecoveryScore empty = score_edges({}, {});
  CHECK(empty.no_true_edges);
  CHECK(empty.recall == 1.0);
  CHECK(empty.precision == 1.0);

  const VarGroundTruth t = fixture::five_variable_system();
  CHECK(true_edges(t, egc::Kind::lagged) == EdgeSet{{0, 1}, {1, 2}, {3, 2}, {0, 3}});
  CHECK(true_edges(t, egc::Kind::instantaneous) == EdgeSet{{2, 4}});
  CHECK(true_edges(t, egc::Kind::total).size() == 5);

  egc::CausalNetwork net;
  net.edges = {{0, 1, egc::Kind::lagged, 0.1, 0.001}, {2, 4, egc::Kind::instantaneous, 0.1, 0.001}};
  const RecoveryReport r = edge_recovery_score(t, net);
  CHECK(r.lagged.precision == 1.0);
  CHECK(r.lagged.recall == 0.25);
  CHECK(r.instantaneous.recall == 1.0);
}

TEST_CASE("ground truth JSON") {
  const VarGroundTruth t = fixture::five_variable_system();
  const nlohmann::json j = truth_to_json(t);
  CHECK(j["edges"]["instantaneous"][0]["src"] == "x2");
  CHECK(j["edges"]["instantaneous"][0]["dst"] == "x4");
  const VarGroundTruth back = truth_from_json(j);
  CHECK(back.names == t.names);
  CHECK(back.lags[0] == t.lags[0]);
  CHECK(back.instantaneous == t.instantaneous);
  CHECK(back.sd == t.sd);

  const VarGroundTruth minimal = truth_from_json(nlohmann::json::parse(R"({"lags":[[[0.5,0],[0.3,0.2]]]})"));
  CHECK(minimal.names == std::vector<std::string>{"x0", "x1"});
  CHECK(minimal.instantaneous.isZero());
  CHECK(minimal.sd == Eigen::VectorXd::Ones(2));
  CHECK_THROWS_AS(truth_from_json(nlohmann::json::parse(R"({"lags":[[[1.5,0],[0,0.2]]]})")), ValidationError);
  CHECK_THROWS_AS(truth_from_json(nlohmann::json::parse(R"({"lags":[[[0.5,0],[0.2]]]})")), ValidationError);
  CHECK_THROWS_AS(truth_from_json(nlohmann::json::parse(R"({"sd":[1,1]})")), ValidationError);
}
