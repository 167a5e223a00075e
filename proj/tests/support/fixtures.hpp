#pragma once
// Small builders shared by the unit and acceptance tests.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaos/panel.hpp"
#include "chaos/synth.hpp"

namespace fixture {

inline std::vector<chaos::Date> daily(std::size_t n, chaos::Date start = chaos::Date(2001, 1, 1)) {
  std::vector<chaos::Date> d;
  for (std::size_t t = 0; t < n; ++t) d.push_back(start.plus_days(static_cast<int>(t)));
  return d;
}

inline std::vector<std::string> labels(std::size_t n, const std::string& prefix = "s") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Log-normal random walk prices, N assets by T dates.
inline chaos::panel::PricePanel random_prices(std::mt19937_64& rng, std::size_t N, std::size_t T, double sd = 0.05) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd p(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(T));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double lp = std::log(50.0 + 10.0 * static_cast<double>(i));
    for (Eigen::Index t = 0; t < p.cols(); ++t) {
      if (t > 0) lp += g(rng);
      p(i, t) = std::exp(lp);
    }
  }
  return chaos::panel::PricePanel(labels(N, "a"), daily(T), p);
}

inline chaos::panel::SeriesTable table(const Eigen::MatrixXd& values) {
  return chaos::panel::SeriesTable(labels(static_cast<std::size_t>(values.rows()), "x"),
                                   daily(static_cast<std::size_t>(values.cols())), values);
}

/// y(t) = b x(t-1) + e(t), x white noise, both unit variance innovations.
inline chaos::synth::VarGroundTruth bivariate_lagged(double b) {
  chaos::synth::VarGroundTruth t;
  t.names = {"x", "y"};
  Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(2, 2);
  b1(1, 0) = b;
  t.lags = {b1};
  t.instantaneous = Eigen::MatrixXd::Zero(2, 2);
  t.sd = Eigen::VectorXd::Ones(2);
  return t;
}

/// Independent AR(1) series: no cross coupling of any kind.
inline chaos::synth::VarGroundTruth diagonal_system(int K, double ar = 0.5) {
  chaos::synth::VarGroundTruth t;
  for (int k = 0; k < K; ++k) t.names.push_back("d" + std::to_string(k));
  t.lags = {ar * Eigen::MatrixXd::Identity(K, K)};
  t.instantaneous = Eigen::MatrixXd::Zero(K, K);
  t.sd = Eigen::VectorXd::Ones(K);
  return t;
}

/// Five series with sparse lagged coupling and one instantaneous link.
/// x4 has no lagged parents, so conditioning on it opens no spurious paths.
inline chaos::synth::VarGroundTruth five_variable_system() {
  chaos::synth::VarGroundTruth t;
  t.names = {"x0", "x1", "x2", "x3", "x4"};
  Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(5, 5);
  b1(0, 0) = 0.5;
  b1(1, 0) = 0.4;
  b1(1, 1) = 0.3;
  b1(2, 1) = 0.4;
  b1(2, 3) = -0.3;
  b1(3, 0) = 0.4;
  t.lags = {b1};
  t.instantaneous = Eigen::MatrixXd::Zero(5, 5);
  t.instantaneous(4, 2) = 0.6;
  t.sd = Eigen::VectorXd::Ones(5);
  return t;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("chaosnet-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixture
