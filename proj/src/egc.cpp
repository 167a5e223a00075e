#include "chaos/egc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "chaos/error.hpp"
#include "chaos/parallel.hpp"

namespace chaos::egc {
namespace {

// The unrestricted design for (source, target, kind) and the column subset
// that forms the restricted one.
struct TestDesign {
  var::Design unrestricted;
  std::vector<int> restricted_columns;
};

TestDesign make_test_design(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec,
                            Kind kind) {
  const int K = static_cast<int>(table.series());
  if (source < 0 || source >= K || target < 0 || target >= K) {
    throw ContractViolation("series index out of range");
  }
  if (kind == Kind::self ? source != target : source == target) {
    throw ContractViolation(kind == Kind::self ? "self-dependence needs source == target"
                                               : "source and target must differ");
  }
  if (kind == Kind::instantaneous && !spec.include_instantaneous) {
    throw ContractViolation("instantaneous causality needs the lag-0 block enabled");
  }

  TestDesign td{var::build_design(table, target, spec), {}};
  for (std::size_t c = 0; c < td.unrestricted.regressors.size(); ++c) {
    const auto& r = td.unrestricted.regressors[c];
    bool drop = false;
    if (!r.is_intercept() && r.variable == source) {
      switch (kind) {
        case Kind::lagged:
        case Kind::self:
          drop = r.lag > 0;
          break;
        case Kind::instantaneous:
          drop = r.lag == 0;
          break;
        case Kind::total:
          drop = true;
          break;
      }
    }
    if (!drop) td.restricted_columns.push_back(static_cast<int>(c));
  }
  if (td.restricted_columns.empty()) throw ContractViolation("restricted model would have no regressors");
  return td;
}

double log_ratio(double ssr_restricted, double ssr_unrestricted) {
  if (!(ssr_unrestricted > 0.0)) throw ValidationError("unrestricted model fits the target exactly");
  // Nested least squares: the true ratio is >= 1; clamp rounding below it.
  return std::max(0.0, std::log(ssr_restricted / ssr_unrestricted));
}

std::mt19937_64 replication_engine(std::uint64_t seed, int source, int target, Kind kind, int replication) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(source), static_cast<std::uint32_t>(target),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(replication)};
  return std::mt19937_64(seq);
}

EgcResult run_bootstrap(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec, Kind kind,
                        int replications, std::uint64_t seed, BootstrapScheme scheme, bool parallel) {
  if (replications < 1) throw ContractViolation("bootstrap needs at least 1 replication");
  const TestDesign td = make_test_design(table, source, target, spec, kind);
  const var::Design restricted = var::select_columns(td.unrestricted, td.restricted_columns);
  const var::LeastSquares ls_u(td.unrestricted.X);
  const var::LeastSquares ls_r(restricted.X);

  const Eigen::VectorXd& y = td.unrestricted.y;
  const double n = static_cast<double>(y.size());
  const double ssr_u = ls_u.ssr(y);
  const double ssr_r = ls_r.ssr(y);

  EgcResult res{source, target, kind, log_ratio(ssr_r, ssr_u)};
  res.unrestricted_variance = ssr_u / n;
  res.restricted_variance = ssr_r / n;
  res.bootstrap_count = replications;

  const Eigen::VectorXd fitted = restricted.X * ls_r.coefficients(y);
  const Eigen::VectorXd resid = y - fitted;
  const auto m = static_cast<std::size_t>(y.size());

  std::vector<double> replicate(static_cast<std::size_t>(replications));
  auto one = [&](std::size_t b) {
    auto rng = replication_engine(seed, source, target, kind, static_cast<int>(b));
    Eigen::VectorXd surrogate = fitted;
    if (scheme == BootstrapScheme::residual) {
      std::uniform_int_distribution<std::size_t> pick(0, m - 1);
      for (std::size_t t = 0; t < m; ++t) surrogate(static_cast<Eigen::Index>(t)) += resid(static_cast<Eigen::Index>(pick(rng)));
    } else {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t t = 0; t < m; ++t) surrogate(static_cast<Eigen::Index>(t)) += resid(static_cast<Eigen::Index>(order[t]));
    }
    const double su = ls_u.ssr(surrogate);
    replicate[b] = su > 0.0 ? log_ratio(ls_r.ssr(surrogate), su) : std::numeric_limits<double>::infinity();
  };
  if (parallel) {
    parallel_for(replicate.size(), one);
  } else {
    for (std::size_t b = 0; b < replicate.size(); ++b) one(b);
  }

  const auto exceed = std::count_if(replicate.begin(), replicate.end(), [&](double v) { return v >= res.measure; });
  res.p_value = static_cast<double>(1 + exceed) / static_cast<double>(replications + 1);
  return res;
}

}  // namespace

std::string_view kind_name(Kind kind) noexcept {
  switch (kind) {
    case Kind::lagged:
      return "lagged";
    case Kind::instantaneous:
      return "instantaneous";
    case Kind::total:
      return "total";
    case Kind::self:
      return "self";
  }
  return "unknown";
}

Kind parse_kind(std::string_view name) {
  for (Kind k : {Kind::lagged, Kind::instantaneous, Kind::total, Kind::self}) {
    if (kind_name(k) == name) return k;
  }
  throw ValidationError("unknown causality kind '" + std::string(name) + "'");
}

EgcResult egc_measure(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec, Kind kind) {
  const TestDesign td = make_test_design(table, source, target, spec, kind);
  const var::Design restricted = var::select_columns(td.unrestricted, td.restricted_columns);
  const double ssr_u = var::LeastSquares(td.unrestricted.X).ssr(td.unrestricted.y);
  const double ssr_r = var::LeastSquares(restricted.X).ssr(restricted.y);
  const double n = static_cast<double>(td.unrestricted.y.size());
  EgcResult res{source, target, kind, log_ratio(ssr_r, ssr_u)};
  res.unrestricted_variance = ssr_u / n;
  res.restricted_variance = ssr_r / n;
  return res;
}

EgcResult bootstrap_p(const panel::SeriesTable& table, int source, int target, const var::VarSpec& spec, Kind kind,
                      int replications, std::uint64_t seed, BootstrapScheme scheme) {
  return run_bootstrap(table, source, target, spec, kind, replications, seed, scheme, /*parallel=*/true);
}

CausalNetwork egc_network(const panel::SeriesTable& table, const NetworkOptions& opts) {
  const int K = static_cast<int>(table.series());
  if (K < 2) throw ContractViolation("network needs at least 2 series");
  if (opts.replications < 1) throw ContractViolation("bootstrap needs at least 1 replication");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ContractViolation("alpha must lie in (0, 1)");

  struct Job {
    int source, target;
    Kind kind;
  };
  std::vector<Job> jobs;
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < K; ++i) {
      if (i == j) continue;
      jobs.push_back({i, j, Kind::lagged});
      if (opts.spec.include_instantaneous) jobs.push_back({i, j, Kind::instantaneous});
    }
  }
  for (int v = 0; v < K; ++v) jobs.push_back({v, v, Kind::self});

  CausalNetwork net;
  net.nodes = table.names();
  net.alpha = opts.alpha;
  net.tests.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const Job& job = jobs[k];
    net.tests[k] = run_bootstrap(table, job.source, job.target, opts.spec, job.kind, opts.replications, opts.seed,
                                 opts.scheme, /*parallel=*/false);
  });

  for (const auto& r : net.tests) {
    if (r.p_value > opts.alpha) continue;
    if (r.kind == Kind::self) {
      net.self_loops.push_back({r.source, r.measure, r.p_value});
    } else {
      net.edges.push_back({r.source, r.target, r.kind, r.measure, r.p_value});
    }
  }
  return net;
}

Heatmaps egc_heatmaps(const CausalNetwork& network, Kind kind) {
  const auto K = static_cast<Eigen::Index>(network.nodes.size());
  Heatmaps h{Eigen::MatrixXd::Zero(K, K), Eigen::MatrixXd::Zero(K, K)};
  for (const auto& e : network.edges) {
    if (e.kind != kind) continue;
    h.measure(e.target, e.source) = e.measure;
    h.probability(e.target, e.source) = 1.0 - e.p_value;
  }
  for (const auto& s : network.self_loops) {
    h.measure(s.node, s.node) = s.measure;
    h.probability(s.node, s.node) = 1.0 - s.p_value;
  }
  return h;
}

Heatmaps egc_heatmaps(const std::vector<EgcResult>& results, std::size_t nodes, Kind kind) {
  const auto K = static_cast<Eigen::Index>(nodes);
  Heatmaps h{Eigen::MatrixXd::Zero(K, K), Eigen::MatrixXd::Zero(K, K)};
  for (const auto& r : results) {
    if (r.kind != kind && r.kind != Kind::self) continue;
    if (r.source >= K || r.target >= K) throw ContractViolation("result index exceeds node count");
    h.measure(r.target, r.source) = r.measure;
    h.probability(r.target, r.source) = std::isnan(r.p_value) ? 0.0 : 1.0 - r.p_value;
  }
  return h;
}

nlohmann::json network_to_json(const CausalNetwork& network) {
  using nlohmann::json;
  auto label = [&](int i) { return network.nodes.at(static_cast<std::size_t>(i)); };
  json edges = json::array();
  for (const auto& e : network.edges) {
    edges.push_back({{"src", label(e.source)},
                     {"dst", label(e.target)},
                     {"kind", kind_name(e.kind)},
                     {"measure", e.measure},
                     {"p", e.p_value}});
  }
  json loops = json::array();
  for (const auto& s : network.self_loops) {
    loops.push_back({{"node", label(s.node)}, {"measure", s.measure}, {"p", s.p_value}});
  }
  json tests = json::array();
  for (const auto& r : network.tests) {
    tests.push_back({{"src", label(r.source)},
                     {"dst", label(r.target)},
                     {"kind", kind_name(r.kind)},
                     {"measure", r.measure},
                     {"p", r.p_value},
                     {"restricted_variance", r.restricted_variance},
                     {"unrestricted_variance", r.unrestricted_variance},
                     {"bootstrap", r.bootstrap_count}});
  }
  return json{{"nodes", network.nodes}, {"alpha", network.alpha}, {"edges", edges}, {"self", loops},
              {"tests", tests}};
}

CausalNetwork network_from_json(const nlohmann::json& doc) {
  try {
    CausalNetwork net;
    net.nodes = doc.at("nodes").get<std::vector<std::string>>();
    net.alpha = doc.at("alpha").get<double>();
    auto index = [&](const std::string& label) {
      const auto it = std::find(net.nodes.begin(), net.nodes.end(), label);
      if (it == net.nodes.end()) throw ValidationError("edge references unknown node '" + label + "'");
      return static_cast<int>(it - net.nodes.begin());
    };
    for (const auto& e : doc.at("edges")) {
      Edge edge{index(e.at("src").get<std::string>()), index(e.at("dst").get<std::string>()),
                parse_kind(e.at("kind").get<std::string>()), e.at("measure").get<double>(), e.at("p").get<double>()};
      if (edge.kind != Kind::lagged && edge.kind != Kind::instantaneous) {
        throw ValidationError("network edges must be lagged or instantaneous");
      }
      if (edge.source == edge.target) throw ValidationError("self loops belong in the 'self' array");
      net.edges.push_back(edge);
    }
    if (doc.contains("self")) {
      for (const auto& s : doc.at("self")) {
        net.self_loops.push_back({index(s.at("node").get<std::string>()), s.at("measure").get<double>(),
                                  s.at("p").get<double>()});
      }
    }
    if (doc.contains("tests")) {
      for (const auto& t : doc.at("tests")) {
        EgcResult r{index(t.at("src").get<std::string>()), index(t.at("dst").get<std::string>()),
                    parse_kind(t.at("kind").get<std::string>()), t.at("measure").get<double>()};
        r.p_value = t.at("p").is_null() ? std::numeric_limits<double>::quiet_NaN() : t.at("p").get<double>();
        r.restricted_variance = t.value("restricted_variance", 0.0);
        r.unrestricted_variance = t.value("unrestricted_variance", 0.0);
        r.bootstrap_count = t.value("bootstrap", 0);
        net.tests.push_back(r);
      }
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed network document: ") + e.what());
  }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  out << "node";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << labels.at(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << panel::format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace chaos::egc
