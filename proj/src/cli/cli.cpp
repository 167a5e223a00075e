#include "chaos/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaos/egc.hpp"
#include "chaos/error.hpp"
#include "chaos/fcix.hpp"
#include "chaos/mht.hpp"
#include "chaos/netstats.hpp"
#include "chaos/panel.hpp"
#include "chaos/parallel.hpp"
#include "chaos/synth.hpp"
#include "chaos/varmodel.hpp"
#include "chaos/version.hpp"

namespace chaos::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Provenance written into every artifact. Thread count and output paths are
// left out on purpose: they must not change the bytes of a result.
struct Meta {
  std::string command;
  json config = json::object();
  std::optional<std::uint64_t> seed;

  json to_json() const {
    json j{{"tool", "chaosnet"}, {"version", kVersion}, {"command", command}, {"config", config}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    return j;
  }

  std::vector<std::string> comments() const {
    std::vector<std::string> c{std::string("chaosnet ") + kVersion, "command: " + command,
                               "config: " + config.dump()};
    if (seed) c.push_back("seed: " + std::to_string(*seed));
    return c;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

void write_json(const std::string& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_comments(std::ostream& out, const Meta& meta) {
  for (const auto& c : meta.comments()) out << "# " << c << '\n';
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Options shared by commands that fit VAR equations on a series table.
struct SeriesArgs {
  std::string path;
  bool log = false;
  bool diff = false;
  bool no_intercept = false;
  bool no_instantaneous = false;
  std::string lags = "auto";
  int max_lags = 8;

  void attach(CLI::App* cmd, bool required = true) {
    auto* s = cmd->add_option("--series", path, "Series CSV (date column, one column per series)");
    if (required) s->required();
    cmd->add_flag("--log", log, "Take natural logs before modelling");
    cmd->add_flag("--diff", diff, "First-difference before modelling (after --log)");
    cmd->add_flag("--no-intercept", no_intercept, "Drop the intercept column");
    cmd->add_flag("--no-instantaneous", no_instantaneous, "Drop lag-0 regressors (classical Granger)");
    cmd->add_option("--lags", lags, "Lag order p, or 'auto' for BIC selection")->capture_default_str();
    cmd->add_option("--max-lags", max_lags, "Largest p considered by --lags auto")->capture_default_str();
  }

  struct Prepared {
    panel::SeriesTable table;
    var::VarSpec spec;
    json config;
  };

  Prepared prepare() const {
    panel::SeriesTable table = panel::load_series_table(path);
    if (log) table = panel::log_transform(table);
    if (diff) table = panel::difference(table);
    var::VarSpec spec;
    spec.include_intercept = !no_intercept;
    spec.include_instantaneous = !no_instantaneous;
    if (lags == "auto") {
      if (max_lags < 1) throw ValidationError("--max-lags must be >= 1");
      spec.p = var::select_lag(table, max_lags, spec.include_intercept);
    } else {
      int p = 0;
      const auto [ptr, ec] = std::from_chars(lags.data(), lags.data() + lags.size(), p);
      if (ec != std::errc() || ptr != lags.data() + lags.size() || p < 1) {
        throw ValidationError("--lags must be a positive integer or 'auto', got '" + lags + "'");
      }
      spec.p = p;
    }
    json config{{"series", path},
                {"log", log},
                {"diff", diff},
                {"intercept", spec.include_intercept},
                {"instantaneous", spec.include_instantaneous},
                {"lag_selection", lags == "auto" ? "bic" : "fixed"},
                {"lags", spec.p}};
    if (lags == "auto") config["max_lags"] = max_lags;
    return {std::move(table), spec, std::move(config)};
  }
};

egc::BootstrapScheme parse_scheme(const std::string& name) {
  if (name == "residual") return egc::BootstrapScheme::residual;
  if (name == "permutation") return egc::BootstrapScheme::permutation;
  throw ValidationError("unknown bootstrap scheme '" + name + "' (expected residual or permutation)");
}

// ---- fcix ------------------------------------------------------------------

struct FcixArgs {
  std::string prices, out, factors;
  std::size_t window = 0;
  double tol = 1e-10;
  int max_sweeps = 500;
};

int cmd_fcix(const FcixArgs& a, std::ostream& err) {
  const panel::PricePanel prices = panel::load_price_panel(a.prices);
  fcix::PipelineOptions opts;
  opts.fit.tol = a.tol;
  opts.fit.max_sweeps = a.max_sweeps;
  if (a.window > 0) opts.window = a.window;

  Meta meta{"fcix", json{{"prices", a.prices}, {"tol", a.tol}, {"max_sweeps", a.max_sweeps}}, std::nullopt};
  meta.config["window"] = a.window > 0 ? json(a.window) : json(nullptr);

  const fcix::FcixRun run = fcix::fcix_pipeline(prices, opts);
  {
    auto out = open_output(a.out);
    fcix::write_fcix_csv(out, run.series, meta.comments());
  }
  if (!a.factors.empty()) {
    json doc = fcix::factors_to_json(run.factors);
    doc["meta"] = meta.to_json();
    write_json(a.factors, doc);
  }
  if (!run.all_converged) {
    err << "chaosnet: rank-one fit stopped at max_sweeps before reaching tol; output written but unconverged\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

// ---- egc -------------------------------------------------------------------

struct EgcArgs {
  SeriesArgs series;
  double alpha = 0.01;
  int bootstrap = 500;
  std::uint64_t seed = 0;
  std::string out, heatmaps, scheme = "residual";
};

int cmd_egc(const EgcArgs& a, std::ostream& out) {
  auto prepared = a.series.prepare();
  egc::NetworkOptions opts;
  opts.spec = prepared.spec;
  opts.alpha = a.alpha;
  opts.replications = a.bootstrap;
  opts.seed = a.seed;
  opts.scheme = parse_scheme(a.scheme);

  Meta meta{"egc", prepared.config, a.seed};
  meta.config["alpha"] = a.alpha;
  meta.config["bootstrap"] = a.bootstrap;
  meta.config["scheme"] = a.scheme;

  const egc::CausalNetwork net = egc::egc_network(prepared.table, opts);
  json doc = egc::network_to_json(net);
  doc["meta"] = meta.to_json();
  write_json(a.out, doc);

  if (!a.heatmaps.empty()) {
    std::vector<egc::Kind> kinds{egc::Kind::lagged};
    if (opts.spec.include_instantaneous) kinds.push_back(egc::Kind::instantaneous);
    for (egc::Kind kind : kinds) {
      const egc::Heatmaps h = egc::egc_heatmaps(net.tests, net.nodes.size(), kind);
      const std::string stem = a.heatmaps + "_" + std::string(egc::kind_name(kind));
      auto m = open_output(stem + "_measure.csv");
      write_comments(m, meta);
      egc::write_matrix_csv(m, h.measure, net.nodes);
      auto p = open_output(stem + "_probability.csv");
      write_comments(p, meta);
      egc::write_matrix_csv(p, h.probability, net.nodes);
    }
  }
  out << net.edges.size() << " edges and " << net.self_loops.size() << " self loops retained at alpha "
      << a.alpha << " (p = " << opts.spec.p << ")\n";
  return kExitOk;
}

// ---- emh -------------------------------------------------------------------

struct EmhArgs {
  SeriesArgs series;
  std::string target, news, method = "bonferroni", pvalues_file, out, scheme = "residual";
  double alpha = 0.01;
  int bootstrap = 500;
  std::optional<std::uint64_t> seed;
};

// Lines of "label,p" or bare "p"; '#' starts a comment; a non-numeric first
// row is a header. p = 0 (a bootstrap with no exceedance, printed rounded)
// becomes the smallest attainable value 1 / (B + 1).
std::vector<mht::ComponentTest> read_p_values(const std::string& path, int bootstrap, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<mht::ComponentTest> tests;
  std::string line;
  int line_no = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto comma = line.find(',');
    std::string label = comma == std::string::npos ? "p" + std::to_string(tests.size() + 1) : line.substr(0, comma);
    std::string value = comma == std::string::npos ? line.substr(start) : line.substr(comma + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t") + 1);
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p);
    const bool numeric = ec == std::errc() && ptr == value.data() + value.size();
    if (!numeric && first_data) {
      first_data = false;
      continue;
    }
    first_data = false;
    const std::string where = path + ":" + std::to_string(line_no);
    if (!numeric) throw ValidationError(where + ": '" + value + "' is not a number");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": p-value must lie in [0, 1]");
    if (p == 0.0) {
      p = 1.0 / (static_cast<double>(bootstrap) + 1.0);
      err << "chaosnet: " << where << ": p = 0 replaced by 1/(B+1) with B = " << bootstrap << '\n';
    }
    tests.push_back({label, p});
  }
  if (tests.empty()) throw ValidationError("'" + path + "' holds no p-values");
  return tests;
}

int cmd_emh(const EmhArgs& a, std::ostream& out, std::ostream& err) {
  const mht::Method method = mht::parse_method(a.method);
  if (a.bootstrap < 1) throw ContractViolation("--bootstrap must be >= 1");
  Meta meta{"emh", json::object(), std::nullopt};
  mht::HypothesisReport report;
  if (!a.pvalues_file.empty()) {
    meta.config = json{{"pvalues_file", a.pvalues_file}, {"bootstrap", a.bootstrap}};
    report = mht::joint_test(read_p_values(a.pvalues_file, a.bootstrap, err), a.alpha, method);
  } else {
    if (a.series.path.empty() || a.target.empty() || a.news.empty()) {
      throw ValidationError("emh needs --series, --target and --news (or --pvalues-file)");
    }
    if (!a.seed) throw ValidationError("emh needs --seed when running bootstraps");
    auto prepared = a.series.prepare();
    mht::EmhOptions opts;
    opts.spec = prepared.spec;
    opts.alpha = a.alpha;
    opts.replications = a.bootstrap;
    opts.seed = *a.seed;
    opts.method = method;
    opts.scheme = parse_scheme(a.scheme);
    meta.config = prepared.config;
    meta.config["target"] = a.target;
    meta.config["news"] = split_list(a.news);
    meta.config["bootstrap"] = a.bootstrap;
    meta.config["scheme"] = a.scheme;
    meta.seed = a.seed;
    report = mht::emh_test(prepared.table, a.target, split_list(a.news), opts);
  }
  meta.config["method"] = a.method;
  meta.config["alpha"] = a.alpha;
  if (!a.out.empty()) {
    json doc = mht::report_to_json(report);
    doc["meta"] = meta.to_json();
    write_json(a.out, doc);
  }
  out << mht::report_summary(report) << '\n';
  return kExitOk;
}

// ---- netstats --------------------------------------------------------------

struct NetstatsArgs {
  std::string network, out, dot, stats, kinds = "lagged,instantaneous";
  bool weighted = false;
};

int cmd_netstats(const NetstatsArgs& a, std::ostream& out) {
  const egc::CausalNetwork net = egc::network_from_json(read_json(a.network));
  std::set<egc::Kind> kinds;
  for (const auto& k : split_list(a.kinds)) {
    const egc::Kind kind = egc::parse_kind(k);
    if (kind != egc::Kind::lagged && kind != egc::Kind::instantaneous) {
      throw ValidationError("--kinds accepts lagged and instantaneous only");
    }
    kinds.insert(kind);
  }
  if (kinds.empty()) throw ValidationError("--kinds selects nothing");

  Meta meta{"netstats", json{{"network", a.network}, {"kinds", a.kinds}, {"weighted", a.weighted}}, std::nullopt};
  const net::DirectedGraph g = net::from_causal_network(net, kinds);
  net::IterationOptions iter;
  iter.weighted = a.weighted;
  const net::NodeStats stats = net::node_stats(g, iter);
  {
    auto f = open_output(a.out);
    net::write_node_stats_csv(f, g, stats, meta.comments());
  }
  if (!a.dot.empty()) {
    auto f = open_output(a.dot);
    for (const auto& c : meta.comments()) f << "// " << c << '\n';
    net::write_dot(f, g);
  }
  json global = net::global_stats_to_json(net::global_stats(g));
  if (!a.stats.empty()) {
    json doc = global;
    doc["meta"] = meta.to_json();
    write_json(a.stats, doc);
  } else {
    out << global.dump() << '\n';
  }
  return kExitOk;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec, out, truth;
  std::size_t length = 0;
  std::size_t burn_in = 500;
  std::uint64_t seed = 0;
};

int cmd_synth_var(const SynthArgs& a) {
  const synth::VarGroundTruth truth = synth::truth_from_json(read_json(a.spec));
  Meta meta{"synth var", json{{"spec", a.spec}, {"length", a.length}, {"burn_in", a.burn_in}}, a.seed};
  const panel::SeriesTable table = synth::simulate_var(truth, a.length, a.burn_in, a.seed);
  {
    auto f = open_output(a.out);
    panel::write_series_table(f, table, meta.comments());
  }
  json doc = synth::truth_to_json(truth);
  doc["meta"] = meta.to_json();
  write_json(a.truth.empty() ? a.out + ".truth.json" : a.truth, doc);
  return kExitOk;
}

// {"assets": N, "market_sd": s, "start_price": c, "dispersion": d,
//  "regimes": [{"start": i, "end": j, "dispersion": d}, ...]}
// Regime bounds index return periods, end exclusive.
int cmd_synth_panel(const SynthArgs& a) {
  const json doc = read_json(a.spec);
  if (!doc.is_object()) throw ValidationError("panel spec must be a JSON object");
  if (a.length < 2) throw ValidationError("--length must be >= 2 for a price panel");
  synth::PanelSpec spec;
  std::vector<double> schedule;
  try {
    spec.assets = doc.value("assets", spec.assets);
    spec.market_sd = doc.value("market_sd", spec.market_sd);
    spec.start_price = doc.value("start_price", spec.start_price);
    schedule.assign(a.length - 1, doc.value("dispersion", 0.01));
    for (const auto& r : doc.value("regimes", json::array())) {
      const auto start = r.at("start").get<std::size_t>();
      const auto end = r.at("end").get<std::size_t>();
      if (start >= end || end > schedule.size()) {
        throw ValidationError("regime [" + std::to_string(start) + ", " + std::to_string(end) +
                              ") lies outside the " + std::to_string(schedule.size()) + " return periods");
      }
      std::fill(schedule.begin() + static_cast<std::ptrdiff_t>(start), schedule.begin() + static_cast<std::ptrdiff_t>(end),
                r.at("dispersion").get<double>());
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed panel spec: " + std::string(e.what()));
  }
  Meta meta{"synth panel", json{{"spec", a.spec}, {"length", a.length}}, a.seed};
  const panel::PricePanel prices = synth::simulate_price_panel(spec, a.length, schedule, a.seed);
  auto f = open_output(a.out);
  panel::write_price_panel(f, prices, meta.comments());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Financial chaos index and extended Granger causality networks", "chaosnet"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");

  FcixArgs fa;
  auto* fcix_cmd = app.add_subcommand("fcix", "Rank-one FCIX series from a price panel");
  fcix_cmd->add_option("--prices", fa.prices, "Price CSV (date column, one column per asset)")->required();
  fcix_cmd->add_option("--out", fa.out, "FCIX CSV to write")->required();
  fcix_cmd->add_option("--window", fa.window, "Sliding window in return periods (0 = full sample)");
  fcix_cmd->add_option("--factors", fa.factors, "Also write the fitted factors as JSON");
  fcix_cmd->add_option("--tol", fa.tol, "Relative objective change that stops the fit")->capture_default_str();
  fcix_cmd->add_option("--max-sweeps", fa.max_sweeps, "Sweep budget per fit")->capture_default_str();

  EgcArgs ea;
  auto* egc_cmd = app.add_subcommand("egc", "Bootstrapped extended Granger causality network");
  ea.series.attach(egc_cmd);
  egc_cmd->add_option("--alpha", ea.alpha, "Edge retention level")->capture_default_str();
  egc_cmd->add_option("--bootstrap", ea.bootstrap, "Bootstrap replications B")->capture_default_str();
  egc_cmd->add_option("--seed", ea.seed, "Bootstrap seed")->required();
  egc_cmd->add_option("--out", ea.out, "Network JSON to write")->required();
  egc_cmd->add_option("--heatmaps", ea.heatmaps, "Write <prefix>_<kind>_{measure,probability}.csv");
  egc_cmd->add_option("--scheme", ea.scheme, "residual or permutation")->capture_default_str();

  EmhArgs ma;
  auto* emh_cmd = app.add_subcommand("emh", "Joint test of lagged news-to-target causality");
  ma.series.attach(emh_cmd, false);
  emh_cmd->add_option("--target", ma.target, "Target series name");
  emh_cmd->add_option("--news", ma.news, "Comma-separated news series names");
  emh_cmd->add_option("--method", ma.method, "bonferroni or fisher")->capture_default_str();
  emh_cmd->add_option("--alpha", ma.alpha, "Joint test level")->capture_default_str();
  emh_cmd->add_option("--bootstrap", ma.bootstrap, "Bootstrap replications B")->capture_default_str();
  emh_cmd->add_option("--seed", ma.seed, "Bootstrap seed (required unless --pvalues-file)");
  emh_cmd->add_option("--scheme", ma.scheme, "residual or permutation")->capture_default_str();
  emh_cmd->add_option("--pvalues-file", ma.pvalues_file, "Skip the bootstraps and combine these p-values");
  emh_cmd->add_option("--out", ma.out, "HypothesisReport JSON to write");

  NetstatsArgs na;
  auto* net_cmd = app.add_subcommand("netstats", "Node and global statistics of a causal network");
  net_cmd->add_option("--network", na.network, "Network JSON from `egc`")->required();
  net_cmd->add_option("--out", na.out, "Node statistics CSV to write")->required();
  net_cmd->add_option("--dot", na.dot, "Also write a Graphviz DOT file");
  net_cmd->add_option("--stats", na.stats, "Write global statistics JSON here (default: stdout)");
  net_cmd->add_option("--kinds", na.kinds, "Edge kinds to include")->capture_default_str();
  net_cmd->add_flag("--weighted", na.weighted, "Weight HITS and PageRank by eGC measure");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic data with known structure");
  synth_cmd->require_subcommand(1);
  auto* synth_var = synth_cmd->add_subcommand("var", "Simulate a structural VAR from a truth spec");
  auto* synth_panel = synth_cmd->add_subcommand("panel", "Simulate a positive price panel");
  for (auto* c : {synth_var, synth_panel}) {
    c->add_option("--spec", sa.spec, "Spec JSON")->required();
    c->add_option("--length", sa.length, "Number of dates T")->required();
    c->add_option("--seed", sa.seed, "Generator seed")->required();
    c->add_option("--out", sa.out, "CSV to write")->required();
  }
  synth_var->add_option("--truth", sa.truth, "Truth JSON (default <out>.truth.json)");
  synth_var->add_option("--burn-in", sa.burn_in, "Discarded initial draws")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_thread_count(threads);
    if (*fcix_cmd) return cmd_fcix(fa, err);
    if (*egc_cmd) return cmd_egc(ea, out);
    if (*emh_cmd) return cmd_emh(ma, out, err);
    if (*net_cmd) return cmd_netstats(na, out);
    if (*synth_var) {
      if (sa.length == 0) throw ValidationError("--length must be positive");
      return cmd_synth_var(sa);
    }
    if (*synth_panel) return cmd_synth_panel(sa);
    return kExitUsage;
  } catch (const NonConvergence& e) {
    err << "chaosnet: did not converge: " << e.what() << " (after " << e.iterations() << " iterations)\n";
    return kExitNonConvergence;
  } catch (const InternalError& e) {
    err << "chaosnet: internal error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "chaosnet: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "chaosnet: unexpected failure: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace chaos::cli
