#include "chaos/mht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chaos/error.hpp"

namespace chaos::mht {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxTerms = 10000;

// x^a e^-x / Gamma(a)
double gamma_prefactor(double a, double x) { return std::exp(a * std::log(x) - x - std::lgamma(a)); }

// P(a, x) by its power series; best for x < a + 1.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * gamma_prefactor(a, x);
  }
  throw NonConvergence("incomplete gamma series did not converge", sum, {}, kMaxTerms);
}

// Q(a, x) by its continued fraction (modified Lentz); best for x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h * gamma_prefactor(a, x);
  }
  throw NonConvergence("incomplete gamma continued fraction did not converge", h, {}, kMaxTerms);
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || std::isnan(x) || x < 0.0) {
    throw ContractViolation("incomplete gamma needs a > 0 and x >= 0");
  }
}

void check_p_values(const std::vector<ComponentTest>& tests) {
  if (tests.empty()) throw ContractViolation("joint test needs at least one p-value");
  for (const auto& t : tests) {
    if (!(t.p_value > 0.0 && t.p_value <= 1.0)) {
      throw ContractViolation("p-value for '" + t.label + "' must lie in (0, 1]");
    }
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("alpha must lie in (0, 1)");
}

double min_p(const std::vector<ComponentTest>& tests) {
  double m = 1.0;
  for (const auto& t : tests) m = std::min(m, t.p_value);
  return m;
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_fraction(a, x);
}

double chisq_sf(double x, double k) {
  if (!(k >= 1.0)) throw ContractViolation("chi-square degrees of freedom must be >= 1");
  if (std::isnan(x) || x < 0.0) throw ContractViolation("chi-square argument must be >= 0");
  return gamma_q(0.5 * k, 0.5 * x);
}

std::string_view method_name(Method m) noexcept { return m == Method::bonferroni ? "bonferroni" : "fisher"; }

Method parse_method(std::string_view name) {
  if (name == "bonferroni") return Method::bonferroni;
  if (name == "fisher") return Method::fisher;
  throw ValidationError("unknown joint-test method '" + std::string(name) + "' (expected bonferroni or fisher)");
}

std::string_view decision_name(Decision d) noexcept { return d == Decision::reject ? "reject" : "fail_to_reject"; }

HypothesisReport bonferroni_joint(std::vector<ComponentTest> tests, double alpha) {
  check_p_values(tests);
  check_alpha(alpha);
  HypothesisReport r;
  r.method = Method::bonferroni;
  r.alpha = alpha;
  r.threshold = alpha / static_cast<double>(tests.size());
  r.min_p = min_p(tests);
  r.decision = r.min_p <= r.threshold ? Decision::reject : Decision::fail_to_reject;
  r.components = std::move(tests);
  return r;
}

HypothesisReport fisher_joint(std::vector<ComponentTest> tests, double alpha) {
  check_p_values(tests);
  check_alpha(alpha);
  std::vector<double> p;
  for (const auto& t : tests) p.push_back(t.p_value);
  std::sort(p.begin(), p.end());
  double stat = 0.0;
  for (double v : p) stat += -2.0 * std::log(v);

  HypothesisReport r;
  r.method = Method::fisher;
  r.alpha = alpha;
  r.threshold = alpha;
  r.statistic = stat;
  r.degrees_of_freedom = 2.0 * static_cast<double>(tests.size());
  r.joint_p = chisq_sf(stat, *r.degrees_of_freedom);
  r.min_p = p.front();
  r.decision = *r.joint_p <= alpha ? Decision::reject : Decision::fail_to_reject;
  r.caveat = "Fisher's combination assumes independent component p-values; no dependence correction applied.";
  r.components = std::move(tests);
  return r;
}

HypothesisReport joint_test(std::vector<ComponentTest> tests, double alpha, Method method) {
  return method == Method::bonferroni ? bonferroni_joint(std::move(tests), alpha)
                                      : fisher_joint(std::move(tests), alpha);
}

HypothesisReport emh_test(const panel::SeriesTable& table, std::string_view target,
                          const std::vector<std::string>& news, const EmhOptions& opts) {
  if (news.empty()) throw ContractViolation("EMH test needs at least one news series");
  const int target_index = static_cast<int>(table.index_of(target));
  std::vector<ComponentTest> tests;
  for (const auto& label : news) {
    const int source = static_cast<int>(table.index_of(label));
    if (source == target_index) throw ContractViolation("news series '" + label + "' is the target itself");
    const egc::EgcResult res =
        egc::bootstrap_p(table, source, target_index, opts.spec, egc::Kind::lagged, opts.replications, opts.seed,
                         opts.scheme);
    tests.push_back({"H0: " + label + " -/-> " + std::string(target) + " (h>0)", res.p_value});
  }
  return joint_test(std::move(tests), opts.alpha, opts.method);
}

nlohmann::json report_to_json(const HypothesisReport& report) {
  using nlohmann::json;
  json components = json::array();
  for (const auto& c : report.components) components.push_back({{"label", c.label}, {"p", c.p_value}});
  json out{{"method", method_name(report.method)},
           {"alpha", report.alpha},
           {"threshold", report.threshold},
           {"min_p", report.min_p},
           {"decision", decision_name(report.decision)},
           {"components", components}};
  out["statistic"] = report.statistic ? json(*report.statistic) : json(nullptr);
  out["degrees_of_freedom"] = report.degrees_of_freedom ? json(*report.degrees_of_freedom) : json(nullptr);
  out["joint_p"] = report.joint_p ? json(*report.joint_p) : json(nullptr);
  if (!report.caveat.empty()) out["caveat"] = report.caveat;
  return out;
}

std::string report_summary(const HypothesisReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << method_name(report.method) << ": m=" << report.components.size();
  if (report.method == Method::fisher) {
    os << " T_F=" << *report.statistic << " df=" << *report.degrees_of_freedom << " p=" << *report.joint_p
       << " alpha=" << report.alpha;
  } else {
    os << " min_p=" << report.min_p << " threshold=" << report.threshold;
  }
  os << " -> " << decision_name(report.decision);
  return os.str();
}

}  // namespace chaos::mht
