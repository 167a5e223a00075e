#pragma once
// Joint tests over families of component p-values.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "chaos/egc.hpp"
#include "chaos/panel.hpp"
#include "chaos/varmodel.hpp"

namespace chaos::mht {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly (no subtraction) where it is small.
double gamma_q(double a, double x);

/// Upper tail of the chi-square law with k degrees of freedom: Q(k/2, x/2).
double chisq_sf(double x, double k);

enum class Method { bonferroni, fisher };
enum class Decision { reject, fail_to_reject };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);  ///< throws ValidationError
std::string_view decision_name(Decision d) noexcept;

struct ComponentTest {
  std::string label;
  double p_value = 1.0;
};

struct HypothesisReport {
  std::vector<ComponentTest> components;
  Method method = Method::bonferroni;
  double alpha = 0.05;
  /// Bonferroni: alpha / m, compared with min p. Fisher: alpha, compared with joint_p.
  double threshold = 0.0;
  std::optional<double> statistic;
  std::optional<double> degrees_of_freedom;
  std::optional<double> joint_p;
  double min_p = 1.0;
  Decision decision = Decision::fail_to_reject;
  std::string caveat;
};

/// Reject iff min p <= alpha / m.
HypothesisReport bonferroni_joint(std::vector<ComponentTest> tests, double alpha);

/// T = -2 sum ln p over 2m degrees of freedom; reject iff Q(m, T/2) <= alpha.
/// The statistic is summed in sorted order so the report does not depend on
/// the order of the inputs.
HypothesisReport fisher_joint(std::vector<ComponentTest> tests, double alpha);

HypothesisReport joint_test(std::vector<ComponentTest> tests, double alpha, Method method);

struct EmhOptions {
  var::VarSpec spec;
  double alpha = 0.01;
  int replications = 500;
  std::uint64_t seed = 0;
  Method method = Method::bonferroni;
  egc::BootstrapScheme scheme = egc::BootstrapScheme::residual;
};

/// Strictly lagged causality from each news series to the target inside the
/// full system, followed by the joint test. Component k is labelled
/// "H0: <news> -/-> <target> (h>0)".
HypothesisReport emh_test(const panel::SeriesTable& table, std::string_view target,
                          const std::vector<std::string>& news, const EmhOptions& opts);

nlohmann::json report_to_json(const HypothesisReport& report);
/// One line: method, statistic (Fisher), joint or min p, threshold, verdict.
std::string report_summary(const HypothesisReport& report);

}  // namespace chaos::mht
