#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oitrunc/infer.hpp"
#include "oitrunc/margins.hpp"
#include "oitrunc/sim.hpp"

namespace oitrunc {

using ordered_json = nlohmann::ordered_json;

enum class OutputFormat { Text, Json, Csv };

OutputFormat parse_format(const std::string& s);

/// "***", "**", "*" at the 1%, 5% and 10% levels.
std::string significance_stars(std::optional<double> p);

// Fit summaries.
std::string format_text(const SummaryTable& t);
std::string format_csv(const SummaryTable& t);
ordered_json to_json(const SummaryTable& t);
SummaryTable summary_from_json(const ordered_json& j);

// Marginal effects.
std::string format_text(const MarginalEffects& m);
std::string format_csv(const MarginalEffects& m);
ordered_json to_json(const MarginalEffects& m);
MarginalEffects margins_from_json(const ordered_json& j);

// Hypothesis tests, labelled by name ("one_wald", "one_lrt", "signif:white").
struct NamedTest {
  std::string name;
  TestResult result;
};
std::string format_text(const std::vector<NamedTest>& tests);
std::string format_csv(const std::vector<NamedTest>& tests);
ordered_json to_json(const std::vector<NamedTest>& tests);
std::vector<NamedTest> tests_from_json(const ordered_json& j);

// Observed and predicted frequencies of y = 1..y_max.
struct CountTable {
  std::vector<long> y;
  std::vector<double> observed;
  std::vector<Family> families;
  std::vector<std::vector<double>> predicted;  // one column per family
};

/// Observed frequencies for y = 1..y_max (y_max defaults to max(y)).
CountTable observed_counts(const DesignData& dd, std::optional<long> y_max = std::nullopt);
void add_predictions(CountTable& t, const FittedModel& fm, const DesignData& dd);
std::string format_text(const CountTable& t);
std::string format_csv(const CountTable& t);
ordered_json to_json(const CountTable& t);
CountTable counts_from_json(const ordered_json& j);

/// Grouped barplot: one group per y, the observed bar first, then one bar per
/// family. Every bar carries data-y, data-series and data-value attributes.
std::string render_svg(const CountTable& t);

// Simulation bias tables; several tables render as one block in row order.
std::string format_text(const std::vector<BiasTable>& tables);
std::string format_csv(const std::vector<BiasTable>& tables);
ordered_json to_json(const std::vector<BiasTable>& tables);
std::vector<BiasTable> bias_from_json(const ordered_json& j);

/// Shortest decimal string that round-trips.
std::string format_double(double x);

}  // namespace oitrunc
