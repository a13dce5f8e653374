#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "common.hpp"
#include "oitrunc/report.hpp"

using namespace oitrunc;

namespace {

struct Fitted {
  DesignData dd;
  FittedModel fm;
};

Fitted fit_sim(Family f, std::size_t n = 300) {
  const SimConfig cfg = default_study(Family::OIPP, n, 1);
  DesignData dd = build_design(study_spec(f), simulate_dataset(cfg, 1));
  FittedModel fm = maximize(study_spec(f), dd);
  return {std::move(dd), std::move(fm)};
}

}  // namespace

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.009), "***");
  EXPECT_EQ(significance_stars(0.01), "**");
  EXPECT_EQ(significance_stars(0.049), "**");
  EXPECT_EQ(significance_stars(0.05), "*");
  EXPECT_EQ(significance_stars(0.099), "*");
  EXPECT_EQ(significance_stars(0.1), "");
  EXPECT_EQ(significance_stars(std::nullopt), "");
}

TEST(Format, ParseAndDoubles) {
  EXPECT_EQ(parse_format("json"), OutputFormat::Json);
  EXPECT_EQ(parse_format("csv"), OutputFormat::Csv);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
  for (double x : {0.1, -2.0 / 3.0, 1e-300, 123456789.125}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(JsonRoundTrip, Summary) {
  const Fitted f = fit_sim(Family::OIPP);
  const SummaryTable t = summarize(f.fm, f.dd);
  const SummaryTable back = summary_from_json(ordered_json::parse(to_json(t).dump()));
  EXPECT_EQ(back.family, t.family);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].name, t.rows[i].name);
    EXPECT_EQ(back.rows[i].estimate, t.rows[i].estimate);
    EXPECT_EQ(back.rows[i].se, t.rows[i].se);
    EXPECT_EQ(back.rows[i].p, t.rows[i].p);
  }
  EXPECT_EQ(back.loglik, t.loglik);
  EXPECT_EQ(back.avg_one_inflation, t.avg_one_inflation);
  EXPECT_EQ(back.avg_abs_one_inflation, t.avg_abs_one_inflation);
  EXPECT_EQ(back.n, t.n);
  EXPECT_EQ(back.converged, t.converged);
  EXPECT_NE(format_text(t).find("beta:x1"), std::string::npos);
  EXPECT_NE(format_csv(t).find("beta:x1"), std::string::npos);
}

TEST(JsonRoundTrip, SummaryWithoutStandardErrors) {
  Fitted f = fit_sim(Family::PP);
  f.fm.varcov.reset();
  f.fm.varcov_status = VarcovStatus::Singular;
  const SummaryTable t = summarize(f.fm, f.dd);
  const ordered_json j = to_json(t);
  EXPECT_TRUE(j["se"][0].is_null());
  const SummaryTable back = summary_from_json(j);
  EXPECT_FALSE(back.rows[0].se.has_value());
}

TEST(JsonRoundTrip, Margins) {
  const Fitted f = fit_sim(Family::OIPP);
  for (const Aggregation& agg :
       {Aggregation{}, Aggregation::at_point(Eigen::Vector3d(1, 10, 1), Eigen::Vector3d(1, 10, 1))}) {
    const MarginalEffects m = margins(f.fm, f.dd, agg);
    const MarginalEffects back = margins_from_json(ordered_json::parse(to_json(m).dump()));
    EXPECT_EQ(back.aggregation.kind, m.aggregation.kind);
    EXPECT_EQ(back.aggregation.x_row, m.aggregation.x_row);
    EXPECT_EQ(back.se_available, m.se_available);
    ASSERT_EQ(back.rows.size(), m.rows.size());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      EXPECT_EQ(back.rows[i].name, m.rows[i].name);
      EXPECT_EQ(back.rows[i].kind, m.rows[i].kind);
      EXPECT_EQ(back.rows[i].effect, m.rows[i].effect);
      EXPECT_EQ(back.rows[i].se, m.rows[i].se);
    }
  }
}

TEST(JsonRoundTrip, Tests) {
  std::vector<NamedTest> tests = {
      {"one_wald", {12.5, 3, 0.0058, "wald", std::nullopt}},
      {"one_lrt", {0.0, 3, 1.0, "lrt", "clamped to zero"}},
  };
  const auto back = tests_from_json(ordered_json::parse(to_json(tests).dump()));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "one_wald");
  EXPECT_EQ(back[0].result.statistic, 12.5);
  EXPECT_EQ(back[0].result.dof, 3);
  EXPECT_EQ(back[1].result.warning, tests[1].result.warning);
  EXPECT_NE(format_text(tests).find("***"), std::string::npos);
}

TEST(JsonRoundTrip, Bias) {
  SimConfig cfg = default_study(Family::OIPP, 100, 2);
  const std::vector<BiasTable> tables = {run_study(cfg)};
  const auto back = bias_from_json(ordered_json::parse(to_json(tables).dump()));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].dgp_family, Family::OIPP);
  EXPECT_EQ(back[0].n, 100u);
  ASSERT_EQ(back[0].rows.size(), tables[0].rows.size());
  for (std::size_t i = 0; i < back[0].rows.size(); ++i) {
    EXPECT_EQ(back[0].rows[i].mean_estimates, tables[0].rows[i].mean_estimates);
    EXPECT_EQ(back[0].rows[i].percent_bias, tables[0].rows[i].percent_bias);
    EXPECT_EQ(back[0].rows[i].converged, tables[0].rows[i].converged);
  }
  EXPECT_EQ(back[0].avg_true_one_inflation, tables[0].avg_true_one_inflation);
  EXPECT_FALSE(format_text(tables).empty());
}

TEST(Counts, ObservedOnlyAndPredictedSums) {
  const Fitted f = fit_sim(Family::OIPP);
  CountTable t = observed_counts(f.dd);
  double total = 0.0;
  for (double v : t.observed) total += v;
  EXPECT_EQ(total, static_cast<double>(f.dd.y.size()));
  const std::string svg = render_svg(t);
  EXPECT_EQ(svg.find("data-series=\"OIPP\""), std::string::npos);

  CountTable wide = observed_counts(f.dd, 200);
  add_predictions(wide, f.fm, f.dd);
  double pred = 0.0;
  for (double v : wide.predicted[0]) pred += v;
  EXPECT_NEAR(pred, static_cast<double>(f.dd.y.size()), 1e-6);

  const CountTable back = counts_from_json(ordered_json::parse(to_json(wide).dump()));
  EXPECT_EQ(back.y, wide.y);
  EXPECT_EQ(back.observed, wide.observed);
  EXPECT_EQ(back.families, wide.families);
  EXPECT_EQ(back.predicted, wide.predicted);
}

TEST(Counts, SvgBarsCarryValues) {
  const Fitted f = fit_sim(Family::OIPP);
  CountTable t = observed_counts(f.dd);
  add_predictions(t, f.fm, f.dd);
  const std::string svg = render_svg(t);
  const std::regex bar(R"re(data-y="(\d+)" data-series="([A-Za-z]+)" data-value="([^"]+)")re");
  std::size_t bars = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), bar); it != std::sregex_iterator();
       ++it) {
    const long y = std::stol((*it)[1]);
    const std::string series = (*it)[2];
    const double v = std::stod((*it)[3]);
    const std::size_t i = static_cast<std::size_t>(y - 1);
    if (series == "observed") {
      EXPECT_EQ(v, t.observed[i]);
    } else {
      EXPECT_EQ(series, "OIPP");
      EXPECT_EQ(v, t.predicted[0][i]);
    }
    ++bars;
  }
  EXPECT_EQ(bars, 2 * t.y.size());
}
