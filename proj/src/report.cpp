#include "oitrunc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oitrunc {

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string opt_fixed(std::optional<double> x, const char* f = "%.4f") {
  if (!x || !std::isfinite(*x)) return "NA";
  return fmt(f, *x);
}

std::string opt_csv(std::optional<double> x) {
  if (!x) return "";
  return format_double(*x);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

ordered_json num(std::optional<double> x) {
  if (!x) return nullptr;
  return num(*x);
}

std::optional<double> opt_num(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

double nan_num(const ordered_json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Eigen::VectorXd vec_from(const ordered_json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = nan_num(j[i]);
  return v;
}

const char* aggregation_name(AggregationKind k) {
  switch (k) {
    case AggregationKind::AverageEffects: return "ae";
    case AggregationKind::EffectAtMeans: return "em";
    case AggregationKind::AtPoint: return "point";
  }
  return "ae";
}

AggregationKind aggregation_from(const std::string& s) {
  if (s == "ae") return AggregationKind::AverageEffects;
  if (s == "em") return AggregationKind::EffectAtMeans;
  if (s == "point") return AggregationKind::AtPoint;
  throw std::invalid_argument("unknown aggregation '" + s + "'");
}

const char* stars_footer = "Signif. codes: *** 1%, ** 5%, * 10%\n";

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

OutputFormat parse_format(const std::string& s) {
  if (s == "text") return OutputFormat::Text;
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  throw std::invalid_argument("unknown output format '" + s + "' (expected text, json or csv)");
}

std::string significance_stars(std::optional<double> p) {
  if (!p || !std::isfinite(*p)) return "";
  if (*p < 0.01) return "***";
  if (*p < 0.05) return "**";
  if (*p < 0.10) return "*";
  return "";
}

// ---- summaries ----

std::string format_text(const SummaryTable& t) {
  std::ostringstream os;
  os << "Family: " << to_string(t.family) << "   n = " << t.n
     << "   log-likelihood = " << fmt("%.4f", t.loglik)
     << "   converged: " << (t.converged ? "yes" : "no") << "\n\n";
  std::size_t w = 4;
  for (const auto& r : t.rows) w = std::max(w, r.name.size());
  os << pad_right("term", w) << pad_left("estimate", 12) << pad_left("std.err", 11)
     << pad_left("z", 10) << pad_left("p", 9) << "\n";
  for (const auto& r : t.rows) {
    os << pad_right(r.name, w) << pad_left(fmt("%.4f", r.estimate), 12)
       << pad_left(opt_fixed(r.se), 11) << pad_left(opt_fixed(r.z, "%.3f"), 10)
       << pad_left(opt_fixed(r.p, "%.4f"), 9) << " " << significance_stars(r.p) << "\n";
  }
  os << "\n";
  if (t.avg_one_inflation) {
    os << "Average one-inflation: " << fmt("%.2f", 100.0 * *t.avg_one_inflation) << "%\n";
  }
  if (t.avg_abs_one_inflation) {
    os << "Average absolute one-inflation: " << fmt("%.2f", 100.0 * *t.avg_abs_one_inflation)
       << "%\n";
  }
  os << stars_footer;
  return os.str();
}

std::string format_csv(const SummaryTable& t) {
  std::ostringstream os;
  os << "term,estimate,se,z,p\n";
  for (const auto& r : t.rows) {
    os << csv_quote(r.name) << ',' << format_double(r.estimate) << ',' << opt_csv(r.se) << ','
       << opt_csv(r.z) << ',' << opt_csv(r.p) << "\n";
  }
  return os.str();
}

ordered_json to_json(const SummaryTable& t) {
  ordered_json j;
  j["family"] = to_string(t.family);
  ordered_json names = ordered_json::array(), est = ordered_json::array(),
               se = ordered_json::array(), z = ordered_json::array(), p = ordered_json::array();
  for (const auto& r : t.rows) {
    names.push_back(r.name);
    est.push_back(num(r.estimate));
    se.push_back(num(r.se));
    z.push_back(num(r.z));
    p.push_back(num(r.p));
  }
  j["parameters"] = names;
  j["estimates"] = est;
  j["se"] = se;
  j["z"] = z;
  j["p"] = p;
  j["loglik"] = num(t.loglik);
  j["converged"] = t.converged;
  j["avg_one_inflation"] = num(t.avg_one_inflation);
  j["avg_abs_one_inflation"] = num(t.avg_abs_one_inflation);
  j["n"] = t.n;
  return j;
}

SummaryTable summary_from_json(const ordered_json& j) {
  SummaryTable t;
  t.family = parse_family(j.at("family").get<std::string>());
  const auto& names = j.at("parameters");
  for (std::size_t i = 0; i < names.size(); ++i) {
    SummaryRow r;
    r.name = names[i].get<std::string>();
    r.estimate = nan_num(j.at("estimates")[i]);
    r.se = opt_num(j.at("se")[i]);
    r.z = opt_num(j.at("z")[i]);
    r.p = opt_num(j.at("p")[i]);
    t.rows.push_back(std::move(r));
  }
  t.loglik = nan_num(j.at("loglik"));
  t.converged = j.at("converged").get<bool>();
  t.avg_one_inflation = opt_num(j.at("avg_one_inflation"));
  t.avg_abs_one_inflation = opt_num(j.at("avg_abs_one_inflation"));
  t.n = j.at("n").get<std::size_t>();
  return t;
}

// ---- marginal effects ----

std::string format_text(const MarginalEffects& m) {
  std::ostringstream os;
  os << "Marginal effects on E[y], family " << to_string(m.family) << ", aggregation "
     << aggregation_name(m.aggregation.kind) << "\n\n";
  std::size_t w = 9;
  for (const auto& r : m.rows) w = std::max(w, r.name.size());
  os << pad_right("regressor", w) << pad_left("type", 12) << pad_left("effect", 12)
     << pad_left("std.err", 11) << pad_left("z", 10) << pad_left("p", 9) << "\n";
  for (const auto& r : m.rows) {
    os << pad_right(r.name, w)
       << pad_left(r.kind == EffectKind::Dummy ? "dummy" : "continuous", 12)
       << pad_left(fmt("%.4f", r.effect), 12) << pad_left(opt_fixed(r.se), 11)
       << pad_left(opt_fixed(r.z, "%.3f"), 10) << pad_left(opt_fixed(r.p, "%.4f"), 9) << " "
       << significance_stars(r.p) << "\n";
  }
  if (!m.se_available) os << "\nStandard errors unavailable: no variance-covariance matrix.\n";
  os << "\n" << stars_footer;
  return os.str();
}

std::string format_csv(const MarginalEffects& m) {
  std::ostringstream os;
  os << "regressor,type,effect,se,z,p\n";
  for (const auto& r : m.rows) {
    os << csv_quote(r.name) << ',' << (r.kind == EffectKind::Dummy ? "dummy" : "continuous")
       << ',' << format_double(r.effect) << ',' << opt_csv(r.se) << ',' << opt_csv(r.z) << ','
       << opt_csv(r.p) << "\n";
  }
  return os.str();
}

ordered_json to_json(const MarginalEffects& m) {
  ordered_json j;
  j["family"] = to_string(m.family);
  j["aggregation"] = aggregation_name(m.aggregation.kind);
  if (m.aggregation.kind == AggregationKind::AtPoint) {
    j["x_row"] = vec_json(m.aggregation.x_row);
    j["z_row"] = vec_json(m.aggregation.z_row);
  }
  j["se_available"] = m.se_available;
  ordered_json rows = ordered_json::array();
  for (const auto& r : m.rows) {
    rows.push_back({{"regressor", r.name},
                    {"type", r.kind == EffectKind::Dummy ? "dummy" : "continuous"},
                    {"effect", num(r.effect)},
                    {"se", num(r.se)},
                    {"z", num(r.z)},
                    {"p", num(r.p)}});
  }
  j["effects"] = rows;
  return j;
}

MarginalEffects margins_from_json(const ordered_json& j) {
  MarginalEffects m;
  m.family = parse_family(j.at("family").get<std::string>());
  m.aggregation.kind = aggregation_from(j.at("aggregation").get<std::string>());
  if (j.contains("x_row")) m.aggregation.x_row = vec_from(j["x_row"]);
  if (j.contains("z_row")) m.aggregation.z_row = vec_from(j["z_row"]);
  m.se_available = j.at("se_available").get<bool>();
  for (const auto& r : j.at("effects")) {
    MarginalEffectRow row;
    row.name = r.at("regressor").get<std::string>();
    row.kind = r.at("type").get<std::string>() == "dummy" ? EffectKind::Dummy
                                                           : EffectKind::Continuous;
    row.effect = nan_num(r.at("effect"));
    row.se = opt_num(r.at("se"));
    row.z = opt_num(r.at("z"));
    row.p = opt_num(r.at("p"));
    m.rows.push_back(std::move(row));
  }
  return m;
}

// ---- tests ----

std::string format_text(const std::vector<NamedTest>& tests) {
  std::ostringstream os;
  std::size_t w = 4;
  for (const auto& t : tests) w = std::max(w, t.name.size());
  os << pad_right("test", w) << pad_left("statistic", 13) << pad_left("dof", 5)
     << pad_left("p", 12) << "      method\n";
  for (const auto& t : tests) {
    const std::string stars = significance_stars(t.result.p_value);
    os << pad_right(t.name, w) << pad_left(fmt("%.4f", t.result.statistic), 13)
       << pad_left(std::to_string(t.result.dof), 5)
       << pad_left(fmt("%.4g", t.result.p_value), 12) << " " << pad_right(stars, 4) << " "
       << t.result.method << "\n";
  }
  for (const auto& t : tests) {
    if (t.result.warning) os << "warning (" << t.name << "): " << *t.result.warning << "\n";
  }
  os << stars_footer;
  return os.str();
}

std::string format_csv(const std::vector<NamedTest>& tests) {
  std::ostringstream os;
  os << "test,method,statistic,dof,p\n";
  for (const auto& t : tests) {
    os << csv_quote(t.name) << ',' << t.result.method << ',' << format_double(t.result.statistic)
       << ',' << t.result.dof << ',' << format_double(t.result.p_value) << "\n";
  }
  return os.str();
}

ordered_json to_json(const std::vector<NamedTest>& tests) {
  ordered_json a = ordered_json::array();
  for (const auto& t : tests) {
    ordered_json j;
    j["test"] = t.name;
    j["method"] = t.result.method;
    j["statistic"] = num(t.result.statistic);
    j["dof"] = t.result.dof;
    j["p"] = num(t.result.p_value);
    j["warning"] = t.result.warning ? ordered_json(*t.result.warning) : ordered_json(nullptr);
    a.push_back(std::move(j));
  }
  return ordered_json{{"tests", a}};
}

std::vector<NamedTest> tests_from_json(const ordered_json& j) {
  std::vector<NamedTest> out;
  for (const auto& t : j.at("tests")) {
    NamedTest nt;
    nt.name = t.at("test").get<std::string>();
    nt.result.method = t.at("method").get<std::string>();
    nt.result.statistic = nan_num(t.at("statistic"));
    nt.result.dof = t.at("dof").get<int>();
    nt.result.p_value = nan_num(t.at("p"));
    if (!t.at("warning").is_null()) nt.result.warning = t["warning"].get<std::string>();
    out.push_back(std::move(nt));
  }
  return out;
}

// ---- counts ----

CountTable observed_counts(const DesignData& dd, std::optional<long> y_max) {
  long ymax = 1;
  for (long v : dd.y) ymax = std::max(ymax, v);
  if (y_max) {
    if (*y_max < 1) throw std::invalid_argument("y_max must be at least 1");
    ymax = *y_max;
  }
  CountTable t;
  t.observed.assign(static_cast<std::size_t>(ymax), 0.0);
  for (long v : dd.y) {
    if (v <= ymax) t.observed[static_cast<std::size_t>(v - 1)] += 1.0;
  }
  for (long y = 1; y <= ymax; ++y) t.y.push_back(y);
  return t;
}

void add_predictions(CountTable& t, const FittedModel& fm, const DesignData& dd) {
  const long ymax = t.y.empty() ? 0 : t.y.back();
  std::vector<double> pred = predicted_counts(fm, dd, ymax);
  pred.resize(t.y.size(), 0.0);
  t.families.push_back(fm.spec.family);
  t.predicted.push_back(std::move(pred));
}

std::string format_text(const CountTable& t) {
  std::ostringstream os;
  os << pad_left("y", 6) << pad_left("observed", 12);
  for (Family f : t.families) os << pad_left(std::string(to_string(f)), 12);
  os << "\n";
  for (std::size_t i = 0; i < t.y.size(); ++i) {
    os << pad_left(std::to_string(t.y[i]), 6) << pad_left(fmt("%.0f", t.observed[i]), 12);
    for (const auto& col : t.predicted) os << pad_left(fmt("%.3f", col[i]), 12);
    os << "\n";
  }
  return os.str();
}

std::string format_csv(const CountTable& t) {
  std::ostringstream os;
  os << "y,observed";
  for (Family f : t.families) os << ',' << to_string(f);
  os << "\n";
  for (std::size_t i = 0; i < t.y.size(); ++i) {
    os << t.y[i] << ',' << format_double(t.observed[i]);
    for (const auto& col : t.predicted) os << ',' << format_double(col[i]);
    os << "\n";
  }
  return os.str();
}

ordered_json to_json(const CountTable& t) {
  ordered_json j;
  j["y"] = t.y;
  ordered_json obs = ordered_json::array();
  for (double v : t.observed) obs.push_back(num(v));
  j["observed"] = obs;
  ordered_json pred = ordered_json::object();
  for (std::size_t f = 0; f < t.families.size(); ++f) {
    ordered_json col = ordered_json::array();
    for (double v : t.predicted[f]) col.push_back(num(v));
    pred[std::string(to_string(t.families[f]))] = col;
  }
  j["predicted"] = pred;
  return j;
}

CountTable counts_from_json(const ordered_json& j) {
  CountTable t;
  t.y = j.at("y").get<std::vector<long>>();
  for (const auto& v : j.at("observed")) t.observed.push_back(nan_num(v));
  for (const auto& [name, col] : j.at("predicted").items()) {
    t.families.push_back(parse_family(name));
    std::vector<double> c;
    for (const auto& v : col) c.push_back(nan_num(v));
    t.predicted.push_back(std::move(c));
  }
  return t;
}

std::string render_svg(const CountTable& t) {
  static const char* palette[] = {"#4d4d4d", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};
  const std::size_t groups = t.y.size();
  const std::size_t series = 1 + t.families.size();
  double top = 1.0;
  for (double v : t.observed) top = std::max(top, v);
  for (const auto& col : t.predicted) {
    for (double v : col) top = std::max(top, v);
  }

  const double bar_w = 8.0, gap = 6.0;
  const double group_w = bar_w * static_cast<double>(series) + gap;
  const double left = 70.0, right = 20.0, top_margin = 40.0, bottom = 50.0, plot_h = 360.0;
  const double width = left + right + group_w * static_cast<double>(std::max<std::size_t>(groups, 1));
  const double height = top_margin + plot_h + bottom;
  const auto ypix = [&](double v) { return top_margin + plot_h * (1.0 - v / top); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt("%.0f", width)
     << "\" height=\"" << fmt("%.0f", height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes and ticks.
  os << "<line x1=\"" << left << "\" y1=\"" << top_margin << "\" x2=\"" << left << "\" y2=\""
     << top_margin + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top_margin + plot_h << "\" x2=\"" << width - right
     << "\" y2=\"" << top_margin + plot_h << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = top * k / 5.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt("%.1f", ypix(v) + 4)
       << "\" text-anchor=\"end\">" << fmt("%.0f", v) << "</text>\n";
  }
  os << "<text x=\"" << fmt("%.1f", left + (width - left - right) / 2) << "\" y=\""
     << height - 10 << "\" text-anchor=\"middle\">y</text>\n";
  os << "<text x=\"16\" y=\"" << fmt("%.1f", top_margin + plot_h / 2)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fmt("%.1f", top_margin + plot_h / 2)
     << ")\">count</text>\n";

  // Legend.
  double lx = left;
  for (std::size_t s = 0; s < series; ++s) {
    const std::string label = s == 0 ? "observed" : std::string(to_string(t.families[s - 1]));
    os << "<rect x=\"" << lx << "\" y=\"12\" width=\"10\" height=\"10\" fill=\""
       << palette[s % 5] << "\"/><text x=\"" << lx + 14 << "\" y=\"21\">" << label << "</text>\n";
    lx += 20.0 + 7.0 * static_cast<double>(label.size());
  }

  for (std::size_t g = 0; g < groups; ++g) {
    const double gx = left + gap / 2 + group_w * static_cast<double>(g);
    for (std::size_t s = 0; s < series; ++s) {
      const double v = s == 0 ? t.observed[g] : t.predicted[s - 1][g];
      const std::string label = s == 0 ? "observed" : std::string(to_string(t.families[s - 1]));
      const double y0 = ypix(std::max(v, 0.0));
      os << "<rect x=\"" << fmt("%.1f", gx + bar_w * static_cast<double>(s)) << "\" y=\""
         << fmt("%.3f", y0) << "\" width=\"" << bar_w << "\" height=\""
         << fmt("%.3f", top_margin + plot_h - y0) << "\" fill=\"" << palette[s % 5]
         << "\" data-y=\"" << t.y[g] << "\" data-series=\"" << label << "\" data-value=\""
         << format_double(v) << "\"/>\n";
    }
    if (groups <= 30 || t.y[g] % 5 == 0 || g == 0) {
      os << "<text x=\"" << fmt("%.1f", gx + bar_w * static_cast<double>(series) / 2) << "\" y=\""
         << top_margin + plot_h + 15 << "\" text-anchor=\"middle\">" << t.y[g] << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

// ---- simulation ----

namespace {

std::vector<std::string> bias_columns(const std::vector<BiasTable>& tables) {
  std::vector<std::string> cols;
  const auto add = [&](const std::string& name) {
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
  };
  // beta, gamma, alpha order regardless of which family shows up first.
  for (const char* prefix : {"beta", "gamma", "alpha"}) {
    for (const auto& t : tables) {
      for (const auto& r : t.rows) {
        for (const auto& p : r.parameters) {
          if (p.starts_with(prefix)) add(p);
        }
      }
    }
  }
  return cols;
}

std::optional<double> bias_of(const FamilyBias& r, const std::string& param) {
  for (std::size_t i = 0; i < r.parameters.size(); ++i) {
    if (r.parameters[i] == param) return r.percent_bias[i];
  }
  return std::nullopt;
}

}  // namespace

std::string format_text(const std::vector<BiasTable>& tables) {
  std::ostringstream os;
  const auto cols = bias_columns(tables);
  os << "Percent biases of the MLEs";
  if (!tables.empty()) {
    os << " (DGP " << to_string(tables.front().dgp_family) << ", "
       << tables.front().replications << " replications)";
  }
  os << "\n\n";
  os << pad_right("model", 8) << pad_left("n", 6);
  for (const auto& c : cols) os << pad_left(c, 10);
  os << pad_left("converged", 11) << pad_left("avg omega", 11) << "\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      os << pad_right(std::string(to_string(r.family)), 8) << pad_left(std::to_string(t.n), 6);
      for (const auto& c : cols) {
        const bool has = std::find(r.parameters.begin(), r.parameters.end(), c) != r.parameters.end();
        os << pad_left(has ? opt_fixed(bias_of(r, c), "%.2f") : "", 10);
      }
      os << pad_left(std::to_string(r.converged) + "/" + std::to_string(r.attempted), 11)
         << pad_left(fmt("%.4f", t.avg_true_one_inflation), 11) << "\n";
    }
  }
  return os.str();
}

std::string format_csv(const std::vector<BiasTable>& tables) {
  std::ostringstream os;
  os << "dgp,model,n,replications,parameter,true_value,mean_estimate,percent_bias,converged,"
        "failed,avg_true_one_inflation\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.parameters.size(); ++i) {
        os << to_string(t.dgp_family) << ',' << to_string(r.family) << ',' << t.n << ','
           << t.replications << ',' << r.parameters[i] << ',' << format_double(r.true_values[i])
           << ',' << format_double(r.mean_estimates[i]) << ',' << opt_csv(r.percent_bias[i])
           << ',' << r.converged << ',' << r.failed << ','
           << format_double(t.avg_true_one_inflation) << "\n";
      }
    }
  }
  return os.str();
}

ordered_json to_json(const std::vector<BiasTable>& tables) {
  ordered_json a = ordered_json::array();
  for (const auto& t : tables) {
    ordered_json j;
    j["dgp_family"] = to_string(t.dgp_family);
    j["n"] = t.n;
    j["replications"] = t.replications;
    j["avg_true_one_inflation"] = num(t.avg_true_one_inflation);
    ordered_json rows = ordered_json::array();
    for (const auto& r : t.rows) {
      ordered_json rj;
      rj["family"] = to_string(r.family);
      rj["parameters"] = r.parameters;
      ordered_json tv = ordered_json::array(), me = ordered_json::array(),
                   pb = ordered_json::array();
      for (double v : r.true_values) tv.push_back(num(v));
      for (double v : r.mean_estimates) me.push_back(num(v));
      for (const auto& v : r.percent_bias) pb.push_back(num(v));
      rj["true_values"] = tv;
      rj["mean_estimates"] = me;
      rj["percent_bias"] = pb;
      rj["attempted"] = r.attempted;
      rj["converged"] = r.converged;
      rj["failed"] = r.failed;
      rows.push_back(std::move(rj));
    }
    j["rows"] = rows;
    a.push_back(std::move(j));
  }
  return ordered_json{{"studies", a}};
}

std::vector<BiasTable> bias_from_json(const ordered_json& j) {
  std::vector<BiasTable> out;
  for (const auto& tj : j.at("studies")) {
    BiasTable t;
    t.dgp_family = parse_family(tj.at("dgp_family").get<std::string>());
    t.n = tj.at("n").get<std::size_t>();
    t.replications = tj.at("replications").get<int>();
    t.avg_true_one_inflation = nan_num(tj.at("avg_true_one_inflation"));
    for (const auto& rj : tj.at("rows")) {
      FamilyBias r;
      r.family = parse_family(rj.at("family").get<std::string>());
      r.parameters = rj.at("parameters").get<std::vector<std::string>>();
      for (const auto& v : rj.at("true_values")) r.true_values.push_back(nan_num(v));
      for (const auto& v : rj.at("mean_estimates")) r.mean_estimates.push_back(nan_num(v));
      for (const auto& v : rj.at("percent_bias")) r.percent_bias.push_back(opt_num(v));
      r.attempted = rj.at("attempted").get<int>();
      r.converged = rj.at("converged").get<int>();
      r.failed = rj.at("failed").get<int>();
      t.rows.push_back(std::move(r));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace oitrunc
