// Command-line front end: fit, margins, test, predict, plot, simulate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oitrunc/report.hpp"

namespace fs = std::filesystem;
using namespace oitrunc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cmd {
  std::string data;
  std::string family;
  std::string response;
  std::vector<std::string> x;
  std::vector<std::string> z;
  std::vector<std::string> continuous;
  std::vector<std::string> families;
  std::string aggregation = "ae";
  std::string format = "text";
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> ymax;
  unsigned threads = 1;
  bool pseudo_inverse = false;
  bool progress = false;
};

void add_data_options(CLI::App* sub, Cmd& c) {
  sub->add_option("--data", c.data, "CSV file with a header row")->required();
  sub->add_option("--response", c.response, "Response column (positive integers)")->required();
  sub->add_option("--x", c.x, "Mean regressors, comma separated")->delimiter(',');
  sub->add_option("--z", c.z, "One-inflation regressors (defaults to --x)")->delimiter(',');
  sub->add_option("--continuous", c.continuous,
                  "Treat a 0/1 column as continuous in marginal effects")
      ->delimiter(',');
  sub->add_flag("--pseudo-inverse", c.pseudo_inverse,
                "Use a pseudo-inverse when the Hessian is singular");
}

void add_family_option(CLI::App* sub, Cmd& c) {
  sub->add_option("--family", c.family, "pp, ztnb, oipp or oiztnb")
      ->required()
      ->check(CLI::IsMember({"pp", "ztnb", "oipp", "oiztnb"}, CLI::ignore_case));
}

void add_output_options(CLI::App* sub, Cmd& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  sub->add_option("--out", c.out, "Output file (default: standard output)");
}

void write_output(const std::string& content, const std::string& path) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write output file '" + path + "'");
  f << content;
}

template <class T>
std::string render(const T& value, OutputFormat fmt) {
  switch (fmt) {
    case OutputFormat::Text: return format_text(value);
    case OutputFormat::Csv: return format_csv(value);
    case OutputFormat::Json: return to_json(value).dump(2) + "\n";
  }
  return {};
}

Dataset load(const Cmd& c) {
  if (!fs::exists(c.data)) throw InputError("data file '" + c.data + "' does not exist");
  return load_csv(c.data);
}

ModelSpec spec_for(const Cmd& c, Family family) {
  ModelSpec spec;
  spec.family = family;
  spec.response = c.response;
  spec.x_terms = c.x;
  if (is_one_inflated(family)) spec.z_terms = c.z.empty() ? c.x : c.z;
  return spec;
}

FitOptions fit_options(const Cmd& c) {
  FitOptions o;
  o.allow_pseudo_inverse = c.pseudo_inverse;
  return o;
}

void report_warnings(const FittedModel& fm) {
  for (const auto& w : fm.warnings) {
    std::cerr << "warning (" << to_string(fm.spec.family) << "): " << w << "\n";
  }
  if (!fm.converged) {
    std::cerr << "warning (" << to_string(fm.spec.family)
              << "): optimizer did not converge: " << fm.message << "\n";
  }
}

struct Fitted {
  DesignData dd;
  FittedModel fm;
};

Fitted fit_one(const Cmd& c, const Dataset& data, Family family) {
  const ModelSpec spec = spec_for(c, family);
  DesignData dd = build_design(spec, data, c.continuous);
  FittedModel fm = maximize(spec, dd, fit_options(c));
  report_warnings(fm);
  return {std::move(dd), std::move(fm)};
}

int cmd_fit(const Cmd& c) {
  const Dataset data = load(c);
  const Fitted f = fit_one(c, data, parse_family(c.family));
  write_output(render(summarize(f.fm, f.dd), parse_format(c.format)), c.out);
  return f.fm.converged ? kExitOk : kExitNotConverged;
}

int cmd_margins(const Cmd& c) {
  const Dataset data = load(c);
  const Fitted f = fit_one(c, data, parse_family(c.family));
  Aggregation agg;
  agg.kind = c.aggregation == "em" ? AggregationKind::EffectAtMeans
                                   : AggregationKind::AverageEffects;
  write_output(render(margins(f.fm, f.dd, agg), parse_format(c.format)), c.out);
  return f.fm.converged ? kExitOk : kExitNotConverged;
}

int cmd_test(const Cmd& c) {
  const Dataset data = load(c);
  const Family requested = parse_family(c.family);
  const Family oi = inflated_family(requested);
  const Family base = base_family(requested);

  const Fitted fb = fit_one(c, data, base);
  const ModelSpec oi_spec = spec_for(c, oi);
  const DesignData dd = build_design(oi_spec, data, c.continuous);
  const FittedModel fo = maximize(oi_spec, dd, fit_options(c));
  report_warnings(fo);

  std::vector<NamedTest> tests;
  tests.push_back({"one_wald", one_wald(fo)});
  tests.push_back({"one_lrt", one_lrt(fo, fb.fm)});
  std::set<std::string> seen;
  for (const auto& names : {oi_spec.x_terms, oi_spec.z_terms}) {
    for (const auto& r : names) {
      if (seen.insert(r).second) tests.push_back({"signif:" + r, signif_wald(fo, r)});
    }
  }
  write_output(render(tests, parse_format(c.format)), c.out);
  return fo.converged && fb.fm.converged ? kExitOk : kExitNotConverged;
}

int cmd_predict(const Cmd& c) {
  const Dataset data = load(c);
  const Fitted f = fit_one(c, data, parse_family(c.family));
  CountTable t = observed_counts(f.dd, c.ymax);
  add_predictions(t, f.fm, f.dd);
  write_output(render(t, parse_format(c.format)), c.out);
  return f.fm.converged ? kExitOk : kExitNotConverged;
}

int cmd_plot(const Cmd& c) {
  const Dataset data = load(c);
  if (c.families.size() > 4) throw InputError("plot overlays at most four families");
  std::vector<Family> fams;
  for (const auto& s : c.families) fams.push_back(parse_family(s));

  ModelSpec obs_spec = spec_for(c, Family::PP);
  const DesignData obs_dd = build_design(obs_spec, data, c.continuous);
  CountTable t = observed_counts(obs_dd, c.ymax);
  bool all_converged = true;
  for (Family f : fams) {
    const Fitted fit = fit_one(c, data, f);
    all_converged = all_converged && fit.fm.converged;
    add_predictions(t, fit.fm, fit.dd);
  }

  fs::path csv_path = c.out;
  if (csv_path.extension() == ".svg") csv_path.replace_extension(".csv");
  if (csv_path.extension() != ".csv") csv_path += ".csv";
  fs::path svg_path = csv_path;
  svg_path.replace_extension(".svg");
  write_output(format_csv(t), csv_path.string());
  write_output(render_svg(t), svg_path.string());
  std::cerr << "wrote " << csv_path.string() << " and " << svg_path.string() << "\n";
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_simulate(const Cmd& c) {
  std::ifstream f(c.config);
  if (!f) throw InputError("cannot open config file '" + c.config + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::vector<SimConfig> configs;
  try {
    configs = parse_sim_config(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config file is not valid JSON: ") + e.what());
  }
  std::vector<BiasTable> tables;
  for (auto& cfg : configs) {
    if (c.seed) cfg.seed.master_seed = *c.seed;
    if (c.threads > 1) cfg.threads = c.threads;
    std::function<void(int, int)> progress;
    if (c.progress) {
      progress = [&](int done, int total) {
        if (done % 50 == 0 || done == total) {
          std::cerr << "n=" << cfg.n << ": " << done << "/" << total << "\n";
        }
      };
    }
    tables.push_back(run_study(cfg, progress));
  }
  write_output(render(tables, parse_format(c.format)), c.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression for zero-truncated, one-inflated count data"};
  app.require_subcommand(1);
  Cmd c;

  auto* fit = app.add_subcommand("fit", "Fit a model and print the coefficient table");
  add_data_options(fit, c);
  add_family_option(fit, c);
  add_output_options(fit, c);

  auto* mar = app.add_subcommand("margins", "Marginal effects with delta-method errors");
  add_data_options(mar, c);
  add_family_option(mar, c);
  add_output_options(mar, c);
  mar->add_option("--aggregation", c.aggregation, "ae (average effects) or em (at means)")
      ->check(CLI::IsMember({"ae", "em"}));

  auto* test = app.add_subcommand("test", "Wald and likelihood-ratio tests of no one-inflation");
  add_data_options(test, c);
  add_family_option(test, c);
  add_output_options(test, c);

  auto* pred = app.add_subcommand("predict", "Observed and predicted frequencies of each count");
  add_data_options(pred, c);
  add_family_option(pred, c);
  add_output_options(pred, c);
  pred->add_option("--ymax", c.ymax, "Largest count to tabulate (default: max observed)")
      ->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Barplot of observed and predicted counts (CSV + SVG)");
  add_data_options(plot, c);
  plot->add_option("--families", c.families, "Up to four families to overlay")->delimiter(',');
  plot->add_option("--out", c.out, "Output path; .csv and .svg files are written")->required();
  plot->add_option("--ymax", c.ymax, "Largest count to plot (default: max observed)")
      ->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo percent-bias study");
  sim->add_option("--config", c.config, "key=value or JSON study configuration")->required();
  sim->add_option("--seed", c.seed, "Master seed (overrides the config)");
  sim->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--progress", c.progress, "Report progress on standard error");
  add_output_options(sim, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(c);
    if (*mar) return cmd_margins(c);
    if (*test) return cmd_test(c);
    if (*pred) return cmd_predict(c);
    if (*plot) return cmd_plot(c);
    if (*sim) return cmd_simulate(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
