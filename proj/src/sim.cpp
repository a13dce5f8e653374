#include "oitrunc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>
#include <limits>

namespace oitrunc {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a number");
  }
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& v) {
  const auto items = split_list(v);
  Eigen::VectorXd out(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = to_double(key, items[i]);
  }
  return out;
}

// Flattens either input format to key -> raw string value.
std::map<std::string, std::string> config_entries(const std::string& text) {
  std::map<std::string, std::string> kv;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    const auto j = nlohmann::json::parse(t);
    for (const auto& [key, value] : j.items()) {
      if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ',';
          joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        kv[key] = joined;
      } else {
        kv[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    return kv;
  }
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: '" + line + "'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

SimConfig default_study(Family dgp_family, std::size_t n, int replications) {
  SimConfig cfg;
  cfg.dgp_family = dgp_family;
  cfg.true_params.beta = Eigen::Vector3d(-2.0, 0.4, 0.2);
  cfg.true_params.gamma = Eigen::VectorXd(Eigen::Vector3d(-21.0, 2.0, 0.5));
  if (is_negbin(dgp_family)) cfg.true_params.alpha = 10.0;
  cfg.n = n;
  cfg.replications = replications;
  cfg.fit_families = {dgp_family, base_family(dgp_family)};
  return cfg;
}

void validate(const SimConfig& cfg) {
  if (!is_one_inflated(cfg.dgp_family)) {
    throw std::invalid_argument("simulation DGP must be OIPP or OIZTNB");
  }
  validate(cfg.dgp_family, cfg.true_params);
  if (cfg.true_params.beta.size() != 3 || cfg.true_params.gamma->size() != 3) {
    throw std::invalid_argument("simulation DGP needs beta and gamma of length 3 (x1, x2)");
  }
  if (cfg.n < 2) throw std::invalid_argument("simulation sample size must be at least 2");
  if (cfg.replications < 1) throw std::invalid_argument("replications must be positive");
  if (cfg.fit_families.empty()) throw std::invalid_argument("no fit families given");
  for (Family f : cfg.fit_families) {
    if (f != cfg.dgp_family && f != base_family(cfg.dgp_family)) {
      throw std::invalid_argument(std::string(to_string(f)) + " is not nested in the " +
                                  std::string(to_string(cfg.dgp_family)) + " DGP");
    }
  }
  if (!(cfg.recipe.x1_sd >= 0.0) || cfg.recipe.x2_prob < 0.0 || cfg.recipe.x2_prob > 1.0) {
    throw std::invalid_argument("invalid regressor recipe");
  }
}

ModelSpec study_spec(Family family) {
  ModelSpec spec;
  spec.family = family;
  spec.response = "y";
  spec.x_terms = {"x1", "x2"};
  if (is_one_inflated(family)) spec.z_terms = {"x1", "x2"};
  return spec;
}

namespace {

struct Draw {
  Dataset data;
  double avg_omega = 0.0;
};

Draw draw_dataset(const SimConfig& cfg, std::uint64_t stream) {
  Generator gen(SeedSpec{cfg.seed.master_seed, stream});
  const std::size_t n = cfg.n;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = gen.normal(cfg.recipe.x1_mean, cfg.recipe.x1_sd);
    x2[i] = gen.bernoulli(cfg.recipe.x2_prob) ? 1.0 : 0.0;
  }
  double omega_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d row(1.0, x1[i], x2[i]);
    const LinkedParams lp = link(cfg.dgp_family, cfg.true_params, row, VectorRef(row));
    omega_sum += *lp.omega;
    y[i] = static_cast<double>(draw(cfg.dgp_family, lp, cfg.true_params.alpha, gen));
  }
  Draw d;
  d.data.column_names = {"y", "x1", "x2"};
  d.data.columns = {std::move(y), std::move(x1), std::move(x2)};
  d.avg_omega = omega_sum / static_cast<double>(n);
  return d;
}

}  // namespace

Dataset simulate_dataset(const SimConfig& cfg, std::uint64_t stream) {
  return draw_dataset(cfg, stream).data;
}

ReplicationResult run_replication(const SimConfig& cfg, std::uint64_t stream) {
  ReplicationResult out;
  out.estimates.resize(cfg.fit_families.size());
  Draw d;
  try {
    d = draw_dataset(cfg, stream);
  } catch (const std::exception& e) {
    out.errors.push_back(std::string("sampling: ") + e.what());
    return out;
  }
  out.avg_true_omega = d.avg_omega;

  for (std::size_t idx = 0; idx < cfg.fit_families.size(); ++idx) {
    const Family f = cfg.fit_families[idx];
    try {
      const ModelSpec spec = study_spec(f);
      FitOptions opts;
      opts.compute_varcov = false;
      const FittedModel fm = maximize(spec, build_design(spec, d.data), opts);
      if (fm.converged) out.estimates[idx] = pack(fm.estimates);
    } catch (const std::exception& e) {
      out.errors.push_back(std::string(to_string(f)) + ": " + e.what());
    }
  }
  return out;
}

BiasTable run_study(const SimConfig& cfg, const std::function<void(int, int)>& progress) {
  validate(cfg);
  const int reps = cfg.replications;
  std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));

  std::mutex mu;
  int done = 0;
  int next = 0;
  const auto worker = [&] {
    while (true) {
      int r;
      {
        std::lock_guard lock(mu);
        if (next >= reps) return;
        r = next++;
      }
      results[static_cast<std::size_t>(r)] = run_replication(cfg, static_cast<std::uint64_t>(r));
      std::lock_guard lock(mu);
      ++done;
      if (progress) progress(done, reps);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(reps)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  BiasTable table;
  table.dgp_family = cfg.dgp_family;
  table.n = cfg.n;
  table.replications = reps;
  for (const auto& r : results) table.avg_true_one_inflation += r.avg_true_omega;
  table.avg_true_one_inflation /= reps;

  const Eigen::Index k = cfg.true_params.beta.size();
  const Eigen::Index p = cfg.true_params.gamma->size();
  for (std::size_t fi = 0; fi < cfg.fit_families.size(); ++fi) {
    const Family f = cfg.fit_families[fi];
    FamilyBias row;
    row.family = f;
    Params truth;
    truth.beta = cfg.true_params.beta;
    if (is_one_inflated(f)) truth.gamma = cfg.true_params.gamma;
    if (is_negbin(f)) truth.alpha = cfg.true_params.alpha;
    const Eigen::VectorXd tv = pack(truth);
    for (Eigen::Index i = 0; i < k; ++i) row.parameters.push_back("beta" + std::to_string(i));
    if (is_one_inflated(f)) {
      for (Eigen::Index i = 0; i < p; ++i) row.parameters.push_back("gamma" + std::to_string(i));
    }
    if (is_negbin(f)) row.parameters.emplace_back("alpha");
    row.true_values.assign(tv.data(), tv.data() + tv.size());

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(tv.size());
    for (const auto& r : results) {
      ++row.attempted;
      if (r.estimates[fi]) {
        ++row.converged;
        sum += *r.estimates[fi];
      }
    }
    for (const auto& r : results) {
      for (const auto& e : r.errors) {
        if (e.starts_with(std::string(to_string(f)) + ":") || e.starts_with("sampling")) {
          ++row.failed;
        }
      }
    }
    for (Eigen::Index i = 0; i < tv.size(); ++i) {
      if (row.converged == 0) {
        row.mean_estimates.push_back(std::numeric_limits<double>::quiet_NaN());
        row.percent_bias.emplace_back();
        continue;
      }
      const double m = sum[i] / row.converged;
      row.mean_estimates.push_back(m);
      if (tv[i] == 0.0) {
        row.percent_bias.emplace_back();
      } else {
        row.percent_bias.emplace_back(100.0 * (m - tv[i]) / tv[i]);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<SimConfig> parse_sim_config(const std::string& text) {
  static const std::vector<std::string> known = {
      "dgp_family", "beta", "gamma", "alpha", "n", "replications", "fit_families",
      "master_seed", "threads", "x1_mean", "x1_sd", "x2_prob"};
  const auto kv = config_entries(text);
  for (const auto& [key, _] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  const Family dgp = parse_family(get("dgp_family").value_or("oipp"));
  SimConfig base = default_study(dgp, 200, 1000);
  if (auto v = get("beta")) base.true_params.beta = to_vector("beta", *v);
  if (auto v = get("gamma")) base.true_params.gamma = to_vector("gamma", *v);
  if (auto v = get("alpha")) {
    if (!is_negbin(dgp)) throw std::invalid_argument("alpha given for a Poisson DGP");
    base.true_params.alpha = to_double("alpha", *v);
  }
  if (auto v = get("replications")) base.replications = static_cast<int>(to_double("replications", *v));
  if (auto v = get("fit_families")) {
    base.fit_families.clear();
    for (const auto& f : split_list(*v)) base.fit_families.push_back(parse_family(f));
  }
  if (auto v = get("master_seed")) base.seed.master_seed = std::stoull(*v);
  if (auto v = get("threads")) base.threads = static_cast<unsigned>(to_double("threads", *v));
  if (auto v = get("x1_mean")) base.recipe.x1_mean = to_double("x1_mean", *v);
  if (auto v = get("x1_sd")) base.recipe.x1_sd = to_double("x1_sd", *v);
  if (auto v = get("x2_prob")) base.recipe.x2_prob = to_double("x2_prob", *v);

  std::vector<SimConfig> out;
  const auto sizes = split_list(get("n").value_or("200"));
  for (const auto& s : sizes) {
    SimConfig c = base;
    const double nd = to_double("n", s);
    if (nd < 2 || nd != std::floor(nd)) throw std::invalid_argument("invalid sample size " + s);
    c.n = static_cast<std::size_t>(nd);
    validate(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace oitrunc
