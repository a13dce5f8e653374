#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oitrunc/design.hpp"
#include "oitrunc/dists.hpp"
#include "oitrunc/fit.hpp"
#include "oitrunc/rng.hpp"

namespace oitrunc {

/// x1 ~ Normal(x1_mean, x1_sd), x2 ~ Bernoulli(x2_prob); X = Z = (1, x1, x2).
struct RegressorRecipe {
  double x1_mean = 10.0;
  double x1_sd = 1.0;
  double x2_prob = 0.5;
};

struct SimConfig {
  Family dgp_family = Family::OIPP;
  Params true_params;
  std::size_t n = 200;
  int replications = 1000;
  std::vector<Family> fit_families;
  SeedSpec seed;
  RegressorRecipe recipe;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;
};

/// The DGP used for the one-inflated bias study: beta = (-2, 0.4, 0.2),
/// gamma = (-21, 2, 0.5), plus alpha = 10 for OIZTNB.
SimConfig default_study(Family dgp_family, std::size_t n, int replications);

/// Throws std::invalid_argument for inconsistent configurations.
void validate(const SimConfig& cfg);

/// Model spec used for every fit in a study: response "y", X = Z = (x1, x2).
ModelSpec study_spec(Family family);

/// Replication `stream` of the study: fresh regressors and responses.
Dataset simulate_dataset(const SimConfig& cfg, std::uint64_t stream);

struct FamilyBias {
  Family family = Family::PP;
  std::vector<std::string> parameters;
  std::vector<double> true_values;
  std::vector<double> mean_estimates;
  /// 100 * mean(estimate - truth) / truth, divided by the signed truth so a
  /// negative coefficient pushed towards zero shows a negative bias. Empty
  /// where the truth is zero or no replication converged.
  std::vector<std::optional<double>> percent_bias;
  int attempted = 0;
  int converged = 0;
  int failed = 0;  // threw during sampling or fitting
};

struct BiasTable {
  Family dgp_family = Family::OIPP;
  std::size_t n = 0;
  int replications = 0;
  std::vector<FamilyBias> rows;
  /// Mean over replications of the average true omega_i.
  double avg_true_one_inflation = 0.0;
};

/// Estimates from one replication, one entry per fit family (empty when the
/// fit failed or did not converge).
struct ReplicationResult {
  std::vector<std::optional<Eigen::VectorXd>> estimates;
  double avg_true_omega = 0.0;
  std::vector<std::string> errors;
};

ReplicationResult run_replication(const SimConfig& cfg, std::uint64_t stream);

BiasTable run_study(const SimConfig& cfg,
                    const std::function<void(int done, int total)>& progress = {});

/// Parses a flat key=value file or a JSON object. The `n` key may list
/// several sample sizes; one config is returned per size.
std::vector<SimConfig> parse_sim_config(const std::string& text);

}  // namespace oitrunc
