#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oitrunc/design.hpp"
#include "oitrunc/dists.hpp"

namespace oitrunc {

struct FitOptions {
  double gradient_tolerance = 1e-8;
  /// Defaults to 200 x parameter count.
  std::optional<int> max_iterations;
  double fd_step_scale = std::cbrt(std::numeric_limits<double>::epsilon());
  /// Relative step for the numeric Hessian behind the variance-covariance.
  double hessian_step_scale = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  std::optional<Params> warm_start;
  /// For one-inflated families, start from the base model's estimates with
  /// gamma = 0, once fitted to all rows and once to the rows with y >= 2,
  /// and keep the better maximum.
  bool nested_warm_start = true;
  /// Fall back to a pseudo-inverse when the Hessian is singular.
  bool allow_pseudo_inverse = false;
  /// Skip the Hessian when only point estimates are needed.
  bool compute_varcov = true;
};

enum class VarcovStatus { Available, NotPositiveDefinite, Singular };

struct FittedModel {
  ModelSpec spec;
  Params estimates;
  double loglik = -std::numeric_limits<double>::infinity();
  /// Parameter order: beta, gamma, alpha (natural scale).
  std::optional<Eigen::MatrixXd> varcov;
  VarcovStatus varcov_status = VarcovStatus::Singular;
  bool converged = false;
  int iterations = 0;
  std::size_t n = 0;
  /// Sup-norm of the gradient of the per-observation mean log-likelihood.
  double gradient_norm = std::numeric_limits<double>::quiet_NaN();
  std::string message;
  std::vector<std::string> warnings;
  std::vector<std::string> parameter_names;
};

/// log(y!) via log-gamma; accurate for any y that fits in a long.
double log_factorial(long y);

double loglik_pp(const VectorRef& beta, const DesignData& dd);
double loglik_ztnb(const VectorRef& beta, double alpha, const DesignData& dd);
double loglik_oipp(const VectorRef& beta, const VectorRef& gamma, const DesignData& dd);
double loglik_oiztnb(const VectorRef& beta, const VectorRef& gamma, double alpha,
                     const DesignData& dd);
double loglik(Family family, const Params& p, const DesignData& dd);

/// Flattens (beta, gamma, alpha) in that order.
Eigen::VectorXd pack(const Params& p);
Params unpack(Family family, const Eigen::VectorXd& theta, Eigen::Index k,
              Eigen::Index p);
std::vector<std::string> parameter_names(Family family, const DesignData& dd);

Params starting_values(const ModelSpec& spec, const DesignData& dd);

FittedModel maximize(const ModelSpec& spec, const DesignData& dd,
                     const FitOptions& opts = {});

/// Expected frequency of each count y = 1..y_max summed over observations.
/// Without y_max the support is extended until all but a 1e-9 fraction of
/// the total mass is covered.
std::vector<double> predicted_counts(const FittedModel& fm, const DesignData& dd,
                                     std::optional<long> y_max = std::nullopt);

}  // namespace oitrunc
