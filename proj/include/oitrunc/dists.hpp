#pragma once

#include <optional>

#include <Eigen/Dense>

#include "oitrunc/family.hpp"

namespace oitrunc {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Structural parameters: coefficients on X (beta), on Z (gamma, one-inflated
/// families only) and the NB2 dispersion alpha (negative binomial families
/// only). The first entry of beta and gamma is the intercept.
struct Params {
  Vector beta;
  std::optional<Vector> gamma;
  std::optional<double> alpha;
};

/// Throws std::invalid_argument when `p` does not match the family's
/// parameter layout (gamma present iff one-inflated, alpha > 0 present iff
/// negative binomial).
void validate(Family family, const Params& p);

/// Per-observation transforms of Params.
struct LinkedParams {
  double lambda = 1.0;
  std::optional<double> theta;        // lambda / alpha, NB only
  std::optional<double> lower_bound;  // L_i, one-inflated only
  std::optional<double> omega;        // one-inflated only
};

/// exp(x . beta). Throws on dimension mismatch or overflow.
double lambda_link(const VectorRef& x_row, const VectorRef& beta);

/// L = -f(1) / (1 - f(1)) for the truncated base of a one-inflated family:
/// the value of omega at which a count of one has probability zero.
double lower_bound(Family family, double lambda, std::optional<double> alpha);

/// Generalized logistic link: L + (1 - L) / (1 + exp(-z . gamma)).
double omega_link(const VectorRef& z_row, const VectorRef& gamma,
                  double lower_bound);

/// Same link evaluated at a precomputed index z . gamma.
double omega_from_index(double index, double lower_bound);

/// Evaluate every per-observation transform for one row.
LinkedParams link(Family family, const Params& p, const VectorRef& x_row,
                  const std::optional<VectorRef>& z_row);

// Truncated base distribution (PP or ZTNB) kernels. `alpha` is ignored for
// the Poisson case.

/// Probability of a one under the truncated base distribution.
double base_prob_one(bool negbin, double lambda, double alpha);
double base_log_pmf(bool negbin, double lambda, double alpha, long y);
double base_mean(bool negbin, double lambda, double alpha);

/// log Gamma(alpha + y) - log Gamma(alpha). Uses the product recursion
/// sum_{j=1..y} log(alpha + j - 1) for moderate y and lgamma beyond.
double log_gamma_ratio(double alpha, long y);

/// log(exp(x) - 1) for x > 0 without overflow.
double log_expm1(double x);

/// exp(x) - 1 - x without cancellation near zero.
double expm1_minus_x(double x);

/// Probability mass at y >= 1. Throws std::domain_error for y < 1 and
/// std::invalid_argument for linked parameters inconsistent with `family`.
double pmf(Family family, const LinkedParams& linked,
           std::optional<double> alpha, long y);
double log_pmf(Family family, const LinkedParams& linked,
               std::optional<double> alpha, long y);

/// E[y] under the (possibly one-inflated) truncated distribution.
double mean(Family family, const LinkedParams& linked,
            std::optional<double> alpha);

}  // namespace oitrunc
