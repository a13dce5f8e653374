#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oitrunc/fit.hpp"

namespace oitrunc {

struct TestResult {
  double statistic = 0.0;
  int dof = 1;
  double p_value = 1.0;
  std::string method;
  std::optional<std::string> warning;
};

/// P(chi2_dof > x).
double chisq_upper_tail(double x, int dof);

/// Two-sided standard normal p-value for a z statistic.
double normal_two_sided(double z);

struct VarcovResult {
  std::optional<Eigen::MatrixXd> matrix;
  VarcovStatus status = VarcovStatus::Singular;
  double condition_number = 0.0;
};

/// -H^{-1} for the Hessian H of a log-likelihood, after symmetrizing H. A
/// condition number above 1e12 is treated as singular; with
/// `allow_pseudo_inverse` a Moore-Penrose inverse is returned instead.
VarcovResult varcov(const Eigen::MatrixXd& hessian, bool allow_pseudo_inverse = false);

struct SummaryRow {
  std::string name;  // e.g. "beta:white", "gamma:(Intercept)", "alpha"
  double estimate = 0.0;
  std::optional<double> se;
  std::optional<double> z;
  std::optional<double> p;
};

struct SummaryTable {
  Family family = Family::PP;
  std::vector<SummaryRow> rows;
  std::optional<double> avg_one_inflation;
  std::optional<double> avg_abs_one_inflation;
  double loglik = 0.0;
  bool converged = false;
  std::size_t n = 0;
};

SummaryTable summarize(const FittedModel& fm, const DesignData& dd);

/// Wald test that every coefficient attached to `regressor` (in X, Z or
/// both) is zero.
TestResult signif_wald(const FittedModel& fm, const std::string& regressor);

/// Wald test of gamma = 0 (no one-inflation).
TestResult one_wald(const FittedModel& fm);

/// Likelihood-ratio test of the base model against its one-inflated
/// extension fitted to the same data. P(y = 1) is sigma(Z gamma) in the
/// one-inflated model, so the base model is only nested when logit f(1) is
/// linear in Z; a negative statistic is clamped to 0 with a warning.
TestResult one_lrt(const FittedModel& fm_oi, const FittedModel& fm_base);

struct DeltaResult {
  Eigen::VectorXd se;
  /// True where the diagonal of J V J' came out negative (se set to NaN).
  std::vector<bool> flagged;
};

/// Standard errors sqrt(diag(J V J')).
DeltaResult delta_method(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& varcov);

}  // namespace oitrunc
