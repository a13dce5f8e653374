#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oitrunc/fit.hpp"

namespace oitrunc {

enum class AggregationKind { AverageEffects, EffectAtMeans, AtPoint };

/// How per-observation effects are combined: averaged over all rows, taken
/// at the column means, or at one user-supplied row (X and Z rows include
/// the intercept).
struct Aggregation {
  AggregationKind kind = AggregationKind::AverageEffects;
  Eigen::VectorXd x_row;
  Eigen::VectorXd z_row;

  static Aggregation at_point(Eigen::VectorXd x, Eigen::VectorXd z = {}) {
    return {AggregationKind::AtPoint, std::move(x), std::move(z)};
  }
};

/// Where a regressor enters the model: its column in X and/or in Z.
struct RegressorColumns {
  std::optional<Eigen::Index> x;
  std::optional<Eigen::Index> z;
};

RegressorColumns locate_regressor(const DesignData& dd, const std::string& name);

/// dE[y]/dq for the OIPP mean at one point, where q feeds the columns in
/// `j`. Throws std::invalid_argument for the intercept.
double dmean_oipp(const Params& p, const VectorRef& x_row, const VectorRef& z_row,
                  RegressorColumns j);

/// dE[y]/dq for the OIZTNB mean at one point.
double dmean_oiztnb(const Params& p, const VectorRef& x_row, const VectorRef& z_row,
                    RegressorColumns j);

/// Family dispatch, covering the PP and ZTNB base models as well.
double dmean(Family family, const Params& p, const VectorRef& x_row,
             const std::optional<VectorRef>& z_row, RegressorColumns j);

/// E[y] at one point through both links.
double mean_at(Family family, const Params& p, const VectorRef& x_row,
               const std::optional<VectorRef>& z_row);

/// E[y | D = 1] - E[y | D = 0], with D forced in every column it feeds.
/// Throws std::invalid_argument when the column is not 0/1-valued unless
/// `allow_non_dummy` is set.
double dummy_effect(const FittedModel& fm, const DesignData& dd, const std::string& regressor,
                    const Aggregation& agg = {}, bool allow_non_dummy = false);

enum class EffectKind { Continuous, Dummy };

struct MarginalEffectRow {
  std::string name;
  EffectKind kind = EffectKind::Continuous;
  double effect = 0.0;
  std::optional<double> se;
  std::optional<double> z;
  std::optional<double> p;
};

struct MarginalEffects {
  Family family = Family::PP;
  Aggregation aggregation;
  std::vector<MarginalEffectRow> rows;
  /// False when the fit had no variance-covariance matrix.
  bool se_available = false;
};

/// Marginal effect of every non-intercept regressor with delta-method
/// standard errors. The Jacobian is taken by central differences with
/// steps fd_step_scale * max(1, |theta_j|).
MarginalEffects margins(const FittedModel& fm, const DesignData& dd, const Aggregation& agg = {},
                        double fd_step_scale = std::cbrt(std::numeric_limits<double>::epsilon()));

}  // namespace oitrunc
