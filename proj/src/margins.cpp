#include "oitrunc/margins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oitrunc/infer.hpp"
#include "oitrunc/optimize.hpp"

namespace oitrunc {

namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

void reject_intercept(RegressorColumns j) {
  if ((j.x && *j.x == 0) || (j.z && *j.z == 0)) {
    throw std::invalid_argument("the intercept has no marginal effect");
  }
  if (!j.x && !j.z) throw std::invalid_argument("regressor feeds neither X nor Z");
}

// d lambda / dq
double dlambda(const Params& p, double lambda, RegressorColumns j) {
  return j.x ? lambda * p.beta[*j.x] : 0.0;
}

// d exp(-z gamma) / dq
double dexp_neg_index(const Params& p, double u, RegressorColumns j) {
  return j.z ? -u * (*p.gamma)[*j.z] : 0.0;
}

// (1 - lambda) e^lambda - 1, the numerator of dL/dlambda for OIPP.
double one_minus_x_exp_minus_one(double x) {
  if (std::abs(x) < 0.5) {
    // -sum_{k>=2} (k - 1) x^k / k!
    double term = x;  // x^k / k! at k = 1
    double sum = 0.0;
    for (int k = 2; k < 30; ++k) {
      term *= x / k;
      const double add = (k - 1) * term;
      sum -= add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return (1.0 - x) * std::exp(x) - 1.0;
}

// PP mean lambda e^lambda / (e^lambda - 1) and its derivative
// e^lambda (e^lambda - lambda - 1) / (e^lambda - 1)^2, both in forms that
// stay finite for large lambda.
double pp_mean(double lambda) { return lambda / -std::expm1(-lambda); }
double pp_mean_slope(double lambda) {
  const double one_m = -std::expm1(-lambda);
  return (one_m - lambda * std::exp(-lambda)) / (one_m * one_m);
}

}  // namespace

double dmean_oipp(const Params& p, const VectorRef& x_row, const VectorRef& z_row,
                  RegressorColumns j) {
  reject_intercept(j);
  if (!p.gamma) throw std::invalid_argument("dmean_oipp needs gamma");
  const double lambda = lambda_link(x_row, p.beta);
  const double index = z_row.dot(*p.gamma);
  const double s = sigmoid(index);
  const double u_over_1pu = sigmoid(-index);  // exp(-zg) / (1 + exp(-zg))
  const double lower = lower_bound(Family::OIPP, lambda, std::nullopt);
  const double omega = omega_from_index(index, lower);
  const double dlam = dlambda(p, lambda, j);

  // d omega / dq, split into the path through L(lambda) and through zg.
  double domega = 0.0;
  if (dlam != 0.0) {
    double dl_ratio;  // (e^l - l e^l - 1) / (e^l - l - 1)^2
    if (lambda < 30.0) {
      const double d = expm1_minus_x(lambda);
      dl_ratio = one_minus_x_exp_minus_one(lambda) / (d * d);
    } else {
      const double e = std::exp(-lambda);
      const double d = 1.0 - (1.0 + lambda) * e;
      dl_ratio = (e - lambda * e - e * e) / (d * d);
    }
    domega += dlam * dl_ratio * (-u_over_1pu);
  }
  if (j.z) {
    // (e^l - 1) / ((e^l - l - 1)(1 + u)^2) = (1 - L) s^2
    const double u = std::exp(-index);
    const double du = dexp_neg_index(p, u, j);
    domega -= std::isfinite(u) ? du * (1.0 - lower) * s * s
                               : -(*p.gamma)[*j.z] * (1.0 - lower) * s * u_over_1pu;
  }
  return domega * (1.0 - pp_mean(lambda)) + dlam * (1.0 - omega) * pp_mean_slope(lambda);
}

double dmean_oiztnb(const Params& p, const VectorRef& x_row, const VectorRef& z_row,
                    RegressorColumns j) {
  reject_intercept(j);
  if (!p.gamma || !p.alpha) throw std::invalid_argument("dmean_oiztnb needs gamma and alpha");
  const double a = *p.alpha;
  const double lambda = lambda_link(x_row, p.beta);
  const double index = z_row.dot(*p.gamma);
  const double s = sigmoid(index);
  const double lower = lower_bound(Family::OIZTNB, lambda, a);
  const double omega = omega_from_index(index, lower);
  const double dlam = dlambda(p, lambda, j);

  const double theta = lambda / a;
  const double log1p_theta = std::log1p(theta);
  const double p0 = std::exp(-a * log1p_theta);      // (1 + lambda/alpha)^-alpha
  const double one_m_p0 = -std::expm1(-a * log1p_theta);
  const double mu = lambda / one_m_p0;

  double domega = 0.0;
  if (dlam != 0.0) {
    // D = 1 + theta - (1 + theta)^(1 - alpha) and its theta-derivative.
    const double d = (1.0 + theta) * one_m_p0;
    const double d_prime = 1.0 - (1.0 - a) * p0;
    const double df1 = dlam * (p0 / d) * (1.0 - a * lambda / (a + lambda) - theta * d_prime / d);
    const double f1 = base_prob_one(true, lambda, a);
    const double dlower = -df1 / ((1.0 - f1) * (1.0 - f1));
    domega += dlower * (1.0 - s);
  }
  if (j.z) domega += (*p.gamma)[*j.z] * (1.0 - lower) * s * (1.0 - s);

  const double dmu = (1.0 / one_m_p0) * (1.0 - lambda * p0 / (1.0 + theta) / one_m_p0);
  return domega * (1.0 - mu) + dlam * (1.0 - omega) * dmu;
}

double dmean(Family family, const Params& p, const VectorRef& x_row,
             const std::optional<VectorRef>& z_row, RegressorColumns j) {
  switch (family) {
    case Family::OIPP: return dmean_oipp(p, x_row, *z_row, j);
    case Family::OIZTNB: return dmean_oiztnb(p, x_row, *z_row, j);
    case Family::PP:
    case Family::ZTNB: {
      j.z.reset();
      reject_intercept(j);
      const double lambda = lambda_link(x_row, p.beta);
      const double dlam = dlambda(p, lambda, j);
      if (family == Family::PP) return dlam * pp_mean_slope(lambda);
      const double a = *p.alpha;
      const double theta = lambda / a;
      const double p0 = std::exp(-a * std::log1p(theta));
      const double one_m_p0 = -std::expm1(-a * std::log1p(theta));
      return dlam * (1.0 / one_m_p0) * (1.0 - lambda * p0 / (1.0 + theta) / one_m_p0);
    }
  }
  return 0.0;
}

double mean_at(Family family, const Params& p, const VectorRef& x_row,
               const std::optional<VectorRef>& z_row) {
  return mean(family, link(family, p, x_row, z_row), p.alpha);
}

RegressorColumns locate_regressor(const DesignData& dd, const std::string& name) {
  RegressorColumns j;
  for (std::size_t c = 0; c < dd.x_names.size(); ++c) {
    if (dd.x_names[c] == name) j.x = static_cast<Eigen::Index>(c);
  }
  for (std::size_t c = 0; c < dd.z_names.size(); ++c) {
    if (dd.z_names[c] == name) j.z = static_cast<Eigen::Index>(c);
  }
  if (!j.x && !j.z) throw std::invalid_argument("regressor '" + name + "' is not in the model");
  return j;
}

namespace {

bool flagged_dummy(const DesignData& dd, RegressorColumns j) {
  if (j.x && !dd.x_dummy[static_cast<std::size_t>(*j.x)]) return false;
  if (j.z && !dd.z_dummy[static_cast<std::size_t>(*j.z)]) return false;
  return true;
}

struct EvalRows {
  RowMatrix X;
  std::optional<RowMatrix> Z;
};

EvalRows evaluation_rows(Family family, const DesignData& dd, const Aggregation& agg) {
  EvalRows rows;
  const bool oi = is_one_inflated(family);
  switch (agg.kind) {
    case AggregationKind::AverageEffects:
      rows.X = dd.X;
      if (oi) rows.Z = *dd.Z;
      break;
    case AggregationKind::EffectAtMeans:
      rows.X = dd.X.colwise().mean();
      if (oi) rows.Z = RowMatrix(dd.Z->colwise().mean());
      break;
    case AggregationKind::AtPoint:
      if (agg.x_row.size() != dd.X.cols() || (oi && agg.z_row.size() != dd.Z->cols())) {
        throw std::invalid_argument("at_point rows do not match the design dimensions");
      }
      rows.X = agg.x_row.transpose();
      if (oi) rows.Z = RowMatrix(agg.z_row.transpose());
      break;
  }
  return rows;
}

double average_dummy(Family family, const Params& p, EvalRows rows, RegressorColumns j) {
  const auto set = [&](double v) {
    if (j.x) rows.X.col(*j.x).setConstant(v);
    if (j.z) rows.Z->col(*j.z).setConstant(v);
  };
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rows.X.rows(); ++i) {
    std::optional<VectorRef> z;
    set(1.0);
    if (rows.Z) z.emplace(rows.Z->row(i).transpose());
    const double hi = mean_at(family, p, rows.X.row(i).transpose(), z);
    set(0.0);
    if (rows.Z) z.emplace(rows.Z->row(i).transpose());
    const double lo = mean_at(family, p, rows.X.row(i).transpose(), z);
    sum += hi - lo;
  }
  return sum / static_cast<double>(rows.X.rows());
}

double average_derivative(Family family, const Params& p, const EvalRows& rows,
                          RegressorColumns j) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rows.X.rows(); ++i) {
    std::optional<VectorRef> z;
    if (rows.Z) z.emplace(rows.Z->row(i).transpose());
    sum += dmean(family, p, rows.X.row(i).transpose(), z, j);
  }
  return sum / static_cast<double>(rows.X.rows());
}

}  // namespace

double dummy_effect(const FittedModel& fm, const DesignData& dd, const std::string& regressor,
                    const Aggregation& agg, bool allow_non_dummy) {
  const RegressorColumns j = locate_regressor(dd, regressor);
  if ((j.x && *j.x == 0) || (j.z && *j.z == 0)) {
    throw std::invalid_argument("the intercept has no marginal effect");
  }
  if (!allow_non_dummy && !flagged_dummy(dd, j)) {
    throw std::invalid_argument("column '" + regressor + "' is not a 0/1 dummy");
  }
  RegressorColumns used = j;
  if (!is_one_inflated(fm.spec.family)) used.z.reset();
  if (!used.x && !used.z) return 0.0;
  return average_dummy(fm.spec.family, fm.estimates,
                       evaluation_rows(fm.spec.family, dd, agg), used);
}

MarginalEffects margins(const FittedModel& fm, const DesignData& dd, const Aggregation& agg,
                        double fd_step_scale) {
  const Family family = fm.spec.family;
  const bool oi = is_one_inflated(family);
  MarginalEffects out;
  out.family = family;
  out.aggregation = agg;
  out.se_available = fm.varcov.has_value();

  std::vector<std::string> names;
  for (std::size_t c = 1; c < dd.x_names.size(); ++c) names.push_back(dd.x_names[c]);
  if (oi) {
    for (std::size_t c = 1; c < dd.z_names.size(); ++c) {
      if (std::find(names.begin(), names.end(), dd.z_names[c]) == names.end()) {
        names.push_back(dd.z_names[c]);
      }
    }
  }

  const EvalRows rows = evaluation_rows(family, dd, agg);
  const Eigen::VectorXd theta = pack(fm.estimates);
  const Eigen::Index k = fm.estimates.beta.size();
  const Eigen::Index p = fm.estimates.gamma ? fm.estimates.gamma->size() : 0;
  Eigen::VectorXd steps = fd_steps(theta, fd_step_scale);
  if (fm.estimates.alpha) {
    steps[steps.size() - 1] = std::min(steps[steps.size() - 1], *fm.estimates.alpha / 4.0);
  }

  for (const auto& name : names) {
    RegressorColumns j = locate_regressor(dd, name);
    if (!oi) j.z.reset();
    MarginalEffectRow row;
    row.name = name;
    row.kind = flagged_dummy(dd, j) ? EffectKind::Dummy : EffectKind::Continuous;
    const auto effect_of = [&](const Params& params) {
      return row.kind == EffectKind::Dummy ? average_dummy(family, params, rows, j)
                                           : average_derivative(family, params, rows, j);
    };
    row.effect = effect_of(fm.estimates);
    if (fm.varcov) {
      Eigen::MatrixXd jac(1, theta.size());
      Eigen::VectorXd probe = theta;
      for (Eigen::Index c = 0; c < theta.size(); ++c) {
        probe[c] = theta[c] + steps[c];
        const double up = effect_of(unpack(family, probe, k, p));
        probe[c] = theta[c] - steps[c];
        const double down = effect_of(unpack(family, probe, k, p));
        probe[c] = theta[c];
        jac(0, c) = (up - down) / (2.0 * steps[c]);
      }
      const DeltaResult dr = delta_method(jac, *fm.varcov);
      if (!dr.flagged[0]) {
        row.se = dr.se[0];
        if (*row.se > 0.0) {
          row.z = row.effect / *row.se;
          row.p = normal_two_sided(*row.z);
        }
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace oitrunc
