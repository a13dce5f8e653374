#include "oitrunc/infer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace oitrunc {

namespace {

constexpr double kMaxCondition = 1e12;

std::vector<Eigen::Index> indices_with_prefix(const FittedModel& fm, const std::string& prefix) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < fm.parameter_names.size(); ++i) {
    if (fm.parameter_names[i].starts_with(prefix)) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

TestResult wald(const FittedModel& fm, const std::vector<Eigen::Index>& idx,
                std::string method) {
  if (!fm.varcov) {
    throw std::runtime_error(method + ": variance-covariance matrix is unavailable");
  }
  const Eigen::VectorXd theta = pack(fm.estimates);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd c(m);
  Eigen::MatrixXd RVR(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    c[a] = theta[idx[a]];
    for (Eigen::Index b = 0; b < m; ++b) RVR(a, b) = (*fm.varcov)(idx[a], idx[b]);
  }
  TestResult out;
  out.method = std::move(method);
  out.dof = static_cast<int>(m);
  out.statistic = c.isZero(0.0) ? 0.0 : c.dot(RVR.ldlt().solve(c));
  if (out.statistic < 0.0) {
    out.warning = "restricted covariance block is not positive definite";
    out.statistic = 0.0;
  }
  out.p_value = chisq_upper_tail(out.statistic, out.dof);
  return out;
}

}  // namespace

double chisq_upper_tail(double x, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi-square needs positive degrees of freedom");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

VarcovResult varcov(const Eigen::MatrixXd& hessian, bool allow_pseudo_inverse) {
  if (hessian.rows() != hessian.cols()) throw std::invalid_argument("Hessian is not square");
  VarcovResult out;
  const Eigen::MatrixXd info = -0.5 * (hessian + hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  if (eig.info() != Eigen::Success) return out;
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  const double min_abs = ev.cwiseAbs().minCoeff();
  out.condition_number = min_abs > 0.0 ? max_abs / min_abs : std::numeric_limits<double>::infinity();

  Eigen::VectorXd inv_ev(ev.size());
  if (out.condition_number > kMaxCondition) {
    if (!allow_pseudo_inverse) return out;
    const double cutoff = max_abs / kMaxCondition;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      inv_ev[i] = std::abs(ev[i]) > cutoff ? 1.0 / ev[i] : 0.0;
    }
  } else {
    inv_ev = ev.cwiseInverse();
  }
  Eigen::MatrixXd v = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();
  out.matrix = 0.5 * (v + v.transpose());
  out.status = (ev.array() > 0.0).all() ? VarcovStatus::Available
                                         : VarcovStatus::NotPositiveDefinite;
  return out;
}

SummaryTable summarize(const FittedModel& fm, const DesignData& dd) {
  SummaryTable t;
  t.family = fm.spec.family;
  t.loglik = fm.loglik;
  t.converged = fm.converged;
  t.n = fm.n;
  const Eigen::VectorXd theta = pack(fm.estimates);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    SummaryRow row;
    row.name = fm.parameter_names[static_cast<std::size_t>(i)];
    row.estimate = theta[i];
    if (fm.varcov && (*fm.varcov)(i, i) >= 0.0) {
      row.se = std::sqrt((*fm.varcov)(i, i));
      if (*row.se > 0.0) {
        row.z = row.estimate / *row.se;
        row.p = normal_two_sided(*row.z);
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (is_one_inflated(fm.spec.family)) {
    double sum = 0.0;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < dd.n(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const LinkedParams lp = link(fm.spec.family, fm.estimates, dd.X.row(r).transpose(),
                                   VectorRef(dd.Z->row(r).transpose()));
      sum += *lp.omega;
      sum_abs += std::abs(*lp.omega);
    }
    t.avg_one_inflation = sum / static_cast<double>(dd.n());
    t.avg_abs_one_inflation = sum_abs / static_cast<double>(dd.n());
  }
  return t;
}

TestResult signif_wald(const FittedModel& fm, const std::string& regressor) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < fm.parameter_names.size(); ++i) {
    const auto& name = fm.parameter_names[i];
    if (name == "beta:" + regressor || name == "gamma:" + regressor) {
      idx.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (idx.empty()) {
    throw std::invalid_argument("regressor '" + regressor + "' is not in the model");
  }
  return wald(fm, idx, "Wald test of " + regressor);
}

TestResult one_wald(const FittedModel& fm) {
  if (!is_one_inflated(fm.spec.family)) {
    throw std::invalid_argument("one_wald needs a one-inflated model");
  }
  return wald(fm, indices_with_prefix(fm, "gamma:"), "Wald test of no one-inflation");
}

TestResult one_lrt(const FittedModel& fm_oi, const FittedModel& fm_base) {
  if (!is_one_inflated(fm_oi.spec.family) ||
      fm_base.spec.family != base_family(fm_oi.spec.family)) {
    throw std::invalid_argument("one_lrt needs " +
                                std::string(to_string(base_family(fm_oi.spec.family))) +
                                " nested in " + std::string(to_string(fm_oi.spec.family)) +
                                ", got " + std::string(to_string(fm_base.spec.family)));
  }
  if (fm_oi.n != fm_base.n || fm_oi.spec.response != fm_base.spec.response ||
      fm_oi.spec.x_terms != fm_base.spec.x_terms) {
    throw std::invalid_argument("one_lrt: models were not fitted to the same data and X terms");
  }
  TestResult out;
  out.method = "LRT of no one-inflation";
  out.dof = static_cast<int>(fm_oi.estimates.gamma->size());
  double lrt = -2.0 * (fm_base.loglik - fm_oi.loglik);
  if (lrt < 0.0) {
    if (lrt < -1e-6) {
      out.warning = "one-inflated log-likelihood is below the base model's by " +
                    std::to_string(-lrt / 2.0) +
                    "; the base model is not nested for these data, LRT clamped to 0";
    } else {
      out.warning = "negative LRT " + std::to_string(lrt) + " clamped to 0";
    }
    lrt = 0.0;
  }
  out.statistic = lrt;
  out.p_value = chisq_upper_tail(lrt, out.dof);
  return out;
}

DeltaResult delta_method(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& varcov) {
  if (jacobian.cols() != varcov.rows() || varcov.rows() != varcov.cols()) {
    throw std::invalid_argument("delta_method: Jacobian has " +
                                std::to_string(jacobian.cols()) + " columns but varcov is " +
                                std::to_string(varcov.rows()) + "x" +
                                std::to_string(varcov.cols()));
  }
  const Eigen::MatrixXd m = jacobian * varcov * jacobian.transpose();
  DeltaResult out;
  out.se.resize(m.rows());
  out.flagged.assign(static_cast<std::size_t>(m.rows()), false);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) < 0.0) {
      out.se[i] = std::numeric_limits<double>::quiet_NaN();
      out.flagged[static_cast<std::size_t>(i)] = true;
    } else {
      out.se[i] = std::sqrt(m(i, i));
    }
  }
  return out;
}

}  // namespace oitrunc
