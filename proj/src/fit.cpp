#include "oitrunc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oitrunc/infer.hpp"
#include "oitrunc/optimize.hpp"

namespace oitrunc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 / (1 + exp(-x)))
double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

void check_dims(const DesignData& dd, const VectorRef& beta,
                const std::optional<VectorRef>& gamma) {
  if (beta.size() != dd.X.cols()) {
    throw std::invalid_argument("beta has " + std::to_string(beta.size()) +
                                " entries but X has " + std::to_string(dd.X.cols()) +
                                " columns");
  }
  if (gamma) {
    if (!dd.Z) throw std::invalid_argument("design has no Z matrix");
    if (gamma->size() != dd.Z->cols()) {
      throw std::invalid_argument("gamma has " + std::to_string(gamma->size()) +
                                  " entries but Z has " + std::to_string(dd.Z->cols()) +
                                  " columns");
    }
  }
}

// Log of the truncated base pmf at y for a row with log-rate eta, together
// with log f(1) when requested. Poisson when alpha is empty.
struct BaseRow {
  double log_f1;
  double log_fy;
};

BaseRow base_row(double eta, std::optional<double> alpha, long y, double log_yfact,
                 bool need_f1) {
  const double lambda = std::exp(eta);
  BaseRow out{0.0, 0.0};
  if (!alpha) {
    const double lse = log_expm1(lambda);
    out.log_f1 = eta - lse;
    out.log_fy = static_cast<double>(y) * eta - lse - log_yfact;
    return out;
  }
  const double a = *alpha;
  const double log_apl = std::log(a + lambda);
  const double t = -a * std::log1p(lambda / a);
  const double log_trunc = std::log(-std::expm1(t));
  if (need_f1) out.log_f1 = std::log(a) + t + eta - log_apl - log_trunc;
  if (y >= 2 || !need_f1) {
    // sum_{j=1}^{y} log(alpha + j - 1) - log y! + alpha log alpha + y log lambda
    //   - (alpha + y) log(alpha + lambda) - log(1 - (1 + lambda/alpha)^-alpha)
    out.log_fy = log_gamma_ratio(a, y) - log_yfact + t +
                 static_cast<double>(y) * (eta - log_apl) - log_trunc;
  }
  return out;
}

double base_loglik(const VectorRef& beta, std::optional<double> alpha, const DesignData& dd) {
  check_dims(dd, beta, std::nullopt);
  const Eigen::VectorXd eta = dd.X * beta;
  double ll = 0.0;
  for (std::size_t i = 0; i < dd.n(); ++i) {
    const auto e = eta[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(std::exp(e))) return kNegInf;
    ll += base_row(e, alpha, dd.y[i], dd.log_y_factorial[i], false).log_fy;
  }
  return std::isnan(ll) ? kNegInf : ll;
}

// One-inflated log-likelihood in the split form
//   log(1 - w) + I1 log(w / (1 - w) + f1) + (1 - I1) log f(y).
// With w on the generalized logistic link, 1 - L = 1 / (1 - f1), so
//   log(1 - w) = log sigmoid(-zg) - log(1 - f1)   and
//   w / (1 - w) + f1 = sigmoid(zg) / (1 - w),
// which keeps every term finite however far zg is from zero.
double inflated_loglik(const VectorRef& beta, const VectorRef& gamma,
                       std::optional<double> alpha, const DesignData& dd) {
  check_dims(dd, beta, gamma);
  const Eigen::VectorXd eta = dd.X * beta;
  const Eigen::VectorXd zeta = *dd.Z * gamma;
  double ll = 0.0;
  for (std::size_t i = 0; i < dd.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (!std::isfinite(std::exp(eta[r]))) return kNegInf;
    const bool one = dd.ones_mask[i];
    const BaseRow b = base_row(eta[r], alpha, dd.y[i], dd.log_y_factorial[i], true);
    const double log1m_f1 = std::log1p(-std::exp(b.log_f1));
    const double log1m_w = log_sigmoid(-zeta[r]) - log1m_f1;
    if (one) {
      ll += log1m_w + (log_sigmoid(zeta[r]) - log1m_w);
    } else {
      ll += log1m_w + b.log_fy;
    }
  }
  return std::isnan(ll) ? kNegInf : ll;
}

Eigen::Index z_cols(const DesignData& dd) { return dd.Z ? dd.Z->cols() : 0; }

// Internal optimizer coordinates: beta, gamma, log(alpha).
Eigen::VectorXd to_internal(const Params& p) {
  Eigen::VectorXd v = pack(p);
  if (p.alpha) v[v.size() - 1] = std::log(*p.alpha);
  return v;
}

Params from_internal(Family family, Eigen::VectorXd v, Eigen::Index k, Eigen::Index p) {
  if (is_negbin(family)) v[v.size() - 1] = std::exp(v[v.size() - 1]);
  return unpack(family, v, k, p);
}

void add_boundary_warnings(FittedModel& fm, const DesignData& dd) {
  const Eigen::VectorXd eta = dd.X * fm.estimates.beta;
  const double min_lambda = std::exp(eta.minCoeff());
  if (min_lambda < 1e-6) {
    fm.warnings.push_back("fitted rate is near the boundary (min lambda = " +
                          std::to_string(min_lambda) + ")");
  }
  if (fm.estimates.alpha) {
    const double a = *fm.estimates.alpha;
    if (a > 1e8 || a < 1e-8) {
      fm.warnings.push_back("dispersion alpha = " + std::to_string(a) +
                            " is near the boundary of the parameter space");
    }
  }
}

}  // namespace

double log_factorial(long y) {
  if (y < 0) throw std::domain_error("log_factorial of a negative number");
  return std::lgamma(static_cast<double>(y) + 1.0);
}

double loglik_pp(const VectorRef& beta, const DesignData& dd) {
  return base_loglik(beta, std::nullopt, dd);
}

double loglik_ztnb(const VectorRef& beta, double alpha, const DesignData& dd) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return kNegInf;
  return base_loglik(beta, alpha, dd);
}

double loglik_oipp(const VectorRef& beta, const VectorRef& gamma, const DesignData& dd) {
  return inflated_loglik(beta, gamma, std::nullopt, dd);
}

double loglik_oiztnb(const VectorRef& beta, const VectorRef& gamma, double alpha,
                     const DesignData& dd) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return kNegInf;
  return inflated_loglik(beta, gamma, alpha, dd);
}

double loglik(Family family, const Params& p, const DesignData& dd) {
  validate(family, p);
  switch (family) {
    case Family::PP: return loglik_pp(p.beta, dd);
    case Family::ZTNB: return loglik_ztnb(p.beta, *p.alpha, dd);
    case Family::OIPP: return loglik_oipp(p.beta, *p.gamma, dd);
    case Family::OIZTNB: return loglik_oiztnb(p.beta, *p.gamma, *p.alpha, dd);
  }
  return kNegInf;
}

Eigen::VectorXd pack(const Params& p) {
  const Eigen::Index k = p.beta.size();
  const Eigen::Index g = p.gamma ? p.gamma->size() : 0;
  Eigen::VectorXd v(k + g + (p.alpha ? 1 : 0));
  v.head(k) = p.beta;
  if (p.gamma) v.segment(k, g) = *p.gamma;
  if (p.alpha) v[k + g] = *p.alpha;
  return v;
}

Params unpack(Family family, const Eigen::VectorXd& theta, Eigen::Index k, Eigen::Index p) {
  const Eigen::Index expected =
      k + (is_one_inflated(family) ? p : 0) + (is_negbin(family) ? 1 : 0);
  if (theta.size() != expected) {
    throw std::invalid_argument("parameter vector has " + std::to_string(theta.size()) +
                                " entries, expected " + std::to_string(expected));
  }
  Params out;
  out.beta = theta.head(k);
  if (is_one_inflated(family)) out.gamma = theta.segment(k, p);
  if (is_negbin(family)) out.alpha = theta[expected - 1];
  return out;
}

std::vector<std::string> parameter_names(Family family, const DesignData& dd) {
  std::vector<std::string> names;
  for (const auto& n : dd.x_names) names.push_back("beta:" + n);
  if (is_one_inflated(family)) {
    for (const auto& n : dd.z_names) names.push_back("gamma:" + n);
  }
  if (is_negbin(family)) names.emplace_back("alpha");
  return names;
}

Params starting_values(const ModelSpec& spec, const DesignData& dd) {
  const double n = static_cast<double>(dd.n());
  const double m = std::accumulate(dd.y.begin(), dd.y.end(), 0.0) / n;
  double ss = 0.0;
  for (long v : dd.y) ss += (static_cast<double>(v) - m) * (static_cast<double>(v) - m);
  const double var = dd.n() > 1 ? ss / (n - 1.0) : 0.0;

  Params p;
  p.beta = Eigen::VectorXd::Zero(dd.X.cols());
  p.beta[0] = std::log(m);
  if (is_one_inflated(spec.family)) p.gamma = Eigen::VectorXd::Zero(z_cols(dd));
  if (is_negbin(spec.family)) p.alpha = var > m ? std::max(0.1, m * m / (var - m)) : 1.0;
  return p;
}

namespace {

// Rows with y >= 2. The one-inflated likelihood factors into a logistic part
// for 1{y = 1} and a part in (beta, alpha) that only these rows inform.
std::optional<DesignData> rows_above_one(const DesignData& dd) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < dd.n(); ++i) {
    if (dd.y[i] >= 2) keep.push_back(static_cast<Eigen::Index>(i));
  }
  if (keep.size() < static_cast<std::size_t>(dd.X.cols()) + 2) return std::nullopt;
  DesignData sub;
  sub.x_names = dd.x_names;
  sub.x_dummy = dd.x_dummy;
  sub.X.resize(static_cast<Eigen::Index>(keep.size()), dd.X.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto i = keep[r];
    sub.X.row(static_cast<Eigen::Index>(r)) = dd.X.row(i);
    sub.y.push_back(dd.y[static_cast<std::size_t>(i)]);
    sub.ones_mask.push_back(false);
    sub.log_y_factorial.push_back(dd.log_y_factorial[static_cast<std::size_t>(i)]);
  }
  return sub;
}

// Base-family start for a one-inflated fit: beta (and alpha) from `base_fit`,
// gamma = 0.
Params start_from_base(const ModelSpec& spec, const DesignData& dd, const FittedModel& base_fit) {
  Params start = starting_values(spec, dd);
  if (base_fit.estimates.beta.allFinite()) start.beta = base_fit.estimates.beta;
  if (base_fit.estimates.alpha && std::isfinite(*base_fit.estimates.alpha)) {
    start.alpha = base_fit.estimates.alpha;
  }
  return start;
}

}  // namespace

FittedModel maximize(const ModelSpec& spec, const DesignData& dd, const FitOptions& opts) {
  const Family family = spec.family;
  if (is_one_inflated(family) && !dd.Z) {
    throw std::invalid_argument("one-inflated fit needs a design with Z");
  }
  if (dd.n() == 0) throw std::invalid_argument("cannot fit an empty dataset");
  const Eigen::Index k = dd.X.cols();
  const Eigen::Index p = is_one_inflated(family) ? z_cols(dd) : 0;

  std::vector<Params> starts;
  if (opts.warm_start) {
    validate(family, *opts.warm_start);
    check_dims(dd, opts.warm_start->beta,
               opts.warm_start->gamma ? std::optional<VectorRef>(*opts.warm_start->gamma)
                                      : std::nullopt);
    starts.push_back(*opts.warm_start);
  } else if (is_one_inflated(family) && opts.nested_warm_start) {
    ModelSpec base = spec;
    base.family = base_family(family);
    base.z_terms.clear();
    FitOptions base_opts = opts;
    base_opts.compute_varcov = false;
    starts.push_back(start_from_base(spec, dd, maximize(base, dd, base_opts)));
    if (const auto sub = rows_above_one(dd)) {
      try {
        starts.push_back(start_from_base(spec, dd, maximize(base, *sub, base_opts)));
      } catch (const std::exception&) {
        // The first start still stands.
      }
    }
  } else {
    starts.push_back(starting_values(spec, dd));
  }

  const double n = static_cast<double>(dd.n());
  const Objective objective = [&](const Eigen::VectorXd& v) {
    const double la = is_negbin(family) ? v[v.size() - 1] : 0.0;
    if (is_negbin(family) && std::abs(la) > 700.0) return std::numeric_limits<double>::infinity();
    const double ll = loglik(family, from_internal(family, v, k, p), dd);
    return std::isfinite(ll) ? -ll / n : std::numeric_limits<double>::infinity();
  };

  BfgsOptions bo;
  bo.gradient_tolerance = opts.gradient_tolerance;
  bo.max_iterations = opts.max_iterations.value_or(200 * static_cast<int>(to_internal(starts[0]).size()));
  bo.fd_step_scale = opts.fd_step_scale;

  // Keep the highest converged maximum, or the highest overall if none converged.
  std::optional<BfgsResult> best;
  int total_iterations = 0;
  for (const Params& start : starts) {
    BfgsResult res = minimize_bfgs(objective, to_internal(start), bo);
    total_iterations += res.iterations;
    const auto better = [&] {
      if (!best) return true;
      if (res.converged != best->converged) return res.converged;
      return res.value < best->value;
    };
    if (better()) best = std::move(res);
  }
  const BfgsResult& res = *best;

  FittedModel fm;
  fm.spec = spec;
  fm.n = dd.n();
  fm.parameter_names = parameter_names(family, dd);
  fm.estimates = from_internal(family, res.x, k, p);
  fm.loglik = loglik(family, fm.estimates, dd);
  fm.converged = res.converged && std::isfinite(fm.loglik);
  fm.iterations = total_iterations;
  fm.gradient_norm = res.gradient.lpNorm<Eigen::Infinity>();
  fm.message = res.message;
  add_boundary_warnings(fm, dd);

  if (opts.compute_varcov && std::isfinite(fm.loglik)) {
    const Eigen::VectorXd theta = pack(fm.estimates);
    Eigen::VectorXd steps = fd_steps(theta, opts.hessian_step_scale);
    if (fm.estimates.alpha) {
      auto& h = steps[steps.size() - 1];
      h = std::min(h, *fm.estimates.alpha / 4.0);
    }
    const Objective ll_natural = [&](const Eigen::VectorXd& v) {
      if (is_negbin(family) && !(v[v.size() - 1] > 0.0)) return -std::numeric_limits<double>::infinity();
      return loglik(family, unpack(family, v, k, p), dd);
    };
    const Eigen::MatrixXd H = central_hessian(ll_natural, theta, steps);
    if (H.allFinite()) {
      VarcovResult vc = varcov(H, opts.allow_pseudo_inverse);
      fm.varcov = std::move(vc.matrix);
      fm.varcov_status = vc.status;
    }
  }
  return fm;
}

std::vector<double> predicted_counts(const FittedModel& fm, const DesignData& dd,
                                     std::optional<long> y_max) {
  const Family family = fm.spec.family;
  std::vector<LinkedParams> linked;
  linked.reserve(dd.n());
  for (std::size_t i = 0; i < dd.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::optional<VectorRef> z;
    if (is_one_inflated(family)) z.emplace(dd.Z->row(r).transpose());
    linked.push_back(link(family, fm.estimates, dd.X.row(r).transpose(), z));
  }
  const double total_target = static_cast<double>(dd.n()) * (1.0 - 1e-9);
  const long cap = y_max.value_or(1'000'000);
  std::vector<double> out;
  double total = 0.0;
  for (long y = 1; y <= cap; ++y) {
    double s = 0.0;
    for (const auto& lp : linked) s += pmf(family, lp, fm.estimates.alpha, y);
    out.push_back(s);
    total += s;
    if (!y_max && total >= total_target) break;
  }
  return out;
}

}  // namespace oitrunc
