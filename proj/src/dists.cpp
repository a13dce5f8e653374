#include "oitrunc/dists.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oitrunc {

namespace {

constexpr long kRecursionLimit = 64;

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive and finite, got " +
                                std::to_string(alpha));
  }
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite, got " +
                                std::to_string(lambda));
  }
}

// log P(Y = 0) for the untruncated NB2: -alpha * log(1 + lambda / alpha).
double nb_log_p0(double lambda, double alpha) {
  return -alpha * std::log1p(lambda / alpha);
}

void check_linked(Family family, const LinkedParams& linked,
                  std::optional<double> alpha) {
  require_lambda(linked.lambda);
  if (is_negbin(family)) {
    if (!alpha) throw std::invalid_argument("negative binomial family needs alpha");
    require_alpha(*alpha);
  }
  if (is_one_inflated(family)) {
    if (!linked.omega) {
      throw std::invalid_argument("one-inflated family needs omega");
    }
    const double w = *linked.omega;
    if (!std::isfinite(w) || w > 1.0) {
      throw std::invalid_argument("omega must be finite and at most 1, got " +
                                  std::to_string(w));
    }
    const double f1 = base_prob_one(is_negbin(family), linked.lambda,
                                    is_negbin(family) ? *alpha : 0.0);
    if (w + (1.0 - w) * f1 < -1e-12) {
      throw std::invalid_argument("omega " + std::to_string(w) +
                                  " is below the lower bound for this lambda");
    }
  }
}

}  // namespace

void validate(Family family, const Params& p) {
  if (p.beta.size() == 0) throw std::invalid_argument("beta is empty");
  if (is_one_inflated(family) != p.gamma.has_value()) {
    throw std::invalid_argument(std::string(to_string(family)) +
                                (p.gamma ? " does not take gamma" : " requires gamma"));
  }
  if (is_negbin(family) != p.alpha.has_value()) {
    throw std::invalid_argument(std::string(to_string(family)) +
                                (p.alpha ? " does not take alpha" : " requires alpha"));
  }
  if (p.alpha) require_alpha(*p.alpha);
  if (p.gamma && p.gamma->size() == 0) throw std::invalid_argument("gamma is empty");
}

double lambda_link(const VectorRef& x_row, const VectorRef& beta) {
  if (x_row.size() != beta.size()) {
    throw std::invalid_argument("lambda_link: row has " + std::to_string(x_row.size()) +
                                " entries but beta has " + std::to_string(beta.size()));
  }
  const double lambda = std::exp(x_row.dot(beta));
  if (!std::isfinite(lambda)) throw std::overflow_error("lambda_link: exp(x.beta) overflowed");
  return lambda;
}

double log_expm1(double x) {
  return x > 0.7 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

double expm1_minus_x(double x) {
  if (std::abs(x) < 0.5) {
    double term = x * x / 2.0;
    double sum = term;
    for (int k = 3; k < 30; ++k) {
      term *= x / k;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

double log_gamma_ratio(double alpha, long y) {
  if (y <= kRecursionLimit) {
    double s = 0.0;
    for (long j = 0; j < y; ++j) s += std::log(alpha + static_cast<double>(j));
    return s;
  }
  return std::lgamma(alpha + static_cast<double>(y)) - std::lgamma(alpha);
}

double base_prob_one(bool negbin, double lambda, double alpha) {
  if (!negbin) {
    // lambda / (e^lambda - 1)
    return std::exp(std::log(lambda) - log_expm1(lambda));
  }
  const double t = nb_log_p0(lambda, alpha);
  return std::exp(std::log(alpha) + t + std::log(lambda) - std::log(alpha + lambda) -
                  std::log(-std::expm1(t)));
}

double base_log_pmf(bool negbin, double lambda, double alpha, long y) {
  const double yd = static_cast<double>(y);
  const double log_yfact = std::lgamma(yd + 1.0);
  if (!negbin) return yd * std::log(lambda) - log_expm1(lambda) - log_yfact;
  const double t = nb_log_p0(lambda, alpha);
  return log_gamma_ratio(alpha, y) - log_yfact + t +
         yd * (std::log(lambda) - std::log(alpha + lambda)) - std::log(-std::expm1(t));
}

double base_mean(bool negbin, double lambda, double alpha) {
  if (!negbin) return lambda / -std::expm1(-lambda);
  return lambda / -std::expm1(nb_log_p0(lambda, alpha));
}

double lower_bound(Family family, double lambda, std::optional<double> alpha) {
  if (!is_one_inflated(family)) {
    throw std::invalid_argument("lower_bound is only defined for one-inflated families");
  }
  require_lambda(lambda);
  if (is_negbin(family) != alpha.has_value()) {
    throw std::invalid_argument("lower_bound: alpha must be given iff family is OIZTNB");
  }
  if (!is_negbin(family)) {
    // -lambda / (e^lambda - lambda - 1)
    return -lambda / expm1_minus_x(lambda);
  }
  require_alpha(*alpha);
  const double f1 = base_prob_one(true, lambda, *alpha);
  return -f1 / (1.0 - f1);
}

double omega_from_index(double index, double lower) {
  if (!(lower < 1.0)) throw std::invalid_argument("omega link needs lower bound < 1");
  // 1 / (1 + exp(-index)) written to avoid overflow for large |index|.
  const double s = index >= 0 ? 1.0 / (1.0 + std::exp(-index))
                              : std::exp(index) / (1.0 + std::exp(index));
  return lower + (1.0 - lower) * s;
}

double omega_link(const VectorRef& z_row, const VectorRef& gamma, double lower) {
  if (z_row.size() != gamma.size()) {
    throw std::invalid_argument("omega_link: row has " + std::to_string(z_row.size()) +
                                " entries but gamma has " + std::to_string(gamma.size()));
  }
  return omega_from_index(z_row.dot(gamma), lower);
}

LinkedParams link(Family family, const Params& p, const VectorRef& x_row,
                  const std::optional<VectorRef>& z_row) {
  LinkedParams out;
  out.lambda = lambda_link(x_row, p.beta);
  if (is_negbin(family)) out.theta = out.lambda / *p.alpha;
  if (is_one_inflated(family)) {
    if (!z_row || !p.gamma) throw std::invalid_argument("one-inflated link needs Z row and gamma");
    out.lower_bound = lower_bound(family, out.lambda, p.alpha);
    out.omega = omega_link(*z_row, *p.gamma, *out.lower_bound);
  }
  return out;
}

double log_pmf(Family family, const LinkedParams& linked, std::optional<double> alpha,
               long y) {
  if (y < 1) {
    throw std::domain_error("pmf: y = " + std::to_string(y) +
                            " is outside the zero-truncated support");
  }
  check_linked(family, linked, alpha);
  const bool nb = is_negbin(family);
  const double a = nb ? *alpha : 0.0;
  if (!is_one_inflated(family)) return base_log_pmf(nb, linked.lambda, a, y);

  const double w = *linked.omega;
  if (y == 1) {
    const double f1 = base_prob_one(nb, linked.lambda, a);
    const double p1 = w + (1.0 - w) * f1;
    return p1 > 0.0 ? std::log(p1) : -std::numeric_limits<double>::infinity();
  }
  if (w >= 1.0) return -std::numeric_limits<double>::infinity();
  return std::log1p(-w) + base_log_pmf(nb, linked.lambda, a, y);
}

double pmf(Family family, const LinkedParams& linked, std::optional<double> alpha, long y) {
  return std::exp(log_pmf(family, linked, alpha, y));
}

double mean(Family family, const LinkedParams& linked, std::optional<double> alpha) {
  check_linked(family, linked, alpha);
  const bool nb = is_negbin(family);
  const double mu = base_mean(nb, linked.lambda, nb ? *alpha : 0.0);
  if (!is_one_inflated(family)) return mu;
  const double w = *linked.omega;
  return w + (1.0 - w) * mu;
}

}  // namespace oitrunc
