#include "oitrunc/optimize.hpp"

#include <cmath>
#include <optional>

namespace oitrunc {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
// Near the optimum the objective is flat to within rounding and Armijo can
// no longer see a decrease. Within this relative band a step is accepted
// when the directional derivative shrinks instead (approximate Wolfe).
constexpr double kFlatBand = 1e-13;
constexpr double kWolfeLow = 0.9;
constexpr double kWolfeHigh = 0.8;

}  // namespace

Eigen::VectorXd fd_steps(const Eigen::VectorXd& x, double scale) {
  Eigen::VectorXd h(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double raw = scale * std::max(1.0, std::abs(x[j]));
    volatile double shifted = x[j] + raw;
    h[j] = shifted - x[j];
  }
  return h;
}

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double step_scale) {
  const Eigen::VectorXd h = fd_steps(x, step_scale);
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h[j];
    const double up = f(probe);
    probe[j] = x[j] - h[j];
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h[j]);
  }
  return g;
}

Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& steps) {
  const Eigen::Index k = x.size();
  Eigen::MatrixXd H(k, k);
  const double f0 = f(x);
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double hi = steps[i];
    p[i] = x[i] + hi;
    const double up = f(p);
    p[i] = x[i] - hi;
    const double down = f(p);
    p[i] = x[i];
    H(i, i) = (up - 2.0 * f0 + down) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = steps[j];
      p[i] = x[i] + hi; p[j] = x[j] + hj;
      const double pp = f(p);
      p[j] = x[j] - hj;
      const double pm = f(p);
      p[i] = x[i] - hi;
      const double mm = f(p);
      p[j] = x[j] + hj;
      const double mp = f(p);
      p[i] = x[i]; p[j] = x[j];
      H(i, j) = H(j, i) = (pp - pm - mp + mm) / (4.0 * hi * hj);
    }
  }
  return H;
}

BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  BfgsResult res;
  const Eigen::Index k = x0.size();
  res.x = std::move(x0);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) {
    res.message = "objective is not finite at the starting point";
    res.gradient = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    return res;
  }
  res.gradient = central_gradient(f, res.x, opts.fd_step_scale);

  const auto identity_scaled = [&](double gnorm) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(k, k) * std::min(1.0, 1.0 / gnorm));
  };
  Eigen::MatrixXd Hinv = identity_scaled(res.gradient.lpNorm<Eigen::Infinity>());
  bool fresh = true;

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const double gnorm = res.gradient.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(gnorm)) {
      res.message = "gradient is not finite";
      return res;
    }
    if (gnorm < opts.gradient_tolerance) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }

    Eigen::VectorXd d = -Hinv * res.gradient;
    double slope = res.gradient.dot(d);
    if (!(slope < 0.0)) {
      Hinv = identity_scaled(gnorm);
      fresh = true;
      d = -Hinv * res.gradient;
      slope = res.gradient.dot(d);
    }

    double t = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    std::optional<Eigen::VectorXd> g_trial;
    bool accepted = false;
    const double band = kFlatBand * std::max(1.0, std::abs(res.value));
    for (int b = 0; b < kMaxBacktracks; ++b, t *= 0.5) {
      x_new = res.x + t * d;
      if (x_new == res.x) break;
      f_new = f(x_new);
      if (!std::isfinite(f_new)) continue;
      if (f_new <= res.value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      if (f_new <= res.value + band) {
        Eigen::VectorXd g = central_gradient(f, x_new, opts.fd_step_scale);
        const double slope_new = g.dot(d);
        if (slope_new >= kWolfeLow * slope && slope_new <= -kWolfeHigh * slope) {
          g_trial = std::move(g);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!fresh) {
        Hinv = identity_scaled(gnorm);
        fresh = true;
        continue;
      }
      res.message = "line search failed to decrease the objective";
      return res;
    }

    const Eigen::VectorXd g_new =
        g_trial ? *g_trial : central_gradient(f, x_new, opts.fd_step_scale);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) Hinv = Eigen::MatrixXd::Identity(k, k) * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = Hinv * y;
      Hinv += rho * ((1.0 + rho * y.dot(Hy)) * (s * s.transpose()) -
                     (Hy * s.transpose() + s * Hy.transpose()));
      fresh = false;
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

}  // namespace oitrunc
