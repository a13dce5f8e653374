#include "oitrunc/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oitrunc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(SeedSpec seed) {
  const std::uint64_t a = splitmix64(seed.master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(seed.stream_id + 0x632BE59BD9B4E019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Untruncated base draw.
long base_draw(bool negbin, double lambda, double alpha, Generator& gen) {
  return negbin ? gen.negbin(lambda, alpha) : gen.poisson(lambda);
}

long truncated_by_rejection(bool negbin, double lambda, double alpha, Generator& gen) {
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    const long y = base_draw(negbin, lambda, alpha, gen);
    if (y > 0) return y;
  }
  throw std::runtime_error("truncated sampler rejected " + std::to_string(kRejectionCap) +
                           " zeros in a row (lambda = " + std::to_string(lambda) + ")");
}

// Inversion on the one-inflated pmf, walking the support with the ratio
// f(y + 1) / f(y) of the untruncated base distribution.
long inflated_by_inversion(bool negbin, double lambda, double alpha, double omega,
                           Generator& gen) {
  const double u = gen.uniform();
  const double f1 = base_prob_one(negbin, lambda, alpha);
  double cum = omega + (1.0 - omega) * f1;
  if (u < cum) return 1;
  double term = (1.0 - omega) * std::exp(base_log_pmf(negbin, lambda, alpha, 2));
  const double ratio_scale = negbin ? lambda / (alpha + lambda) : lambda;
  for (long y = 2; y < kInversionCap; ++y) {
    cum += term;
    if (u < cum) return y;
    const double yd = static_cast<double>(y);
    term *= negbin ? (alpha + yd) / (yd + 1.0) * ratio_scale : ratio_scale / (yd + 1.0);
    // Past the mode with nothing left to add: the remaining mass is lost to
    // rounding, so the draw lands on the current point.
    if (term == 0.0) return y;
  }
  throw std::runtime_error("inversion sampler exceeded " + std::to_string(kInversionCap) +
                           " support points");
}

}  // namespace

Generator::Generator(SeedSpec seed) : engine_(make_engine(seed)) {}

double Generator::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Generator::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

double Generator::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long Generator::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cum = p;
    long k = 0;
    while (u > cum) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
      if (p == 0.0 && static_cast<double>(k) > mean) break;
    }
    return k;
  }
  // Hormann's PTRS.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double U = uniform() - 0.5;
    const double V = uniform();
    const double us = 0.5 - std::abs(U);
    const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
    if (us >= 0.07 && V <= vr) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<long>(k);
    }
  }
}

long Generator::negbin(double mean, double alpha) {
  return poisson(mean * gamma(alpha) / alpha);
}

long draw(Family family, const LinkedParams& linked, std::optional<double> alpha,
          Generator& gen) {
  const bool nb = is_negbin(family);
  if (nb && !alpha) throw std::invalid_argument("negative binomial draw needs alpha");
  const double a = nb ? *alpha : 0.0;
  if (!is_one_inflated(family)) return truncated_by_rejection(nb, linked.lambda, a, gen);
  if (!linked.omega) throw std::invalid_argument("one-inflated draw needs omega");
  const double w = *linked.omega;
  if (w >= 0.0) {
    if (gen.uniform() < w) return 1;
    return truncated_by_rejection(nb, linked.lambda, a, gen);
  }
  return inflated_by_inversion(nb, linked.lambda, a, w, gen);
}

std::vector<long> sample(Family family, const Params& params, const RowMatrix& X,
                         const std::optional<RowMatrix>& Z, SeedSpec seed) {
  validate(family, params);
  if (is_one_inflated(family) && (!Z || Z->rows() != X.rows())) {
    throw std::invalid_argument("one-inflated sampling needs a Z matrix with one row per X row");
  }
  Generator gen(seed);
  std::vector<long> y;
  y.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::optional<VectorRef> z;
    if (is_one_inflated(family)) z.emplace(Z->row(i).transpose());
    y.push_back(draw(family, link(family, params, X.row(i).transpose(), z), params.alpha, gen));
  }
  return y;
}

}  // namespace oitrunc
