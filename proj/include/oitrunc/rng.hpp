#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "oitrunc/design.hpp"
#include "oitrunc/dists.hpp"

namespace oitrunc {

/// (master_seed, stream_id) fully determines a generator's output, so
/// replications keyed by stream_id are reproducible in any schedule.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

class Generator {
 public:
  explicit Generator(SeedSpec seed);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Gamma with the given shape and unit scale (Marsaglia-Tsang).
  double gamma(double shape);
  /// Inversion for small means, PTRS transformed rejection otherwise.
  long poisson(double mean);
  /// NB2 with mean `mean` and dispersion `alpha`, as a gamma-Poisson mixture.
  long negbin(double mean, double alpha);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// Support points examined by the inversion sampler before giving up.
inline constexpr long kInversionCap = 10'000'000;
/// Zero draws rejected before the truncated sampler gives up.
inline constexpr int kRejectionCap = 10'000;

/// One draw from the family's pmf at the given linked parameters. An omega
/// supplied directly (for instance omega = 1) is used as is. Throws
/// std::runtime_error when a sampling cap is exceeded.
long draw(Family family, const LinkedParams& linked, std::optional<double> alpha,
          Generator& gen);

/// Row-wise draws under the regression links.
std::vector<long> sample(Family family, const Params& params, const RowMatrix& X,
                         const std::optional<RowMatrix>& Z, SeedSpec seed);

}  // namespace oitrunc
