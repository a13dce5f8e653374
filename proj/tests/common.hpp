#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "oitrunc/design.hpp"
#include "oitrunc/fit.hpp"
#include "oitrunc/infer.hpp"
#include "oitrunc/rng.hpp"

namespace testing_support {

inline std::optional<std::filesystem::path> fixture(const std::string& name) {
  std::filesystem::path p = std::filesystem::path(OITRUNC_DATA_DIR) / name;
  if (!std::filesystem::exists(p)) return std::nullopt;
  return p;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

inline oitrunc::Dataset make_dataset(std::vector<std::string> names,
                                     std::vector<std::vector<double>> cols) {
  oitrunc::Dataset d;
  d.column_names = std::move(names);
  d.columns = std::move(cols);
  return d;
}

inline oitrunc::ModelSpec medpar_spec(oitrunc::Family f) {
  oitrunc::ModelSpec s;
  s.family = f;
  s.response = "los";
  s.x_terms = {"white", "died", "type2", "type3"};
  if (oitrunc::is_one_inflated(f)) s.z_terms = s.x_terms;
  return s;
}

inline oitrunc::ModelSpec azdrg_spec(oitrunc::Family f) {
  oitrunc::ModelSpec s;
  s.family = f;
  s.response = "los";
  s.x_terms = {"gender", "type1", "age75"};
  if (oitrunc::is_one_inflated(f)) s.z_terms = s.x_terms;
  return s;
}

// Pearson goodness-of-fit p-value of n draws against the pmf. Support points
// are pooled left to right until each bin expects at least five; the tail
// beyond the last full bin is one final bin.
inline double gof_p_value(oitrunc::Family f, const oitrunc::LinkedParams& lp,
                          std::optional<double> alpha, int n, oitrunc::SeedSpec seed) {
  oitrunc::Generator gen(seed);
  std::map<long, int> counts;
  for (int i = 0; i < n; ++i) ++counts[oitrunc::draw(f, lp, alpha, gen)];
  double stat = 0.0, cum = 0.0, exp_bin = 0.0, obs_bin = 0.0;
  double exp_used = 0.0, obs_used = 0.0;
  int bins = 0;
  for (long y = 1; n * (1.0 - cum) >= 5.0; ++y) {
    const double p = oitrunc::pmf(f, lp, alpha, y);
    cum += p;
    exp_bin += n * p;
    const auto it = counts.find(y);
    obs_bin += it == counts.end() ? 0 : it->second;
    if (exp_bin >= 5.0 && n * (1.0 - cum) >= 5.0) {
      stat += (obs_bin - exp_bin) * (obs_bin - exp_bin) / exp_bin;
      exp_used += exp_bin;
      obs_used += obs_bin;
      exp_bin = obs_bin = 0.0;
      ++bins;
    }
  }
  const double exp_last = n - exp_used, obs_last = n - obs_used;
  stat += (obs_last - exp_last) * (obs_last - exp_last) / exp_last;
  ++bins;
  return oitrunc::chisq_upper_tail(stat, bins - 1);
}

}  // namespace testing_support
