#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oitrunc/dists.hpp"

using namespace oitrunc;

namespace {

constexpr double kE = 2.718281828459045;

LinkedParams linked_at(Family f, double lambda, std::optional<double> alpha, double omega) {
  LinkedParams lp;
  lp.lambda = lambda;
  if (alpha) lp.theta = lambda / *alpha;
  if (is_one_inflated(f)) {
    lp.lower_bound = lower_bound(f, lambda, alpha);
    lp.omega = omega;
  }
  return lp;
}

double total_mass(Family f, const LinkedParams& lp, std::optional<double> alpha) {
  double sum = 0.0;
  const double mu = lp.lambda;
  for (long y = 1; y < 2'000'000; ++y) {
    const double p = pmf(f, lp, alpha, y);
    sum += p;
    if (y > 10 * (mu + 10) && p < 1e-18) break;
  }
  return sum;
}

}  // namespace

TEST(Family, ParseAndPredicates) {
  EXPECT_EQ(parse_family("OIztnb"), Family::OIZTNB);
  EXPECT_THROW(parse_family("zip"), std::invalid_argument);
  EXPECT_TRUE(is_one_inflated(Family::OIPP));
  EXPECT_FALSE(is_negbin(Family::OIPP));
  EXPECT_EQ(base_family(Family::OIZTNB), Family::ZTNB);
  EXPECT_EQ(inflated_family(Family::PP), Family::OIPP);
}

TEST(Params, ValidateLayout) {
  Params p{Eigen::VectorXd::Zero(2), std::nullopt, std::nullopt};
  EXPECT_NO_THROW(validate(Family::PP, p));
  EXPECT_THROW(validate(Family::OIPP, p), std::invalid_argument);
  EXPECT_THROW(validate(Family::ZTNB, p), std::invalid_argument);
  p.alpha = -1.0;
  EXPECT_THROW(validate(Family::ZTNB, p), std::invalid_argument);
  p.alpha = 2.0;
  EXPECT_THROW(validate(Family::PP, p), std::invalid_argument);
  p.gamma = Eigen::VectorXd::Zero(1);
  EXPECT_NO_THROW(validate(Family::OIZTNB, p));
}

TEST(LambdaLink, Examples) {
  EXPECT_DOUBLE_EQ(lambda_link(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 5)), 1.0);
  EXPECT_NEAR(lambda_link(Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 0.25)), kE, 1e-15);
  EXPECT_NEAR(lambda_link(Eigen::Vector3d(1, 10, 1), Eigen::Vector3d(-2, 0.4, 0.2)),
              9.025013499434121, 1e-12);
}

TEST(LambdaLink, Errors) {
  EXPECT_THROW(lambda_link(Eigen::Vector2d(1, 0), Eigen::Vector3d(0, 0, 0)),
               std::invalid_argument);
  EXPECT_THROW(lambda_link(Eigen::Vector2d(1, 1000), Eigen::Vector2d(0, 1)), std::overflow_error);
}

TEST(LowerBound, Examples) {
  EXPECT_NEAR(lower_bound(Family::OIPP, 1.0, std::nullopt), -1.3922111911773328, 1e-14);
  EXPECT_NEAR(lower_bound(Family::OIZTNB, 1.0, 1.0), -1.0, 1e-15);
  EXPECT_NEAR(lower_bound(Family::OIZTNB, 1.0, 1e6), -1.3922111911773328, 1e-4);
  EXPECT_THROW(lower_bound(Family::PP, 1.0, std::nullopt), std::invalid_argument);
  EXPECT_THROW(lower_bound(Family::OIZTNB, 1.0, std::nullopt), std::invalid_argument);
}

TEST(LowerBound, AlwaysNegative) {
  for (double lambda : {1e-8, 1e-3, 0.5, 1.0, 5.0, 50.0, 700.0}) {
    EXPECT_LT(lower_bound(Family::OIPP, lambda, std::nullopt), 0.0) << lambda;
    for (double alpha : {0.01, 0.5, 1.0, 10.0, 1e6}) {
      EXPECT_LT(lower_bound(Family::OIZTNB, lambda, alpha), 0.0) << lambda << " " << alpha;
    }
  }
}

TEST(OmegaLink, Examples) {
  const Eigen::VectorXd z = Eigen::Vector2d(1.0, 3.0);
  EXPECT_DOUBLE_EQ(omega_link(z, Eigen::Vector2d(0.0, 0.0), -1.0), 0.0);
  EXPECT_NEAR(omega_link(z, Eigen::Vector2d(100.0, 0.0), -5.0), 1.0, 1e-15);
  EXPECT_NEAR(omega_from_index(0.0, -1.392211191177333), -0.19610559558866641, 1e-15);
  EXPECT_THROW(omega_link(z, Eigen::Vector3d(0, 0, 0), -1.0), std::invalid_argument);
}

TEST(OmegaLink, MonotoneAndInsideOpenInterval) {
  const double L = -1.5;
  double prev = L;
  for (double eta = -30.0; eta <= 30.0; eta += 0.5) {
    const double w = omega_from_index(eta, L);
    EXPECT_GT(w, prev);
    EXPECT_LT(w, 1.0);
    prev = w;
  }
}

TEST(Pmf, Examples) {
  const auto pp = linked_at(Family::PP, 1.0, std::nullopt, 0.0);
  EXPECT_NEAR(pmf(Family::PP, pp, std::nullopt, 1), 0.58197670686932642, 1e-15);

  const auto ztnb = linked_at(Family::ZTNB, 1.0, 1.0, 0.0);
  EXPECT_NEAR(pmf(Family::ZTNB, ztnb, 1.0, 2), 0.25, 1e-15);

  LinkedParams oiztnb = linked_at(Family::OIZTNB, 1.0, 1.0, 0.0);
  oiztnb.omega = omega_from_index(0.0, *oiztnb.lower_bound);
  EXPECT_DOUBLE_EQ(*oiztnb.omega, 0.0);
  EXPECT_NEAR(pmf(Family::OIZTNB, oiztnb, 1.0, 1), 0.5, 1e-15);
}

TEST(Pmf, OmegaZeroReducesToBase) {
  for (double lambda : {0.3, 1.0, 7.5}) {
    const auto oi = linked_at(Family::OIPP, lambda, std::nullopt, 0.0);
    const auto pp = linked_at(Family::PP, lambda, std::nullopt, 0.0);
    const auto oinb = linked_at(Family::OIZTNB, lambda, 2.0, 0.0);
    const auto nb = linked_at(Family::ZTNB, lambda, 2.0, 0.0);
    for (long y = 1; y <= 30; ++y) {
      EXPECT_NEAR(pmf(Family::OIPP, oi, std::nullopt, y), pmf(Family::PP, pp, std::nullopt, y),
                  1e-15);
      EXPECT_NEAR(pmf(Family::OIZTNB, oinb, 2.0, y), pmf(Family::ZTNB, nb, 2.0, y), 1e-15);
    }
  }
}

TEST(Pmf, Errors) {
  const auto pp = linked_at(Family::PP, 1.0, std::nullopt, 0.0);
  EXPECT_THROW(pmf(Family::PP, pp, std::nullopt, 0), std::domain_error);
  LinkedParams bad = linked_at(Family::OIPP, 1.0, std::nullopt, -3.0);
  EXPECT_THROW(pmf(Family::OIPP, bad, std::nullopt, 2), std::invalid_argument);
  EXPECT_THROW(pmf(Family::OIPP, pp, std::nullopt, 2), std::invalid_argument);
  EXPECT_THROW(pmf(Family::ZTNB, pp, std::nullopt, 2), std::invalid_argument);
}

TEST(Pmf, LargeCountsStayFinite) {
  const auto nb = linked_at(Family::ZTNB, 300.0, 1e4, 0.0);
  const double lp = log_pmf(Family::ZTNB, nb, 1e4, 300);
  EXPECT_TRUE(std::isfinite(lp));
  const auto pp = linked_at(Family::PP, 500.0, std::nullopt, 0.0);
  EXPECT_TRUE(std::isfinite(log_pmf(Family::PP, pp, std::nullopt, 450)));
}

TEST(Mean, Examples) {
  EXPECT_NEAR(mean(Family::OIPP, linked_at(Family::OIPP, 1.0, std::nullopt, 0.0), std::nullopt),
              1.5819767068693264, 1e-14);
  EXPECT_DOUBLE_EQ(
      mean(Family::OIPP, linked_at(Family::OIPP, 3.7, std::nullopt, 1.0), std::nullopt), 1.0);
  EXPECT_NEAR(mean(Family::OIZTNB, linked_at(Family::OIZTNB, 1.0, 1.0, 0.0), 1.0), 2.0, 1e-14);
}

TEST(Mean, MatchesPmfSum) {
  for (Family f : {Family::PP, Family::ZTNB, Family::OIPP, Family::OIZTNB}) {
    const std::optional<double> alpha = is_negbin(f) ? std::optional(3.0) : std::nullopt;
    const auto lp = linked_at(f, 4.0, alpha, 0.2);
    double m = 0.0;
    for (long y = 1; y < 400; ++y) m += static_cast<double>(y) * pmf(f, lp, alpha, y);
    EXPECT_NEAR(mean(f, lp, alpha), m, 1e-10) << to_string(f);
  }
}

TEST(DistsProperty, NormalizationGrid) {
  for (double lambda : {0.5, 1.0, 5.0, 20.0}) {
    EXPECT_GE(total_mass(Family::PP, linked_at(Family::PP, lambda, std::nullopt, 0), std::nullopt),
              1 - 1e-8);
    for (double alpha : {0.5, 1.0, 10.0}) {
      EXPECT_GE(total_mass(Family::ZTNB, linked_at(Family::ZTNB, lambda, alpha, 0), alpha),
                1 - 1e-8);
    }
    const double Lp = lower_bound(Family::OIPP, lambda, std::nullopt);
    for (double w : {Lp + 1e-9, 0.0, 0.5}) {
      const auto lp = linked_at(Family::OIPP, lambda, std::nullopt, w);
      EXPECT_GE(total_mass(Family::OIPP, lp, std::nullopt), 1 - 1e-8);
      EXPECT_LE(total_mass(Family::OIPP, lp, std::nullopt), 1 + 1e-8);
    }
    for (double alpha : {0.5, 1.0, 10.0}) {
      const double L = lower_bound(Family::OIZTNB, lambda, alpha);
      for (double w : {L + 1e-9, 0.0, 0.5}) {
        const auto lp = linked_at(Family::OIZTNB, lambda, alpha, w);
        const double s = total_mass(Family::OIZTNB, lp, alpha);
        EXPECT_GE(s, 1 - 1e-8) << lambda << " " << alpha << " " << w;
        EXPECT_LE(s, 1 + 1e-8);
      }
    }
  }
}

TEST(DistsProperty, MidpointIdentity) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ul(-5.0, 4.0), ua(-4.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double lambda = std::exp(ul(gen));
    const double alpha = std::exp(ua(gen));
    LinkedParams a = linked_at(Family::OIPP, lambda, std::nullopt, 0.0);
    a.omega = omega_from_index(0.0, *a.lower_bound);
    EXPECT_NEAR(pmf(Family::OIPP, a, std::nullopt, 1), 0.5, 1e-12);
    LinkedParams b = linked_at(Family::OIZTNB, lambda, alpha, 0.0);
    b.omega = omega_from_index(0.0, *b.lower_bound);
    EXPECT_NEAR(pmf(Family::OIZTNB, b, alpha, 1), 0.5, 1e-12);
  }
}

TEST(DistsProperty, DeflationFloor) {
  for (double eta : {-5.0, -20.0, -30.0, -200.0}) {
    LinkedParams a = linked_at(Family::OIPP, 2.0, std::nullopt, 0.0);
    a.omega = omega_from_index(eta, *a.lower_bound);
    const double p1 = pmf(Family::OIPP, a, std::nullopt, 1);
    EXPECT_GE(p1, 0.0);
    if (eta <= -30.0) EXPECT_LT(p1, 1e-9);
  }
}

TEST(DistsProperty, NegbinToPoissonLimit) {
  const double alpha = 1e6;
  for (double lambda : {0.5, 2.0, 6.0}) {
    const auto nb = linked_at(Family::OIZTNB, lambda, alpha, 0.1);
    const auto pp = linked_at(Family::OIPP, lambda, std::nullopt, 0.1);
    for (long y = 1; y <= 10; ++y) {
      EXPECT_LT(std::abs(pmf(Family::OIZTNB, nb, alpha, y) - pmf(Family::OIPP, pp, std::nullopt, y)),
                1e-4);
    }
  }
}

TEST(Helpers, LogGammaRatioAgreesAcrossBranches) {
  for (double alpha : {0.3, 1.0, 7.0, 1e5}) {
    for (long y : {1L, 10L, 64L, 65L, 500L}) {
      const double direct = std::lgamma(alpha + static_cast<double>(y)) - std::lgamma(alpha);
      EXPECT_NEAR(log_gamma_ratio(alpha, y), direct, 1e-9 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST(Helpers, Expm1Forms) {
  EXPECT_NEAR(log_expm1(1e-10), std::log(1e-10) + 5e-11, 1e-15);
  EXPECT_NEAR(log_expm1(800.0), 800.0, 1e-12);
  EXPECT_NEAR(expm1_minus_x(1e-4), 5.000166670833e-09, 1e-20);
  EXPECT_NEAR(expm1_minus_x(2.0), std::exp(2.0) - 3.0, 1e-14);
}
