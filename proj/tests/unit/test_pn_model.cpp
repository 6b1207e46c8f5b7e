#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "grsm/pn_model.hpp"

using namespace grsm;

TEST(PnModel, CovarianceExamples) {
  PnConfig clo{0.1, 1.0, PnMode::Clo};
  const auto c3 = build_covariance(3, clo);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c3(i, j), 0.1);

  PnConfig ind{0.1, 0.0, PnMode::Independent};
  const auto c2 = build_covariance(2, ind);
  EXPECT_DOUBLE_EQ(c2(0, 0), 0.1);
  EXPECT_DOUBLE_EQ(c2(1, 1), 0.1);
  EXPECT_DOUBLE_EQ(c2(0, 1), 0.0);

  PnConfig zero{0.0, 1.0, PnMode::Clo};
  EXPECT_DOUBLE_EQ(build_covariance(1, zero)(0, 0), 0.0);
}

TEST(PnModel, CovarianceRejectsBadInput) {
  EXPECT_THROW(build_covariance(0, PnConfig{}), std::invalid_argument);
  EXPECT_THROW(build_covariance(2, PnConfig{-0.1, 1.0, PnMode::Clo}), std::invalid_argument);
  EXPECT_THROW(build_covariance(2, PnConfig{0.1, 1.5, PnMode::General}), std::invalid_argument);
  EXPECT_THROW(build_covariance(2, PnConfig{0.1, -0.2, PnMode::General}), std::invalid_argument);
}

TEST(PnModel, EquicorrelatedEigenvalues) {
  for (const double rho : {0.0, 0.3, 0.8, 1.0}) {
    for (const std::size_t n : {2u, 5u, 8u}) {
      PnConfig cfg{0.1, rho, PnMode::General};
      const auto sigma = build_covariance(n, cfg);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
      const auto ev = es.eigenvalues();  // ascending
      const double small = 0.1 * (1 - rho);
      const double big = 0.1 * (1 + (static_cast<double>(n) - 1) * rho);
      for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) EXPECT_NEAR(ev(i), small, 1e-12);
      EXPECT_NEAR(ev(ev.size() - 1), big, 1e-12);
    }
  }
}

TEST(PnModel, CloReplicatesExactly) {
  PnConfig cfg{0.1, 1.0, PnMode::Clo};
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto pn = sample_pn(cfg, 4, rng);
    for (const double p : pn.tx_phases) EXPECT_EQ(p, pn.tx_phases[0]);
  }
}

TEST(PnModel, ZeroVarianceAndOffAreExactZero) {
  Rng rng(4);
  for (const auto mode : {PnMode::Off, PnMode::Clo, PnMode::Independent}) {
    PnConfig cfg{mode == PnMode::Off ? 0.1 : 0.0, 1.0, mode};
    const auto pn = sample_pn(cfg, 6, rng);
    for (const double p : pn.tx_phases) EXPECT_EQ(p, 0.0);
    EXPECT_EQ(pn.rx_phase, 0.0);
  }
}

TEST(PnModel, IndependentChainVariance) {
  PnConfig cfg{0.1, 0.0, PnMode::Independent};
  Rng rng(5);
  const std::size_t n = 1000000;
  std::vector<double> s2(3, 0.0);
  double rx2 = 0.0, cross = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto pn = sample_pn(cfg, 3, rng);
    for (std::size_t k = 0; k < 3; ++k) s2[k] += pn.tx_phases[k] * pn.tx_phases[k];
    rx2 += pn.rx_phase * pn.rx_phase;
    cross += pn.tx_phases[0] * pn.tx_phases[1];
  }
  for (const double v : s2) EXPECT_NEAR(v / n, 0.1, 0.001);
  EXPECT_NEAR(rx2 / n, 0.1, 0.001);
  EXPECT_NEAR(cross / n, 0.0, 0.001);
}

TEST(PnModel, GeneralModeCorrelation) {
  PnConfig cfg{0.2, 0.6, PnMode::General};
  Rng rng(6);
  const std::size_t n = 400000;
  double c01 = 0.0, v0 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto pn = sample_pn(cfg, 2, rng);
    c01 += pn.tx_phases[0] * pn.tx_phases[1];
    v0 += pn.tx_phases[0] * pn.tx_phases[0];
  }
  EXPECT_NEAR(v0 / n, 0.2, 0.003);
  EXPECT_NEAR(c01 / n, 0.12, 0.003);
}

TEST(PnModel, CombinedTermExamples) {
  const std::vector<double> zero{0.0};
  const bool one[] = {true};
  const auto a = combined_pn_term(0.0, zero, one);
  EXPECT_DOUBLE_EQ(a.real(), 1.0);
  EXPECT_DOUBLE_EQ(a.imag(), 0.0);

  const std::vector<double> p{0.2};
  const auto b = combined_pn_term(0.1, p, one);
  EXPECT_NEAR(std::abs(b - std::polar(1.0, 0.3)), 0.0, 1e-15);

  const std::vector<double> two{0.3, -0.4};
  const bool none[] = {false, false};
  EXPECT_EQ(combined_pn_term(0.5, two, none), std::complex<double>(0.0, 0.0));
}

TEST(PnModel, CombinedVarianceLaw) {
  EXPECT_DOUBLE_EQ(combined_pn_variance(1, 0.1), 0.2);
  EXPECT_DOUBLE_EQ(combined_pn_variance(2, 0.1), 0.15);
  EXPECT_DOUBLE_EQ(combined_pn_variance(4, 0.1), 0.125);
  EXPECT_THROW(combined_pn_variance(0, 0.1), std::invalid_argument);
  for (std::size_t n = 1; n < 10; ++n) {
    EXPECT_GT(combined_pn_variance(n, 0.1), combined_pn_variance(n + 1, 0.1));
  }
}

namespace {

double mc_combined_variance(double var, std::size_t n, std::size_t samples, std::uint64_t seed) {
  PnConfig cfg{var, 0.0, PnMode::Independent};
  Rng rng(seed);
  const auto flags = std::make_unique<bool[]>(n);
  std::fill_n(flags.get(), n, true);
  double s = 0.0, s2 = 0.0;
  for (std::size_t t = 0; t < samples; ++t) {
    const auto pn = sample_pn(cfg, n, rng);
    const double a = std::arg(combined_pn_term(pn.rx_phase, pn.tx_phases, {flags.get(), n}));
    s += a;
    s2 += a * a;
  }
  const double m = s / samples;
  return s2 / samples - m * m;
}

}  // namespace

TEST(PnModel, MonteCarloVarianceLaw) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const double hi = mc_combined_variance(0.1, n, 1000000, 100 + n);
    EXPECT_NEAR(hi / combined_pn_variance(n, 0.1), 1.0, 0.02) << n;
    const double lo = mc_combined_variance(0.01, n, 4000000, 200 + n);
    EXPECT_NEAR(lo / combined_pn_variance(n, 0.01), 1.0, 0.002) << n;
  }
}

TEST(PnModel, ModeParsing) {
  EXPECT_EQ(parse_pn_mode("clo"), PnMode::Clo);
  EXPECT_EQ(parse_pn_mode("general"), PnMode::General);
  EXPECT_EQ(to_string(PnMode::Independent), "independent");
  EXPECT_THROW(parse_pn_mode("wiener"), std::invalid_argument);
}
