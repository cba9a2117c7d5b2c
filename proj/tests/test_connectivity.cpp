#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ngcl/connectivity.hpp"
#include "ngcl/error.hpp"
#include "ngcl/signalio.hpp"

using namespace ngcl;

namespace {

constexpr double kPi = 3.14159265358979323846;

MvarModel model_from_b(std::vector<Eigen::MatrixXd> b, double fs) {
  MvarModel m;
  for (auto& bk : b) m.lambda.push_back(-bk);
  m.residual_cov = Eigen::MatrixXd::Identity(m.lambda.front().rows(), m.lambda.front().rows());
  m.fs = fs;
  return m;
}

Segment as_segment(const Recording& rec) { return Segment{rec.samples, rec.fs, Label::kInterictal}; }

}  // namespace

TEST(FitMvar, WhiteNoiseGivesSmallCoefficients) {
  const auto rec = synth_var_recording({}, 3, 500.0, 2.0, 1.0, 21);
  const auto m = fit_mvar(as_segment(rec), 2);
  for (int k = 1; k <= 2; ++k) EXPECT_LT(m.coefficient(k).cwiseAbs().maxCoeff(), 0.1);
}

TEST(FitMvar, RecoversPlantedCoefficient) {
  const std::vector<Coupling> c{{0, 1, 1, 0.5}};
  const auto rec = synth_var_recording(c, 2, 500.0, 8.0, 1.0, 4);  // 4000 samples
  const auto m = fit_mvar(as_segment(rec), 1);
  EXPECT_NEAR(m.coefficient(1)(1, 0), 0.5, 0.05);
  EXPECT_NEAR(m.coefficient(1)(0, 1), 0.0, 0.05);
}

// Estimation error shrinks with window length (consistency).
TEST(FitMvar, ErrorShrinksWithLongerWindows) {
  const std::vector<Coupling> c{{0, 1, 1, 0.5}, {1, 1, 1, 0.3}};
  double err_short = 0.0, err_long = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto shrt = synth_var_recording(c, 2, 500.0, 2.0, 1.0, 100 + seed);
    const auto lng = synth_var_recording(c, 2, 500.0, 8.0, 1.0, 100 + seed);
    err_short += std::pow(fit_mvar(as_segment(shrt), 1).coefficient(1)(1, 0) - 0.5, 2);
    err_long += std::pow(fit_mvar(as_segment(lng), 1).coefficient(1)(1, 0) - 0.5, 2);
  }
  EXPECT_LT(err_long, err_short);
}

TEST(FitMvar, ConstantChannelIsSingular) {
  auto rec = synth_var_recording({}, 3, 500.0, 2.0, 1.0, 2);
  rec.samples.col(1).setConstant(3.0);
  EXPECT_THROW(fit_mvar(as_segment(rec), 2), SingularError);
}

TEST(FitMvar, ResidualCovarianceIsSymmetricPsd) {
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.4}}, 4, 500.0, 2.0, 1.0, 8);
  const auto m = fit_mvar(as_segment(rec), 3);
  EXPECT_LT((m.residual_cov - m.residual_cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.residual_cov);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(TransferMatrix, IdentityWithoutLags) {
  const auto m = model_from_b({Eigen::MatrixXd::Zero(3, 3)}, 500.0);
  for (double f : {0.0, 17.0, 250.0})
    EXPECT_LT((transfer_matrix(m, f) - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TransferMatrix, DiagonalVarHasExactlyZeroOffDiagonal) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b.diagonal() << 0.5, -0.2, 0.7;
  const auto m = model_from_b({b, 0.1 * b}, 500.0);
  for (double f : {3.0, 40.0, 200.0}) {
    const auto h = transfer_matrix(m, f);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) EXPECT_EQ(h(i, j), std::complex<double>(0.0, 0.0));
  }
  const auto phi = band_dtf(m, {"all", 1.0, 250.0});
  EXPECT_EQ(phi.weights.cwiseAbs().maxCoeff(), 0.0);
}

// 2x2 VAR(1) with x2(t) = 0.5 x1(t-1): B is nilpotent, so H(f) = I + B z with z = e^{-i 2 pi f / fs}.
TEST(TransferMatrix, MatchesAnalyticTwoChannelInverse) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
  b(1, 0) = 0.5;
  const double fs = 500.0;
  const auto m = model_from_b({b}, fs);
  for (double f = 0.0; f <= 250.0; f += 12.5) {
    const std::complex<double> z = std::polar(1.0, -2.0 * kPi * f / fs);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(2, 2);
    expected(1, 0) = 0.5 * z;
    const auto h = transfer_matrix(m, f);
    EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-14) << f;
    EXPECT_GT(std::abs(h(1, 0)), 0.0);
  }
}

TEST(TransferMatrix, InvertsArPolynomialOnFittedModels) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uf(0.0, 250.0);
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.5}, {2, 3, 2, 0.4}, {1, 1, 1, 0.3}}, 5, 500.0, 2.0, 1.0, 3);
  const auto m = fit_mvar(as_segment(rec), 10);
  for (int i = 0; i < 10; ++i) {
    const double f = uf(rng);
    const Eigen::MatrixXcd prod = transfer_matrix(m, f) * ar_polynomial(m, f);
    EXPECT_LT((prod - Eigen::MatrixXcd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TransferMatrix, SingularPolynomialIsRejected) {
  // A(0) = I - B with B = I is exactly singular at f = 0.
  const auto m = model_from_b({Eigen::MatrixXd::Identity(2, 2)}, 100.0);
  EXPECT_THROW(transfer_matrix(m, 0.0), NumericError);
}

TEST(BandDtf, NormalizedRowsSumToOne) {
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.5}}, 4, 500.0, 2.0, 1.0, 6);
  const auto m = fit_mvar(as_segment(rec), 4);
  for (double f = 1.0; f <= 250.0; f += 1.0) {
    const auto psi = dtf_spectrum(m, f, true);
    EXPECT_LT((psi.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
  }
}

TEST(BandDtf, SumsTheIntegerGridAndZeroesTheDiagonal) {
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.5}}, 3, 500.0, 2.0, 1.0, 7);
  const auto m = fit_mvar(as_segment(rec), 2);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  for (int f = 5; f <= 9; ++f) expected += dtf_spectrum(m, f, false);  // ceil(4.5) .. floor(9.7)
  expected.diagonal().setZero();
  const auto phi = band_dtf(m, {"b", 4.5, 9.7}, false);
  EXPECT_LT((phi.weights - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(band_dtf(m, {"empty", 4.2, 4.8}), DegenerateError);
}

TEST(BandDtf, PlantedEdgesDominate) {
  const std::vector<Coupling> c{{0, 1, 1, 0.5}, {2, 3, 1, 0.5}};
  const auto rec = synth_var_recording(c, 5, 500.0, 2.0, 1.0, 10);
  const auto phi = band_dtf(fit_mvar(as_segment(rec), 2), {"all", 1.0, 250.0}).weights;
  double planted = 0.0, other = 0.0;
  int n_other = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      if ((i == 1 && j == 0) || (i == 3 && j == 2)) planted += phi(i, j) / 2.0;
      else {
        other += phi(i, j);
        ++n_other;
      }
    }
  EXPECT_GE(planted, 5.0 * other / n_other);
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 75.0), 3.25);
  EXPECT_DOUBLE_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 100.0), 4.0);
  EXPECT_DOUBLE_EQ(percentile({7.0}, 75.0), 7.0);
}

TEST(ThresholdTopQuartile, KeepsOnlyEntriesAtOrAboveQ) {
  ConnectivityMatrix c{Eigen::MatrixXd::Zero(3, 3), true};
  c.weights(0, 1) = 1.0;
  c.weights(1, 2) = 2.0;
  c.weights(2, 0) = 3.0;
  c.weights(0, 2) = 4.0;
  const auto t = threshold_top_quartile(c);
  EXPECT_EQ(t.weights(0, 2), 4.0);
  EXPECT_EQ((t.weights.array() != 0.0).count(), 1);
}

TEST(ThresholdTopQuartile, TiesAllSurviveAndZeroIsDegenerate) {
  ConnectivityMatrix c{Eigen::MatrixXd::Constant(4, 4, 0.3), true};
  c.weights.diagonal().setZero();
  EXPECT_EQ(threshold_top_quartile(c).weights, c.weights);
  EXPECT_THROW(threshold_top_quartile({Eigen::MatrixXd::Zero(3, 3), true}), DegenerateError);
}

TEST(ThresholdTopQuartile, KeepsBetweenAQuarterAndAllOfTheNonzeros) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 9;
    ConnectivityMatrix c{Eigen::MatrixXd::Zero(n, n), true};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && u(rng) < 0.6) c.weights(i, j) = std::round(u(rng) * 4.0) / 4.0 + 0.25;
    const auto nz = (c.weights.array() != 0.0).count();
    if (nz == 0) continue;
    const auto kept = (threshold_top_quartile(c).weights.array() != 0.0).count();
    EXPECT_GE(kept, 1);
    EXPECT_GE(4 * kept, nz);
    EXPECT_LE(kept, nz);
  }
}

TEST(UsableBands, FastRippleDroppedAt500Hz) {
  const auto bands = usable_bands(default_bands(), 500.0);
  ASSERT_EQ(bands.size(), 6u);
  EXPECT_EQ(bands.back().name, "ripple");
  EXPECT_EQ(bands.back().hi, 250.0);
  EXPECT_EQ(usable_bands(default_bands(), 2048.0).size(), 7u);
}

TEST(MultibandGraph, SingleBandEqualsItsThresholdedDtf) {
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.5}, {2, 0, 1, 0.4}}, 4, 500.0, 2.0, 1.0, 13);
  const std::vector<FrequencyBand> one{{"alpha", 8.0, 13.0}};
  const auto seg = as_segment(rec);
  const auto expected = threshold_top_quartile(band_dtf(fit_mvar(seg, 10), one[0]));
  EXPECT_LT((multiband_graph(seg, one, 10).weights - expected.weights).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MultibandGraph, MeanOverUsableBands) {
  const auto rec = synth_var_recording(std::vector<Coupling>{{0, 1, 1, 0.5}}, 3, 500.0, 2.0, 1.0, 14);
  const auto seg = as_segment(rec);
  const auto m = fit_mvar(seg, 10);
  const auto bands = default_bands();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& b : usable_bands(bands, 500.0)) sum += threshold_top_quartile(band_dtf(m, b)).weights;
  const auto got = multiband_graph(seg, bands, 10);
  EXPECT_LT((got.weights - sum / 6.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(got.weights.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(got.weights.minCoeff(), 0.0);
}
