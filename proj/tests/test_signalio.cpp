#include <fstream>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ngcl/error.hpp"
#include "ngcl/signalio.hpp"
#include "test_util.hpp"

using namespace ngcl;

namespace {

Recording ramp_recording(Eigen::Index n, int channels, double fs) {
  Recording rec;
  rec.samples.resize(n, channels);
  for (Eigen::Index t = 0; t < n; ++t)
    for (int c = 0; c < channels; ++c) rec.samples(t, c) = static_cast<double>(t * 10 + c);
  rec.fs = fs;
  for (int c = 0; c < channels; ++c) rec.channel_names.push_back("ch" + std::to_string(c));
  return rec;
}

void write_pair(const std::filesystem::path& csv, const std::string& body, const std::string& meta) {
  std::ofstream(csv) << body;
  std::ofstream(meta_path_for(csv)) << meta;
}

}  // namespace

TEST(LoadRecording, ParsesThreeChannelsAtFs500) {
  const auto dir = ngcl::testing::temp_dir("load3");
  std::string body;
  for (int t = 0; t < 1000; ++t) body += std::to_string(t) + ",1.5,-2\n";
  write_pair(dir / "r.csv", body, "fs=500\nchannels=a,b,c\nonset_sample=10\n");
  const auto rec = load_recording(dir / "r.csv");
  EXPECT_EQ(rec.n_samples(), 1000);
  EXPECT_EQ(rec.n_channels(), 3);
  EXPECT_EQ(rec.fs, 500.0);
  EXPECT_EQ(rec.samples(999, 0), 999.0);
  EXPECT_EQ(rec.onset_sample, 10);
}

TEST(LoadRecording, RaggedRowNamesTheLine) {
  const auto dir = ngcl::testing::temp_dir("ragged");
  write_pair(dir / "r.csv", "1,2,3\n4,5,6\n7,8\n", "fs=500\nchannels=a,b,c\n");
  try {
    load_recording(dir / "r.csv");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(LoadRecording, OnsetIsOptionalAndFsMustBePositive) {
  const auto dir = ngcl::testing::temp_dir("meta");
  write_pair(dir / "r.csv", "1,2\n3,4\n", "fs=250\nchannels=a,b\n");
  EXPECT_FALSE(load_recording(dir / "r.csv").onset_sample.has_value());
  write_pair(dir / "s.csv", "1,2\n3,4\n", "fs=0\nchannels=a,b\n");
  EXPECT_THROW(load_recording(dir / "s.csv"), DataError);
  EXPECT_THROW(load_recording(dir / "missing.csv"), MissingArtifactError);
}

TEST(LoadRecording, SaveLoadRoundTripIsExact) {
  const auto dir = ngcl::testing::temp_dir("save");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 50.0);
  Recording rec = ramp_recording(300, 4, 512.0);
  for (Eigen::Index t = 0; t < rec.n_samples(); ++t)
    for (Eigen::Index c = 0; c < 4; ++c) rec.samples(t, c) = n(rng);
  rec.onset_sample = 123;
  save_recording(rec, dir / "x.csv");
  const auto back = load_recording(dir / "x.csv");
  EXPECT_EQ(back.samples, rec.samples);
  EXPECT_EQ(back.channel_names, rec.channel_names);
  EXPECT_EQ(back.onset_sample, rec.onset_sample);
  EXPECT_EQ(back.fs, rec.fs);
}

TEST(ClipPeriIctal, TenSecondsEachSide) {
  auto rec = ramp_recording(20000, 2, 500.0);
  rec.onset_sample = 6000;
  const auto [inter, ictal] = clip_peri_ictal(rec, 10.0, 10.0);
  EXPECT_EQ(inter.n_samples(), 5000);
  EXPECT_EQ(inter.samples(0, 0), rec.samples(1000, 0));
  EXPECT_EQ(ictal.n_samples(), 5000);
  EXPECT_EQ(ictal.samples(0, 0), rec.samples(6000, 0));
  EXPECT_EQ(ictal.samples(4999, 0), rec.samples(10999, 0));
}

TEST(ClipPeriIctal, TruncatesAtBoundariesAndNeedsOnset) {
  auto rec = ramp_recording(4000, 2, 500.0);
  rec.onset_sample = 2000;
  const auto [inter, ictal] = clip_peri_ictal(rec, 10.0, 10.0);
  EXPECT_EQ(inter.n_samples(), 2000);
  EXPECT_EQ(inter.samples(0, 1), rec.samples(0, 1));
  EXPECT_EQ(ictal.n_samples(), 2000);
  EXPECT_LE(inter.n_samples() + ictal.n_samples(), static_cast<Eigen::Index>(20 * 500));
  rec.onset_sample.reset();
  EXPECT_THROW(clip_peri_ictal(rec), DataError);
}

TEST(SegmentWindows, TenSecondsGivesNineWindowsOf1000Rows) {
  const auto rec = ramp_recording(5000, 3, 500.0);
  const auto segs = segment_windows(rec, 2.0, 0.5, Label::kIctal);
  ASSERT_EQ(segs.size(), 9u);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(segs[i].samples.rows(), 1000);
    EXPECT_EQ(segs[i].samples(0, 0), rec.samples(static_cast<Eigen::Index>(i) * 500, 0));
    EXPECT_EQ(segs[i].label, Label::kIctal);
  }
}

TEST(SegmentWindows, ExactAndTooShort) {
  EXPECT_EQ(segment_windows(ramp_recording(1000, 2, 500.0), 2.0, 0.5, Label::kInterictal).size(), 1u);
  EXPECT_THROW(segment_windows(ramp_recording(950, 2, 500.0), 2.0, 0.5, Label::kInterictal), DataError);
}

// Window count against a naive enumeration of every admissible start.
TEST(SegmentWindows, CountMatchesNaiveEnumeration) {
  for (double fs : {100.0, 256.0, 500.0, 1024.0}) {
    for (Eigen::Index n = 0; n < 8000; n += 137) {
      const auto w = static_cast<Eigen::Index>(std::llround(2.0 * fs));
      const auto s = static_cast<Eigen::Index>(std::llround(static_cast<double>(w) / 2.0));
      std::size_t naive = 0;
      for (Eigen::Index start = 0; start + w <= n; start += s) ++naive;
      const auto rec = ramp_recording(n, 2, fs);
      if (naive == 0) {
        EXPECT_THROW(segment_windows(rec, 2.0, 0.5, Label::kIctal), DataError);
      } else {
        EXPECT_EQ(segment_windows(rec, 2.0, 0.5, Label::kIctal).size(), naive) << "fs=" << fs << " n=" << n;
      }
    }
  }
}

TEST(SynthVar, DeterministicPerSeed) {
  const std::vector<Coupling> c{{0, 1, 1, 0.5}};
  const auto a = synth_var_recording(c, 3, 500.0, 2.0, 1.0, 11);
  const auto b = synth_var_recording(c, 3, 500.0, 2.0, 1.0, 11);
  const auto d = synth_var_recording(c, 3, 500.0, 2.0, 1.0, 12);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, d.samples);
  EXPECT_EQ(a.n_samples(), 1000);
}

TEST(SynthVar, ZeroNoiseZeroCouplingIsSilent) {
  const auto rec = synth_var_recording({}, 3, 500.0, 1.0, 0.0, 5);
  EXPECT_EQ(rec.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SynthVar, UncoupledChannelsAreUncorrelatedUnitNoise) {
  const auto rec = synth_var_recording({}, 3, 500.0, 40.0, 1.0, 9);
  const Eigen::MatrixXd x = rec.samples.rowwise() - rec.samples.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(x.rows() - 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(cov(i, i), 1.0, 0.05);
    for (int j = 0; j < i; ++j) EXPECT_NEAR(cov(i, j), 0.0, 0.05);
  }
}

// Companion-matrix radius against a direct eigendecomposition built here.
TEST(SynthVar, UnstableSelfLagRejected) {
  const std::vector<Coupling> unstable{{0, 0, 1, 1.5}};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(2, 2);
  companion(0, 0) = 1.5;
  const double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(var_spectral_radius(unstable, 2), radius, 1e-12);
  EXPECT_THROW(synth_var_recording(unstable, 2, 500.0, 2.0, 1.0, 1), NumericError);

  const std::vector<Coupling> lag2{{0, 0, 1, 0.5}, {0, 0, 2, -0.3}, {0, 1, 2, 0.4}};
  Eigen::MatrixXd c4 = Eigen::MatrixXd::Zero(4, 4);
  c4(0, 0) = 0.5;
  c4(0, 2) = -0.3;
  c4(1, 2) = 0.4;
  c4(2, 0) = 1.0;
  c4(3, 1) = 1.0;
  EXPECT_NEAR(var_spectral_radius(lag2, 2), c4.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
}
