#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngcl/signalio.hpp"

namespace ngcl {

// Multichannel autoregressive model in the convention
//   sum_{k=0..p} L(k) s(t-k) = e(t),  L(0) = I,  L(k) = -B(k),
// where B(k) are the regression coefficients of s(t) on s(t-k).
struct MvarModel {
  std::vector<Eigen::MatrixXd> lambda;  // L(1) .. L(p)
  Eigen::MatrixXd residual_cov;
  double fs = 0.0;

  int order() const { return static_cast<int>(lambda.size()); }
  Eigen::Index channels() const { return residual_cov.rows(); }
  // B(k) = -L(k), k >= 1; B(k)(dst, src) is the influence of src at lag k on dst.
  Eigen::MatrixXd coefficient(int k) const { return -lambda.at(k - 1); }
};

struct FrequencyBand {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

// weights(i, j) is the directed influence from channel j to channel i.
struct ConnectivityMatrix {
  Eigen::MatrixXd weights;
  bool directed = true;
};

// delta .. fast ripple, in Hz.
std::vector<FrequencyBand> default_bands();

// Bands clipped to [1, fs/2]; zero-width bands after clipping are dropped.
std::vector<FrequencyBand> usable_bands(std::span<const FrequencyBand> bands, double fs);

MvarModel fit_mvar(const Eigen::MatrixXd& samples, double fs, int order = 10);
MvarModel fit_mvar(const Segment& seg, int order = 10);

// A(f) = sum_k L(k) exp(-i 2 pi f k / fs).
Eigen::MatrixXcd ar_polynomial(const MvarModel& model, double f);
// H(f) = A(f)^-1.
Eigen::MatrixXcd transfer_matrix(const MvarModel& model, double f);

// |H_ij(f)|^2, optionally divided by its row sum. Diagonal retained.
Eigen::MatrixXd dtf_spectrum(const MvarModel& model, double f, bool normalized);

// Sum of dtf_spectrum over the integer-Hz grid inside the band, diagonal zeroed.
ConnectivityMatrix band_dtf(const MvarModel& model, const FrequencyBand& band,
                            bool normalized = true);

// Linear-interpolation percentile of a sample (q in [0, 100]).
double percentile(std::vector<double> values, double q);

// Keeps off-diagonal weights >= the 75th percentile of the nonzero off-diagonal weights.
ConnectivityMatrix threshold_top_quartile(const ConnectivityMatrix& c);

ConnectivityMatrix multiband_graph(const Segment& seg, std::span<const FrequencyBand> bands,
                                   int order = 10, bool normalized = true);

}  // namespace ngcl
