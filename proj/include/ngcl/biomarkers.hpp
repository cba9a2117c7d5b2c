#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngcl/signalio.hpp"

namespace ngcl {

inline constexpr std::array<const char*, 5> kFeatureNames = {
    "spike_rate", "hfo_rate", "sample_entropy", "pfd", "kfd"};

// n_channels x 5, columns in kFeatureNames order.
struct NodeFeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> feature_names{kFeatureNames.begin(), kFeatureNames.end()};
};

// Threshold spike detector: 1-70 Hz band-pass, robust z (median, 1.4826 MAD), |z| > 5
// local peaks with 20-70 ms half-height width, 100 ms refractory. Events per second.
double spike_rate(std::span<const double> x, double fs);

// Hilbert-envelope HFO detector on the 80-min(250, 0.45 fs) Hz band: envelope above
// mean + 3 SD for >= 6 ms containing >= 4 rectified peaks. Events per second.
double hfo_rate(std::span<const double> x, double fs);

double sample_entropy(std::span<const double> x, int m = 2, double r = 0.2);
double petrosian_fd(std::span<const double> x);
double katz_fd(std::span<const double> x);

// Five features per channel, each column min-max normalized across channels
// (a constant column becomes 0.5).
NodeFeatureMatrix node_feature_matrix(const Segment& seg);

// Column-wise min-max normalization with the 0.5 tie rule.
Eigen::MatrixXd minmax_columns(const Eigen::MatrixXd& raw);

}  // namespace ngcl
