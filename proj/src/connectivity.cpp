#include "ngcl/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/QR>

#include "ngcl/error.hpp"

namespace ngcl {

std::vector<FrequencyBand> default_bands() {
  return {
      {"delta", 1.0, 4.0},     {"theta", 4.0, 8.0},     {"alpha", 8.0, 13.0},
      {"beta", 13.0, 30.0},    {"gamma", 30.0, 80.0},   {"ripple", 80.0, 250.0},
      {"fast_ripple", 250.0, 500.0},
  };
}

std::vector<FrequencyBand> usable_bands(std::span<const FrequencyBand> bands, double fs) {
  std::vector<FrequencyBand> out;
  for (const auto& b : bands) {
    FrequencyBand c = b;
    c.lo = std::max(c.lo, 1.0);
    c.hi = std::min(c.hi, fs / 2.0);
    if (c.lo < c.hi && std::ceil(c.lo) <= std::floor(c.hi)) out.push_back(c);
  }
  return out;
}

MvarModel fit_mvar(const Eigen::MatrixXd& samples, double fs, int order) {
  if (order < 1) throw InvalidArgument("MVAR order must be >= 1");
  const Eigen::Index w = samples.rows();
  const Eigen::Index n = samples.cols();
  const Eigen::Index rows = w - order;
  const Eigen::Index regressors = n * order;
  if (rows < regressors) {
    throw InvalidArgument("segment too short for MVAR order " + std::to_string(order) + " with " +
                          std::to_string(n) + " channels");
  }

  const Eigen::MatrixXd x = samples.rowwise() - samples.colwise().mean();
  Eigen::MatrixXd design(rows, regressors);
  for (int k = 1; k <= order; ++k) design.middleCols((k - 1) * n, n) = x.middleRows(order - k, rows);
  const Eigen::MatrixXd target = x.bottomRows(rows);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < regressors) {
    throw SingularError("MVAR regressor matrix is rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " + std::to_string(regressors) + ")");
  }
  const Eigen::MatrixXd coef = qr.solve(target);  // regressors x n; coef^T = [B(1) .. B(p)]
  const Eigen::MatrixXd resid = target - design * coef;

  MvarModel model;
  model.fs = fs;
  for (int k = 1; k <= order; ++k)
    model.lambda.push_back(-coef.middleRows((k - 1) * n, n).transpose());
  const Eigen::MatrixXd centered = resid.rowwise() - resid.colwise().mean();
  model.residual_cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(rows - 1, 1));
  return model;
}

MvarModel fit_mvar(const Segment& seg, int order) { return fit_mvar(seg.samples, seg.fs, order); }

Eigen::MatrixXcd ar_polynomial(const MvarModel& model, double f) {
  const auto n = model.channels();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= model.order(); ++k) {
    const double phase = -2.0 * std::numbers::pi * f * k / model.fs;
    a += model.lambda[k - 1].cast<std::complex<double>>() * std::polar(1.0, phase);
  }
  return a;
}

Eigen::MatrixXcd transfer_matrix(const MvarModel& model, double f) {
  if (f < 0.0 || f > model.fs / 2.0) throw InvalidArgument("frequency outside [0, fs/2]");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ar_polynomial(model, f));
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericError("A(f) ill-conditioned at f=" + std::to_string(f) + " Hz");
  }
  return lu.inverse();
}

Eigen::MatrixXd dtf_spectrum(const MvarModel& model, double f, bool normalized) {
  Eigen::MatrixXd theta = transfer_matrix(model, f).cwiseAbs2();
  if (normalized) {
    const Eigen::VectorXd rows = theta.rowwise().sum();
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
      if (rows(i) > 0.0) theta.row(i) /= rows(i);
    }
  }
  return theta;
}

ConnectivityMatrix band_dtf(const MvarModel& model, const FrequencyBand& band, bool normalized) {
  const int f_lo = static_cast<int>(std::ceil(band.lo));
  const int f_hi = static_cast<int>(std::floor(band.hi));
  if (f_lo > f_hi) throw DegenerateError("band '" + band.name + "' has an empty frequency grid");
  const auto n = model.channels();
  ConnectivityMatrix out{Eigen::MatrixXd::Zero(n, n), true};
  for (int f = f_lo; f <= f_hi; ++f) out.weights += dtf_spectrum(model, f, normalized);
  out.weights.diagonal().setZero();
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConnectivityMatrix threshold_top_quartile(const ConnectivityMatrix& c) {
  const auto n = c.weights.rows();
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && c.weights(i, j) != 0.0) nonzero.push_back(c.weights(i, j));
  if (nonzero.empty()) throw DegenerateError("connectivity matrix has no nonzero off-diagonal entry");
  const double q = percentile(nonzero, 75.0);

  ConnectivityMatrix out = c;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i == j || out.weights(i, j) < q) out.weights(i, j) = 0.0;
  return out;
}

ConnectivityMatrix multiband_graph(const Segment& seg, std::span<const FrequencyBand> bands,
                                   int order, bool normalized) {
  const auto valid = usable_bands(bands, seg.fs);
  if (valid.empty()) throw DegenerateError("no frequency band below Nyquist");
  const auto model = fit_mvar(seg, order);
  const auto n = model.channels();
  ConnectivityMatrix mean{Eigen::MatrixXd::Zero(n, n), true};
  for (const auto& band : valid) mean.weights += threshold_top_quartile(band_dtf(model, band, normalized)).weights;
  mean.weights /= static_cast<double>(valid.size());
  return mean;
}

}  // namespace ngcl
