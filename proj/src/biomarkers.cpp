#include "ngcl/biomarkers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "ngcl/dsp.hpp"
#include "ngcl/error.hpp"

namespace ngcl {

namespace {

std::vector<double> demeaned(std::span<const double> x) {
  const double m = dsp::mean(x);
  std::vector<double> y(x.begin(), x.end());
  for (auto& v : y) v -= m;
  return y;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

double spike_rate(std::span<const double> x, double fs) {
  if (!(fs > 0.0)) throw InvalidArgument("fs must be positive");
  if (static_cast<double>(x.size()) < fs) throw InvalidArgument("spike_rate needs at least 1 s of signal");
  const double duration = static_cast<double>(x.size()) / fs;

  const auto filtered = dsp::bandpass_zero_phase(demeaned(x), fs, 1.0, std::min(70.0, 0.45 * fs));
  // Robust scale: the spikes themselves must not inflate the SD they are measured against.
  const double mu = median(filtered);
  std::vector<double> dev(filtered.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(filtered[i] - mu);
  const double sd = 1.4826 * median(std::move(dev));
  if (!(sd > 1e-12 * (1.0 + std::abs(mu)))) return 0.0;

  const std::size_t n = filtered.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (filtered[i] - mu) / sd;

  struct Peak {
    std::size_t index;
    double height;
  };
  std::vector<Peak> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = std::abs(z[i]);
    if (a <= 5.0) continue;
    if (!(a > std::abs(z[i - 1]) && a >= std::abs(z[i + 1]))) continue;
    // Half-height width of the same-polarity lobe around the peak.
    const double half = a / 2.0;
    const double sign = z[i] > 0 ? 1.0 : -1.0;
    std::size_t left = i;
    while (left > 0 && sign * z[left - 1] >= half) --left;
    std::size_t right = i;
    while (right + 1 < n && sign * z[right + 1] >= half) ++right;
    const double width_ms = 1000.0 * static_cast<double>(right - left + 1) / fs;
    if (width_ms >= 20.0 && width_ms <= 70.0) candidates.push_back({i, a});
  }

  // Largest peaks claim their refractory neighbourhood first.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.height > b.height; });
  const double refractory = 0.1 * fs;
  std::vector<std::size_t> accepted;
  for (const auto& p : candidates) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t q) {
      return std::abs(static_cast<double>(q) - static_cast<double>(p.index)) < refractory;
    });
    if (clear) accepted.push_back(p.index);
  }
  return static_cast<double>(accepted.size()) / duration;
}

double hfo_rate(std::span<const double> x, double fs) {
  if (fs < 200.0) {
    spdlog::warn("hfo_rate: fs={} Hz cannot resolve the ripple band, reporting 0", fs);
    return 0.0;
  }
  if (x.size() < 8) return 0.0;
  const double duration = static_cast<double>(x.size()) / fs;
  const auto band = dsp::bandpass_zero_phase(demeaned(x), fs, 80.0, std::min(250.0, 0.45 * fs));
  const auto env = dsp::hilbert_envelope(band);
  const double mu = dsp::mean(env);
  const double sd = dsp::stddev(env);
  if (!(sd > 0.0)) return 0.0;
  const double threshold = mu + 3.0 * sd;
  const auto min_len = static_cast<std::size_t>(std::ceil(0.006 * fs));

  int events = 0;
  const std::size_t n = env.size();
  std::size_t i = 0;
  while (i < n) {
    if (env[i] <= threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && env[j] > threshold) ++j;
    if (j - i >= min_len) {
      int peaks = 0;
      for (std::size_t k = std::max<std::size_t>(i, 1); k < std::min(j, n - 1); ++k) {
        const double a = std::abs(band[k]);
        if (a > std::abs(band[k - 1]) && a >= std::abs(band[k + 1])) ++peaks;
      }
      if (peaks >= 4) ++events;
    }
    i = j;
  }
  return events / duration;
}

double sample_entropy(std::span<const double> x, int m, double r) {
  if (m < 1) throw InvalidArgument("sample_entropy: m must be >= 1");
  const auto n = x.size();
  if (n < static_cast<std::size_t>(m) + 2) throw InvalidArgument("sample_entropy: signal too short");
  const double tol = r * dsp::stddev(x);
  const std::size_t templates = n - static_cast<std::size_t>(m);

  double b = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < templates; ++i) {
    for (std::size_t j = i + 1; j < templates; ++j) {
      double dist = 0.0;
      for (int k = 0; k < m && dist <= tol; ++k) dist = std::max(dist, std::abs(x[i + k] - x[j + k]));
      if (dist > tol) continue;
      b += 1.0;
      if (std::abs(x[i + m] - x[j + m]) <= tol) a += 1.0;
    }
  }
  constexpr double kEps = 1e-10;
  return -std::log((a + kEps) / (b + kEps));
}

double petrosian_fd(std::span<const double> x) {
  const auto n = x.size();
  if (n < 3) throw InvalidArgument("petrosian_fd: need at least 3 samples");
  int changes = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d0 = x[i] - x[i - 1];
    const double d1 = x[i + 1] - x[i];
    if (d0 * d1 < 0.0) ++changes;
  }
  const double nn = static_cast<double>(n);
  const double l = std::log10(nn);
  return l / (l + std::log10(nn / (nn + 0.4 * changes)));
}

double katz_fd(std::span<const double> x) {
  const auto n = x.size();
  if (n < 2) throw InvalidArgument("katz_fd: need at least 2 samples");
  double length = 0.0;
  double extent = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dy = x[i + 1] - x[i];
    length += std::sqrt(1.0 + dy * dy);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double di = static_cast<double>(i);
    const double dy = x[i] - x[0];
    extent = std::max(extent, std::sqrt(di * di + dy * dy));
  }
  const double steps = std::log10(static_cast<double>(n - 1));
  return steps / (steps + std::log10(extent / length));
}

Eigen::MatrixXd minmax_columns(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double lo = raw.col(c).minCoeff();
    const double hi = raw.col(c).maxCoeff();
    if (hi > lo) {
      out.col(c) = (raw.col(c).array() - lo) / (hi - lo);
    } else {
      out.col(c).setConstant(0.5);
    }
  }
  return out;
}

NodeFeatureMatrix node_feature_matrix(const Segment& seg) {
  const auto n_ch = seg.samples.cols();
  Eigen::MatrixXd raw(n_ch, 5);
  for (Eigen::Index c = 0; c < n_ch; ++c) {
    const Eigen::VectorXd col = seg.samples.col(c);
    std::span<const double> x(col.data(), static_cast<std::size_t>(col.size()));
    raw(c, 0) = spike_rate(x, seg.fs);
    raw(c, 1) = hfo_rate(x, seg.fs);
    raw(c, 2) = sample_entropy(x);
    raw(c, 3) = petrosian_fd(x);
    raw(c, 4) = katz_fd(x);
  }
  if (!raw.allFinite()) throw NumericError("non-finite node feature");
  NodeFeatureMatrix out;
  out.values = minmax_columns(raw);
  return out;
}

}  // namespace ngcl
