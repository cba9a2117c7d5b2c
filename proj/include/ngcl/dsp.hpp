#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ngcl::dsp {

// Direct-form II transposed second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

  static Biquad butterworth_lowpass(double cutoff_hz, double fs);
  static Biquad butterworth_highpass(double cutoff_hz, double fs);
};

std::vector<double> filter(std::span<const Biquad> sections, std::span<const double> x);

// Forward-backward filtering with odd reflection padding; zero phase.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x);

// 2nd-order high-pass at lo cascaded with 2nd-order low-pass at hi, run forward-backward.
// The low-pass stage is omitted when hi is at or above Nyquist.
std::vector<double> bandpass_zero_phase(std::span<const double> x, double fs, double lo, double hi);

// x + i*hilbert(x) via FFT.
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);
std::vector<double> hilbert_envelope(std::span<const double> x);

double mean(std::span<const double> x);
// Population standard deviation.
double stddev(std::span<const double> x);

}  // namespace ngcl::dsp
