#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ngcl {

enum class Label : int { kInterictal = 0, kIctal = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }
Label label_from_int(int v);

// Multichannel recording; samples are n_samples x n_channels in microvolts.
struct Recording {
  Eigen::MatrixXd samples;
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::optional<Eigen::Index> onset_sample;

  Eigen::Index n_samples() const { return samples.rows(); }
  Eigen::Index n_channels() const { return samples.cols(); }

  // Throws DataError if an invariant is violated.
  void validate() const;
};

struct Segment {
  Eigen::MatrixXd samples;  // w x n_channels
  double fs = 0.0;
  Label label = Label::kInterictal;
};

// Reads `<stem>.csv` and its sidecar `<stem>.meta` (fs=, channels=, onset_sample=).
Recording load_recording(const std::filesystem::path& csv_path);
void save_recording(const Recording& rec, const std::filesystem::path& csv_path);
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

// Returns (interictal, ictal) clips around the annotated onset, truncated at the
// recording boundaries.
std::pair<Recording, Recording> clip_peri_ictal(const Recording& rec, double pre_s = 10.0,
                                                double post_s = 10.0);

Eigen::Index window_length(double window_s, double fs);
Eigen::Index window_step(double window_s, double overlap, double fs);

std::vector<Segment> segment_windows(const Recording& rec, double window_s, double overlap,
                                     Label label);

// x_dst(t) += coeff * x_src(t - lag); channels are zero-based.
struct Coupling {
  int src = 0;
  int dst = 0;
  int lag = 1;
  double coeff = 0.0;
};

// Spectral radius of the companion matrix of the VAR process the couplings define.
double var_spectral_radius(std::span<const Coupling> couplings, int n_channels);

Recording synth_var_recording(std::span<const Coupling> couplings, int n_channels, double fs,
                              double duration_s, double noise_sd, std::uint64_t seed);

}  // namespace ngcl
