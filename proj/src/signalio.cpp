#include "ngcl/signalio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

Label label_from_int(int v) {
  if (v != 0 && v != 1) throw DataError("label must be 0 or 1, got " + std::to_string(v));
  return static_cast<Label>(v);
}

void Recording::validate() const {
  if (n_channels() < 2) throw DataError("recording needs at least 2 channels");
  if (!(fs > 0.0)) throw DataError("sampling rate must be positive");
  if (!channel_names.empty() &&
      static_cast<Eigen::Index>(channel_names.size()) != n_channels())
    throw DataError("channel name count does not match sample columns");
  if (onset_sample && (*onset_sample < 0 || *onset_sample >= n_samples()))
    throw DataError("onset_sample outside the recording");
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta");
  return p;
}

namespace {

struct Metadata {
  double fs = 0.0;
  std::vector<std::string> channels;
  std::optional<Eigen::Index> onset;
};

Metadata read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open metadata file " + path.string());
  Metadata meta;
  bool have_fs = false;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path.string(), lineno, "expected key=value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "fs") {
      auto v = parse_double(value);
      if (!v) throw ParseError(path.string(), lineno, "fs is not a number");
      meta.fs = *v;
      have_fs = true;
    } else if (key == "channels" || key == "channel_names") {
      meta.channels = split(value, ',');
      for (auto& c : meta.channels) c = trim(c);
    } else if (key == "onset_sample") {
      auto v = parse_long(value);
      if (!v) throw ParseError(path.string(), lineno, "onset_sample is not an integer");
      meta.onset = *v;
    }
  }
  if (!have_fs) throw DataError(path.string() + ": metadata missing fs");
  if (!(meta.fs > 0.0)) throw DataError(path.string() + ": fs must be positive");
  if (meta.channels.empty()) throw DataError(path.string() + ": metadata missing channels");
  return meta;
}

}  // namespace

Recording load_recording(const std::filesystem::path& csv_path) {
  const auto meta = read_metadata(meta_path_for(csv_path));
  std::ifstream in(csv_path);
  if (!in) throw MissingArtifactError("cannot open recording " + csv_path.string());

  const auto n_ch = meta.channels.size();
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  long rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != n_ch) {
      throw ParseError(csv_path.string(), lineno,
                       "expected " + std::to_string(n_ch) + " values, got " +
                           std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      auto v = parse_double(trim(f));
      if (!v) throw ParseError(csv_path.string(), lineno, "not a number: '" + f + "'");
      values.push_back(*v);
    }
    ++rows;
  }

  Recording rec;
  rec.fs = meta.fs;
  rec.channel_names = meta.channels;
  rec.onset_sample = meta.onset;
  rec.samples = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Eigen::Index>(n_ch));
  rec.validate();
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& csv_path) {
  rec.validate();
  {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write " + csv_path.string());
    for (Eigen::Index r = 0; r < rec.n_samples(); ++r) {
      for (Eigen::Index c = 0; c < rec.n_channels(); ++c) {
        if (c) out << ',';
        out << format_double(rec.samples(r, c));
      }
      out << '\n';
    }
  }
  std::ofstream meta(meta_path_for(csv_path));
  if (!meta) throw DataError("cannot write metadata for " + csv_path.string());
  meta << "fs=" << format_double(rec.fs) << '\n';
  meta << "channels=";
  for (Eigen::Index c = 0; c < rec.n_channels(); ++c) {
    if (c) meta << ',';
    meta << (rec.channel_names.empty() ? "ch" + std::to_string(c + 1) : rec.channel_names[c]);
  }
  meta << '\n';
  if (rec.onset_sample) meta << "onset_sample=" << *rec.onset_sample << '\n';
}

std::pair<Recording, Recording> clip_peri_ictal(const Recording& rec, double pre_s,
                                                double post_s) {
  if (!rec.onset_sample) throw DataError("recording has no seizure-onset annotation");
  if (pre_s < 0.0 || post_s < 0.0) throw InvalidArgument("clip lengths must be nonnegative");
  const auto onset = *rec.onset_sample;
  const auto pre = static_cast<Eigen::Index>(std::llround(pre_s * rec.fs));
  const auto post = static_cast<Eigen::Index>(std::llround(post_s * rec.fs));
  const auto begin = std::max<Eigen::Index>(0, onset - pre);
  const auto end = std::min<Eigen::Index>(rec.n_samples(), onset + post);

  Recording inter;
  inter.fs = rec.fs;
  inter.channel_names = rec.channel_names;
  inter.samples = rec.samples.middleRows(begin, onset - begin);
  Recording ictal;
  ictal.fs = rec.fs;
  ictal.channel_names = rec.channel_names;
  ictal.samples = rec.samples.middleRows(onset, end - onset);
  return {std::move(inter), std::move(ictal)};
}

Eigen::Index window_length(double window_s, double fs) {
  return static_cast<Eigen::Index>(std::llround(window_s * fs));
}

Eigen::Index window_step(double window_s, double overlap, double fs) {
  return static_cast<Eigen::Index>(std::llround(window_s * fs * (1.0 - overlap)));
}

std::vector<Segment> segment_windows(const Recording& rec, double window_s, double overlap,
                                     Label label) {
  if (!(window_s > 0.0)) throw InvalidArgument("window length must be positive");
  if (overlap < 0.0 || overlap >= 1.0) throw InvalidArgument("overlap must be in [0, 1)");
  const auto w = window_length(window_s, rec.fs);
  const auto step = window_step(window_s, overlap, rec.fs);
  if (w < 1 || step < 1) throw InvalidArgument("window or step shorter than one sample");
  if (rec.n_samples() < w) {
    throw DataError("recording of " + std::to_string(rec.n_samples()) +
                    " samples is shorter than one window (" + std::to_string(w) + ")");
  }
  std::vector<Segment> out;
  for (Eigen::Index start = 0; start + w <= rec.n_samples(); start += step) {
    out.push_back(Segment{rec.samples.middleRows(start, w), rec.fs, label});
  }
  return out;
}

namespace {

int max_lag(std::span<const Coupling> couplings) {
  int p = 1;
  for (const auto& c : couplings) p = std::max(p, c.lag);
  return p;
}

void check_couplings(std::span<const Coupling> couplings, int n_channels) {
  if (n_channels < 1) throw InvalidArgument("n_channels must be positive");
  for (const auto& c : couplings) {
    if (c.src < 0 || c.src >= n_channels || c.dst < 0 || c.dst >= n_channels)
      throw InvalidArgument("coupling channel index out of range");
    if (c.lag < 1) throw InvalidArgument("coupling lag must be >= 1");
  }
}

}  // namespace

double var_spectral_radius(std::span<const Coupling> couplings, int n_channels) {
  check_couplings(couplings, n_channels);
  const int p = max_lag(couplings);
  const int n = n_channels;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
  for (const auto& c : couplings) companion(c.dst, (c.lag - 1) * n + c.src) += c.coeff;
  if (p > 1) companion.bottomLeftCorner(n * (p - 1), n * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Recording synth_var_recording(std::span<const Coupling> couplings, int n_channels, double fs,
                              double duration_s, double noise_sd, std::uint64_t seed) {
  if (n_channels < 2) throw InvalidArgument("synthetic recording needs >= 2 channels");
  if (!(fs > 0.0)) throw InvalidArgument("fs must be positive");
  if (noise_sd < 0.0) throw InvalidArgument("noise_sd must be nonnegative");
  const double radius = var_spectral_radius(couplings, n_channels);
  if (!(radius < 1.0)) {
    throw NumericError("unstable VAR coupling set (companion spectral radius " +
                       std::to_string(radius) + ")");
  }
  const auto n = static_cast<Eigen::Index>(std::llround(duration_s * fs));
  if (n < 1) throw InvalidArgument("duration shorter than one sample");
  const int p = max_lag(couplings);
  const Eigen::Index burn = 200 * p;
  const Eigen::Index total = n + burn;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, n_channels);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (int ch = 0; ch < n_channels; ++ch) x(t, ch) = noise_sd * gauss(rng);
    for (const auto& c : couplings) {
      if (t - c.lag >= 0) x(t, c.dst) += c.coeff * x(t - c.lag, c.src);
    }
  }

  Recording rec;
  rec.samples = x.bottomRows(n);
  rec.fs = fs;
  for (int ch = 0; ch < n_channels; ++ch) rec.channel_names.push_back("ch" + std::to_string(ch + 1));
  return rec;
}

}  // namespace ngcl
