#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ngcl/connectivity.hpp"
#include "ngcl/evaluation.hpp"

namespace ngcl {

struct SynthSpec {
  int n_per_class = 100;
  int nodes = 20;
  int soz_size = 4;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

// Every tunable of the pipeline. Defaults are the published final hyperparameters.
struct PipelineConfig {
  TrainingSetup training;

  double window_s = 2.0;
  double overlap = 0.5;
  double pre_s = 10.0;
  double post_s = 10.0;
  int mvar_order = 10;
  bool dtf_normalized = true;
  std::vector<FrequencyBand> bands = default_bands();

  int folds = 10;
  std::uint64_t seed = 0;
  SynthSpec synth;
};

// Applies one `key=value` setting; throws InvalidArgument on unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);
void apply_assignment(PipelineConfig& cfg, const std::string& assignment);

// Reads a key=value file ('#' comments) on top of `cfg`.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

// Canonical key=value text of every setting.
std::string dump_config(const PipelineConfig& cfg);

}  // namespace ngcl
