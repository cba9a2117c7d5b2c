// ngcl: graph building, synthetic data, pretraining, fine-tuning, evaluation, reporting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ngcl/config.hpp"
#include "ngcl/contrastive.hpp"
#include "ngcl/dataset.hpp"
#include "ngcl/encoder.hpp"
#include "ngcl/error.hpp"
#include "ngcl/evaluation.hpp"
#include "ngcl/gat.hpp"
#include "ngcl/pipeline.hpp"
#include "ngcl/random.hpp"

namespace fs = std::filesystem;
using namespace ngcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value configuration file");
    app->add_option("--set", overrides, "override one setting, key=value (repeatable)");
    app->add_option("--seed", seed, "random seed (same as --set seed=...)");
  }

  // Precedence: command-line flag > config file > built-in default.
  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const auto& o : overrides) apply_assignment(cfg, o);
    if (seed) cfg.seed = *seed;
    return cfg;
  }
};

std::vector<BrainGraph> require_dataset(const std::string& path) {
  if (path.empty()) throw InvalidArgument("--data is required");
  return load_dataset(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive graph pretraining and attention classification of ictal/interictal iEEG"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  // config
  Common config_opts;
  auto* config_cmd = app.add_subcommand("config", "print the resolved configuration");
  config_opts.attach(config_cmd);

  // build-graphs
  Common build_opts;
  std::string build_out;
  std::vector<std::string> build_inputs;
  auto* build_cmd = app.add_subcommand("build-graphs", "turn annotated recordings into a graph dataset");
  build_opts.attach(build_cmd);
  build_cmd->add_option("--out", build_out, "output dataset (.gds)")->required();
  build_cmd->add_option("recordings", build_inputs, "recording CSV files (each with a .meta sidecar)")->required();

  // synth
  Common synth_opts;
  std::string synth_out;
  std::optional<int> synth_n, synth_nodes, synth_soz;
  std::optional<double> synth_noise;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic two-class graph dataset");
  synth_opts.attach(synth_cmd);
  synth_cmd->add_option("--out", synth_out, "output dataset (.gds)")->required();
  synth_cmd->add_option("--n-per-class", synth_n);
  synth_cmd->add_option("--nodes", synth_nodes);
  synth_cmd->add_option("--soz-size", synth_soz);
  synth_cmd->add_option("--noise", synth_noise, "probability of flipping each off-diagonal entry");

  // pretrain
  Common pre_opts;
  std::string pre_data, pre_out, pre_trace;
  auto* pre_cmd = app.add_subcommand("pretrain", "contrastive pretraining of the encoder");
  pre_opts.attach(pre_cmd);
  pre_cmd->add_option("--data", pre_data, "graph dataset")->required();
  pre_cmd->add_option("--out", pre_out, "encoder checkpoint to write")->required();
  pre_cmd->add_option("--trace", pre_trace, "per-batch loss trace CSV");

  // finetune
  Common ft_opts;
  std::string ft_data, ft_encoder, ft_out, ft_encoder_out;
  auto* ft_cmd = app.add_subcommand("finetune", "train the attention classifier on top of an encoder");
  ft_opts.attach(ft_cmd);
  ft_cmd->add_option("--data", ft_data, "graph dataset")->required();
  ft_cmd->add_option("--encoder", ft_encoder, "encoder checkpoint")->required();
  ft_cmd->add_option("--out", ft_out, "classifier checkpoint to write")->required();
  ft_cmd->add_option("--encoder-out", ft_encoder_out, "updated encoder (only with finetune_encoder=true)");

  // evaluate
  Common ev_opts;
  std::string ev_data, ev_encoder, ev_gat, ev_out_dir;
  std::optional<int> ev_folds;
  auto* ev_cmd = app.add_subcommand("evaluate", "score checkpoints on a dataset, or run k-fold cross-validation");
  ev_opts.attach(ev_cmd);
  ev_cmd->add_option("--data", ev_data, "graph dataset")->required();
  ev_cmd->add_option("--encoder", ev_encoder, "encoder checkpoint");
  ev_cmd->add_option("--gat", ev_gat, "classifier checkpoint");
  ev_cmd->add_option("--folds", ev_folds, "run stratified k-fold cross-validation instead of scoring checkpoints");
  ev_cmd->add_option("--out-dir", ev_out_dir, "directory for report.csv, roc.csv, attention.csv, embeddings.csv")
      ->required();

  // report
  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "render a fold report as a table");
  report_cmd->add_option("report", report_in, "report.csv written by evaluate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("ngcl"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*config_cmd) {
      std::cout << dump_config(config_opts.resolve());
      return kExitOk;
    }

    if (*build_cmd) {
      const auto cfg = build_opts.resolve();
      std::vector<fs::path> paths(build_inputs.begin(), build_inputs.end());
      const auto result = build_graphs(paths, cfg);
      for (const auto& f : result.failures) std::cerr << "error: " << f.path.string() << ": " << f.message << '\n';
      if (result.graphs.empty()) {
        std::cerr << "error: no graphs were built\n";
        return kExitData;
      }
      save_dataset(build_out, result.graphs);
      std::cout << result.graphs.size() << " graphs from " << (paths.size() - result.failures.size()) << "/"
                << paths.size() << " recordings -> " << build_out << '\n';
      return result.failures.empty() ? kExitOk : kExitData;
    }

    if (*synth_cmd) {
      auto cfg = synth_opts.resolve();
      if (synth_n) cfg.synth.n_per_class = *synth_n;
      if (synth_nodes) cfg.synth.nodes = *synth_nodes;
      if (synth_soz) cfg.synth.soz_size = *synth_soz;
      if (synth_noise) cfg.synth.noise = *synth_noise;
      if (synth_opts.seed) cfg.synth.seed = *synth_opts.seed;
      const auto graphs = synth_graph_dataset(cfg.synth);
      save_dataset(synth_out, graphs);
      std::cout << graphs.size() << " graphs -> " << synth_out << '\n';
      return kExitOk;
    }

    if (*pre_cmd) {
      const auto cfg = pre_opts.resolve();
      const auto graphs = require_dataset(pre_data);
      const auto& t = cfg.training;
      EncoderParams enc;
      std::vector<LossRecord> trace;
      if (t.use_pretraining) {
        auto res = pretrain(graphs, t.pretrain, t.policy, derive_seed(cfg.seed, 1));
        enc = std::move(res.params);
        trace = std::move(res.trace);
      } else {
        enc = init_encoder(static_cast<int>(graphs.front().features.values.cols()), t.pretrain.hidden,
                           derive_seed(cfg.seed, 1));
      }
      save_encoder(pre_out, enc);
      if (!pre_trace.empty()) write_loss_trace(pre_trace, trace);
      std::cout << "encoder -> " << pre_out << '\n';
      return kExitOk;
    }

    if (*ft_cmd) {
      const auto cfg = ft_opts.resolve();
      const auto graphs = require_dataset(ft_data);
      const auto enc = load_encoder(ft_encoder);
      if (cfg.training.finetune.finetune_encoder && ft_encoder_out.empty())
        throw InvalidArgument("finetune_encoder=true needs --encoder-out");
      auto res = finetune(graphs, enc, cfg.training.gat, cfg.training.finetune, derive_seed(cfg.seed, 2));
      save_gat(ft_out, res.gat);
      if (!ft_encoder_out.empty()) save_encoder(ft_encoder_out, res.encoder);
      std::cout << "classifier -> " << ft_out << '\n';
      return kExitOk;
    }

    if (*ev_cmd) {
      const auto cfg = ev_opts.resolve();
      const fs::path dir = ev_out_dir;
      fs::create_directories(dir);
      if (ev_folds) {
        if (!ev_encoder.empty() || !ev_gat.empty())
          throw InvalidArgument("--folds trains its own models; do not pass checkpoints");
        const auto graphs = require_dataset(ev_data);
        const auto cv = cross_validate(graphs, cfg.training, *ev_folds, cfg.seed, true);
        write_fold_report(dir / "report.csv", cv.folds, cv.aggregate);
        write_roc(dir / "roc.csv", cv.folds);
        write_attention(dir / "attention.csv", cv.outputs);
        write_embeddings(dir / "embeddings.csv", cv.outputs);
      } else {
        if (ev_encoder.empty()) throw MissingArtifactError("no encoder checkpoint given (--encoder)");
        if (ev_gat.empty()) throw MissingArtifactError("no classifier checkpoint given (--gat)");
        const auto enc = load_encoder(ev_encoder);
        const auto gat = load_gat(ev_gat);
        const auto graphs = require_dataset(ev_data);
        const auto out = evaluate_model(graphs, enc, gat, cfg.training.threshold, true);
        const std::vector<FoldReport> folds{out.report};
        write_fold_report(dir / "report.csv", folds, aggregate_folds(folds));
        write_roc(dir / "roc.csv", folds);
        const std::vector<std::vector<GraphOutput>> per{out.graphs};
        write_attention(dir / "attention.csv", per);
        write_embeddings(dir / "embeddings.csv", per);
      }
      std::cout << render_report_table(read_fold_report(dir / "report.csv"));
      return kExitOk;
    }

    if (*report_cmd) {
      std::cout << render_report_table(read_fold_report(report_in));
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
