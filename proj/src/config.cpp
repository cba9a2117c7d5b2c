#include "ngcl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

namespace {

double to_double(const std::string& key, const std::string& v) {
  auto d = parse_double(v);
  if (!d) throw InvalidArgument("config '" + key + "': expected a number, got '" + v + "'");
  return *d;
}

int to_int(const std::string& key, const std::string& v) {
  auto d = parse_long(v);
  if (!d) throw InvalidArgument("config '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(*d);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  auto d = parse_long(v);
  if (!d || *d < 0) throw InvalidArgument("config '" + key + "': expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(*d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("config '" + key + "': expected true/false, got '" + v + "'");
}

std::string b(bool v) { return v ? "true" : "false"; }

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"hidden", [](auto& c, auto& k, auto& v) { c.training.pretrain.hidden = to_int(k, v); }},
      {"pretrain.lr", [](auto& c, auto& k, auto& v) { c.training.pretrain.lr = to_double(k, v); }},
      {"pretrain.weight_decay", [](auto& c, auto& k, auto& v) { c.training.pretrain.weight_decay = to_double(k, v); }},
      {"node_mask_ratio", [](auto& c, auto& k, auto& v) { c.training.policy.node_mask_ratio = to_double(k, v); }},
      {"edge_perturb_ratio", [](auto& c, auto& k, auto& v) { c.training.policy.edge_perturb_ratio = to_double(k, v); }},
      {"tau", [](auto& c, auto& k, auto& v) { c.training.pretrain.tau = to_double(k, v); }},
      {"pretrain.epochs", [](auto& c, auto& k, auto& v) { c.training.pretrain.epochs = to_int(k, v); }},
      {"pretrain.batch_size", [](auto& c, auto& k, auto& v) { c.training.pretrain.batch_size = to_int(k, v); }},
      {"alpha", [](auto& c, auto& k, auto& v) { c.training.pretrain.alpha = to_double(k, v); }},
      {"gamma", [](auto& c, auto& k, auto& v) { c.training.pretrain.gamma = to_double(k, v); }},
      {"sigma_mode",
       [](auto& c, auto& k, auto& v) {
         if (v == "median") c.training.pretrain.sigma_mode = SigmaMode::kMedian;
         else if (v == "fixed") c.training.pretrain.sigma_mode = SigmaMode::kFixed;
         else throw InvalidArgument("config '" + k + "': expected median or fixed");
       }},
      {"sigma", [](auto& c, auto& k, auto& v) { c.training.pretrain.sigma = to_double(k, v); }},
      {"augment", [](auto& c, auto& k, auto& v) { c.training.pretrain.augment = to_bool(k, v); }},
      {"graph_loss", [](auto& c, auto& k, auto& v) { c.training.pretrain.graph_loss = to_bool(k, v); }},
      {"infograph_loss", [](auto& c, auto& k, auto& v) { c.training.pretrain.infograph_loss = to_bool(k, v); }},
      {"pretrain", [](auto& c, auto& k, auto& v) { c.training.use_pretraining = to_bool(k, v); }},
      {"augment_seed", [](auto& c, auto& k, auto& v) { c.training.policy.seed = to_u64(k, v); }},
      {"gat.layers", [](auto& c, auto& k, auto& v) { c.training.gat.layers = to_int(k, v); }},
      {"gat.heads", [](auto& c, auto& k, auto& v) { c.training.gat.heads = to_int(k, v); }},
      {"gat.embed", [](auto& c, auto& k, auto& v) { c.training.gat.embed = to_int(k, v); }},
      {"neighbor_rate", [](auto& c, auto& k, auto& v) { c.training.gat.neighbor_rate = to_double(k, v); }},
      {"finetune.lr", [](auto& c, auto& k, auto& v) { c.training.finetune.lr = to_double(k, v); }},
      {"finetune.weight_decay", [](auto& c, auto& k, auto& v) { c.training.finetune.weight_decay = to_double(k, v); }},
      {"finetune.batch_size", [](auto& c, auto& k, auto& v) { c.training.finetune.batch_size = to_int(k, v); }},
      {"finetune.epochs", [](auto& c, auto& k, auto& v) { c.training.finetune.epochs = to_int(k, v); }},
      {"finetune_encoder", [](auto& c, auto& k, auto& v) { c.training.finetune.finetune_encoder = to_bool(k, v); }},
      {"threshold", [](auto& c, auto& k, auto& v) { c.training.threshold = to_double(k, v); }},
      {"window_s", [](auto& c, auto& k, auto& v) { c.window_s = to_double(k, v); }},
      {"overlap", [](auto& c, auto& k, auto& v) { c.overlap = to_double(k, v); }},
      {"pre_s", [](auto& c, auto& k, auto& v) { c.pre_s = to_double(k, v); }},
      {"post_s", [](auto& c, auto& k, auto& v) { c.post_s = to_double(k, v); }},
      {"mvar_order", [](auto& c, auto& k, auto& v) { c.mvar_order = to_int(k, v); }},
      {"dtf_normalized", [](auto& c, auto& k, auto& v) { c.dtf_normalized = to_bool(k, v); }},
      {"folds", [](auto& c, auto& k, auto& v) { c.folds = to_int(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"synth.n_per_class", [](auto& c, auto& k, auto& v) { c.synth.n_per_class = to_int(k, v); }},
      {"synth.nodes", [](auto& c, auto& k, auto& v) { c.synth.nodes = to_int(k, v); }},
      {"synth.soz_size", [](auto& c, auto& k, auto& v) { c.synth.soz_size = to_int(k, v); }},
      {"synth.noise", [](auto& c, auto& k, auto& v) { c.synth.noise = to_double(k, v); }},
      {"synth.seed", [](auto& c, auto& k, auto& v) { c.synth.seed = to_u64(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key.rfind("band.", 0) == 0) {
    const auto name = key.substr(5);
    const auto parts = split(value, ',');
    if (name.empty() || parts.size() != 2) throw InvalidArgument("config '" + key + "': expected lo,hi");
    const double lo = to_double(key, trim(parts[0]));
    const double hi = to_double(key, trim(parts[1]));
    if (!(lo > 0.0 && lo < hi)) throw InvalidArgument("config '" + key + "': need 0 < lo < hi");
    for (auto& band : cfg.bands) {
      if (band.name == name) {
        band.lo = lo;
        band.hi = hi;
        return;
      }
    }
    cfg.bands.push_back({name, lo, hi});
    return;
  }
  auto it = setters().find(key);
  if (it == setters().end()) throw InvalidArgument("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

void apply_assignment(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + assignment + "'");
  apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open config " + path.string());
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      apply_assignment(cfg, t);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string dump_config(const PipelineConfig& cfg) {
  const auto& t = cfg.training;
  std::ostringstream o;
  o << "# pretraining\n"
    << "hidden=" << t.pretrain.hidden << '\n'
    << "pretrain.lr=" << format_double(t.pretrain.lr) << '\n'
    << "pretrain.weight_decay=" << format_double(t.pretrain.weight_decay) << '\n'
    << "node_mask_ratio=" << format_double(t.policy.node_mask_ratio) << '\n'
    << "edge_perturb_ratio=" << format_double(t.policy.edge_perturb_ratio) << '\n'
    << "tau=" << format_double(t.pretrain.tau) << '\n'
    << "pretrain.epochs=" << t.pretrain.epochs << '\n'
    << "pretrain.batch_size=" << t.pretrain.batch_size << '\n'
    << "alpha=" << format_double(t.pretrain.alpha) << '\n'
    << "gamma=" << format_double(t.pretrain.gamma) << '\n'
    << "sigma_mode=" << (t.pretrain.sigma_mode == SigmaMode::kMedian ? "median" : "fixed") << '\n'
    << "sigma=" << format_double(t.pretrain.sigma) << '\n'
    << "augment=" << b(t.pretrain.augment) << '\n'
    << "graph_loss=" << b(t.pretrain.graph_loss) << '\n'
    << "infograph_loss=" << b(t.pretrain.infograph_loss) << '\n'
    << "pretrain=" << b(t.use_pretraining) << '\n'
    << "augment_seed=" << t.policy.seed << '\n'
    << "# attention classifier\n"
    << "gat.layers=" << t.gat.layers << '\n'
    << "gat.embed=" << t.gat.embed << '\n'
    << "gat.heads=" << t.gat.heads << '\n'
    << "neighbor_rate=" << format_double(t.gat.neighbor_rate) << '\n'
    << "# fine-tuning\n"
    << "finetune.lr=" << format_double(t.finetune.lr) << '\n'
    << "finetune.weight_decay=" << format_double(t.finetune.weight_decay) << '\n'
    << "finetune.batch_size=" << t.finetune.batch_size << '\n'
    << "finetune.epochs=" << t.finetune.epochs << '\n'
    << "finetune_encoder=" << b(t.finetune.finetune_encoder) << '\n'
    << "threshold=" << format_double(t.threshold) << '\n'
    << "# graph construction\n"
    << "window_s=" << format_double(cfg.window_s) << '\n'
    << "overlap=" << format_double(cfg.overlap) << '\n'
    << "pre_s=" << format_double(cfg.pre_s) << '\n'
    << "post_s=" << format_double(cfg.post_s) << '\n'
    << "mvar_order=" << cfg.mvar_order << '\n'
    << "dtf_normalized=" << b(cfg.dtf_normalized) << '\n';
  for (const auto& band : cfg.bands)
    o << "band." << band.name << '=' << format_double(band.lo) << ',' << format_double(band.hi) << '\n';
  o << "# evaluation\n"
    << "folds=" << cfg.folds << '\n'
    << "seed=" << cfg.seed << '\n'
    << "# synthetic data\n"
    << "synth.n_per_class=" << cfg.synth.n_per_class << '\n'
    << "synth.nodes=" << cfg.synth.nodes << '\n'
    << "synth.soz_size=" << cfg.synth.soz_size << '\n'
    << "synth.noise=" << format_double(cfg.synth.noise) << '\n'
    << "synth.seed=" << cfg.synth.seed << '\n';
  return o.str();
}

}  // namespace ngcl
