#include "ngcl/gat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

namespace {

constexpr double kLeakySlope = 0.2;

double leaky(double z) { return z > 0.0 ? z : kLeakySlope * z; }

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

}  // namespace

std::vector<nn::NamedTensor> GatParams::tensors() {
  std::vector<nn::NamedTensor> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t h = 0; h < layers[l].heads.size(); ++h) {
      const auto prefix = "layer" + std::to_string(l) + ".head" + std::to_string(h) + ".";
      auto& head = layers[l].heads[h];
      out.push_back({prefix + "weight", &head.weight});
      out.push_back({prefix + "attn_src", &head.attn_src});
      out.push_back({prefix + "attn_dst", &head.attn_dst});
    }
  }
  out.push_back({"output.weight", &output.weight});
  out.push_back({"output.bias", &output.bias});
  return out;
}

GatParams GatParams::zeros_like() const {
  GatParams z = *this;
  nn::zero_all(z);
  return z;
}

GatParams init_gat(int input_width, const GatConfig& cfg, std::uint64_t seed) {
  if (input_width < 1 || cfg.layers < 1 || cfg.heads < 1 || cfg.embed < 1)
    throw InvalidArgument("GAT dimensions must be positive");
  if (!(cfg.neighbor_rate >= 0.0 && cfg.neighbor_rate <= 1.0))
    throw InvalidArgument("neighbor_rate must be in [0, 1]");
  std::mt19937_64 rng(seed);
  GatParams p;
  p.neighbor_rate = cfg.neighbor_rate;
  Eigen::Index width = input_width;
  for (int l = 0; l < cfg.layers; ++l) {
    GatLayer layer;
    for (int h = 0; h < cfg.heads; ++h) {
      GatHead head;
      head.weight = uniform_matrix(cfg.embed, width, 1.0 / std::sqrt(static_cast<double>(width)), rng);
      const double a_bound = 1.0 / std::sqrt(2.0 * cfg.embed);
      head.attn_src = uniform_matrix(1, cfg.embed, a_bound, rng);
      head.attn_dst = uniform_matrix(1, cfg.embed, a_bound, rng);
      layer.heads.push_back(std::move(head));
    }
    p.layers.push_back(std::move(layer));
    width = static_cast<Eigen::Index>(cfg.heads) * cfg.embed;
  }
  p.output = nn::Dense::uniform(width, 1, rng);
  return p;
}

int topk_count(Eigen::Index nodes, double neighbor_rate) {
  return std::max(1, static_cast<int>(std::lround(neighbor_rate * static_cast<double>(nodes))));
}

std::vector<int> topk_mask(std::span<const double> scores, int k) {
  if (k < 1) throw InvalidArgument("top-k needs k >= 1");
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (static_cast<std::size_t>(k) >= scores.size()) return idx;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::vector<int>> candidate_neighbors(const Matrix& adjacency) {
  const auto n = adjacency.rows();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i == j || adjacency(i, j) > 0.0 || adjacency(j, i) > 0.0) out[i].push_back(static_cast<int>(j));
  return out;
}

GatLayerForward gat_layer_forward(const GatLayer& layer, const Matrix& h,
                                  const std::vector<std::vector<int>>& candidates, int k) {
  const auto n = h.rows();
  if (static_cast<Eigen::Index>(candidates.size()) != n) throw ShapeError("candidate list / node count mismatch");
  if (h.cols() != layer.heads.front().weight.cols()) throw ShapeError("GAT input width mismatch");
  const auto embed = layer.heads.front().weight.rows();
  GatLayerForward f;
  f.input = h;
  f.output.resize(n, embed * static_cast<Eigen::Index>(layer.heads.size()));
  for (std::size_t hd = 0; hd < layer.heads.size(); ++hd) {
    const auto& head = layer.heads[hd];
    Matrix proj = h * head.weight.transpose();
    const Eigen::VectorXd s_src = proj * head.attn_src.transpose();
    const Eigen::VectorXd s_dst = proj * head.attn_dst.transpose();
    Matrix logits = Matrix::Zero(n, n);
    Matrix att = Matrix::Zero(n, n);
    std::vector<std::vector<int>> kept(static_cast<std::size_t>(n));
    std::vector<double> scores;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& cand = candidates[i];
      scores.clear();
      for (int j : cand) {
        logits(i, j) = s_src(i) + s_dst(j);
        scores.push_back(leaky(logits(i, j)));
      }
      for (int c : topk_mask(scores, k)) kept[i].push_back(cand[c]);
      double mx = -HUGE_VAL;
      for (int j : kept[i]) mx = std::max(mx, leaky(logits(i, j)));
      double z = 0.0;
      for (int j : kept[i]) {
        att(i, j) = std::exp(leaky(logits(i, j)) - mx);
        z += att(i, j);
      }
      for (int j : kept[i]) att(i, j) /= z;
    }
    f.output.middleCols(static_cast<Eigen::Index>(hd) * embed, embed) = att * proj;
    f.projected.push_back(std::move(proj));
    f.logits.push_back(std::move(logits));
    f.attention.push_back(std::move(att));
    f.survivors.push_back(std::move(kept));
  }
  return f;
}

Matrix gat_layer_backward(const GatLayer& layer, const GatLayerForward& fwd, const Matrix& d_output,
                          GatLayer& grad) {
  const auto n = fwd.input.rows();
  const auto embed = layer.heads.front().weight.rows();
  Matrix d_input = Matrix::Zero(n, fwd.input.cols());
  for (std::size_t hd = 0; hd < layer.heads.size(); ++hd) {
    const auto& head = layer.heads[hd];
    auto& g = grad.heads[hd];
    const Matrix& proj = fwd.projected[hd];
    const Matrix& att = fwd.attention[hd];
    const Matrix d_out = d_output.middleCols(static_cast<Eigen::Index>(hd) * embed, embed);

    Matrix d_proj = att.transpose() * d_out;
    const Matrix d_att = d_out * proj.transpose();
    Eigen::VectorXd d_src = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd d_dst = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& kept = fwd.survivors[hd][i];
      double weighted = 0.0;
      for (int j : kept) weighted += att(i, j) * d_att(i, j);
      for (int j : kept) {
        const double d_score = att(i, j) * (d_att(i, j) - weighted);
        const double d_logit = fwd.logits[hd](i, j) > 0.0 ? d_score : kLeakySlope * d_score;
        d_src(i) += d_logit;
        d_dst(j) += d_logit;
      }
    }
    d_proj.noalias() += d_src * head.attn_src + d_dst * head.attn_dst;
    g.attn_src += d_src.transpose() * proj;
    g.attn_dst += d_dst.transpose() * proj;
    g.weight.noalias() += d_proj.transpose() * fwd.input;
    d_input.noalias() += d_proj * head.weight;
  }
  return d_input;
}

Matrix gat_layer(const Matrix& h, const Matrix& adjacency, const GatLayer& layer, double neighbor_rate,
                 std::vector<Matrix>* attention) {
  auto f = gat_layer_forward(layer, h, candidate_neighbors(adjacency), topk_count(h.rows(), neighbor_rate));
  if (attention != nullptr) *attention = f.attention;
  return f.output;
}

GatForward gat_forward(const GatParams& gat, const Matrix& node_embeddings, const Matrix& adjacency) {
  if (adjacency.rows() != node_embeddings.rows() || adjacency.cols() != adjacency.rows())
    throw ShapeError("GAT adjacency / embedding shape mismatch");
  if (node_embeddings.rows() == 0) throw ShapeError("GAT on an empty graph");
  const auto candidates = candidate_neighbors(adjacency);
  const int k = topk_count(node_embeddings.rows(), gat.neighbor_rate);
  GatForward f;
  Matrix h = node_embeddings;
  for (std::size_t l = 0; l < gat.layers.size(); ++l) {
    f.layers.push_back(gat_layer_forward(gat.layers[l], h, candidates, k));
    if (l + 1 < gat.layers.size()) h = nn::elu(f.layers.back().output);
  }
  f.pooled = f.layers.back().output.colwise().mean();
  f.logit = gat.output.forward(f.pooled)(0, 0);
  f.probability = nn::sigmoid(f.logit);
  return f;
}

Matrix gat_backward(const GatParams& gat, const GatForward& fwd, double d_logit, GatParams& grad) {
  const Matrix d_top = Matrix::Constant(1, 1, d_logit);
  const Matrix d_pooled = gat.output.backward(fwd.pooled, d_top, grad.output);
  const auto n = fwd.layers.back().output.rows();
  Matrix d = d_pooled.replicate(n, 1) / static_cast<double>(n);
  for (std::size_t l = gat.layers.size(); l-- > 0;) {
    d = gat_layer_backward(gat.layers[l], fwd.layers[l], d, grad.layers[l]);
    if (l > 0) d = nn::elu_backward(fwd.layers[l - 1].output, d);
  }
  return d;
}

AttentionMap attention_map(const GatForward& fwd) {
  AttentionMap out;
  for (const auto& layer : fwd.layers) out.push_back(layer.attention);
  return out;
}

Prediction predict(const BrainGraph& g, const EncoderParams& enc, const GatParams& gat) {
  const Matrix h = encode_nodes(enc, g.adjacency, g.features.values);
  const auto f = gat_forward(gat, h, g.adjacency);
  return {f.probability, attention_map(f)};
}

double bce_with_logit(double logit, int label) { return nn::softplus(logit) - label * logit; }

FinetuneResult finetune(std::span<const BrainGraph> graphs, const EncoderParams& enc, const GatConfig& gat_cfg,
                        const FinetuneConfig& cfg, std::uint64_t seed) {
  if (graphs.empty()) throw DataError("fine-tuning needs labelled graphs");
  const bool has_pos = std::any_of(graphs.begin(), graphs.end(), [](const auto& g) { return g.label == Label::kIctal; });
  const bool has_neg = std::any_of(graphs.begin(), graphs.end(), [](const auto& g) { return g.label == Label::kInterictal; });
  if (!has_pos || !has_neg) throw DataError("fine-tuning set must contain both classes");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (cfg.epochs < 0) throw InvalidArgument("epochs must be >= 0");

  FinetuneResult result{init_gat(static_cast<int>(enc.hidden()), gat_cfg, seed), enc, {}};
  nn::Adam gat_adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  nn::Adam enc_adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

  std::vector<Matrix> frozen;
  if (!cfg.finetune_encoder) {
    for (const auto& g : graphs) frozen.push_back(encode_nodes(enc, g.adjacency, g.features.values));
  }

  std::mt19937_64 order_rng(seed ^ 0x2545f4914f6cdd1dULL);
  std::mt19937_64 dropout_rng(seed + 0x632be59bd9b4e019ULL);
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double scale = 1.0 / static_cast<double>(stop - start);
      GatParams grad = result.gat.zeros_like();
      EncoderParams enc_grad = cfg.finetune_encoder ? result.encoder.zeros_like() : EncoderParams{};
      for (std::size_t k = start; k < stop; ++k) {
        const BrainGraph& g = graphs[order[k]];
        const int y = to_int(g.label);
        if (cfg.finetune_encoder) {
          const auto nf = encode_nodes_forward(result.encoder, g.adjacency, g.features.values, &dropout_rng);
          const auto f = gat_forward(result.gat, nf.output, g.adjacency);
          epoch_sum += bce_with_logit(f.logit, y);
          const Matrix d_h = gat_backward(result.gat, f, scale * (f.probability - y), grad);
          encode_nodes_backward(result.encoder, nf, d_h, enc_grad);
        } else {
          const auto f = gat_forward(result.gat, frozen[order[k]], g.adjacency);
          epoch_sum += bce_with_logit(f.logit, y);
          gat_backward(result.gat, f, scale * (f.probability - y), grad);
        }
      }
      gat_adam.step(result.gat.tensors(), grad.tensors());
      if (cfg.finetune_encoder) enc_adam.step(result.encoder.tensors(), enc_grad.tensors());
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(graphs.size()));
  }
  return result;
}

void save_gat(const std::filesystem::path& path, GatParams& p) {
  nn::save_checkpoint(path, "gat",
                      {{"layers", std::to_string(p.layers.size())},
                       {"heads", std::to_string(p.heads())},
                       {"embed", std::to_string(p.embed())},
                       {"input_width", std::to_string(p.input_width())},
                       {"neighbor_rate", format_double(p.neighbor_rate)}},
                      p.tensors());
}

GatParams load_gat(const std::filesystem::path& path) {
  const auto ck = nn::load_checkpoint(path);
  if (ck.kind != "gat") throw DataError(path.string() + " is not a GAT checkpoint");
  auto read_int = [&](const std::string& key) {
    auto v = parse_long(ck.meta_value(key));
    if (!v || *v < 1) throw DataError("bad '" + key + "' in GAT checkpoint");
    return static_cast<int>(*v);
  };
  GatConfig cfg;
  cfg.layers = read_int("layers");
  cfg.heads = read_int("heads");
  cfg.embed = read_int("embed");
  auto rate = parse_double(ck.meta_value("neighbor_rate"));
  if (!rate) throw DataError("bad neighbor_rate in GAT checkpoint");
  cfg.neighbor_rate = *rate;
  GatParams p = init_gat(read_int("input_width"), cfg, 0);
  for (auto& t : p.tensors()) {
    const auto& m = ck.tensor(t.name);
    if (m.rows() != t.value->rows() || m.cols() != t.value->cols())
      throw ShapeError("tensor '" + t.name + "' has unexpected shape in GAT checkpoint");
    *t.value = m;
  }
  return p;
}

}  // namespace ngcl
