#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ngcl/encoder.hpp"
#include "ngcl/graph.hpp"

namespace ngcl {

struct GatHead {
  Matrix weight;    // embed x d_in
  Matrix attn_src;  // 1 x embed, scores the receiving node i
  Matrix attn_dst;  // 1 x embed, scores the neighbour j
};

struct GatLayer {
  std::vector<GatHead> heads;
};

struct GatParams {
  std::vector<GatLayer> layers;
  nn::Dense output;  // heads*embed -> 1
  double neighbor_rate = 0.5;

  int heads() const { return static_cast<int>(layers.front().heads.size()); }
  Eigen::Index embed() const { return layers.front().heads.front().weight.rows(); }
  Eigen::Index input_width() const { return layers.front().heads.front().weight.cols(); }

  std::vector<nn::NamedTensor> tensors();
  GatParams zeros_like() const;
};

struct GatConfig {
  int layers = 2;
  int heads = 4;
  int embed = 16;
  double neighbor_rate = 0.5;
};

GatParams init_gat(int input_width, const GatConfig& cfg, std::uint64_t seed);

// k = max(1, round(rate * N)).
int topk_count(Eigen::Index nodes, double neighbor_rate);

// Indices of the k largest scores, ascending; ties at the cut go to the lower index.
std::vector<int> topk_mask(std::span<const double> scores, int k);

// attention[layer][head] is N x N with row i holding node i's weights over its neighbours.
using AttentionMap = std::vector<std::vector<Matrix>>;

struct GatLayerForward {
  Matrix input;
  std::vector<Matrix> projected;  // per head, N x embed
  std::vector<Matrix> logits;     // pre-activation a^T[Wh_i || Wh_j], valid on survivors
  std::vector<Matrix> attention;  // per head, N x N
  std::vector<std::vector<std::vector<int>>> survivors;  // per head, per node
  Matrix output;                  // N x heads*embed, before the inter-layer activation
};

// Candidate neighbours of i: support of A + A^T plus i itself.
std::vector<std::vector<int>> candidate_neighbors(const Matrix& adjacency);

GatLayerForward gat_layer_forward(const GatLayer& layer, const Matrix& h,
                                  const std::vector<std::vector<int>>& candidates, int k);
Matrix gat_layer_backward(const GatLayer& layer, const GatLayerForward& fwd, const Matrix& d_output,
                          GatLayer& grad);
Matrix gat_layer(const Matrix& h, const Matrix& adjacency, const GatLayer& layer, double neighbor_rate,
                 std::vector<Matrix>* attention = nullptr);

struct GatForward {
  std::vector<GatLayerForward> layers;
  Matrix pooled;  // 1 x width
  double logit = 0.0;
  double probability = 0.5;
};

GatForward gat_forward(const GatParams& gat, const Matrix& node_embeddings, const Matrix& adjacency);
// Backward of a scalar loss with dL/dlogit; returns dL/dH_node.
Matrix gat_backward(const GatParams& gat, const GatForward& fwd, double d_logit, GatParams& grad);

AttentionMap attention_map(const GatForward& fwd);

struct Prediction {
  double probability = 0.5;
  AttentionMap attention;
};

Prediction predict(const BrainGraph& g, const EncoderParams& enc, const GatParams& gat);

struct FinetuneConfig {
  int epochs = 50;
  int batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  bool finetune_encoder = false;
};

struct FinetuneResult {
  GatParams gat;
  EncoderParams encoder;  // unchanged unless finetune_encoder
  std::vector<double> epoch_loss;
};

// Mean binary cross-entropy of the classifier on one graph given the logit.
double bce_with_logit(double logit, int label);

FinetuneResult finetune(std::span<const BrainGraph> graphs, const EncoderParams& enc, const GatConfig& gat_cfg,
                        const FinetuneConfig& cfg, std::uint64_t seed);

void save_gat(const std::filesystem::path& path, GatParams& p);
GatParams load_gat(const std::filesystem::path& path);

}  // namespace ngcl
