#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "ngcl/nn.hpp"

namespace ngcl {

using nn::Matrix;
using nn::RowVector;

// Node MLP (2F -> hidden -> hidden), graph MLP (hidden -> hidden -> hidden) and the
// inner-product decoder projection (hidden -> latent).
struct EncoderParams {
  nn::Dense node_in;
  nn::Dense node_out;
  nn::Dense graph_in;
  nn::Dense graph_out;
  nn::Dense decoder;
  double dropout = 0.2;

  Eigen::Index features() const { return node_in.in() / 2; }
  Eigen::Index hidden() const { return node_in.out(); }
  Eigen::Index latent() const { return decoder.out(); }

  std::vector<nn::NamedTensor> tensors();
  EncoderParams zeros_like() const;
};

EncoderParams init_encoder(int features, int hidden, std::uint64_t seed, int latent = 32,
                           double dropout = 0.2);

// [X | D^-1 A X]; rows of A with zero sum contribute a zero structural vector.
Matrix structural_input(const Matrix& adjacency, const Matrix& features);

struct NodeForward {
  Matrix input;
  Matrix hidden_pre;
  Matrix dropout_scale;  // empty in eval mode
  Matrix hidden;
  Matrix output;  // H_node
};

// Dropout is applied when `dropout_rng` is non-null (train mode).
NodeForward encode_nodes_forward(const EncoderParams& p, const Matrix& adjacency, const Matrix& features,
                                 std::mt19937_64* dropout_rng = nullptr);
void encode_nodes_backward(const EncoderParams& p, const NodeForward& fwd, const Matrix& d_output,
                           EncoderParams& grad);
Matrix encode_nodes(const EncoderParams& p, const Matrix& adjacency, const Matrix& features);

struct GraphForward {
  Matrix pooled;  // 1 x hidden
  Matrix hidden_pre;
  Matrix output;  // 1 x hidden, H_graph
};

GraphForward encode_graph_forward(const EncoderParams& p, const Matrix& node_embeddings);
// Returns dL/dH_node.
Matrix encode_graph_backward(const EncoderParams& p, const GraphForward& fwd, Eigen::Index nodes,
                             const Matrix& d_output, EncoderParams& grad);
RowVector encode_graph(const EncoderParams& p, const Matrix& node_embeddings);

struct DecoderForward {
  Matrix latent;     // N x d_z
  Matrix adjacency;  // N x N, logistic(z_i . z_j / sqrt(d_z))
};

DecoderForward decode_forward(const EncoderParams& p, const Matrix& node_embeddings);
Matrix decode_backward(const EncoderParams& p, const DecoderForward& fwd, const Matrix& node_embeddings,
                       const Matrix& d_adjacency, EncoderParams& grad);
Matrix decode_adjacency(const EncoderParams& p, const Matrix& node_embeddings);

void save_encoder(const std::filesystem::path& path, EncoderParams& p);
EncoderParams load_encoder(const std::filesystem::path& path);

}  // namespace ngcl
