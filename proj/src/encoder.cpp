#include "ngcl/encoder.hpp"

#include <cmath>

#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

std::vector<nn::NamedTensor> EncoderParams::tensors() {
  return {
      {"node_in.weight", &node_in.weight},   {"node_in.bias", &node_in.bias},
      {"node_out.weight", &node_out.weight}, {"node_out.bias", &node_out.bias},
      {"graph_in.weight", &graph_in.weight}, {"graph_in.bias", &graph_in.bias},
      {"graph_out.weight", &graph_out.weight}, {"graph_out.bias", &graph_out.bias},
      {"decoder.weight", &decoder.weight},   {"decoder.bias", &decoder.bias},
  };
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z = *this;
  nn::zero_all(z);
  return z;
}

EncoderParams init_encoder(int features, int hidden, std::uint64_t seed, int latent, double dropout) {
  if (features < 1) throw InvalidArgument("encoder feature count must be >= 1");
  if (hidden < 1) throw InvalidArgument("encoder hidden width must be >= 1");
  if (latent < 1) throw InvalidArgument("decoder latent width must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must be in [0, 1)");
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.node_in = nn::Dense::uniform(2 * features, hidden, rng);
  p.node_out = nn::Dense::uniform(hidden, hidden, rng);
  p.graph_in = nn::Dense::uniform(hidden, hidden, rng);
  p.graph_out = nn::Dense::uniform(hidden, hidden, rng);
  p.decoder = nn::Dense::uniform(hidden, latent, rng);
  p.dropout = dropout;
  return p;
}

Matrix structural_input(const Matrix& adjacency, const Matrix& features) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != features.rows())
    throw ShapeError("adjacency/feature shape mismatch");
  const Eigen::Index n = features.rows();
  const Eigen::Index f = features.cols();
  Matrix out(n, 2 * f);
  out.leftCols(f) = features;
  const Eigen::VectorXd deg = adjacency.rowwise().sum();
  Matrix prop = adjacency * features;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (deg(i) > 0.0) {
      prop.row(i) /= deg(i);
    } else {
      prop.row(i).setZero();
    }
  }
  out.rightCols(f) = prop;
  return out;
}

NodeForward encode_nodes_forward(const EncoderParams& p, const Matrix& adjacency, const Matrix& features,
                                 std::mt19937_64* dropout_rng) {
  if (features.cols() != p.features()) throw ShapeError("feature width does not match encoder");
  NodeForward f;
  f.input = structural_input(adjacency, features);
  f.hidden_pre = p.node_in.forward(f.input);
  f.hidden = nn::relu(f.hidden_pre);
  if (dropout_rng != nullptr && p.dropout > 0.0) {
    std::bernoulli_distribution keep(1.0 - p.dropout);
    const double scale = 1.0 / (1.0 - p.dropout);
    f.dropout_scale.resize(f.hidden.rows(), f.hidden.cols());
    for (Eigen::Index c = 0; c < f.hidden.cols(); ++c)
      for (Eigen::Index r = 0; r < f.hidden.rows(); ++r)
        f.dropout_scale(r, c) = keep(*dropout_rng) ? scale : 0.0;
    f.hidden = f.hidden.cwiseProduct(f.dropout_scale);
  }
  f.output = p.node_out.forward(f.hidden);
  return f;
}

void encode_nodes_backward(const EncoderParams& p, const NodeForward& fwd, const Matrix& d_output,
                           EncoderParams& grad) {
  Matrix d_hidden = p.node_out.backward(fwd.hidden, d_output, grad.node_out);
  if (fwd.dropout_scale.size() != 0) d_hidden = d_hidden.cwiseProduct(fwd.dropout_scale);
  const Matrix d_pre = nn::relu_backward(fwd.hidden_pre, d_hidden);
  p.node_in.backward(fwd.input, d_pre, grad.node_in);
}

Matrix encode_nodes(const EncoderParams& p, const Matrix& adjacency, const Matrix& features) {
  return encode_nodes_forward(p, adjacency, features).output;
}

GraphForward encode_graph_forward(const EncoderParams& p, const Matrix& node_embeddings) {
  if (node_embeddings.rows() == 0) throw ShapeError("cannot embed an empty graph");
  GraphForward f;
  f.pooled = node_embeddings.colwise().mean();
  f.hidden_pre = p.graph_in.forward(f.pooled);
  f.output = p.graph_out.forward(nn::relu(f.hidden_pre));
  return f;
}

Matrix encode_graph_backward(const EncoderParams& p, const GraphForward& fwd, Eigen::Index nodes,
                             const Matrix& d_output, EncoderParams& grad) {
  const Matrix d_hidden = p.graph_out.backward(nn::relu(fwd.hidden_pre), d_output, grad.graph_out);
  const Matrix d_pooled = p.graph_in.backward(fwd.pooled, nn::relu_backward(fwd.hidden_pre, d_hidden), grad.graph_in);
  return d_pooled.replicate(nodes, 1) / static_cast<double>(nodes);
}

RowVector encode_graph(const EncoderParams& p, const Matrix& node_embeddings) {
  return encode_graph_forward(p, node_embeddings).output.row(0);
}

DecoderForward decode_forward(const EncoderParams& p, const Matrix& node_embeddings) {
  DecoderForward f;
  f.latent = p.decoder.forward(node_embeddings);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.latent()));
  f.adjacency = (f.latent * f.latent.transpose() * scale).unaryExpr([](double v) { return nn::sigmoid(v); });
  return f;
}

Matrix decode_backward(const EncoderParams& p, const DecoderForward& fwd, const Matrix& node_embeddings,
                       const Matrix& d_adjacency, EncoderParams& grad) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.latent()));
  const Matrix d_logits = d_adjacency.cwiseProduct(fwd.adjacency.cwiseProduct((1.0 - fwd.adjacency.array()).matrix()));
  const Matrix d_latent = scale * (d_logits + d_logits.transpose()) * fwd.latent;
  return p.decoder.backward(node_embeddings, d_latent, grad.decoder);
}

Matrix decode_adjacency(const EncoderParams& p, const Matrix& node_embeddings) {
  return decode_forward(p, node_embeddings).adjacency;
}

void save_encoder(const std::filesystem::path& path, EncoderParams& p) {
  nn::save_checkpoint(path, "encoder",
                      {{"features", std::to_string(p.features())},
                       {"hidden", std::to_string(p.hidden())},
                       {"latent", std::to_string(p.latent())},
                       {"dropout", format_double(p.dropout)}},
                      p.tensors());
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  const auto ck = nn::load_checkpoint(path);
  if (ck.kind != "encoder") throw DataError(path.string() + " is not an encoder checkpoint");
  EncoderParams p;
  for (auto& t : p.tensors()) *t.value = ck.tensor(t.name);
  auto dropout = parse_double(ck.meta_value("dropout"));
  if (!dropout) throw DataError("bad dropout in encoder checkpoint");
  p.dropout = *dropout;
  if (p.node_in.in() != 2 * p.features() || p.node_out.in() != p.hidden() || p.graph_in.in() != p.hidden() ||
      p.graph_out.in() != p.hidden() || p.decoder.in() != p.hidden())
    throw ShapeError("inconsistent tensor shapes in encoder checkpoint");
  return p;
}

}  // namespace ngcl
