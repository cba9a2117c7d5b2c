#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ngcl/encoder.hpp"
#include "ngcl/graph.hpp"

namespace ngcl {

struct SpectralSignature {
  Eigen::VectorXd eigenvalues;  // ascending
};

enum class SigmaMode { kMedian, kFixed };

struct PretrainConfig {
  int epochs = 50;
  int batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double tau = 0.3;
  double gamma = 0.5;
  double alpha = 1.0;
  SigmaMode sigma_mode = SigmaMode::kMedian;
  double sigma = 1.0;  // used when sigma_mode == kFixed
  int hidden = 256;
  bool augment = true;
  bool graph_loss = true;
  bool infograph_loss = true;
};

// Eigenvalues of I - D^-1/2 M D^-1/2 with M the symmetrized, zero-diagonal input.
SpectralSignature laplacian_spectrum(const Matrix& adjacency);

double global_similarity(const SpectralSignature& a, const SpectralSignature& b, double sigma);
// Cosine similarity; 0 when either vector is zero.
double local_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b);
double blended_similarity(double s_global, double s_local, double gamma);

// Supervised InfoNCE over class-label positives. `d_sims`, when given, receives dL/dS.
double graph_contrastive_loss(const Matrix& sims, std::span<const int> labels, double tau,
                              Matrix* d_sims = nullptr);

struct InfoGraphGrad {
  std::vector<Matrix> d_nodes;  // per graph, N x d
  Matrix d_graphs;              // B x d
};

// Node-vs-graph InfoNCE with cosine similarity; denominator spans every graph in the batch.
double infograph_loss(std::span<const Matrix> node_embeddings, const Matrix& graph_embeddings, double tau,
                      InfoGraphGrad* grad = nullptr);

double total_loss(double l_graph, double l_info, double alpha);

// Median of pairwise Euclidean distances between spectra, floored at 1e-6.
double median_sigma(std::span<const SpectralSignature> spectra);

// Row-wise cosine matrix and its backward pass.
Matrix cosine_matrix(const Matrix& a, const Matrix& b);
void cosine_matrix_backward(const Matrix& a, const Matrix& b, const Matrix& d_cos, Matrix& d_a, Matrix& d_b);

struct BatchGraph {
  Matrix adjacency;
  Matrix features;
  int label = 0;
};

struct BatchLoss {
  double l_graph = 0.0;
  double l_info = 0.0;
  double l_total = 0.0;
  bool graph_term = false;  // false when the graph term is disabled
  bool info_term = false;
};

// One pretraining objective evaluation on already-augmented graphs. Global similarities are
// computed from the decoded adjacency unless `fixed_global` is supplied; they never receive
// gradient. Throws DegenerateError when neither term can be formed.
BatchLoss contrastive_batch_loss(const EncoderParams& params, std::span<const BatchGraph> batch,
                                 const PretrainConfig& cfg, EncoderParams* grad = nullptr,
                                 std::mt19937_64* dropout_rng = nullptr,
                                 const Matrix* fixed_global = nullptr, Matrix* global_out = nullptr);

struct LossRecord {
  int epoch = 0;
  int batch = 0;
  double l_graph = 0.0;
  double l_info = 0.0;
  double l_total = 0.0;
};

struct PretrainResult {
  EncoderParams params;
  std::vector<LossRecord> trace;
  std::vector<double> epoch_loss;  // mean l_total per epoch
};

PretrainResult pretrain(std::span<const BrainGraph> graphs, const PretrainConfig& cfg,
                        const AugmentationPolicy& policy, std::uint64_t seed);

}  // namespace ngcl
