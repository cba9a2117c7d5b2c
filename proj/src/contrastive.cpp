#include "ngcl/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "ngcl/error.hpp"

namespace ngcl {

SpectralSignature laplacian_spectrum(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw ShapeError("laplacian_spectrum needs a square matrix");
  if (!adjacency.allFinite()) throw NumericError("non-finite adjacency in laplacian_spectrum");
  if ((adjacency.array() < 0.0).any()) throw InvalidArgument("laplacian_spectrum needs nonnegative weights");
  const auto n = adjacency.rows();
  Matrix m = 0.5 * (adjacency + adjacency.transpose());
  m.diagonal().setZero();
  const Eigen::VectorXd inv_sqrt_deg = m.rowwise().sum().cwiseMax(1e-8).cwiseSqrt().cwiseInverse();
  const Matrix lap = Matrix::Identity(n, n) - inv_sqrt_deg.asDiagonal() * m * inv_sqrt_deg.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()};
}

double global_similarity(const SpectralSignature& a, const SpectralSignature& b, double sigma) {
  if (a.eigenvalues.size() != b.eigenvalues.size())
    throw ShapeError("spectral signatures differ in length");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  return std::exp(-(a.eigenvalues - b.eigenvalues).squaredNorm() / (2.0 * sigma * sigma));
}

double local_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double blended_similarity(double s_global, double s_local, double gamma) {
  return gamma * s_global + (1.0 - gamma) * s_local;
}

double graph_contrastive_loss(const Matrix& sims, std::span<const int> labels, double tau, Matrix* d_sims) {
  const auto b = sims.rows();
  if (sims.cols() != b || static_cast<Eigen::Index>(labels.size()) != b)
    throw ShapeError("similarity matrix / label length mismatch");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (d_sims != nullptr) d_sims->setZero(b, b);

  double total = 0.0;
  int anchors = 0;
  std::vector<double> soft(static_cast<std::size_t>(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    int positives = 0;
    double pos_sum = 0.0;
    double mx = -HUGE_VAL;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j == i) continue;
      mx = std::max(mx, sims(i, j) / tau);
      if (labels[j] == labels[i]) {
        ++positives;
        pos_sum += sims(i, j) / tau;
      }
    }
    if (positives == 0) continue;
    double z = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j == i) continue;
      soft[j] = std::exp(sims(i, j) / tau - mx);
      z += soft[j];
    }
    total += (mx + std::log(z)) - pos_sum / positives;
    ++anchors;
    if (d_sims != nullptr) {
      for (Eigen::Index j = 0; j < b; ++j) {
        if (j == i) continue;
        const double target = labels[j] == labels[i] ? 1.0 / positives : 0.0;
        (*d_sims)(i, j) = (soft[j] / z - target) / tau;
      }
    }
  }
  if (anchors == 0) throw DegenerateError("batch has no same-class pair");
  if (d_sims != nullptr) *d_sims /= static_cast<double>(anchors);
  return total / anchors;
}

Matrix cosine_matrix(const Matrix& a, const Matrix& b) {
  auto normalized = [](const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double n = m.row(r).norm();
      if (n > 0.0) out.row(r) /= n;
    }
    return out;
  };
  return normalized(a) * normalized(b).transpose();
}

void cosine_matrix_backward(const Matrix& a, const Matrix& b, const Matrix& d_cos, Matrix& d_a, Matrix& d_b) {
  const Eigen::VectorXd na = a.rowwise().norm();
  const Eigen::VectorXd nb = b.rowwise().norm();
  Matrix an = a;
  Matrix bn = b;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    if (na(r) > 0.0) an.row(r) /= na(r);
  for (Eigen::Index r = 0; r < b.rows(); ++r)
    if (nb(r) > 0.0) bn.row(r) /= nb(r);
  const Matrix d_an = d_cos * bn;
  const Matrix d_bn = d_cos.transpose() * an;
  auto project = [](const Matrix& unit, const Matrix& d_unit, const Eigen::VectorXd& norms, Matrix& out) {
    if (out.size() == 0) out.setZero(unit.rows(), unit.cols());
    for (Eigen::Index r = 0; r < unit.rows(); ++r) {
      if (norms(r) == 0.0) continue;
      const double radial = d_unit.row(r).dot(unit.row(r));
      out.row(r) += (d_unit.row(r) - radial * unit.row(r)) / norms(r);
    }
  };
  project(an, d_an, na, d_a);
  project(bn, d_bn, nb, d_b);
}

double infograph_loss(std::span<const Matrix> node_embeddings, const Matrix& graph_embeddings, double tau,
                      InfoGraphGrad* grad) {
  const auto b = graph_embeddings.rows();
  if (static_cast<Eigen::Index>(node_embeddings.size()) != b)
    throw ShapeError("node/graph embedding batch size mismatch");
  if (b < 2) throw DegenerateError("InfoGraph loss needs at least 2 graphs");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");

  Eigen::Index total_nodes = 0;
  for (const auto& h : node_embeddings) total_nodes += h.rows();
  if (total_nodes == 0) throw DegenerateError("InfoGraph loss over empty graphs");

  if (grad != nullptr) {
    grad->d_nodes.assign(static_cast<std::size_t>(b), Matrix());
    grad->d_graphs.setZero(b, graph_embeddings.cols());
  }
  double total = 0.0;
  for (Eigen::Index g = 0; g < b; ++g) {
    const Matrix& h = node_embeddings[g];
    const Matrix logits = cosine_matrix(h, graph_embeddings) / tau;
    Matrix d_logits(h.rows(), b);
    for (Eigen::Index v = 0; v < h.rows(); ++v) {
      const double mx = logits.row(v).maxCoeff();
      const Eigen::RowVectorXd e = (logits.row(v).array() - mx).exp();
      const double z = e.sum();
      total += mx + std::log(z) - logits(v, g);
      d_logits.row(v) = e / z;
      d_logits(v, g) -= 1.0;
    }
    if (grad != nullptr) {
      d_logits /= tau * static_cast<double>(total_nodes);
      Matrix d_h;
      cosine_matrix_backward(h, graph_embeddings, d_logits, d_h, grad->d_graphs);
      grad->d_nodes[g] = std::move(d_h);
    }
  }
  return total / static_cast<double>(total_nodes);
}

double total_loss(double l_graph, double l_info, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("alpha must be nonnegative");
  return l_graph + alpha * l_info;
}

double median_sigma(std::span<const SpectralSignature> spectra) {
  std::vector<double> d;
  for (std::size_t i = 0; i < spectra.size(); ++i)
    for (std::size_t j = i + 1; j < spectra.size(); ++j) {
      if (spectra[i].eigenvalues.size() != spectra[j].eigenvalues.size())
        throw ShapeError("spectral signatures differ in length");
      d.push_back((spectra[i].eigenvalues - spectra[j].eigenvalues).norm());
    }
  if (d.empty()) return 1e-6;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
  return std::max(med, 1e-6);
}

BatchLoss contrastive_batch_loss(const EncoderParams& params, std::span<const BatchGraph> batch,
                                 const PretrainConfig& cfg, EncoderParams* grad, std::mt19937_64* dropout_rng,
                                 const Matrix* fixed_global, Matrix* global_out) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b < 2) throw DegenerateError("contrastive batch needs at least 2 graphs");
  if (!cfg.graph_loss && !cfg.infograph_loss) throw InvalidArgument("both contrastive terms disabled");

  std::vector<NodeForward> node_fwd;
  std::vector<GraphForward> graph_fwd;
  std::vector<Matrix> node_embs;
  Matrix graph_embs(b, params.hidden());
  std::vector<int> labels;
  for (const auto& g : batch) {
    node_fwd.push_back(encode_nodes_forward(params, g.adjacency, g.features, dropout_rng));
    graph_fwd.push_back(encode_graph_forward(params, node_fwd.back().output));
    graph_embs.row(static_cast<Eigen::Index>(graph_fwd.size()) - 1) = graph_fwd.back().output.row(0);
    node_embs.push_back(node_fwd.back().output);
    labels.push_back(g.label);
  }

  BatchLoss out;
  Matrix d_graphs = Matrix::Zero(b, params.hidden());
  std::vector<Matrix> d_nodes(static_cast<std::size_t>(b));

  if (cfg.graph_loss) {
    Matrix s_global;
    if (fixed_global != nullptr) {
      s_global = *fixed_global;
    } else {
      std::vector<SpectralSignature> spectra;
      for (const auto& h : node_embs) spectra.push_back(laplacian_spectrum(decode_adjacency(params, h)));
      const double sigma = cfg.sigma_mode == SigmaMode::kMedian ? median_sigma(spectra) : cfg.sigma;
      s_global.resize(b, b);
      for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j < b; ++j) s_global(i, j) = global_similarity(spectra[i], spectra[j], sigma);
    }
    if (global_out != nullptr) *global_out = s_global;
    const Matrix s_local = cosine_matrix(graph_embs, graph_embs);
    const Matrix sims = cfg.gamma * s_global + (1.0 - cfg.gamma) * s_local;
    Matrix d_sims;
    out.l_graph = graph_contrastive_loss(sims, labels, cfg.tau, grad ? &d_sims : nullptr);
    out.graph_term = true;
    if (grad != nullptr && cfg.gamma != 1.0) {
      cosine_matrix_backward(graph_embs, graph_embs, (1.0 - cfg.gamma) * d_sims, d_graphs, d_graphs);
    }
  }

  if (cfg.infograph_loss) {
    InfoGraphGrad ig;
    out.l_info = infograph_loss(node_embs, graph_embs, cfg.tau, grad ? &ig : nullptr);
    out.info_term = true;
    if (grad != nullptr) {
      d_graphs += cfg.alpha * ig.d_graphs;
      for (Eigen::Index g = 0; g < b; ++g) d_nodes[g] = cfg.alpha * ig.d_nodes[g];
    }
  }
  out.l_total = total_loss(out.l_graph, out.l_info, cfg.alpha);

  if (grad != nullptr) {
    for (Eigen::Index g = 0; g < b; ++g) {
      const auto n = node_embs[g].rows();
      Matrix d_h = encode_graph_backward(params, graph_fwd[g], n, d_graphs.row(g), *grad);
      if (d_nodes[g].size() != 0) d_h += d_nodes[g];
      encode_nodes_backward(params, node_fwd[g], d_h, *grad);
    }
  }
  return out;
}

PretrainResult pretrain(std::span<const BrainGraph> graphs, const PretrainConfig& cfg,
                        const AugmentationPolicy& policy, std::uint64_t seed) {
  if (graphs.size() < 2) throw DataError("pretraining needs at least 2 graphs");
  if (cfg.batch_size < 2) throw InvalidArgument("batch_size must be >= 2");
  if (cfg.epochs < 0) throw InvalidArgument("epochs must be >= 0");
  const bool mixed = std::any_of(graphs.begin(), graphs.end(),
                                 [&](const BrainGraph& g) { return g.label != graphs.front().label; });
  // With one class every batch member is a positive and the class-contrastive objective has no negatives.
  if (!mixed) throw DegenerateError("pretraining set contains a single class");
  const auto features = static_cast<int>(graphs.front().features.values.cols());

  PretrainResult result{init_encoder(features, cfg.hidden, seed), {}, {}};
  nn::Adam adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::mt19937_64 order_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 augment_rng(policy.seed ^ (seed * 0xbf58476d1ce4e5b9ULL));
  std::mt19937_64 dropout_rng(seed + 0x94d049bb133111ebULL);

  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_sum = 0.0;
    int used = 0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const auto stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<BatchGraph> batch;
      for (std::size_t k = start; k < stop; ++k) {
        const BrainGraph& g = graphs[order[k]];
        const Matrix adj = cfg.augment ? augment(g, policy, augment_rng).adjacency : g.adjacency;
        batch.push_back({adj, g.features.values, to_int(g.label)});
      }
      EncoderParams grad = result.params.zeros_like();
      BatchLoss loss;
      try {
        loss = contrastive_batch_loss(result.params, batch, cfg, &grad, &dropout_rng);
      } catch (const DegenerateError& e) {
        spdlog::warn("pretrain: epoch {} batch {} skipped ({})", epoch, batch_index, e.what());
        continue;
      }
      adam.step(result.params.tensors(), grad.tensors());
      result.trace.push_back({epoch, batch_index, loss.l_graph, loss.l_info, loss.l_total});
      epoch_sum += loss.l_total;
      ++used;
    }
    if (used == 0) throw DegenerateError("pretraining epoch " + std::to_string(epoch) + " had only degenerate batches");
    result.epoch_loss.push_back(epoch_sum / used);
  }
  return result;
}

}  // namespace ngcl
