#include "ngcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ngcl/error.hpp"

namespace ngcl {

namespace {

constexpr double kSelectionFloor = 1e-6;

void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw InvalidArgument("augmentation ratio must be in [0, 1)");
}

}  // namespace

void BrainGraph::validate() const {
  if (adjacency.rows() != adjacency.cols()) throw ShapeError("adjacency must be square");
  if (features.values.rows() != adjacency.rows()) {
    throw ShapeError("adjacency has " + std::to_string(adjacency.rows()) + " nodes but features have " +
                     std::to_string(features.values.rows()) + " rows");
  }
  if (!adjacency.allFinite() || (adjacency.array() < 0.0).any())
    throw DataError("adjacency weights must be finite and nonnegative");
  if (adjacency.diagonal().cwiseAbs().maxCoeff() != 0.0) throw DataError("adjacency diagonal must be zero");
  if (!features.values.allFinite()) throw DataError("node features must be finite");
}

BrainGraph build_graph(const ConnectivityMatrix& conn, const NodeFeatureMatrix& feats, Label label) {
  BrainGraph g{conn.weights, feats, label};
  g.validate();
  return g;
}

Eigen::VectorXd degree_centrality(const BrainGraph& g) {
  return g.adjacency.rowwise().sum() + g.adjacency.colwise().sum().transpose();
}

Eigen::VectorXd normalize_importance(const Eigen::VectorXd& c) {
  if (c.size() == 0) throw InvalidArgument("normalize_importance of an empty vector");
  const double lo = c.minCoeff();
  const double hi = c.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Constant(c.size(), 0.5);
  return (c.array() - lo) / (hi - lo);
}

std::vector<int> weighted_sample_without_replacement(std::vector<double> weights, int count, Rng& rng) {
  std::vector<int> chosen;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int draw = 0; draw < count; ++draw) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) break;
    double target = unif(rng) * total;
    std::size_t pick = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      pick = i;
      if (target < weights[i]) break;
      target -= weights[i];
    }
    chosen.push_back(static_cast<int>(pick));
    weights[pick] = 0.0;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

MaskResult mask_nodes(const BrainGraph& g, const Eigen::VectorXd& c_norm, double ratio, Rng& rng) {
  check_ratio(ratio);
  const auto n = g.nodes();
  if (c_norm.size() != n) throw ShapeError("importance vector length does not match node count");
  const int count = static_cast<int>(std::floor(ratio * static_cast<double>(n)));
  MaskResult out{g, {}};
  if (count == 0) return out;

  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) weights[i] = (1.0 - c_norm(i)) + kSelectionFloor;
  out.masked = weighted_sample_without_replacement(std::move(weights), count, rng);
  for (int v : out.masked) {
    out.graph.adjacency.row(v).setZero();
    out.graph.adjacency.col(v).setZero();
  }
  return out;
}

PerturbResult perturb_edges(const BrainGraph& g, const Eigen::VectorXd& c_norm, double ratio, Rng& rng) {
  check_ratio(ratio);
  const auto n = g.nodes();
  if (c_norm.size() != n) throw ShapeError("importance vector length does not match node count");
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> weights;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (g.adjacency(i, j) > 0.0 || g.adjacency(j, i) > 0.0) {
        pairs.emplace_back(i, j);
        weights.push_back((1.0 - 0.5 * (c_norm(i) + c_norm(j))) + kSelectionFloor);
      }
    }
  }
  const int count = static_cast<int>(std::floor(ratio * static_cast<double>(pairs.size())));
  PerturbResult out{g, {}};
  if (count == 0) return out;
  for (int idx : weighted_sample_without_replacement(std::move(weights), count, rng)) {
    const auto [i, j] = pairs[static_cast<std::size_t>(idx)];
    out.graph.adjacency(i, j) = 0.0;
    out.graph.adjacency(j, i) = 0.0;
    out.removed.emplace_back(i, j);
  }
  return out;
}

BrainGraph augment(const BrainGraph& g, const AugmentationPolicy& policy, Rng& rng) {
  auto masked = mask_nodes(g, normalize_importance(degree_centrality(g)), policy.node_mask_ratio, rng);
  const auto c_norm = normalize_importance(degree_centrality(masked.graph));
  return perturb_edges(masked.graph, c_norm, policy.edge_perturb_ratio, rng).graph;
}

}  // namespace ngcl
