#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ngcl/biomarkers.hpp"
#include "ngcl/connectivity.hpp"
#include "ngcl/signalio.hpp"

namespace ngcl {

using Rng = std::mt19937_64;

// Directed weighted brain graph. adjacency(i, j) is the weight of the edge j -> i,
// the same orientation as ConnectivityMatrix.
struct BrainGraph {
  Eigen::MatrixXd adjacency;
  NodeFeatureMatrix features;
  Label label = Label::kInterictal;

  Eigen::Index nodes() const { return adjacency.rows(); }
  void validate() const;
};

struct AugmentationPolicy {
  double node_mask_ratio = 0.2;
  double edge_perturb_ratio = 0.2;
  std::uint64_t seed = 0;
};

BrainGraph build_graph(const ConnectivityMatrix& conn, const NodeFeatureMatrix& feats, Label label);

// Weighted total degree: in + out.
Eigen::VectorXd degree_centrality(const BrainGraph& g);

// Min-max to [0, 1]; all 0.5 when constant.
Eigen::VectorXd normalize_importance(const Eigen::VectorXd& c);

struct MaskResult {
  BrainGraph graph;
  std::vector<int> masked;  // ascending
};

// Draws floor(ratio N) distinct nodes with weights (1 - c_norm) + 1e-6 and zeroes their
// rows and columns. Features are left untouched.
MaskResult mask_nodes(const BrainGraph& g, const Eigen::VectorXd& c_norm, double ratio, Rng& rng);

struct PerturbResult {
  BrainGraph graph;
  std::vector<std::pair<int, int>> removed;  // (i, j) with i < j
};

// Draws floor(ratio E) existing node pairs with weights (1 - mean endpoint importance) + 1e-6
// and deletes both directed edges of each.
PerturbResult perturb_edges(const BrainGraph& g, const Eigen::VectorXd& c_norm, double ratio, Rng& rng);

// mask_nodes followed by perturb_edges on recomputed centralities.
BrainGraph augment(const BrainGraph& g, const AugmentationPolicy& policy, Rng& rng);

// Weighted sampling of `count` distinct indices without replacement.
std::vector<int> weighted_sample_without_replacement(std::vector<double> weights, int count, Rng& rng);

}  // namespace ngcl
