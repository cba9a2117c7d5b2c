#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ngcl/contrastive.hpp"
#include "ngcl/dataset.hpp"
#include "ngcl/error.hpp"
#include "test_util.hpp"

using namespace ngcl;

namespace {

// Normalized Laplacian written out directly for the oracle.
Eigen::VectorXd direct_spectrum(const Matrix& a) {
  Matrix m = 0.5 * (a + a.transpose());
  m.diagonal().setZero();
  const Eigen::VectorXd d = m.rowwise().sum().cwiseMax(1e-8);
  Matrix l = Matrix::Identity(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) l(i, j) -= m(i, j) / std::sqrt(d(i) * d(j));
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  return es.eigenvalues();
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(LaplacianSpectrum, CompleteGraphK3) {
  Matrix k3 = Matrix::Ones(3, 3);
  k3.diagonal().setZero();
  const auto s = laplacian_spectrum(k3).eigenvalues;
  const auto oracle = direct_spectrum(k3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(i), oracle(i), 1e-9);
  EXPECT_NEAR(s(0), 0.0, 1e-9);
  EXPECT_NEAR(s(1), 1.5, 1e-9);
  EXPECT_NEAR(s(2), 1.5, 1e-9);
}

TEST(LaplacianSpectrum, EmptyGraphIsAllOnesAndConnectedHasZero) {
  EXPECT_LT((laplacian_spectrum(Matrix::Zero(4, 4)).eigenvalues.array() - 1.0).abs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    Matrix a = random_matrix(6, 6, rng).cwiseAbs();  // dense, hence connected
    EXPECT_LE(std::abs(laplacian_spectrum(a).eigenvalues(0)), 1e-9);
    EXPECT_LT((laplacian_spectrum(a).eigenvalues - direct_spectrum(a)).cwiseAbs().maxCoeff(), 1e-9);
  }
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(laplacian_spectrum(bad), NumericError);
}

TEST(LaplacianSpectrum, DecodedGraphsStayInRange) {
  std::mt19937_64 rng(3);
  const auto enc = init_encoder(5, 16, 4);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = decode_adjacency(enc, random_matrix(3 + t % 20, 16, rng));
    const auto s = laplacian_spectrum(a).eigenvalues;
    EXPECT_GE(s.minCoeff(), -1e-9);
    EXPECT_LE(s.maxCoeff(), 2.0 + 1e-9);
  }
}

TEST(Similarity, GlobalLocalBlended) {
  SpectralSignature a{Eigen::Vector3d(0, 1, 1.5)}, b{Eigen::Vector3d(0, 1, 1.5)}, c{Eigen::Vector3d(1, 1, 1.5)};
  EXPECT_EQ(global_similarity(a, b, 0.7), 1.0);
  // ||a - c||^2 = 1 = 2 sigma^2
  EXPECT_NEAR(global_similarity(a, c, std::sqrt(0.5)), std::exp(-1.0), 1e-15);
  EXPECT_THROW(global_similarity(a, SpectralSignature{Eigen::Vector2d(0, 1)}, 1.0), ShapeError);
  EXPECT_THROW(global_similarity(a, c, 0.0), InvalidArgument);

  const Eigen::RowVector3d h(1, 2, -1), o(1, 0, 1);
  EXPECT_NEAR(local_similarity(h, h), 1.0, 1e-15);
  EXPECT_NEAR(local_similarity(h, -h), -1.0, 1e-15);
  EXPECT_EQ(local_similarity(h, o), 0.0);
  EXPECT_EQ(local_similarity(h, Eigen::RowVector3d::Zero()), 0.0);

  EXPECT_EQ(blended_similarity(0.3, 0.9, 1.0), 0.3);
  EXPECT_EQ(blended_similarity(0.3, 0.9, 0.0), 0.9);
  EXPECT_EQ(blended_similarity(1.0, 0.0, 0.5), 0.5);
}

TEST(Similarity, MedianSigmaPreservesDistanceOrder) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<SpectralSignature> s;
    for (int i = 0; i < 6; ++i) s.push_back({random_matrix(5, 1, rng).col(0)});
    const double sigma = median_sigma(s);
    for (double other : {0.1, 1.0, 10.0})
      for (int i = 1; i < 6; ++i)
        for (int j = 1; j < 6; ++j) {
          const bool closer = (s[0].eigenvalues - s[i].eigenvalues).norm() < (s[0].eigenvalues - s[j].eigenvalues).norm();
          if (!closer) continue;
          EXPECT_GT(global_similarity(s[0], s[i], sigma), global_similarity(s[0], s[j], sigma) - 1e-300);
          EXPECT_GE(global_similarity(s[0], s[i], other), global_similarity(s[0], s[j], other));
        }
  }
  std::vector<SpectralSignature> same(3, SpectralSignature{Eigen::Vector2d(1, 1)});
  EXPECT_EQ(median_sigma(same), 1e-6);
}

TEST(GraphContrastiveLoss, EqualSimilaritiesGiveLogBMinusOne) {
  for (int b : {3, 4, 8}) {
    std::vector<int> labels(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i) labels[i] = i % 2;
    EXPECT_NEAR(graph_contrastive_loss(Matrix::Constant(b, b, 0.37), labels, 0.3), std::log(b - 1.0), 1e-9);
  }
}

TEST(GraphContrastiveLoss, LimitAndDegenerateCases) {
  Matrix s = Matrix::Zero(4, 4);
  const std::vector<int> labels{0, 0, 1, 1};
  s(0, 1) = s(1, 0) = s(2, 3) = s(3, 2) = 50.0;
  const double l = graph_contrastive_loss(s, labels, 0.3);
  EXPECT_GE(l, 0.0);
  EXPECT_LT(l, 1e-12);
  EXPECT_THROW(graph_contrastive_loss(Matrix::Zero(2, 2), std::vector<int>{0, 1}, 0.3), DegenerateError);
}

TEST(GraphContrastiveLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const std::vector<int> labels{0, 1, 1, 0, 1};
  Matrix s = random_matrix(5, 5, rng);
  Matrix d;
  graph_contrastive_loss(s, labels, 0.3, &d);
  const Matrix num = ngcl::testing::numeric_gradient(s, [&] { return graph_contrastive_loss(s, labels, 0.3); });
  EXPECT_LT(ngcl::testing::relative_error(d, num), ngcl::testing::kGradTol);
}

TEST(InfoGraphLoss, EqualSimilaritiesGiveLogB) {
  for (int b : {3, 4, 8}) {
    std::vector<Matrix> nodes;
    for (int g = 0; g < b; ++g) nodes.push_back(Matrix::Constant(3 + g, 5, 0.4));
    EXPECT_NEAR(infograph_loss(nodes, Matrix::Constant(b, 5, 1.3), 0.3), std::log(static_cast<double>(b)), 1e-9);
  }
}

TEST(InfoGraphLoss, LimitAndDegenerateCases) {
  std::vector<Matrix> nodes;
  Matrix graphs = Matrix::Identity(3, 3);
  for (int g = 0; g < 3; ++g) nodes.push_back(Matrix(Matrix::Zero(2, 3).rowwise() + graphs.row(g)));
  EXPECT_LT(infograph_loss(nodes, graphs, 0.01), 1e-12);
  EXPECT_THROW(infograph_loss(std::vector<Matrix>{Matrix::Ones(2, 3)}, Matrix::Ones(1, 3), 0.3), DegenerateError);
}

TEST(InfoGraphLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::vector<Matrix> nodes{random_matrix(3, 4, rng), random_matrix(5, 4, rng), random_matrix(2, 4, rng)};
  Matrix graphs = random_matrix(3, 4, rng);
  InfoGraphGrad g;
  infograph_loss(nodes, graphs, 0.3, &g);
  auto f = [&] { return infograph_loss(nodes, graphs, 0.3); };
  EXPECT_LT(ngcl::testing::relative_error(g.d_graphs, ngcl::testing::numeric_gradient(graphs, f)), ngcl::testing::kGradTol);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    EXPECT_LT(ngcl::testing::relative_error(g.d_nodes[i], ngcl::testing::numeric_gradient(nodes[i], f)), ngcl::testing::kGradTol);
}

TEST(TotalLoss, Combination) {
  EXPECT_EQ(total_loss(0.7, 0.3, 0.0), 0.7);
  EXPECT_DOUBLE_EQ(total_loss(0.7, 0.3, 1.0), 1.0);
  EXPECT_EQ(PretrainConfig{}.alpha, 1.0);
  EXPECT_THROW(total_loss(1.0, 1.0, -0.1), InvalidArgument);
}

// Embedding path of the joint objective, spectral similarities held fixed.
TEST(BatchLossGradients, EmbeddingPathMatchesFiniteDifferences) {
  for (int instance = 0; instance < 5; ++instance) {
    std::mt19937_64 rng(300 + instance);
    auto enc = init_encoder(5, 10, 400 + instance, 4);
    std::vector<BatchGraph> batch;
    for (int g = 0; g < 4; ++g) {
      const auto bg = ngcl::testing::random_graph(5, 0.5, rng);
      batch.push_back({bg.adjacency, bg.features.values, g % 2});
    }
    PretrainConfig cfg;
    Matrix global;
    contrastive_batch_loss(enc, batch, cfg, nullptr, nullptr, nullptr, &global);
    auto grad = enc.zeros_like();
    contrastive_batch_loss(enc, batch, cfg, &grad, nullptr, &global);
    auto loss = [&] { return contrastive_batch_loss(enc, batch, cfg, nullptr, nullptr, &global).l_total; };
    std::string worst;
    EXPECT_LT(ngcl::testing::worst_gradient_error(enc, grad, loss, &worst), ngcl::testing::kGradTol)
        << "instance " << instance << " group " << worst;
    EXPECT_EQ(grad.decoder.weight.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Pretrain, LossDecreasesOverFiftyEpochs) {
  SynthSpec spec;
  spec.seed = 3;
  const auto graphs = synth_graph_dataset(spec);
  const auto res = pretrain(graphs, PretrainConfig{}, AugmentationPolicy{}, 11);
  ASSERT_EQ(res.epoch_loss.size(), 50u);
  EXPECT_EQ(res.trace.size(), 100u);  // two batches of at most 128 per epoch
  EXPECT_LT(res.epoch_loss.back(), res.epoch_loss.front());
}

TEST(Pretrain, DeterministicAndRejectsSingleClass) {
  SynthSpec spec;
  spec.n_per_class = 10;
  spec.nodes = 8;
  spec.soz_size = 2;
  auto graphs = synth_graph_dataset(spec);
  PretrainConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  auto a = pretrain(graphs, cfg, AugmentationPolicy{}, 5).params;
  auto b = pretrain(graphs, cfg, AugmentationPolicy{}, 5).params;
  auto ta = a.tensors();
  auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(*ta[i].value, *tb[i].value);
  for (auto& g : graphs) g.label = Label::kIctal;
  EXPECT_THROW(pretrain(graphs, cfg, AugmentationPolicy{}, 5), DegenerateError);
}
