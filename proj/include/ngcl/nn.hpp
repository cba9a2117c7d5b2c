#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ngcl::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Affine map y = x W^T + b over row-stacked inputs.
struct Dense {
  Matrix weight;  // out x in
  Matrix bias;    // 1 x out

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }

  Matrix forward(const Matrix& x) const;
  // Accumulates parameter gradients into `grad`; returns dL/dx.
  Matrix backward(const Matrix& x, const Matrix& dy, Dense& grad) const;

  // U(-1/sqrt(in), 1/sqrt(in)) weights, zero bias.
  static Dense uniform(Eigen::Index in, Eigen::Index out, std::mt19937_64& rng);
  static Dense zeros(Eigen::Index in, Eigen::Index out);
};

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& pre, const Matrix& dy);
Matrix elu(const Matrix& x);
Matrix elu_backward(const Matrix& pre, const Matrix& dy);
double sigmoid(double z);
// log(1 + e^z) without overflow.
double softplus(double z);

struct NamedTensor {
  std::string name;
  Matrix* value;
};

// Parameter containers expose `std::vector<NamedTensor> tensors()` in a fixed order.
template <class Params>
void zero_all(Params& p) {
  for (auto& t : p.tensors()) t.value->setZero();
}

// Adam with L2 weight decay folded into the gradient.
class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
  };

  explicit Adam(Options opt) : opt_(opt) {}

  void step(const std::vector<NamedTensor>& params, const std::vector<NamedTensor>& grads);
  long steps() const { return t_; }

 private:
  Options opt_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// Text checkpoint: header, `meta key value` lines, then `tensor name rows cols` followed by
// the row-major values in shortest round-trip form.
struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> tensors;

  const Matrix& tensor(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<NamedTensor>& tensors);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ngcl::nn
