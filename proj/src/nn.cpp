#include "ngcl/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"

namespace ngcl::nn {

Matrix Dense::forward(const Matrix& x) const {
  Matrix y = x * weight.transpose();
  y.rowwise() += bias.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy, Dense& grad) const {
  grad.weight.noalias() += dy.transpose() * x;
  grad.bias += dy.colwise().sum();
  return dy * weight;
}

Dense Dense::uniform(Eigen::Index in, Eigen::Index out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Dense d = zeros(in, out);
  for (Eigen::Index r = 0; r < out; ++r)
    for (Eigen::Index c = 0; c < in; ++c) d.weight(r, c) = dist(rng);
  return d;
}

Dense Dense::zeros(Eigen::Index in, Eigen::Index out) {
  return Dense{Matrix::Zero(out, in), Matrix::Zero(1, out)};
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& pre, const Matrix& dy) {
  return (pre.array() > 0.0).select(dy, 0.0);
}

Matrix elu(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Matrix elu_backward(const Matrix& pre, const Matrix& dy) {
  return dy.cwiseProduct(pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); }));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void Adam::step(const std::vector<NamedTensor>& params, const std::vector<NamedTensor>& grads) {
  if (params.size() != grads.size()) throw ShapeError("Adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = *params[i].value;
    Matrix g = *grads[i].value;
    if (opt_.weight_decay != 0.0) g += opt_.weight_decay * theta;
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseAbs2();
    theta.array() -= opt_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + opt_.eps);
  }
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("checkpoint has no meta key '" + key + "'");
  return it->second;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << "ngcl-checkpoint 1 " << kind << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
  for (const auto& t : tensors) {
    const Matrix& m = *t.value;
    out << "tensor " << t.name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open checkpoint " + path.string());
  const auto src = path.string();
  Checkpoint ck;
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line)) throw ParseError(src, lineno, "empty checkpoint");
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    hs >> magic >> version >> ck.kind;
    if (magic != "ngcl-checkpoint" || version != 1) throw ParseError(src, lineno, "not an ngcl checkpoint");
  }
  std::string word;
  while (in >> word) {
    if (word == "meta") {
      std::string key;
      in >> key;
      std::getline(in, line);
      ck.meta[key] = trim(line);
    } else if (word == "tensor") {
      std::string name;
      Eigen::Index rows = 0;
      Eigen::Index cols = 0;
      if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0)
        throw ParseError(src, lineno, "bad tensor header");
      Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          std::string tok;
          if (!(in >> tok)) throw ParseError(src, lineno, "truncated tensor '" + name + "'");
          auto v = parse_double(tok);
          if (!v) throw ParseError(src, lineno, "bad value in tensor '" + name + "'");
          m(r, c) = *v;
        }
      }
      ck.tensors.emplace(name, std::move(m));
    } else {
      throw ParseError(src, lineno, "unexpected token '" + word + "'");
    }
  }
  return ck;
}

}  // namespace ngcl::nn
