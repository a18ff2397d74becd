#include "aldual/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace aldual {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const double shift = logits.col(n).maxCoeff();
    out.col(n) = (logits.col(n).array() - shift).exp();
    out.col(n) /= out.col(n).sum();
  }
  return out;
}

}  // namespace

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ProblemError("network needs at least two layers");
  if (widths_.back() != 2) throw ProblemError("network output must have 2 classes");
  for (int w : widths_)
    if (w <= 0) throw ProblemError("layer widths must be positive");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(num_params_);
    num_params_ += static_cast<Eigen::Index>(widths_[l + 1]) * (widths_[l] + 1);
  }
}

Mlp Mlp::with_default_hidden(int input_width) { return Mlp({input_width, 16, 16, 2}); }

void Mlp::check(const ParamVector& theta, Eigen::Index input_rows) const {
  if (theta.size() != num_params_)
    throw ProblemError("expected " + std::to_string(num_params_) +
                       " parameters, got " + std::to_string(theta.size()));
  if (input_rows != widths_.front())
    throw ProblemError("input width " + std::to_string(input_rows) +
                       " does not match network input " +
                       std::to_string(widths_.front()));
}

ForwardCache Mlp::forward_cached(const ParamVector& theta,
                                 const Eigen::MatrixXd& inputs) const {
  check(theta, inputs.rows());
  ForwardCache cache;
  cache.activations.reserve(widths_.size() - 1);
  cache.activations.push_back(inputs);
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(theta.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + offsets_[l] + out * in, out);
    Eigen::MatrixXd z = w * cache.activations.back();
    z.colwise() += b;
    if (l + 1 == layers)
      cache.probs = softmax_columns(z);
    else
      cache.activations.push_back(sigmoid(z));
  }
  return cache;
}

Eigen::MatrixXd Mlp::forward(const ParamVector& theta,
                             const Eigen::MatrixXd& inputs) const {
  return forward_cached(theta, inputs).probs;
}

Eigen::Vector2d Mlp::forward_one(const ParamVector& theta,
                                 const Eigen::VectorXd& x) const {
  return forward(theta, x).col(0);
}

ParamVector Mlp::backward(const ParamVector& theta, const ForwardCache& cache,
                          const Eigen::MatrixXd& dlogits) const {
  ParamVector grad = ParamVector::Zero(num_params_);
  Eigen::MatrixXd delta = dlogits;
  for (std::size_t l = widths_.size() - 1; l-- > 0;) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const Eigen::MatrixXd& a = cache.activations[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + out * in, out);
    gw.noalias() = delta * a.transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::Map<const Eigen::MatrixXd> w(theta.data() + offsets_[l], out, in);
    Eigen::MatrixXd back = w.transpose() * delta;
    delta = back.array() * a.array() * (1.0 - a.array());
  }
  return grad;
}

ParamVector Mlp::initial_params(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  ParamVector theta = ParamVector::Zero(num_params_);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(out) * in; ++k)
      theta(offsets_[l] + k) = scale * unit(rng);
  }
  return theta;
}

Eigen::MatrixXd softmax_backward(const Eigen::MatrixXd& probs,
                                 const Eigen::MatrixXd& dprobs) {
  // ∂p_k/∂z_j = p_k (δ_kj − p_j)  ⇒  ∂/∂z_j = p_j (g_j − Σ_k g_k p_k).
  const Eigen::RowVectorXd inner = (dprobs.array() * probs.array()).colwise().sum();
  return probs.array() * (dprobs.rowwise() - inner).array();
}

}  // namespace aldual
