#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "aldual/problem.hpp"

namespace aldual {

/// Activations of one batched forward pass; columns are samples.
struct ForwardCache {
  /// Layer inputs: inputs, then each hidden layer's sigmoid output.
  std::vector<Eigen::MatrixXd> activations;
  /// Class probabilities, 2 × N.
  Eigen::MatrixXd probs;
};

/**
 * Fully connected sigmoid network with a normalized-exponential output over two
 * classes. Parameters are flattened layer by layer as [vec(W) (column-major),
 * b], so a ParamVector is the whole model.
 */
class Mlp {
 public:
  /// widths = {input, hidden..., 2}.
  explicit Mlp(std::vector<int> widths);

  /// input → 16 → 16 → 2.
  static Mlp with_default_hidden(int input_width);

  const std::vector<int>& widths() const { return widths_; }
  int input_width() const { return widths_.front(); }
  Eigen::Index num_params() const { return num_params_; }

  /// Probabilities (2 × N) for inputs given as columns (input_width × N).
  Eigen::MatrixXd forward(const ParamVector& theta,
                          const Eigen::MatrixXd& inputs) const;
  Eigen::Vector2d forward_one(const ParamVector& theta,
                              const Eigen::VectorXd& x) const;

  ForwardCache forward_cached(const ParamVector& theta,
                              const Eigen::MatrixXd& inputs) const;

  /// Σ over samples of ∂loss/∂θ given ∂loss/∂logits (2 × N).
  ParamVector backward(const ParamVector& theta, const ForwardCache& cache,
                       const Eigen::MatrixXd& dlogits) const;

  /// Weights uniform in [−0.5, 0.5] / √fan_in, zero biases.
  ParamVector initial_params(std::uint64_t seed) const;

 private:
  void check(const ParamVector& theta, Eigen::Index input_rows) const;

  std::vector<int> widths_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index num_params_ = 0;
};

/// Probability clamp used inside logarithms.
inline constexpr double kDefaultProbabilityFloor = 1e-6;

/// Pulls ∂loss/∂p (2 × N) back through the softmax to ∂loss/∂logits.
Eigen::MatrixXd softmax_backward(const Eigen::MatrixXd& probs,
                                 const Eigen::MatrixXd& dprobs);

}  // namespace aldual
