#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace learnmmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// softplus(x) = log(1 + exp(x)), evaluated as max(x, 0) + log1p(exp(-|x|)).
double softplus(double x);
double logistic(double x);
double logit(double p);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Fully connected feature network; softplus follows every affine layer,
// including the last one.
struct NetParams {
  std::vector<DenseLayer> layers;

  Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
  Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }
  std::size_t depth() const { return layers.size(); }
  Index parameter_count() const;
  bool empty() const { return layers.empty(); }

  friend bool operator==(const NetParams& a, const NetParams& b);
};

struct ClassifierHead {
  Vector w;
  double b = 0.0;

  friend bool operator==(const ClassifierHead& a, const ClassifierHead& b) {
    return a.w.size() == b.w.size() && a.w == b.w && a.b == b.b;
  }
};

// Glorot-uniform weights, zero biases. depth counts affine layers: depth 1 maps
// input -> output directly; otherwise input -> hidden, (depth - 2) hidden ->
// hidden, hidden -> output.
NetParams init_net(Index input_dim, Index hidden_dim, Index output_dim, std::size_t depth, std::uint64_t seed);
ClassifierHead init_head(Index feature_dim, std::uint64_t seed);

Vector forward(const NetParams& net, const Vector& x);
// Rows of `inputs` are points; returns one feature row per point.
Matrix forward_batch(const NetParams& net, const Matrix& inputs);

// Activations retained for backpropagation.
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer (rows = points)
  std::vector<Matrix> preactivations;
  Matrix output;
};

ForwardCache forward_cached(const NetParams& net, const Matrix& inputs);

// Given dL/d(output), accumulate parameter gradients into `grad` (same shape as
// the net) and return dL/d(inputs).
Matrix backward(const NetParams& net, const ForwardCache& cache, const Matrix& output_grad, NetParams& grad);

NetParams zeros_like(const NetParams& net);

Vector score(const NetParams& net, const ClassifierHead& head, const Matrix& inputs);

}  // namespace learnmmd
