#include "learnmmd/network.hpp"

#include <cmath>
#include <stdexcept>

#include "learnmmd/random.hpp"

namespace learnmmd {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

Index NetParams::parameter_count() const {
  Index count = 0;
  for (const auto& layer : layers) count += layer.weight.size() + layer.bias.size();
  return count;
}

bool operator==(const NetParams& a, const NetParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& la = a.layers[i];
    const auto& lb = b.layers[i];
    if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
    if (la.bias.size() != lb.bias.size()) return false;
    if (la.weight != lb.weight || la.bias != lb.bias) return false;
  }
  return true;
}

NetParams init_net(Index input_dim, Index hidden_dim, Index output_dim, std::size_t depth, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1 || depth < 1) {
    throw std::invalid_argument("init_net: dimensions and depth must be >= 1");
  }
  Rng rng(seed);
  NetParams net;
  for (std::size_t l = 0; l < depth; ++l) {
    const Index in = l == 0 ? input_dim : hidden_dim;
    const Index out = l + 1 == depth ? output_dim : hidden_dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Index r = 0; r < out; ++r)
      for (Index c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

ClassifierHead init_head(Index feature_dim, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(feature_dim + 1));
  std::uniform_real_distribution<double> dist(-limit, limit);
  ClassifierHead head{Vector(feature_dim), 0.0};
  for (Index i = 0; i < feature_dim; ++i) head.w(i) = dist(rng);
  return head;
}

namespace {

void check_input(const NetParams& net, Index dim) {
  if (net.empty()) throw std::invalid_argument("network has no layers");
  if (dim != net.input_dim()) {
    throw std::invalid_argument("network input dimension mismatch: expected " + std::to_string(net.input_dim()) +
                                ", got " + std::to_string(dim));
  }
}

}  // namespace

Matrix forward_batch(const NetParams& net, const Matrix& inputs) {
  check_input(net, inputs.cols());
  Matrix h = inputs;
  for (const auto& layer : net.layers) {
    Matrix a = h * layer.weight.transpose();
    a.rowwise() += layer.bias.transpose();
    h = a.unaryExpr([](double v) { return softplus(v); });
  }
  return h;
}

Vector forward(const NetParams& net, const Vector& x) {
  return forward_batch(net, Matrix(x.transpose())).row(0).transpose();
}

ForwardCache forward_cached(const NetParams& net, const Matrix& inputs) {
  check_input(net, inputs.cols());
  ForwardCache cache;
  Matrix h = inputs;
  for (const auto& layer : net.layers) {
    Matrix a = h * layer.weight.transpose();
    a.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(h));
    h = a.unaryExpr([](double v) { return softplus(v); });
    cache.preactivations.push_back(std::move(a));
  }
  cache.output = std::move(h);
  return cache;
}

Matrix backward(const NetParams& net, const ForwardCache& cache, const Matrix& output_grad, NetParams& grad) {
  Matrix upstream = output_grad;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    // softplus'(a) = logistic(a)
    const Matrix da = upstream.cwiseProduct(cache.preactivations[l].unaryExpr([](double v) { return logistic(v); }));
    grad.layers[l].weight.noalias() += da.transpose() * cache.inputs[l];
    grad.layers[l].bias.noalias() += da.colwise().sum().transpose();
    upstream = da * net.layers[l].weight;
  }
  return upstream;
}

NetParams zeros_like(const NetParams& net) {
  NetParams out;
  for (const auto& layer : net.layers) {
    out.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()), Vector::Zero(layer.bias.size())});
  }
  return out;
}

Vector score(const NetParams& net, const ClassifierHead& head, const Matrix& inputs) {
  const Matrix features = forward_batch(net, inputs);
  if (features.cols() != head.w.size()) throw std::invalid_argument("classifier head dimension mismatch");
  // Row by row, so a point's score does not depend on the batch it arrives in.
  Vector out(features.rows());
  for (Index i = 0; i < features.rows(); ++i) out(i) = features.row(i).dot(head.w) + head.b;
  return out;
}

}  // namespace learnmmd
