#pragma once

#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "learnmmd/datasets.hpp"
#include "learnmmd/network.hpp"

namespace learnmmd {

// How the deep kernel's mixing weight is recovered from its free parameter.
enum class EpsilonParam {
  Logistic,  // eps = 1 / (1 + exp(-t)), always in (0, 1)
  Exp,       // eps = exp(t), compatibility mode; may leave (0, 1)
};

// exp(-|x - y|^2 / (2 sigma^2))
struct GaussianKernel {
  double log_sigma = 0.0;
  double sigma() const;
  friend bool operator==(const GaussianKernel&, const GaussianKernel&) = default;
};

// Gaussian on network features only: exp(-|phi(x) - phi(y)|^2 / (2 sigma_phi^2)).
struct FeatureGaussianKernel {
  NetParams net;
  double log_sigma_phi = 0.0;
  friend bool operator==(const FeatureGaussianKernel&, const FeatureGaussianKernel&) = default;
};

// [(1 - eps) kappa(phi(x), phi(y)) + eps] q(x, y), kappa and q Gaussian.
struct DeepGaussianKernel {
  NetParams net;
  double log_sigma_phi = 0.0;
  double log_sigma_q = 0.0;
  double logit_epsilon = 0.0;
  EpsilonParam epsilon_param = EpsilonParam::Logistic;

  double epsilon() const;
  friend bool operator==(const DeepGaussianKernel&, const DeepGaussianKernel&) = default;
};

// 1/4 * 1(f(x) > 0) * 1(f(y) > 0) with f = w^T phi + b.
struct SignScoreKernel {
  NetParams net;
  ClassifierHead head;
  friend bool operator==(const SignScoreKernel&, const SignScoreKernel&) = default;
};

// f(x) f(y)
struct LinearScoreKernel {
  NetParams net;
  ClassifierHead head;
  friend bool operator==(const LinearScoreKernel&, const LinearScoreKernel&) = default;
};

// tanh(f(x) / s) tanh(f(y) / s), s the Frobenius norm of the pooled training data.
struct TanhScoreKernel {
  NetParams net;
  ClassifierHead head;
  double frobenius_norm = 1.0;
  friend bool operator==(const TanhScoreKernel&, const TanhScoreKernel&) = default;
};

struct KernelSpec;

// sum_i weights[i] * bases[i]; weights must be nonnegative.
struct MklKernel {
  std::vector<double> weights;
  std::vector<KernelSpec> bases;
  friend bool operator==(const MklKernel&, const MklKernel&);
};

struct KernelSpec {
  using Variant = std::variant<GaussianKernel, FeatureGaussianKernel, DeepGaussianKernel, SignScoreKernel,
                               LinearScoreKernel, TanhScoreKernel, MklKernel>;
  Variant kernel;

  KernelSpec() = default;
  template <typename K>
    requires(!std::is_same_v<std::decay_t<K>, KernelSpec>)
  KernelSpec(K k) : kernel(std::move(k)) {}  // NOLINT(google-explicit-constructor)

  std::string name() const;
  // Expected input dimension, or 0 when the kernel accepts any dimension.
  Index input_dim() const;
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Throws std::invalid_argument on dimension mismatch.
double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y);

// Entry (i, j) is k(A_i, B_j).
Matrix gram_block(const KernelSpec& spec, const Matrix& a, const Matrix& b);
Matrix gram_block(const KernelSpec& spec, const SampleSet& a, const SampleSet& b);
// gram_block(spec, a, a), computing features once and filling one triangle.
Matrix gram_symmetric(const KernelSpec& spec, const Matrix& a);

// Entry i is k(A_i, B_i).
Vector kernel_pairs(const KernelSpec& spec, const Matrix& a, const Matrix& b);

// H_ij = k(X_i, X_j) + k(Y_i, Y_j) - k(X_i, Y_j) - k(Y_i, X_j)
struct HMatrix {
  Matrix entries;
  Index n() const { return entries.rows(); }
};

HMatrix build_h_matrix(const KernelSpec& spec, const SampleSet& x, const SampleSet& y);
// From the Gram matrix of the pooled sample [X; Y] (X first, n points each).
HMatrix h_from_pooled_gram(const Matrix& pooled_gram, Index n);

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);
Matrix pairwise_sq_dists(const Matrix& a);
// Median of |a_i - a_j| over i < j.
double median_pairwise_distance(const Matrix& points);

}  // namespace learnmmd
