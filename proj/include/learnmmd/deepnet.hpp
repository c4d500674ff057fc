#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "learnmmd/estimators.hpp"
#include "learnmmd/kernels.hpp"
#include "learnmmd/network.hpp"

namespace learnmmd {

// Kernel families that can be trained. Letters follow the ablation naming:
// S sign, L linear, G Gaussian on features, D deep; O is a plain Gaussian on
// the inputs (a single bandwidth).
enum class KernelFamily { Gaussian, FeatureGaussian, Deep, Sign, Linear, NormalizedTanh };

// J: power criterion, M: MMD estimate, C: negative cross-entropy.
enum class Objective { PowerRatio, Mmd, CrossEntropy };

std::string to_string(KernelFamily family);
std::string to_string(Objective objective);
KernelFamily parse_kernel_family(const std::string& text);
Objective parse_objective(const std::string& text);

bool uses_network(KernelFamily family);
bool uses_head(KernelFamily family);

// Everything a training run may update. Which scalars are live depends on the
// family: Gaussian uses log_sigma_q only, FeatureGaussian log_sigma_phi only,
// Deep all three.
struct TrainableParams {
  KernelFamily family = KernelFamily::Deep;
  NetParams net;
  std::optional<ClassifierHead> head;
  double log_sigma_phi = 0.0;
  double log_sigma_q = 0.0;
  double logit_epsilon = 0.0;
  EpsilonParam epsilon_param = EpsilonParam::Logistic;
  double frobenius_norm = 1.0;  // NormalizedTanh scale; never trained

  double epsilon() const;
  friend bool operator==(const TrainableParams&, const TrainableParams&) = default;
};

KernelSpec to_kernel_spec(const TrainableParams& params);

// Flat view used by the optimizer: net layers (weights then bias), head, live
// scalars.
Index parameter_count(const TrainableParams& params);
Vector flatten(const TrainableParams& params);
void unflatten(const Vector& flat, TrainableParams& params);
TrainableParams zeros_like(const TrainableParams& params);

// Parameter groups to differentiate; excluded groups get zero gradient.
struct GradientSelection {
  bool net = true;
  bool head = true;
  bool scalars = true;
};

struct ObjectiveResult {
  double value = 0.0;
  TrainableParams gradient;
  std::optional<PowerCriterion> criterion;  // set for J and M
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value and exact gradient of the objective on minibatch (X, Y). J and M need
// |X| = |Y| >= 2; C needs a classifier head and at least one point per side
// (X labelled 1, Y labelled 0).
ObjectiveResult objective_and_grad(const TrainableParams& params, const Matrix& x, const Matrix& y,
                                   Objective objective, double lambda = kDefaultLambda,
                                   GradientSelection selection = {});

// Objective value only, through the same code path as the gradient.
double objective_value(const TrainableParams& params, const Matrix& x, const Matrix& y, Objective objective,
                       double lambda = kDefaultLambda);

struct AdamState {
  std::size_t step = 0;
  Vector m;
  Vector v;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(Index size, double lr) : m(Vector::Zero(size)), v(Vector::Zero(size)), learning_rate(lr) {}
};

// Bias-corrected Adam update; maximize ascends the gradient.
void adam_step(AdamState& state, Vector& params, const Vector& gradient, bool maximize);

}  // namespace learnmmd
