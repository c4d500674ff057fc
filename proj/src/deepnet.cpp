#include "learnmmd/deepnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace learnmmd {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "O";
    case KernelFamily::FeatureGaussian: return "G";
    case KernelFamily::Deep: return "D";
    case KernelFamily::Sign: return "S";
    case KernelFamily::Linear: return "L";
    case KernelFamily::NormalizedTanh: return "T";
  }
  return "?";
}

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::PowerRatio: return "J";
    case Objective::Mmd: return "M";
    case Objective::CrossEntropy: return "C";
  }
  return "?";
}

KernelFamily parse_kernel_family(const std::string& text) {
  if (text == "O" || text == "gaussian") return KernelFamily::Gaussian;
  if (text == "G" || text == "feature_gaussian") return KernelFamily::FeatureGaussian;
  if (text == "D" || text == "deep") return KernelFamily::Deep;
  if (text == "S" || text == "sign") return KernelFamily::Sign;
  if (text == "L" || text == "linear") return KernelFamily::Linear;
  if (text == "T" || text == "NormalizedTanh" || text == "tanh") return KernelFamily::NormalizedTanh;
  throw std::invalid_argument("unknown kernel variant '" + text + "' (expected one of O, G, D, S, L, T)");
}

Objective parse_objective(const std::string& text) {
  if (text == "J" || text == "power") return Objective::PowerRatio;
  if (text == "M" || text == "mmd") return Objective::Mmd;
  if (text == "C" || text == "cross_entropy") return Objective::CrossEntropy;
  throw std::invalid_argument("unknown objective '" + text + "' (expected one of J, M, C)");
}

bool uses_network(KernelFamily family) { return family != KernelFamily::Gaussian; }

bool uses_head(KernelFamily family) {
  return family == KernelFamily::Sign || family == KernelFamily::Linear || family == KernelFamily::NormalizedTanh;
}

double TrainableParams::epsilon() const {
  return epsilon_param == EpsilonParam::Logistic ? logistic(logit_epsilon) : std::exp(logit_epsilon);
}

KernelSpec to_kernel_spec(const TrainableParams& p) {
  auto require_head = [&]() -> const ClassifierHead& {
    if (!p.head) throw std::invalid_argument("kernel variant " + to_string(p.family) + " needs a classifier head");
    return *p.head;
  };
  switch (p.family) {
    case KernelFamily::Gaussian: return GaussianKernel{p.log_sigma_q};
    case KernelFamily::FeatureGaussian: return FeatureGaussianKernel{p.net, p.log_sigma_phi};
    case KernelFamily::Deep:
      return DeepGaussianKernel{p.net, p.log_sigma_phi, p.log_sigma_q, p.logit_epsilon, p.epsilon_param};
    case KernelFamily::Sign: return SignScoreKernel{p.net, require_head()};
    case KernelFamily::Linear: return LinearScoreKernel{p.net, require_head()};
    case KernelFamily::NormalizedTanh: return TanhScoreKernel{p.net, require_head(), p.frobenius_norm};
  }
  throw std::logic_error("unreachable");
}

namespace {

int scalar_count(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return 1;
    case KernelFamily::FeatureGaussian: return 1;
    case KernelFamily::Deep: return 3;
    default: return 0;
  }
}

// Visits every trainable block in flat order.
template <typename P, typename F>
void for_each_block(P& p, F&& f) {
  for (auto& layer : p.net.layers) {
    f(layer.weight.data(), layer.weight.size());
    f(layer.bias.data(), layer.bias.size());
  }
  if (p.head) {
    f(p.head->w.data(), p.head->w.size());
    f(&p.head->b, Index{1});
  }
  switch (p.family) {
    case KernelFamily::Gaussian: f(&p.log_sigma_q, Index{1}); break;
    case KernelFamily::FeatureGaussian: f(&p.log_sigma_phi, Index{1}); break;
    case KernelFamily::Deep:
      f(&p.log_sigma_phi, Index{1});
      f(&p.log_sigma_q, Index{1});
      f(&p.logit_epsilon, Index{1});
      break;
    default: break;
  }
}

}  // namespace

Index parameter_count(const TrainableParams& params) {
  Index count = params.net.parameter_count() + scalar_count(params.family);
  if (params.head) count += params.head->w.size() + 1;
  return count;
}

Vector flatten(const TrainableParams& params) {
  Vector flat(parameter_count(params));
  Index offset = 0;
  for_each_block(params, [&](const double* data, Index size) {
    flat.segment(offset, size) = Eigen::Map<const Vector>(data, size);
    offset += size;
  });
  return flat;
}

void unflatten(const Vector& flat, TrainableParams& params) {
  if (flat.size() != parameter_count(params)) throw std::invalid_argument("unflatten: size mismatch");
  Index offset = 0;
  for_each_block(params, [&](double* data, Index size) {
    Eigen::Map<Vector>(data, size) = flat.segment(offset, size);
    offset += size;
  });
}

TrainableParams zeros_like(const TrainableParams& params) {
  TrainableParams out = params;
  unflatten(Vector::Zero(parameter_count(params)), out);
  return out;
}

namespace {

double gaussian_of(double sq_dist, double sigma) { return std::exp(-std::max(sq_dist, 0.0) / (2.0 * sigma * sigma)); }

[[noreturn]] void throw_non_finite(const TrainableParams& params, const std::string& what) {
  std::ostringstream msg;
  msg << "non-finite " << what << " (parameter norm " << flatten(params).norm();
  for (std::size_t l = 0; l < params.net.layers.size(); ++l) {
    msg << ", layer " << l << " weight norm " << params.net.layers[l].weight.norm();
  }
  msg << ", log_sigma_phi " << params.log_sigma_phi << ", log_sigma_q " << params.log_sigma_q << ", logit_epsilon "
      << params.logit_epsilon << ")";
  throw NonFiniteError(msg.str());
}

void check_finite(const TrainableParams& params, double value, const TrainableParams* gradient) {
  if (!std::isfinite(value)) throw_non_finite(params, "objective value");
  if (gradient && !flatten(*gradient).allFinite()) throw_non_finite(params, "gradient");
}

// dL/dF for L = sum_ab G_ab |F_a - F_b|^2 with G symmetric.
Matrix sq_dist_backward(const Matrix& g, const Matrix& features) {
  const Vector row_sums = g.rowwise().sum();
  return 4.0 * (row_sums.asDiagonal() * features - g * features);
}

ObjectiveResult kernel_objective(const TrainableParams& p, const Matrix& x, const Matrix& y, Objective objective,
                                 double lambda, GradientSelection sel) {
  if (x.rows() != y.rows()) throw std::invalid_argument("objective J/M requires |X| = |Y|");
  if (x.rows() < 2) throw std::invalid_argument("objective J/M requires at least two points per sample");
  if (x.cols() != y.cols()) throw std::invalid_argument("objective: X and Y differ in dimension");
  if (p.family == KernelFamily::Sign) {
    throw std::invalid_argument("kernel variant S is non-differentiable and hence difficult to optimize");
  }
  if (uses_head(p.family) && !p.head) throw std::invalid_argument("kernel variant needs a classifier head");
  if (objective == Objective::PowerRatio && !(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

  const Index n = x.rows();
  const Index big = 2 * n;
  Matrix z(big, x.cols());
  z << x, y;

  std::optional<ForwardCache> cache;
  if (uses_network(p.family)) cache = forward_cached(p.net, z);
  const Matrix* features = cache ? &cache->output : nullptr;

  // Pooled Gram matrix and the pieces its derivative needs.
  Matrix k(big, big);
  Matrix dx, dphi, kappa, q;
  Vector scores, squashed;
  const double sigma_phi = std::exp(p.log_sigma_phi);
  const double sigma_q = std::exp(p.log_sigma_q);
  const double eps = p.family == KernelFamily::Deep ? p.epsilon() : 0.0;
  switch (p.family) {
    case KernelFamily::Gaussian:
      dx = pairwise_sq_dists(z);
      q = dx.unaryExpr([sigma_q](double v) { return gaussian_of(v, sigma_q); });
      k = q;
      break;
    case KernelFamily::FeatureGaussian:
      dphi = pairwise_sq_dists(*features);
      kappa = dphi.unaryExpr([sigma_phi](double v) { return gaussian_of(v, sigma_phi); });
      k = kappa;
      break;
    case KernelFamily::Deep:
      dphi = pairwise_sq_dists(*features);
      dx = pairwise_sq_dists(z);
      kappa = dphi.unaryExpr([sigma_phi](double v) { return gaussian_of(v, sigma_phi); });
      q = dx.unaryExpr([sigma_q](double v) { return gaussian_of(v, sigma_q); });
      k = ((1.0 - eps) * kappa.array() + eps) * q.array();
      break;
    case KernelFamily::Linear:
      scores = (*features * p.head->w).array() + p.head->b;
      k = scores * scores.transpose();
      break;
    case KernelFamily::NormalizedTanh:
      scores = (*features * p.head->w).array() + p.head->b;
      squashed = scores.unaryExpr([s = p.frobenius_norm](double f) { return std::tanh(f / s); });
      k = squashed * squashed.transpose();
      break;
    case KernelFamily::Sign: break;
  }

  const HMatrix h = h_from_pooled_gram(k, n);
  const double nd = static_cast<double>(n);
  PowerCriterion pc;
  pc.lambda = lambda;
  pc.mmd2_hat = mmd2_u(h);
  pc.sigma2_hat = variance_hat(h, objective == Objective::PowerRatio ? lambda : std::max(lambda, 0.0));

  ObjectiveResult result;
  double d_mmd = 1.0;
  double d_sigma2 = 0.0;
  if (objective == Objective::PowerRatio) {
    const double root = std::sqrt(pc.sigma2_hat);
    pc.j_hat = pc.mmd2_hat / root;
    result.value = pc.j_hat;
    d_mmd = 1.0 / root;
    d_sigma2 = -0.5 * pc.mmd2_hat / (pc.sigma2_hat * root);
  } else {
    pc.j_hat = pc.mmd2_hat / std::sqrt(pc.sigma2_hat);
    result.value = pc.mmd2_hat;
  }
  result.criterion = pc;
  result.gradient = zeros_like(p);
  if (!std::isfinite(result.value)) check_finite(p, result.value, nullptr);

  const bool need_net = sel.net && uses_network(p.family);
  const bool need_head = sel.head && p.head.has_value();
  const bool need_scalars = sel.scalars && scalar_count(p.family) > 0;
  if (!need_net && !need_head && !need_scalars) return result;

  // dL/dH_ij = d_mmd [i != j] / (n (n - 1)) + d_sigma2 * 8 (m_i - mbar) / n^2, m_i = row mean.
  const Vector row_means = h.entries.rowwise().sum() / nd;
  const double grand = row_means.mean();
  Matrix grad_h = Matrix::Constant(n, n, d_mmd / (nd * (nd - 1.0)));
  grad_h.diagonal().setZero();
  grad_h.colwise() += (d_sigma2 * 8.0 / (nd * nd)) * (row_means.array() - grand).matrix();
  const Matrix gs = 0.5 * (grad_h + grad_h.transpose());

  // Symmetric gradient with respect to the pooled Gram matrix.
  Matrix grad_k(big, big);
  grad_k.topLeftCorner(n, n) = gs;
  grad_k.bottomRightCorner(n, n) = gs;
  grad_k.topRightCorner(n, n) = -gs;
  grad_k.bottomLeftCorner(n, n) = -gs;

  TrainableParams& g = result.gradient;
  Matrix grad_features;  // dL/dphi(z), rows = points
  switch (p.family) {
    case KernelFamily::Gaussian:
      if (need_scalars) g.log_sigma_q = (grad_k.array() * q.array() * dx.array()).sum() / (sigma_q * sigma_q);
      break;
    case KernelFamily::FeatureGaussian: {
      if (need_scalars) {
        g.log_sigma_phi = (grad_k.array() * kappa.array() * dphi.array()).sum() / (sigma_phi * sigma_phi);
      }
      if (need_net) {
        const Matrix grad_d = (grad_k.array() * kappa.array()) * (-0.5 / (sigma_phi * sigma_phi));
        grad_features = sq_dist_backward(grad_d, *features);
      }
      break;
    }
    case KernelFamily::Deep: {
      if (need_scalars) {
        const double deps_dt = p.epsilon_param == EpsilonParam::Logistic ? eps * (1.0 - eps) : eps;
        g.logit_epsilon = (grad_k.array() * (1.0 - kappa.array()) * q.array()).sum() * deps_dt;
        g.log_sigma_phi =
            (1.0 - eps) * (grad_k.array() * q.array() * kappa.array() * dphi.array()).sum() / (sigma_phi * sigma_phi);
        g.log_sigma_q = (grad_k.array() * k.array() * dx.array()).sum() / (sigma_q * sigma_q);
      }
      if (need_net) {
        const Matrix grad_d = (grad_k.array() * q.array() * kappa.array()) * (-(1.0 - eps) * 0.5 / (sigma_phi * sigma_phi));
        grad_features = sq_dist_backward(grad_d, *features);
      }
      break;
    }
    case KernelFamily::Linear:
    case KernelFamily::NormalizedTanh: {
      Vector grad_scores;
      if (p.family == KernelFamily::Linear) {
        grad_scores = 2.0 * (grad_k * scores);
      } else {
        const Vector grad_squashed = 2.0 * (grad_k * squashed);
        grad_scores = grad_squashed.array() * (1.0 - squashed.array().square()) / p.frobenius_norm;
      }
      if (need_head) {
        g.head->w = features->transpose() * grad_scores;
        g.head->b = grad_scores.sum();
      }
      if (need_net) grad_features = grad_scores * p.head->w.transpose();
      break;
    }
    case KernelFamily::Sign: break;
  }
  if (need_net && grad_features.size() > 0) backward(p.net, *cache, grad_features, g.net);
  check_finite(p, result.value, &g);
  return result;
}

ObjectiveResult cross_entropy_objective(const TrainableParams& p, const Matrix& x, const Matrix& y,
                                        GradientSelection sel) {
  if (!p.head) throw std::invalid_argument("objective C needs a classifier head");
  if (x.rows() < 1 || y.rows() < 1) throw std::invalid_argument("objective C needs at least one point per sample");
  if (x.cols() != y.cols()) throw std::invalid_argument("objective: X and Y differ in dimension");
  const Index nx = x.rows();
  const Index total = nx + y.rows();
  Matrix z(total, x.cols());
  z << x, y;
  const ForwardCache cache = forward_cached(p.net, z);
  const Vector f = (cache.output * p.head->w).array() + p.head->b;

  // Mean binary cross-entropy with P(x in P) = logistic(f): label 1 -> softplus(-f), label 0 -> softplus(f).
  double loss = 0.0;
  Vector grad_f(total);
  const double inv = 1.0 / static_cast<double>(total);
  for (Index i = 0; i < total; ++i) {
    if (i < nx) {
      loss += softplus(-f(i));
      grad_f(i) = inv * logistic(-f(i));
    } else {
      loss += softplus(f(i));
      grad_f(i) = -inv * logistic(f(i));
    }
  }
  ObjectiveResult result;
  result.value = -loss * inv;
  result.gradient = zeros_like(p);
  if (!std::isfinite(result.value)) check_finite(p, result.value, nullptr);
  if (sel.head) {
    result.gradient.head->w = cache.output.transpose() * grad_f;
    result.gradient.head->b = grad_f.sum();
  }
  if (sel.net) backward(p.net, cache, grad_f * p.head->w.transpose(), result.gradient.net);
  check_finite(p, result.value, &result.gradient);
  return result;
}

}  // namespace

ObjectiveResult objective_and_grad(const TrainableParams& params, const Matrix& x, const Matrix& y,
                                   Objective objective, double lambda, GradientSelection selection) {
  if (objective == Objective::CrossEntropy) return cross_entropy_objective(params, x, y, selection);
  return kernel_objective(params, x, y, objective, lambda, selection);
}

double objective_value(const TrainableParams& params, const Matrix& x, const Matrix& y, Objective objective,
                       double lambda) {
  return objective_and_grad(params, x, y, objective, lambda, GradientSelection{false, false, false}).value;
}

void adam_step(AdamState& state, Vector& params, const Vector& gradient, bool maximize) {
  if (params.size() != gradient.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double sign = maximize ? -1.0 : 1.0;
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (Index i = 0; i < params.size(); ++i) {
    const double g = sign * gradient(i);
    state.m(i) = state.beta1 * state.m(i) + (1.0 - state.beta1) * g;
    state.v(i) = state.beta2 * state.v(i) + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m(i) / bias1;
    const double v_hat = state.v(i) / bias2;
    params(i) -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace learnmmd
