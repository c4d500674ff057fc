#include "learnmmd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace learnmmd {

std::vector<std::string> TrainConfig::validation_errors() const {
  std::vector<std::string> errors;
  const bool kernel_objective = objective != Objective::CrossEntropy;
  if (variant == KernelFamily::Sign && kernel_objective) {
    errors.push_back("kernel variant S with objective " + to_string(objective) +
                     " is rejected: the sign kernel is non-differentiable and hence difficult to optimize");
  }
  if (variant == KernelFamily::Linear && objective == Objective::Mmd) {
    errors.push_back("kernel variant L with objective M is rejected: the MMD of an unbounded linear kernel can grow "
                     "without limit; use kernel variant T (normalized tanh) instead");
  }
  if (variant == KernelFamily::Gaussian && objective == Objective::CrossEntropy) {
    errors.push_back("kernel variant O has no classifier and cannot be trained with objective C");
  }
  if (epochs < 0) errors.push_back("epochs must be >= 0");
  if (batch_size < 0) errors.push_back("batch_size must be >= 0");
  if (batch_size % 2 != 0) errors.push_back("batch_size must be even (half from each sample)");
  if (kernel_objective && batch_size > 0 && batch_size < 4) {
    errors.push_back("batch_size must be 0 or >= 4 for objectives J and M");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) errors.push_back("learning_rate must be positive");
  if (objective == Objective::PowerRatio && !(lambda > 0.0)) errors.push_back("lambda must be positive for objective J");
  if (lambda < 0.0) errors.push_back("lambda must be nonnegative");
  if (uses_network(variant)) {
    if (hidden_dim < 1) errors.push_back("hidden_dim must be >= 1");
    if (output_dim < 1) errors.push_back("output_dim must be >= 1");
    if (depth < 1) errors.push_back("depth must be >= 1");
  }
  if (!(initial_epsilon > 0.0 && initial_epsilon < 1.0)) errors.push_back("initial_epsilon must lie in (0, 1)");
  if (posthoc_epochs < 0) errors.push_back("posthoc_epochs must be >= 0");
  if (!(posthoc_learning_rate > 0.0)) errors.push_back("posthoc_learning_rate must be positive");
  if (max_seconds < 0.0) errors.push_back("max_seconds must be >= 0");
  for (double m : grid_multipliers) {
    if (!(m > 0.0)) {
      errors.push_back("grid multipliers must be positive");
      break;
    }
  }
  return errors;
}

void TrainConfig::validate() const {
  const auto errors = validation_errors();
  if (errors.empty()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < errors.size(); ++i) msg << (i ? "; " : "") << errors[i];
  throw std::invalid_argument(msg.str());
}

std::vector<double> default_grid_multipliers() {
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(std::pow(10.0, -2.0 + 0.2 * i));
  return out;
}

namespace {

constexpr Index kMedianPoints = 1000;

// Median distance over at most kMedianPoints rows of each block.
double pooled_median(const Matrix& a, const Matrix& b) {
  const Index na = std::min(a.rows(), kMedianPoints);
  const Index nb = std::min(b.rows(), kMedianPoints);
  Matrix pooled(na + nb, a.cols());
  pooled << a.topRows(na), b.topRows(nb);
  const double med = median_pairwise_distance(pooled);
  return med > 0.0 ? med : 1.0;
}

void check_samples(const SampleSet& p, const SampleSet& q) {
  if (p.size() != q.size()) throw std::invalid_argument("train_kernel: training samples must have equal size");
  if (p.size() < 2) throw std::invalid_argument("train_kernel: need at least two training points per sample");
  if (p.dim() != q.dim()) throw std::invalid_argument("train_kernel: samples differ in dimension");
}

void gather_rows(const Matrix& src, const std::vector<std::size_t>& order, std::size_t begin, std::size_t count,
                 Matrix& dst) {
  dst.resize(static_cast<Index>(count), src.cols());
  for (std::size_t i = 0; i < count; ++i) dst.row(static_cast<Index>(i)) = src.row(static_cast<Index>(order[begin + i]));
}

struct AdamRun {
  std::vector<double> trace;
  int epochs_run = 0;
  bool stopped_by_time = false;
};

AdamRun run_adam(TrainableParams& params, const Matrix& p, const Matrix& q, Objective objective, double lambda,
                 int epochs, int batch_size, double learning_rate, GradientSelection selection, std::uint64_t seed,
                 double max_seconds, std::chrono::steady_clock::time_point start) {
  AdamRun run;
  const std::size_t n = static_cast<std::size_t>(p.rows());
  const std::size_t half = batch_size == 0 ? n : std::min(n, static_cast<std::size_t>(batch_size / 2));
  const std::size_t min_batch = objective == Objective::CrossEntropy ? 1 : 2;
  const bool maximize = true;  // every objective is oriented so that larger is better
  AdamState adam(parameter_count(params), learning_rate);
  Rng rng(seed);
  Matrix xb, yb;
  Vector flat = flatten(params);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const bool full = half >= n;
    std::vector<std::size_t> order_p, order_q;
    if (!full) {
      order_p = random_permutation(n, rng);
      order_q = random_permutation(n, rng);
    }
    double sum = 0.0;
    int steps = 0;
    for (std::size_t begin = 0; begin < n; begin += half) {
      const std::size_t count = std::min(half, n - begin);
      if (count < min_batch) break;
      ObjectiveResult r;
      if (full) {
        r = objective_and_grad(params, p, q, objective, lambda, selection);
      } else {
        gather_rows(p, order_p, begin, count, xb);
        gather_rows(q, order_q, begin, count, yb);
        r = objective_and_grad(params, xb, yb, objective, lambda, selection);
      }
      adam_step(adam, flat, flatten(r.gradient), maximize);
      unflatten(flat, params);
      sum += r.value;
      ++steps;
    }
    run.trace.push_back(steps ? sum / steps : 0.0);
    ++run.epochs_run;
    if (max_seconds > 0.0) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > max_seconds && epoch + 1 < epochs) {
        run.stopped_by_time = true;
        break;
      }
    }
  }
  return run;
}

}  // namespace

std::vector<double> median_bandwidth_grid(const SampleSet& train_p, const SampleSet& train_q,
                                          const std::vector<double>& multipliers) {
  const double med = pooled_median(train_p.points(), train_q.points());
  std::vector<double> out;
  out.reserve(multipliers.size());
  for (double m : multipliers) out.push_back(std::log(m * med));
  return out;
}

KernelSpec grid_search_bandwidth(const SampleSet& train_p, const SampleSet& train_q,
                                 const std::vector<double>& candidate_log_sigmas, double lambda) {
  if (candidate_log_sigmas.empty()) throw std::invalid_argument("grid_search_bandwidth: no candidates");
  if (train_p.size() != train_q.size()) throw std::invalid_argument("grid_search_bandwidth: size mismatch");
  Matrix pooled(2 * train_p.size(), train_p.dim());
  pooled << train_p.points(), train_q.points();
  const Matrix d2 = pairwise_sq_dists(pooled);
  double best_j = -std::numeric_limits<double>::infinity();
  double best_log_sigma = candidate_log_sigmas.front();
  for (double log_sigma : candidate_log_sigmas) {
    const double s2 = 2.0 * std::exp(2.0 * log_sigma);
    const Matrix k = d2.unaryExpr([s2](double v) { return std::exp(-std::max(v, 0.0) / s2); });
    const double j = j_hat(h_from_pooled_gram(k, train_p.size()), lambda).j_hat;
    if (j > best_j || (j == best_j && log_sigma < best_log_sigma)) {
      best_j = j;
      best_log_sigma = log_sigma;
    }
  }
  return GaussianKernel{best_log_sigma};
}

namespace {

double initial_log_sigma_q(const TrainConfig& config, const SampleSet& train_p, const SampleSet& train_q) {
  const bool grid_q = (config.variant == KernelFamily::Gaussian && config.grid_init) ||
                      (config.variant == KernelFamily::Deep && config.q_grid_init);
  if (!grid_q) return std::log(pooled_median(train_p.points(), train_q.points()));
  const auto& multipliers = config.grid_multipliers.empty() ? default_grid_multipliers() : config.grid_multipliers;
  const KernelSpec best =
      grid_search_bandwidth(train_p, train_q, median_bandwidth_grid(train_p, train_q, multipliers), config.lambda);
  return std::get<GaussianKernel>(best.kernel).log_sigma;
}

}  // namespace

TrainableParams initial_params(const TrainConfig& config, const SampleSet& train_p, const SampleSet& train_q) {
  config.validate();
  check_samples(train_p, train_q);
  TrainableParams params;
  params.family = config.variant;
  params.epsilon_param = config.epsilon_param;
  params.logit_epsilon =
      config.epsilon_param == EpsilonParam::Logistic ? logit(config.initial_epsilon) : std::log(config.initial_epsilon);
  if (uses_network(config.variant)) {
    params.net = init_net(train_p.dim(), config.hidden_dim, config.output_dim, static_cast<std::size_t>(config.depth),
                          derive_seed(config.seed, 0));
    params.log_sigma_phi = std::log(
        pooled_median(forward_batch(params.net, train_p.points()), forward_batch(params.net, train_q.points())));
  }
  if (uses_head(config.variant) || config.objective == Objective::CrossEntropy)
    params.head = init_head(config.output_dim, derive_seed(config.seed, 1));
  if (config.variant == KernelFamily::NormalizedTanh) {
    const double norm = std::sqrt(train_p.points().squaredNorm() + train_q.points().squaredNorm());
    params.frobenius_norm = norm > 0.0 ? norm : 1.0;
  }
  params.log_sigma_q = initial_log_sigma_q(config, train_p, train_q);
  return params;
}

TrainReport train_kernel(const TrainConfig& config, const SampleSet& train_p, const SampleSet& train_q) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.params = initial_params(config, train_p, train_q);
  TrainableParams& params = report.params;
  const Matrix& p = train_p.points();
  const Matrix& q = train_q.points();

  report.initial_objective = objective_value(params, p, q, config.objective, config.lambda);
  AdamRun run = run_adam(params, p, q, config.objective, config.lambda, config.epochs, config.batch_size,
                         config.learning_rate, GradientSelection{}, derive_seed(config.seed, 2), config.max_seconds,
                         start);
  report.trace = std::move(run.trace);
  report.epochs_run = run.epochs_run;
  report.stopped_by_time = run.stopped_by_time;
  report.final_objective =
      config.epochs == 0 ? report.initial_objective : objective_value(params, p, q, config.objective, config.lambda);

  const bool posthoc = config.objective == Objective::CrossEntropy && config.epochs > 0 &&
                       (config.variant == KernelFamily::FeatureGaussian || config.variant == KernelFamily::Deep);
  if (posthoc) {
    // Freeze the trained features and fit the kernel scalars on J.
    params.log_sigma_phi = std::log(pooled_median(forward_batch(params.net, p), forward_batch(params.net, q)));
    params.log_sigma_q = initial_log_sigma_q(config, train_p, train_q);
    params.logit_epsilon =
        config.epsilon_param == EpsilonParam::Logistic ? logit(config.initial_epsilon) : std::log(config.initial_epsilon);
    const double lambda = config.lambda > 0.0 ? config.lambda : kDefaultLambda;
    AdamRun fit = run_adam(params, p, q, Objective::PowerRatio, lambda, config.posthoc_epochs, 0,
                           config.posthoc_learning_rate, GradientSelection{false, false, true},
                           derive_seed(config.seed, 3), 0.0, start);
    report.posthoc_trace = std::move(fit.trace);
  }

  report.kernel = to_kernel_spec(params);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace learnmmd
