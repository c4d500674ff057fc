#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "learnmmd/datasets.hpp"
#include "learnmmd/deepnet.hpp"
#include "learnmmd/kernels.hpp"

namespace learnmmd {

struct TrainConfig {
  Objective objective = Objective::PowerRatio;
  KernelFamily variant = KernelFamily::Deep;
  int epochs = 1000;
  int batch_size = 0;  // total points per minibatch, half from each sample; 0 = full batch
  double learning_rate = 5e-4;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;

  int hidden_dim = 50;
  int output_dim = 50;
  int depth = 5;

  EpsilonParam epsilon_param = EpsilonParam::Logistic;
  double initial_epsilon = 0.5;

  // Gaussian (O) family: start from the best bandwidth on this grid of
  // multipliers of the median distance before running Adam.
  bool grid_init = true;
  std::vector<double> grid_multipliers;  // empty = 10^linspace(-2, 2, 21)
  // D family: pick sigma_q by the same grid search; false = median distance.
  bool q_grid_init = true;

  // Scalar fit after cross-entropy training of G and D kernels.
  int posthoc_epochs = 200;
  double posthoc_learning_rate = 1e-2;

  double max_seconds = 0.0;  // 0 = no wall-clock limit

  // All problems at once; empty when the configuration is usable.
  std::vector<std::string> validation_errors() const;
  // Throws std::invalid_argument joining validation_errors().
  void validate() const;
};

struct TrainReport {
  std::vector<double> trace;          // mean minibatch objective per epoch
  std::vector<double> posthoc_trace;  // scalar fit after C training, if any
  TrainableParams params;
  KernelSpec kernel;
  double initial_objective = 0.0;  // full training set, before the first update
  double final_objective = 0.0;    // full training set, after the last update
  int epochs_run = 0;
  bool stopped_by_time = false;
  double seconds = 0.0;
};

// Parameters before any update: Glorot net, sigma_phi at the median feature
// distance, sigma_q from the grid search (O always, D when q_grid_init) or
// the median input distance, epsilon = initial_epsilon.
TrainableParams initial_params(const TrainConfig& config, const SampleSet& train_p, const SampleSet& train_q);

TrainReport train_kernel(const TrainConfig& config, const SampleSet& train_p, const SampleSet& train_q);

// Gaussian kernel maximizing J over the candidates; ties go to the smallest bandwidth.
KernelSpec grid_search_bandwidth(const SampleSet& train_p, const SampleSet& train_q,
                                 const std::vector<double>& candidate_log_sigmas, double lambda = kDefaultLambda);

// log(m * median) for each multiplier m, median taken over the pooled sample.
std::vector<double> median_bandwidth_grid(const SampleSet& train_p, const SampleSet& train_q,
                                          const std::vector<double>& multipliers);
std::vector<double> default_grid_multipliers();

}  // namespace learnmmd
